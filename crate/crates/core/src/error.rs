use thiserror::Error;

use crate::term::Symbol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("{file}:{line}: syntax error: {msg}")]
    Syntax {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("{file}:{line}: {name} is applied to {found} argument(s) but takes {expected}")]
    Arity {
        file: String,
        line: usize,
        name: Symbol,
        expected: usize,
        found: usize,
    },
    #[error("{file}:{line}: {event} calls {name}, which is never defined")]
    DanglingReference {
        file: String,
        line: usize,
        event: Symbol,
        name: Symbol,
    },
    #[error("{file}:{line}: variable {var} is free in the body of {event}")]
    FreeVariable {
        file: String,
        line: usize,
        event: Symbol,
        var: Symbol,
    },
    #[error("{file}:{line}: {name} is a built-in function and cannot be redefined")]
    BuiltinRedefinition {
        file: String,
        line: usize,
        name: Symbol,
    },
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("no value for function {0}")]
    MissingValue(Symbol),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("cannot form {wanted} clusters from {available} objects")]
    TooFewObjects { wanted: usize, available: usize },
    #[error("definition order problem: {0}")]
    CorpusOrder(Symbol),
    #[error("unknown name {0}")]
    UnknownName(Symbol),
    #[error("nothing to cluster")]
    Empty,
}

impl From<FeatureError> for ClusterError {
    fn from(e: FeatureError) -> ClusterError {
        match e {
            FeatureError::MissingValue(s) => ClusterError::CorpusOrder(s),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("recursion depth exceeded")]
    DepthExceeded,
    #[error("evaluation step limit exceeded")]
    StepLimit,
    #[error("integer overflow")]
    Overflow,
    #[error("unknown function {0}")]
    UnknownFunction(Symbol),
    #[error("unbound variable {0}")]
    UnboundVariable(Symbol),
    #[error("{0} applied to {1} argument(s)")]
    BadArity(Symbol, usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuardError {
    #[error("unknown function {0}")]
    UnknownFunction(Symbol),
}
