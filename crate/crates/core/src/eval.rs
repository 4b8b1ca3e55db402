//! Call-by-value evaluator for ground terms with ACL2 completion semantics.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::corpus::Corpus;
use crate::error::EvalError;
use crate::term::{Const, Symbol, Term};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i128),
    Nil,
    T,
    Cons(Arc<Value>, Arc<Value>),
    Sym(Symbol),
}

impl Value {
    pub fn truthy(&self) -> bool {
        !matches!(self, Value::Nil)
    }

    pub fn bool(b: bool) -> Value {
        if b {
            Value::T
        } else {
            Value::Nil
        }
    }

    pub fn cons(a: Value, b: Value) -> Value {
        Value::Cons(Arc::new(a), Arc::new(b))
    }

    pub fn list(items: impl IntoIterator<Item = Value>) -> Value {
        let items: Vec<Value> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .fold(Value::Nil, |acc, v| Value::cons(v, acc))
    }

    fn int_or_zero(&self) -> i128 {
        match self {
            Value::Int(i) => *i,
            _ => 0,
        }
    }

    /// The value as a term, for substituting witnesses back into formulas.
    /// Conses and symbols have no term form in the core language.
    pub fn to_term(&self) -> Option<Term> {
        match self {
            Value::Int(i) => i64::try_from(*i).ok().map(Term::int),
            Value::Nil => Some(Term::nil()),
            Value::T => Some(Term::t()),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Nil => write!(f, "nil"),
            Value::T => write!(f, "t"),
            Value::Sym(s) => write!(f, "{s}"),
            Value::Cons(a, b) => {
                write!(f, "({a}")?;
                let mut rest: &Value = b;
                loop {
                    match rest {
                        Value::Nil => break,
                        Value::Cons(x, y) => {
                            write!(f, " {x}")?;
                            rest = y;
                        }
                        other => {
                            write!(f, " . {other}")?;
                            break;
                        }
                    }
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_depth: usize,
    pub max_steps: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_depth: 5000,
            max_steps: 2_000_000,
        }
    }
}

pub type Env = [(Symbol, Value)];

struct Machine<'a> {
    corpus: &'a Corpus,
    limits: Limits,
    depth: Cell<usize>,
    steps: Cell<u64>,
    /// Results of user calls made so far; definitions are pure.
    memo: RefCell<HashMap<(Symbol, Vec<Value>), Value>>,
}

pub fn eval(t: &Term, env: &Env, corpus: &Corpus) -> Result<Value, EvalError> {
    eval_with(t, env, corpus, Limits::default())
}

pub fn eval_with(t: &Term, env: &Env, corpus: &Corpus, limits: Limits) -> Result<Value, EvalError> {
    let m = Machine {
        corpus,
        limits,
        depth: Cell::new(0),
        steps: Cell::new(0),
        memo: RefCell::new(HashMap::new()),
    };
    m.eval(t, env)
}

fn arith(r: Option<i128>) -> Result<Value, EvalError> {
    r.map(Value::Int).ok_or(EvalError::Overflow)
}

impl Machine<'_> {
    fn eval(&self, t: &Term, env: &Env) -> Result<Value, EvalError> {
        let s = self.steps.get() + 1;
        if s > self.limits.max_steps {
            return Err(EvalError::StepLimit);
        }
        self.steps.set(s);
        match t {
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, x)| x.clone())
                .ok_or_else(|| EvalError::UnboundVariable(v.clone())),
            Term::Const(Const::Int(i)) => Ok(Value::Int(*i as i128)),
            Term::Const(Const::Nil) => Ok(Value::Nil),
            Term::Const(Const::T) => Ok(Value::T),
            Term::App(h, args) => self.apply(h, args, env),
        }
    }

    fn apply(&self, h: &Symbol, args: &[Term], env: &Env) -> Result<Value, EvalError> {
        match h.as_str() {
            "IF" => {
                check(h, args, 3)?;
                return if self.eval(&args[0], env)?.truthy() {
                    self.eval(&args[1], env)
                } else {
                    self.eval(&args[2], env)
                };
            }
            "AND" => {
                let mut last = Value::T;
                for a in args {
                    last = self.eval(a, env)?;
                    if !last.truthy() {
                        return Ok(Value::Nil);
                    }
                }
                return Ok(last);
            }
            "OR" => {
                for a in args {
                    let v = self.eval(a, env)?;
                    if v.truthy() {
                        return Ok(v);
                    }
                }
                return Ok(Value::Nil);
            }
            _ => {}
        }
        let vals = args
            .iter()
            .map(|a| self.eval(a, env))
            .collect::<Result<Vec<_>, _>>()?;
        let a = |i: usize| &vals[i];
        let v = match h.as_str() {
            "EQUAL" => {
                check(h, args, 2)?;
                Value::bool(a(0) == a(1))
            }
            "BINARY-+" => {
                check(h, args, 2)?;
                arith(a(0).int_or_zero().checked_add(a(1).int_or_zero()))?
            }
            "BINARY-*" => {
                check(h, args, 2)?;
                arith(a(0).int_or_zero().checked_mul(a(1).int_or_zero()))?
            }
            "UNARY--" => {
                check(h, args, 1)?;
                arith(a(0).int_or_zero().checked_neg())?
            }
            "<" => {
                check(h, args, 2)?;
                Value::bool(a(0).int_or_zero() < a(1).int_or_zero())
            }
            "NOT" => {
                check(h, args, 1)?;
                Value::bool(!a(0).truthy())
            }
            "IMPLIES" => {
                check(h, args, 2)?;
                Value::bool(!a(0).truthy() || a(1).truthy())
            }
            "ZP" => {
                check(h, args, 1)?;
                Value::bool(!matches!(a(0), Value::Int(i) if *i > 0))
            }
            "NATP" => {
                check(h, args, 1)?;
                Value::bool(matches!(a(0), Value::Int(i) if *i >= 0))
            }
            "INTEGERP" | "ACL2-NUMBERP" => {
                check(h, args, 1)?;
                Value::bool(matches!(a(0), Value::Int(_)))
            }
            "CONSP" => {
                check(h, args, 1)?;
                Value::bool(matches!(a(0), Value::Cons(..)))
            }
            "ENDP" => {
                check(h, args, 1)?;
                Value::bool(!matches!(a(0), Value::Cons(..)))
            }
            "SYMBOLP" => {
                check(h, args, 1)?;
                Value::bool(matches!(a(0), Value::Nil | Value::T | Value::Sym(_)))
            }
            "CAR" => {
                check(h, args, 1)?;
                match a(0) {
                    Value::Cons(x, _) => (**x).clone(),
                    _ => Value::Nil,
                }
            }
            "CDR" => {
                check(h, args, 1)?;
                match a(0) {
                    Value::Cons(_, y) => (**y).clone(),
                    _ => Value::Nil,
                }
            }
            "CONS" => {
                check(h, args, 2)?;
                Value::cons(a(0).clone(), a(1).clone())
            }
            "LENGTH" => {
                check(h, args, 1)?;
                let mut n = 0i128;
                let mut cur = a(0);
                while let Value::Cons(_, rest) = cur {
                    n += 1;
                    cur = rest;
                }
                Value::Int(n)
            }
            _ => return self.call_user(h, vals),
        };
        Ok(v)
    }

    fn call_user(&self, h: &Symbol, vals: Vec<Value>) -> Result<Value, EvalError> {
        let ev = self
            .corpus
            .defun(h)
            .ok_or_else(|| EvalError::UnknownFunction(h.clone()))?;
        if ev.formals.len() != vals.len() {
            return Err(EvalError::BadArity(h.clone(), vals.len()));
        }
        let key = (h.clone(), vals);
        if let Some(v) = self.memo.borrow().get(&key) {
            return Ok(v.clone());
        }
        let d = self.depth.get() + 1;
        if d > self.limits.max_depth {
            return Err(EvalError::DepthExceeded);
        }
        self.depth.set(d);
        let env: Vec<(Symbol, Value)> = ev
            .formals
            .iter()
            .cloned()
            .zip(key.1.iter().cloned())
            .collect();
        let r = self.eval(&ev.body, &env);
        self.depth.set(d - 1);
        if let Ok(v) = &r {
            self.memo.borrow_mut().insert(key, v.clone());
        }
        r
    }
}

fn check(h: &Symbol, args: &[Term], n: usize) -> Result<(), EvalError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(EvalError::BadArity(h.clone(), args.len()))
    }
}

/// Stack size for threads that evaluate deeply recursive definitions.
pub const EVAL_STACK: usize = 512 << 20;

/// A thread pool whose workers have room for [`Limits::max_depth`] nested
/// user calls.
pub fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .stack_size(EVAL_STACK)
            .thread_name(|i| format!("eval-{i}"))
            .build()
            .expect("evaluation thread pool")
    })
}
