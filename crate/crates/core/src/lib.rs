//! Statistical clustering of definitions and theorems, analogy-driven lemma
//! suggestion and guard-based precondition generation for corpora written in
//! a first-order ACL2-style Lisp.

pub mod analogy;
pub mod builtins;
pub mod cluster;
pub mod corpus;
pub mod counterexample;
pub mod error;
pub mod eval;
pub mod features;
pub mod guards;
pub mod macros;
pub mod recurrent;
pub mod sexpr;
pub mod term;

pub use cluster::{ClusterConfig, Clustering};
pub use corpus::{Corpus, Event, EventKind};
pub use features::ValueMap;
pub use recurrent::{DefinitionModel, Kind};
pub use term::{sym, Const, Symbol, Term};
