//! Guard generation for definitions and preconditions for conjectures.

pub mod simplify;
pub mod types;

use std::collections::{BTreeMap, HashMap};

use crate::builtins;
use crate::corpus::Corpus;
use crate::error::GuardError;
use crate::macros::expand;
use crate::term::{Symbol, Term};

pub use simplify::{
    check_contradiction, conjoin, explain_contradiction, simplify_guard, Contradiction, Simplifier,
};
use types::ReturnKinds;

/// Mutually exclusive recognizers.
pub const DISJOINT: [(&str, &str); 4] = [
    ("acl2-numberp", "consp"),
    ("integerp", "consp"),
    ("acl2-numberp", "symbolp"),
    ("consp", "symbolp"),
];

pub fn disjoint(a: &Symbol, b: &Symbol) -> bool {
    DISJOINT
        .iter()
        .any(|(x, y)| (a.is(x) && b.is(y)) || (a.is(y) && b.is(x)))
}

/// Memoised guards for one corpus.
pub struct GuardTable<'c> {
    corpus: &'c Corpus,
    returns: ReturnKinds,
    memo: BTreeMap<Symbol, Term>,
}

fn instantiate(guard: &Term, formals: &[Symbol], args: &[Term]) -> Term {
    let s: HashMap<Symbol, Term> = formals.iter().cloned().zip(args.iter().cloned()).collect();
    guard.subst(&s)
}

/// Every application in `t`, outermost first, left to right.
fn calls(t: &Term) -> Vec<(&Symbol, &[Term])> {
    let mut out = Vec::new();
    t.walk(&mut |n| {
        if let Term::App(h, args) = n {
            out.push((h, args.as_slice()));
        }
    });
    out
}

impl<'c> GuardTable<'c> {
    pub fn new(corpus: &'c Corpus) -> GuardTable<'c> {
        GuardTable {
            corpus,
            returns: ReturnKinds::infer(corpus),
            memo: BTreeMap::new(),
        }
    }

    /// Starts from previously computed entries (e.g. a cache).
    pub fn with_memo(corpus: &'c Corpus, memo: BTreeMap<Symbol, Term>) -> GuardTable<'c> {
        GuardTable {
            memo,
            ..GuardTable::new(corpus)
        }
    }

    pub fn memo(&self) -> &BTreeMap<Symbol, Term> {
        &self.memo
    }

    pub fn simplifier(&self) -> Simplifier<'_> {
        Simplifier {
            returns: &self.returns,
        }
    }

    pub fn simplify(&self, g: &Term) -> Term {
        self.simplifier().simplify(g)
    }

    /// Guard of a built-in or defined function over its formals.
    pub fn guard_of(&mut self, f: &Symbol) -> Result<Term, GuardError> {
        if let Some(b) = builtins::builtin(f) {
            return Ok(b.guard.clone());
        }
        if let Some(g) = self.memo.get(f) {
            return Ok(g.clone());
        }
        let corpus = self.corpus;
        let ev = corpus
            .defun(f)
            .ok_or_else(|| GuardError::UnknownFunction(f.clone()))?;
        if let Some(g) = ev.declared_guard.as_ref().filter(|g| !g.is_t()) {
            self.memo.insert(f.clone(), g.clone());
            return Ok(g.clone());
        }
        let mut parts = Vec::new();
        for (h, args) in calls(&ev.body) {
            // calls back into the function's own component contribute nothing
            if h == f || corpus.same_scc(h, f) {
                continue;
            }
            let g = self.guard_of(h)?;
            if g.is_t() {
                continue;
            }
            let formals = self.formals(h)?;
            parts.push(instantiate(&g, &formals, args));
        }
        let g = self.simplify(&conjoin(parts));
        self.memo.insert(f.clone(), g.clone());
        Ok(g)
    }

    fn formals(&self, f: &Symbol) -> Result<Vec<Symbol>, GuardError> {
        if let Some(b) = builtins::builtin(f) {
            return Ok(b.formals.clone());
        }
        self.corpus
            .defun(f)
            .map(|e| e.formals.clone())
            .ok_or_else(|| GuardError::UnknownFunction(f.clone()))
    }

    /// Instantiated guards of every call in `c`, before simplification.
    pub fn raw_preconditions(&mut self, c: &Term) -> Result<Vec<Term>, GuardError> {
        let c = expand(c);
        let mut parts = Vec::new();
        for (h, args) in calls(&c) {
            let g = self.guard_of(h)?;
            if !g.is_t() {
                let formals = self.formals(h)?;
                parts.push(instantiate(&g, &formals, args));
            }
        }
        Ok(parts)
    }

    pub fn generate_preconditions(&mut self, c: &Term) -> Result<Term, GuardError> {
        let parts = self.raw_preconditions(c)?;
        Ok(self.simplify(&conjoin(parts)))
    }

    /// The conjunct pair behind a nil precondition.
    pub fn contradiction(&mut self, c: &Term) -> Result<Option<Contradiction>, GuardError> {
        let parts = self.raw_preconditions(c)?;
        Ok(self.simplifier().run(&conjoin(parts)).err())
    }
}
