//! Random testing of conjectures against the evaluator.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::eval::{eval_with, pool, Limits, Value};
use crate::term::{Const, Symbol, Term};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub samples: usize,
    pub min_satisfying: usize,
    pub max_recursion_depth: usize,
    pub max_steps: u64,
    pub int_range: (i64, i64),
    pub max_list_len: usize,
    pub seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            samples: 100,
            min_satisfying: 30,
            max_recursion_depth: 5000,
            max_steps: 2_000_000,
            int_range: (-20, 20),
            max_list_len: 6,
            seed: 0,
        }
    }
}

impl TestConfig {
    pub fn limits(&self) -> Limits {
        Limits {
            max_depth: self.max_recursion_depth,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("no value satisfies {0}")]
    Unsatisfiable(String),
    #[error("could not find a value satisfying {0}")]
    Exhausted(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inconclusive {
    TooFewSatisfying,
    AllEvalsTrapped,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TestVerdict {
    Falsified(Witness),
    Survived(usize),
    Inconclusive(Inconclusive),
}

impl TestVerdict {
    pub fn survived(&self) -> bool {
        matches!(self, TestVerdict::Survived(_))
    }

    pub fn label(&self) -> String {
        match self {
            TestVerdict::Falsified(w) => format!("falsified by {w}"),
            TestVerdict::Survived(n) => format!("survived {n} tests"),
            TestVerdict::Inconclusive(Inconclusive::TooFewSatisfying) => {
                "inconclusive: too few satisfying samples".into()
            }
            TestVerdict::Inconclusive(Inconclusive::AllEvalsTrapped) => {
                "inconclusive: every evaluation trapped".into()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness(pub Vec<(Symbol, Value)>);

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (n, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "({n} {v})")?;
        }
        write!(f, ")")
    }
}

const INT: u8 = 1;
const NIL: u8 = 2;
const TRUE: u8 = 4;
const CONS: u8 = 8;
const SYM: u8 = 16;
const ALL: u8 = INT | NIL | TRUE | CONS | SYM;

const SYMBOLS: [&str; 3] = ["a", "b", "c"];

/// Kinds a variable may take plus bounds on its integer values.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Domain {
    kinds: u8,
    lo: i128,
    hi: i128,
}

impl Domain {
    fn any() -> Domain {
        Domain {
            kinds: ALL,
            lo: i128::MIN,
            hi: i128::MAX,
        }
    }

    fn only(kinds: u8) -> Domain {
        Domain {
            kinds,
            ..Domain::any()
        }
    }

    fn meet(self, o: Domain) -> Domain {
        Domain {
            kinds: self.kinds & o.kinds,
            lo: self.lo.max(o.lo),
            hi: self.hi.min(o.hi),
        }
        .normal()
    }

    fn join(self, o: Domain) -> Domain {
        let (a, b) = (self.normal(), o.normal());
        let (lo, hi) = match (a.kinds & INT != 0, b.kinds & INT != 0) {
            (true, true) => (a.lo.min(b.lo), a.hi.max(b.hi)),
            (true, false) => (a.lo, a.hi),
            (false, true) => (b.lo, b.hi),
            _ => (i128::MIN, i128::MAX),
        };
        Domain {
            kinds: a.kinds | b.kinds,
            lo,
            hi,
        }
    }

    fn normal(mut self) -> Domain {
        if self.lo > self.hi {
            self.kinds &= !INT;
        }
        self
    }

    fn is_empty(&self) -> bool {
        self.normal().kinds == 0
    }
}

fn int_lit(t: &Term) -> Option<i128> {
    match t {
        Term::Const(Const::Int(i)) => Some(*i as i128),
        _ => None,
    }
}

/// Splits `(and ...)` and `(if a b nil)` into conjuncts.
pub fn conjuncts(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    fn go(t: &Term, out: &mut Vec<Term>) {
        if let Some(args) = t.app_of("and") {
            args.iter().for_each(|a| go(a, out));
        } else if let Some([a, b, c]) = t.app_of("if") {
            if c.is_nil() {
                go(a, out);
                go(b, out);
            } else {
                out.push(t.clone());
            }
        } else if !t.is_t() {
            out.push(t.clone());
        }
    }
    go(t, &mut out);
    out
}

fn disjuncts(t: &Term) -> Option<Vec<Term>> {
    if let Some(args) = t.app_of("or") {
        return Some(args.to_vec());
    }
    if let Some([a, b, c]) = t.app_of("if") {
        if a == b {
            let mut out = vec![a.clone()];
            out.extend(disjuncts(c).unwrap_or_else(|| vec![c.clone()]));
            return Some(out);
        }
    }
    None
}

/// Over-approximates the values of `x` satisfying `p`.
fn domain_of(p: &Term, x: &Symbol) -> Domain {
    let is_x = |t: &Term| matches!(t, Term::Var(v) if v == x);
    if let Some(ds) = disjuncts(p) {
        return ds
            .iter()
            .map(|d| domain_of(d, x))
            .fold(Domain::only(0), Domain::join);
    }
    if p.app_of("and").is_some() || matches!(p.app_of("if"), Some([_, _, c]) if c.is_nil()) {
        return conjuncts(p)
            .iter()
            .map(|c| domain_of(c, x))
            .fold(Domain::any(), Domain::meet);
    }
    if p.is_nil() {
        return Domain::only(0);
    }
    let Term::App(h, args) = p else {
        return Domain::any();
    };
    match (h.as_str(), args.as_slice()) {
        ("NATP", [a]) if is_x(a) => Domain {
            kinds: INT,
            lo: 0,
            hi: i128::MAX,
        },
        ("INTEGERP" | "ACL2-NUMBERP", [a]) if is_x(a) => Domain::only(INT),
        ("CONSP", [a]) if is_x(a) => Domain::only(CONS),
        ("ENDP", [a]) if is_x(a) => Domain::only(ALL & !CONS),
        ("SYMBOLP", [a]) if is_x(a) => Domain::only(NIL | TRUE | SYM),
        ("EQUAL", [a, b]) | ("EQUAL", [b, a]) if is_x(a) && (b.is_nil() || b.is_t()) => {
            Domain::only(if b.is_nil() { NIL } else { TRUE })
        }
        ("EQUAL", [a, b]) | ("EQUAL", [b, a]) if is_x(a) && int_lit(b).is_some() => {
            let c = int_lit(b).unwrap();
            Domain {
                kinds: INT,
                lo: c,
                hi: c,
            }
        }
        // comparisons only bound the integer part; non-numbers act as 0
        ("<", [a, b]) if is_x(a) && int_lit(b).is_some() => Domain {
            kinds: ALL,
            lo: i128::MIN,
            hi: int_lit(b).unwrap() - 1,
        },
        ("<", [b, a]) if is_x(a) && int_lit(b).is_some() => Domain {
            kinds: ALL,
            lo: int_lit(b).unwrap() + 1,
            hi: i128::MAX,
        },
        ("ZP", [a]) if is_x(a) => Domain {
            kinds: ALL,
            lo: i128::MIN,
            hi: 0,
        },
        ("NOT", [q]) => match q.head().map(|s| s.as_str()) {
            Some("INTEGERP" | "ACL2-NUMBERP") if is_x(&q.args()[0]) => Domain::only(ALL & !INT),
            Some("CONSP") if is_x(&q.args()[0]) => Domain::only(ALL & !CONS),
            Some("ENDP") if is_x(&q.args()[0]) => Domain::only(CONS),
            Some("SYMBOLP") if is_x(&q.args()[0]) => Domain::only(INT | CONS),
            Some("ZP") if is_x(&q.args()[0]) => Domain {
                kinds: INT,
                lo: 1,
                hi: i128::MAX,
            },
            Some("<") => match q.args() {
                [a, b] if is_x(a) && int_lit(b).is_some() => Domain {
                    kinds: ALL,
                    lo: int_lit(b).unwrap(),
                    hi: i128::MAX,
                },
                [b, a] if is_x(a) && int_lit(b).is_some() => Domain {
                    kinds: ALL,
                    lo: i128::MIN,
                    hi: int_lit(b).unwrap(),
                },
                _ => Domain::any(),
            },
            _ => Domain::any(),
        },
        _ => Domain::any(),
    }
}

fn draw(d: &Domain, cfg: &TestConfig, rng: &mut ChaCha8Rng) -> Value {
    let kinds: Vec<u8> = [INT, NIL, TRUE, CONS, SYM]
        .into_iter()
        .filter(|k| d.kinds & k != 0)
        .collect();
    let (clo, chi) = (cfg.int_range.0 as i128, cfg.int_range.1 as i128);
    let int = |rng: &mut ChaCha8Rng| {
        let (mut lo, mut hi) = (d.lo.max(clo), d.hi.min(chi));
        if lo > hi {
            // bounds lie outside the configured range: sample next to them
            let width = chi - clo;
            if d.lo > chi {
                (lo, hi) = (d.lo, d.lo.saturating_add(width).min(d.hi));
            } else {
                (lo, hi) = (d.hi.saturating_sub(width).max(d.lo), d.hi);
            }
        }
        Value::Int(rng.gen_range(lo..=hi))
    };
    match *kinds.choose(rng).unwrap() {
        INT => int(rng),
        NIL => Value::Nil,
        TRUE => Value::T,
        CONS => {
            let len = rng.gen_range(1..=cfg.max_list_len.max(1));
            Value::list((0..len).map(|_| Value::Int(rng.gen_range(clo..=chi))))
        }
        _ => Value::Sym(Symbol::new(SYMBOLS.choose(rng).unwrap())),
    }
}

pub const MAX_TRIES: usize = 1000;

/// A value of `x` satisfying `pred`, which mentions no other variable.
pub fn generate_value(
    pred: &Term,
    x: &Symbol,
    corpus: &Corpus,
    cfg: &TestConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Value, GenError> {
    let dom = domain_of(pred, x);
    if dom.is_empty() {
        return Err(GenError::Unsatisfiable(pred.surface()));
    }
    let dom = dom.normal();
    for _ in 0..MAX_TRIES {
        let v = draw(&dom, cfg, rng);
        if pred.is_t() {
            return Ok(v);
        }
        let env = [(x.clone(), v.clone())];
        if eval_with(pred, &env, corpus, cfg.limits()).is_ok_and(|r| r.truthy()) {
            return Ok(v);
        }
    }
    Err(GenError::Exhausted(pred.surface()))
}

enum Outcome {
    Discarded,
    Trapped,
    Holds,
    Fails(Witness),
}

fn sample_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64 + 1);
    rng
}

/// Samples processed together before checking for a falsification.
const CHUNK: usize = 16;

/// Random testing of `preconditions => conclusion`.
pub fn test_conjecture(
    preconditions: &Term,
    conclusion: &Term,
    corpus: &Corpus,
    cfg: &TestConfig,
) -> TestVerdict {
    let vars = Term::app("implies", vec![preconditions.clone(), conclusion.clone()]).vars();
    let parts = conjuncts(preconditions);
    let slices: Vec<Term> = vars
        .iter()
        .map(|x| {
            let mine: Vec<Term> = parts
                .iter()
                .filter(|c| c.vars() == [x.clone()])
                .cloned()
                .collect();
            match mine.len() {
                0 => Term::t(),
                1 => mine[0].clone(),
                _ => Term::app("and", mine),
            }
        })
        .collect();
    if preconditions.is_nil()
        || slices
            .iter()
            .zip(&vars)
            .any(|(s, x)| domain_of(s, x).is_empty())
    {
        return TestVerdict::Inconclusive(Inconclusive::TooFewSatisfying);
    }
    let limits = cfg.limits();
    let one = |i: usize| -> Outcome {
        let mut rng = sample_rng(cfg.seed, i);
        let mut env = Vec::with_capacity(vars.len());
        for (x, s) in vars.iter().zip(&slices) {
            match generate_value(s, x, corpus, cfg, &mut rng) {
                Ok(v) => env.push((x.clone(), v)),
                Err(_) => return Outcome::Discarded,
            }
        }
        match eval_with(preconditions, &env, corpus, limits) {
            Ok(v) if v.truthy() => {}
            Ok(_) => return Outcome::Discarded,
            Err(_) => return Outcome::Trapped,
        }
        match eval_with(conclusion, &env, corpus, limits) {
            Ok(Value::Nil) => Outcome::Fails(Witness(env)),
            Ok(_) => Outcome::Holds,
            Err(_) => Outcome::Trapped,
        }
    };
    let (mut holds, mut trapped) = (0, 0);
    let mut start = 0;
    while start < cfg.samples {
        let end = (start + CHUNK).min(cfg.samples);
        let outcomes: Vec<Outcome> =
            pool().install(|| (start..end).into_par_iter().map(one).collect());
        for o in outcomes {
            match o {
                Outcome::Fails(w) => return TestVerdict::Falsified(w),
                Outcome::Holds => holds += 1,
                Outcome::Trapped => trapped += 1,
                Outcome::Discarded => {}
            }
        }
        start = end;
    }
    if holds >= cfg.min_satisfying {
        TestVerdict::Survived(holds)
    } else if holds == 0 && trapped > 0 {
        TestVerdict::Inconclusive(Inconclusive::AllEvalsTrapped)
    } else {
        TestVerdict::Inconclusive(Inconclusive::TooFewSatisfying)
    }
}

/// Re-evaluates a witness: `(preconditions, conclusion)` truth values.
pub fn replay(
    w: &Witness,
    preconditions: &Term,
    conclusion: &Term,
    corpus: &Corpus,
    cfg: &TestConfig,
) -> Option<(bool, bool)> {
    let p = eval_with(preconditions, &w.0, corpus, cfg.limits()).ok()?;
    let c = eval_with(conclusion, &w.0, corpus, cfg.limits()).ok()?;
    Some((p.truthy(), c.truthy()))
}
