//! Coarse value kinds and return-kind inference for user functions.

use std::collections::HashMap;

use crate::corpus::Corpus;
use crate::term::{Const, Symbol, Term};

pub type Kinds = u8;

pub const INT: Kinds = 1;
/// Non-integer numbers. The evaluator never produces them, but variables may
/// range over them in the logic.
pub const RAT: Kinds = 2;
pub const NIL: Kinds = 4;
pub const T: Kinds = 8;
pub const CONS: Kinds = 16;
pub const SYM: Kinds = 32;
pub const NUM: Kinds = INT | RAT;
pub const SYMBOLS: Kinds = NIL | T | SYM;
pub const BOOL: Kinds = NIL | T;
pub const ALL: Kinds = INT | RAT | NIL | T | CONS | SYM;

/// Kinds accepted by a unary recognizer.
pub fn recognizer(name: &Symbol) -> Option<Kinds> {
    Some(match name.as_str() {
        "INTEGERP" => INT,
        "ACL2-NUMBERP" => NUM,
        "CONSP" => CONS,
        "SYMBOLP" => SYMBOLS,
        "ENDP" => ALL & !CONS,
        _ => return None,
    })
}

/// Return kinds of every user function, as a least fixpoint over the
/// definitions. Functions that never return are given every kind.
#[derive(Clone, Debug, Default)]
pub struct ReturnKinds {
    map: HashMap<Symbol, Kinds>,
}

impl ReturnKinds {
    pub fn infer(corpus: &Corpus) -> ReturnKinds {
        let mut rk = ReturnKinds::default();
        for ev in corpus.defuns() {
            rk.map.insert(ev.name.clone(), 0);
        }
        loop {
            let mut changed = false;
            for ev in corpus.defuns() {
                let k = kinds_of(&ev.body, &HashMap::new(), &rk);
                let old = rk.map[&ev.name];
                if k | old != old {
                    rk.map.insert(ev.name.clone(), k | old);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for k in rk.map.values_mut() {
            if *k == 0 {
                *k = ALL;
            }
        }
        rk
    }

    pub fn get(&self, f: &Symbol) -> Kinds {
        self.map.get(f).copied().unwrap_or(ALL)
    }
}

/// Kinds `t` can take. Facts are trusted for proper subterms only, never for
/// `t` itself.
pub fn kinds_of(t: &Term, facts: &HashMap<Term, Kinds>, rk: &ReturnKinds) -> Kinds {
    let sub = |a: &Term| {
        let k = kinds_of(a, facts, rk);
        match facts.get(a) {
            Some(f) => k & f,
            None => k,
        }
    };
    match t {
        Term::Var(_) => ALL,
        Term::Const(Const::Int(_)) => INT,
        Term::Const(Const::Nil) => NIL,
        Term::Const(Const::T) => T,
        Term::App(h, args) => match h.as_str() {
            // non-numbers act as 0, so only a possibly non-integer argument
            // can make the result non-integer
            "BINARY-+" | "BINARY-*" | "UNARY--" => {
                if args.iter().all(|a| sub(a) & RAT == 0) {
                    INT
                } else {
                    NUM
                }
            }
            "LENGTH" => INT,
            "CONS" => CONS,
            "CAR" | "CDR" => ALL,
            "IF" if args.len() == 3 => {
                let (yes, no) = branch_facts(&args[0]);
                let within = |extra: Vec<(Term, Kinds)>, a: &Term| {
                    if extra.is_empty() {
                        return sub(a);
                    }
                    let mut f = facts.clone();
                    for (s, k) in extra {
                        *f.entry(s).or_insert(ALL) &= k;
                    }
                    let k = kinds_of(a, &f, rk);
                    f.get(a).map_or(k, |x| k & x)
                };
                within(yes, &args[1]) | within(no, &args[2])
            }
            "AND" | "OR" => ALL,
            "EQUAL" | "<" | "NOT" | "IMPLIES" | "ZP" | "NATP" | "INTEGERP" | "ACL2-NUMBERP"
            | "CONSP" | "ENDP" | "SYMBOLP" => BOOL,
            _ => rk.get(h),
        },
    }
}

/// Facts that hold in the true and false branches of a test.
fn branch_facts(test: &Term) -> (Vec<(Term, Kinds)>, Vec<(Term, Kinds)>) {
    let Term::App(h, args) = test else {
        return (vec![], vec![]);
    };
    match (h.as_str(), args.as_slice()) {
        ("NOT", [q]) => {
            let (a, b) = branch_facts(q);
            (b, a)
        }
        ("ZP", [x]) => (vec![], vec![(x.clone(), INT)]),
        ("NATP", [x]) => (vec![(x.clone(), INT)], vec![]),
        ("EQUAL", [x, c]) | ("EQUAL", [c, x]) if c.is_nil() && !x.is_nil() => {
            (vec![(x.clone(), NIL)], vec![(x.clone(), ALL & !NIL)])
        }
        (_, [x]) => match recognizer(h) {
            Some(k) => (vec![(x.clone(), k)], vec![(x.clone(), ALL & !k)]),
            None => (vec![], vec![]),
        },
        _ => (vec![], vec![]),
    }
}
