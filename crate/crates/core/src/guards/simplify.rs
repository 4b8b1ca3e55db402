//! Conjunction-level guard simplification with kind reasoning.

use std::collections::HashMap;

use crate::counterexample::conjuncts;
use crate::macros::expand_guard;
use crate::term::{Const, Term};

use super::types::{kinds_of, recognizer, Kinds, ReturnKinds, ALL, INT, NIL, T};

/// Two conjuncts that cannot hold together.
#[derive(Clone, Debug, PartialEq)]
pub struct Contradiction {
    pub left: Term,
    pub right: Term,
}

/// The kinds a conjunct forces on one term, if any. Exact facts hold
/// precisely when the term has one of the kinds; the others only imply it.
fn fact(c: &Term) -> Option<(&Term, Kinds, bool)> {
    let Term::App(h, args) = c else { return None };
    match (h.as_str(), args.as_slice()) {
        ("EQUAL", [a, b]) | ("EQUAL", [b, a])
            if matches!(b, Term::Const(_)) && !matches!(a, Term::Const(_)) =>
        {
            match b {
                Term::Const(Const::Int(_)) => Some((a, INT, false)),
                Term::Const(Const::Nil) => Some((a, NIL, true)),
                _ => Some((a, T, true)),
            }
        }
        ("NATP", [a]) => Some((a, INT, false)),
        ("NOT", [q]) => match q {
            Term::App(g, qa) if qa.len() == 1 && g.is("zp") => Some((&qa[0], INT, false)),
            Term::App(g, qa) if qa.len() == 1 => recognizer(g).map(|k| (&qa[0], ALL & !k, true)),
            _ => None,
        },
        (_, [a]) => recognizer(h).map(|k| (a, k, true)),
        _ => None,
    }
}

fn disjuncts(t: &Term) -> Option<Vec<Term>> {
    if let Some(args) = t.app_of("or") {
        let mut out = Vec::new();
        for a in args {
            out.extend(disjuncts(a).unwrap_or_else(|| vec![a.clone()]));
        }
        return Some(out);
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

/// Kinds a disjunction forces on a single term, when all disjuncts are facts
/// about the same term.
fn disjunction_fact(ds: &[Term]) -> Option<(Term, Kinds)> {
    let mut subject: Option<&Term> = None;
    let mut kinds = 0;
    for d in ds {
        let (s, k, _) = fact(d)?;
        if subject.is_some_and(|x| x != s) {
            return None;
        }
        subject = Some(s);
        kinds |= k;
    }
    subject.map(|s| (s.clone(), kinds))
}

fn first_disjunct(t: Term) -> Term {
    match disjuncts(&t) {
        Some(ds) if !ds.is_empty() => ds[0].clone(),
        _ => t,
    }
}

fn normalize(t: &Term) -> Term {
    let Term::App(h, args) = t else {
        return t.clone();
    };
    let args: Vec<Term> = args.iter().map(normalize).collect();
    match (h.as_str(), args.as_slice()) {
        // constants first, the order ACL2's simplifier prints
        ("BINARY-+" | "BINARY-*", [a, b])
            if matches!(b, Term::Const(Const::Int(_))) && !matches!(a, Term::Const(_)) =>
        {
            Term::App(h.clone(), vec![b.clone(), a.clone()])
        }
        _ => Term::App(h.clone(), args),
    }
}

/// Top-level conjuncts with `natp` unfolded and literal truths removed.
fn split(g: &Term) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for c in conjuncts(&normalize(&expand_guard(g))) {
        match c.app_of("natp") {
            Some([x]) if !matches!(x, Term::Const(_)) => {
                out.push(Term::app("integerp", vec![x.clone()]));
                out.push(Term::app(
                    "not",
                    vec![Term::app("<", vec![x.clone(), Term::int(0)])],
                ));
            }
            _ => out.push(c),
        }
    }
    out
}

enum Step {
    Keep,
    Drop,
    Replace(Term),
    Contradiction(Contradiction),
}

pub struct Simplifier<'a> {
    pub returns: &'a ReturnKinds,
}

impl Simplifier<'_> {
    /// Facts from every conjunct except the one at `skip`.
    fn facts(&self, cs: &[Term], skip: usize) -> HashMap<Term, (Kinds, usize)> {
        let mut m: HashMap<Term, (Kinds, usize)> = HashMap::new();
        for (i, c) in cs.iter().enumerate() {
            if i == skip {
                continue;
            }
            let f = fact(c)
                .map(|(s, k, _)| (s.clone(), k))
                .or_else(|| disjuncts(c).and_then(|ds| disjunction_fact(&ds)));
            if let Some((s, k)) = f {
                let e = m.entry(s).or_insert((ALL, i));
                if e.0 & k != e.0 {
                    *e = (e.0 & k, i);
                }
            }
        }
        m
    }

    /// Kinds of `t` from its structure and facts about its proper subterms.
    fn kinds(&self, t: &Term, facts: &HashMap<Term, (Kinds, usize)>) -> Kinds {
        let plain: HashMap<Term, Kinds> = facts.iter().map(|(k, v)| (k.clone(), v.0)).collect();
        kinds_of(t, &plain, self.returns)
    }

    /// Whether recognizer fact `(subject, k)` is decided by the context:
    /// `Some(true)` when entailed, `Some(false)` when refuted.
    fn decide(
        &self,
        subject: &Term,
        k: Kinds,
        facts: &HashMap<Term, (Kinds, usize)>,
    ) -> Option<bool> {
        let structural = self.kinds(subject, facts);
        if structural & k == 0 {
            return Some(false);
        }
        if structural & !k == 0 {
            return Some(true);
        }
        let known = facts.get(subject).map_or(ALL, |f| f.0) & structural;
        if known & k == 0 {
            Some(false)
        } else if known & !k == 0 && known != k {
            // strictly stronger information elsewhere makes this redundant
            Some(true)
        } else {
            None
        }
    }

    fn step(&self, cs: &[Term], i: usize) -> Step {
        let c = &cs[i];
        let facts = self.facts(cs, i);
        let blame =
            |s: &Term, fallback: &Term| facts.get(s).map_or(fallback.clone(), |f| cs[f.1].clone());
        let clash = |s: &Term, d: &Term| {
            let other = blame(s, d);
            let earlier = cs.iter().position(|x| *x == other).is_some_and(|j| j < i);
            let (left, right) = if earlier {
                (other, d.clone())
            } else {
                (d.clone(), other)
            };
            Step::Contradiction(Contradiction {
                left: first_disjunct(left),
                right: first_disjunct(right),
            })
        };
        if matches!(c, Term::Const(Const::Int(_)) | Term::Const(Const::T)) {
            return Step::Drop;
        }
        if c.is_nil() {
            return Step::Contradiction(Contradiction {
                left: c.clone(),
                right: c.clone(),
            });
        }
        if let Some(inner) = c.app_of("not").and_then(|a| a.first()) {
            if cs.iter().any(|d| d == inner) {
                return Step::Contradiction(Contradiction {
                    left: inner.clone(),
                    right: c.clone(),
                });
            }
        }
        if let Some((s, k, exact)) = fact(c) {
            if !exact {
                // only refutation: these say more than their kind
                if self.decide(s, k, &facts) == Some(false) {
                    return clash(s, c);
                }
                return Step::Keep;
            }
            return match self.decide(s, k, &facts) {
                Some(true) => Step::Drop,
                Some(false) => clash(s, c),
                None => Step::Keep,
            };
        }
        if let Some(ds) = disjuncts(c) {
            let mut kept: Vec<Term> = Vec::new();
            let mut refuter: Option<Term> = None;
            for d in &ds {
                match fact(d) {
                    Some((s, k, true)) => match self.decide(s, k, &facts) {
                        Some(true) => return Step::Drop,
                        Some(false) => {
                            refuter.get_or_insert_with(|| blame(s, d));
                        }
                        None => kept.push(d.clone()),
                    },
                    Some((s, k, false)) => match self.decide(s, k, &facts) {
                        Some(false) => {
                            refuter.get_or_insert_with(|| blame(s, d));
                        }
                        _ => kept.push(d.clone()),
                    },
                    None if d.is_nil() => {}
                    None if matches!(d, Term::Const(_)) => return Step::Drop,
                    None => kept.push(d.clone()),
                }
            }
            return match kept.len() {
                0 => {
                    let own = ds.first().cloned().unwrap_or_else(Term::nil);
                    let other = first_disjunct(refuter.unwrap_or_else(|| own.clone()));
                    let earlier = cs
                        .iter()
                        .position(|x| first_disjunct(x.clone()) == other)
                        .is_some_and(|j| j < i);
                    let (left, right) = if earlier { (other, own) } else { (own, other) };
                    Step::Contradiction(Contradiction { left, right })
                }
                n if n == ds.len() && c.app_of("or").is_some() => Step::Keep,
                1 => Step::Replace(kept.pop().unwrap()),
                _ => Step::Replace(Term::app("or", kept)),
            };
        }
        Step::Keep
    }

    /// Simplified conjunct list, or the contradiction that empties it.
    pub fn run(&self, g: &Term) -> Result<Vec<Term>, Contradiction> {
        let mut cs: Vec<Term> = Vec::new();
        for c in split(g) {
            if !cs.contains(&c) {
                cs.push(c);
            }
        }
        loop {
            let mut changed = false;
            let mut i = 0;
            while i < cs.len() {
                match self.step(&cs, i) {
                    Step::Keep => i += 1,
                    Step::Drop => {
                        cs.remove(i);
                        changed = true;
                    }
                    Step::Replace(t) => {
                        let parts = split(&t);
                        cs.splice(i..=i, parts);
                        let mut seen: Vec<Term> = Vec::new();
                        cs.retain(|c| {
                            let fresh = !seen.contains(c);
                            seen.push(c.clone());
                            fresh
                        });
                        changed = true;
                    }
                    Step::Contradiction(x) => return Err(x),
                }
            }
            if !changed {
                return Ok(cs);
            }
        }
    }

    pub fn simplify(&self, g: &Term) -> Term {
        match self.run(g) {
            Err(_) => Term::nil(),
            Ok(cs) => conjoin(cs),
        }
    }
}

/// `T`, the single conjunct, or `(and ...)`.
pub fn conjoin(mut cs: Vec<Term>) -> Term {
    match cs.len() {
        0 => Term::t(),
        1 => cs.pop().unwrap(),
        _ => Term::app("and", cs),
    }
}

/// Simplification with built-in knowledge only; user functions may return
/// anything.
pub fn simplify_guard(g: &Term) -> Term {
    Simplifier {
        returns: &ReturnKinds::default(),
    }
    .simplify(g)
}

pub fn check_contradiction(g: &Term) -> bool {
    simplify_guard(g).is_nil()
}

pub fn explain_contradiction(g: &Term) -> Option<Contradiction> {
    Simplifier {
        returns: &ReturnKinds::default(),
    }
    .run(g)
    .err()
}
