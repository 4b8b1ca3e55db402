//! The three mutation levels. Level 1 renames a source lemma, level 2
//! replaces variables by small terms, level 3 adds structure at the top of
//! the conclusion.

use std::collections::HashSet;

use crate::corpus::{Corpus, Event};
use crate::term::{Symbol, Term};

use super::map::AnalogyMap;

/// Hypothesis and conclusion of a statement.
pub fn split(stmt: &Term) -> (Option<&Term>, &Term) {
    match stmt.app_of("implies") {
        Some([h, c]) => (Some(h), c),
        _ => (None, stmt),
    }
}

fn join(hyp: Option<&Term>, concl: Term) -> Term {
    match hyp {
        Some(h) => Term::app("implies", vec![h.clone(), concl]),
        None => concl,
    }
}

/// `v1, v2, ...` not occurring in `taken`.
pub struct Fresh {
    next: usize,
    taken: HashSet<Symbol>,
}

impl Fresh {
    pub fn avoiding(t: &Term) -> Fresh {
        Fresh {
            next: 0,
            taken: t.vars().into_iter().collect(),
        }
    }

    pub fn var(&mut self) -> Term {
        loop {
            self.next += 1;
            let s = Symbol::new(&format!("v{}", self.next));
            if self.taken.insert(s.clone()) {
                return Term::Var(s);
            }
        }
    }
}

/// Keeps the first of every α-class, up to `budget`, with the index of the
/// input it came from.
struct Collector {
    seen: HashSet<Term>,
    out: Vec<(usize, Term)>,
    budget: usize,
}

impl Collector {
    fn new(budget: usize) -> Collector {
        Collector {
            seen: HashSet::new(),
            out: Vec::new(),
            budget,
        }
    }

    fn full(&self) -> bool {
        self.out.len() >= self.budget
    }

    fn push(&mut self, from: usize, t: Term) {
        if !self.full() && self.seen.insert(t.alpha_canonical()) {
            self.out.push((from, t));
        }
    }

    fn terms(self) -> Vec<Term> {
        self.out.into_iter().map(|(_, t)| t).collect()
    }
}

fn choose(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Every way of fixing the arity of each application in `t`: fresh variables
/// are inserted at missing positions and surplus arguments dropped.
fn repair(t: &Term, corpus: &Corpus, fresh: &mut Fresh, limit: usize) -> Vec<Term> {
    let Term::App(h, args) = t else {
        return vec![t.clone()];
    };
    let mut partial: Vec<Vec<Term>> = vec![Vec::new()];
    for a in args {
        let opts = repair(a, corpus, fresh, limit);
        let mut next = Vec::new();
        'outer: for p in &partial {
            for o in &opts {
                let mut q = p.clone();
                q.push(o.clone());
                next.push(q);
                if next.len() >= limit {
                    break 'outer;
                }
            }
        }
        partial = next;
    }
    let want = corpus.arity(h).unwrap_or(args.len());
    let mut out = Vec::new();
    for p in partial {
        let have = p.len();
        if want == have {
            out.push(Term::App(h.clone(), p));
        } else if want > have {
            let extra: Vec<Term> = (0..want - have).map(|_| fresh.var()).collect();
            for slots in choose(want, want - have) {
                let mut given = p.iter();
                let mut added = extra.iter();
                let xs = (0..want)
                    .map(|i| {
                        if slots.contains(&i) {
                            added.next()
                        } else {
                            given.next()
                        }
                        .unwrap()
                        .clone()
                    })
                    .collect();
                out.push(Term::App(h.clone(), xs));
            }
        } else {
            for keep in choose(have, want) {
                out.push(Term::App(
                    h.clone(),
                    keep.iter().map(|&i| p[i].clone()).collect(),
                ));
            }
        }
        if out.len() >= limit {
            out.truncate(limit);
            break;
        }
    }
    out
}

/// Tree reconstruction: the source lemma with every symbol replaced by its
/// counterpart, plus arity-repaired variants.
pub fn mutate_level1(sl: &Event, map: &AnalogyMap, corpus: &Corpus, budget: usize) -> Vec<Term> {
    let mapped = map.apply(&sl.body);
    let mut fresh = Fresh::avoiding(&mapped);
    let (hyp, concl) = split(&mapped);
    let mut col = Collector::new(budget);
    for c in repair(concl, corpus, &mut fresh, budget) {
        match hyp {
            Some(h) => {
                for h in repair(h, corpus, &mut fresh, budget) {
                    col.push(0, join(Some(&h), c.clone()));
                }
            }
            None => col.push(0, c),
        }
    }
    col.terms()
}

/// Terms of depth at most three (applications nested at most twice) over
/// `atoms` and `functions`, grouped by size and stopping once `cap` terms
/// have been produced.
pub fn small_terms(atoms: &[Term], functions: &[(Symbol, usize)], cap: usize) -> Vec<Vec<Term>> {
    // by_size[s] holds the terms of size s + 1
    let mut by_size: Vec<Vec<Term>> = vec![atoms.to_vec()];
    let mut total = atoms.len();
    let max_arity = functions.iter().map(|f| f.1).max().unwrap_or(0);
    let mut size = 2;
    while total < cap {
        let mut tier = Vec::new();
        'tier: for (f, n) in functions {
            for parts in compositions(size - 1, *n) {
                let pools: Vec<Vec<&Term>> = parts
                    .iter()
                    .map(|&p| {
                        by_size
                            .get(p - 1)
                            .map(|ts| ts.iter().filter(|t| t.depth() <= 2).collect())
                            .unwrap_or_default()
                    })
                    .collect();
                if pools.iter().any(Vec::is_empty) {
                    continue;
                }
                let mut idx = vec![0usize; *n];
                loop {
                    let t = Term::App(
                        f.clone(),
                        idx.iter().zip(&pools).map(|(&i, p)| p[i].clone()).collect(),
                    );
                    if !redundant(&t) {
                        tier.push(t);
                    }
                    if total + tier.len() >= cap {
                        break 'tier;
                    }
                    let mut pos = *n;
                    let mut done = true;
                    while pos > 0 {
                        pos -= 1;
                        idx[pos] += 1;
                        if idx[pos] < pools[pos].len() {
                            done = false;
                            break;
                        }
                        idx[pos] = 0;
                    }
                    if done {
                        break;
                    }
                }
            }
        }
        // the largest depth-3 term has 1 + max_arity * (1 + max_arity) nodes
        if tier.is_empty() && size > 1 + max_arity * (1 + max_arity) {
            break;
        }
        total += tier.len();
        by_size.push(tier);
        size += 1;
    }
    by_size
}

/// Ground applications and arithmetic with a unit or zero argument denote
/// terms that are already smaller.
fn redundant(t: &Term) -> bool {
    let Term::App(h, args) = t else { return false };
    if t.is_ground() {
        return true;
    }
    let is = |i: i64| args.iter().any(|a| *a == Term::int(i));
    match h.as_str() {
        "BINARY-+" => is(0),
        "BINARY-*" => is(0) || is(1),
        _ => false,
    }
}

/// Ordered ways of writing `total` as `parts` positive summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// User functions of `closure` plus binary arithmetic, with arities.
fn grammar_functions(closure: &[Symbol], corpus: &Corpus) -> Vec<(Symbol, usize)> {
    let mut fs: Vec<(Symbol, usize)> = closure
        .iter()
        .filter_map(|f| corpus.arity(f).filter(|&n| n > 0).map(|n| (f.clone(), n)))
        .collect();
    fs.push((Symbol::new("binary-+"), 2));
    fs.push((Symbol::new("binary-*"), 2));
    fs
}

/// Node expansion: the inputs, then each variable occurrence of each
/// conclusion replaced by a small term, smallest terms first.
pub fn mutate_level2(
    candidates: &[Term],
    closure: &[Symbol],
    corpus: &Corpus,
    budget: usize,
) -> Vec<Term> {
    level2(candidates, closure, corpus, budget)
        .into_iter()
        .map(|(_, t)| t)
        .collect()
}

/// [`mutate_level2`] with the index of each output's input.
pub fn level2(
    candidates: &[Term],
    closure: &[Symbol],
    corpus: &Corpus,
    budget: usize,
) -> Vec<(usize, Term)> {
    let mut col = Collector::new(budget);
    for (i, c) in candidates.iter().enumerate() {
        col.push(i, c.clone());
    }
    let fs = grammar_functions(closure, corpus);
    let grammars: Vec<Vec<Vec<Term>>> = candidates
        .iter()
        .map(|c| {
            let mut atoms: Vec<Term> = c.vars().into_iter().map(Term::Var).collect();
            atoms.extend([Term::int(0), Term::int(1), Term::int(-1)]);
            small_terms(&atoms, &fs, budget)
        })
        .collect();
    let tiers = grammars.iter().map(Vec::len).max().unwrap_or(0);
    for tier in 0..tiers {
        for (i, (c, g)) in candidates.iter().zip(&grammars).enumerate() {
            let Some(terms) = g.get(tier) else { continue };
            let (hyp, concl) = split(c);
            for path in concl.var_paths() {
                let old = concl.at(&path).unwrap();
                for s in terms {
                    if col.full() {
                        return col.out;
                    }
                    if s != old {
                        col.push(i, join(hyp, concl.replace_at(&path, s.clone())));
                    }
                }
            }
        }
    }
    col.out
}

fn closure_apps<'a>(t: &'a Term, closure: &[Symbol], out: &mut Vec<&'a Term>) {
    if let Term::App(h, args) = t {
        if closure.contains(h) && !out.contains(&t) {
            out.push(t);
        }
        for a in args {
            closure_apps(a, closure, out);
        }
    }
}

/// `a` itself and, for each variable argument, the variant with that
/// argument decremented.
fn with_shifts(a: &Term) -> Vec<Term> {
    let mut out = vec![a.clone()];
    if let Term::App(h, args) = a {
        for (i, x) in args.iter().enumerate() {
            if let Term::Var(_) = x {
                let mut xs = args.clone();
                xs[i] = Term::app("binary-+", vec![x.clone(), Term::int(-1)]);
                out.push(Term::App(h.clone(), xs));
            }
        }
    }
    out
}

const OPS: [&str; 2] = ["binary-+", "binary-*"];

/// One top-level wrap of `r` using `y`.
fn wraps(r: &Term, y: &Term, closure: &[Symbol]) -> Vec<Term> {
    let mut out = Vec::new();
    for op in OPS {
        out.push(Term::app(op, vec![r.clone(), y.clone()]));
        out.push(Term::app(op, vec![y.clone(), r.clone()]));
    }
    let mut apps = Vec::new();
    closure_apps(r, closure, &mut apps);
    for a in apps {
        for a in with_shifts(a) {
            for op in OPS {
                for op2 in OPS {
                    let inner = Term::app(op2, vec![a.clone(), y.clone()]);
                    out.push(Term::app(op, vec![r.clone(), inner.clone()]));
                    out.push(Term::app(op, vec![inner, r.clone()]));
                }
            }
        }
    }
    out
}

/// Term tree expansion: new structure at the top of the right-hand side of
/// an equality, built from the variables only the left-hand side mentions.
/// Other conclusions are wrapped whole.
pub fn mutate_level3(
    candidates: &[Term],
    closure: &[Symbol],
    corpus: &Corpus,
    budget: usize,
) -> Vec<Term> {
    level3(candidates, closure, corpus, budget)
        .into_iter()
        .map(|(_, t)| t)
        .collect()
}

/// [`mutate_level3`] with the index of each output's input.
pub fn level3(
    candidates: &[Term],
    closure: &[Symbol],
    corpus: &Corpus,
    budget: usize,
) -> Vec<(usize, Term)> {
    let mut col = Collector::new(budget);
    let fs = grammar_functions(closure, corpus);
    for (i, c) in candidates.iter().enumerate() {
        let (hyp, concl) = split(c);
        match concl.app_of("equal") {
            Some([l, r]) => {
                let mut frontier = vec![r.clone()];
                loop {
                    let mut next = Vec::new();
                    for r in &frontier {
                        let lv = l.vars();
                        let rv = r.vars();
                        for y in lv.iter().filter(|v| !rv.contains(v)) {
                            for w in wraps(r, &Term::Var(y.clone()), closure) {
                                if col.full() {
                                    return col.out;
                                }
                                col.push(
                                    i,
                                    join(hyp, Term::app("equal", vec![l.clone(), w.clone()])),
                                );
                                next.push(w);
                            }
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    frontier = next;
                }
            }
            _ => {
                for (f, n) in &fs {
                    if col.full() {
                        return col.out;
                    }
                    let mut fresh = Fresh::avoiding(c);
                    let mut args = vec![concl.clone()];
                    args.extend((1..*n).map(|_| fresh.var()));
                    col.push(i, join(hyp, Term::App(f.clone(), args)));
                }
            }
        }
    }
    col.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_term;
    use crate::macros::expand;
    use crate::term::sym;

    fn fig2() -> Corpus {
        Corpus::parse_str(include_str!("../../tests/fixtures/fig2.lisp")).unwrap()
    }

    fn term(s: &str) -> Term {
        expand(&parse_term(s).unwrap())
    }

    #[test]
    fn level1_identity_is_the_lemma() {
        let c = fig2();
        let sl = c.theorem(&sym("mult-helper-mult")).unwrap();
        assert_eq!(
            mutate_level1(sl, &AnalogyMap::identity(), &c, 50),
            vec![sl.body.clone()]
        );
    }

    #[test]
    fn level1_renames_mult_lemma() {
        let c = fig2();
        let sl = c.theorem(&sym("mult-helper-mult")).unwrap();
        let mut m = AnalogyMap::default();
        for (a, b) in [
            ("mult", "expt"),
            ("helper-mult", "helper-expt"),
            ("binary-+", "binary-*"),
        ] {
            m.functions.insert(sym(a), sym(b));
        }
        let out = mutate_level1(sl, &m, &c, 50);
        let want = term("(implies (and (natp n) (natp m) (natp a)) (equal (helper-expt n m a) (* a (expt n m))))");
        assert_eq!(out, vec![want]);
    }

    #[test]
    fn level1_inserts_missing_arguments() {
        let c = fig2();
        let sl = c.theorem(&sym("fact-helper-fact")).unwrap();
        let mut m = AnalogyMap::default();
        m.functions.insert(sym("fact"), sym("fib"));
        m.functions.insert(sym("helper-fact"), sym("helper-fib"));
        let out: Vec<String> = mutate_level1(sl, &m, &c, 50)
            .iter()
            .map(|t| split(t).1.to_string())
            .collect();
        assert_eq!(
            out,
            [
                "(equal (helper-fib v1 n a) (binary-* a (fib n)))",
                "(equal (helper-fib n v1 a) (binary-* a (fib n)))",
                "(equal (helper-fib n a v1) (binary-* a (fib n)))",
            ]
        );
    }

    #[test]
    fn level1_drops_surplus_arguments() {
        let c = Corpus::parse_str(
            "(defun f (x) x) (defun g (x y) y) (defthm g-f (equal (g x y) (f y)))",
        )
        .unwrap();
        let mut m = AnalogyMap::default();
        m.functions.insert(sym("g"), sym("f"));
        let out: Vec<String> = mutate_level1(c.theorem(&sym("g-f")).unwrap(), &m, &c, 50)
            .iter()
            .map(|t| t.to_string())
            .collect();
        assert_eq!(out, ["(equal (f x) (f y))", "(equal (f y) (f y))"]);
    }

    #[test]
    fn small_term_tiers() {
        let atoms = [Term::var("k"), Term::int(0)];
        let tiers = small_terms(&atoms, &[(sym("fib"), 1), (sym("binary-*"), 2)], usize::MAX);
        // (binary-* k k) and (fib (fib k)); the rest mention 0
        assert_eq!(tiers[1].len(), 1);
        assert_eq!(tiers[2].len(), 2);
        assert!(tiers.iter().flatten().all(|t| t.depth() <= 3));
        assert!(tiers
            .iter()
            .flatten()
            .any(|t| t.to_string() == "(binary-* (fib k) k)"));
        let atoms = [Term::var("a"), Term::var("b"), Term::var("c")];
        let capped: usize = small_terms(&atoms, &[(sym("binary-*"), 2)], 5)
            .iter()
            .map(Vec::len)
            .sum();
        assert_eq!(capped, 5);
    }

    #[test]
    fn level2_reaches_product_slot() {
        let c = fig2();
        let closure = c.dependency_closure(&c.theorem(&sym("fib-fib-tail")).unwrap().body);
        let input = term("(equal (helper-fib n j k) x)");
        let out = mutate_level2(&[input.clone()], &closure, &c, 5000);
        assert_eq!(out[0], input);
        assert!(out.contains(&term("(equal (helper-fib n j k) (* (fib n) k))")));
        assert!(out.iter().all(|t| t.depth() <= input.depth() + 2));
        assert!(mutate_level2(&[input.clone()], &closure, &c, 500).len() == 500);
    }

    #[test]
    fn level2_budget_and_ground_input() {
        let c = fig2();
        let closure = vec![sym("fib")];
        let input = term("(equal (fib n) m)");
        assert_eq!(
            mutate_level2(&[input.clone()], &closure, &c, 1),
            vec![input]
        );
        let ground = term("(equal (fib 3) 2)");
        assert_eq!(
            mutate_level2(&[ground.clone()], &closure, &c, 10),
            vec![ground]
        );
    }

    #[test]
    fn level3_reaches_fibonacci_identity() {
        let c = fig2();
        let closure = c.dependency_closure(&c.theorem(&sym("fib-fib-tail")).unwrap().body);
        let input = term("(equal (helper-fib n j k) (* k (fib n)))");
        let out = mutate_level3(&[input], &closure, &c, 2000);
        let want = term("(equal (helper-fib n j k) (+ (* (fib (- n 1)) j) (* k (fib n))))");
        assert!(out.contains(&want));
    }

    #[test]
    fn level3_wraps_other_conclusions_whole() {
        let c = fig2();
        let out = mutate_level3(&[term("(natp (fib n))")], &[sym("fib")], &c, 10);
        assert_eq!(out[0].to_string(), "(fib (natp (fib n)))");
        assert_eq!(out[1].to_string(), "(binary-+ (natp (fib n)) v1)");
        let capped = mutate_level3(
            &[term("(equal (helper-fib n j k) (fib n))")],
            &[sym("fib")],
            &c,
            3,
        );
        assert_eq!(capped.len(), 3);
    }
}
