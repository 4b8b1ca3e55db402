//! Symbol correspondences between a source and a target theorem.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::builtins;
use crate::cluster::Clustering;
use crate::corpus::{Corpus, Event};
use crate::term::{Symbol, Term};

pub const MAX_MAPS: usize = 8;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnalogyMap {
    pub functions: BTreeMap<Symbol, Symbol>,
    pub variables: BTreeMap<Symbol, Symbol>,
}

impl AnalogyMap {
    pub fn identity() -> AnalogyMap {
        AnalogyMap::default()
    }

    pub fn function(&self, f: &Symbol) -> Symbol {
        self.functions.get(f).cloned().unwrap_or_else(|| f.clone())
    }

    pub fn variable(&self, v: &Symbol) -> Symbol {
        self.variables.get(v).cloned().unwrap_or_else(|| v.clone())
    }

    /// Renames heads and variables. Variables outside the map that would
    /// collide with a mapped name are renamed apart first.
    pub fn apply(&self, t: &Term) -> Term {
        let targets: BTreeSet<&Symbol> = self
            .variables
            .iter()
            .filter(|(k, v)| k != v)
            .map(|(_, v)| v)
            .collect();
        let mut rename: HashMap<Symbol, Symbol> = HashMap::new();
        let taken: BTreeSet<Symbol> = t
            .vars()
            .into_iter()
            .chain(self.variables.values().cloned())
            .collect();
        let mut n = 0;
        for v in t.vars() {
            if let Some(to) = self.variables.get(&v) {
                rename.insert(v, to.clone());
            } else if targets.contains(&v) {
                let fresh = loop {
                    n += 1;
                    let c = Symbol::new(&format!("w{n}"));
                    if !taken.contains(&c) {
                        break c;
                    }
                };
                rename.insert(v, fresh);
            }
        }
        self.rename(t, &rename)
    }

    fn rename(&self, t: &Term, vars: &HashMap<Symbol, Symbol>) -> Term {
        match t {
            Term::Var(v) => Term::Var(vars.get(v).cloned().unwrap_or_else(|| v.clone())),
            Term::Const(_) => t.clone(),
            Term::App(h, args) => Term::App(
                self.function(h),
                args.iter().map(|a| self.rename(a, vars)).collect(),
            ),
        }
    }
}

/// Whether two user functions share a reliable definition cluster.
pub fn co_clustered(f: &Symbol, g: &Symbol, clusters: &Clustering) -> bool {
    f == g || clusters.together(f, g)
}

fn family(f: &Symbol) -> Option<u8> {
    Some(match f.as_str() {
        "BINARY-+" | "BINARY-*" | "UNARY--" => 0,
        "NATP" | "INTEGERP" | "ACL2-NUMBERP" | "CONSP" | "SYMBOLP" | "ZP" | "ENDP" => 1,
        "CAR" | "CDR" => 2,
        _ => return None,
    })
}

#[derive(Default)]
struct Evidence {
    counts: BTreeMap<Symbol, BTreeMap<Symbol, usize>>,
    vars: BTreeMap<Symbol, BTreeMap<Symbol, usize>>,
}

impl Evidence {
    fn function(&mut self, f: &Symbol, g: &Symbol) {
        *self
            .counts
            .entry(f.clone())
            .or_default()
            .entry(g.clone())
            .or_default() += 1;
    }

    fn variable(&mut self, a: &Symbol, b: &Symbol) {
        *self
            .vars
            .entry(a.clone())
            .or_default()
            .entry(b.clone())
            .or_default() += 1;
    }
}

struct Aligner<'a> {
    corpus: &'a Corpus,
    clusters: &'a Clustering,
}

impl Aligner<'_> {
    fn statement_heads(&self, f: &Symbol, g: &Symbol, n: usize, m: usize) -> bool {
        n == m
            && (f == g
                || (self.corpus.is_user_function(f)
                    && self.corpus.is_user_function(g)
                    && co_clustered(f, g, self.clusters)))
    }

    fn body_heads(&self, f: &Symbol, g: &Symbol, n: usize, m: usize) -> bool {
        if n != m {
            return false;
        }
        if f == g {
            return true;
        }
        match (family(f), family(g)) {
            (Some(a), Some(b)) => a == b,
            _ => {
                self.corpus.is_user_function(f)
                    && self.corpus.is_user_function(g)
                    && co_clustered(f, g, self.clusters)
            }
        }
    }

    fn statements(&self, s: &Term, t: &Term, ev: &mut Evidence) {
        match (s, t) {
            (Term::Var(a), Term::Var(b)) => ev.variable(a, b),
            (Term::App(f, xs), Term::App(g, ys))
                if self.statement_heads(f, g, xs.len(), ys.len()) =>
            {
                ev.function(f, g);
                for (x, y) in xs.iter().zip(ys) {
                    self.statements(x, y, ev);
                }
            }
            _ => {}
        }
    }

    fn bodies(&self, s: &Term, t: &Term, ev: &mut Evidence, pending: &mut Vec<(Symbol, Symbol)>) {
        if let (Term::App(f, xs), Term::App(g, ys)) = (s, t) {
            if self.body_heads(f, g, xs.len(), ys.len()) {
                ev.function(f, g);
                if f != g && self.corpus.is_user_function(f) {
                    pending.push((f.clone(), g.clone()));
                }
                for (x, y) in xs.iter().zip(ys) {
                    self.bodies(x, y, ev, pending);
                }
            }
        }
    }
}

/// Candidate images per symbol, most supported first, then by name.
fn ranked(m: &BTreeMap<Symbol, BTreeMap<Symbol, usize>>) -> Vec<(Symbol, Vec<Symbol>)> {
    m.iter()
        .map(|(k, options)| {
            let mut o: Vec<(&Symbol, &usize)> = options.iter().collect();
            o.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
            (k.clone(), o.into_iter().map(|(s, _)| s.clone()).collect())
        })
        .collect()
}

/// All consistent maps induced by aligning `st` with `tt` and then the
/// definitions of every paired function, up to [`MAX_MAPS`].
pub fn build_analogy_maps(
    tt: &Event,
    st: &Event,
    clusters: &Clustering,
    corpus: &Corpus,
) -> Vec<AnalogyMap> {
    let al = Aligner { corpus, clusters };
    let (s, t) = (&st.body, &tt.body);
    let compatible = match (s, t) {
        (Term::App(f, xs), Term::App(g, ys)) => al.statement_heads(f, g, xs.len(), ys.len()),
        (Term::Var(_), Term::Var(_)) => true,
        (a, b) => a == b,
    };
    if !compatible {
        return Vec::new();
    }
    let mut ev = Evidence::default();
    al.statements(s, t, &mut ev);
    let mut pending: Vec<(Symbol, Symbol)> = Vec::new();
    for (f, targets) in &ev.counts {
        for g in targets.keys() {
            if f != g && corpus.is_user_function(f) {
                pending.push((f.clone(), g.clone()));
            }
        }
    }
    let mut done: BTreeSet<(Symbol, Symbol)> = BTreeSet::new();
    while let Some((f, g)) = pending.pop() {
        if !done.insert((f.clone(), g.clone())) {
            continue;
        }
        let (Some(a), Some(b)) = (corpus.defun(&f), corpus.defun(&g)) else {
            continue;
        };
        al.bodies(&a.body, &b.body, &mut ev, &mut pending);
    }
    let mut choices: Vec<(bool, Symbol, Vec<Symbol>)> = Vec::new();
    for (k, opts) in ranked(&ev.counts) {
        choices.push((false, k, opts));
    }
    for (k, opts) in ranked(&ev.vars) {
        choices.push((true, k, opts));
    }
    let mut maps = Vec::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let mut m = AnalogyMap::default();
        for ((is_var, k, opts), &i) in choices.iter().zip(&idx) {
            let target = opts[i].clone();
            if *is_var {
                m.variables.insert(k.clone(), target);
            } else if &target != k {
                m.functions.insert(k.clone(), target);
            }
        }
        if !maps.contains(&m) {
            maps.push(m);
        }
        if maps.len() >= MAX_MAPS {
            break;
        }
        // odometer, last choice fastest
        let mut pos = choices.len();
        loop {
            if pos == 0 {
                return maps;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < choices[pos].2.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
    maps
}

/// Maps functions of `sl` that the map does not cover to their unique
/// co-cluster sibling among the target's dependencies, when there is one.
pub fn extend_for(
    map: &AnalogyMap,
    sl: &Term,
    closure: &[Symbol],
    clusters: &Clustering,
    corpus: &Corpus,
) -> AnalogyMap {
    let mut m = map.clone();
    let mut heads: Vec<&Symbol> = sl.heads();
    heads.dedup();
    for f in heads {
        if m.functions.contains_key(f) || builtins::is_builtin(f) || closure.contains(f) {
            continue;
        }
        let siblings: Vec<&Symbol> = closure
            .iter()
            .filter(|g| *g != f && co_clustered(f, g, clusters))
            .collect();
        if siblings.len() == 1 && corpus.is_user_function(siblings[0]) {
            m.functions.insert(f.clone(), siblings[0].clone());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{Cluster, ClusterConfig};
    use crate::recurrent::{recurrent_cluster_definitions, reliable, Kind};
    use crate::term::sym;

    fn fig2() -> (Corpus, Clustering) {
        let c = Corpus::parse_str(include_str!("../../tests/fixtures/fig2.lisp")).unwrap();
        let cfg = ClusterConfig::default();
        let m = recurrent_cluster_definitions(&c, &cfg).unwrap();
        let r = reliable(&c, &m, Kind::Def, &cfg).unwrap();
        (c, r)
    }

    #[test]
    fn expt_from_mult() {
        let (c, r) = fig2();
        let tt = c.theorem(&sym("expt-expt-tail")).unwrap();
        let st = c.theorem(&sym("mult-mult-tail")).unwrap();
        let maps = build_analogy_maps(tt, st, &r, &c);
        assert!(!maps.is_empty());
        for m in &maps {
            assert_eq!(m.function(&sym("mult")), sym("expt"));
            assert_eq!(m.function(&sym("mult-tail")), sym("expt-tail"));
            assert_eq!(m.function(&sym("helper-mult")), sym("helper-expt"));
        }
        assert!(maps
            .iter()
            .any(|m| m.function(&sym("binary-+")) == sym("binary-*")));
    }

    #[test]
    fn identical_theorems_give_identity() {
        let (c, r) = fig2();
        let tt = c.theorem(&sym("fib-fib-tail")).unwrap();
        let maps = build_analogy_maps(tt, tt, &r, &c);
        assert_eq!(maps.len(), 1);
        assert!(maps[0].functions.is_empty());
        assert!(maps[0].variables.iter().all(|(k, v)| k == v));
    }

    #[test]
    fn incompatible_roots() {
        let c = Corpus::parse_str("(defun f (x) x) (defthm a (implies (natp x) (equal (f x) x))) (defthm b (equal (f x) x))")
            .unwrap();
        let r = Clustering {
            clusters: vec![Cluster {
                members: vec![sym("f")],
                centroid: vec![],
            }],
        };
        let (a, b) = (c.theorem(&sym("a")).unwrap(), c.theorem(&sym("b")).unwrap());
        assert!(build_analogy_maps(b, a, &r, &c).is_empty());
    }

    #[test]
    fn sibling_extension() {
        let (c, r) = fig2();
        let tt = c.theorem(&sym("fib-fib-tail")).unwrap();
        let st = c.theorem(&sym("fact-fact-tail")).unwrap();
        let sl = c.theorem(&sym("fact-helper-fact")).unwrap();
        let closure = c.dependency_closure(&tt.body);
        let maps = build_analogy_maps(tt, st, &r, &c);
        let m = extend_for(&maps[0], &sl.body, &closure, &r, &c);
        assert_eq!(m.function(&sym("fact")), sym("fib"));
        assert_eq!(m.function(&sym("helper-fact")), sym("helper-fib"));
    }

    #[test]
    fn capture_is_avoided() {
        let mut m = AnalogyMap::default();
        m.variables.insert(sym("x"), sym("y"));
        let t = Term::app("cons", vec![Term::var("x"), Term::var("y")]);
        assert_eq!(m.apply(&t).to_string(), "(cons y w1)");
    }
}
