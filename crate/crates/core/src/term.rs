use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Case-insensitive Lisp symbol. Stored upper-case, printed lower-case.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Symbol {
        assert!(!name.is_empty(), "empty symbol");
        Symbol(Arc::from(name.to_ascii_uppercase()))
    }

    /// Canonical (upper-case) spelling.
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn lower(&self) -> String {
        self.0.to_ascii_lowercase()
    }

    pub fn is(&self, name: &str) -> bool {
        self.0.eq_ignore_ascii_case(name)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lower())
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lower())
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Symbol {
        Symbol::new(s)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.lower())
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Symbol, D::Error> {
        let s = String::deserialize(d)?;
        if s.is_empty() {
            return Err(serde::de::Error::custom("empty symbol"));
        }
        Ok(Symbol::new(&s))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Const {
    Int(i64),
    Nil,
    T,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Symbol),
    Const(Const),
    App(Symbol, Vec<Term>),
}

pub fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Symbol::new(name))
    }

    pub fn int(i: i64) -> Term {
        Term::Const(Const::Int(i))
    }

    pub fn nil() -> Term {
        Term::Const(Const::Nil)
    }

    pub fn t() -> Term {
        Term::Const(Const::T)
    }

    pub fn app(head: &str, args: Vec<Term>) -> Term {
        Term::App(Symbol::new(head), args)
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Term::Const(Const::Nil))
    }

    pub fn is_t(&self) -> bool {
        matches!(self, Term::Const(Const::T))
    }

    pub fn head(&self) -> Option<&Symbol> {
        match self {
            Term::App(h, _) => Some(h),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, a) => a,
            _ => &[],
        }
    }

    /// `Some(args)` when this is an application of `name`.
    pub fn app_of(&self, name: &str) -> Option<&[Term]> {
        match self {
            Term::App(h, a) if h.is(name) => Some(a),
            _ => None,
        }
    }

    /// Number of levels: a leaf has one level (td0).
    pub fn depth(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 1,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Distinct variables in pre-order of first occurrence.
    pub fn vars(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Symbol>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn mentions_var(&self, v: &Symbol) -> bool {
        match self {
            Term::Var(x) => x == v,
            Term::Const(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.mentions_var(v)),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Application heads in pre-order, with repeats.
    pub fn heads(&self) -> Vec<&Symbol> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let Term::App(h, _) = t {
                out.push(h);
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Term)) {
        f(self);
        if let Term::App(_, args) = self {
            for a in args {
                a.walk(f);
            }
        }
    }

    /// Simultaneous substitution of variables.
    pub fn subst(&self, s: &HashMap<Symbol, Term>) -> Term {
        match self {
            Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Const(_) => self.clone(),
            Term::App(h, args) => Term::App(h.clone(), args.iter().map(|a| a.subst(s)).collect()),
        }
    }

    pub fn rename_heads(&self, from: &Symbol, to: &Symbol) -> Term {
        match self {
            Term::App(h, args) => {
                let h = if h == from { to.clone() } else { h.clone() };
                Term::App(h, args.iter().map(|a| a.rename_heads(from, to)).collect())
            }
            _ => self.clone(),
        }
    }

    /// Variables renamed to a canonical sequence by first occurrence.
    pub fn alpha_canonical(&self) -> Term {
        let mut names: BTreeMap<Symbol, Symbol> = BTreeMap::new();
        for (i, v) in self.vars().into_iter().enumerate() {
            names.insert(v, Symbol::new(&format!("?{}", i + 1)));
        }
        let map: HashMap<Symbol, Term> =
            names.into_iter().map(|(k, v)| (k, Term::Var(v))).collect();
        self.subst(&map)
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        self.alpha_canonical() == other.alpha_canonical()
    }

    /// Subterm at a pre-order path of argument indices.
    pub fn at(&self, path: &[usize]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.args().get(i)?.at(rest),
        }
    }

    pub fn replace_at(&self, path: &[usize], with: Term) -> Term {
        match path.split_first() {
            None => with,
            Some((&i, rest)) => match self {
                Term::App(h, args) => {
                    let mut args = args.clone();
                    args[i] = args[i].replace_at(rest, with);
                    Term::App(h.clone(), args)
                }
                _ => self.clone(),
            },
        }
    }

    /// Paths of all variable occurrences, pre-order.
    pub fn var_paths(&self) -> Vec<Vec<usize>> {
        fn go(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            match t {
                Term::Var(_) => out.push(path.clone()),
                Term::Const(_) => {}
                Term::App(_, args) => {
                    for (i, a) in args.iter().enumerate() {
                        path.push(i);
                        go(a, path, out);
                        path.pop();
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Surface rendering: arithmetic core functions are printed with the
    /// usual macros so that reading the output back gives the same term.
    pub fn surface(&self) -> String {
        let mut s = String::new();
        write_surface(self, &mut s);
        s
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Int(i) => write!(f, "{i}"),
            Const::Nil => f.write_str("nil"),
            Const::T => f.write_str("t"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::App(h, args) => {
                write!(f, "({h}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn chain<'a>(t: &'a Term, op: &str, out: &mut Vec<&'a Term>) {
    match t.app_of(op) {
        Some([a, b]) => {
            out.push(a);
            chain(b, op, out);
        }
        _ => out.push(t),
    }
}

fn write_list(head: &str, items: &[&Term], out: &mut String) {
    out.push('(');
    out.push_str(head);
    for it in items {
        out.push(' ');
        write_surface(it, out);
    }
    out.push(')');
}

fn write_surface(t: &Term, out: &mut String) {
    let Term::App(h, args) = t else {
        out.push_str(&t.to_string());
        return;
    };
    match (h.as_str(), args.as_slice()) {
        ("BINARY-+", [a, Term::Const(Const::Int(c))]) if *c < 0 && *c != i64::MIN => {
            out.push_str("(- ");
            write_surface(a, out);
            out.push_str(&format!(" {})", -c));
        }
        ("BINARY-+", [_, _]) => {
            let mut items = Vec::new();
            chain(t, "binary-+", &mut items);
            write_list("+", &items, out);
        }
        ("BINARY-*", [_, _]) => {
            let mut items = Vec::new();
            chain(t, "binary-*", &mut items);
            write_list("*", &items, out);
        }
        ("UNARY--", [a]) if !matches!(a, Term::Const(Const::Int(_))) => {
            out.push_str("(- ");
            write_surface(a, out);
            out.push(')');
        }
        ("IF", [_, _, c]) if c.is_nil() => {
            let mut items = Vec::new();
            let mut cur = t;
            while let Some([a, b, c]) = cur.app_of("if") {
                if !c.is_nil() {
                    break;
                }
                items.push(a);
                cur = b;
            }
            items.push(cur);
            write_list("and", &items, out);
        }
        _ => {
            let items: Vec<&Term> = args.iter().collect();
            write_list(&h.lower(), &items, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_fold_case() {
        assert_eq!(sym("lengthTail"), sym("LENGTHTAIL"));
        assert_eq!(sym("lengthTail").to_string(), "lengthtail");
    }

    #[test]
    fn depth_counts_levels() {
        assert_eq!(Term::var("n").depth(), 1);
        let t = Term::app("binary-+", vec![Term::var("n"), Term::int(-1)]);
        assert_eq!(t.depth(), 2);
    }

    #[test]
    fn vars_in_first_occurrence_order() {
        let t = Term::app(
            "f",
            vec![
                Term::var("b"),
                Term::app("g", vec![Term::var("a"), Term::var("b")]),
            ],
        );
        assert_eq!(t.vars(), vec![sym("b"), sym("a")]);
    }

    #[test]
    fn alpha_equivalence() {
        let a = Term::app("f", vec![Term::var("x"), Term::var("y"), Term::var("x")]);
        let b = Term::app("f", vec![Term::var("p"), Term::var("q"), Term::var("p")]);
        let c = Term::app("f", vec![Term::var("p"), Term::var("q"), Term::var("q")]);
        assert!(a.alpha_eq(&b));
        assert!(!a.alpha_eq(&c));
    }

    #[test]
    fn surface_subtraction() {
        let t = Term::app("binary-+", vec![Term::var("n"), Term::int(-1)]);
        assert_eq!(t.surface(), "(- n 1)");
        let u = Term::app("not", vec![Term::app("<", vec![t, Term::int(0)])]);
        assert_eq!(u.surface(), "(not (< (- n 1) 0))");
    }

    #[test]
    fn surface_conjunction() {
        let t = Term::app(
            "if",
            vec![
                Term::var("a"),
                Term::app("if", vec![Term::var("b"), Term::var("c"), Term::nil()]),
                Term::nil(),
            ],
        );
        assert_eq!(t.surface(), "(and a b c)");
    }
}
