//! The fixed function core: arities, feature codes, formals and guards.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::term::{Symbol, Term};

pub struct Builtin {
    pub name: Symbol,
    pub formals: Vec<Symbol>,
    pub value: f64,
    /// Guard over `formals`, in `and`/`or` form.
    pub guard: Term,
}

impl Builtin {
    pub fn arity(&self) -> usize {
        self.formals.len()
    }
}

const TABLE: &[(&str, &[&str], f64, &str)] = &[
    ("if", &["x", "y", "z"], 1.0, "t"),
    ("equal", &["x", "y"], 2.0, "t"),
    (
        "binary-+",
        &["x", "y"],
        3.0,
        "(and (acl2-numberp x) (acl2-numberp y))",
    ),
    (
        "binary-*",
        &["x", "y"],
        4.0,
        "(and (acl2-numberp x) (acl2-numberp y))",
    ),
    ("unary--", &["x"], 5.0, "(acl2-numberp x)"),
    (
        "<",
        &["x", "y"],
        6.0,
        "(and (acl2-numberp x) (acl2-numberp y))",
    ),
    ("not", &["p"], 7.0, "t"),
    ("implies", &["p", "q"], 8.0, "t"),
    ("zp", &["x"], 9.0, "(and (integerp x) (not (< x 0)))"),
    ("natp", &["x"], 9.1, "t"),
    ("integerp", &["x"], 9.2, "t"),
    ("acl2-numberp", &["x"], 9.3, "t"),
    ("consp", &["x"], 9.4, "t"),
    ("car", &["x"], 9.5, "(or (consp x) (equal x nil))"),
    ("cdr", &["x"], 9.6, "(or (consp x) (equal x nil))"),
    ("cons", &["x", "y"], 9.7, "t"),
    ("endp", &["x"], 9.8, "(or (consp x) (equal x nil))"),
    ("symbolp", &["x"], 9.9, "t"),
    ("length", &["x"], 9.9, "t"),
];

pub const NIL_VALUE: f64 = 0.1;
pub const T_VALUE: f64 = 0.2;

fn registry() -> &'static HashMap<Symbol, Builtin> {
    static REG: OnceLock<HashMap<Symbol, Builtin>> = OnceLock::new();
    REG.get_or_init(|| {
        TABLE
            .iter()
            .map(|(name, formals, value, guard)| {
                let forms = crate::sexpr::read_all(guard, "<builtin>").expect("builtin guard");
                let guard = crate::corpus::raw_term(&forms[0]).expect("builtin guard");
                let b = Builtin {
                    name: Symbol::new(name),
                    formals: formals.iter().map(|f| Symbol::new(f)).collect(),
                    value: *value,
                    guard,
                };
                (b.name.clone(), b)
            })
            .collect()
    })
}

pub fn builtin(name: &Symbol) -> Option<&'static Builtin> {
    registry().get(name)
}

pub fn is_builtin(name: &Symbol) -> bool {
    registry().contains_key(name)
}

/// All built-in names in table order.
pub fn names() -> Vec<Symbol> {
    TABLE.iter().map(|(n, ..)| Symbol::new(n)).collect()
}
