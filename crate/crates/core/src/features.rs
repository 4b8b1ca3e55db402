//! Depth × arity feature tables and the function numbering they rely on.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::builtins::{self, NIL_VALUE, T_VALUE};
use crate::corpus::Event;
use crate::error::FeatureError;
use crate::term::{Const, Symbol, Term};

pub const DIM: usize = 7;
pub const WIDTH: usize = DIM * DIM;
pub const MAX_ARITY: usize = DIM - 2;
pub const CONST_CLAMP: i64 = 50;

/// Contribution of a call to the function being featurized (or to a member
/// of its recursive group).
pub const RESERVED_SELF_CALL: f64 = -1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub cells: [[f64; DIM]; DIM],
}

impl Default for FeatureTable {
    fn default() -> Self {
        FeatureTable {
            cells: [[0.0; DIM]; DIM],
        }
    }
}

impl FeatureTable {
    /// Row `depth`, column 0 for variables, `arity + 1` for functions.
    pub fn get(&self, depth: usize, column: usize) -> f64 {
        self.cells[depth][column]
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.cells.iter().flatten().copied().collect()
    }
}

/// The numbering `[f]` of user functions. Built-ins have fixed codes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValueMap {
    entries: BTreeMap<Symbol, f64>,
}

impl ValueMap {
    pub fn new() -> ValueMap {
        ValueMap::default()
    }

    pub fn insert(&mut self, f: Symbol, v: f64) {
        self.entries.insert(f, v);
    }

    /// User-assigned value.
    pub fn get(&self, f: &Symbol) -> Option<f64> {
        self.entries.get(f).copied()
    }

    /// Value of any head: user entry or built-in code.
    pub fn value_of(&self, f: &Symbol) -> Option<f64> {
        self.get(f)
            .or_else(|| builtins::builtin(f).map(|b| b.value))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Symbol, f64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_injective(&self) -> bool {
        let mut vals: Vec<u64> = self.entries.values().map(|v| v.to_bits()).collect();
        vals.sort_unstable();
        vals.windows(2).all(|w| w[0] != w[1])
            && !self.entries.values().any(|v| *v == RESERVED_SELF_CALL)
    }
}

fn const_value(c: &Const) -> f64 {
    match c {
        Const::Int(i) => (*i).clamp(-CONST_CLAMP, CONST_CLAMP) as f64,
        Const::Nil => NIL_VALUE,
        Const::T => T_VALUE,
    }
}

/// Builds `[t]`. Heads listed in `recursive` contribute [`RESERVED_SELF_CALL`].
pub fn feature_table(
    t: &Term,
    values: &ValueMap,
    recursive: &[Symbol],
) -> Result<FeatureTable, FeatureError> {
    let mut table = FeatureTable::default();
    let mut codes: HashMap<Symbol, f64> = HashMap::new();
    fill(t, 0, values, recursive, &mut codes, &mut table)?;
    Ok(table)
}

fn fill(
    t: &Term,
    depth: usize,
    values: &ValueMap,
    recursive: &[Symbol],
    codes: &mut HashMap<Symbol, f64>,
    table: &mut FeatureTable,
) -> Result<(), FeatureError> {
    if depth >= DIM {
        return Ok(());
    }
    match t {
        Term::Var(v) => {
            let next = -(codes.len() as f64) - 1.0;
            let code = *codes.entry(v.clone()).or_insert(next);
            table.cells[depth][0] += code;
        }
        Term::Const(c) => table.cells[depth][1] += const_value(c),
        Term::App(h, args) => {
            let v = if recursive.contains(h) {
                RESERVED_SELF_CALL
            } else {
                values
                    .value_of(h)
                    .ok_or_else(|| FeatureError::MissingValue(h.clone()))?
            };
            if args.len() <= MAX_ARITY {
                table.cells[depth][args.len() + 1] += v;
            }
            for a in args {
                fill(a, depth + 1, values, recursive, codes, table)?;
            }
        }
    }
    Ok(())
}

/// The term a definition is featurized through: its defining equation
/// `(equal (f x1 ... xn) body)`, so that the signature takes part.
pub fn definition_term(ev: &Event) -> Term {
    Term::app("equal", vec![ev.call_pattern(), ev.body.clone()])
}
