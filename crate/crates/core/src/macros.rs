//! Surface macros rewritten into the function core.

use crate::term::{Const, Term};

/// Expands `+ - * 1+ 1- and or <= > >=` recursively, innermost first.
pub fn expand(t: &Term) -> Term {
    expand_with(t, false)
}

/// Like [`expand`] but keeps `and`/`or` applications, which is the form
/// guards are stored and displayed in.
pub fn expand_guard(t: &Term) -> Term {
    expand_with(t, true)
}

fn expand_with(t: &Term, keep_connectives: bool) -> Term {
    let Term::App(h, args) = t else {
        return t.clone();
    };
    let args: Vec<Term> = args
        .iter()
        .map(|a| expand_with(a, keep_connectives))
        .collect();
    let name = h.as_str();
    match name {
        "+" => fold_right("binary-+", args, 0),
        "*" => fold_right("binary-*", args, 1),
        "-" => match args.len() {
            1 => negate(args.into_iter().next().unwrap()),
            2 => {
                let mut it = args.into_iter();
                let a = it.next().unwrap();
                let b = it.next().unwrap();
                match b {
                    Term::Const(Const::Int(c)) if c != i64::MIN => {
                        Term::app("binary-+", vec![a, Term::int(-c)])
                    }
                    b => Term::app("binary-+", vec![a, Term::app("unary--", vec![b])]),
                }
            }
            _ => Term::App(h.clone(), args),
        },
        "1+" if args.len() == 1 => Term::app("binary-+", vec![args[0].clone(), Term::int(1)]),
        "1-" if args.len() == 1 => Term::app("binary-+", vec![args[0].clone(), Term::int(-1)]),
        "<=" if args.len() == 2 => Term::app(
            "not",
            vec![Term::app("<", vec![args[1].clone(), args[0].clone()])],
        ),
        ">" if args.len() == 2 => Term::app("<", vec![args[1].clone(), args[0].clone()]),
        ">=" if args.len() == 2 => Term::app(
            "not",
            vec![Term::app("<", vec![args[0].clone(), args[1].clone()])],
        ),
        "AND" if !keep_connectives => and_to_if(args),
        "OR" if !keep_connectives => or_to_if(args),
        _ => Term::App(h.clone(), args),
    }
}

fn fold_right(op: &str, mut args: Vec<Term>, unit: i64) -> Term {
    match args.len() {
        0 => Term::int(unit),
        1 => Term::app(op, vec![Term::int(unit), args.pop().unwrap()]),
        _ => {
            let mut acc = args.pop().unwrap();
            while let Some(a) = args.pop() {
                acc = Term::app(op, vec![a, acc]);
            }
            acc
        }
    }
}

fn negate(a: Term) -> Term {
    match a {
        Term::Const(Const::Int(c)) if c != i64::MIN => Term::int(-c),
        a => Term::app("unary--", vec![a]),
    }
}

fn and_to_if(mut args: Vec<Term>) -> Term {
    match args.len() {
        0 => Term::t(),
        1 => args.pop().unwrap(),
        _ => {
            let mut acc = args.pop().unwrap();
            while let Some(a) = args.pop() {
                acc = Term::app("if", vec![a, acc, Term::nil()]);
            }
            acc
        }
    }
}

fn or_to_if(mut args: Vec<Term>) -> Term {
    match args.len() {
        0 => Term::nil(),
        1 => args.pop().unwrap(),
        _ => {
            let mut acc = args.pop().unwrap();
            while let Some(a) = args.pop() {
                acc = Term::app("if", vec![a.clone(), a, acc]);
            }
            acc
        }
    }
}
