//! Corpus ingestion: top-level `defun`/`defthm` forms become events.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::builtins;
use crate::error::IngestError;
use crate::macros;
use crate::sexpr::{read_all, Sexp};
use crate::term::{Symbol, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Defun,
    Defthm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub name: Symbol,
    pub formals: Vec<Symbol>,
    pub declared_guard: Option<Term>,
    /// Expanded body for definitions, expanded statement for theorems.
    pub body: Term,
    pub source: String,
    pub line: usize,
    pub ordinal: usize,
}

impl Event {
    pub fn is_defun(&self) -> bool {
        self.kind == EventKind::Defun
    }

    pub fn is_defthm(&self) -> bool {
        self.kind == EventKind::Defthm
    }

    /// `(f x1 ... xn)` for a definition.
    pub fn call_pattern(&self) -> Term {
        Term::App(
            self.name.clone(),
            self.formals.iter().cloned().map(Term::Var).collect(),
        )
    }

    /// Hypothesis and conclusion of an `(implies h c)` statement.
    pub fn split_statement(&self) -> (Option<&Term>, &Term) {
        match self.body.app_of("implies") {
            Some([h, c]) => (Some(h), c),
            _ => (None, &self.body),
        }
    }

    /// Lisp source that reads back to an identical event.
    pub fn to_source(&self) -> String {
        match self.kind {
            EventKind::Defthm => format!("(defthm {} {})", self.name, self.body),
            EventKind::Defun => {
                let formals: Vec<String> = self.formals.iter().map(|f| f.to_string()).collect();
                let guard = match &self.declared_guard {
                    Some(g) => format!(" (declare (xargs :guard {g}))"),
                    None => String::new(),
                };
                format!(
                    "(defun {} ({}){} {})",
                    self.name,
                    formals.join(" "),
                    guard,
                    self.body
                )
            }
        }
    }

    /// Structural equality ignoring where the event came from.
    pub fn same_definition(&self, other: &Event) -> bool {
        self.kind == other.kind
            && self.name == other.name
            && self.formals == other.formals
            && self.declared_guard == other.declared_guard
            && self.body == other.body
    }
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    events: Vec<Event>,
    by_name: HashMap<Symbol, usize>,
    call_graph: BTreeMap<Symbol, BTreeSet<Symbol>>,
    scc_index: HashMap<Symbol, usize>,
    sccs: Vec<Vec<Symbol>>,
    pub warnings: Vec<String>,
}

/// Converts a read form into a term without expanding macros.
pub fn raw_term(s: &Sexp) -> Result<Term, IngestError> {
    let err = |msg: &str| IngestError::Syntax {
        file: String::new(),
        line: s.line(),
        msg: msg.to_string(),
    };
    match s {
        Sexp::Int(i, _) => Ok(Term::int(*i)),
        Sexp::Sym(name, _) => Ok(symbol_term(name)),
        Sexp::List(items, _) => {
            let Some((head, rest)) = items.split_first() else {
                return Ok(Term::nil());
            };
            let Some(h) = head.as_sym() else {
                return Err(err("application head must be a symbol"));
            };
            if h.eq_ignore_ascii_case("quote") {
                return match rest {
                    [Sexp::Int(i, _)] => Ok(Term::int(*i)),
                    [Sexp::Sym(n, _)] if n.eq_ignore_ascii_case("nil") => Ok(Term::nil()),
                    [Sexp::Sym(n, _)] if n.eq_ignore_ascii_case("t") => Ok(Term::t()),
                    [Sexp::List(l, _)] if l.is_empty() => Ok(Term::nil()),
                    _ => Err(err("only quoted integers, nil and t are supported")),
                };
            }
            if h.starts_with(':') {
                return Err(err("keyword in function position"));
            }
            let args = rest.iter().map(raw_term).collect::<Result<Vec<_>, _>>()?;
            Ok(Term::App(Symbol::new(h), args))
        }
    }
}

fn symbol_term(name: &str) -> Term {
    if name.eq_ignore_ascii_case("nil") {
        Term::nil()
    } else if name.eq_ignore_ascii_case("t") {
        Term::t()
    } else {
        Term::Var(Symbol::new(name))
    }
}

/// Reads a single term from text and expands its macros.
pub fn parse_term(src: &str) -> Result<Term, IngestError> {
    let forms = read_all(src, "<input>")?;
    match forms.as_slice() {
        [one] => Ok(macros::expand(
            &raw_term(one).map_err(|e| with_file(e, "<input>"))?,
        )),
        _ => Err(IngestError::Syntax {
            file: "<input>".into(),
            line: 1,
            msg: format!("expected one term, found {}", forms.len()),
        }),
    }
}

fn with_file(e: IngestError, file: &str) -> IngestError {
    match e {
        IngestError::Syntax { line, msg, .. } => IngestError::Syntax {
            file: file.to_string(),
            line,
            msg,
        },
        e => e,
    }
}

fn lambda_key(formals: &[Symbol], body: &Term) -> Term {
    let map = formals
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), Term::Var(Symbol::new(&format!("?{}", i + 1)))))
        .collect();
    Term::app(
        "lambda",
        vec![Term::int(formals.len() as i64), body.subst(&map)],
    )
}

struct Builder {
    events: Vec<Event>,
    by_name: HashMap<Symbol, usize>,
    warnings: Vec<String>,
}

impl Builder {
    fn syntax(file: &str, line: usize, msg: impl Into<String>) -> IngestError {
        IngestError::Syntax {
            file: file.to_string(),
            line,
            msg: msg.into(),
        }
    }

    fn form(&mut self, form: &Sexp, file: &str) -> Result<(), IngestError> {
        let line = form.line();
        let items = match form.as_list() {
            Some(items) if !items.is_empty() => items,
            _ => {
                self.warnings
                    .push(format!("{file}:{line}: skipping non-list top-level form"));
                return Ok(());
            }
        };
        let head = items[0].as_sym().unwrap_or("").to_ascii_lowercase();
        match head.as_str() {
            "defun" => self.defun(items, file, line),
            "defthm" => self.defthm(items, file, line),
            "mutual-recursion" => {
                for f in &items[1..] {
                    self.form(f, file)?;
                }
                Ok(())
            }
            other => {
                let shown = if other.is_empty() {
                    "(...)".to_string()
                } else {
                    format!("({other} ...)")
                };
                self.warnings
                    .push(format!("{file}:{line}: skipping {shown}"));
                Ok(())
            }
        }
    }

    fn name_of(items: &[Sexp], file: &str, line: usize) -> Result<Symbol, IngestError> {
        match items.get(1) {
            Some(Sexp::Sym(n, _))
                if !n.starts_with(':')
                    && !n.eq_ignore_ascii_case("nil")
                    && !n.eq_ignore_ascii_case("t") =>
            {
                Ok(Symbol::new(n))
            }
            _ => Err(Self::syntax(file, line, "expected an event name")),
        }
    }

    fn defun(&mut self, items: &[Sexp], file: &str, line: usize) -> Result<(), IngestError> {
        let name = Self::name_of(items, file, line)?;
        if builtins::is_builtin(&name) {
            return Err(IngestError::BuiltinRedefinition {
                file: file.into(),
                line,
                name,
            });
        }
        let formals = match items.get(2) {
            Some(Sexp::List(fs, _)) => fs
                .iter()
                .map(|f| match f.as_sym() {
                    Some(s)
                        if !s.starts_with(':')
                            && !s.eq_ignore_ascii_case("nil")
                            && !s.eq_ignore_ascii_case("t") =>
                    {
                        Ok(Symbol::new(s))
                    }
                    _ => Err(Self::syntax(
                        file,
                        f.line(),
                        "formal parameters must be symbols",
                    )),
                })
                .collect::<Result<Vec<_>, _>>()?,
            Some(Sexp::Sym(s, _)) if s.eq_ignore_ascii_case("nil") => Vec::new(),
            _ => return Err(Self::syntax(file, line, "expected a formal parameter list")),
        };
        if items.len() < 4 {
            return Err(Self::syntax(file, line, "defun without a body"));
        }
        let mut guard = None;
        for d in &items[3..items.len() - 1] {
            let decl = d.as_list().filter(|l| {
                l.first()
                    .and_then(Sexp::as_sym)
                    .is_some_and(|h| h.eq_ignore_ascii_case("declare"))
            });
            let Some(decl) = decl else {
                return Err(Self::syntax(
                    file,
                    d.line(),
                    "unexpected form between formals and body",
                ));
            };
            for spec in &decl[1..] {
                let Some(spec) = spec.as_list() else { continue };
                if !spec
                    .first()
                    .and_then(Sexp::as_sym)
                    .is_some_and(|h| h.eq_ignore_ascii_case("xargs"))
                {
                    continue;
                }
                for kv in spec[1..].chunks(2) {
                    if kv.len() == 2
                        && kv[0]
                            .as_sym()
                            .is_some_and(|k| k.eq_ignore_ascii_case(":guard"))
                    {
                        let g = raw_term(&kv[1]).map_err(|e| with_file(e, file))?;
                        guard = Some(macros::expand_guard(&g));
                    }
                }
            }
        }
        let body = raw_term(&items[items.len() - 1]).map_err(|e| with_file(e, file))?;
        let body = macros::expand(&body);
        self.push(Event {
            kind: EventKind::Defun,
            name,
            formals,
            declared_guard: guard,
            body,
            source: file.to_string(),
            line,
            ordinal: 0,
        });
        Ok(())
    }

    fn defthm(&mut self, items: &[Sexp], file: &str, line: usize) -> Result<(), IngestError> {
        let name = Self::name_of(items, file, line)?;
        let stmt = items
            .get(2)
            .ok_or_else(|| Self::syntax(file, line, "defthm without a statement"))?;
        let body = macros::expand(&raw_term(stmt).map_err(|e| with_file(e, file))?);
        self.push(Event {
            kind: EventKind::Defthm,
            name,
            formals: Vec::new(),
            declared_guard: None,
            body,
            source: file.to_string(),
            line,
            ordinal: 0,
        });
        Ok(())
    }

    fn push(&mut self, mut ev: Event) {
        if let Some(&i) = self.by_name.get(&ev.name) {
            let old = &self.events[i];
            let same = old.kind == ev.kind
                && old
                    .declared_guard
                    .as_ref()
                    .map(|g| lambda_key(&old.formals, g))
                    == ev
                        .declared_guard
                        .as_ref()
                        .map(|g| lambda_key(&ev.formals, g))
                && lambda_key(&old.formals, &old.body) == lambda_key(&ev.formals, &ev.body);
            if same {
                self.warnings.push(format!(
                    "{}:{}: duplicate of {} ignored",
                    ev.source, ev.line, ev.name
                ));
                return;
            }
            let mut k = 2;
            let fresh = loop {
                let cand = Symbol::new(&format!("{}#{}", ev.name.as_str(), k));
                if !self.by_name.contains_key(&cand) {
                    break cand;
                }
                k += 1;
            };
            self.warnings.push(format!(
                "{}:{}: redefinition of {} renamed to {}",
                ev.source, ev.line, ev.name, fresh
            ));
            if ev.is_defun() {
                ev.body = ev.body.rename_heads(&ev.name, &fresh);
            }
            ev.name = fresh;
        }
        ev.ordinal = self.events.len();
        self.by_name.insert(ev.name.clone(), ev.ordinal);
        self.events.push(ev);
    }
}

impl Corpus {
    pub fn parse_files<P: AsRef<Path>>(paths: &[P]) -> Result<Corpus, IngestError> {
        let mut sources = Vec::new();
        for p in paths {
            let p = p.as_ref();
            let text = std::fs::read_to_string(p).map_err(|e| IngestError::Io {
                path: p.display().to_string(),
                msg: e.to_string(),
            })?;
            sources.push((p.display().to_string(), text));
        }
        Corpus::parse_sources(&sources)
    }

    pub fn parse_str(text: &str) -> Result<Corpus, IngestError> {
        Corpus::parse_sources(&[("<input>".to_string(), text.to_string())])
    }

    pub fn parse_sources(sources: &[(String, String)]) -> Result<Corpus, IngestError> {
        let mut b = Builder {
            events: Vec::new(),
            by_name: HashMap::new(),
            warnings: Vec::new(),
        };
        for (file, text) in sources {
            for form in read_all(text, file)? {
                b.form(&form, file)?;
            }
        }
        let mut corpus = Corpus {
            events: b.events,
            by_name: b.by_name,
            warnings: b.warnings,
            ..Default::default()
        };
        corpus.check()?;
        corpus.build_graph();
        Ok(corpus)
    }

    fn check(&self) -> Result<(), IngestError> {
        for ev in &self.events {
            self.check_term(ev, &ev.body, false)?;
            if let Some(g) = &ev.declared_guard {
                self.check_term(ev, g, true)?;
            }
            if ev.is_defun() {
                let mut free = ev.body.vars();
                if let Some(g) = &ev.declared_guard {
                    free.extend(g.vars());
                }
                if let Some(v) = free.into_iter().find(|v| !ev.formals.contains(v)) {
                    return Err(IngestError::FreeVariable {
                        file: ev.source.clone(),
                        line: ev.line,
                        event: ev.name.clone(),
                        var: v,
                    });
                }
            }
        }
        Ok(())
    }

    fn check_term(&self, ev: &Event, t: &Term, guard: bool) -> Result<(), IngestError> {
        let mut result = Ok(());
        t.walk(&mut |node| {
            if result.is_err() {
                return;
            }
            let Term::App(h, args) = node else { return };
            if guard && (h.is("and") || h.is("or")) {
                return;
            }
            match self.arity(h) {
                Some(n) if n != args.len() => {
                    result = Err(IngestError::Arity {
                        file: ev.source.clone(),
                        line: ev.line,
                        name: h.clone(),
                        expected: n,
                        found: args.len(),
                    })
                }
                Some(_) => {}
                None => {
                    result = Err(IngestError::DanglingReference {
                        file: ev.source.clone(),
                        line: ev.line,
                        event: ev.name.clone(),
                        name: h.clone(),
                    })
                }
            }
        });
        result
    }

    fn build_graph(&mut self) {
        let mut g = DiGraph::<Symbol, ()>::new();
        let mut nodes = HashMap::new();
        for ev in self.events.iter().filter(|e| e.is_defun()) {
            let heads: BTreeSet<Symbol> = ev.body.heads().into_iter().cloned().collect();
            self.call_graph.insert(ev.name.clone(), heads);
            nodes.insert(ev.name.clone(), g.add_node(ev.name.clone()));
        }
        for (f, callees) in &self.call_graph {
            for c in callees {
                if let Some(&to) = nodes.get(c) {
                    g.add_edge(nodes[f], to, ());
                }
            }
        }
        let mut sccs: Vec<Vec<Symbol>> = tarjan_scc(&g)
            .into_iter()
            .map(|comp| {
                let mut names: Vec<Symbol> = comp.into_iter().map(|n| g[n].clone()).collect();
                names.sort_by_key(|n| self.by_name[n]);
                names
            })
            .collect();
        sccs.sort_by_key(|c| self.by_name[&c[0]]);
        for (i, comp) in sccs.iter().enumerate() {
            for n in comp {
                self.scc_index.insert(n.clone(), i);
            }
        }
        self.sccs = sccs;
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn get(&self, name: &Symbol) -> Option<&Event> {
        self.by_name.get(name).map(|&i| &self.events[i])
    }

    pub fn defun(&self, name: &Symbol) -> Option<&Event> {
        self.get(name).filter(|e| e.is_defun())
    }

    pub fn theorem(&self, name: &Symbol) -> Option<&Event> {
        self.get(name).filter(|e| e.is_defthm())
    }

    pub fn defuns(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.is_defun())
    }

    pub fn theorems(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.is_defthm())
    }

    /// Arity of a built-in or defined function.
    pub fn arity(&self, f: &Symbol) -> Option<usize> {
        if let Some(b) = builtins::builtin(f) {
            return Some(b.arity());
        }
        self.defun(f).map(|e| e.formals.len())
    }

    pub fn is_user_function(&self, f: &Symbol) -> bool {
        self.defun(f).is_some()
    }

    pub fn call_graph(&self) -> &BTreeMap<Symbol, BTreeSet<Symbol>> {
        &self.call_graph
    }

    /// Members of the strongly-connected component of `f` in the call graph,
    /// when `f` is recursive (singleton components without a self-edge are
    /// not recursive and yield an empty slice).
    pub fn recursive_group(&self, f: &Symbol) -> &[Symbol] {
        let Some(&i) = self.scc_index.get(f) else {
            return &[];
        };
        let comp = &self.sccs[i];
        if comp.len() > 1 || self.call_graph.get(f).is_some_and(|c| c.contains(f)) {
            comp
        } else {
            &[]
        }
    }

    /// Same component (recursive or not).
    pub fn same_scc(&self, f: &Symbol, g: &Symbol) -> bool {
        match (self.scc_index.get(f), self.scc_index.get(g)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// User functions reachable from the heads of `t`, in first-seen order.
    pub fn dependency_closure(&self, t: &Term) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = Vec::new();
        let mut stack: Vec<Symbol> = t.heads().into_iter().rev().cloned().collect();
        while let Some(f) = stack.pop() {
            if out.contains(&f) || !self.is_user_function(&f) {
                continue;
            }
            out.push(f.clone());
            let ev = self.defun(&f).unwrap();
            let mut next: Vec<Symbol> = ev.body.heads().into_iter().cloned().collect();
            next.reverse();
            stack.extend(next);
        }
        out
    }

    /// A term is well formed for this corpus when every head is known with
    /// the right arity.
    pub fn check_heads(&self, t: &Term) -> Result<(), (Symbol, Option<usize>)> {
        let mut bad = None;
        t.walk(&mut |n| {
            if bad.is_some() {
                return;
            }
            if let Term::App(h, args) = n {
                match self.arity(h) {
                    Some(k) if k == args.len() => {}
                    other => bad = Some((h.clone(), other)),
                }
            }
        });
        match bad {
            Some(b) => Err(b),
            None => Ok(()),
        }
    }
}
