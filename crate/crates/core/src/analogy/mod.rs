//! Lemma suggestion by analogy with a similar, already proven theorem.

pub mod map;
pub mod mutate;

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterConfig, Clustering};
use crate::corpus::{Corpus, Event};
use crate::counterexample::{test_conjecture, TestConfig, TestVerdict};
use crate::error::ClusterError;
use crate::eval::pool;
use crate::guards::GuardTable;
use crate::recurrent::{similar_to, DefinitionModel, Kind};
use crate::term::{Symbol, Term};

pub use map::{build_analogy_maps, AnalogyMap};
pub use mutate::{mutate_level1, mutate_level2, mutate_level3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuggestConfig {
    /// Candidate caps for levels 1, 2 and 3.
    pub budgets: [usize; 3],
    pub test: TestConfig,
    /// Run every level even after one yields survivors.
    pub all_levels: bool,
    /// Falsified candidates kept for diagnostics.
    pub keep_rejected: usize,
}

impl Default for SuggestConfig {
    fn default() -> Self {
        SuggestConfig {
            budgets: [50, 500, 2000],
            test: TestConfig::default(),
            all_levels: false,
            keep_rejected: 5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AnalogyProblem {
    pub target: Event,
    pub source: Event,
    pub source_lemmas: Vec<Event>,
}

impl AnalogyProblem {
    /// Picks the source theorem among the statistically similar ones and
    /// the corpus theorems that talk about functions clustered with its
    /// functions. `None` when the target has no similar theorem.
    pub fn discover(
        target: &Symbol,
        corpus: &Corpus,
        model: &DefinitionModel,
        def_clusters: &Clustering,
        cfg: &ClusterConfig,
    ) -> Result<Option<AnalogyProblem>, ClusterError> {
        let similar = similar_to(target, Kind::Thm, corpus, model, cfg)?;
        let Some(st) = similar.first() else {
            return Ok(None);
        };
        let tt = corpus.theorem(target).unwrap();
        let st = corpus.theorem(st).unwrap();
        let functions: Vec<&Symbol> = st
            .body
            .heads()
            .into_iter()
            .filter(|f| corpus.is_user_function(f))
            .collect();
        let source_lemmas = corpus
            .theorems()
            .filter(|e| e.name != tt.name && e.name != st.name)
            .filter(|e| {
                e.body.heads().iter().any(|g| {
                    functions
                        .iter()
                        .any(|f| map::co_clustered(f, g, def_clusters))
                })
            })
            .cloned()
            .collect();
        Ok(Some(AnalogyProblem {
            target: tt.clone(),
            source: st.clone(),
            source_lemmas,
        }))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateLemma {
    pub conclusion: Term,
    /// `t` when unconditional.
    pub preconditions: Term,
    pub level: u8,
    pub source_lemma: Symbol,
    pub verdict: TestVerdict,
}

impl CandidateLemma {
    pub fn statement(&self) -> Term {
        if self.preconditions.is_t() {
            self.conclusion.clone()
        } else {
            Term::app(
                "implies",
                vec![self.preconditions.clone(), self.conclusion.clone()],
            )
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuggestReport {
    pub survivors: Vec<CandidateLemma>,
    /// The first falsified candidates, with their witnesses.
    pub rejected: Vec<CandidateLemma>,
    pub maps: Vec<AnalogyMap>,
    /// Candidates tested at each level that ran.
    pub tested: Vec<usize>,
}

struct Draft {
    statement: Term,
    source: Symbol,
}

/// Variables of `t`, in order.
fn var_set(t: &Term) -> HashSet<Symbol> {
    t.vars().into_iter().collect()
}

struct Filter {
    closure: Vec<Symbol>,
    known: HashSet<Term>,
}

impl Filter {
    fn new(problem: &AnalogyProblem, corpus: &Corpus) -> Filter {
        let closure = corpus.dependency_closure(&problem.target.body);
        let mut known: HashSet<Term> = corpus
            .theorems()
            .map(|e| mutate::split(&e.body).1.alpha_canonical())
            .collect();
        known.insert(mutate::split(&problem.target.body).1.alpha_canonical());
        Filter { closure, known }
    }

    fn admits(&self, concl: &Term) -> bool {
        if concl.is_ground() || !concl.heads().iter().any(|h| self.closure.contains(h)) {
            return false;
        }
        if let Some([l, r]) = concl.app_of("equal") {
            if l == r || !var_set(r).is_subset(&var_set(l)) {
                return false;
            }
        }
        !self.known.contains(&concl.alpha_canonical())
    }
}

/// Tests each draft under the hypotheses carried over from its source
/// lemma and, failing that, under the generated preconditions of its
/// conclusion. Results are in input order.
fn test_batch(
    drafts: &[Draft],
    level: u8,
    guards: &mut GuardTable<'_>,
    corpus: &Corpus,
    cfg: &TestConfig,
) -> Vec<(CandidateLemma, bool)> {
    let attempts: Vec<(Term, Vec<Term>)> = drafts
        .iter()
        .map(|d| {
            let (hyp, concl) = mutate::split(&d.statement);
            let mut pres = vec![hyp.cloned().unwrap_or_else(Term::t)];
            if let Ok(p) = guards.generate_preconditions(concl) {
                if !p.is_nil() && !pres.contains(&p) {
                    pres.push(p);
                }
            }
            (concl.clone(), pres)
        })
        .collect();
    pool().install(|| {
        attempts
            .par_iter()
            .zip(drafts)
            .map(|((concl, pres), d)| {
                let mut first = None;
                for p in pres {
                    let verdict = test_conjecture(p, concl, corpus, cfg);
                    let ok = verdict.survived();
                    let cand = CandidateLemma {
                        conclusion: concl.clone(),
                        preconditions: p.clone(),
                        level,
                        source_lemma: d.source.clone(),
                        verdict,
                    };
                    if ok {
                        return (cand, true);
                    }
                    first.get_or_insert(cand);
                }
                (first.unwrap(), false)
            })
            .collect()
    })
}

/// Runs the mutation levels in turn, stopping at the first level with a
/// surviving candidate unless `all_levels` is set.
pub fn suggest(
    problem: &AnalogyProblem,
    corpus: &Corpus,
    def_clusters: &Clustering,
    cfg: &SuggestConfig,
) -> SuggestReport {
    let mut report = SuggestReport::default();
    if problem.source_lemmas.is_empty() {
        return report;
    }
    let filter = Filter::new(problem, corpus);
    report.maps = build_analogy_maps(&problem.target, &problem.source, def_clusters, corpus);
    let mut drafts: Vec<Draft> = Vec::new();
    let mut seen = HashSet::new();
    'fill: for m in &report.maps {
        for sl in &problem.source_lemmas {
            let m = map::extend_for(m, &sl.body, &filter.closure, def_clusters, corpus);
            for statement in mutate_level1(sl, &m, corpus, cfg.budgets[0]) {
                if drafts.len() >= cfg.budgets[0] {
                    break 'fill;
                }
                if seen.insert(statement.alpha_canonical()) {
                    drafts.push(Draft {
                        statement,
                        source: sl.name.clone(),
                    });
                }
            }
        }
    }
    let mut guards = GuardTable::new(corpus);
    let mut survivors_seen = HashSet::new();
    for level in 1..=3u8 {
        if level > 1 {
            drafts = next_level(
                &drafts,
                level,
                &filter.closure,
                corpus,
                cfg.budgets[level as usize - 1],
            );
        }
        let admitted: Vec<Draft> = drafts
            .iter()
            .filter(|d| filter.admits(mutate::split(&d.statement).1))
            .map(|d| Draft {
                statement: d.statement.clone(),
                source: d.source.clone(),
            })
            .collect();
        report.tested.push(admitted.len());
        for (cand, ok) in test_batch(&admitted, level, &mut guards, corpus, &cfg.test) {
            if ok {
                if survivors_seen.insert(cand.statement().alpha_canonical()) {
                    report.survivors.push(cand);
                }
            } else if matches!(cand.verdict, TestVerdict::Falsified(_))
                && report.rejected.len() < cfg.keep_rejected
            {
                report.rejected.push(cand);
            }
        }
        if !report.survivors.is_empty() && !cfg.all_levels {
            break;
        }
    }
    report
}

/// The next level's drafts, each keeping the source lemma of the draft it
/// came from. All inputs are mutated together so the budget is shared in
/// enumeration order.
fn next_level(
    drafts: &[Draft],
    level: u8,
    closure: &[Symbol],
    corpus: &Corpus,
    budget: usize,
) -> Vec<Draft> {
    let inputs: Vec<Term> = drafts.iter().map(|d| d.statement.clone()).collect();
    let mutated = match level {
        2 => mutate::level2(&inputs, closure, corpus, budget),
        _ => mutate::level3(&inputs, closure, corpus, budget),
    };
    mutated
        .into_iter()
        .map(|(i, statement)| Draft {
            statement,
            source: drafts[i].source.clone(),
        })
        .collect()
}

/// Survivors only.
pub fn suggest_lemmas(
    problem: &AnalogyProblem,
    corpus: &Corpus,
    def_clusters: &Clustering,
    cfg: &SuggestConfig,
) -> Vec<CandidateLemma> {
    suggest(problem, corpus, def_clusters, cfg).survivors
}
