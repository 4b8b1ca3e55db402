mod cache;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lemma_mill::analogy::{suggest, AnalogyProblem, CandidateLemma, SuggestConfig};
use lemma_mill::corpus::parse_term;
use lemma_mill::counterexample::{TestConfig, TestVerdict};
use lemma_mill::guards::GuardTable;
use lemma_mill::recurrent::{recurrent_cluster_definitions, reliable, similar_to};
use lemma_mill::{ClusterConfig, Clustering, Corpus, DefinitionModel, Kind, Symbol};
use serde_json::{json, Value as Json};

use cache::{corpus_hash, default_path, Cache, NO_CACHE_ENV};

const EXIT_DOMAIN: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "lemma-mill",
    version,
    about = "Clustering, lemma suggestion and preconditions for ACL2-style corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Corpus files, ingested in order.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=5))]
    granularity: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
    /// Cache file (default: next to the first corpus file).
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Reliable clusters of definitions.
    ClusterDefs {
        #[command(flatten)]
        common: Common,
        /// Only the definitions similar to this one.
        #[arg(long)]
        about: Option<String>,
    },
    /// Reliable clusters of theorem statements.
    ClusterThms {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        about: Option<String>,
    },
    /// Candidate lemmas for a theorem, by analogy with a similar one.
    Suggest {
        theorem: String,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
        budget_l1: u64,
        #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
        budget_l2: u64,
        #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
        budget_l3: u64,
        /// Keep mutating after a level produces survivors.
        #[arg(long)]
        all_levels: bool,
        /// Random tests per candidate.
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
    },
    /// Preconditions under which a conjecture is well guarded.
    Preconditions {
        conjecture: String,
        #[command(flatten)]
        common: Common,
    },
    /// Guard of a function.
    Guard {
        function: String,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Domain(String),
    Usage(String),
}

type Outcome = Result<String, Failure>;

struct Session {
    corpus: Corpus,
    cache: Cache,
    cfg: ClusterConfig,
    json: bool,
}

impl Session {
    fn open(c: &Common) -> Result<Session, Failure> {
        let mut sources = Vec::new();
        for p in &c.paths {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Domain(format!("cannot read {}: {e}", p.display())))?;
            sources.push((p.display().to_string(), text));
        }
        let corpus = Corpus::parse_sources(&sources).map_err(|e| Failure::Domain(e.to_string()))?;
        for w in &corpus.warnings {
            eprintln!("warning: {w}");
        }
        let disabled = std::env::var(NO_CACHE_ENV).is_ok_and(|v| !v.is_empty() && v != "0");
        let path = if disabled {
            None
        } else {
            Some(c.cache.clone().unwrap_or_else(|| default_path(&c.paths[0])))
        };
        let cache = Cache::open(path, &corpus_hash(&sources));
        let cfg = ClusterConfig {
            granularity: c.granularity,
            seed: c.seed,
            ..ClusterConfig::default()
        };
        Ok(Session {
            corpus,
            cache,
            cfg,
            json: c.json,
        })
    }

    fn model(&mut self) -> Result<DefinitionModel, Failure> {
        if let Some(m) = self.cache.model(&self.cfg) {
            return Ok(m);
        }
        let m = recurrent_cluster_definitions(&self.corpus, &self.cfg)
            .map_err(|e| Failure::Domain(e.to_string()))?;
        self.cache.store_model(&self.cfg, &m);
        Ok(m)
    }

    fn guards(&self) -> GuardTable<'_> {
        GuardTable::with_memo(&self.corpus, self.cache.guards())
    }

    fn finish(&self) {
        if let Err(e) = self.cache.save() {
            eprintln!("warning: cache not written: {e}");
        }
    }
}

fn render(j: Json) -> String {
    serde_json::to_string_pretty(&j).expect("json renders") + "\n"
}

fn lower(xs: &[Symbol]) -> Vec<String> {
    xs.iter().map(|s| s.lower()).collect()
}

fn clusters_output(s: &Session, clustering: &Clustering, what: &str) -> String {
    let groups: Vec<Vec<String>> = clustering.groups().iter().map(|g| lower(g)).collect();
    if s.json {
        return render(json!({ "clusters": groups }));
    }
    if groups.is_empty() {
        return format!("no {what}\n");
    }
    let mut out = String::new();
    for (i, g) in groups.iter().enumerate() {
        let _ = writeln!(out, "cluster {}: {}", i + 1, g.join(" "));
    }
    out
}

fn about_output(s: &Session, name: &Symbol, similar: &[Symbol], what: &str) -> String {
    if s.json {
        return render(json!({ "about": name.lower(), "similar": lower(similar) }));
    }
    if similar.is_empty() {
        return format!("no {what} similar to {name}\n");
    }
    lower(similar).join("\n") + "\n"
}

fn cluster_cmd(common: &Common, about: Option<&str>, kind: Kind) -> Outcome {
    let mut s = Session::open(common)?;
    let (count, what) = match kind {
        Kind::Def => (s.corpus.defuns().count(), "definitions"),
        Kind::Thm => (s.corpus.theorems().count(), "theorems"),
    };
    if count == 0 && about.is_none() {
        return Ok(clusters_output(&s, &Clustering { clusters: vec![] }, what));
    }
    let model = s.model()?;
    let out = match about {
        Some(name) => {
            let name = Symbol::new(name);
            let similar = similar_to(&name, kind, &s.corpus, &model, &s.cfg)
                .map_err(|e| Failure::Domain(e.to_string()))?;
            about_output(&s, &name, &similar, what)
        }
        None => {
            let clustering = reliable(&s.corpus, &model, kind, &s.cfg)
                .map_err(|e| Failure::Domain(e.to_string()))?;
            if kind == Kind::Thm && count == 1 && !s.json {
                "only one theorem; nothing to compare it with\n".to_string()
            } else {
                clusters_output(&s, &clustering, what)
            }
        }
    };
    s.finish();
    Ok(out)
}

fn verdict_json(v: &TestVerdict) -> Json {
    match v {
        TestVerdict::Survived(n) => json!({ "result": "survived", "tests": n }),
        TestVerdict::Falsified(w) => json!({
            "result": "falsified",
            "witness": w.0.iter().map(|(k, v)| (k.lower(), Json::String(v.to_string()))).collect::<serde_json::Map<_, _>>(),
        }),
        TestVerdict::Inconclusive(_) => json!({ "result": "inconclusive", "reason": v.label() }),
    }
}

fn candidate_json(c: &CandidateLemma) -> Json {
    json!({
        "conclusion": c.conclusion.surface(),
        "preconditions": c.preconditions.surface(),
        "level": c.level,
        "sourceLemma": c.source_lemma.lower(),
        "verdict": verdict_json(&c.verdict),
    })
}

fn candidate_text(out: &mut String, c: &CandidateLemma) {
    let _ = writeln!(
        out,
        "level {} from {} ({})",
        c.level,
        c.source_lemma,
        c.verdict.label()
    );
    let _ = writeln!(out, "  {}", c.statement().surface());
}

struct SuggestArgs {
    budgets: [usize; 3],
    all_levels: bool,
    samples: usize,
}

fn suggest_cmd(theorem: &str, common: &Common, a: SuggestArgs) -> Outcome {
    let mut s = Session::open(common)?;
    let name = Symbol::new(theorem);
    let Some(tt) = s.corpus.theorem(&name).cloned() else {
        return Err(Failure::Domain(format!("unknown theorem {name}")));
    };
    let model = s.model()?;
    let defs = reliable(&s.corpus, &model, Kind::Def, &s.cfg)
        .map_err(|e| Failure::Domain(e.to_string()))?;
    let problem = AnalogyProblem::discover(&name, &s.corpus, &model, &defs, &s.cfg)
        .map_err(|e| Failure::Domain(e.to_string()))?;
    let Some(problem) = problem else {
        s.finish();
        return Ok(if s.json {
            render(
                json!({ "target": tt.name.lower(), "source": Json::Null, "suggestions": [], "rejected": [] }),
            )
        } else {
            format!("no similar theorems for {name}\n")
        });
    };
    let cfg = SuggestConfig {
        budgets: a.budgets,
        all_levels: a.all_levels,
        test: TestConfig {
            samples: a.samples,
            min_satisfying: TestConfig::default().min_satisfying.min(a.samples),
            seed: common.seed,
            ..TestConfig::default()
        },
        ..SuggestConfig::default()
    };
    let report = suggest(&problem, &s.corpus, &defs, &cfg);
    let sls: Vec<String> = problem
        .source_lemmas
        .iter()
        .map(|e| e.name.lower())
        .collect();
    let out = if s.json {
        render(json!({
            "target": problem.target.name.lower(),
            "source": problem.source.name.lower(),
            "sourceLemmas": sls,
            "suggestions": report.survivors.iter().map(candidate_json).collect::<Vec<_>>(),
            "rejected": report.rejected.iter().map(candidate_json).collect::<Vec<_>>(),
        }))
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "target: {}", problem.target.name);
        let _ = writeln!(out, "source: {}", problem.source.name);
        let _ = writeln!(
            out,
            "source lemmas: {}",
            if sls.is_empty() {
                "none".to_string()
            } else {
                sls.join(" ")
            }
        );
        if report.survivors.is_empty() {
            out.push_str("no suggestion survived testing\n");
            if !report.rejected.is_empty() {
                out.push_str("falsified candidates:\n");
                for c in &report.rejected {
                    candidate_text(&mut out, c);
                }
            }
        } else {
            for c in &report.survivors {
                candidate_text(&mut out, c);
            }
        }
        out
    };
    s.finish();
    Ok(out)
}

fn preconditions_cmd(conjecture: &str, common: &Common) -> Outcome {
    let mut s = Session::open(common)?;
    let c = parse_term(conjecture)
        .map_err(|e| Failure::Usage(format!("cannot parse conjecture: {e}")))?;
    if let Err((f, arity)) = s.corpus.check_heads(&c) {
        return Err(Failure::Domain(match arity {
            None => format!("unknown function {f}"),
            Some(n) => format!("{f} takes {n} argument(s)"),
        }));
    }
    let mut guards = s.guards();
    let result = guards
        .generate_preconditions(&c)
        .map_err(|e| Failure::Domain(e.to_string()))?;
    let contradiction = if result.is_nil() {
        guards.contradiction(&c).ok().flatten()
    } else {
        None
    };
    let memo = guards.memo().clone();
    drop(guards);
    s.cache.store_guards(&memo);
    let out = if s.json {
        let mut j = json!({ "input": c.surface(), "result": result.surface() });
        if let Some(x) = &contradiction {
            j["contradiction"] = json!([x.left.surface(), x.right.surface()]);
        }
        render(j)
    } else {
        let mut out = result.surface() + "\n";
        if let Some(x) = &contradiction {
            let _ = writeln!(
                out,
                "contradiction: {} conflicts with {}",
                x.left.surface(),
                x.right.surface()
            );
        }
        out
    };
    s.finish();
    Ok(out)
}

fn guard_cmd(function: &str, common: &Common) -> Outcome {
    let mut s = Session::open(common)?;
    let f = Symbol::new(function);
    let mut guards = s.guards();
    let g = guards
        .guard_of(&f)
        .map_err(|e| Failure::Domain(e.to_string()))?;
    let memo = guards.memo().clone();
    drop(guards);
    s.cache.store_guards(&memo);
    s.finish();
    Ok(if s.json {
        render(json!({ "function": f.lower(), "guard": g.surface() }))
    } else {
        g.surface() + "\n"
    })
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::ClusterDefs { common, about } => cluster_cmd(&common, about.as_deref(), Kind::Def),
        Command::ClusterThms { common, about } => cluster_cmd(&common, about.as_deref(), Kind::Thm),
        Command::Suggest {
            theorem,
            common,
            budget_l1,
            budget_l2,
            budget_l3,
            all_levels,
            samples,
        } => suggest_cmd(
            &theorem,
            &common,
            SuggestArgs {
                budgets: [budget_l1 as usize, budget_l2 as usize, budget_l3 as usize],
                all_levels,
                samples: samples as usize,
            },
        ),
        Command::Preconditions { conjecture, common } => preconditions_cmd(&conjecture, &common),
        Command::Guard { function, common } => guard_cmd(&function, &common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DOMAIN)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
