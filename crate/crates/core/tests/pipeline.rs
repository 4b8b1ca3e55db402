use lemma_mill::analogy::{suggest, AnalogyProblem, SuggestConfig};
use lemma_mill::corpus::parse_term;
use lemma_mill::counterexample::{test_conjecture, TestConfig};
use lemma_mill::eval::{eval, pool, Value};
use lemma_mill::guards::GuardTable;
use lemma_mill::recurrent::{recurrent_cluster_definitions, reliable, similar_to};
use lemma_mill::{sym, ClusterConfig, Corpus, Kind};

fn fig2() -> Corpus {
    Corpus::parse_files(&[concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/fig2.lisp"
    )])
    .unwrap()
}

#[test]
fn fixture_ingests() {
    let c = fig2();
    assert_eq!(c.defuns().count(), 12);
    assert_eq!(c.theorems().count(), 6);
    assert!(c.same_scc(&sym("fib"), &sym("fib")));
    assert!(!c.same_scc(&sym("fib"), &sym("fib-tail")));
}

#[test]
fn definitions_evaluate() {
    let c = fig2();
    let v = |s: &str| eval(&parse_term(s).unwrap(), &[], &c).unwrap();
    assert_eq!(v("(fib 20)"), Value::Int(6765));
    assert_eq!(v("(fib-tail 20)"), Value::Int(6765));
    assert_eq!(v("(expt-tail 3 4)"), Value::Int(81));
    assert_eq!(v("(fact-tail 10)"), Value::Int(3_628_800));
    assert_eq!(v("(mult-tail 7 6)"), v("(mult 7 6)"));
}

#[test]
fn corpus_theorems_survive_testing() {
    let c = fig2();
    let cfg = TestConfig::default();
    pool().install(|| {
        for e in c.theorems() {
            let (pre, concl) = e.split_statement();
            let pre = pre.cloned().unwrap_or_else(lemma_mill::Term::t);
            assert!(
                test_conjecture(&pre, concl, &c, &cfg).survived(),
                "{}",
                e.name
            );
        }
    });
}

#[test]
fn similar_theorems_and_lemma_suggestion() {
    let c = fig2();
    let cfg = ClusterConfig::default();
    let model = recurrent_cluster_definitions(&c, &cfg).unwrap();
    assert_eq!(
        similar_to(&sym("expt-expt-tail"), Kind::Thm, &c, &model, &cfg).unwrap(),
        vec![sym("mult-mult-tail")]
    );
    let defs = reliable(&c, &model, Kind::Def, &cfg).unwrap();
    let p = AnalogyProblem::discover(&sym("expt-expt-tail"), &c, &model, &defs, &cfg)
        .unwrap()
        .unwrap();
    let report = suggest(&p, &c, &defs, &SuggestConfig::default());
    assert!(!report.survivors.is_empty());
    assert!(report.survivors.iter().all(|l| l.verdict.survived()));
    assert_eq!(report.survivors[0].level, 1);
}

#[test]
fn preconditions_and_guards() {
    let c = fig2();
    let mut g = GuardTable::new(&c);
    let concl =
        parse_term("(equal (helper-fib n j k) (+ (* (fib (- n 1)) j) (* (fib n) k)))").unwrap();
    let pre = g.generate_preconditions(&concl).unwrap();
    let cfg = TestConfig::default();
    assert!(
        pool()
            .install(|| test_conjecture(&pre, &concl, &c, &cfg))
            .survived(),
        "{pre}"
    );
    assert!(!pool()
        .install(|| test_conjecture(&lemma_mill::Term::t(), &concl, &c, &cfg))
        .survived());
}
