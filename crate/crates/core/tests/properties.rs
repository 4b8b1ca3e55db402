use lemma_mill::cluster::cluster_count;
use lemma_mill::corpus::{parse_term, raw_term};
use lemma_mill::counterexample::{
    generate_value, replay, test_conjecture, TestConfig, TestVerdict,
};
use lemma_mill::eval::{eval, Value};
use lemma_mill::guards::simplify_guard;
use lemma_mill::macros::expand;
use lemma_mill::recurrent::recurrent_cluster_definitions;
use lemma_mill::sexpr::read_all;
use lemma_mill::{ClusterConfig, Corpus, Symbol, Term};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),
        (-50i64..50).prop_map(Term::int),
        Just(Term::nil()),
        Just(Term::t()),
    ]
}

const HEADS: &[(&str, usize)] = &[
    ("binary-+", 2),
    ("binary-*", 2),
    ("unary--", 1),
    ("<", 2),
    ("equal", 2),
    ("if", 3),
    ("not", 1),
    ("cons", 2),
    ("car", 1),
    ("consp", 1),
    ("natp", 1),
];

fn core_term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(4, 40, 3, |inner| {
        (
            prop::sample::select(HEADS.to_vec()),
            prop::collection::vec(inner, 3),
        )
            .prop_map(|((h, n), mut args)| {
                args.truncate(n);
                Term::app(h, args)
            })
    })
}

const MACROS: &[&str] = &["+", "*", "-", "1+", "1-", "and", "or", "<=", ">", ">="];

/// Terms that still contain surface macros.
fn surface_term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(4, 40, 3, |inner| {
        prop_oneof![
            (
                prop::sample::select(MACROS.to_vec()),
                prop::collection::vec(inner.clone(), 1..=3)
            )
                .prop_map(|(h, mut args)| {
                    match h {
                        "1+" | "1-" => args.truncate(1),
                        "-" => args.truncate(2),
                        "<=" | ">" | ">=" => {
                            if args.len() < 2 {
                                args.push(Term::int(0));
                            }
                            args.truncate(2)
                        }
                        _ => {}
                    }
                    Term::app(h, args)
                }),
            (
                prop::sample::select(HEADS.to_vec()),
                prop::collection::vec(inner, 3)
            )
                .prop_map(|((h, n), mut args)| {
                    args.truncate(n);
                    Term::app(h, args)
                }),
        ]
    })
}

fn reread(s: &str) -> Term {
    raw_term(&read_all(s, "<prop>").unwrap()[0]).unwrap()
}

fn small_values() -> Vec<Value> {
    let mut out: Vec<Value> = (-3..=3).map(Value::Int).collect();
    out.push(Value::Nil);
    out.push(Value::T);
    out.push(Value::list([Value::Int(1)]));
    out.push(Value::list([Value::Int(0), Value::Int(-1)]));
    out
}

fn guard_atom() -> impl Strategy<Value = Term> {
    let var = prop::sample::select(vec!["x", "y"]).prop_map(Term::var);
    prop_oneof![
        (
            prop::sample::select(vec![
                "integerp",
                "natp",
                "consp",
                "symbolp",
                "acl2-numberp",
                "zp",
                "endp"
            ]),
            var.clone()
        )
            .prop_map(|(r, v)| Term::app(r, vec![v])),
        (var.clone(), -2i64..3).prop_map(|(v, c)| Term::app("<", vec![v, Term::int(c)])),
        (var.clone(), -2i64..3).prop_map(|(v, c)| Term::app("<", vec![Term::int(c), v])),
        (var.clone(), -2i64..3).prop_map(|(v, c)| Term::app("equal", vec![v, Term::int(c)])),
        var.prop_map(|v| Term::app("equal", vec![v, Term::nil()])),
    ]
}

fn guard() -> impl Strategy<Value = Term> {
    guard_atom().prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(|a| Term::app("and", a)),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(|a| Term::app("or", a)),
            inner.prop_map(|a| Term::app("not", vec![a])),
        ]
    })
}

/// Single-variable predicates of the kind preconditions are made of.
fn precondition_on_x() -> impl Strategy<Value = Term> {
    let x = || Term::var("x");
    let atom = prop_oneof![
        prop::sample::select(vec!["integerp", "natp", "consp", "symbolp", "acl2-numberp"])
            .prop_map(move |r| Term::app(r, vec![x()])),
        (-5i64..5).prop_map(move |c| Term::app("<", vec![x(), Term::int(c)])),
        (-5i64..5)
            .prop_map(move |c| Term::app("not", vec![Term::app("<", vec![x(), Term::int(c)])])),
    ];
    prop::collection::vec(atom, 1..=3).prop_map(|mut a| {
        if a.len() == 1 {
            a.pop().unwrap()
        } else {
            Term::app("and", a)
        }
    })
}

fn template_corpus(kinds: &[u8]) -> String {
    let mut out = String::new();
    let mut binary: Option<String> = None;
    for (i, k) in kinds.iter().enumerate() {
        let f = format!("f{i}");
        let def = match (k % 5, &binary) {
            (0, _) => {
                binary = Some(f.clone());
                format!("(defun {f} (n m) (if (zp m) 0 (+ n ({f} n (- m 1)))))")
            }
            (1, _) => format!("(defun {f} (n m a) (if (zp m) a ({f} n (- m 1) (* n a))))"),
            (2, _) => format!("(defun {f} (l) (if (endp l) 0 (+ 1 ({f} (cdr l)))))"),
            (3, Some(g)) => format!("(defun {f} (x) ({g} x x))"),
            _ => format!("(defun {f} (x) (* x (+ x {k})))"),
        };
        out.push_str(&def);
        out.push('\n');
    }
    out
}

fn fig2() -> Corpus {
    Corpus::parse_str(include_str!("fixtures/fig2.lisp")).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_terms_read_back(t in core_term()) {
        prop_assert_eq!(reread(&t.to_string()), t.clone());
        prop_assert_eq!(expand(&reread(&t.surface())), t);
    }

    #[test]
    fn expansion_is_idempotent(t in surface_term()) {
        let once = expand(&t);
        prop_assert_eq!(expand(&once), once.clone());
        for h in once.heads() {
            prop_assert!(!MACROS.contains(&h.lower().as_str()) || h.is("and") || h.is("or"), "{}", h);
        }
    }

    #[test]
    fn arithmetic_macros_mean_arithmetic(a in -1000i64..1000, b in -1000i64..1000, c in -1000i64..1000) {
        let c0 = Corpus::default();
        let env = [
            (Symbol::new("a"), Value::Int(a as i128)),
            (Symbol::new("b"), Value::Int(b as i128)),
            (Symbol::new("c"), Value::Int(c as i128)),
        ];
        let (a, b, c) = (a as i128, b as i128, c as i128);
        let cases: Vec<(&str, Value)> = vec![
            ("(+ a b c)", Value::Int(a + b + c)),
            ("(* a b c)", Value::Int(a * b * c)),
            ("(- a b)", Value::Int(a - b)),
            ("(- a)", Value::Int(-a)),
            ("(1+ a)", Value::Int(a + 1)),
            ("(1- a)", Value::Int(a - 1)),
            ("(<= a b)", Value::bool(a <= b)),
            ("(> a b)", Value::bool(a > b)),
            ("(>= a b)", Value::bool(a >= b)),
            ("(and (< a b) (< b c))", Value::bool(a < b && b < c)),
            ("(or (< a b) (< b c))", Value::bool(a < b || b < c)),
        ];
        for (src, want) in cases {
            let got = eval(&parse_term(src).unwrap(), &env, &c0).unwrap();
            prop_assert_eq!(got.truthy(), want.truthy(), "{}", src);
            if let Value::Int(_) = want {
                prop_assert_eq!(got, want, "{}", src);
            }
        }
    }

    #[test]
    fn simplification_preserves_truth(g in guard()) {
        let c0 = Corpus::default();
        let s = simplify_guard(&g);
        let vals = small_values();
        for x in &vals {
            for y in &vals {
                let env = [(Symbol::new("x"), x.clone()), (Symbol::new("y"), y.clone())];
                let a = eval(&g, &env, &c0).unwrap().truthy();
                let b = eval(&s, &env, &c0).unwrap().truthy();
                prop_assert_eq!(a, b, "{} vs {} at x={} y={}", g.surface(), s.surface(), x, y);
            }
        }
    }

    #[test]
    fn generated_values_satisfy_their_predicate(p in precondition_on_x(), seed in 0u64..1000) {
        let c0 = Corpus::default();
        let cfg = TestConfig::default();
        let x = Symbol::new("x");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Ok(v) = generate_value(&p, &x, &c0, &cfg, &mut rng) {
            let holds = eval(&p, &[(x, v.clone())], &c0).unwrap().truthy();
            prop_assert!(holds, "{} does not satisfy {}", v, p.surface());
        }
    }

    #[test]
    fn cluster_count_is_monotone_in_granularity(n in 1usize..500) {
        let mut prev = 0;
        for g in 1..=5u8 {
            let k = cluster_count(n, &ClusterConfig { granularity: g, ..Default::default() });
            prop_assert!(k >= prev && k >= 1 && k <= n);
            prev = k;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn witnesses_replay_as_violations(
        pre in precondition_on_x(),
        k in -3i64..4,
        f in prop::sample::select(vec!["fact", "fib", "mult-tail"]),
    ) {
        let c = fig2();
        let call = if f == "mult-tail" {
            Term::app(f, vec![Term::var("x"), Term::var("y")])
        } else {
            Term::app(f, vec![Term::var("x")])
        };
        let concl = Term::app("<", vec![Term::int(k), call]);
        let cfg = TestConfig { samples: 60, ..Default::default() };
        if let TestVerdict::Falsified(w) = test_conjecture(&pre, &concl, &c, &cfg) {
            prop_assert_eq!(replay(&w, &pre, &concl, &c, &cfg), Some((true, false)));
        }
    }

    #[test]
    fn definition_models_are_deterministic_and_injective(
        kinds in prop::collection::vec(0u8..10, 2..30),
        seed in 0u64..4,
        g in 1u8..=5,
    ) {
        let c = Corpus::parse_str(&template_corpus(&kinds)).unwrap();
        let cfg = ClusterConfig { granularity: g, seed, restarts: 4, ..Default::default() };
        let a = recurrent_cluster_definitions(&c, &cfg).unwrap();
        let b = recurrent_cluster_definitions(&c, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.values.is_injective());
        prop_assert_eq!(a.values.len(), kinds.len());

        // the clusters partition the definitions
        let mut seen: Vec<Symbol> = a.clustering.groups().into_iter().flatten().collect();
        prop_assert!(a.clustering.clusters.iter().all(|c| !c.members.is_empty()));
        seen.sort();
        let mut all: Vec<Symbol> = c.defuns().map(|e| e.name.clone()).collect();
        all.sort();
        prop_assert_eq!(seen, all);
        prop_assert_eq!(a.clustering.clusters.len(), cluster_count(kinds.len(), &cfg));
    }

    #[test]
    fn events_round_trip_through_source(kinds in prop::collection::vec(0u8..10, 1..12)) {
        let c = Corpus::parse_str(&template_corpus(&kinds)).unwrap();
        let text: String = c.events().iter().map(|e| e.to_source() + "\n").collect();
        let back = Corpus::parse_str(&text).unwrap();
        prop_assert_eq!(back.events().len(), c.events().len());
        for (a, b) in c.events().iter().zip(back.events()) {
            prop_assert!(a.same_definition(b), "{} vs {}", a.to_source(), b.to_source());
        }
    }
}
