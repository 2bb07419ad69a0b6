use std::path::PathBuf;

use gitstrata::problem_file::{ProblemFile, ProblemSpec, TorusSpec};
use gitstrata::rational::rat;
use gitstrata::refine::EngineConfig;
use gitstrata::report::{self, Outcome, P1nInput};
use gitstrata::QVector;
use proptest::prelude::*;

fn shipped(name: &str) -> ProblemFile {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples_problems").join(name);
    ProblemFile::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn qvec(d: usize) -> impl Strategy<Value = QVector> {
    prop::collection::vec((-9i64..=9, 1i64..=7), d).prop_map(|v| QVector::new(v.into_iter().map(|(p, q)| rat(p, q)).collect()))
}

fn torus_spec() -> impl Strategy<Value = TorusSpec> {
    (1usize..=3, 1usize..=6).prop_flat_map(|(d, n)| {
        (
            prop::collection::vec(qvec(d), n),
            prop::option::of(qvec(d)),
            prop::option::of(qvec(d)),
            prop::option::of(prop::collection::vec(prop::collection::btree_set(0..n, 1..=n), 1..4)),
            any::<bool>(),
        )
            .prop_map(move |(weights, lambda, twist, supports, gram)| TorusSpec {
                dim: d,
                weights,
                gram: gram.then(|| {
                    (0..d)
                        .map(|i| (0..d).map(|j| if i == j { rat(3, 2) } else { rat(0, 1) }).collect())
                        .collect()
                }),
                lambda,
                twist,
                allowed_supports: supports.map(|s| s.into_iter().map(|x| x.into_iter().collect()).collect()),
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn problem_files_round_trip(spec in torus_spec()) {
        let f = ProblemFile::torus(spec);
        let text = f.to_toml();
        let back = ProblemFile::parse(&text).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(back.to_toml(), text);
    }
}

#[test]
fn shipped_problems_parse() {
    assert_eq!(shipped("p1n_6.toml").spec, ProblemSpec::P1n(6));
    for name in ["segment.toml", "one_sided.toml", "three_weights.toml", "plane_twisted.toml"] {
        let f = shipped(name);
        assert!(matches!(f.spec, ProblemSpec::Torus(_)), "{name}");
        assert_eq!(ProblemFile::parse(&f.to_toml()).unwrap(), f);
    }
}

#[test]
fn hm_reports() {
    let f = shipped("segment.toml");
    let p = f.torus_problem(16).unwrap();
    let r = report::hm_report(&f, &p, &[0, 1]).unwrap();
    assert_eq!(r.result["status"], "stable");
    assert_eq!(r.result["certificate"]["coefficients"], serde_json::json!(["1/2", "1/2"]));
    assert_eq!(r.outcome, Outcome::Ok);
    let r = report::hm_report(&f, &p, &[1]).unwrap();
    assert_eq!(r.result["status"], "unstable");
    assert_eq!(r.result["certificate"]["kind"], "separating");
    assert_eq!(r.result["certificate_verified"], true);
    assert_eq!(report::hm_report(&f, &p, &[2]).unwrap_err().exit_code(), 3);
}

#[test]
fn refine_reports_are_deterministic_and_consistent() {
    let f = shipped("p1n_6.toml");
    let cfg1 = EngineConfig { workers: 1, ..Default::default() };
    let cfg4 = EngineConfig { workers: 4, ..Default::default() };
    let (a, dot) = report::refine_report(&f, &cfg1, 16).unwrap();
    let (b, _) = report::refine_report(&f, &cfg4, 16).unwrap();
    assert_eq!(a.to_machine(), b.to_machine());
    assert_eq!(a.outcome, Outcome::Ok);
    let leaves = a.result["leaves"].as_array().unwrap();
    assert_eq!(leaves.len(), 7);
    let human = a.to_human();
    for l in leaves {
        assert!(human.contains(l["label"].as_str().unwrap()));
    }
    assert!(dot.starts_with("digraph"));

    let blowup = shipped("three_weights.toml");
    let (r, _) = report::refine_report(&blowup, &cfg1, 16).unwrap();
    assert_eq!(r.outcome, Outcome::UnsupportedBlowup);
    assert_eq!(r.outcome.exit_code(), 4);
    let (r, _) = report::refine_report(&shipped("one_sided.toml"), &cfg1, 16).unwrap();
    assert_eq!(r.outcome, Outcome::Ok);
}

#[test]
fn p1n_reports() {
    let r = report::p1n_classify_report(6, &P1nInput::parse("3+2+1").unwrap()).unwrap();
    assert_eq!(r.result["label"], "S_0^{3,<3}");
    assert_eq!(r.result["components"]["source"], "derived");
    let pts = P1nInput::parse("1:0 1:0 1:0 0:1 1:1 1/2:1").unwrap();
    let r = report::p1n_classify_report(6, &pts).unwrap();
    assert_eq!(r.result["signature"], "3+1+1+1");
    assert_eq!(report::p1n_classify_report(6, &P1nInput::parse("3+2").unwrap()).unwrap_err().exit_code(), 3);
    assert_eq!(report::p1n_enumerate_report(4).unwrap().result["strata"].as_array().unwrap().len(), 5);
    let r = report::p1n_components_report(5, "S_1").unwrap();
    assert_eq!(r.result["count"], 10);
    assert_eq!(r.result["source"], "paper");
    let r = report::p1n_components_report(4, "S_0^{2,2}").unwrap();
    assert_eq!(r.result["count"], 3);
}

#[test]
fn strata_and_lambda_reports() {
    let f = shipped("three_weights.toml");
    let p = f.torus_problem(16).unwrap();
    let (r, dot) = report::strata_report(&f, &p, 2).unwrap();
    assert_eq!(r.outcome, Outcome::Ok);
    assert_eq!(r.result["strata"].as_array().unwrap().len(), 3);
    assert_eq!(r.result["zero_stratum_is_semistable_locus"], true);
    assert!(dot.contains("->"));
    let g = shipped("plane_twisted.toml");
    let q = g.torus_problem(16).unwrap();
    let r = report::lambda_report(&g, &q, g.lambda().unwrap()).unwrap();
    assert_eq!(r.result["lambda_trivial"], false);
}
