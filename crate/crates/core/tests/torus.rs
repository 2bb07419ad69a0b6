use std::collections::BTreeSet;

use gitstrata::exactgeom::{min_norm_oracle, HullCertificate};
use gitstrata::hkkn;
use gitstrata::rational::{int, rat, Rational};
use gitstrata::refine::{check_theorem_1_1, stratify, EngineConfig, GitProblemOracle, TorusNode};
use gitstrata::torusgit::{SupportClass, TorusProblem};
use gitstrata::{InnerProduct, QVector};
use num_traits::Zero;
use proptest::prelude::*;

fn weights(max_n: usize, max_d: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max_d).prop_flat_map(move |d| prop::collection::vec(prop::collection::vec(-3i64..=3, d), 2..=max_n))
}

fn problem(w: &[Vec<i64>]) -> TorusProblem {
    let refs: Vec<&[i64]> = w.iter().map(Vec::as_slice).collect();
    TorusProblem::from_int_weights(&refs).unwrap()
}

fn sc(ix: &[usize]) -> SupportClass {
    SupportClass::from_indices(ix).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semistability_is_open_and_stable_points_have_finite_stabilizers(w in weights(6, 3)) {
        let p = problem(&w);
        for s in p.supports() {
            let ss = p.semistable(s).unwrap();
            if p.stable(s).unwrap() {
                prop_assert!(ss);
                prop_assert_eq!(p.stab_dim(s).unwrap(), 0);
            }
            if ss {
                for t in p.supports().into_iter().filter(|t| s.is_subset(*t)) {
                    prop_assert!(p.semistable(t).unwrap(), "{} semistable but {} is not", s, t);
                }
            }
        }
    }

    #[test]
    fn twisted_certificates_are_sound(w in weights(6, 3), tw in prop::collection::vec((-3i64..=3, 1i64..=3), 3)) {
        let p0 = problem(&w);
        let d = p0.dim();
        let twist = QVector::new(tw[..d].iter().map(|&(a, b)| rat(a, b)).collect());
        let p = p0.with_twist(twist.clone()).unwrap();
        for s in p.supports() {
            let shifted: Vec<QVector> = s.iter().map(|i| QVector::from_ints(&w[i]).sub(&twist)).collect();
            let (_, cert) = p.certificate(s).unwrap();
            match cert {
                HullCertificate::Barycentric(c) => {
                    prop_assert!(p.semistable(s).unwrap());
                    let sum: Rational = c.iter().sum();
                    prop_assert_eq!(sum, int(1));
                    for k in 0..d {
                        let x: Rational = c.iter().zip(&shifted).map(|(a, v)| a * &v.coords()[k]).sum();
                        prop_assert!(x.is_zero());
                    }
                }
                HullCertificate::Separating(f) => {
                    prop_assert!(!p.semistable(s).unwrap());
                    prop_assert!(shifted.iter().all(|v| f.pairing(v) > Rational::zero()));
                }
            }
        }
    }

    #[test]
    fn hkkn_stratification_properties(w in weights(7, 3)) {
        let p = problem(&w);
        let strat = hkkn::stratify(&p).unwrap();
        prop_assert!(hkkn::check_closure_order(&p, &strat).is_empty());
        let ip = InnerProduct::identity(p.dim());
        let mut seen = BTreeSet::new();
        for (idx, members) in &strat.strata {
            for s in members {
                prop_assert!(seen.insert(*s));
                let beta = min_norm_oracle(&p.effective_weights(*s), &ip).unwrap();
                prop_assert_eq!(&beta, &idx.beta);
                prop_assert_eq!(idx.is_zero(), p.semistable(*s).unwrap());
            }
        }
        prop_assert_eq!(seen.len(), p.supports().len());
    }

    #[test]
    fn refined_leaves_refine_hkkn_strata(w in weights(5, 2)) {
        let p = problem(&w);
        let map: Vec<(SupportClass, QVector)> = p
            .supports()
            .into_iter()
            .map(|s| (s, min_norm_oracle(&p.effective_weights(s), &InnerProduct::identity(p.dim())).unwrap()))
            .collect();
        let node = TorusNode::root(p, None).unwrap();
        let tree = stratify(&node, &EngineConfig::default()).unwrap();
        for leaf in &tree.leaves {
            let betas: BTreeSet<&QVector> = leaf
                .cells
                .iter()
                .map(|c| &map.iter().find(|(s, _)| s == c).unwrap().1)
                .collect();
            prop_assert_eq!(betas.len(), 1, "leaf {} meets several strata", leaf.index);
        }
        let mut rep = check_theorem_1_1(&node, &tree);
        rep.incomplete = false;
        prop_assert!(rep.passed(), "{:?}", rep);
    }
}

#[test]
fn one_sided_weights() {
    let p = problem(&[vec![1], vec![2]]);
    let strat = hkkn::stratify(&p).unwrap();
    let got: Vec<(String, Vec<SupportClass>)> = strat
        .strata
        .iter()
        .map(|(k, v)| (k.beta.to_string(), v.clone()))
        .collect();
    // min |conv{1}| = 1, |conv{2}| = 2, |conv{1,2}| = 1
    assert_eq!(
        got,
        vec![("(1)".to_string(), vec![sc(&[0]), sc(&[0, 1])]), ("(2)".to_string(), vec![sc(&[1])])]
    );
    let node = TorusNode::root(p, None).unwrap();
    let tree = stratify(&node, &EngineConfig::default()).unwrap();
    assert!(tree.is_complete());
    assert!(check_theorem_1_1(&node, &tree).passed());
}

#[test]
fn three_collinear_weights() {
    let p = problem(&[vec![-1], vec![0], vec![1]]);
    let strat = hkkn::stratify(&p).unwrap();
    let zero: BTreeSet<SupportClass> = strat.strata.iter().find(|(k, _)| k.is_zero()).unwrap().1.iter().copied().collect();
    let want: BTreeSet<SupportClass> = [sc(&[1]), sc(&[0, 1]), sc(&[1, 2]), sc(&[0, 2]), sc(&[0, 1, 2])].into();
    assert_eq!(zero, want);
    let betas: Vec<String> = strat.index_set.iter().map(|k| k.beta.to_string()).collect();
    assert_eq!(betas, ["(0)", "(-1)", "(1)"]);
    let node = TorusNode::root(p, None).unwrap();
    assert_eq!(node.dim_h(), 1);
}
