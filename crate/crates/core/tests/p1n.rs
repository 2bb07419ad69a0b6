use std::collections::{BTreeMap, BTreeSet};

use gitstrata::p1n::{
    as_oracle, classify, component_count, component_counts, enumerate_strata, family_component_count, hkkn_index,
    partitions, signature_of_points, CountSource, Partition, StratumLabel,
};
use gitstrata::rational::{rat, Rational};
use gitstrata::refine::{check_theorem_1_1, stratify, EngineConfig};
use num_traits::Zero;
use proptest::prelude::*;

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Labels as displayed for the decomposition of (ℙ¹)ⁿ.
fn displayed(n: usize) -> BTreeSet<String> {
    let sub = |x: usize| if x < 10 { x.to_string() } else { format!("{{{x}}}") };
    let mut out = BTreeSet::new();
    if n % 2 == 1 {
        out.insert("S_0".to_string());
    } else {
        let h = n / 2;
        out.insert(format!("S_0^{{<{n}}}"));
        out.insert(format!("S_0^{{{h},{h}}}"));
        out.insert(format!("S_0^{{{h},<{h}}}"));
    }
    out.insert(format!("S_{}", sub(n - 2)));
    out.insert(format!("S_{}", sub(n)));
    for r in n / 2 + 1..n - 1 {
        out.insert(format!("S_{}^{{{r},{}}}", sub(2 * r - n), n - r));
        out.insert(format!("S_{}^{{{r},<{}}}", sub(2 * r - n), n - r));
    }
    out
}

/// Components by brute force: every labelled coincidence pattern, joined to
/// every coarsening with the same label.
fn component_oracle(n: usize) -> BTreeMap<String, usize> {
    fn assign(k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == n {
            out.push(cur.clone());
            return;
        }
        let m = cur.iter().max().map_or(0, |m| m + 1);
        for b in 0..=m {
            cur.push(b);
            assign(k + 1, n, cur, out);
            cur.pop();
        }
    }
    let mut pats = Vec::new();
    assign(0, n, &mut Vec::new(), &mut pats);
    let sig = |p: &[usize]| {
        let mut c = BTreeMap::new();
        for &b in p {
            *c.entry(b).or_insert(0) += 1;
        }
        Partition::new(c.into_values().collect())
    };
    let coarser = |a: &[usize], b: &[usize]| (0..n).all(|i| (0..n).all(|j| a[i] != a[j] || b[i] == b[j]));
    let labels: Vec<String> = pats.iter().map(|p| classify(&sig(p)).to_string()).collect();
    let mut parent: Vec<usize> = (0..pats.len()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for i in 0..pats.len() {
        for j in 0..pats.len() {
            if i != j && labels[i] == labels[j] && coarser(&pats[i], &pats[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut roots: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for i in 0..pats.len() {
        let r = find(&mut parent, i);
        roots.entry(labels[i].clone()).or_default().insert(r);
    }
    roots.into_iter().map(|(k, v)| (k, v.len())).collect()
}

#[test]
fn enumeration_matches_display() {
    for n in 3..=12 {
        let got: BTreeSet<String> = enumerate_strata(n).unwrap().iter().map(ToString::to_string).collect();
        assert_eq!(got, displayed(n), "n={n}");
    }
}

#[test]
fn refinement_reproduces_display() {
    for n in 3..=12 {
        let root = as_oracle(n).unwrap();
        let tree = stratify(&root, &EngineConfig::default()).unwrap();
        let got: Vec<String> = tree.leaves.iter().map(|l| l.label.clone()).collect();
        assert_eq!(got.iter().cloned().collect::<BTreeSet<_>>(), displayed(n), "n={n}");
        assert_eq!(got.len(), displayed(n).len(), "n={n}");
        assert!(check_theorem_1_1(&root, &tree).passed(), "n={n}");
    }
}

#[test]
fn component_counts_match_brute_force() {
    for n in 2..=7 {
        let got: BTreeMap<String, usize> = component_counts(n)
            .unwrap()
            .into_iter()
            .map(|(l, c)| (l.to_string(), c))
            .collect();
        assert_eq!(got, component_oracle(n), "n={n}");
    }
}

#[test]
fn hkkn_family_counts_are_binomial() {
    for n in 3..=10 {
        for r in n / 2 + 1..=n {
            assert_eq!(family_component_count(n, r).unwrap(), binom(n, r), "n={n} r={r}");
        }
    }
}

#[test]
fn documented_examples() {
    let l = classify(&"3+2+1".parse().unwrap());
    assert_eq!(l.to_string(), "S_0^{3,<3}");
    assert_eq!(enumerate_strata(4).unwrap().len(), 5);
    let sn = StratumLabel { n: 4, kind: gitstrata::p1n::LabelKind::SN };
    assert_eq!(component_count(4, &sn).unwrap(), (1, CountSource::Paper));
    let hh = classify(&"2+2".parse().unwrap());
    assert_eq!(component_count(4, &hh).unwrap(), (3, CountSource::Derived));
    assert_eq!(family_component_count(5, 3).unwrap(), 10);
}

fn rational() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=3).prop_map(|(p, q)| rat(p, q))
}

/// Position in the stratification order computed by the engine.
fn position(l: &StratumLabel) -> usize {
    let tree = stratify(&as_oracle(l.n).unwrap(), &EngineConfig::default()).unwrap();
    tree.leaves.iter().position(|x| x.label == l.to_string()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn merging_parts_never_lowers_the_stratum(n in 2usize..=12, pick in any::<prop::sample::Index>(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let ps = partitions(n);
        let p = &ps[pick.index(ps.len())];
        prop_assume!(p.len() >= 2);
        let (i, j) = (a.index(p.len()), b.index(p.len()));
        prop_assume!(i != j);
        let mut parts = p.parts().to_vec();
        let x = parts[j];
        parts[i] += x;
        parts.remove(j);
        let q = Partition::new(parts);
        prop_assert!(position(&classify(&q)) >= position(&classify(p)));
        prop_assert!(hkkn_index(&q) >= hkkn_index(p));
    }

    #[test]
    fn signatures_are_sl2_invariant(
        pts in prop::collection::vec((rational(), rational()), 1..=8),
        m in (rational(), rational(), rational(), rational()),
    ) {
        prop_assume!(pts.iter().all(|(a, b)| !(a.is_zero() && b.is_zero())));
        let (a, b, c, d) = m;
        prop_assume!(!(&a * &d - &b * &c).is_zero());
        let moved: Vec<(Rational, Rational)> = pts
            .iter()
            .map(|(x, y)| (&a * x + &b * y, &c * x + &d * y))
            .collect();
        prop_assert_eq!(signature_of_points(&pts).unwrap(), signature_of_points(&moved).unwrap());
    }
}
