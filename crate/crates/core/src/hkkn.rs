//! Instability stratification of a torus problem, indexed by minimum-norm points.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use crate::exactgeom::{self, HullPosition};
use crate::parallel;
use crate::rational::{QVector, Rational};
use crate::torusgit::{SupportClass, TorusError, TorusProblem};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HkknError {
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error("{0} is not a stratum index of this problem")]
    NotAnIndex(QVector),
}

/// A stratum label β with its squared norm. Ordered by norm, then by β.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StratumIndex {
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub norm_sq: Rational,
    pub beta: QVector,
}

impl StratumIndex {
    pub fn is_zero(&self) -> bool {
        self.beta.is_zero()
    }

    /// The partial order on indices: `self ≤ other` iff equal or strictly smaller norm.
    pub fn precedes(&self, other: &StratumIndex) -> bool {
        self == other || self.norm_sq < other.norm_sq
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HkknStratification {
    pub index_set: Vec<StratumIndex>,
    pub strata: BTreeMap<StratumIndex, Vec<SupportClass>>,
}

impl HkknStratification {
    pub fn stratum(&self, beta: &QVector) -> Option<(&StratumIndex, &Vec<SupportClass>)> {
        self.strata.iter().find(|(k, _)| &k.beta == beta)
    }

    pub fn require(&self, beta: &QVector) -> Result<(&StratumIndex, &Vec<SupportClass>), HkknError> {
        self.stratum(beta).ok_or_else(|| HkknError::NotAnIndex(beta.clone()))
    }

    pub fn index_map(&self) -> HashMap<SupportClass, &StratumIndex> {
        self.strata
            .iter()
            .flat_map(|(k, v)| v.iter().map(move |s| (*s, k)))
            .collect()
    }
}

pub fn index_of_support(p: &TorusProblem, s: SupportClass) -> Result<StratumIndex, TorusError> {
    if !p.is_allowed(s) {
        return Err(TorusError::SupportNotAllowed(s));
    }
    let beta = exactgeom::min_norm_point(&p.effective_weights(s), p.ip())?;
    let norm_sq = p.ip().dot(&beta, &beta)?;
    Ok(StratumIndex { norm_sq, beta })
}

pub fn stratify(p: &TorusProblem) -> Result<HkknStratification, TorusError> {
    stratify_with_workers(p, parallel::default_workers())
}

/// Same as [`stratify`] with an explicit worker count; the result does not depend on it.
pub fn stratify_with_workers(p: &TorusProblem, workers: usize) -> Result<HkknStratification, TorusError> {
    let mut by_size: BTreeMap<usize, Vec<SupportClass>> = BTreeMap::new();
    for s in p.supports() {
        by_size.entry(s.len()).or_default().push(s);
    }
    let mut known: HashMap<SupportClass, StratumIndex> = HashMap::new();
    for level in by_size.values() {
        let indices = parallel::map_ordered(level, workers, |s| index_reusing(p, *s, |t| known.get(&t).cloned()));
        for (s, idx) in level.iter().zip(indices) {
            known.insert(*s, idx?);
        }
    }
    let mut strata: BTreeMap<StratumIndex, Vec<SupportClass>> = BTreeMap::new();
    for (s, idx) in known {
        strata.entry(idx).or_default().push(s);
    }
    for v in strata.values_mut() {
        v.sort();
    }
    Ok(HkknStratification {
        index_set: strata.keys().cloned().collect(),
        strata,
    })
}

/// [`index_of_support`], reusing the index of a support `s \ {i}` when β stays
/// optimal after adding weight `i` (that is, `⟨β, α_i − β⟩ ≥ 0`).
pub fn index_reusing(
    p: &TorusProblem,
    s: SupportClass,
    known: impl Fn(SupportClass) -> Option<StratumIndex>,
) -> Result<StratumIndex, TorusError> {
    if s.len() > 1 {
        for i in s.iter() {
            let Some(t) = s.filter(|j| j != i) else { continue };
            if let Some(idx) = known(t) {
                if beta_pairing(p, &idx.beta, i) >= idx.norm_sq {
                    return Ok(idx);
                }
            }
        }
    }
    index_of_support(p, s)
}

fn beta_pairing(p: &TorusProblem, beta: &QVector, i: usize) -> Rational {
    p.ip().dot_unchecked(&p.effective_weight(i), beta)
}

/// Allowed supports on which every weight pairs with β to ‖β‖².
pub fn z_beta(p: &TorusProblem, beta: &QVector) -> Result<Vec<SupportClass>, HkknError> {
    let n = p.ip().dot(beta, beta).map_err(TorusError::from)?;
    let level: Vec<bool> = (0..p.n_indices()).map(|i| beta_pairing(p, beta, i) == n).collect();
    Ok(p.supports().into_iter().filter(|s| s.iter().all(|i| level[i])).collect())
}

/// `p_β(S)`: the indices of `s` on the level set `⟨α_i, β⟩ = ‖β‖²`.
pub fn p_beta(p: &TorusProblem, beta: &QVector, s: SupportClass) -> Option<SupportClass> {
    let n = p.ip().dot_unchecked(beta, beta);
    s.filter(|i| beta_pairing(p, beta, i) == n)
}

/// Supports retracting along λ_β onto a support of index β.
pub fn y_beta(p: &TorusProblem, beta: &QVector) -> Result<Vec<SupportClass>, HkknError> {
    let n = p.ip().dot(beta, beta).map_err(TorusError::from)?;
    let mut out = Vec::new();
    for s in p.supports() {
        if s.iter().any(|i| beta_pairing(p, beta, i) < n) {
            continue;
        }
        let Some(r) = p_beta(p, beta, s) else { continue };
        if !p.is_allowed(r) {
            return Err(TorusError::SupportNotClosed {
                support: s,
                retraction: r,
            }
            .into());
        }
        if index_of_support(p, r)?.beta == *beta {
            out.push(s);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureViolation {
    pub support: SupportClass,
    pub index: Option<StratumIndex>,
    pub subset: SupportClass,
    pub subset_index: Option<StratumIndex>,
}

/// Every allowed subset of a support in `S_β` must lie in some `S_γ` with
/// `γ = β` or `‖γ‖ > ‖β‖`. Returns all violations.
pub fn check_closure_order(p: &TorusProblem, strat: &HkknStratification) -> Vec<ClosureViolation> {
    let map = strat.index_map();
    let mut out = Vec::new();
    for s in p.supports() {
        let idx = map.get(&s).copied();
        for sub in p.closure(s) {
            let sub_idx = map.get(&sub).copied();
            let ok = match (idx, sub_idx) {
                (Some(b), Some(g)) => g == b || g.norm_sq > b.norm_sq,
                _ => false,
            };
            if !ok {
                out.push(ClosureViolation {
                    support: s,
                    index: idx.cloned(),
                    subset: sub,
                    subset_index: sub_idx.cloned(),
                });
            }
        }
    }
    out
}

/// Z_β^ss: supports of Z_β whose twisted weights `α_i − β` are semistable.
pub fn z_beta_ss(p: &TorusProblem, beta: &QVector) -> Result<Vec<SupportClass>, HkknError> {
    let zero = QVector::zero(p.dim());
    let mut out = Vec::new();
    for s in z_beta(p, beta)? {
        let shifted: Vec<QVector> = p.effective_weights(s).iter().map(|w| w.sub(beta)).collect();
        let pos = exactgeom::hull_position(&shifted, &zero, p.ip()).map_err(TorusError::from)?;
        if pos != HullPosition::Outside {
            out.push(s);
        }
    }
    Ok(out)
}

/// Whether stabilizers on Z_β^ss are exactly the line through β (or finite when β = 0).
pub fn check_dagger(p: &TorusProblem, beta: &QVector) -> Result<bool, HkknError> {
    let expected = usize::from(!beta.is_zero());
    for s in z_beta_ss(p, beta)? {
        if p.stab_dim(s)? != expected {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Number of connected components of a union of support classes: two classes
/// touch exactly when one lies in the closure of the other.
pub fn component_count(supports: &[SupportClass]) -> usize {
    components(supports).len()
}

/// Connected components, each sorted canonically, listed by their first member.
pub fn components(supports: &[SupportClass]) -> Vec<Vec<SupportClass>> {
    let pos: HashMap<u64, usize> = supports.iter().enumerate().map(|(k, s)| (s.mask(), k)).collect();
    let mut parent: Vec<usize> = (0..supports.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (k, s) in supports.iter().enumerate() {
        for sub in s.subsets() {
            if let Some(&j) = pos.get(&sub.mask()) {
                let (a, b) = (find(&mut parent, k), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<SupportClass>> = BTreeMap::new();
    for (k, s) in supports.iter().enumerate() {
        let r = find(&mut parent, k);
        groups.entry(r).or_default().push(*s);
    }
    let mut out: Vec<Vec<SupportClass>> = groups
        .into_values()
        .map(|mut g| {
            g.sort();
            g.dedup();
            g
        })
        .collect();
    out.sort();
    out
}

/// DOT digraph of the index poset; edges are covering relations of the norm order.
pub fn to_dot(strat: &HkknStratification) -> String {
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut last: Option<&Rational> = None;
    for (k, idx) in strat.index_set.iter().enumerate() {
        if last != Some(&idx.norm_sq) {
            levels.push(Vec::new());
            last = Some(&idx.norm_sq);
        }
        levels.last_mut().unwrap().push(k);
    }
    let mut out = String::from("digraph hkkn {\n  rankdir=BT;\n");
    for (k, idx) in strat.index_set.iter().enumerate() {
        let size = strat.strata[idx].len();
        let _ = writeln!(
            out,
            "  b{k} [label=\"beta={} |beta|^2={} ({size} supports)\"];",
            idx.beta, idx.norm_sq
        );
    }
    for pair in levels.windows(2) {
        for &a in &pair[0] {
            for &b in &pair[1] {
                let _ = writeln!(out, "  b{a} -> b{b};");
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn sc(ix: &[usize]) -> SupportClass {
        SupportClass::from_indices(ix).unwrap()
    }

    fn prob(w: &[&[i64]]) -> TorusProblem {
        TorusProblem::from_int_weights(w).unwrap()
    }

    #[test]
    fn indices_of_supports() {
        let p = prob(&[&[-1], &[1]]);
        assert!(index_of_support(&p, sc(&[0, 1])).unwrap().is_zero());
        let i = index_of_support(&p, sc(&[1])).unwrap();
        assert_eq!((i.beta, i.norm_sq), (QVector::from_ints(&[1]), int(1)));
        let q = prob(&[&[1, 0], &[0, 1]]);
        let i = index_of_support(&q, sc(&[0, 1])).unwrap();
        assert_eq!(i.beta, QVector::new(vec![rat(1, 2), rat(1, 2)]));
        assert_eq!(i.norm_sq, rat(1, 2));
    }

    #[test]
    fn stratify_examples() {
        let s = stratify(&prob(&[&[-1], &[1]])).unwrap();
        assert_eq!(s.index_set.len(), 3);
        assert!(s.index_set[0].is_zero());
        assert_eq!(s.strata[&s.index_set[0]], vec![sc(&[0, 1])]);
        assert_eq!(s.stratum(&QVector::from_ints(&[-1])).unwrap().1, &vec![sc(&[0])]);

        let s = stratify(&prob(&[&[1], &[2]])).unwrap();
        assert_eq!(s.index_set.len(), 2);
        assert_eq!(s.stratum(&QVector::from_ints(&[1])).unwrap().1, &vec![sc(&[0]), sc(&[0, 1])]);

        let s = stratify(&prob(&[&[0]])).unwrap();
        assert_eq!(s.index_set.len(), 1);
        assert!(s.index_set[0].is_zero());
    }

    #[test]
    fn z_y_p() {
        let p = prob(&[&[1], &[2]]);
        let b = QVector::from_ints(&[1]);
        assert_eq!(z_beta(&p, &b).unwrap(), vec![sc(&[0])]);
        assert_eq!(y_beta(&p, &b).unwrap(), vec![sc(&[0]), sc(&[0, 1])]);
        assert_eq!(p_beta(&p, &b, sc(&[0, 1])), Some(sc(&[0])));
        assert_eq!(p_beta(&p, &b, sc(&[0])), Some(sc(&[0])));
        let q = prob(&[&[-1], &[1]]);
        assert_eq!(z_beta(&q, &b).unwrap(), vec![sc(&[1])]);
        assert_eq!(y_beta(&q, &b).unwrap(), vec![sc(&[1])]);
    }

    #[test]
    fn closure_order_and_negative_control() {
        for w in [&[&[-1i64][..], &[1]][..], &[&[1], &[2]]] {
            let p = prob(w);
            let s = stratify(&p).unwrap();
            assert!(check_closure_order(&p, &s).is_empty());
        }
        let p = prob(&[&[-1], &[1]]);
        let mut s = stratify(&p).unwrap();
        // Move the open support into the norm-one stratum.
        let zero = s.index_set[0].clone();
        let top = s.index_set[1].clone();
        s.strata.remove(&zero);
        s.strata.get_mut(&top).unwrap().push(sc(&[0, 1]));
        assert!(!check_closure_order(&p, &s).is_empty());
    }

    #[test]
    fn dagger() {
        let p = prob(&[&[-1], &[1]]);
        assert!(check_dagger(&p, &QVector::from_ints(&[1])).unwrap());
        assert!(check_dagger(&p, &QVector::from_ints(&[0])).unwrap());
        assert!(!check_dagger(&prob(&[&[0], &[0]]), &QVector::from_ints(&[0])).unwrap());
    }

    #[test]
    fn components_by_comparability() {
        assert_eq!(component_count(&[sc(&[0]), sc(&[1])]), 2);
        assert_eq!(component_count(&[sc(&[0]), sc(&[1]), sc(&[0, 1])]), 1);
        assert_eq!(component_count(&[sc(&[0]), sc(&[0, 1, 2])]), 1);
    }

    #[test]
    fn dot_output() {
        let s = stratify(&prob(&[&[-1], &[1]])).unwrap();
        let dot = to_dot(&s);
        assert!(dot.contains("b0 -> b1;") && dot.contains("b0 -> b2;"));
        assert!(!dot.contains("b1 -> b2;"));
    }
}
