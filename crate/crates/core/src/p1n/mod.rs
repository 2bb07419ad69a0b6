//! SL(2) acting diagonally on (ℙ¹)ⁿ, modelled by multiplicity signatures.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::rational::{parse_rational, Rational, RationalParseError};

pub mod oracle;

pub use oracle::{as_oracle, P1nCell, P1nNode};

/// Largest `n` accepted by the refinement oracle.
pub const ORACLE_CAP: usize = 20;
/// Largest `n` for exhaustive labelled-pattern component counting.
pub const PATTERN_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum P1nError {
    #[error("point {0} has both homogeneous coordinates zero")]
    ZeroPoint(usize),
    #[error("at least one point is required")]
    Empty,
    #[error("malformed point `{0}` (expected a:b with rational a, b)")]
    MalformedPoint(String),
    #[error(transparent)]
    Rational(#[from] RationalParseError),
    #[error("malformed partition `{0}` (expected parts like 4+1+1)")]
    MalformedPartition(String),
    #[error("n = {n} is outside the supported range 1..={cap}")]
    OutOfRange { n: usize, cap: usize },
    #[error("label {label} does not occur for n = {n}")]
    LabelNotPresent { label: String, n: usize },
    #[error("malformed stratum label `{0}`")]
    MalformedLabel(String),
}

/// A partition of n, parts sorted in decreasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<usize>);

impl Partition {
    /// Sorts the parts; zero parts are dropped.
    pub fn new(mut parts: Vec<usize>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_part(&self) -> usize {
        self.0.first().copied().unwrap_or(0)
    }

    /// Partitions obtained by merging two parts.
    pub fn single_merges(&self) -> BTreeSet<Partition> {
        let mut out = BTreeSet::new();
        for i in 0..self.0.len() {
            for j in i + 1..self.0.len() {
                let mut parts = self.0.clone();
                let b = parts.remove(j);
                parts[i] += b;
                out.insert(Partition::new(parts));
            }
        }
        out
    }

    /// All partitions obtained by repeatedly merging parts, including `self`.
    pub fn coarsenings(&self) -> BTreeSet<Partition> {
        let mut seen = BTreeSet::from([self.clone()]);
        let mut todo = vec![self.clone()];
        while let Some(p) = todo.pop() {
            for q in p.single_merges() {
                if seen.insert(q.clone()) {
                    todo.push(q);
                }
            }
        }
        seen
    }

    /// `self` with `other`'s parts added.
    pub fn join(&self, other: &Partition) -> Partition {
        let mut parts = self.0.clone();
        parts.extend_from_slice(&other.0);
        Partition::new(parts)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for Partition {
    type Err = P1nError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = s
            .split('+')
            .map(|t| t.trim().parse::<usize>().ok().filter(|&p| p > 0))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| P1nError::MalformedPartition(s.to_string()))?;
        Ok(Partition::new(parts))
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Coincidence multiplicities of a configuration of n points.
pub type Signature = Partition;

/// All partitions of `n`, in decreasing lexicographic order.
pub fn partitions(n: usize) -> Vec<Partition> {
    fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for p in (1..=max.min(rest)).rev() {
            cur.push(p);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Parses a homogeneous point `a:b` with rational coordinates.
pub fn parse_point(s: &str) -> Result<(Rational, Rational), P1nError> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| P1nError::MalformedPoint(s.to_string()))?;
    Ok((parse_rational(a)?, parse_rational(b)?))
}

/// Groups points by projective equality (`a·d − b·c = 0`).
pub fn signature_of_points(points: &[(Rational, Rational)]) -> Result<Signature, P1nError> {
    if points.is_empty() {
        return Err(P1nError::Empty);
    }
    let mut reps: Vec<(&Rational, &Rational, usize)> = Vec::new();
    for (k, (a, b)) in points.iter().enumerate() {
        if a.is_zero() && b.is_zero() {
            return Err(P1nError::ZeroPoint(k));
        }
        match reps.iter_mut().find(|(c, d, _)| a * *d == b * *c) {
            Some(rep) => rep.2 += 1,
            None => reps.push((a, b, 1)),
        }
    }
    Ok(Partition::new(reps.into_iter().map(|r| r.2).collect()))
}

/// `2r − n` when the largest multiplicity `r` exceeds `n/2`, else 0.
pub fn hkkn_index(sig: &Signature) -> usize {
    let (n, r) = (sig.n(), sig.max_part());
    (2 * r).saturating_sub(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabelKind {
    /// Semistable = stable stratum, odd n.
    S0,
    /// Even n, fewer than n/2 points coincide.
    S0Lt,
    /// Even n, two points of multiplicity n/2.
    S0HalfHalf,
    /// Even n, exactly n/2 points coincide and the rest do not.
    S0HalfLt,
    /// Exactly two points, multiplicities r and n − r (n/2 < r < n − 1).
    TwoPoint(usize),
    /// Exactly r points coincide, the rest are not all equal (n/2 < r < n − 1).
    Complement(usize),
    /// r = n − 1.
    SNMinus2,
    /// All points coincide.
    SN,
}

/// A refined stratum of (ℙ¹)ⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StratumLabel {
    pub n: usize,
    pub kind: LabelKind,
}

fn sub(x: usize) -> String {
    if x < 10 {
        x.to_string()
    } else {
        format!("{{{x}}}")
    }
}

impl StratumLabel {
    /// The HKKN index β = 2r − n of the stratum containing this one.
    pub fn hkkn_index(&self) -> usize {
        let n = self.n;
        match self.kind {
            LabelKind::S0 | LabelKind::S0Lt | LabelKind::S0HalfHalf | LabelKind::S0HalfLt => 0,
            LabelKind::TwoPoint(r) | LabelKind::Complement(r) => 2 * r - n,
            LabelKind::SNMinus2 => n - 2,
            LabelKind::SN => n,
        }
    }

    /// Largest multiplicity r of signatures in the stratum, when the stratum is unstable.
    pub fn r(&self) -> Option<usize> {
        match self.kind {
            LabelKind::TwoPoint(r) | LabelKind::Complement(r) => Some(r),
            LabelKind::SNMinus2 => Some(self.n - 1),
            LabelKind::SN => Some(self.n),
            _ => None,
        }
    }
}

impl fmt::Display for StratumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n;
        let h = n / 2;
        match self.kind {
            LabelKind::S0 => write!(f, "S_0"),
            LabelKind::S0Lt => write!(f, "S_0^{{<{n}}}"),
            LabelKind::S0HalfHalf => write!(f, "S_0^{{{h},{h}}}"),
            LabelKind::S0HalfLt => write!(f, "S_0^{{{h},<{h}}}"),
            LabelKind::TwoPoint(r) => write!(f, "S_{}^{{{r},{}}}", sub(2 * r - n), n - r),
            LabelKind::Complement(r) => write!(f, "S_{}^{{{r},<{}}}", sub(2 * r - n), n - r),
            LabelKind::SNMinus2 => write!(f, "S_{}", sub(n - 2)),
            LabelKind::SN => write!(f, "S_{}", sub(n)),
        }
    }
}

impl Serialize for StratumLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Parses a label as printed by `Display`, given n.
pub fn parse_label(n: usize, s: &str) -> Result<StratumLabel, P1nError> {
    enumerate_strata(n)?
        .into_iter()
        .find(|l| l.to_string() == s)
        .ok_or_else(|| P1nError::MalformedLabel(s.to_string()))
}

/// The refined stratum containing configurations with signature `sig`.
pub fn classify(sig: &Signature) -> StratumLabel {
    let n = sig.n();
    let r = sig.max_part();
    let kind = if 2 * r > n {
        if r == n {
            LabelKind::SN
        } else if r == n - 1 {
            LabelKind::SNMinus2
        } else if sig.parts() == [r, n - r] {
            LabelKind::TwoPoint(r)
        } else {
            LabelKind::Complement(r)
        }
    } else if n % 2 == 1 {
        LabelKind::S0
    } else if 2 * r < n {
        LabelKind::S0Lt
    } else if sig.parts() == [n / 2, n / 2] {
        LabelKind::S0HalfHalf
    } else {
        LabelKind::S0HalfLt
    };
    StratumLabel { n, kind }
}

fn check_n(n: usize, cap: usize) -> Result<(), P1nError> {
    if n == 0 || n > cap {
        return Err(P1nError::OutOfRange { n, cap });
    }
    Ok(())
}

/// The labels of the refined stratification, in increasing HKKN norm; within
/// a norm level the two-point stratum precedes its complement.
pub fn enumerate_strata(n: usize) -> Result<Vec<StratumLabel>, P1nError> {
    check_n(n, usize::MAX)?;
    let present: BTreeSet<StratumLabel> = partitions(n).iter().map(classify).collect();
    let mut order = Vec::new();
    if n % 2 == 1 {
        order.push(LabelKind::S0);
    } else {
        order.extend([LabelKind::S0Lt, LabelKind::S0HalfHalf, LabelKind::S0HalfLt]);
    }
    for r in n / 2 + 1..n.saturating_sub(1) {
        order.extend([LabelKind::TwoPoint(r), LabelKind::Complement(r)]);
    }
    order.extend([LabelKind::SNMinus2, LabelKind::SN]);
    Ok(order
        .into_iter()
        .map(|kind| StratumLabel { n, kind })
        .filter(|l| present.contains(l))
        .collect())
}

/// Signatures classified into `label`.
pub fn signatures_of(label: &StratumLabel) -> Vec<Signature> {
    partitions(label.n).into_iter().filter(|p| classify(p) == *label).collect()
}

/// Where a component count comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountSource {
    /// Stated in closed form for the HKKN strata.
    Paper,
    /// Computed by the labelled-pattern connectivity oracle.
    Derived,
}

/// Set partitions of {0..n-1} as restricted growth strings packed 4 bits per entry.
fn set_partitions(n: usize) -> Vec<Vec<u8>> {
    fn go(k: usize, n: usize, max: u8, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if k == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max + 1 {
            cur.push(b);
            go(k + 1, n, max.max(b), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut cur = vec![0u8];
    go(1, n, 0, &mut cur, &mut out);
    out
}

fn pack(rgs: &[u8]) -> u64 {
    rgs.iter().enumerate().fold(0, |acc, (i, &b)| acc | (u64::from(b) << (4 * i)))
}

fn canonical(blocks: &[u8]) -> Vec<u8> {
    let mut map = [u8::MAX; 16];
    let mut next = 0;
    blocks
        .iter()
        .map(|&b| {
            if map[b as usize] == u8::MAX {
                map[b as usize] = next;
                next += 1;
            }
            map[b as usize]
        })
        .collect()
}

fn block_sizes(rgs: &[u8]) -> Partition {
    let mut sizes = [0usize; 16];
    for &b in rgs {
        sizes[b as usize] += 1;
    }
    Partition::new(sizes.to_vec())
}

fn union_find_count(patterns: &[Vec<u8>], key: impl Fn(&Partition) -> Option<usize>) -> BTreeMap<usize, usize> {
    let keyed: Vec<(usize, &Vec<u8>)> = patterns
        .iter()
        .filter_map(|p| key(&block_sizes(p)).map(|k| (k, p)))
        .collect();
    let index: HashMap<u64, usize> = keyed.iter().enumerate().map(|(i, (_, p))| (pack(p), i)).collect();
    let mut parent: Vec<usize> = (0..keyed.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, (k, p)) in keyed.iter().enumerate() {
        let blocks = p.iter().copied().max().map_or(0, |m| m + 1);
        for a in 0..blocks {
            for b in a + 1..blocks {
                let merged: Vec<u8> = p.iter().map(|&x| if x == b { a } else { x }).collect();
                let merged = canonical(&merged);
                if let Some(&j) = index.get(&pack(&merged)) {
                    if keyed[j].0 == *k {
                        let (x, y) = (find(&mut parent, i), find(&mut parent, j));
                        if x != y {
                            parent[x.max(y)] = x.min(y);
                        }
                    }
                }
            }
        }
    }
    let mut roots: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for i in 0..keyed.len() {
        let r = find(&mut parent, i);
        roots.entry(keyed[i].0).or_default().insert(r);
    }
    roots.into_iter().map(|(k, v)| (k, v.len())).collect()
}

// Each label class is convex in the refinement order of coincidence patterns
// (any pattern between two members has the same largest block and block
// count in range), so connectivity through closures reduces to chains of
// single merges inside the class.

/// Connected components of every refined stratum, by exhaustive pattern connectivity.
pub fn component_counts(n: usize) -> Result<BTreeMap<StratumLabel, usize>, P1nError> {
    check_n(n, PATTERN_CAP)?;
    let labels = enumerate_strata(n)?;
    let pats = set_partitions(n);
    let counts = union_find_count(&pats, |sig| labels.iter().position(|l| *l == classify(sig)));
    Ok(counts.into_iter().map(|(k, c)| (labels[k], c)).collect())
}

/// Connected components of one refined stratum.
pub fn component_count(n: usize, label: &StratumLabel) -> Result<(usize, CountSource), P1nError> {
    check_n(n, PATTERN_CAP)?;
    let counts = component_counts(n)?;
    let c = counts.get(label).copied().ok_or_else(|| P1nError::LabelNotPresent {
        label: label.to_string(),
        n,
    })?;
    let source = match label.kind {
        LabelKind::SNMinus2 | LabelKind::SN => CountSource::Paper,
        _ => CountSource::Derived,
    };
    Ok((c, source))
}

/// Connected components of the HKKN stratum with index β = 2r − n, by the
/// pattern oracle (expected: n choose r).
pub fn family_component_count(n: usize, r: usize) -> Result<usize, P1nError> {
    check_n(n, PATTERN_CAP)?;
    if 2 * r <= n || r > n {
        return Err(P1nError::LabelNotPresent {
            label: format!("S_{}", 2 * r as i64 - n as i64),
            n,
        });
    }
    let pats = set_partitions(n);
    let counts = union_find_count(&pats, |sig| (sig.max_part() == r).then_some(0));
    Ok(counts.get(&0).copied().unwrap_or(0))
}

/// Components of every HKKN stratum β = 2r − n, r > n/2, computed in one pass.
pub fn family_component_counts(n: usize) -> Result<BTreeMap<usize, usize>, P1nError> {
    check_n(n, PATTERN_CAP)?;
    let pats = set_partitions(n);
    Ok(union_find_count(&pats, |sig| (2 * sig.max_part() > n).then(|| sig.max_part())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn signatures_from_points() {
        let pts = |v: &[(i64, i64)]| v.iter().map(|&(a, b)| (int(a), int(b))).collect::<Vec<_>>();
        assert_eq!(signature_of_points(&pts(&[(1, 0), (1, 0), (0, 1)])).unwrap(), p("2+1"));
        assert_eq!(signature_of_points(&pts(&[(1, 0), (0, 1), (1, 1), (1, 2)])).unwrap(), p("1+1+1+1"));
        assert_eq!(signature_of_points(&pts(&[(1, 0), (2, 0), (1, 1)])).unwrap(), p("2+1"));
        assert_eq!(signature_of_points(&pts(&[(0, 0)])), Err(P1nError::ZeroPoint(0)));
        assert_eq!(parse_point("1/2:-3").unwrap(), (crate::rational::rat(1, 2), int(-3)));
    }

    #[test]
    fn indices_and_labels() {
        assert_eq!(hkkn_index(&p("3+2")), 1);
        assert_eq!(hkkn_index(&p("2+2")), 0);
        assert_eq!(hkkn_index(&p("6")), 6);
        let l = |s: &str| classify(&p(s)).to_string();
        assert_eq!(l("3+3"), "S_0^{3,3}");
        assert_eq!(l("3+2+1"), "S_0^{3,<3}");
        assert_eq!(l("4+2"), "S_2^{4,2}");
        assert_eq!(l("4+1+1"), "S_2^{4,<2}");
        assert_eq!(l("2+2+1"), "S_0");
        assert_eq!(l("1+1+1+1+1+1"), "S_0^{<6}");
        assert_eq!(l("9+1"), "S_8");
        assert_eq!(l("10"), "S_{10}");
    }

    #[test]
    fn enumerations() {
        let e = |n| enumerate_strata(n).unwrap().iter().map(ToString::to_string).collect::<Vec<_>>();
        assert_eq!(e(5), ["S_0", "S_1^{3,2}", "S_1^{3,<2}", "S_3", "S_5"]);
        assert_eq!(e(4), ["S_0^{<4}", "S_0^{2,2}", "S_0^{2,<2}", "S_2", "S_4"]);
        assert_eq!(e(3), ["S_0", "S_1", "S_3"]);
        assert_eq!(partitions(6).len(), 11);
    }

    #[test]
    fn component_examples() {
        assert_eq!(family_component_count(5, 3).unwrap(), 10);
        let sn = StratumLabel { n: 4, kind: LabelKind::SN };
        assert_eq!(component_count(4, &sn).unwrap(), (1, CountSource::Paper));
        let hh = StratumLabel { n: 4, kind: LabelKind::S0HalfHalf };
        assert_eq!(component_count(4, &hh).unwrap(), (3, CountSource::Derived));
        assert_eq!(set_partitions(5).len(), 52);
    }
}
