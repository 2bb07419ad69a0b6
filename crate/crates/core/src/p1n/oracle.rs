//! Refinement oracle for SL(2) on (ℙ¹)ⁿ at the level of coincidence signatures.
//!
//! Closed invariant subsets are unions of signature loci. The Borel subproblem
//! on `Ȳ_β` uses pinned configurations: `r + extra` points at the fixed point
//! of the Borel subgroup and the remaining points distributed by `rest`.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{check_n, classify, hkkn_index, partitions, P1nError, Partition, ORACLE_CAP};
use crate::refine::{DaggerStratum, GitProblemOracle, OpenStratum};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum P1nCell {
    /// Configurations with the given coincidence signature.
    Sig(Partition),
    /// Exactly `r + extra` points at the pin, the rest elsewhere with multiplicities `rest`.
    Pinned { r: usize, extra: usize, rest: Partition },
    /// `r` points at 0 and the others at ∞.
    ZPoint { r: usize },
    /// Torus-fixed configurations with the given multiplicities at 0 and ∞.
    Fixed(Partition),
}

impl P1nCell {
    fn underlying(&self, n: usize) -> Partition {
        match self {
            P1nCell::Sig(p) | P1nCell::Fixed(p) => p.clone(),
            P1nCell::Pinned { r, extra, rest } => Partition::new(vec![r + extra]).join(rest),
            P1nCell::ZPoint { r } => Partition::new(vec![*r, n - r]),
        }
    }

    fn dim(&self) -> usize {
        match self {
            P1nCell::Sig(p) => p.len(),
            P1nCell::Pinned { rest, .. } => rest.len(),
            P1nCell::ZPoint { .. } | P1nCell::Fixed(_) => 0,
        }
    }
}

impl fmt::Display for P1nCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            P1nCell::Sig(p) => write!(f, "[{p}]"),
            P1nCell::Pinned { r, extra, rest } => write!(f, "pin {r}+{extra} | {rest}"),
            P1nCell::ZPoint { r } => write!(f, "Z({r})"),
            P1nCell::Fixed(p) => write!(f, "fixed [{p}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// SL(2) on a closed union of signature loci.
    Closed,
    /// The Borel subgroup graded by λ_β on `Ȳ_β`, β = 2r − n.
    Parabolic { r: usize },
    /// The trivial group on `Z_β`.
    ZminPoint,
    /// The finite group `N_T/T` on torus-fixed configurations.
    FixedTorus,
}

/// A subproblem of SL(2) acting on (ℙ¹)ⁿ.
#[derive(Debug, Clone)]
pub struct P1nNode {
    n: usize,
    kind: Kind,
    cells: BTreeSet<P1nCell>,
}

/// The refinement problem for `n` points on ℙ¹.
pub fn as_oracle(n: usize) -> Result<P1nNode, P1nError> {
    P1nNode::root(n)
}

fn pinned_moves(r: usize, extra: usize, rest: &Partition) -> Vec<P1nCell> {
    let mut out: Vec<P1nCell> = rest
        .single_merges()
        .into_iter()
        .map(|q| P1nCell::Pinned { r, extra, rest: q })
        .collect();
    let parts = rest.parts();
    for i in 0..parts.len() {
        if i > 0 && parts[i] == parts[i - 1] {
            continue;
        }
        let mut left = parts.to_vec();
        let p = left.remove(i);
        out.push(P1nCell::Pinned {
            r,
            extra: extra + p,
            rest: Partition::new(left),
        });
    }
    out
}

impl P1nNode {
    pub fn root(n: usize) -> Result<Self, P1nError> {
        check_n(n, ORACLE_CAP)?;
        if n < 2 {
            return Err(P1nError::OutOfRange { n, cap: ORACLE_CAP });
        }
        Ok(P1nNode {
            n,
            kind: Kind::Closed,
            cells: partitions(n).into_iter().map(P1nCell::Sig).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn with(&self, kind: Kind, cells: impl IntoIterator<Item = P1nCell>) -> Self {
        P1nNode {
            n: self.n,
            kind,
            cells: cells.into_iter().collect(),
        }
    }

    /// Closure in the ambient space, not restricted to this node.
    fn full_closure(&self, c: &P1nCell) -> BTreeSet<P1nCell> {
        match c {
            P1nCell::Sig(p) => p.coarsenings().into_iter().map(P1nCell::Sig).collect(),
            P1nCell::Pinned { .. } => {
                let mut seen = BTreeSet::from([c.clone()]);
                let mut todo = vec![c.clone()];
                while let Some(P1nCell::Pinned { r, extra, rest }) = todo.pop() {
                    for d in pinned_moves(r, extra, &rest) {
                        if seen.insert(d.clone()) {
                            todo.push(d);
                        }
                    }
                }
                seen
            }
            P1nCell::ZPoint { .. } | P1nCell::Fixed(_) => BTreeSet::from([c.clone()]),
        }
    }

    fn half(&self) -> Option<Partition> {
        self.n.is_multiple_of(2).then(|| Partition::new(vec![self.n / 2, self.n / 2]))
    }

    fn sigs(&self) -> impl Iterator<Item = &Partition> {
        self.cells.iter().filter_map(|c| match c {
            P1nCell::Sig(p) => Some(p),
            _ => None,
        })
    }

    fn stab_of(p: &Partition) -> usize {
        match p.len() {
            0 | 1 => 2,
            2 => 1,
            _ => 0,
        }
    }
}

impl GitProblemOracle for P1nNode {
    type Cell = P1nCell;

    fn cells(&self) -> Vec<P1nCell> {
        self.cells.iter().cloned().collect()
    }

    fn closure(&self, c: &P1nCell) -> Vec<P1nCell> {
        self.full_closure(c)
            .into_iter()
            .filter(|d| self.cells.contains(d))
            .collect()
    }

    fn dim_h(&self) -> usize {
        match self.kind {
            Kind::Closed => 3,
            Kind::Parabolic { .. } => 2,
            Kind::ZminPoint | Kind::FixedTorus => 0,
        }
    }

    fn component_profile(&self) -> Vec<usize> {
        let mut below = BTreeSet::new();
        for d in &self.cells {
            below.extend(self.full_closure(d).into_iter().filter(|x| x != d));
        }
        let mut profile = Vec::new();
        for c in &self.cells {
            if !below.contains(c) {
                let k = c.dim();
                if profile.len() <= k {
                    profile.resize(k + 1, 0);
                }
                profile[k] += 1;
            }
        }
        profile
    }

    fn is_lambda_nontrivial(&self) -> bool {
        // Ȳ_β contains the fixed points with r and with n points at 0.
        matches!(self.kind, Kind::Parabolic { r } if r < self.n)
    }

    fn z_min_problem(&self) -> Self {
        let Kind::Parabolic { r } = self.kind else {
            return self.with(Kind::ZminPoint, []);
        };
        self.with(Kind::ZminPoint, [P1nCell::ZPoint { r }])
    }

    fn unipotent_stab_dims(&self, c: &P1nCell) -> Vec<usize> {
        let free = match c {
            P1nCell::Pinned { rest, .. } => !rest.is_empty(),
            P1nCell::ZPoint { r } => *r < self.n,
            _ => false,
        };
        vec![usize::from(!free)]
    }

    fn u_sweep_is_open(&self) -> bool {
        !self
            .cells
            .iter()
            .any(|c| matches!(c, P1nCell::Pinned { extra: 0, rest, .. } if rest.len() >= 2))
    }

    fn case1a(&self, _zmin: &Self, inner: &[P1nCell]) -> Vec<P1nCell> {
        let n = self.n;
        inner
            .iter()
            .filter_map(|c| match c {
                P1nCell::ZPoint { r } => Some(P1nCell::Pinned {
                    r: *r,
                    extra: 0,
                    rest: Partition::new(vec![n - r]),
                }),
                _ => None,
            })
            .filter(|c| self.cells.contains(c))
            .collect()
    }

    fn case1b(&self, _zmin: &Self, inner: &[P1nCell]) -> Vec<P1nCell> {
        let rs: BTreeSet<usize> = inner
            .iter()
            .filter_map(|c| match c {
                P1nCell::ZPoint { r } => Some(*r),
                _ => None,
            })
            .collect();
        self.cells
            .iter()
            .filter(|c| matches!(c, P1nCell::Pinned { r, extra: 0, rest } if rest.len() >= 2 && rs.contains(r)))
            .cloned()
            .collect()
    }

    fn stable_cells(&self) -> Vec<P1nCell> {
        if self.kind != Kind::Closed {
            return Vec::new();
        }
        let n = self.n;
        self.sigs()
            .filter(|p| 2 * p.max_part() < n)
            .cloned()
            .map(P1nCell::Sig)
            .collect()
    }

    fn semistable_cells(&self) -> Vec<P1nCell> {
        if self.kind != Kind::Closed {
            return Vec::new();
        }
        let n = self.n;
        self.sigs()
            .filter(|p| 2 * p.max_part() <= n)
            .cloned()
            .map(P1nCell::Sig)
            .collect()
    }

    fn open_hkkn_stratum(&self) -> OpenStratum<Self> {
        let n = self.n;
        let r = self.sigs().map(Partition::max_part).min().unwrap_or(n);
        let mut ybar = BTreeSet::new();
        for p in self.sigs().filter(|p| p.max_part() == r) {
            let rest = Partition::new(p.parts()[1..].to_vec());
            ybar.extend(self.full_closure(&P1nCell::Pinned { r, extra: 0, rest }));
        }
        OpenStratum::Proper {
            beta: (2 * r - n).to_string(),
            ybar: self.with(Kind::Parabolic { r }, ybar),
        }
    }

    fn sweep_from_ybar(&self, _ybar: &Self, inner: &[P1nCell]) -> Vec<P1nCell> {
        let out: BTreeSet<P1nCell> = inner
            .iter()
            .filter_map(|c| match c {
                P1nCell::Pinned { r, extra: 0, rest } => Some(P1nCell::Sig(Partition::new(vec![*r]).join(rest))),
                _ => None,
            })
            .collect();
        out.into_iter().collect()
    }

    fn fixed_sweep(&self) -> Option<(String, Self)> {
        let h = self.half()?;
        let hh = P1nCell::Sig(h.clone());
        if self.kind != Kind::Closed || !self.cells.contains(&hh) {
            return None;
        }
        let ss = self.semistable_cells();
        let open = !ss.iter().any(|c| *c != hh && self.full_closure(c).contains(&hh));
        open.then(|| ("maximal torus T".to_string(), self.with(Kind::FixedTorus, [P1nCell::Fixed(h)])))
    }

    fn sweep_fixed(&self, _sub: &Self, inner: &[P1nCell]) -> Vec<P1nCell> {
        inner
            .iter()
            .filter_map(|c| match c {
                P1nCell::Fixed(p) => Some(P1nCell::Sig(p.clone())),
                _ => None,
            })
            .filter(|c| self.cells.contains(c))
            .collect()
    }

    fn blow_up_outcome(&self) -> Option<Vec<P1nCell>> {
        // After blowing up the SL(2)-sweep of the torus-fixed semistable
        // configurations, the stable locus is the rest of X^ss.
        let hh = P1nCell::Sig(self.half()?);
        let out: Vec<P1nCell> = self.semistable_cells().into_iter().filter(|c| *c != hh).collect();
        (!out.is_empty()).then_some(out)
    }

    fn restrict(&self, cells: &[P1nCell]) -> Self {
        self.with(self.kind, cells.iter().cloned())
    }

    fn components(&self, cells: &[P1nCell]) -> Vec<Vec<P1nCell>> {
        let set: BTreeSet<&P1nCell> = cells.iter().collect();
        let list: Vec<&P1nCell> = set.iter().copied().collect();
        let mut parent: Vec<usize> = (0..list.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, c) in list.iter().enumerate() {
            for d in self.full_closure(c) {
                if let Ok(j) = list.binary_search(&&d) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<P1nCell>> = Default::default();
        for (i, c) in list.iter().enumerate() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push((*c).clone());
        }
        groups.into_values().collect()
    }

    fn stab_dim(&self, c: &P1nCell) -> usize {
        Self::stab_of(&c.underlying(self.n))
    }

    fn hkkn_key(&self, c: &P1nCell) -> Option<String> {
        Some(format!("beta={}", hkkn_index(&c.underlying(self.n))))
    }

    fn describe(&self, cells: &[P1nCell]) -> String {
        let labels: BTreeSet<String> = cells
            .iter()
            .map(|c| classify(&c.underlying(self.n)).to_string())
            .collect();
        labels.into_iter().collect::<Vec<_>>().join(" + ")
    }

    fn summary(&self) -> String {
        let n = self.n;
        match self.kind {
            Kind::Closed => format!("SL(2) on {} signature classes of (P^1)^{n}", self.cells.len()),
            Kind::Parabolic { r } => format!(
                "Borel subgroup graded by lambda_beta, beta={}, on {} pinned classes",
                2 * r - n,
                self.cells.len()
            ),
            Kind::ZminPoint => "trivial group on Z_beta".to_string(),
            Kind::FixedTorus => "N_T/T on torus-fixed configurations".to_string(),
        }
    }

    fn dagger_strata(&self) -> Vec<DaggerStratum<P1nCell>> {
        let n = self.n;
        if self.kind != Kind::Closed || self.cells.len() != partitions(n).len() {
            return Vec::new();
        }
        let mut out = Vec::new();
        if n % 2 == 1 {
            out.push(DaggerStratum {
                beta: "0".into(),
                sweep: self.stable_cells(),
                complement: Vec::new(),
            });
        }
        // U_β acts freely on Y_β exactly when some point leaves the pin.
        for r in n / 2 + 1..n {
            let two = Partition::new(vec![r, n - r]);
            let (sweep, complement): (Vec<P1nCell>, Vec<P1nCell>) = self
                .sigs()
                .filter(|p| p.max_part() == r)
                .map(|p| P1nCell::Sig(p.clone()))
                .partition(|c| *c == P1nCell::Sig(two.clone()));
            out.push(DaggerStratum {
                beta: (2 * r - n).to_string(),
                sweep,
                complement,
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::p1n::enumerate_strata;
    use crate::refine::{check_theorem_1_1, stratify, EngineConfig};

    #[test]
    fn leaves_match_enumeration() {
        for n in 2..=10 {
            let root = as_oracle(n).unwrap();
            let tree = stratify(&root, &EngineConfig::default()).unwrap();
            assert!(tree.is_complete(), "n={n}");
            let got: BTreeSet<String> = tree.leaves.iter().map(|l| l.label.clone()).collect();
            let want: BTreeSet<String> = enumerate_strata(n).unwrap().iter().map(ToString::to_string).collect();
            assert_eq!(got, want, "n={n}");
            assert_eq!(tree.leaves.len(), want.len(), "n={n}");
            let rep = check_theorem_1_1(&root, &tree);
            assert!(rep.passed(), "n={n}: {rep:?}");
        }
    }
}
