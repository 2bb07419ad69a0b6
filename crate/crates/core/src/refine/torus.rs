//! Torus problems as refinement oracles. Each node keeps the root problem for
//! stabilizer and HKKN data, and its own weights in the character space of
//! the current quotient torus.

use std::collections::{BTreeSet, HashMap};
use std::hash::Hash;
use std::sync::{Arc, Mutex};

use num_traits::Zero;

use super::{DaggerStratum, GitProblemOracle, OpenStratum};
use crate::exactgeom::{HullCertificate, HullPosition};
use crate::hkkn::{self, StratumIndex};
use crate::linalg::{self, Projection};
use crate::rational::{InnerProduct, QVector, Rational};
use crate::torusgit::{SupportClass, TorusError, TorusProblem};

/// Per-support results that depend only on the weights and inner product,
/// shared by every node with the same character data.
#[derive(Debug, Default)]
struct Memo {
    index: Mutex<HashMap<SupportClass, StratumIndex>>,
    semistable: Mutex<HashMap<SupportClass, bool>>,
    stable: Mutex<HashMap<SupportClass, bool>>,
    stab: Mutex<HashMap<SupportClass, usize>>,
    /// Functionals found to separate some support from the origin.
    separators: Mutex<Vec<QVector>>,
    /// At the root: memos of derived character data, keyed by weights and inner product.
    registry: Mutex<HashMap<String, Arc<Memo>>>,
}

fn cached<K: Eq + Hash + Copy, V: Clone>(map: &Mutex<HashMap<K, V>>, k: K, f: impl FnOnce() -> V) -> V {
    if let Some(v) = map.lock().expect("memo lock").get(&k) {
        return v.clone();
    }
    let v = f();
    map.lock().expect("memo lock").insert(k, v.clone());
    v
}

#[derive(Debug, Clone)]
pub struct TorusNode {
    root: Arc<TorusProblem>,
    cells: BTreeSet<SupportClass>,
    /// Node weights (twists applied), one per root coordinate. Empty vectors when the torus is trivial.
    weights: Vec<QVector>,
    ip: Option<InnerProduct>,
    grading: Option<QVector>,
    /// Hull tests on this node; `None` for the trivial torus.
    problem: Option<TorusProblem>,
    memo: Arc<Memo>,
    root_memo: Arc<Memo>,
}

impl TorusNode {
    /// The root node: all allowed supports, the full torus, optional grading λ.
    pub fn root(problem: TorusProblem, grading: Option<QVector>) -> Result<Self, TorusError> {
        if let Some(l) = &grading {
            problem.ip().dot(l, l)?;
        }
        let weights = (0..problem.n_indices()).map(|i| problem.effective_weight(i)).collect();
        let cells = problem.supports().into_iter().collect();
        let ip = Some(problem.ip().clone());
        let grading = grading.filter(|l| !l.is_zero());
        let memo = Arc::new(Memo::default());
        Self::build(Arc::new(problem), cells, weights, ip, grading, memo.clone(), memo)
    }

    fn build(
        root: Arc<TorusProblem>,
        cells: BTreeSet<SupportClass>,
        weights: Vec<QVector>,
        ip: Option<InnerProduct>,
        grading: Option<QVector>,
        memo: Arc<Memo>,
        root_memo: Arc<Memo>,
    ) -> Result<Self, TorusError> {
        let problem = match &ip {
            Some(ip) => Some(
                TorusProblem::with_cap(weights.clone(), ip.clone(), root.cap())?
                    .with_allowed_supports(cells.iter().copied())?,
            ),
            None => None,
        };
        Ok(TorusNode {
            root,
            cells,
            weights,
            ip,
            grading,
            problem,
            memo,
            root_memo,
        })
    }

    fn derive(&self, cells: BTreeSet<SupportClass>, weights: Vec<QVector>, ip: Option<InnerProduct>, grading: Option<QVector>) -> Self {
        let memo = if weights == self.weights && ip == self.ip {
            self.memo.clone()
        } else {
            let key = format!("{weights:?}|{ip:?}");
            let mut reg = self.root_memo.registry.lock().expect("memo lock");
            reg.entry(key).or_default().clone()
        };
        Self::build(self.root.clone(), cells, weights, ip, grading, memo, self.root_memo.clone())
            .expect("derived node stays within the root limits")
    }

    pub fn root_problem(&self) -> &TorusProblem {
        &self.root
    }

    pub fn rank(&self) -> usize {
        self.ip.as_ref().map_or(0, InnerProduct::dim)
    }

    fn prob(&self) -> &TorusProblem {
        self.problem.as_ref().expect("nontrivial torus")
    }

    fn occurring(&self) -> Vec<usize> {
        let mask = self.cells.iter().fold(0, |m, s| m | s.mask());
        SupportClass::from_mask(mask).map_or_else(Vec::new, SupportClass::indices)
    }

    fn lambda_weights(&self, lambda: &QVector) -> Vec<Option<Rational>> {
        let ip = self.ip.as_ref().expect("graded node has a torus");
        let occ: BTreeSet<usize> = self.occurring().into_iter().collect();
        (0..self.weights.len())
            .map(|i| occ.contains(&i).then(|| ip.dot_unchecked(lambda, &self.weights[i])))
            .collect()
    }

    fn omega_min(&self) -> (Vec<Option<Rational>>, Rational) {
        let lambda = self.grading.as_ref().expect("graded node");
        let lw = self.lambda_weights(lambda);
        let min = lw.iter().flatten().min().cloned().unwrap_or_else(Rational::zero);
        (lw, min)
    }

    fn z_min_cells(&self) -> BTreeSet<SupportClass> {
        let (lw, min) = self.omega_min();
        self.cells
            .iter()
            .filter(|s| s.iter().all(|i| lw[i].as_ref() == Some(&min)))
            .copied()
            .collect()
    }

    /// Node with weights orthogonally projected onto `span(basis)` (a subspace of the node character space).
    fn projected(&self, cells: BTreeSet<SupportClass>, basis: Vec<QVector>, shift: Option<&QVector>) -> Self {
        let ip = self.ip.as_ref().expect("projection needs a torus");
        let shifted: Vec<QVector> = match shift {
            Some(s) => self.weights.iter().map(|w| w.sub(s)).collect(),
            None => self.weights.clone(),
        };
        if basis.is_empty() {
            return self.derive(cells, vec![QVector::zero(0); shifted.len()], None, None);
        }
        let proj = Projection::new(basis, ip);
        let weights = shifted.iter().map(|w| proj.coords(w, ip)).collect();
        self.derive(cells, weights, Some(proj.inner_product()), None)
    }

    /// Basis of `{v : ⟨v, u⟩ = 0 for all u in span(vs)}` in the node character space.
    fn orth_complement(&self, vs: &[QVector]) -> Vec<QVector> {
        let ip = self.ip.as_ref().expect("torus");
        let functionals: Vec<QVector> = vs.iter().map(|v| ip.lower(v)).collect();
        linalg::nullspace(&functionals, self.rank())
    }

    fn is_open_in(&self, sub: &BTreeSet<SupportClass>, within: &BTreeSet<SupportClass>) -> bool {
        within
            .iter()
            .filter(|s| !sub.contains(s))
            .all(|s| !s.subsets().any(|t| sub.contains(&t)))
    }

    fn index(&self, s: SupportClass) -> StratumIndex {
        if let Some(v) = self.memo.index.lock().expect("memo lock").get(&s) {
            return v.clone();
        }
        let known = |t| self.memo.index.lock().expect("memo lock").get(&t).cloned();
        let v = hkkn::index_reusing(self.prob(), s, known).expect("node supports are valid");
        self.memo.index.lock().expect("memo lock").insert(s, v.clone());
        v
    }

    /// Supports obtained from `s` by dropping one index.
    fn facets(s: SupportClass) -> impl Iterator<Item = SupportClass> {
        s.iter().filter_map(move |i| s.filter(|j| j != i))
    }

    fn memo_any(map: &Mutex<HashMap<SupportClass, bool>>, s: SupportClass) -> bool {
        let m = map.lock().expect("memo lock");
        Self::facets(s).any(|t| m.get(&t) == Some(&true))
    }

    /// Hull position of `s` relative to the origin, filling both stability memos.
    fn classify_support(&self, s: SupportClass) {
        let p = self.prob();
        let separated = {
            let seps = self.memo.separators.lock().expect("memo lock");
            seps.iter().any(|f| s.iter().all(|i| f.pairing(&p.effective_weight(i)) > Rational::zero()))
        };
        let (ss, st) = if separated {
            (false, false)
        } else if Self::memo_any(&self.memo.stable, s) {
            (true, true)
        } else {
            match p.certificate(s) {
                Ok((pos, cert)) => {
                    if let HullCertificate::Separating(f) = cert {
                        self.memo.separators.lock().expect("memo lock").push(f);
                    }
                    (pos != HullPosition::Outside, pos == HullPosition::Interior)
                }
                Err(_) => (false, false),
            }
        };
        self.memo.semistable.lock().expect("memo lock").insert(s, ss);
        self.memo.stable.lock().expect("memo lock").insert(s, st);
    }

    fn is_semistable(&self, s: SupportClass) -> bool {
        if let Some(&v) = self.memo.semistable.lock().expect("memo lock").get(&s) {
            return v;
        }
        if Self::memo_any(&self.memo.semistable, s) {
            self.memo.semistable.lock().expect("memo lock").insert(s, true);
            return true;
        }
        self.classify_support(s);
        self.memo.semistable.lock().expect("memo lock")[&s]
    }

    fn is_stable(&self, s: SupportClass) -> bool {
        if let Some(&v) = self.memo.stable.lock().expect("memo lock").get(&s) {
            return v;
        }
        if !self.is_semistable(s) {
            self.memo.stable.lock().expect("memo lock").insert(s, false);
            return false;
        }
        if let Some(&v) = self.memo.stable.lock().expect("memo lock").get(&s) {
            return v;
        }
        self.classify_support(s);
        self.memo.stable.lock().expect("memo lock")[&s]
    }

    fn min_root_stab(&self, cells: Vec<SupportClass>) -> Vec<SupportClass> {
        let Some(min) = cells.iter().map(|c| self.stab_dim(c)).min() else {
            return cells;
        };
        cells.into_iter().filter(|c| self.stab_dim(c) == min).collect()
    }
}

impl GitProblemOracle for TorusNode {
    type Cell = SupportClass;

    fn cells(&self) -> Vec<SupportClass> {
        self.cells.iter().copied().collect()
    }

    fn closure(&self, c: &SupportClass) -> Vec<SupportClass> {
        let mut out: Vec<SupportClass> = c.subsets().filter(|t| self.cells.contains(t)).collect();
        out.sort();
        out
    }

    fn dim_h(&self) -> usize {
        self.rank()
    }

    fn component_profile(&self) -> Vec<usize> {
        let mut profile = Vec::new();
        for s in &self.cells {
            let maximal = !self.cells.iter().any(|t| t != s && s.is_subset(*t));
            if maximal {
                let d = s.len() - 1;
                if profile.len() <= d {
                    profile.resize(d + 1, 0);
                }
                profile[d] += 1;
            }
        }
        profile
    }

    fn is_lambda_nontrivial(&self) -> bool {
        match &self.grading {
            Some(l) if self.ip.is_some() => {
                let ws: BTreeSet<Rational> = self.lambda_weights(l).into_iter().flatten().collect();
                ws.len() >= 2
            }
            _ => false,
        }
    }

    fn z_min_problem(&self) -> Self {
        let lambda = self.grading.clone().expect("graded node");
        let basis = self.orth_complement(&[lambda]);
        self.projected(self.z_min_cells(), basis, None)
    }

    fn unipotent_stab_dims(&self, _c: &SupportClass) -> Vec<usize> {
        Vec::new()
    }

    fn u_sweep_is_open(&self) -> bool {
        let z = self.z_min_cells();
        self.is_open_in(&z, &self.cells)
    }

    fn case1a(&self, _zmin: &Self, inner: &[SupportClass]) -> Vec<SupportClass> {
        // U is trivial, so U·S_0(Z_min) = S_0(Z_min); keep the generic stabilizer dimension.
        self.min_root_stab(inner.to_vec())
    }

    fn case1b(&self, _zmin: &Self, inner: &[SupportClass]) -> Vec<SupportClass> {
        let (lw, min) = self.omega_min();
        let inner: BTreeSet<&SupportClass> = inner.iter().collect();
        let z = self.z_min_cells();
        let cand: Vec<SupportClass> = self
            .cells
            .iter()
            .filter(|s| !z.contains(s))
            .filter(|s| {
                s.filter(|i| lw[i].as_ref() == Some(&min))
                    .is_some_and(|r| inner.contains(&r))
            })
            .copied()
            .collect();
        if !cand.is_empty() {
            return self.min_root_stab(cand);
        }
        // On a reducible X the limit map can miss S_0(Z_min) entirely; fall back
        // to the part of S_0(Z_min) that is already open in X.
        let inner: BTreeSet<SupportClass> = inner.into_iter().copied().collect();
        let open: Vec<SupportClass> = inner
            .iter()
            .filter(|s| self.cells.iter().all(|t| !s.is_subset(*t) || inner.contains(t)))
            .copied()
            .collect();
        self.min_root_stab(open)
    }

    fn stable_cells(&self) -> Vec<SupportClass> {
        self.cells.iter().filter(|s| self.is_stable(**s)).copied().collect()
    }

    fn semistable_cells(&self) -> Vec<SupportClass> {
        self.cells.iter().filter(|s| self.is_semistable(**s)).copied().collect()
    }

    fn open_hkkn_stratum(&self) -> OpenStratum<Self> {
        let indexed: Vec<(SupportClass, StratumIndex)> = self.cells.iter().map(|s| (*s, self.index(*s))).collect();
        let idx = indexed.iter().map(|(_, i)| i).min().expect("nonempty problem").clone();
        let beta = idx.beta.clone();
        let label = beta.to_string();
        let stratum: BTreeSet<SupportClass> = indexed.into_iter().filter(|(_, i)| *i == idx).map(|(s, _)| s).collect();
        let ybar: BTreeSet<SupportClass> = self
            .cells
            .iter()
            .filter(|s| stratum.iter().any(|t| s.is_subset(*t)))
            .copied()
            .collect();
        if ybar != self.cells {
            let node = self.derive(ybar, self.weights.clone(), self.ip.clone(), Some(beta));
            return OpenStratum::Proper { beta: label, ybar: node };
        }
        let n = self.ip.as_ref().unwrap().dot_unchecked(&beta, &beta);
        let z_is_x = self
            .cells
            .iter()
            .all(|s| s.iter().all(|i| self.ip.as_ref().unwrap().dot_unchecked(&self.weights[i], &beta) == n));
        if z_is_x {
            let basis = self.orth_complement(std::slice::from_ref(&beta));
            let quotient = self.projected(self.cells.clone(), basis, Some(&beta));
            OpenStratum::Quotient { beta: label, quotient }
        } else {
            let regraded = self.derive(self.cells.clone(), self.weights.clone(), self.ip.clone(), Some(beta));
            OpenStratum::Graded { beta: label, regraded }
        }
    }

    fn sweep_from_ybar(&self, ybar: &Self, inner: &[SupportClass]) -> Vec<SupportClass> {
        // Y_β^ss is the open HKKN stratum of this node; R = P_β = T, so the sweep is trivial.
        let beta = ybar.grading.as_ref().expect("Ȳ carries λ_β");
        inner
            .iter()
            .filter(|s| self.cells.contains(s) && self.index(**s).beta == *beta)
            .copied()
            .collect()
    }

    fn fixed_sweep(&self) -> Option<(String, Self)> {
        let ss: BTreeSet<SupportClass> = self.semistable_cells().into_iter().collect();
        let mut best: Option<(usize, Vec<QVector>, BTreeSet<SupportClass>)> = None;
        let mut seen: BTreeSet<Vec<QVector>> = BTreeSet::new();
        for s in &ss {
            let ws: Vec<QVector> = s.iter().map(|i| self.weights[i].clone()).collect();
            let span = linalg::span_basis(&ws);
            let rdim = self.rank() - span.len();
            if rdim == 0 || !seen.insert(span.clone()) {
                continue;
            }
            let z: BTreeSet<SupportClass> = self
                .cells
                .iter()
                .filter(|t| {
                    let mut rows = span.clone();
                    rows.extend(t.iter().map(|i| self.weights[i].clone()));
                    linalg::rank(&rows) == span.len()
                })
                .copied()
                .collect();
            let zss: BTreeSet<SupportClass> = z.intersection(&ss).copied().collect();
            if zss.is_empty() || !self.is_open_in(&zss, &ss) {
                continue;
            }
            let better = match &best {
                None => true,
                Some((d, b, _)) => rdim > *d || (rdim == *d && span < *b),
            };
            if better {
                best = Some((rdim, span, z));
            }
        }
        let (rdim, span, z) = best?;
        let ann = self.orth_complement(&span);
        let label = format!(
            "subtorus of dimension {rdim} spanned by {}",
            ann.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
        );
        Some((label, self.projected(z, span, None)))
    }

    fn sweep_fixed(&self, _sub: &Self, inner: &[SupportClass]) -> Vec<SupportClass> {
        let ss: BTreeSet<SupportClass> = self.semistable_cells().into_iter().collect();
        inner.iter().filter(|s| ss.contains(s)).copied().collect()
    }

    fn blow_up_outcome(&self) -> Option<Vec<SupportClass>> {
        None
    }

    fn restrict(&self, cells: &[SupportClass]) -> Self {
        self.derive(
            cells.iter().copied().collect(),
            self.weights.clone(),
            self.ip.clone(),
            self.grading.clone(),
        )
    }

    fn components(&self, cells: &[SupportClass]) -> Vec<Vec<SupportClass>> {
        hkkn::components(cells)
    }

    fn stab_dim(&self, c: &SupportClass) -> usize {
        cached(&self.root_memo.stab, *c, || self.root.stab_dim(*c).expect("cells are root supports"))
    }

    fn hkkn_key(&self, c: &SupportClass) -> Option<String> {
        let idx = cached(&self.root_memo.index, *c, || {
            hkkn::index_of_support(&self.root, *c).expect("cells are root supports")
        });
        Some(idx.beta.to_string())
    }

    fn describe(&self, cells: &[SupportClass]) -> String {
        let parts: Vec<String> = cells.iter().map(ToString::to_string).collect();
        parts.join(" ")
    }

    fn summary(&self) -> String {
        let grading = self
            .grading
            .as_ref()
            .map_or_else(String::new, |l| format!(", graded by {l}"));
        format!("torus of rank {} on {} supports{grading}", self.rank(), self.cells.len())
    }

    fn dagger_strata(&self) -> Vec<DaggerStratum<SupportClass>> {
        let root = &*self.root;
        let Ok(strat) = hkkn::stratify_with_workers(root, 1) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (idx, members) in &strat.strata {
            if !hkkn::check_dagger(root, &idx.beta).unwrap_or(false) {
                continue;
            }
            let zss: BTreeSet<SupportClass> = hkkn::z_beta_ss(root, &idx.beta)
                .unwrap_or_default()
                .into_iter()
                .collect();
            let (sweep, complement): (Vec<SupportClass>, Vec<SupportClass>) =
                members.iter().partition(|s| zss.contains(s));
            out.push(DaggerStratum {
                beta: idx.beta.to_string(),
                sweep,
                complement,
            });
        }
        out
    }
}
