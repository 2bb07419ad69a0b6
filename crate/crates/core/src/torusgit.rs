//! Diagonal torus actions on projective space, described through coordinate
//! support classes.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::exactgeom::{self, GeomError, HullCertificate, HullPosition};
use crate::linalg;
use crate::rational::{DimensionError, InnerProduct, InnerProductError, QVector, Rational};

/// Default bound on the number of homogeneous coordinates.
pub const DEFAULT_CAP: usize = 16;
/// Hard bound imposed by the bitmask representation.
pub const MAX_INDICES: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TorusError {
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error(transparent)]
    InnerProduct(#[from] InnerProductError),
    #[error("at least one weight is required")]
    NoWeights,
    #[error("{indices} coordinates exceed the enumeration cap of {cap}")]
    CapExceeded { indices: usize, cap: usize },
    #[error("support {0} is empty or refers to a missing coordinate")]
    BadSupport(String),
    #[error("support {0} is not allowed in this problem")]
    SupportNotAllowed(SupportClass),
    #[error("LAMBDA_TRIVIAL: the one-parameter subgroup acts with a single weight")]
    LambdaTrivial,
    #[error("SUPPORT_NOT_CLOSED: limit {retraction} of allowed support {support} is not allowed")]
    SupportNotClosed {
        support: SupportClass,
        retraction: SupportClass,
    },
}

impl From<GeomError> for TorusError {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::Dimension(d) => TorusError::Dimension(d),
            other => unreachable!("geometry precondition violated: {other}"),
        }
    }
}

/// A nonempty set of coordinate indices, stored as a bitmask.
///
/// Ordered by size, then lexicographically on the sorted index list.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SupportClass(u64);

impl SupportClass {
    pub fn from_mask(mask: u64) -> Option<Self> {
        (mask != 0).then_some(SupportClass(mask))
    }

    pub fn from_indices(indices: &[usize]) -> Option<Self> {
        let mut mask = 0u64;
        for &i in indices {
            if i >= MAX_INDICES {
                return None;
            }
            mask |= 1 << i;
        }
        Self::from_mask(mask)
    }

    pub fn singleton(i: usize) -> Self {
        SupportClass(1 << i)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1 << i) != 0
    }

    pub fn is_subset(self, other: SupportClass) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: SupportClass) -> SupportClass {
        SupportClass(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..64).filter(move |i| mask & (1 << i) != 0)
    }

    pub fn indices(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// The subset of indices satisfying `keep`, if nonempty.
    pub fn filter(self, mut keep: impl FnMut(usize) -> bool) -> Option<SupportClass> {
        Self::from_mask(self.iter().filter(|&i| keep(i)).fold(0, |m, i| m | (1 << i)))
    }

    /// All nonempty subsets, including `self`.
    pub fn subsets(self) -> impl Iterator<Item = SupportClass> {
        let full = self.0;
        let mut sub = full;
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let cur = sub;
            if cur == 0 {
                return None;
            }
            sub = (sub - 1) & full;
            if sub == 0 {
                done = true;
            }
            Some(SupportClass(cur))
        })
    }
}

impl Ord for SupportClass {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for SupportClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SupportClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for SupportClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for SupportClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.indices().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SupportClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(deserializer)?;
        SupportClass::from_indices(&raw)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid support {raw:?}")))
    }
}

/// Z_min together with the flag raised when λ has a single weight on X.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZMin {
    pub supports: Vec<SupportClass>,
    pub lambda_trivial: bool,
}

/// A diagonal action of a rank-`d` torus on ℙⁿ, optionally restricted to a
/// union of coordinate strata and twisted by a rational character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusProblem {
    weights: Vec<QVector>,
    ip: InnerProduct,
    allowed: Option<Arc<BTreeSet<SupportClass>>>,
    twist: Option<QVector>,
    cap: usize,
}

impl TorusProblem {
    pub fn new(weights: Vec<QVector>, ip: InnerProduct) -> Result<Self, TorusError> {
        Self::with_cap(weights, ip, DEFAULT_CAP)
    }

    pub fn with_cap(weights: Vec<QVector>, ip: InnerProduct, cap: usize) -> Result<Self, TorusError> {
        if weights.is_empty() {
            return Err(TorusError::NoWeights);
        }
        let d = ip.dim();
        for w in &weights {
            if w.dim() != d {
                return Err(DimensionError::Mismatch {
                    expected: d,
                    found: w.dim(),
                }
                .into());
            }
        }
        let cap = cap.min(MAX_INDICES);
        if weights.len() > cap {
            return Err(TorusError::CapExceeded {
                indices: weights.len(),
                cap,
            });
        }
        Ok(TorusProblem {
            weights,
            ip,
            allowed: None,
            twist: None,
            cap,
        })
    }

    /// Weights given as integer tuples with the standard inner product.
    pub fn from_int_weights(weights: &[&[i64]]) -> Result<Self, TorusError> {
        let d = weights.first().map_or(0, |w| w.len());
        if d == 0 {
            return Err(if weights.is_empty() {
                TorusError::NoWeights
            } else {
                DimensionError::Empty.into()
            });
        }
        Self::new(
            weights.iter().map(|w| QVector::from_ints(w)).collect(),
            InnerProduct::identity(d),
        )
    }

    pub fn with_allowed_supports(
        mut self,
        supports: impl IntoIterator<Item = SupportClass>,
    ) -> Result<Self, TorusError> {
        let set: BTreeSet<SupportClass> = supports.into_iter().collect();
        let full = self.full_mask();
        if let Some(bad) = set.iter().find(|s| s.mask() & !full != 0) {
            return Err(TorusError::BadSupport(bad.to_string()));
        }
        self.allowed = Some(Arc::new(set));
        Ok(self)
    }

    pub fn with_twist(mut self, twist: QVector) -> Result<Self, TorusError> {
        if twist.dim() != self.dim() {
            return Err(DimensionError::Mismatch {
                expected: self.dim(),
                found: twist.dim(),
            }
            .into());
        }
        self.twist = (!twist.is_zero()).then_some(twist);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.ip.dim()
    }

    pub fn n_indices(&self) -> usize {
        self.weights.len()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn weights(&self) -> &[QVector] {
        &self.weights
    }

    pub fn ip(&self) -> &InnerProduct {
        &self.ip
    }

    pub fn twist(&self) -> Option<&QVector> {
        self.twist.as_ref()
    }

    pub fn explicit_supports(&self) -> Option<&BTreeSet<SupportClass>> {
        self.allowed.as_deref()
    }

    fn full_mask(&self) -> u64 {
        (1u64 << self.n_indices()) - 1
    }

    pub fn is_allowed(&self, s: SupportClass) -> bool {
        match &self.allowed {
            Some(set) => set.contains(&s),
            None => s.mask() & !self.full_mask() == 0,
        }
    }

    fn require(&self, s: SupportClass) -> Result<(), TorusError> {
        if self.is_allowed(s) {
            Ok(())
        } else {
            Err(TorusError::SupportNotAllowed(s))
        }
    }

    /// Every allowed support, in canonical order.
    pub fn supports(&self) -> Vec<SupportClass> {
        match &self.allowed {
            Some(set) => set.iter().copied().collect(),
            None => {
                let mut all: Vec<SupportClass> = (1..=self.full_mask()).map(SupportClass).collect();
                all.sort();
                all
            }
        }
    }

    /// Allowed supports contained in `s` (its closure), in canonical order.
    pub fn closure(&self, s: SupportClass) -> Vec<SupportClass> {
        let mut out: Vec<SupportClass> = s.subsets().filter(|t| self.is_allowed(*t)).collect();
        out.sort();
        out
    }

    /// Indices occurring in some allowed support.
    pub fn occurring(&self) -> Vec<usize> {
        match &self.allowed {
            Some(set) => {
                let mask = set.iter().fold(0, |m, s| m | s.mask());
                SupportClass::from_mask(mask).map_or_else(Vec::new, SupportClass::indices)
            }
            None => (0..self.n_indices()).collect(),
        }
    }

    /// `α_i − ξ`, the weight used in hull tests once the twist is applied.
    pub fn effective_weight(&self, i: usize) -> QVector {
        match &self.twist {
            Some(xi) => self.weights[i].sub(xi),
            None => self.weights[i].clone(),
        }
    }

    pub fn effective_weights(&self, s: SupportClass) -> Vec<QVector> {
        s.iter().map(|i| self.effective_weight(i)).collect()
    }

    pub fn hull_position(&self, s: SupportClass) -> Result<HullPosition, TorusError> {
        Ok(self.certificate(s)?.0)
    }

    /// Hilbert–Mumford decision for `s` with its exact certificate.
    pub fn certificate(&self, s: SupportClass) -> Result<(HullPosition, HullCertificate), TorusError> {
        self.require(s)?;
        Ok(exactgeom::hull_certificate(
            &self.effective_weights(s),
            &QVector::zero(self.dim()),
            &self.ip,
        )?)
    }

    pub fn semistable(&self, s: SupportClass) -> Result<bool, TorusError> {
        Ok(self.hull_position(s)? != HullPosition::Outside)
    }

    pub fn stable(&self, s: SupportClass) -> Result<bool, TorusError> {
        Ok(self.hull_position(s)? == HullPosition::Interior)
    }

    /// Dimension of the subtorus fixing every point with support exactly `s`.
    pub fn stab_dim(&self, s: SupportClass) -> Result<usize, TorusError> {
        self.require(s)?;
        Ok(self.dim() - self.difference_rank(s))
    }

    fn difference_rank(&self, s: SupportClass) -> usize {
        let idx = s.indices();
        let base = &self.weights[idx[0]];
        let diffs: Vec<QVector> = idx[1..].iter().map(|&i| self.weights[i].sub(base)).collect();
        linalg::rank(&diffs)
    }

    pub fn lambda_weight(&self, lambda: &QVector, i: usize) -> Result<Rational, TorusError> {
        Ok(self.ip.dot(lambda, &self.weights[i])?)
    }

    fn sorted_lambda_weights(&self, lambda: &QVector) -> Result<Vec<Rational>, TorusError> {
        let mut ws = self
            .occurring()
            .into_iter()
            .map(|i| self.lambda_weight(lambda, i))
            .collect::<Result<Vec<_>, _>>()?;
        ws.sort();
        ws.dedup();
        Ok(ws)
    }

    /// Allowed supports on which λ attains its minimal weight at every index.
    pub fn z_min(&self, lambda: &QVector) -> Result<ZMin, TorusError> {
        let ws = self.sorted_lambda_weights(lambda)?;
        let lambda_trivial = ws.len() <= 1;
        let Some(omega) = ws.first() else {
            return Ok(ZMin {
                supports: Vec::new(),
                lambda_trivial: true,
            });
        };
        let lw: Vec<Rational> = (0..self.n_indices())
            .map(|i| self.ip.dot_unchecked(lambda, &self.weights[i]))
            .collect();
        let supports = self
            .supports()
            .into_iter()
            .filter(|s| s.iter().all(|i| lw[i] == *omega))
            .collect();
        Ok(ZMin {
            supports,
            lambda_trivial,
        })
    }

    fn omega_min(&self, lambda: &QVector) -> Result<Rational, TorusError> {
        let ws = self.sorted_lambda_weights(lambda)?;
        if ws.len() <= 1 {
            return Err(TorusError::LambdaTrivial);
        }
        Ok(ws[0].clone())
    }

    /// The support of `lim_{t→0} λ(t)·x` for `x` with support `s`.
    pub fn retraction(&self, lambda: &QVector, s: SupportClass) -> Result<SupportClass, TorusError> {
        let omega = self.omega_min(lambda)?;
        self.retract_with(lambda, &omega, s)
            .ok_or(TorusError::SupportNotAllowed(s))
    }

    fn retract_with(&self, lambda: &QVector, omega: &Rational, s: SupportClass) -> Option<SupportClass> {
        s.filter(|i| self.ip.dot_unchecked(lambda, &self.weights[i]) == *omega)
    }

    /// X⁰_min as pairs (support, support of its limit).
    pub fn x0_min(&self, lambda: &QVector) -> Result<Vec<(SupportClass, SupportClass)>, TorusError> {
        let omega = self.omega_min(lambda)?;
        let mut out = Vec::new();
        for s in self.supports() {
            if let Some(r) = self.retract_with(lambda, &omega, s) {
                if !self.is_allowed(r) {
                    return Err(TorusError::SupportNotClosed {
                        support: s,
                        retraction: r,
                    });
                }
                out.push((s, r));
            }
        }
        Ok(out)
    }

    /// X⁰_min \ Z_min; empty when λ acts with a single weight (then X⁰_min = Z_min = X).
    pub fn min_stable_set(&self, lambda: &QVector) -> Result<Vec<SupportClass>, TorusError> {
        if self.sorted_lambda_weights(lambda)?.len() <= 1 {
            return Ok(Vec::new());
        }
        Ok(self
            .x0_min(lambda)?
            .into_iter()
            .filter(|(s, r)| s != r)
            .map(|(s, _)| s)
            .collect())
    }

    /// The two smallest distinct λ-weights (ω₀, ω₁).
    pub fn adapted_window(&self, lambda: &QVector) -> Result<(Rational, Rational), TorusError> {
        let ws = self.sorted_lambda_weights(lambda)?;
        if ws.len() < 2 {
            return Err(TorusError::LambdaTrivial);
        }
        Ok((ws[0].clone(), ws[1].clone()))
    }

    /// Whether the stored twist ξ satisfies ω₀ < ⟨λ, ξ⟩ < ω₁.
    pub fn is_adapted(&self, lambda: &QVector) -> Result<bool, TorusError> {
        let (w0, w1) = self.adapted_window(lambda)?;
        let t = match &self.twist {
            Some(xi) => self.ip.dot(lambda, xi)?,
            None => Rational::zero(),
        };
        Ok(w0 < t && t < w1)
    }
}
