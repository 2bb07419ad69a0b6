//! Exact convex-hull queries: origin membership and minimum-norm points.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::linalg;
use crate::lp::{self, LpOutcome};
use crate::rational::{DimensionError, InnerProduct, QVector, Rational};

pub use crate::rational::norm_sq;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeomError {
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error("point list is empty")]
    EmptyPointList,
    #[error("oracle size limit exceeded: {points} points in dimension {dim} (max 12 points, dimension 4)")]
    OracleLimit { points: usize, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HullPosition {
    Interior,
    Boundary,
    Outside,
}

/// Exact witness for a hull-membership decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HullCertificate {
    /// Convex coefficients (one per point) reconstructing the query exactly.
    /// They are all strictly positive when the query is in the relative interior.
    Barycentric(Vec<Rational>),
    /// A functional `f` (plain coordinate pairing) with `f · (p - query) > 0` for every point.
    Separating(QVector),
}

fn check_points(points: &[QVector], dim: usize) -> Result<(), GeomError> {
    if points.is_empty() {
        return Err(GeomError::EmptyPointList);
    }
    for p in points {
        if p.dim() != dim {
            return Err(DimensionError::Mismatch {
                expected: dim,
                found: p.dim(),
            }
            .into());
        }
    }
    Ok(())
}

/// Rank of `{p_i - p_0}`, the dimension of the affine hull.
pub fn affine_rank(points: &[QVector]) -> usize {
    match points.split_first() {
        None => 0,
        Some((first, rest)) => {
            let diffs: Vec<QVector> = rest.iter().map(|p| p.sub(first)).collect();
            linalg::rank(&diffs)
        }
    }
}

/// Classifies `query` against `conv(points)`.
///
/// `Interior` requires the hull to be full-dimensional in the ambient space;
/// a lower-dimensional hull containing the query yields `Boundary`.
pub fn hull_position(
    points: &[QVector],
    query: &QVector,
    ip: &InnerProduct,
) -> Result<HullPosition, GeomError> {
    hull_certificate(points, query, ip).map(|(pos, _)| pos)
}

/// Same decision as [`hull_position`] together with an exact certificate.
pub fn hull_certificate(
    points: &[QVector],
    query: &QVector,
    ip: &InnerProduct,
) -> Result<(HullPosition, HullCertificate), GeomError> {
    let d = ip.dim();
    if query.dim() != d {
        return Err(DimensionError::Mismatch {
            expected: d,
            found: query.dim(),
        }
        .into());
    }
    check_points(points, d)?;
    let n = points.len();
    let shifted: Vec<QVector> = points.iter().map(|p| p.sub(query)).collect();

    // λ_i = μ_i + t with μ, t ≥ 0; maximize t subject to Σλ_i (p_i - q) = 0, Σλ_i = 1.
    let total = shifted.iter().fold(QVector::zero(d), |acc, p| acc.add(p));
    let mut rows: Vec<Vec<Rational>> = (0..d)
        .map(|k| {
            let mut r: Vec<Rational> = shifted.iter().map(|p| p.coords()[k].clone()).collect();
            r.push(total.coords()[k].clone());
            r
        })
        .collect();
    let mut norm_row = vec![Rational::from_integer(1.into()); n];
    norm_row.push(Rational::from_integer((n as i64).into()));
    rows.push(norm_row);
    let mut rhs = vec![Rational::zero(); d];
    rhs.push(Rational::from_integer(1.into()));
    let mut cost = vec![Rational::zero(); n];
    cost.push(Rational::from_integer(1.into()));

    match lp::maximize(&cost, &rows, &rhs) {
        LpOutcome::Optimal { x, value } => {
            let t = &x[n];
            let coeffs: Vec<Rational> = x[..n].iter().map(|mu| mu + t).collect();
            let pos = if value.is_positive() && affine_rank(points) == d {
                HullPosition::Interior
            } else {
                HullPosition::Boundary
            };
            Ok((pos, HullCertificate::Barycentric(coeffs)))
        }
        LpOutcome::Infeasible => {
            let beta = min_norm_point(&shifted, ip)?;
            Ok((HullPosition::Outside, HullCertificate::Separating(ip.lower(&beta))))
        }
        LpOutcome::Unbounded => unreachable!("t is bounded by 1/n"),
    }
}

/// KKT solve for the affine minimizer: minimize ‖Σ v_i p_i‖² with Σ v_i = 1.
fn affine_minimizer(gram: &[Vec<Rational>], subset: &[usize]) -> Option<Vec<Rational>> {
    let k = subset.len();
    let mut a = vec![vec![Rational::zero(); k + 1]; k + 1];
    for (r, &i) in subset.iter().enumerate() {
        for (c, &j) in subset.iter().enumerate() {
            a[r][c] = gram[i][j].clone();
        }
        a[r][k] = Rational::from_integer(1.into());
        a[k][r] = Rational::from_integer(1.into());
    }
    let mut b = vec![Rational::zero(); k + 1];
    b[k] = Rational::from_integer(1.into());
    linalg::solve(&a, &b).map(|mut v| {
        v.truncate(k);
        v
    })
}

fn combine(points: &[QVector], subset: &[usize], weights: &[Rational], dim: usize) -> QVector {
    subset
        .iter()
        .zip(weights)
        .fold(QVector::zero(dim), |acc, (&i, w)| acc.add(&points[i].scale(w)))
}

/// The unique point of `conv(points)` of least norm, computed exactly with
/// Wolfe's corral method.
pub fn min_norm_point(points: &[QVector], ip: &InnerProduct) -> Result<QVector, GeomError> {
    let d = ip.dim();
    check_points(points, d)?;
    let gram: Vec<Vec<Rational>> = points
        .iter()
        .map(|a| points.iter().map(|b| ip.dot_unchecked(a, b)).collect())
        .collect();

    let start = (0..points.len())
        .min_by(|&a, &b| gram[a][a].cmp(&gram[b][b]).then(a.cmp(&b)))
        .unwrap();
    let mut corral = vec![start];
    let mut weights = vec![Rational::from_integer(1.into())];

    loop {
        let x_dot = |j: usize| -> Rational {
            corral
                .iter()
                .zip(&weights)
                .map(|(&i, w)| w * &gram[i][j])
                .sum()
        };
        let x_norm: Rational = corral.iter().zip(&weights).map(|(&i, w)| w * x_dot(i)).sum();
        let (j, best) = (0..points.len())
            .map(|j| (j, x_dot(j)))
            .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
            .unwrap();
        if best >= x_norm || corral.contains(&j) {
            break;
        }
        corral.push(j);
        weights.push(Rational::zero());

        loop {
            let v = affine_minimizer(&gram, &corral)
                .expect("corral stays affinely independent in exact arithmetic");
            if v.iter().all(Signed::is_positive) {
                weights = v;
                break;
            }
            // Move from the current weights toward v until a weight hits zero.
            let theta = weights
                .iter()
                .zip(&v)
                .filter(|(_, vi)| !vi.is_positive())
                .map(|(wi, vi)| wi / (wi - vi))
                .min()
                .unwrap();
            let one_minus = Rational::from_integer(1.into()) - &theta;
            let next: Vec<Rational> = weights
                .iter()
                .zip(&v)
                .map(|(wi, vi)| &one_minus * wi + &theta * vi)
                .collect();
            let keep: Vec<bool> = next.iter().map(Signed::is_positive).collect();
            corral = corral.iter().zip(&keep).filter(|(_, k)| **k).map(|(c, _)| *c).collect();
            weights = next.into_iter().filter(Signed::is_positive).collect();
        }
    }
    Ok(combine(points, &corral, &weights, d))
}

/// Independent exhaustive-face oracle for [`min_norm_point`]: for every affinely
/// independent subset, project the origin onto its affine span and keep the
/// feasible projection of least norm. Limited to 12 points in dimension ≤ 4.
pub fn min_norm_oracle(points: &[QVector], ip: &InnerProduct) -> Result<QVector, GeomError> {
    let d = ip.dim();
    check_points(points, d)?;
    if points.len() > 12 || d > 4 {
        return Err(GeomError::OracleLimit {
            points: points.len(),
            dim: d,
        });
    }
    let gram: Vec<Vec<Rational>> = points
        .iter()
        .map(|a| points.iter().map(|b| ip.dot_unchecked(a, b)).collect())
        .collect();
    let mut best: Option<(Rational, QVector)> = None;
    for mask in 1u32..(1 << points.len()) {
        let subset: Vec<usize> = (0..points.len()).filter(|i| mask & (1 << i) != 0).collect();
        if subset.len() > d + 1 {
            continue;
        }
        let sub: Vec<QVector> = subset.iter().map(|&i| points[i].clone()).collect();
        if affine_rank(&sub) + 1 != subset.len() {
            continue;
        }
        let Some(v) = affine_minimizer(&gram, &subset) else {
            continue;
        };
        if v.iter().any(Signed::is_negative) {
            continue;
        }
        let x = combine(points, &subset, &v, d);
        let nx = ip.dot_unchecked(&x, &x);
        if best.as_ref().is_none_or(|(bn, _)| nx < *bn) {
            best = Some((nx, x));
        }
    }
    Ok(best.expect("singletons are always feasible").1)
}

pub fn is_zero(q: &Rational) -> bool {
    q.is_zero()
}
