//! Dense exact linear algebra over the rationals (Gauss-Jordan elimination).

use num_traits::{One, Zero};

use crate::rational::{InnerProduct, QVector, Rational};

pub type Matrix = Vec<Vec<Rational>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[QVector]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Matrix = rows.iter().map(|v| v.coords().to_vec()).collect();
    rref(&mut m).len()
}

pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Matrix = m.to_vec();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let delta = &f * &a[c][j];
                a[i][j] -= delta;
            }
        }
    }
    det
}

/// Solves the square system `a x = b`; `None` when `a` is singular.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut m: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| i != c) {
        return None;
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// A basis of `{x : rows · x = 0}`.
pub fn nullspace(rows: &[QVector], dim: usize) -> Vec<QVector> {
    let mut m: Matrix = rows.iter().map(|v| v.coords().to_vec()).collect();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Rational::zero(); dim];
            x[f] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                x[pc] = -m[r][f].clone();
            }
            QVector::new(x)
        })
        .collect()
}

/// Canonical basis (nonzero rows of the reduced echelon form) of the span of `rows`.
pub fn span_basis(rows: &[QVector]) -> Vec<QVector> {
    if rows.is_empty() {
        return Vec::new();
    }
    let mut m: Matrix = rows.iter().map(|v| v.coords().to_vec()).collect();
    let k = rref(&mut m).len();
    m.truncate(k);
    m.into_iter().map(QVector::new).collect()
}

/// Coordinates of vectors after orthogonal projection onto `span(basis)`,
/// together with the induced inner product on those coordinates.
pub struct Projection {
    basis: Vec<QVector>,
    induced: Matrix,
}

impl Projection {
    pub fn new(basis: Vec<QVector>, ip: &InnerProduct) -> Self {
        let induced = basis
            .iter()
            .map(|a| basis.iter().map(|b| ip.dot_unchecked(a, b)).collect())
            .collect();
        Projection { basis, induced }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn inner_product(&self) -> InnerProduct {
        InnerProduct::new(self.induced.clone()).expect("restriction of a positive definite form")
    }

    pub fn coords(&self, v: &QVector, ip: &InnerProduct) -> QVector {
        let rhs: Vec<Rational> = self.basis.iter().map(|b| ip.dot_unchecked(b, v)).collect();
        QVector::new(solve(&self.induced, &rhs).expect("basis is linearly independent"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn determinant_and_solve() {
        let a = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        assert_eq!(determinant(&a), int(5));
        let x = solve(&a, &[int(3), int(4)]).unwrap();
        assert_eq!(x, vec![int(1), int(1)]);
        assert!(solve(&[vec![int(1), int(2)], vec![int(2), int(4)]], &[int(1), int(1)]).is_none());
    }

    #[test]
    fn rank_and_nullspace() {
        let rows = vec![QVector::from_ints(&[1, 0, 1]), QVector::from_ints(&[2, 0, 2])];
        assert_eq!(rank(&rows), 1);
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(rows.iter().all(|r| r.pairing(v) == int(0)));
        }
    }

    #[test]
    fn projection_onto_line() {
        let ip = InnerProduct::identity(2);
        let p = Projection::new(vec![QVector::from_ints(&[1, 1])], &ip);
        assert_eq!(p.coords(&QVector::from_ints(&[1, 0]), &ip), QVector::new(vec![rat(1, 2)]));
        assert_eq!(p.inner_product().gram()[0][0], int(2));
    }
}
