//! Exact two-phase simplex over the rationals with Bland's anti-cycling rule.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<Rational>, value: Rational },
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for x in self.rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for j in 0..=self.width {
                let delta = &f * &self.rows[r][j];
                self.rows[i][j] -= delta;
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost · x` over the columns in `allowed`; `false` when unbounded.
    fn optimize(&mut self, cost: &[Rational], allowed: &[bool]) -> bool {
        loop {
            let reduced = |j: usize| {
                let mut r = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() && !self.rows[i][j].is_zero() {
                        r -= &cost[b] * &self.rows[i][j];
                    }
                }
                r
            };
            let entering = (0..self.width)
                .filter(|&j| allowed[j] && !self.basis.contains(&j))
                .find(|&j| reduced(j).is_positive());
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// Maximizes `cost · x` subject to `a x = b`, `x ≥ 0`.
pub fn maximize(cost: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> LpOutcome {
    let n = cost.len();
    let m = a.len();
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        debug_assert_eq!(row.len(), n);
        let flip = bi.is_negative();
        let mut r: Vec<Rational> = row.iter().map(|x| if flip { -x } else { x.clone() }).collect();
        r.extend((0..m).map(|k| if k == i { Rational::from_integer(1.into()) } else { Rational::zero() }));
        r.push(if flip { -bi } else { bi.clone() });
        rows.push(r);
    }
    let mut t = Tableau {
        rows,
        basis: (n..width).collect(),
        width,
    };

    // Phase 1: maximize -Σ artificials.
    let mut phase1 = vec![Rational::zero(); width];
    for c in phase1.iter_mut().skip(n) {
        *c = -Rational::from_integer(1.into());
    }
    let all = vec![true; width];
    t.optimize(&phase1, &all);
    let infeasibility: Rational = (0..m)
        .filter(|&i| t.basis[i] >= n)
        .map(|i| t.rhs(i).clone())
        .sum();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }
    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            if let Some(c) = (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, c);
            } else {
                t.rows.remove(i);
                t.basis.remove(i);
                continue;
            }
        }
        i += 1;
    }

    let mut phase2 = cost.to_vec();
    phase2.extend((0..m).map(|_| Rational::zero()));
    let original: Vec<bool> = (0..width).map(|j| j < n).collect();
    if !t.optimize(&phase2, &original) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &bcol) in t.basis.iter().enumerate() {
        if bcol < n {
            x[bcol] = t.rhs(i).clone();
        }
    }
    let value = x.iter().zip(cost).map(|(xi, ci)| xi * ci).sum();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn small_optimum() {
        // max x + y s.t. x + 2y + s = 4, 3x + y + t = 6
        let a = vec![
            vec![int(1), int(2), int(1), int(0)],
            vec![int(3), int(1), int(0), int(1)],
        ];
        let out = maximize(&[int(1), int(1), int(0), int(0)], &a, &[int(4), int(6)]);
        match out {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, rat(14, 5));
                assert_eq!(x[0], rat(8, 5));
                assert_eq!(x[1], rat(6, 5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = vec![vec![int(1), int(1)]];
        assert_eq!(maximize(&[int(0), int(0)], &a, &[int(-1)]), LpOutcome::Infeasible);
        let a = vec![vec![int(1), int(-1)]];
        assert_eq!(maximize(&[int(1), int(0)], &a, &[int(1)]), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows() {
        let a = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        match maximize(&[int(1), int(0)], &a, &[int(1), int(2)]) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(1)),
            other => panic!("{other:?}"),
        }
    }
}
