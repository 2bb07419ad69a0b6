#![allow(dead_code)]

use gitstrata::rational::{rat, Rational};
use gitstrata::torusgit::TorusProblem;
use gitstrata::{InnerProduct, QVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p/q` with `|p|, |q| <= bound`, `q > 0`.
pub fn rational(rng: &mut ChaCha8Rng, bound: i64) -> Rational {
    rat(rng.gen_range(-bound..=bound), rng.gen_range(1..=bound))
}

pub fn point(rng: &mut ChaCha8Rng, d: usize, bound: i64) -> QVector {
    QVector::new((0..d).map(|_| rational(rng, bound)).collect())
}

pub fn int_point(rng: &mut ChaCha8Rng, d: usize, bound: i64) -> QVector {
    QVector::from_ints(&(0..d).map(|_| rng.gen_range(-bound..=bound)).collect::<Vec<_>>())
}

/// Identity or a random positive diagonal Gram matrix.
pub fn inner_product(rng: &mut ChaCha8Rng, d: usize) -> InnerProduct {
    if rng.gen_bool(0.5) {
        return InnerProduct::identity(d);
    }
    let gram = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { rat(rng.gen_range(1..=4), rng.gen_range(1..=3)) } else { rat(0, 1) })
                .collect()
        })
        .collect();
    InnerProduct::new(gram).unwrap()
}

/// A torus problem with `n <= max_n` small integer weights in dimension `d <= max_d`.
pub fn torus_problem(rng: &mut ChaCha8Rng, max_n: usize, max_d: usize) -> TorusProblem {
    let d = rng.gen_range(1..=max_d);
    let n = rng.gen_range(2..=max_n);
    let weights = (0..n).map(|_| int_point(rng, d, 3)).collect();
    let ip = inner_product(rng, d);
    TorusProblem::new(weights, ip).unwrap()
}
