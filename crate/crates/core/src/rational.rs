//! Exact rationals, rational vectors and rational inner products.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg;

/// Arbitrary precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `p`, `-p`, `p/q` (no decimals, no whitespace inside).
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let valid_int = |t: &str, signed: bool| {
        let digits = if signed {
            t.strip_prefix(['-', '+']).unwrap_or(t)
        } else {
            t
        };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid_int(num, true) || den.is_some_and(|d| !valid_int(d, false)) {
        return Err(RationalParseError::Malformed(s.to_string()));
    }
    let n = BigInt::from_str(num).map_err(|_| RationalParseError::Malformed(s.to_string()))?;
    let d = match den {
        Some(d) => BigInt::from_str(d).map_err(|_| RationalParseError::Malformed(s.to_string()))?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(RationalParseError::ZeroDenominator(s.to_string()));
    }
    Ok(BigRational::new(n, d))
}

/// Renders as `p` or `p/q`.
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

/// Serde helper writing a rational as its `p/q` string.
pub fn ser_rational<S: Serializer>(q: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&format_rational(q))
}

/// Serde helper reading a rational from its `p/q` string.
pub fn de_rational<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
    let raw = String::deserialize(deserializer)?;
    parse_rational(&raw).map_err(serde::de::Error::custom)
}

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DimensionError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Mismatch { expected: usize, found: usize },
    #[error("vector dimension must be at least 1")]
    Empty,
}

/// A point of a finite-dimensional rational vector space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QVector(Vec<Rational>);

impl QVector {
    pub fn new(coords: Vec<Rational>) -> Self {
        QVector(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        QVector(coords.iter().map(|&c| int(c)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        QVector(vec![Rational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &QVector) -> QVector {
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &QVector) -> QVector {
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: &Rational) -> QVector {
        QVector(self.0.iter().map(|a| a * s).collect())
    }

    /// Plain coordinate pairing, independent of any inner product.
    pub fn pairing(&self, other: &QVector) -> Rational {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn parse(items: &[String]) -> Result<Self, RationalParseError> {
        items
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()
            .map(QVector)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(format_rational).collect()
    }
}

impl fmt::Display for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for QVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<String>::deserialize(deserializer)?;
        QVector::parse(&raw).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InnerProductError {
    #[error("gram matrix must be square and nonempty")]
    NotSquare,
    #[error("gram matrix is not symmetric")]
    NotSymmetric,
    #[error("gram matrix is not positive definite (leading minor {0} is not positive)")]
    NotPositiveDefinite(usize),
}

/// A rational positive definite symmetric bilinear form given by its Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerProduct {
    gram: Vec<Vec<Rational>>,
}

impl InnerProduct {
    pub fn new(gram: Vec<Vec<Rational>>) -> Result<Self, InnerProductError> {
        let d = gram.len();
        if d == 0 || gram.iter().any(|row| row.len() != d) {
            return Err(InnerProductError::NotSquare);
        }
        for i in 0..d {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(InnerProductError::NotSymmetric);
                }
            }
        }
        for k in 1..=d {
            let minor: Vec<Vec<Rational>> = gram[..k].iter().map(|r| r[..k].to_vec()).collect();
            if !linalg::determinant(&minor).is_positive() {
                return Err(InnerProductError::NotPositiveDefinite(k));
            }
        }
        Ok(InnerProduct { gram })
    }

    pub fn identity(d: usize) -> Self {
        let gram = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        InnerProduct { gram }
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<Rational>] {
        &self.gram
    }

    pub fn is_identity(&self) -> bool {
        *self == InnerProduct::identity(self.dim())
    }

    pub fn scaled(&self, s: &Rational) -> Result<Self, InnerProductError> {
        InnerProduct::new(
            self.gram
                .iter()
                .map(|row| row.iter().map(|g| g * s).collect())
                .collect(),
        )
    }

    fn check(&self, v: &QVector) -> Result<(), DimensionError> {
        if v.dim() != self.dim() {
            return Err(DimensionError::Mismatch {
                expected: self.dim(),
                found: v.dim(),
            });
        }
        Ok(())
    }

    /// `G v`, the functional paired with `v` under this inner product.
    pub fn lower(&self, v: &QVector) -> QVector {
        QVector::new(
            self.gram
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(v.coords())
                        .fold(Rational::zero(), |acc, (g, x)| acc + g * x)
                })
                .collect(),
        )
    }

    pub fn dot(&self, a: &QVector, b: &QVector) -> Result<Rational, DimensionError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.dot_unchecked(a, b))
    }

    pub(crate) fn dot_unchecked(&self, a: &QVector, b: &QVector) -> Rational {
        let mut acc = Rational::zero();
        for (i, ai) in a.coords().iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coords().iter().enumerate() {
                if !bj.is_zero() {
                    acc += ai * &self.gram[i][j] * bj;
                }
            }
        }
        acc
    }
}

/// `vᵀ G v`, exact.
pub fn norm_sq(v: &QVector, ip: &InnerProduct) -> Result<Rational, DimensionError> {
    ip.dot(v, v)
}
