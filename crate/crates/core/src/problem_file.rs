//! Problem files: a TOML document describing a torus problem or a (ℙ¹)ⁿ problem.
//!
//! ```toml
//! format_version = 1
//! dim = 1
//! weights = [["-1"], ["1"]]
//! # optional
//! gram = [["1"]]
//! lambda = ["1"]
//! twist = ["0"]
//! allowed_supports = [[0], [1], [0, 1]]
//! ```
//!
//! or, for n points on the projective line, `format_version = 1` and `p1n = 6`.

use serde::{Deserialize, Serialize};

use crate::p1n::{self, P1nNode};
use crate::rational::{parse_rational, InnerProduct, QVector, Rational};
use crate::torusgit::{SupportClass, TorusError, TorusProblem, DEFAULT_CAP};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProblemFileError {
    /// Malformed text, unknown fields or malformed rationals.
    #[error("parse error: {0}")]
    Parse(String),
    /// Well-formed but inconsistent data.
    #[error("semantic error: {0}")]
    Semantic(String),
}

impl ProblemFileError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            ProblemFileError::Parse(_) => 2,
            ProblemFileError::Semantic(_) => 3,
        }
    }
}

impl From<TorusError> for ProblemFileError {
    fn from(e: TorusError) -> Self {
        ProblemFileError::Semantic(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    format_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    p1n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gram: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    twist: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    allowed_supports: Option<Vec<Vec<usize>>>,
}

/// A diagonal torus problem as written in a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusSpec {
    pub dim: usize,
    pub weights: Vec<QVector>,
    pub gram: Option<Vec<Vec<Rational>>>,
    pub lambda: Option<QVector>,
    pub twist: Option<QVector>,
    pub allowed_supports: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemSpec {
    Torus(TorusSpec),
    P1n(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemFile {
    pub format_version: u32,
    pub spec: ProblemSpec,
}

fn vector(field: &str, raw: &[String], dim: usize) -> Result<QVector, ProblemFileError> {
    let v = QVector::parse(raw).map_err(|e| ProblemFileError::Parse(format!("{field}: {e}")))?;
    if v.dim() != dim {
        return Err(ProblemFileError::Semantic(format!(
            "{field} has {} coordinates, expected {dim}",
            v.dim()
        )));
    }
    Ok(v)
}

impl ProblemFile {
    pub fn p1n(n: usize) -> Self {
        ProblemFile {
            format_version: FORMAT_VERSION,
            spec: ProblemSpec::P1n(n),
        }
    }

    pub fn torus(spec: TorusSpec) -> Self {
        ProblemFile {
            format_version: FORMAT_VERSION,
            spec: ProblemSpec::Torus(spec),
        }
    }

    /// Parses and validates a problem file.
    pub fn parse(text: &str) -> Result<Self, ProblemFileError> {
        let raw: RawFile = toml::from_str(text).map_err(|e| ProblemFileError::Parse(e.message().to_string()))?;
        if raw.format_version != FORMAT_VERSION {
            return Err(ProblemFileError::Semantic(format!(
                "unsupported format_version {}",
                raw.format_version
            )));
        }
        let torus_fields = raw.dim.is_some()
            || raw.weights.is_some()
            || raw.gram.is_some()
            || raw.lambda.is_some()
            || raw.twist.is_some()
            || raw.allowed_supports.is_some();
        if let Some(n) = raw.p1n {
            if torus_fields {
                return Err(ProblemFileError::Semantic("p1n excludes the torus fields".into()));
            }
            if !(2..=p1n::ORACLE_CAP).contains(&n) {
                return Err(ProblemFileError::Semantic(format!(
                    "p1n = {n} is outside 2..={}",
                    p1n::ORACLE_CAP
                )));
            }
            return Ok(ProblemFile::p1n(n));
        }
        let dim = raw.dim.ok_or_else(|| ProblemFileError::Parse("missing field `dim`".into()))?;
        let raw_weights = raw
            .weights
            .ok_or_else(|| ProblemFileError::Parse("missing field `weights`".into()))?;
        let weights = raw_weights
            .iter()
            .enumerate()
            .map(|(i, w)| vector(&format!("weights[{i}]"), w, dim))
            .collect::<Result<Vec<_>, _>>()?;
        let gram = match raw.gram {
            None => None,
            Some(rows) => {
                let g = rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|x| parse_rational(x).map_err(|e| ProblemFileError::Parse(format!("gram: {e}"))))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if g.len() != dim || g.iter().any(|r| r.len() != dim) {
                    return Err(ProblemFileError::Semantic(format!("gram must be {dim}x{dim}")));
                }
                InnerProduct::new(g.clone()).map_err(|e| ProblemFileError::Semantic(e.to_string()))?;
                Some(g)
            }
        };
        let lambda = raw.lambda.as_deref().map(|l| vector("lambda", l, dim)).transpose()?;
        let twist = raw.twist.as_deref().map(|t| vector("twist", t, dim)).transpose()?;
        let file = ProblemFile {
            format_version: raw.format_version,
            spec: ProblemSpec::Torus(TorusSpec {
                dim,
                weights,
                gram,
                lambda,
                twist,
                allowed_supports: raw.allowed_supports,
            }),
        };
        file.torus_problem(DEFAULT_CAP.max(file.n_indices()))?;
        Ok(file)
    }

    /// Canonical TOML rendering; `parse(to_toml(f)) == f`.
    pub fn to_toml(&self) -> String {
        let strings = |v: &QVector| v.to_strings();
        let raw = match &self.spec {
            ProblemSpec::P1n(n) => RawFile {
                format_version: self.format_version,
                p1n: Some(*n),
                dim: None,
                weights: None,
                gram: None,
                lambda: None,
                twist: None,
                allowed_supports: None,
            },
            ProblemSpec::Torus(t) => RawFile {
                format_version: self.format_version,
                p1n: None,
                dim: Some(t.dim),
                weights: Some(t.weights.iter().map(strings).collect()),
                gram: t
                    .gram
                    .as_ref()
                    .map(|g| g.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()),
                lambda: t.lambda.as_ref().map(strings),
                twist: t.twist.as_ref().map(strings),
                allowed_supports: t.allowed_supports.clone(),
            },
        };
        toml::to_string(&raw).expect("problem files always serialize")
    }

    fn n_indices(&self) -> usize {
        match &self.spec {
            ProblemSpec::Torus(t) => t.weights.len(),
            ProblemSpec::P1n(n) => *n,
        }
    }

    /// The torus problem, with at most `cap` coordinates.
    pub fn torus_problem(&self, cap: usize) -> Result<TorusProblem, ProblemFileError> {
        let ProblemSpec::Torus(t) = &self.spec else {
            return Err(ProblemFileError::Semantic("not a torus problem".into()));
        };
        let ip = match &t.gram {
            Some(g) => InnerProduct::new(g.clone()).map_err(|e| ProblemFileError::Semantic(e.to_string()))?,
            None => InnerProduct::identity(t.dim),
        };
        let mut p = TorusProblem::with_cap(t.weights.clone(), ip, cap)?;
        if let Some(tw) = &t.twist {
            p = p.with_twist(tw.clone())?;
        }
        if let Some(sets) = &t.allowed_supports {
            let supports = sets
                .iter()
                .map(|ix| {
                    SupportClass::from_indices(ix)
                        .filter(|s| s.iter().all(|i| i < t.weights.len()))
                        .ok_or_else(|| ProblemFileError::Semantic(format!("invalid support {ix:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            p = p.with_allowed_supports(supports)?;
        }
        Ok(p)
    }

    pub fn lambda(&self) -> Option<&QVector> {
        match &self.spec {
            ProblemSpec::Torus(t) => t.lambda.as_ref(),
            ProblemSpec::P1n(_) => None,
        }
    }

    pub fn p1n_oracle(&self) -> Result<P1nNode, ProblemFileError> {
        match &self.spec {
            ProblemSpec::P1n(n) => p1n::as_oracle(*n).map_err(|e| ProblemFileError::Semantic(e.to_string())),
            ProblemSpec::Torus(_) => Err(ProblemFileError::Semantic("not a p1n problem".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_errors() {
        let text = "format_version = 1\ndim = 2\nweights = [[\"1/2\", \"-1\"], [\"0\", \"2/4\"]]\n\
                    gram = [[\"2\", \"1\"], [\"1\", \"2\"]]\ntwist = [\"1/3\", \"0\"]\nallowed_supports = [[0], [0, 1]]\n";
        let f = ProblemFile::parse(text).unwrap();
        let out = f.to_toml();
        assert_eq!(ProblemFile::parse(&out).unwrap(), f);
        assert_eq!(ProblemFile::parse(&out).unwrap().to_toml(), out);
        let p = ProblemFile::parse("format_version = 1\np1n = 6\n").unwrap();
        assert_eq!(p.spec, ProblemSpec::P1n(6));
        assert_eq!(ProblemFile::parse(&p.to_toml()).unwrap(), p);

        let bad = ProblemFile::parse("format_version = 1\ndim = 1\nweights = [[\"1/0\"]]\n").unwrap_err();
        assert_eq!(bad.exit_code(), 2);
        let mismatch = ProblemFile::parse("format_version = 1\ndim = 2\nweights = [[\"1\"]]\n").unwrap_err();
        assert_eq!(mismatch.exit_code(), 3);
        assert_eq!(ProblemFile::parse("dim = 1").unwrap_err().exit_code(), 2);
        assert_eq!(ProblemFile::parse("format_version = 1\ncolour = 3").unwrap_err().exit_code(), 2);
    }
}
