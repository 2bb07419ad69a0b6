//! Command reports shared by the command-line tool and the browser demo.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::exactgeom::HullCertificate;
use crate::hkkn;
use crate::p1n::{self, LabelKind, Partition, StratumLabel};
use crate::problem_file::{ProblemFile, ProblemFileError, ProblemSpec};
use crate::rational::{Rational, QVector};
use crate::refine::{self, check_theorem_1_1, EngineConfig, GitProblemOracle, StratTree, TorusNode};
use crate::torusgit::{SupportClass, TorusProblem};
use num_traits::{One, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    VerificationFailed,
    UnsupportedBlowup,
}

impl Outcome {
    /// Process exit code.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::VerificationFailed => 1,
            Outcome::UnsupportedBlowup => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemDigest {
    pub kind: String,
    /// SHA-256 of the canonical problem file.
    pub sha256: String,
}

impl ProblemDigest {
    pub fn of(file: &ProblemFile) -> Self {
        let kind = match &file.spec {
            ProblemSpec::P1n(n) => format!("p1n:{n}"),
            ProblemSpec::Torus(t) => format!("torus d={} n={}", t.dim, t.weights.len()),
        };
        let hash = Sha256::digest(file.to_toml().as_bytes());
        let sha256 = hash.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        ProblemDigest { kind, sha256 }
    }
}

/// One command result. The machine rendering is JSON; the human rendering is
/// an indented outline of the same value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemDigest>,
    pub outcome: Outcome,
    pub result: Value,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: impl Into<String>, problem: Option<&ProblemFile>, result: Value) -> Self {
        Report {
            command: command.into(),
            problem: problem.map(ProblemDigest::of),
            outcome: Outcome::Ok,
            result,
            notes: Vec::new(),
        }
    }

    pub fn to_machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports are plain JSON");
        s.push('\n');
        s
    }

    pub fn to_human(&self) -> String {
        let value = serde_json::to_value(self).expect("reports are plain JSON");
        let mut out = String::new();
        render(&value, 0, &mut out);
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(format!("[{}]", a.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")))
        }
        Value::Array(a) if a.iter().all(|x| x.as_array().is_some_and(|y| y.iter().all(|z| !z.is_object() && !z.is_array()))) => {
            Some(format!("[{}]", a.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar(x) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}{k}: {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render(x, indent + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                match scalar(x) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}- {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}-");
                        render(x, indent + 1, out);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other).unwrap_or_default());
        }
    }
}

fn semantic(e: impl ToString) -> ProblemFileError {
    ProblemFileError::Semantic(e.to_string())
}

fn strs<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

/// Independent check of a hull certificate against the effective weights.
fn certificate_holds(weights: &[QVector], cert: &HullCertificate) -> bool {
    match cert {
        HullCertificate::Barycentric(c) => {
            if c.len() != weights.len() || c.iter().any(|x| *x < Rational::zero()) {
                return false;
            }
            let sum: Rational = c.iter().sum();
            let d = weights.first().map_or(0, QVector::dim);
            let zero = (0..d).all(|k| {
                let s: Rational = c.iter().zip(weights).map(|(a, w)| a * &w.coords()[k]).sum();
                s.is_zero()
            });
            sum.is_one() && zero
        }
        HullCertificate::Separating(f) => weights.iter().all(|w| f.pairing(w) > Rational::zero()),
    }
}

/// Hilbert–Mumford test of one support.
pub fn hm_report(file: &ProblemFile, problem: &TorusProblem, support: &[usize]) -> Result<Report, ProblemFileError> {
    let s = SupportClass::from_indices(support)
        .filter(|s| s.iter().all(|i| i < problem.n_indices()))
        .ok_or_else(|| semantic(format!("support {support:?} is empty or out of range")))?;
    let (position, cert) = problem.certificate(s).map_err(semantic)?;
    let status = if problem.stable(s).map_err(semantic)? {
        "stable"
    } else if problem.semistable(s).map_err(semantic)? {
        "semistable"
    } else {
        "unstable"
    };
    let weights = problem.effective_weights(s);
    let verified = certificate_holds(&weights, &cert);
    let certificate = match &cert {
        HullCertificate::Barycentric(c) => json!({ "kind": "barycentric", "coefficients": strs(c) }),
        HullCertificate::Separating(f) => json!({ "kind": "separating", "functional": f.to_strings() }),
    };
    let mut r = Report::new(
        format!("hm {s}"),
        Some(file),
        json!({
            "support": s,
            "status": status,
            "position": position,
            "certificate": certificate,
            "certificate_verified": verified,
        }),
    );
    if !verified {
        r.outcome = Outcome::VerificationFailed;
    }
    Ok(r)
}

/// Instability stratification with closure-order check.
pub fn strata_report(file: &ProblemFile, problem: &TorusProblem, workers: usize) -> Result<(Report, String), ProblemFileError> {
    let strat = hkkn::stratify_with_workers(problem, workers).map_err(semantic)?;
    let violations = hkkn::check_closure_order(problem, &strat);
    let mut semistable = Vec::new();
    for s in problem.supports() {
        if problem.semistable(s).map_err(semantic)? {
            semistable.push(s);
        }
    }
    let zero: Vec<SupportClass> = strat
        .strata
        .iter()
        .find(|(k, _)| k.is_zero())
        .map(|(_, v)| v.clone())
        .unwrap_or_default();
    let zero_ok = zero.iter().collect::<BTreeSet<_>>() == semistable.iter().collect::<BTreeSet<_>>();
    let strata: Vec<Value> = strat
        .strata
        .iter()
        .map(|(k, v)| {
            json!({
                "beta": k.beta,
                "norm_sq": k.norm_sq.to_string(),
                "supports": v,
                "components": hkkn::component_count(v),
            })
        })
        .collect();
    let mut r = Report::new(
        "strata",
        Some(file),
        json!({
            "strata": strata,
            "closure_violations": violations,
            "zero_stratum_is_semistable_locus": zero_ok,
        }),
    );
    if !violations.is_empty() || !zero_ok {
        r.outcome = Outcome::VerificationFailed;
    }
    Ok((r, hkkn::to_dot(&strat)))
}

fn tree_value<P: GitProblemOracle>(p: &P, tree: &StratTree<P::Cell>) -> (Value, Outcome) {
    let theorem = check_theorem_1_1(p, tree);
    let leaves: Vec<Value> = tree
        .leaves
        .iter()
        .map(|l| {
            json!({
                "index": l.index.to_string(),
                "label": l.label,
                "cases": l.cases,
                "cells": strs(&l.cells),
                "stab_dim": l.stab_dim,
                "quotient": l.quotient,
            })
        })
        .collect();
    let nodes: Vec<Value> = tree
        .nodes
        .iter()
        .map(|n| {
            json!({
                "path": n.path,
                "case": n.case,
                "problem": n.problem,
                "cells": n.cells,
                "trace": n.trace.iter().map(|s| format!("{}{} {}", "  ".repeat(s.depth), s.case, s.detail)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let frontier: Vec<Value> = tree
        .frontier
        .iter()
        .map(|f| json!({ "path": f.path, "reason": f.reason, "cells": strs(&f.cells) }))
        .collect();
    let outcome = if !tree.is_complete() {
        Outcome::UnsupportedBlowup
    } else if !theorem.passed() {
        Outcome::VerificationFailed
    } else {
        Outcome::Ok
    };
    let value = json!({
        "leaves": leaves,
        "nodes": nodes,
        "frontier": frontier,
        "checks": theorem,
    });
    (value, outcome)
}

/// Refined stratification of a problem, with the structural checks. Returns the DOT rendering too.
pub fn refine_report(file: &ProblemFile, cfg: &EngineConfig, torus_cap: usize) -> Result<(Report, String), ProblemFileError> {
    match &file.spec {
        ProblemSpec::P1n(n) => {
            let root = file.p1n_oracle()?;
            let (mut r, dot) = run_refine(file, &root, cfg)?;
            if *n <= p1n::PATTERN_CAP {
                let counts = p1n::component_counts(*n).map_err(semantic)?;
                let comps: Vec<Value> = counts
                    .iter()
                    .map(|(l, c)| json!({ "label": l, "count": c, "source": count_source(l) }))
                    .collect();
                if let Value::Object(m) = &mut r.result {
                    m.insert("components".into(), Value::Array(comps));
                }
                r.notes.push("component counts marked derived come from the labelled-pattern oracle".into());
            }
            Ok((r, dot))
        }
        ProblemSpec::Torus(_) => {
            let problem = file.torus_problem(torus_cap)?;
            let root = TorusNode::root(problem, None).map_err(semantic)?;
            run_refine(file, &root, cfg)
        }
    }
}

fn run_refine<P: GitProblemOracle>(file: &ProblemFile, root: &P, cfg: &EngineConfig) -> Result<(Report, String), ProblemFileError> {
    let mut r = Report::new("refine", Some(file), Value::Null);
    match refine::stratify(root, cfg) {
        Ok(tree) => {
            let (value, outcome) = tree_value(root, &tree);
            r.result = value;
            r.outcome = outcome;
            if outcome == Outcome::UnsupportedBlowup {
                r.notes.push("UNSUPPORTED_BLOWUP: the tree is partial; unresolved subsets are listed under frontier".into());
            }
            Ok((r, refine::to_dot(&tree)))
        }
        Err(e) => {
            r.result = json!({ "error": e.to_string() });
            r.outcome = Outcome::VerificationFailed;
            Ok((r, String::new()))
        }
    }
}

fn count_source(l: &StratumLabel) -> p1n::CountSource {
    match l.kind {
        LabelKind::SNMinus2 | LabelKind::SN => p1n::CountSource::Paper,
        _ => p1n::CountSource::Derived,
    }
}

/// Input for `p1n classify`: a partition or a list of points.
pub enum P1nInput {
    Partition(Partition),
    Points(Vec<(Rational, Rational)>),
}

impl P1nInput {
    /// `4+1+1` or space/comma separated points `a:b`.
    pub fn parse(text: &str) -> Result<Self, ProblemFileError> {
        if text.contains(':') {
            let pts = text
                .split([',', ' '])
                .filter(|t| !t.is_empty())
                .map(p1n::parse_point)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ProblemFileError::Parse(e.to_string()))?;
            Ok(P1nInput::Points(pts))
        } else {
            text.parse()
                .map(P1nInput::Partition)
                .map_err(|e: p1n::P1nError| ProblemFileError::Parse(e.to_string()))
        }
    }
}

pub fn p1n_classify_report(n: usize, input: &P1nInput) -> Result<Report, ProblemFileError> {
    let sig = match input {
        P1nInput::Partition(p) => p.clone(),
        P1nInput::Points(pts) => p1n::signature_of_points(pts).map_err(semantic)?,
    };
    if sig.n() != n {
        return Err(semantic(format!("signature {sig} has {} points, expected {n}", sig.n())));
    }
    let label = p1n::classify(&sig);
    let mut result = json!({
        "n": n,
        "signature": sig,
        "label": label,
        "hkkn_index": p1n::hkkn_index(&sig),
    });
    if n <= p1n::PATTERN_CAP {
        let (count, source) = p1n::component_count(n, &label).map_err(semantic)?;
        result["components"] = json!({ "count": count, "source": source });
    }
    Ok(Report::new(format!("p1n classify {n} {sig}"), None, result))
}

pub fn p1n_enumerate_report(n: usize) -> Result<Report, ProblemFileError> {
    let labels = p1n::enumerate_strata(n).map_err(semantic)?;
    let rows: Vec<Value> = labels
        .iter()
        .map(|l| {
            json!({
                "label": l,
                "hkkn_index": l.hkkn_index(),
                "signatures": p1n::signatures_of(l),
            })
        })
        .collect();
    Ok(Report::new(format!("p1n enumerate {n}"), None, json!({ "n": n, "strata": rows })))
}

/// Components of a refined stratum, or of a whole HKKN stratum given as `S_β`.
pub fn p1n_components_report(n: usize, label: &str) -> Result<Report, ProblemFileError> {
    if n > p1n::PATTERN_CAP {
        return Err(semantic(format!("component counting supports n <= {}", p1n::PATTERN_CAP)));
    }
    let command = format!("p1n components {n} {label}");
    if let Ok(l) = p1n::parse_label(n, label) {
        let (count, source) = p1n::component_count(n, &l).map_err(semantic)?;
        return Ok(Report::new(
            command,
            None,
            json!({ "n": n, "label": l, "count": count, "source": source }),
        ));
    }
    let beta: usize = label
        .strip_prefix("S_")
        .map(|b| b.trim_matches(['{', '}']))
        .and_then(|b| b.parse().ok())
        .ok_or_else(|| semantic(format!("unknown stratum label {label} for n = {n}")))?;
    if !(beta + n).is_multiple_of(2) || beta == 0 || beta > n {
        return Err(semantic(format!("S_{beta} is not an unstable stratum for n = {n}")));
    }
    let r = (beta + n) / 2;
    let count = p1n::family_component_count(n, r).map_err(semantic)?;
    Ok(Report::new(
        command,
        None,
        json!({
            "n": n,
            "label": format!("S_{beta}"),
            "r": r,
            "count": count,
            "source": p1n::CountSource::Paper,
        }),
    ))
}

/// λ-weights, `Z_min`, `X⁰_min` and adaptedness for a one-parameter subgroup.
pub fn lambda_report(file: &ProblemFile, problem: &TorusProblem, lambda: &QVector) -> Result<Report, ProblemFileError> {
    let weights = (0..problem.n_indices())
        .map(|i| problem.lambda_weight(lambda, i).map(|w| w.to_string()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(semantic)?;
    let zmin = problem.z_min(lambda).map_err(semantic)?;
    let mut result = json!({
        "lambda": lambda,
        "weights": weights,
        "z_min": zmin.supports,
        "lambda_trivial": zmin.lambda_trivial,
    });
    if !zmin.lambda_trivial {
        let x0: Vec<Value> = problem
            .x0_min(lambda)
            .map_err(semantic)?
            .into_iter()
            .map(|(s, r)| json!({ "support": s, "limit": r }))
            .collect();
        let (w0, w1) = problem.adapted_window(lambda).map_err(semantic)?;
        result["x0_min"] = Value::Array(x0);
        result["window"] = json!([w0.to_string(), w1.to_string()]);
        result["adapted"] = json!(problem.is_adapted(lambda).map_err(semantic)?);
    }
    Ok(Report::new("lambda", Some(file), result))
}
