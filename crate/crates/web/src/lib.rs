//! Browser bindings: every function takes and returns plain strings, with
//! JSON results. Errors come back as `{"error": ..., "exit_code": ...}`.

use gitstrata::hkkn;
use gitstrata::problem_file::{ProblemFile, ProblemFileError};
use gitstrata::refine::EngineConfig;
use gitstrata::report::{self, P1nInput, Report};
use gitstrata::torusgit::{SupportClass, DEFAULT_CAP};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn render(r: Result<Value, ProblemFileError>) -> String {
    let v = r.unwrap_or_else(|e| json!({ "error": e.to_string(), "exit_code": e.exit_code() }));
    serde_json::to_string(&v).expect("plain JSON")
}

fn value(r: Report) -> Value {
    serde_json::to_value(r).expect("plain JSON")
}

fn parse_support(text: &str) -> Result<Vec<usize>, ProblemFileError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| ProblemFileError::Parse(format!("bad index {s:?}"))))
        .collect()
}

/// Hilbert-Mumford test of a support, plus the data needed to draw it:
/// every effective weight and the minimal-norm point of the support's hull.
#[wasm_bindgen]
pub fn hilbert_mumford(problem: &str, support: &str) -> String {
    render((|| {
        let f = ProblemFile::parse(problem)?;
        let p = f.torus_problem(DEFAULT_CAP)?;
        let ix = parse_support(support)?;
        let r = report::hm_report(&f, &p, &ix)?;
        let s = SupportClass::from_indices(&ix).ok_or_else(|| ProblemFileError::Semantic("empty support".into()))?;
        let idx = hkkn::index_of_support(&p, s)?;
        let weights: Vec<_> = (0..p.n_indices()).map(|i| p.effective_weight(i)).collect();
        Ok(json!({
            "report": value(r),
            "geometry": {
                "dim": p.dim(),
                "weights": weights,
                "support": ix,
                "beta": idx.beta,
                "norm_sq": idx.norm_sq.to_string(),
            },
        }))
    })())
}

/// Refined stratification of a problem file, or of `p1n:n`.
#[wasm_bindgen]
pub fn refine(target: &str) -> String {
    render((|| {
        let f = match target.trim().strip_prefix("p1n:") {
            Some(n) => ProblemFile::p1n(n.trim().parse().map_err(|_| ProblemFileError::Parse(format!("bad size {n:?}")))?),
            None => ProblemFile::parse(target)?,
        };
        let (r, dot) = report::refine_report(&f, &EngineConfig::default(), DEFAULT_CAP)?;
        Ok(json!({ "report": value(r), "dot": dot }))
    })())
}

/// Stratum of n points on the projective line, given as a partition or point list.
#[wasm_bindgen]
pub fn p1n_classify(n: usize, input: &str) -> String {
    render(P1nInput::parse(input).and_then(|i| report::p1n_classify_report(n, &i)).map(value))
}
