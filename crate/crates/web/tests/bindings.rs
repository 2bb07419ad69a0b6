use gitstrata_web::{hilbert_mumford, p1n_classify, refine};
use serde_json::Value;

const SEGMENT: &str = "format_version = 1\ndim = 1\nweights = [[\"-1\"], [\"1\"]]\n";
const PLANE: &str = "format_version = 1\ndim = 2\nweights = [[\"1\", \"0\"], [\"0\", \"1\"], [\"2\", \"2\"]]\n";

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn hilbert_mumford_reports_geometry() {
    let v = parse(&hilbert_mumford(SEGMENT, "0,1"));
    assert_eq!(v["report"]["result"]["status"], "stable");
    assert_eq!(v["geometry"]["beta"], serde_json::json!(["0"]));
    let v = parse(&hilbert_mumford(PLANE, "0,1"));
    assert_eq!(v["report"]["result"]["status"], "unstable");
    // closest point of the segment from (1,0) to (0,1) is its midpoint
    assert_eq!(v["geometry"]["beta"], serde_json::json!(["1/2", "1/2"]));
    assert_eq!(v["geometry"]["norm_sq"], "1/2");
    assert_eq!(v["geometry"]["weights"].as_array().unwrap().len(), 3);
}

#[test]
fn errors_carry_exit_codes() {
    assert_eq!(parse(&hilbert_mumford("dim = ", "0"))["exit_code"], 2);
    assert_eq!(parse(&hilbert_mumford(SEGMENT, "7"))["exit_code"], 3);
    assert_eq!(parse(&p1n_classify(6, "3+2"))["exit_code"], 3);
}

#[test]
fn refine_and_classify() {
    let v = parse(&refine("p1n:6"));
    assert_eq!(v["report"]["result"]["leaves"].as_array().unwrap().len(), 7);
    assert!(v["dot"].as_str().unwrap().starts_with("digraph"));
    let v = parse(&refine(SEGMENT));
    assert_eq!(v["report"]["outcome"], "ok");
    let v = parse(&p1n_classify(6, "3+2+1"));
    assert_eq!(v["result"]["label"], "S_0^{3,<3}");
}
