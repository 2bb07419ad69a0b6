//! `gitstrata`: command-line front end for the stratification engines.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse error,
//! 3 semantic error, 4 unsupported blow-up (partial tree reported).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gitstrata::problem_file::{ProblemFile, ProblemFileError, ProblemSpec, TorusSpec};
use gitstrata::rational::rat;
use gitstrata::refine::EngineConfig;
use gitstrata::report::{self, Outcome, P1nInput, Report};
use gitstrata::torusgit::DEFAULT_CAP;
use gitstrata::QVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(name = "gitstrata", version, about = "Exact HKKN and refined GIT stratifications")]
struct Cli {
    /// Output rendering.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    /// Refuse torus problems with more than N supports.
    #[arg(long, value_name = "N", global = true)]
    max_supports: Option<usize>,
    /// Bound on the case recursion inside one refinement node.
    #[arg(long, value_name = "N", global = true)]
    depth_cap: Option<usize>,
    /// Seed for randomized commands.
    #[arg(long, value_name = "N", default_value_t = 0, global = true)]
    seed: u64,
    /// Worker threads for the engines; output does not depend on it.
    #[arg(long, value_name = "N", default_value_t = 1, global = true)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Hilbert-Mumford test of one support, with an exact certificate.
    Hm {
        file: PathBuf,
        /// Comma-separated coordinate indices, e.g. `0,1`.
        support: String,
    },
    /// HKKN stratification with the closure-order check.
    Strata {
        file: PathBuf,
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
    /// Refined stratification of a problem file or `p1n:n`.
    Refine {
        target: String,
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
    /// Configurations of n points on the projective line.
    P1n {
        #[command(subcommand)]
        op: P1nOp,
    },
    /// Minimal stable set and adapted window for a one-parameter subgroup.
    Lambda {
        file: PathBuf,
        /// Comma-separated rationals; defaults to the file's `lambda`.
        lambda: Option<String>,
    },
    /// Refine and stratify random torus problems, checking every invariant.
    Check {
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

#[derive(Subcommand)]
enum P1nOp {
    /// Stratum of a partition (`3+2+1`) or point list (`1:0 1:0 0:1 ...`).
    Classify { n: usize, input: String },
    /// All refined strata in display order.
    Enumerate { n: usize },
    /// Connected components of a stratum, e.g. `S_0^{3,3}` or `S_1`.
    Components { n: usize, label: String },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Problem(#[from] ProblemFileError),
    #[error("cannot read {0}: {1}")]
    Read(PathBuf, std::io::Error),
    #[error("cannot write {0}: {1}")]
    Write(PathBuf, std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Problem(e) => e.exit_code() as u8,
            CliError::Read(..) => 2,
            CliError::Write(..) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(r) => {
            match cli.format {
                Format::Human => print!("{}", r.to_human()),
                Format::Machine => print!("{}", r.to_machine()),
            }
            ExitCode::from(r.outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("gitstrata: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn torus_cap() -> usize {
    std::env::var("GITSTRATA_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_CAP)
}

fn load(path: &Path) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Read(path.to_owned(), e))?;
    Ok(ProblemFile::parse(&text)?)
}

fn semantic(msg: impl Into<String>) -> CliError {
    ProblemFileError::Semantic(msg.into()).into()
}

fn check_supports(cli: &Cli, file: &ProblemFile) -> Result<(), CliError> {
    let (Some(max), ProblemSpec::Torus(t)) = (cli.max_supports, &file.spec) else {
        return Ok(());
    };
    let count = match &t.allowed_supports {
        Some(s) => s.len(),
        None => (1usize << t.weights.len().min(63)) - 1,
    };
    if count > max {
        return Err(semantic(format!("{count} supports exceed --max-supports {max}")));
    }
    Ok(())
}

fn write_dot(path: &Option<PathBuf>, dot: &str) -> Result<(), CliError> {
    if let Some(p) = path {
        std::fs::write(p, dot).map_err(|e| CliError::Write(p.clone(), e))?;
    }
    Ok(())
}

fn engine_config(cli: &Cli) -> EngineConfig {
    let mut cfg = EngineConfig { workers: cli.workers.max(1), ..Default::default() };
    if let Some(d) = cli.depth_cap {
        cfg.depth_cap = d;
    }
    cfg
}

fn parse_list<T>(text: &str, item: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| item(s.trim()).ok_or_else(|| ProblemFileError::Parse(format!("bad list entry {s:?}")).into()))
        .collect()
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let cap = torus_cap();
    match &cli.command {
        Command::Hm { file, support } => {
            let f = load(file)?;
            check_supports(cli, &f)?;
            let p = f.torus_problem(cap)?;
            let ix = parse_list(support, |s| s.parse::<usize>().ok())?;
            Ok(report::hm_report(&f, &p, &ix)?)
        }
        Command::Strata { file, dot } => {
            let f = load(file)?;
            check_supports(cli, &f)?;
            let p = f.torus_problem(cap)?;
            let (r, d) = report::strata_report(&f, &p, cli.workers.max(1))?;
            write_dot(dot, &d)?;
            Ok(r)
        }
        Command::Refine { target, dot } => {
            let f = match target.strip_prefix("p1n:") {
                Some(n) => ProblemFile::p1n(
                    n.parse()
                        .map_err(|_| ProblemFileError::Parse(format!("bad p1n size {n:?}")))?,
                ),
                None => load(Path::new(target))?,
            };
            check_supports(cli, &f)?;
            let (r, d) = report::refine_report(&f, &engine_config(cli), cap)?;
            write_dot(dot, &d)?;
            Ok(r)
        }
        Command::P1n { op } => Ok(match op {
            P1nOp::Classify { n, input } => report::p1n_classify_report(*n, &P1nInput::parse(input)?)?,
            P1nOp::Enumerate { n } => report::p1n_enumerate_report(*n)?,
            P1nOp::Components { n, label } => report::p1n_components_report(*n, label)?,
        }),
        Command::Lambda { file, lambda } => {
            let f = load(file)?;
            check_supports(cli, &f)?;
            let p = f.torus_problem(cap)?;
            let l = match lambda {
                Some(text) => QVector::new(parse_list(text, |s| s.parse().ok())?),
                None => f
                    .lambda()
                    .cloned()
                    .ok_or_else(|| semantic("no lambda given and the file has none"))?,
            };
            Ok(report::lambda_report(&f, &p, &l)?)
        }
        Command::Check { count } => check(cli, *count),
    }
}

fn random_spec(rng: &mut ChaCha8Rng) -> TorusSpec {
    let dim = rng.gen_range(1..=3);
    let n = rng.gen_range(2..=6);
    let weights = (0..n)
        .map(|_| QVector::new((0..dim).map(|_| rat(rng.gen_range(-3..=3), 1)).collect()))
        .collect();
    TorusSpec { dim, weights, gram: None, lambda: None, twist: None, allowed_supports: None }
}

fn check(cli: &Cli, count: usize) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let cfg = engine_config(cli);
    let (mut passed, mut partial) = (0, 0);
    let mut failures = Vec::new();
    for _ in 0..count {
        let f = ProblemFile::torus(random_spec(&mut rng));
        let p = f.torus_problem(DEFAULT_CAP)?;
        let (strata, _) = report::strata_report(&f, &p, cfg.workers)?;
        let (refine, _) = report::refine_report(&f, &cfg, DEFAULT_CAP)?;
        match (strata.outcome, refine.outcome) {
            (Outcome::Ok, Outcome::Ok) => passed += 1,
            (Outcome::Ok, Outcome::UnsupportedBlowup) => partial += 1,
            _ => failures.push(f.to_toml()),
        }
    }
    let mut r = Report::new(
        "check",
        None,
        json!({
            "seed": cli.seed,
            "count": count,
            "passed": passed,
            "partial_unsupported_blowup": partial,
            "failures": failures,
        }),
    );
    if !failures.is_empty() {
        r.outcome = Outcome::VerificationFailed;
    }
    Ok(r)
}
