//! `ballcover`: build coverings of the unit ball, audit them, and plot them.
//!
//! Exit status is 0 on success, 1 when an audit fails, and 2 for usage or
//! file errors.

mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use ballcover::*;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "ballcover", version, about = "Coverings of normed-space balls by congruent sets")]
struct Cli {
    /// Worker threads for sampling audits. Never changes the output.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Include wall-clock `runtime_ms` in reports.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Slab,
    Universal,
    Ommatidium,
    Halfball,
}

#[derive(Subcommand)]
enum Command {
    /// Build a covering and write it as JSON.
    Construct {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        dim: usize,
        /// Number of slabs (slab).
        #[arg(long)]
        n: Option<usize>,
        /// Net angle in radians (ommatidium).
        #[arg(long)]
        beta: Option<f64>,
        /// Number of outer balls (universal).
        #[arg(long)]
        k: Option<usize>,
        /// Norm exponent, a number ≥ 1 or `inf` (universal).
        #[arg(long, default_value = "2")]
        p: String,
        /// Required for the randomized kinds.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Coverage audit, plus the congruence audit when witnesses are present.
    Verify {
        file: PathBuf,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = MEMBER_TOL)]
        tol: f64,
        /// Transported points per set in the congruence audit.
        #[arg(long, default_value_t = 1000)]
        congruence_samples: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Classify the centre against the interior of every set.
    ClassifyCenter {
        file: PathBuf,
        #[arg(long, default_value_t = INTERIOR_EPS)]
        eps: f64,
        #[arg(long, default_value_t = MEMBER_TOL)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// All-or-none audit for the centre.
    Dichotomy {
        file: PathBuf,
        #[arg(long, default_value_t = INTERIOR_EPS)]
        eps: f64,
        #[arg(long, default_value_t = MEMBER_TOL)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Search the unit sphere for a set containing an antipodal pair.
    Antipodal {
        file: PathBuf,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        refine: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Look for a flat segment on the unit sphere of `ℓp`.
    Ncs {
        /// A number ≥ 1 or `inf`.
        #[arg(long)]
        p: String,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Evaluate the parallelogram-type inequality in the plane with the ℓ_{3/2} norm.
    Counterexample {
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Render a planar covering as SVG.
    Plot {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = MEMBER_TOL)]
        tol: f64,
    },
}

enum Failure {
    /// Exit 1.
    Audit(String),
    /// Exit 2.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CoverageGap { .. } | Error::ResidualAboveTolerance { .. } => Failure::Audit(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Audit(msg)) => {
            eprintln!("audit failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn parse_space(p: &str, dim: usize) -> std::result::Result<Space, Failure> {
    let norm = match p {
        "inf" | "infinity" => NormKind::Linf,
        _ => {
            let p: f64 = p.parse().map_err(|_| Failure::Usage(format!("invalid exponent {p:?}")))?;
            NormKind::lp(p)?
        }
    };
    Ok(Space::new(dim, norm)?)
}

fn need<T>(v: Option<T>, flag: &str, kind: &str) -> std::result::Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for --kind {kind}")))
}

fn write_file(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Writes `value` as pretty JSON to `path`, or to stdout for `-`.
fn emit_json(path: &Option<PathBuf>, value: &Value) -> std::result::Result<(), Failure> {
    let Some(path) = path else { return Ok(()) };
    let text = serde_json::to_string_pretty(value).expect("json values serialize") + "\n";
    if path.as_os_str() == "-" {
        print!("{text}");
        Ok(())
    } else {
        write_file(path, &text)
    }
}

fn stamp(mut r: AuditReport, started: Instant, timing: bool) -> AuditReport {
    r.runtime_ms = timing.then(|| started.elapsed().as_millis() as u64);
    r
}

fn summary(r: &AuditReport) -> String {
    let mut s = format!(
        "{}: {} (samples {}, failures {}, residual_max {:e})",
        r.kind, r.verdict, r.samples, r.failures, r.residual_max
    );
    if let Some(d) = &r.detail {
        s.push_str(&format!(" [{d}]"));
    }
    s
}

fn run(cli: &Cli) -> Outcome {
    let workers = cli.workers.max(1);
    match &cli.command {
        Command::Construct { kind, dim, n, beta, k, p, seed, out } => {
            let cov = match kind {
                Kind::Slab => slab_covering(need(*n, "n", "slab")?, *dim)?,
                Kind::Halfball => halfball_covering(*dim)?,
                Kind::Universal => {
                    let space = parse_space(p, *dim)?;
                    universal_covering(&space, need(*k, "k", "universal")?, need(*seed, "seed", "universal")?)?
                }
                Kind::Ommatidium => {
                    ommatidium_covering(*dim, need(*beta, "beta", "ommatidium")?, need(*seed, "seed", "ommatidium")?)?
                }
            };
            cov.save(out)?;
            println!("{} sets ({}) written to {}", cov.len(), cov.meta.constructor, out.display());
            Ok(true)
        }
        Command::Verify { file, samples, seed, tol, congruence_samples, json } => {
            let cov = Covering::load(file)?;
            let opts = AuditOptions::new(*samples, *seed).tol(*tol).workers(workers);
            let started = Instant::now();
            let coverage = stamp(check_coverage(&cov, &opts)?, started, cli.timing);
            println!("{}", summary(&coverage));
            let congruence = match &cov.witnesses {
                Some(_) => {
                    let started = Instant::now();
                    let copts = AuditOptions { samples: *congruence_samples, ..opts };
                    let r = stamp(check_congruence(&cov, &copts)?, started, cli.timing);
                    println!("{}", summary(&r));
                    Some(r)
                }
                None => None,
            };
            let ok = coverage.passed() && congruence.as_ref().is_none_or(AuditReport::passed);
            emit_json(json, &json!({ "coverage": coverage, "congruence": congruence }))?;
            Ok(ok)
        }
        Command::ClassifyCenter { file, eps, tol, json } => {
            let cov = Covering::load(file)?;
            let c = classify_center(&cov, *eps, *tol)?;
            println!("{}", c.classification);
            if !c.boundary.is_empty() {
                println!("boundary (neither certificate): {:?}", c.boundary);
            }
            emit_json(json, &serde_json::to_value(&c).expect("reports serialize"))?;
            Ok(true)
        }
        Command::Dichotomy { file, eps, tol, json } => {
            let cov = Covering::load(file)?;
            let started = Instant::now();
            let r = stamp(dichotomy_audit(&cov, *eps, *tol, workers)?, started, cli.timing);
            println!("{}", summary(&r));
            emit_json(json, &serde_json::to_value(&r).expect("reports serialize"))?;
            Ok(r.passed())
        }
        Command::Antipodal { file, grid, refine, tol, radius, json } => {
            let cov = Covering::load(file)?;
            let cert = antipodal_search(&cov.space, &cov.sets, *radius, *grid, *refine, *tol)?;
            println!("set {} contains x = {} and -x (residual {:e})", cov.label(cert.index), cert.x, cert.residual);
            let mut value = serde_json::to_value(&cert).expect("certificates serialize");
            value["label"] = json!(cov.label(cert.index));
            emit_json(json, &value)?;
            Ok(true)
        }
        Command::Ncs { p, dim, samples, seed, json } => {
            let space = parse_space(p, *dim)?;
            let started = Instant::now();
            let r = stamp(ncs_audit(&space, *samples, *seed, workers)?, started, cli.timing);
            println!("{}", summary(&r));
            emit_json(json, &serde_json::to_value(&r).expect("reports serialize"))?;
            Ok(r.passed())
        }
        Command::Counterexample { json } => {
            let c = counterexample_r2_32();
            println!("lhs={} rhs={}", c.lhs, c.rhs);
            emit_json(json, &json!({ "lhs": c.lhs, "rhs": c.rhs, "lhs_exceeds_rhs": c.holds() }))?;
            Ok(c.holds())
        }
        Command::Plot { file, out, tol } => {
            let cov = Covering::load(file)?;
            let svg = plot::render(&cov, *tol)?;
            write_file(out, &svg)?;
            println!("{} sets plotted to {}", cov.len(), out.display());
            Ok(true)
        }
    }
}
