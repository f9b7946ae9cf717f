//! `cyclecd`: reproduce the coordinate-descent comparison experiments.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical-check failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cyclecd::harness::{self, CsvOutput, RunManifest};
use cyclecd::problems::{self, Distribution, EnsembleSpec};
use cyclecd::{Error, Method, QuadraticProblem};

#[derive(Parser)]
#[command(
    name = "cyclecd",
    version,
    about = "Cyclic vs randomized coordinate descent on quadratics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// 1 − ρ of each method's epoch map on the constant-off-diagonal family.
    Table1 {
        #[arg(long, value_delimiter = ',', default_values_t = [20, 100, 1000])]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.8, 0.99])]
        c: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Per-epoch relative errors of each method from a random start.
    Trajectory {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_delimiter = ',', default_value = "CCD,GD,RCD,RPCD,CCGD")]
        methods: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Cyclic CD from the worst start against the lower-bound envelope.
    Lowerbound {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 0.999)]
        c: f64,
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Mean trajectories on a random A = UᵀU, plus a metrics sidecar.
    Randbench {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[command(flatten)]
        dist: DistArgs,
        /// Skip rescaling A to unit diagonal.
        #[arg(long)]
        raw: bool,
        #[arg(long, value_delimiter = ',', default_value = "CCD,GD,RCD,RPCD,CCGD")]
        methods: Vec<String>,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Rate factors, certificate, norm bounds and iteration counts.
    Bounds {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the oracle cross-checks.
    Verify,
}

#[derive(Args)]
struct OutArgs {
    /// Output CSV path; stdout when omitted. A manifest is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A_c(n, c) by default, or a matrix file.
#[derive(Args)]
struct ProblemArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0.8)]
    c: f64,
    /// Problem file: "n", n matrix rows, one row for b.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    Gaussian,
    Uniform,
    Lognormal,
}

#[derive(Args)]
struct DistArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    dist: DistKind,
    /// Gaussian mean, uniform midpoint, or lognormal mu. Default 0, 0.5, 0.
    #[arg(long)]
    mean: Option<f64>,
    /// Gaussian variance, uniform width, or lognormal sigma.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

impl DistArgs {
    fn distribution(&self) -> Distribution {
        match self.dist {
            DistKind::Gaussian => Distribution::Gaussian {
                mean: self.mean.unwrap_or(0.0),
                variance: self.scale,
            },
            DistKind::Uniform => {
                let mid = self.mean.unwrap_or(0.5);
                Distribution::Uniform {
                    lo: mid - self.scale / 2.0,
                    hi: mid + self.scale / 2.0,
                }
            }
            DistKind::Lognormal => Distribution::LogNormal {
                mu: self.mean.unwrap_or(0.0),
                sigma: self.scale,
            },
        }
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Contract(_)
            | Error::Dimension { .. }
            | Error::Domain(_)
            | Error::Refused(_)
            | Error::Parse { .. }
            | Error::Io(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn parse_methods(names: &[String]) -> Result<Vec<Method>, Failure> {
    names
        .iter()
        .map(|s| Method::parse(s).map_err(|e| Failure::Usage(e.to_string())))
        .collect()
}

fn load_problem(args: &ProblemArgs) -> Result<(QuadraticProblem, Option<(usize, f64)>), Failure> {
    match &args.matrix {
        Some(path) => Ok((problems::read_problem(&fs::read_to_string(path)?)?, None)),
        None => Ok((problems::make_ac(args.n, args.c)?, Some((args.n, args.c)))),
    }
}

fn problem_params(m: RunManifest, args: &ProblemArgs) -> RunManifest {
    match &args.matrix {
        Some(path) => m.param("matrix", path.display().to_string()),
        None => m.param("n", args.n).param("c", args.c),
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn emit(out: &OutArgs, result: &CsvOutput, manifest: RunManifest) -> Result<(), Failure> {
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    match &out.out {
        Some(path) => {
            fs::write(path, &result.csv)?;
            let mut m = manifest;
            m.timestamp = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs().to_string());
            let json = format!(
                "{{\"hash\":\"{}\",\"manifest\":{}}}\n",
                m.hash(),
                m.to_json()
            );
            fs::write(sibling(path, ".manifest.json"), json)?;
        }
        None => print!("{}", result.csv),
    }
    if result.ok() {
        Ok(())
    } else {
        for f in &result.failures {
            eprintln!("check failed: {f}");
        }
        Err(Failure::Numerical(format!(
            "{} check(s) failed",
            result.failures.len()
        )))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Table1 { n, c, out } => {
            if let Some(bad) = n.iter().find(|&&v| v < 2) {
                return Err(Failure::Usage(format!(
                    "--n values must be at least 2, got {bad}"
                )));
            }
            if let Some(bad) = c.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
                return Err(Failure::Usage(format!(
                    "--c values must lie in (0, 1), got {bad}"
                )));
            }
            let m = RunManifest::new("table1").param("n", &n).param("c", &c);
            emit(&out, &harness::table1(&n, &c), m)
        }
        Command::Trajectory {
            problem,
            methods,
            epochs,
            seed,
            out,
        } => {
            let ms = parse_methods(&methods)?;
            let (p, _) = load_problem(&problem)?;
            let x0 = harness::initial_point(p.dim(), seed);
            let result = harness::trajectory(&p, &x0, &ms, epochs, seed)?;
            let m = problem_params(RunManifest::new("trajectory"), &problem)
                .param("methods", &methods)
                .param("epochs", epochs)
                .param("seed", seed);
            emit(&out, &result, m)
        }
        Command::Lowerbound {
            n,
            c,
            delta,
            epochs,
            out,
        } => {
            let result = harness::lowerbound(n, c, delta, epochs)?;
            let m = RunManifest::new("lowerbound")
                .param("n", n)
                .param("c", c)
                .param("delta", delta)
                .param("epochs", epochs);
            emit(&out, &result, m)
        }
        Command::Randbench {
            n,
            dist,
            raw,
            methods,
            epochs,
            repeats,
            seed,
            out,
        } => {
            let ms = parse_methods(&methods)?;
            let spec = EnsembleSpec {
                n,
                distribution: dist.distribution(),
                seed,
                normalize_diagonal: !raw,
            };
            let result = harness::randbench(&spec, &ms, epochs, repeats)?;
            let sidecar =
                serde_json::to_string_pretty(&result.sidecar).expect("sidecar serializes");
            match &out.out {
                Some(path) => fs::write(sibling(path, ".metrics.json"), sidecar + "\n")?,
                None => eprintln!("{sidecar}"),
            }
            let m = RunManifest::new("randbench")
                .param("spec", spec)
                .param("methods", &methods)
                .param("epochs", epochs)
                .param("repeats", repeats);
            emit(&out, &result.csv, m)
        }
        Command::Bounds { problem, eps, out } => {
            let (p, ac) = load_problem(&problem)?;
            let result = harness::bounds(&p, ac, eps)?;
            let m = problem_params(RunManifest::new("bounds"), &problem).param("eps", eps);
            emit(&out, &result, m)
        }
        Command::Verify => {
            let report = harness::verify(harness::VerifyFixture::default());
            print!("{}", report.render());
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Numerical("verification failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
