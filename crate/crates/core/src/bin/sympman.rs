use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sympman::experiments::{
    format_summary, run_feasibility, run_nearest, run_subspace, write_feasibility_csv,
    write_summary_csv, write_trace_csv, DescentReport, ExperimentConfig, FeasCurve,
};
use sympman::optim::{ManifoldMode, Retraction};
use sympman::par::with_threads;
use sympman::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

/// Numerical experiments on the symplectic Stiefel and Grassmann manifolds.
#[derive(Parser, Debug)]
#[command(name = "sympman", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, global = true, default_value_t = 100)]
    n: usize,

    #[arg(long, global = true, default_value_t = 10)]
    k: usize,

    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Number of independent runs averaged.
    #[arg(long, global = true, default_value_t = 10)]
    runs: usize,

    /// Comma list. feasibility: riem_geodesic,cayley,pseudo_geodesic,quasi_geodesic;
    /// nearest/subspace: geodesic,cayley,quasi_geodesic.
    #[arg(long, global = true, value_delimiter = ',')]
    retractions: Option<Vec<String>>,

    /// Comma list of stiefel_g, grassmann_g.
    #[arg(long, global = true, value_delimiter = ',')]
    metrics: Option<Vec<String>>,

    #[arg(long = "t-max", global = true, default_value_t = 1e3)]
    t_max: f64,

    #[arg(long = "t-samples", global = true, default_value_t = 500)]
    t_samples: usize,

    #[arg(long = "max-iters", global = true, default_value_t = 100)]
    max_iters: usize,

    /// 2-norm of the nearest-matrix target A.
    #[arg(long = "scale-a", global = true, default_value_t = 1.0)]
    scale_a: f64,

    /// 2-norm of the noise in the subspace data; 0 disables it.
    #[arg(long, global = true, default_value_t = 1.0)]
    noise: f64,

    /// Record wall-clock times (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,

    /// CSV destination; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Feasibility of retractions along R_U(tΔ), t log-spaced up to --t-max.
    Feasibility,
    /// Nearest symplectic Stiefel matrix by Riemannian gradient descent.
    Nearest,
    /// Best symplectic subspace for S = AA⁺ + E.
    Subspace,
}

fn parse_list<T: std::str::FromStr<Err = Error>>(items: &[String]) -> Result<Vec<T>, Error> {
    items.iter().map(|s| s.trim().parse()).collect()
}

fn threads_from_env() -> Result<Option<usize>, Error> {
    match std::env::var("SYMPMAN_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "SYMPMAN_THREADS must be a positive integer, got '{v}'"
            ))),
        },
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig {
        n: cli.n,
        k: cli.k,
        seed: cli.seed,
        runs: cli.runs,
        t_max: cli.t_max,
        t_samples: cli.t_samples,
        max_iters: cli.max_iters,
        scale_a: cli.scale_a,
        noise: cli.noise,
        timing: cli.timing,
        ..ExperimentConfig::default()
    };
    match cli.command {
        Command::Feasibility => {
            if let Some(r) = &cli.retractions {
                cfg.curves = parse_list::<FeasCurve>(r)?;
            }
        }
        Command::Nearest | Command::Subspace => {
            if let Some(r) = &cli.retractions {
                cfg.retractions = parse_list::<Retraction>(r)?;
            }
            cfg.metrics = match (&cli.metrics, cli.command) {
                (Some(m), _) => parse_list::<ManifoldMode>(m)?,
                (None, Command::Subspace) => vec![ManifoldMode::GrassmannG, ManifoldMode::StiefelG],
                (None, _) => vec![ManifoldMode::StiefelG],
            };
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn io_err(path: &Path, e: io::Error) -> Error {
    Error::Config(format!("cannot write {}: {e}", path.display()))
}

fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".summary.csv");
    PathBuf::from(name)
}

fn emit_report(report: &DescentReport, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_err(path, e))?;
            write_trace_csv(report, BufWriter::new(file))?;
            let spath = summary_path(path);
            let file = File::create(&spath).map_err(|e| io_err(&spath, e))?;
            write_summary_csv(report, BufWriter::new(file))?;
            print!("{}", format_summary(report));
        }
        None => {
            write_trace_csv(report, io::stdout().lock())?;
            eprint!("{}", format_summary(report));
        }
    }
    Ok(())
}

fn run(cli: &Cli, cfg: &ExperimentConfig) -> Result<(), Error> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Feasibility => {
            let table = run_feasibility(cfg)?;
            match out {
                Some(path) => {
                    let file = File::create(path).map_err(|e| io_err(path, e))?;
                    write_feasibility_csv(&table, BufWriter::new(file))
                }
                None => write_feasibility_csv(&table, io::stdout().lock()),
            }
        }
        Command::Nearest => emit_report(&run_nearest(cfg)?, out),
        Command::Subspace => emit_report(&run_subspace(cfg)?, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let setup = threads_from_env().and_then(|t| build_config(&cli).map(|cfg| (t, cfg)));
    let (threads, cfg) = match setup {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = with_threads(threads, || run(&cli, &cfg)).and_then(|r| r);
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}
