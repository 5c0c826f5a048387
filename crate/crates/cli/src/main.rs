use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use cylevel::elimination::twist_descent;
use cylevel::newform_db::validate;
use cylevel::residual::{fit_modulus, fits_ramified_at, reduce_traces, reducible_fits};
use cylevel::sturm_dim::{dim_cusp, dim_new, gamma0_data, sturm_bound};
use cylevel::{identify, parse_db, serre_bound, Dataset, EliminationReport, TraceData};

/// Level identification for rigid Calabi-Yau threefolds by newform elimination.
#[derive(Parser)]
#[command(name = "cylevel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exponent caps, level bound and candidate levels for a set of bad primes.
    Bound {
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<i64>,
    },
    /// Index of Gamma_0(N) and the Sturm bound.
    Sturm {
        #[arg(long)]
        level: i64,
        #[arg(long)]
        weight: u32,
    },
    /// Elliptic points, cusps, genus and cusp form dimensions.
    Dims {
        #[arg(long)]
        level: i64,
        #[arg(long)]
        weight: u32,
    },
    /// Checks newform datasets; exits 1 if any violation is found.
    ValidateDb {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Full pipeline: bound, optional twist descent at 2, elimination, certification.
    Identify {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        w4_db: PathBuf,
        #[arg(long)]
        w2_db: Option<PathBuf>,
    },
    /// Excludes a power of 2 from the level via weight-2 newforms modulo ℓ.
    TwistDescent {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        w2_db: PathBuf,
        #[arg(long, default_value_t = 16)]
        factor: i64,
        #[arg(long, default_value_t = 5)]
        modulus: i64,
    },
    /// Searches for reducible decompositions of the residual representation.
    Reducible {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long, default_value_t = 5)]
        modulus: i64,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_traces(path: &Path) -> Result<TraceData> {
    let (td, warnings) =
        TraceData::parse(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(td)
}

fn load_db(path: &Path) -> Result<Dataset> {
    let ds = parse_db(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let violations = validate(&ds);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("{}: {v}", path.display());
        }
        bail!("{} violations in {}", violations.len(), path.display());
    }
    Ok(ds)
}

fn report_exit(report: &EliminationReport) -> ExitCode {
    print!("{}", report.to_text());
    print!("{}", report.machine_lines());
    if report.conclusion.is_definitive() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn two_exponent(factor: i64) -> Result<u32> {
    if factor < 8 || factor.count_ones() != 1 {
        bail!("--factor must be a power of 2 of at least 8, got {factor}");
    }
    Ok(factor.trailing_zeros())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Bound { primes } => {
            let bt = serre_bound(primes)?;
            println!("{bt}");
            let levels = bt.candidate_levels();
            let shown: Vec<String> = levels.iter().map(|n| n.to_string()).collect();
            println!("{} candidate levels: {}", levels.len(), shown.join(" "));
        }
        Command::Sturm { level, weight } => {
            let mu = gamma0_data(level)?.mu;
            println!("mu={mu} T={}", sturm_bound(level, weight)?);
        }
        Command::Dims { level, weight } => {
            let g = gamma0_data(level)?;
            println!(
                "N={level} mu={} nu2={} nu3={} nu_inf={} g={}",
                g.mu, g.nu2, g.nu3, g.nu_inf, g.genus
            );
            println!(
                "dim S_{weight}={} dim S_{weight}^new={}",
                dim_cusp(level, weight)?,
                dim_new(level, weight)?
            );
        }
        Command::ValidateDb { files } => {
            let mut total = 0;
            for path in &files {
                let ds =
                    parse_db(&read(path)?).with_context(|| format!("in {}", path.display()))?;
                let violations = validate(&ds);
                for v in &violations {
                    println!("{}: {v}", path.display());
                }
                println!(
                    "{}: {} records, {} violations",
                    path.display(),
                    ds.records.len(),
                    violations.len()
                );
                total += violations.len();
            }
            if total > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Identify {
            traces,
            w4_db,
            w2_db,
        } => {
            let td = load_traces(&traces)?;
            let w4 = load_db(&w4_db)?;
            let w2 = w2_db.as_deref().map(load_db).transpose()?;
            return Ok(report_exit(&identify(&w4, w2.as_ref(), &td)?));
        }
        Command::TwistDescent {
            traces,
            w2_db,
            factor,
            modulus,
        } => {
            let e = two_exponent(factor)?;
            let td = load_traces(&traces)?;
            let w2 = load_db(&w2_db)?;
            let bt = serre_bound(td.bad_primes.iter().copied())?;
            return Ok(report_exit(&twist_descent(&w2, &td, &bt, e, modulus)?));
        }
        Command::Reducible { traces, modulus } => {
            let td = load_traces(&traces)?;
            let rt = reduce_traces(&td, modulus)?;
            let fits = reducible_fits(&rt, &td.bad_primes, modulus)?;
            println!(
                "characters modulo {} into F_{modulus}*",
                fit_modulus(&td.bad_primes, modulus)
            );
            for f in &fits {
                println!("FIT {f}");
            }
            println!("{} fits", fits.len());
            println!(
                "ramified at 2: {}",
                if fits_ramified_at(&fits, 2) {
                    "yes"
                } else {
                    "no"
                }
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
