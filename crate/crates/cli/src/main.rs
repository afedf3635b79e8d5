//! `pwl-orbits`: matrix powers, orbit classification, parameter scans and
//! benchmarks for border-collision normal-form maps.
//!
//! Exit codes: 0 success (orbit: exists and stable), 1 runtime or I/O error,
//! 2 usage error, 3 orbit exists but is unstable, 4 orbit does not exist.

mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{ArgAction, CommandFactory, Parser, Subcommand, ValueEnum};
use pwl_orbits::bench_harness::{run_bench, write_bench_csv, BenchSpec, SweepMode};
use pwl_orbits::dense_linalg::{power_bruteforce, power_by_diagonalization};
use pwl_orbits::format::{fmt_sig17, join_sig17};
use pwl_orbits::region_scanner::{scan_with_threads, write_scan_csv, Axis, ScanSpec};
use pwl_orbits::{classify_orbit, Error, NormalFormMatrix, PWLMap, SymbolWord};

use config::ConfigError;

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNSTABLE: u8 = 3;
const EXIT_NO_ORBIT: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "pwl-orbits",
    version,
    about = "Normal-form matrix powers and periodic orbits of piecewise-linear maps"
)]
struct Cli {
    /// File of `key=value` lines (`#` comments) supplying defaults for the
    /// subcommand's flags; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print M^n for a normal-form matrix as CSV rows.
    #[command(args_override_self = true)]
    Power {
        #[arg(long)]
        dim: usize,
        /// Comma-separated ρ_1..ρ_N.
        #[arg(long, action = ArgAction::Set, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        rho: Vec<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Method::Gamma)]
        method: Method,
    },
    /// Classify one periodic orbit of the piecewise-linear map.
    #[command(args_override_self = true)]
    Orbit {
        #[arg(long)]
        dim: usize,
        /// ρ coefficients of the left matrix.
        #[arg(long, action = ArgAction::Set, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        left: Vec<f64>,
        /// ρ coefficients of the right matrix.
        #[arg(long, action = ArgAction::Set, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        right: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        /// Run-length word such as L2R1.
        #[arg(long)]
        word: String,
    },
    /// Sweep a parameter plane and write per-cell existence/stability flags.
    #[command(args_override_self = true)]
    Scan {
        #[arg(long)]
        dim: usize,
        /// Parameter on the x axis: mu, rho_L[i], rho_R[i], or tau_/sigma_/delta_ aliases.
        #[arg(long)]
        x_param: String,
        /// `min:max:steps`.
        #[arg(long, allow_hyphen_values = true)]
        x_range: RangeArg,
        #[arg(long)]
        y_param: String,
        #[arg(long, allow_hyphen_values = true)]
        y_range: RangeArg,
        /// Fixed parameter `name=value`; repeatable or comma-separated. `mu` defaults to 1.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        fix: Vec<FixArg>,
        /// Comma-separated words, e.g. L1R1,L2R1.
        #[arg(long, action = ArgAction::Set, value_delimiter = ',', required = true)]
        family: Vec<String>,
        /// Worker threads; all cores when unset.
        #[arg(long, env = "PWL_ORBIT_THREADS")]
        threads: Option<usize>,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time Γ powering against brute force and diagonalization.
    #[command(args_override_self = true)]
    Bench {
        #[arg(long, value_enum, default_value_t = Mode::Dim)]
        mode: Mode,
        /// Dimensions (mode dim) or powers (mode power).
        #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_values_t = [5usize, 10, 20, 50])]
        values: Vec<usize>,
        /// The power (mode dim) or dimension (mode power) held fixed.
        #[arg(long, default_value_t = 10)]
        fixed: usize,
        #[arg(long, default_value_t = 100)]
        batch: usize,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also time repeated squaring.
        #[arg(long)]
        include_squaring: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Gamma,
    Brute,
    Diag,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Dim,
    Power,
}

#[derive(Clone, Debug)]
struct RangeArg {
    min: f64,
    max: f64,
    steps: usize,
}

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, steps] = parts[..] else {
            return Err(format!("expected min:max:steps, got {s:?}"));
        };
        Ok(Self {
            min: min.parse().map_err(|_| format!("bad range minimum {min:?}"))?,
            max: max.parse().map_err(|_| format!("bad range maximum {max:?}"))?,
            steps: steps.parse().map_err(|_| format!("bad step count {steps:?}"))?,
        })
    }
}

#[derive(Clone, Debug)]
struct FixArg(String, f64);

impl FromStr for FixArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| format!("expected name=value, got {s:?}"))?;
        let v = v.trim().parse().map_err(|_| format!("bad value in {s:?}"))?;
        Ok(Self(k.trim().to_owned(), v))
    }
}

/// Failure of a subcommand, carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        // A closed pipe (`| head`) is not worth a message.
        let message = if e.kind() == io::ErrorKind::BrokenPipe {
            String::new()
        } else {
            e.to_string()
        };
        Failure {
            code: EXIT_RUNTIME,
            message,
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn normal_matrix(dim: usize, rho: Vec<f64>, what: &str) -> Result<NormalFormMatrix, Failure> {
    if rho.len() != dim {
        return Err(usage(format!("--{what} needs {dim} values, got {}", rho.len())));
    }
    Ok(NormalFormMatrix::new(dim, rho)?)
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure {
            code: EXIT_RUNTIME,
            message: format!("{}: {e}", p.display()),
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_power(dim: usize, rho: Vec<f64>, n: usize, method: Method) -> Result<u8, Failure> {
    let m = normal_matrix(dim, rho, "rho")?;
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let result = match method {
        Method::Gamma => pwl_orbits::power(&m, n)?,
        Method::Brute => power_bruteforce(&m.materialize(), n)?,
        Method::Diag => power_by_diagonalization(&m, n)?,
    };
    let mut out = io::stdout().lock();
    for row in result.rows() {
        writeln!(out, "{}", join_sig17(row))?;
    }
    Ok(0)
}

fn cmd_orbit(dim: usize, left: Vec<f64>, right: Vec<f64>, mu: f64, word: &str) -> Result<u8, Failure> {
    let word: SymbolWord = word.parse().map_err(|e: Error| usage(e.to_string()))?;
    let left = normal_matrix(dim, left, "left")?;
    let right = normal_matrix(dim, right, "right")?;
    let map = PWLMap::new(left, right, mu)?;
    let rec = classify_orbit(&map, &word)?;

    let mut out = io::stdout().lock();
    writeln!(out, "word={}", rec.word)?;
    writeln!(out, "exists={}", rec.exists)?;
    match &rec.candidate {
        Some(x0) => writeln!(out, "x0={}", join_sig17(x0.coords()))?,
        None => writeln!(out, "x0=none")?,
    }
    for (k, p) in rec.points.iter().enumerate() {
        writeln!(out, "point[{k}]={}", join_sig17(p.coords()))?;
    }
    writeln!(out, "trace={}", fmt_sig17(rec.trace))?;
    writeln!(out, "determinant={}", fmt_sig17(rec.determinant))?;
    writeln!(out, "spectral_radius={}", fmt_sig17(rec.spectral_radius))?;
    writeln!(out, "stable={}", rec.stable)?;
    if let Some(jury) = rec.jury_stable {
        writeln!(out, "jury_stable={jury}")?;
    }
    match &rec.failure_reason {
        Some(reason) => writeln!(out, "reason={reason}")?,
        None => writeln!(out, "reason=none")?,
    }
    writeln!(out, "border_marginal={}", rec.border_marginal)?;
    writeln!(out, "primitive={}", rec.primitive)?;

    Ok(match (rec.exists, rec.stable) {
        (true, true) => 0,
        (true, false) => EXIT_UNSTABLE,
        (false, _) => EXIT_NO_ORBIT,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    dim: usize,
    x_param: String,
    x_range: RangeArg,
    y_param: String,
    y_range: RangeArg,
    fix: Vec<FixArg>,
    family: Vec<String>,
    threads: Option<usize>,
    out: Option<PathBuf>,
) -> Result<u8, Failure> {
    if threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    let family = family
        .iter()
        .map(|w| w.parse::<SymbolWord>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(e.to_string()))?;
    // Later --fix entries replace earlier ones, so flags override config values.
    let fixed: BTreeMap<String, f64> = fix.into_iter().map(|FixArg(k, v)| (k, v)).collect();
    let spec = ScanSpec {
        dim,
        x_axis: Axis::new(x_param, x_range.min, x_range.max, x_range.steps),
        y_axis: Axis::new(y_param, y_range.min, y_range.max, y_range.steps),
        fixed,
        family,
    };
    let result = scan_with_threads(&spec, threads)?;
    write_scan_csv(&result, open_output(out.as_ref())?)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    mode: Mode,
    values: Vec<usize>,
    fixed: usize,
    batch: usize,
    repeats: usize,
    seed: u64,
    include_squaring: bool,
    out: Option<PathBuf>,
) -> Result<u8, Failure> {
    let spec = BenchSpec {
        mode: match mode {
            Mode::Dim => SweepMode::Dimension { power: fixed },
            Mode::Power => SweepMode::Power { dim: fixed },
        },
        values,
        batch,
        repeats,
        seed,
        include_squaring,
        ..BenchSpec::default()
    };
    let table = run_bench(&spec)?;
    write_bench_csv(&table, open_output(out.as_ref())?)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Cmd::Power { dim, rho, n, method } => cmd_power(dim, rho, n, method),
        Cmd::Orbit {
            dim,
            left,
            right,
            mu,
            word,
        } => cmd_orbit(dim, left, right, mu, &word),
        Cmd::Scan {
            dim,
            x_param,
            x_range,
            y_param,
            y_range,
            fix,
            family,
            threads,
            out,
        } => cmd_scan(dim, x_param, x_range, y_param, y_range, fix, family, threads, out),
        Cmd::Bench {
            mode,
            values,
            fixed,
            batch,
            repeats,
            seed,
            include_squaring,
            out,
        } => cmd_bench(mode, values, fixed, batch, repeats, seed, include_squaring, out),
    }
}

/// Parses `argv`, re-parsing with config-file flags spliced in after the
/// subcommand name when `--config` is given.
fn parse(argv: Vec<OsString>) -> Result<Cli, Failure> {
    let clap_failure = |e: clap::Error| {
        let code = e.exit_code() as u8;
        let _ = e.print();
        Failure {
            code,
            message: String::new(),
        }
    };
    let Some(path) = config::find_config(&argv) else {
        return Cli::try_parse_from(argv).map_err(clap_failure);
    };
    let Some((pos, sub)) = config::split_at_subcommand(&argv) else {
        // No subcommand to merge into; let clap report the usage error.
        return Cli::try_parse_from(argv).map_err(clap_failure);
    };
    let flags = config::read_pairs(&path)
        .and_then(|pairs| config::pairs_to_flags(&Cli::command(), &sub, &pairs))
        .map_err(|e| match e {
            ConfigError::Io(m) => Failure {
                code: EXIT_RUNTIME,
                message: m,
            },
            ConfigError::Invalid(m) => usage(m),
        })?;
    let mut merged = argv[..=pos].to_vec();
    merged.extend(flags);
    merged.extend_from_slice(&argv[pos + 1..]);
    Cli::try_parse_from(merged).map_err(clap_failure)
}

fn main() -> ExitCode {
    let outcome = parse(std::env::args_os().collect()).and_then(run);
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
