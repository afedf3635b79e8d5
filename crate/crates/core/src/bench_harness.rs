//! Wall-clock comparison of the recurrence power against brute-force
//! multiplication and diagonalization on random normal-form matrices.
//!
//! Each measurement times one batch of matrices end to end. Every algorithm
//! also sums all entries of its results; those checksums must agree batch by
//! batch, which doubles as a guard against the optimizer discarding work.

use std::fmt;
use std::hint::black_box;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense_linalg::{power_bruteforce, power_by_diagonalization, power_by_squaring, DenseMatrix};
use crate::error::{Error, Result};
use crate::format::fmt_sig17;
use crate::gamma_power::power_ring;
use crate::normal_form::NormalFormMatrix;

/// ρ_i drawn i.i.d. uniform on `range`.
pub fn random_normal_matrix<R: Rng>(dim: usize, range: (f64, f64), rng: &mut R) -> NormalFormMatrix {
    let rho = (0..dim).map(|_| rng.gen_range(range.0..range.1)).collect();
    NormalFormMatrix::new(dim, rho).expect("finite coefficients")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    /// Vary the dimension; every matrix is raised to this power.
    Dimension { power: usize },
    /// Vary the power at this dimension.
    Power { dim: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Brute,
    Diag,
    Gamma,
    /// Repeated squaring; extra line outside the three-way comparison.
    Squaring,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Brute => "brute",
            Algorithm::Diag => "diag",
            Algorithm::Gamma => "gamma",
            Algorithm::Squaring => "squaring",
        }
    }

    fn run(self, m: &NormalFormMatrix, n: usize) -> Result<DenseMatrix> {
        match self {
            Algorithm::Brute => power_bruteforce(&m.materialize(), n),
            Algorithm::Diag => power_by_diagonalization(m, n),
            Algorithm::Gamma => power_ring(m, n),
            Algorithm::Squaring => power_by_squaring(&m.materialize(), n),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub mode: SweepMode,
    /// Dimensions or powers, depending on `mode`.
    pub values: Vec<usize>,
    /// Matrices per timed batch.
    pub batch: usize,
    /// Timed batches per value.
    pub repeats: usize,
    pub seed: u64,
    pub coeff_range: (f64, f64),
    pub include_squaring: bool,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            mode: SweepMode::Dimension { power: 10 },
            values: vec![5, 10, 20, 50],
            batch: 100,
            repeats: 10,
            seed: 1,
            coeff_range: (-2.0, 2.0),
            include_squaring: false,
        }
    }
}

impl BenchSpec {
    fn validate(&self) -> Result<()> {
        if self.batch == 0 || self.repeats == 0 {
            return Err(Error::InvalidArgument("batch and repeats must be at least 1".into()));
        }
        if self.values.is_empty() || self.values.contains(&0) {
            return Err(Error::InvalidArgument("sweep values must be positive".into()));
        }
        if let SweepMode::Dimension { power: 0 } | SweepMode::Power { dim: 0 } = self.mode {
            return Err(Error::InvalidArgument(
                "fixed power or dimension must be positive".into(),
            ));
        }
        let (lo, hi) = self.coeff_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(
                "coefficient range must be a finite interval".into(),
            ));
        }
        Ok(())
    }

    fn algorithms(&self) -> Vec<Algorithm> {
        let mut algs = vec![Algorithm::Brute, Algorithm::Diag, Algorithm::Gamma];
        if self.include_squaring {
            algs.push(Algorithm::Squaring);
        }
        algs
    }

    fn dim_and_power(&self, value: usize) -> (usize, usize) {
        match self.mode {
            SweepMode::Dimension { power } => (value, power),
            SweepMode::Power { dim } => (dim, value),
        }
    }
}

/// Relative checksum tolerance for a batch of dimension `dim`.
pub fn checksum_tolerance(dim: usize) -> f64 {
    if dim >= 40 {
        1e-4
    } else {
        1e-6
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowFlag {
    /// Batches left out because diagonalization hit a degenerate spectrum.
    SkippedDegenerate(usize),
    /// Batches whose checksum disagreed with the other algorithms.
    InvalidChecksum(usize),
    /// Batches that failed outright (overflow or root finding).
    Failed(usize),
}

impl fmt::Display for RowFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowFlag::SkippedDegenerate(k) => write!(f, "skipped-degenerate={k}"),
            RowFlag::InvalidChecksum(k) => write!(f, "invalid-checksum={k}"),
            RowFlag::Failed(k) => write!(f, "failed={k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub variable: usize,
    pub algorithm: Algorithm,
    pub mean_seconds: f64,
    pub std_seconds: f64,
    pub median_seconds: f64,
    /// Timed batches that contributed.
    pub samples: usize,
    /// Sum of every entry of every result.
    pub checksum: f64,
    pub flags: Vec<RowFlag>,
}

impl BenchRow {
    /// A row is invalid when any of its batches failed the checksum guard.
    pub fn is_valid(&self) -> bool {
        !self.flags.iter().any(|f| matches!(f, RowFlag::InvalidChecksum(_)))
    }

    pub fn flags_string(&self) -> String {
        if self.flags.is_empty() {
            "ok".to_owned()
        } else {
            self.flags.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(";")
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

impl BenchTable {
    pub fn row(&self, variable: usize, algorithm: Algorithm) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.variable == variable && r.algorithm == algorithm)
    }

    pub fn invalid_rows(&self) -> impl Iterator<Item = &BenchRow> {
        self.rows.iter().filter(|r| !r.is_valid())
    }
}

struct BatchOutcome {
    seconds: f64,
    checksum: f64,
    abs_sum: f64,
}

fn time_batch(alg: Algorithm, batch: &[NormalFormMatrix], n: usize) -> Result<BatchOutcome> {
    let start = Instant::now();
    let mut checksum = 0.0;
    let mut abs_sum = 0.0;
    for m in batch {
        let p = black_box(alg.run(black_box(m), n)?);
        for v in p.as_slice() {
            checksum += v;
            abs_sum += v.abs();
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    Ok(BatchOutcome {
        seconds,
        checksum,
        abs_sum,
    })
}

fn summarize(samples: &mut [f64]) -> (f64, f64, f64) {
    if samples.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let k = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / k;
    let std = if samples.len() > 1 {
        (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    samples.sort_by(|a, b| a.total_cmp(b));
    let mid = samples.len() / 2;
    let median = if samples.len().is_multiple_of(2) {
        (samples[mid - 1] + samples[mid]) / 2.0
    } else {
        samples[mid]
    };
    (mean, std, median)
}

#[derive(Default)]
struct Accumulator {
    samples: Vec<f64>,
    checksum: f64,
    degenerate: usize,
    failed: usize,
    invalid: usize,
}

/// Runs the sweep single-threaded. One untimed warm-up batch precedes the
/// measurements for each value.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchTable> {
    spec.validate()?;
    let algorithms = spec.algorithms();
    let mut values = spec.values.clone();
    values.sort_unstable();
    values.dedup();

    let mut rows = Vec::new();
    for &value in &values {
        let (dim, n) = spec.dim_and_power(value);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (value as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut draw = || -> Vec<NormalFormMatrix> {
            (0..spec.batch)
                .map(|_| random_normal_matrix(dim, spec.coeff_range, &mut rng))
                .collect()
        };

        let warmup = draw();
        for &alg in &algorithms {
            let _ = time_batch(alg, &warmup, n);
        }

        let mut acc: Vec<Accumulator> = algorithms.iter().map(|_| Accumulator::default()).collect();
        let tolerance = checksum_tolerance(dim);
        for _ in 0..spec.repeats {
            let batch = draw();
            let outcomes: Vec<Result<BatchOutcome>> =
                algorithms.iter().map(|&alg| time_batch(alg, &batch, n)).collect();

            // Reference: the first algorithm that completed, preferring brute force.
            let reference = outcomes.iter().flatten().next().map(|o| (o.checksum, o.abs_sum));
            for (a, outcome) in acc.iter_mut().zip(outcomes) {
                match outcome {
                    Ok(o) => {
                        let agrees = reference.is_none_or(|(sum, abs)| {
                            (o.checksum - sum).abs() <= tolerance * abs.max(o.abs_sum).max(1.0)
                        });
                        if agrees {
                            a.samples.push(o.seconds);
                            a.checksum += o.checksum;
                        } else {
                            a.invalid += 1;
                        }
                    }
                    Err(Error::DegenerateSpectrum { .. }) => a.degenerate += 1,
                    Err(_) => a.failed += 1,
                }
            }
        }

        for (&alg, mut a) in algorithms.iter().zip(acc) {
            let (mean, std, median) = summarize(&mut a.samples);
            let mut flags = Vec::new();
            if a.degenerate > 0 {
                flags.push(RowFlag::SkippedDegenerate(a.degenerate));
            }
            if a.invalid > 0 {
                flags.push(RowFlag::InvalidChecksum(a.invalid));
            }
            if a.failed > 0 {
                flags.push(RowFlag::Failed(a.failed));
            }
            rows.push(BenchRow {
                variable: value,
                algorithm: alg,
                mean_seconds: mean,
                std_seconds: std,
                median_seconds: median,
                samples: a.samples.len(),
                checksum: a.checksum,
                flags,
            });
        }
    }
    rows.sort_by(|a, b| (a.variable, a.algorithm.name()).cmp(&(b.variable, b.algorithm.name())));
    Ok(BenchTable { rows })
}

/// `variable,algorithm,mean_seconds,std_seconds,checksum,flags`.
pub fn write_bench_csv<W: Write>(table: &BenchTable, mut out: W) -> Result<()> {
    writeln!(out, "variable,algorithm,mean_seconds,std_seconds,checksum,flags")?;
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.variable,
            r.algorithm,
            fmt_sig17(r.mean_seconds),
            fmt_sig17(r.std_seconds),
            fmt_sig17(r.checksum),
            r.flags_string()
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}
