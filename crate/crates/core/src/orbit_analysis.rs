//! Periodic orbits of the normal-form map: candidate points, itinerary
//! checks and linear stability.
//!
//! For a canonical word `L^{n₁} R^{n₂} … R^{n_s}` the cycle matrix is the
//! ordered product `M_L^{n₁} M_R^{n₂} ⋯ M_R^{n_s}` (first run leftmost). The
//! rightmost factor acts first, so the orbit starts at a point `X₀` in the
//! right half-space, spends `n_s` steps there, then `n_{s−1}` steps on the
//! left, and so on back to `X₀`.

use std::fmt;

use crate::dense_linalg::{lu_solve, mat_mul, spectral_radius, DenseMatrix};
use crate::error::{Error, Result};
use crate::gamma_power::{power, power_and_sum};
use crate::normal_form::{symbol_of, PWLMap, Point, Symbol, SymbolWord, DIVERGENCE_LIMIT};

/// Relative closure tolerance for `X_period` against `X₀`.
pub const CLOSURE_TOLERANCE: f64 = 1e-8;
/// Orbit points with `|x₁|` at most this are flagged as border-marginal.
pub const BORDER_MARGIN: f64 = 1e-10;
/// A cycle is stable when its spectral radius is below `1 − STABILITY_MARGIN`.
pub const STABILITY_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureReason {
    SingularExistenceMatrix,
    /// Index along the cycle (from `X₀`) of the first point in the wrong half-space.
    WrongPartition(usize),
    /// Every point was in place but `X_period` missed `X₀`.
    NotClosed,
    Diverged,
    /// A power or product of the piece matrices overflowed.
    Overflow,
    /// Eigenvalues of the cycle matrix could not be computed.
    RootFinding,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::SingularExistenceMatrix => write!(f, "singular_existence_matrix"),
            FailureReason::WrongPartition(k) => write!(f, "wrong_partition({k})"),
            FailureReason::NotClosed => write!(f, "not_closed"),
            FailureReason::Diverged => write!(f, "diverged"),
            FailureReason::Overflow => write!(f, "overflow"),
            FailureReason::RootFinding => write!(f, "root_finding"),
        }
    }
}

/// Everything known about one candidate cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord {
    pub word: SymbolWord,
    /// `X₀`; absent when the existence matrix is singular.
    pub candidate: Option<Point>,
    /// `X₀ … X_(period−1)` as far as the itinerary check got.
    pub points: Vec<Point>,
    pub exists: bool,
    /// Ordered product of the piece matrices along the cycle.
    pub jacobian: DenseMatrix,
    pub trace: f64,
    pub determinant: f64,
    /// NaN when root finding failed.
    pub spectral_radius: f64,
    /// `exists` and spectral radius below `1 − 1e-9`.
    pub stable: bool,
    /// Two-dimensional trace/determinant test `|Δ| < 1 ∧ |T| < 1 + Δ`;
    /// `None` for other dimensions.
    pub jury_stable: Option<bool>,
    pub failure_reason: Option<FailureReason>,
    /// Some orbit point lies within `1e-10` of the border.
    pub border_marginal: bool,
    /// The word is not a repetition of a shorter word.
    pub primitive: bool,
}

fn require_canonical(map: &PWLMap, word: &SymbolWord) -> Result<()> {
    if !word.is_canonical() {
        return Err(Error::InvalidArgument(format!(
            "word {word} must start with L and end with R"
        )));
    }
    if map.dim() == 0 {
        return Err(Error::InvalidArgument("map has no dimensions".into()));
    }
    Ok(())
}

/// Ordered product `Π_j M_{K_j}^{n_j}`, first run leftmost.
pub fn cycle_matrix(map: &PWLMap, word: &SymbolWord) -> Result<DenseMatrix> {
    let mut product = DenseMatrix::identity(map.dim());
    for &(symbol, count) in word.runs() {
        product = mat_mul(&product, &power(map.matrix(symbol), count)?);
    }
    Ok(product)
}

fn solve_existence(product: &DenseMatrix, affine: &DenseMatrix, mu: f64) -> Result<Point> {
    let dim = product.dim();
    let existence = &DenseMatrix::identity(dim) - product;
    // affine · ζ with ζ = (μ, 0, …, 0)ᵀ
    let rhs: Vec<f64> = (0..dim).map(|i| affine[(i, 0)] * mu).collect();
    let solution = lu_solve(&existence, &rhs)?;
    Ok(Point(solution.x))
}

/// `X₀ = (I − M_L^m M_R^n)⁻¹ (M_L^m φ_{R,n} + φ_{L,m}) ζ` for the word `L^m R^n`.
pub fn candidate_lmrn(map: &PWLMap, m: usize, n: usize) -> Result<Point> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("run lengths must be positive".into()));
    }
    let (left_power, left_sum) = power_and_sum(map.left(), m)?;
    let (right_power, right_sum) = power_and_sum(map.right(), n)?;
    let product = mat_mul(&left_power, &right_power);
    let affine = &mat_mul(&left_power, &right_sum) + &left_sum;
    solve_existence(&product, &affine, map.mu())
}

/// `X₀ = (I − Π_j M_{K_j}^{n_j})⁻¹ (Σ_i (Π_{j<i} M_{K_j}^{n_j}) φ_{K_i,n_i}) ζ`.
pub fn candidate_general(map: &PWLMap, word: &SymbolWord) -> Result<Point> {
    require_canonical(map, word)?;
    let dim = map.dim();
    let mut prefix = DenseMatrix::identity(dim);
    let mut affine = DenseMatrix::zeros(dim);
    for (i, &(symbol, count)) in word.runs().iter().enumerate() {
        let (run_power, run_sum) = power_and_sum(map.matrix(symbol), count)?;
        let term = if i == 0 { run_sum } else { mat_mul(&prefix, &run_sum) };
        affine = if i == 0 { term } else { &term + &affine };
        prefix = if i == 0 {
            run_power
        } else {
            mat_mul(&prefix, &run_power)
        };
    }
    solve_existence(&prefix, &affine, map.mu())
}

/// Outcome of walking the cycle from a candidate point.
#[derive(Clone, Debug, PartialEq)]
pub struct ItineraryCheck {
    pub ok: bool,
    pub failure: Option<FailureReason>,
    /// Visited points `X₀ … X_k`, stopping at the first misplaced one.
    pub points: Vec<Point>,
    pub border_marginal: bool,
}

impl ItineraryCheck {
    /// Index of the first failing point; the period for a closure failure.
    pub fn failure_index(&self) -> Option<usize> {
        match self.failure? {
            FailureReason::WrongPartition(k) => Some(k),
            _ => Some(self.points.len()),
        }
    }
}

/// Iterates `period` steps from `x0`, checking each point's half-space
/// against the word and the return to `x0`.
pub fn verify_itinerary(map: &PWLMap, x0: &Point, word: &SymbolWord) -> ItineraryCheck {
    let expected = word.cycle_symbols();
    let mut points = Vec::with_capacity(expected.len());
    let mut border_marginal = false;
    let mut x = x0.clone();
    let fail = |points, reason, border_marginal| ItineraryCheck {
        ok: false,
        failure: Some(reason),
        points,
        border_marginal,
    };
    for (k, &want) in expected.iter().enumerate() {
        border_marginal |= x.0[0].abs() <= BORDER_MARGIN;
        let got = symbol_of(&x);
        points.push(x.clone());
        if got != want {
            return fail(points, FailureReason::WrongPartition(k), border_marginal);
        }
        x = match map.apply(&x) {
            Ok(next) if next.0.iter().all(|v| v.is_finite() && v.abs() <= DIVERGENCE_LIMIT) => next,
            _ => return fail(points, FailureReason::Diverged, border_marginal),
        };
    }
    if x.dist_inf(x0) > CLOSURE_TOLERANCE * (1.0 + x0.max_abs()) {
        return fail(points, FailureReason::NotClosed, border_marginal);
    }
    ItineraryCheck {
        ok: true,
        failure: None,
        points,
        border_marginal,
    }
}

/// Linear stability data of a cycle matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Stability {
    pub jacobian: DenseMatrix,
    pub trace: f64,
    pub determinant: f64,
    pub spectral_radius: f64,
    /// Spectral radius below `1 − 1e-9`.
    pub stable: bool,
    pub jury_stable: Option<bool>,
}

/// `|Δ| < 1` and `|T| < 1 + Δ`: eigenvalues of a 2×2 matrix inside the unit disc.
pub fn jury_2d(trace: f64, determinant: f64) -> bool {
    determinant.abs() < 1.0 && trace.abs() < 1.0 + determinant
}

pub fn stability_of(jacobian: DenseMatrix) -> Result<Stability> {
    let trace = jacobian.trace();
    let determinant = jacobian.determinant();
    let radius = spectral_radius(&jacobian)?;
    let jury_stable = (jacobian.dim() == 2).then(|| jury_2d(trace, determinant));
    Ok(Stability {
        jacobian,
        trace,
        determinant,
        spectral_radius: radius,
        stable: radius < 1.0 - STABILITY_MARGIN,
        jury_stable,
    })
}

/// Trace, determinant and spectral radius of the cycle matrix of `word`.
pub fn stability(map: &PWLMap, word: &SymbolWord) -> Result<Stability> {
    stability_of(cycle_matrix(map, word)?)
}

/// Candidate, itinerary check and stability in one record.
///
/// Only a non-canonical word is an error; every failure along the way is
/// recorded in [`OrbitRecord::failure_reason`].
pub fn classify_orbit(map: &PWLMap, word: &SymbolWord) -> Result<OrbitRecord> {
    require_canonical(map, word)?;
    let jacobian = cycle_matrix(map, word)?;
    let candidate = match candidate_general(map, word) {
        Ok(x0) => Some(x0),
        Err(Error::Singular { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(assemble(map, word.clone(), candidate, jacobian))
}

fn assemble(map: &PWLMap, word: SymbolWord, candidate: Option<Point>, jacobian: DenseMatrix) -> OrbitRecord {
    let primitive = word.is_primitive();
    let (exists, points, mut failure_reason, border_marginal) = match &candidate {
        None => (false, Vec::new(), Some(FailureReason::SingularExistenceMatrix), false),
        Some(x0) => {
            let check = verify_itinerary(map, x0, &word);
            (check.ok, check.points, check.failure, check.border_marginal)
        }
    };
    let dim = jacobian.dim();
    let trace = jacobian.trace();
    let determinant = jacobian.determinant();
    let (spectral_radius, linearly_stable, jury_stable) = match stability_of(jacobian.clone()) {
        Ok(s) => (s.spectral_radius, s.stable, s.jury_stable),
        Err(_) => {
            if failure_reason.is_none() {
                failure_reason = Some(FailureReason::RootFinding);
            }
            (f64::NAN, false, (dim == 2).then(|| jury_2d(trace, determinant)))
        }
    };
    OrbitRecord {
        word,
        candidate,
        points,
        exists,
        jacobian,
        trace,
        determinant,
        spectral_radius,
        stable: exists && linearly_stable,
        jury_stable,
        failure_reason,
        border_marginal,
        primitive,
    }
}

/// Period-one orbits of each piece.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPoints {
    pub left: OrbitRecord,
    pub right: OrbitRecord,
}

impl FixedPoints {
    /// Records whose solution lies in its own half-space.
    pub fn admissible(&self) -> impl Iterator<Item = &OrbitRecord> {
        [&self.left, &self.right].into_iter().filter(|r| r.exists)
    }
}

/// Solves `(I − M_J) X = ζ` for both pieces and keeps the solutions that lie
/// in their own half-space (`x₁ ≤ 0` for `L`, `x₁ > 0` for `R`).
pub fn fixed_points(map: &PWLMap) -> FixedPoints {
    let branch = |symbol: Symbol| {
        let word = SymbolWord::from_runs(vec![(symbol, 1)]).expect("single run");
        let m = map.matrix(symbol).materialize();
        let candidate = solve_existence(&m, &DenseMatrix::identity(map.dim()), map.mu()).ok();
        assemble(map, word, candidate, m)
    };
    FixedPoints {
        left: branch(Symbol::L),
        right: branch(Symbol::R),
    }
}
