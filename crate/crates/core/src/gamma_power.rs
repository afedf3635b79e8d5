//! Powers of normal-form matrices through per-row linear recurrences.
//!
//! Multiplying a normal-form matrix `M` on the right shifts the columns of a
//! matrix one place to the right and only creates a new first column. Row `i`
//! of `Mⁿ` is therefore a window of `N` consecutive terms of a scalar sequence
//! `Γ_i` that obeys
//!
//! ```text
//! Γ_{i,j} = Σ_{k=1..N} (−1)^(k−1) ρ_k Γ_{i,j−k}      (j ≥ 2)
//! ```
//!
//! seeded with row `i` of `M` read right to left at indices `2−N ..= 1`. Then
//! `[Mⁿ]_{i,j} = Γ_{i, n−(j−1)}` (1-based `j`), which costs `N²n` multiplications
//! instead of the `N³n` of repeated multiplication.
//!
//! The 2D functions at the bottom are the closed forms of the single
//! sequence `a_n` that determines `Mⁿ` for `M = [[τ, 1], [−δ, 0]]`.

use num_complex::Complex64;
use twofloat::TwoFloat;

use crate::dense_linalg::DenseMatrix;
use crate::error::{Error, Result};
use crate::normal_form::NormalFormMatrix;

/// The `N` sequences `Γ_1 … Γ_N`, stored densely from index `2 − N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaState {
    matrix: NormalFormMatrix,
    /// Recurrence weights in storage order: `weights[q] = (−1)^(N−q−1) ρ_(N−q)`,
    /// so a term is the dot product of the previous `N` stored terms with it.
    weights: Vec<f64>,
    seqs: Vec<Vec<f64>>,
    highest_index: i64,
}

impl GammaState {
    /// Seeds every `Γ_i` with row `i` of the matrix in reverse order.
    pub fn new(m: &NormalFormMatrix) -> Self {
        let n = m.dim();
        let dense = m.materialize();
        let seqs = (0..n)
            .map(|i| (0..n).map(|t| dense[(i, n - 1 - t)]).collect())
            .collect();
        Self {
            matrix: m.clone(),
            weights: recurrence_weights(m),
            seqs,
            highest_index: 1,
        }
    }

    pub fn matrix(&self) -> &NormalFormMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn highest_index(&self) -> i64 {
        self.highest_index
    }

    pub fn lowest_index(&self) -> i64 {
        2 - self.dim() as i64
    }

    /// `Γ_{row+1, j}` (`row` is 0-based, `j` uses the sequence numbering), if
    /// it has been computed.
    pub fn get(&self, row: usize, j: i64) -> Option<f64> {
        let t = j - self.lowest_index();
        if t < 0 || j > self.highest_index {
            return None;
        }
        self.seqs.get(row).map(|s| s[t as usize])
    }

    fn term(&self, row: usize, j: i64) -> f64 {
        self.seqs[row][(j - self.lowest_index()) as usize]
    }

    /// Computes all terms up to index `upto`.
    pub fn extend(mut self, upto: i64) -> Result<Self> {
        if upto < self.highest_index {
            return Err(Error::InvalidArgument(format!(
                "cannot extend down to {upto}; already at {}",
                self.highest_index
            )));
        }
        let n = self.dim();
        let extra = (upto - self.highest_index) as usize;
        for (row, seq) in self.seqs.iter_mut().enumerate() {
            seq.reserve(extra);
            for j in self.highest_index + 1..=upto {
                let len = seq.len();
                let next = dot(&seq[len - n..], &self.weights);
                if !next.is_finite() {
                    return Err(Error::Overflow { row: row + 1, index: j });
                }
                seq.push(next);
            }
        }
        self.highest_index = upto;
        Ok(self)
    }

    /// `Mⁿ` read off the stored sequences. Requires `n ≤ highest_index`.
    pub fn power(&self, n: usize) -> Result<DenseMatrix> {
        if n == 0 {
            return Err(Error::InvalidArgument("power must be at least 1".into()));
        }
        if n as i64 > self.highest_index {
            return Err(Error::InvalidArgument(format!(
                "power {n} not yet computed (highest index {})",
                self.highest_index
            )));
        }
        let dim = self.dim();
        let mut out = DenseMatrix::zeros(dim);
        for i in 0..dim {
            for c in 0..dim {
                out[(i, c)] = self.term(i, n as i64 - c as i64);
            }
        }
        Ok(out)
    }

    /// `I + M + … + M^(k−1)`, each entry summed directly from the stored terms.
    pub fn geometric_sum(&self, k: usize) -> Result<DenseMatrix> {
        let dim = self.dim();
        if k == 0 {
            return Ok(DenseMatrix::zeros(dim));
        }
        if k as i64 - 1 > self.highest_index {
            return Err(Error::InvalidArgument(format!(
                "geometric sum of {k} terms needs index {}, highest is {}",
                k - 1,
                self.highest_index
            )));
        }
        let mut out = DenseMatrix::identity(dim);
        for i in 0..dim {
            for c in 0..dim {
                let c = c as i64;
                let sum: f64 = (1..k as i64).map(|p| self.term(i, p - c)).sum();
                out[(i, c as usize)] += sum;
            }
        }
        if !out.is_finite() {
            return Err(Error::Overflow {
                row: out.rows().position(|r| r.iter().any(|v| !v.is_finite())).unwrap_or(0) + 1,
                index: k as i64,
            });
        }
        Ok(out)
    }
}

fn recurrence_weights(m: &NormalFormMatrix) -> Vec<f64> {
    let mut w = m.column_one();
    w.reverse();
    w
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

pub fn gamma_init(m: &NormalFormMatrix) -> GammaState {
    GammaState::new(m)
}

pub fn gamma_extend(state: GammaState, upto: i64) -> Result<GammaState> {
    state.extend(upto)
}

/// `Mⁿ` for `n ≥ 1` in `N²n` multiplications.
pub fn power(m: &NormalFormMatrix, n: usize) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    GammaState::new(m).extend(n as i64)?.power(n)
}

/// `Σ_{j=0}^{k−1} Mʲ`: zero for `k = 0`, identity for `k = 1`.
///
/// Accumulated term by term, so it is defined even when `I − M` is singular.
pub fn geometric_sum(m: &NormalFormMatrix, k: usize) -> Result<DenseMatrix> {
    let upto = (k as i64 - 1).max(1);
    GammaState::new(m).extend(upto)?.geometric_sum(k)
}

/// `Mⁿ` and `Σ_{j<n} Mʲ` from one recurrence run.
pub fn power_and_sum(m: &NormalFormMatrix, n: usize) -> Result<(DenseMatrix, DenseMatrix)> {
    if n == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let state = GammaState::new(m).extend(n as i64)?;
    Ok((state.power(n)?, state.geometric_sum(n)?))
}

/// Same result as [`power`] keeping only the last `N` terms of each sequence.
///
/// This is the constant-memory path the benchmark times.
pub fn power_ring(m: &NormalFormMatrix, n: usize) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let dim = m.dim();
    let dense = m.materialize();
    let weights = recurrence_weights(m);

    let mut out = DenseMatrix::zeros(dim);
    let mut ring = vec![0.0; dim];
    for i in 0..dim {
        // ring[q] holds Γ_{i, 2−N+q} initially; position p is the oldest term.
        for (q, slot) in ring.iter_mut().enumerate() {
            *slot = dense[(i, dim - 1 - q)];
        }
        let mut p = 0;
        for _ in 2..=n {
            // Oldest to newest, the same summation order as the dense path.
            let (newer, older) = ring.split_at(p);
            let next = older
                .iter()
                .chain(newer)
                .zip(&weights)
                .fold(0.0, |acc, (x, w)| acc + x * w);
            ring[p] = next;
            p += 1;
            if p == dim {
                p = 0;
            }
        }
        // Newest term Γ_{i,n} sits just before p.
        for c in 0..dim {
            let pos = (p + 2 * dim - 1 - c) % dim;
            out[(i, c)] = ring[pos];
        }
    }
    if !out.is_finite() {
        return Err(Error::Overflow {
            row: out.rows().position(|r| r.iter().any(|v| !v.is_finite())).unwrap_or(0) + 1,
            index: n as i64,
        });
    }
    Ok(out)
}

/// `a_{−1} … a_upto` of `a_n = τ a_{n−1} − δ a_{n−2}`, `a_{−1} = 0`, `a_0 = 1`.
fn a_sequence(tau: f64, delta: f64, upto: i64) -> Vec<f64> {
    let mut a = vec![0.0, 1.0];
    for _ in 1..=upto {
        let len = a.len();
        a.push(tau * a[len - 1] - delta * a[len - 2]);
    }
    a.truncate((upto + 2).max(1) as usize);
    a
}

/// `a_n` by the two-term recurrence. Panics for `n < −1`.
pub fn a_recurrence(tau: f64, delta: f64, n: i64) -> f64 {
    assert!(n >= -1, "a_n is defined for n >= -1");
    a_sequence(tau, delta, n)[(n + 1) as usize]
}

/// `η_{m,n} = C(n−m, m)` by the Pascal-style rule `η_{m,n} = η_{m,n−1} + η_{m−1,n−2}`.
pub fn eta(m: usize, n: usize) -> f64 {
    eta_row(n).get(m).copied().unwrap_or(0.0)
}

/// `[η_{0,n}, …, η_{⌊n/2⌋,n}]`.
fn eta_row(n: usize) -> Vec<f64> {
    let mut older: Vec<f64> = vec![1.0]; // n = 0
    if n == 0 {
        return older;
    }
    let mut newer: Vec<f64> = vec![1.0]; // n = 1
    for row in 2..=n {
        let next: Vec<f64> = (0..=row / 2)
            .map(|m| {
                let left = newer.get(m).copied().unwrap_or(0.0);
                let diag = if m == 0 {
                    0.0
                } else {
                    older.get(m - 1).copied().unwrap_or(0.0)
                };
                left + diag
            })
            .collect();
        older = std::mem::replace(&mut newer, next);
    }
    newer
}

/// `a_n = Σ_{m=0}^{⌊n/2⌋} (−1)^m η_{m,n} δ^m τ^(n−2m)`, `a_{−1} = 0`.
///
/// Terms can be many orders of magnitude larger than their sum (complex
/// eigenvalues), so the sum is accumulated in double-double precision.
/// The coefficients themselves overflow `f64` somewhere past `n ≈ 1400`.
pub fn a_binomial(tau: f64, delta: f64, n: i64) -> f64 {
    assert!(n >= -1, "a_n is defined for n >= -1");
    if n == -1 {
        return 0.0;
    }
    let n = n as usize;
    let (tau, minus_delta) = (TwoFloat::from(tau), TwoFloat::from(-delta));
    let total = eta_row(n)
        .iter()
        .enumerate()
        .fold(TwoFloat::from(0.0), |acc, (m, &coeff)| {
            acc + TwoFloat::from(coeff) * minus_delta.powi(m as i32) * tau.powi((n - 2 * m) as i32)
        });
    total.hi() + total.lo()
}

/// Relative eigenvalue gap below which [`a_eigen`] refuses to divide.
pub const EIGEN_GAP_TOLERANCE: f64 = 1e-9;

/// `a_n = (λ₁^(n+1) − λ₂^(n+1)) / (λ₁ − λ₂)`.
pub fn a_eigen(lambda1: Complex64, lambda2: Complex64, n: i64) -> Result<f64> {
    if n < -1 {
        return Err(Error::InvalidArgument("a_n is defined for n >= -1".into()));
    }
    let scale = lambda1.norm().max(lambda2.norm()).max(1.0);
    let gap = (lambda1 - lambda2).norm() / scale;
    if gap <= EIGEN_GAP_TOLERANCE {
        return Err(Error::DegenerateSpectrum { gap });
    }
    let k = (n + 1) as i32;
    let value = (lambda1.powi(k) - lambda2.powi(k)) / (lambda1 - lambda2);
    if value.im.abs() > 1e-9 * value.re.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "eigenvalues are not a conjugate pair: imaginary residue {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Roots of `λ² − τλ + δ`.
pub fn eigenvalues_2d(tau: f64, delta: f64) -> (Complex64, Complex64) {
    let disc = Complex64::new(tau * tau - 4.0 * delta, 0.0).sqrt();
    ((tau + disc) / 2.0, (tau - disc) / 2.0)
}

/// `Mⁿ = [[a_n, a_{n−1}], [−δ a_{n−1}, −δ a_{n−2}]]`.
pub fn power_2d_closed(tau: f64, delta: f64, n: usize) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let a = a_sequence(tau, delta, n as i64);
    // a[k + 1] = a_k
    let a_at = |k: usize| a[k + 1];
    let an = a_at(n);
    let an1 = a_at(n - 1);
    let an2 = if n >= 2 { a_at(n - 2) } else { 0.0 };
    let out = DenseMatrix::from_raw(2, vec![an, an1, -delta * an1, -delta * an2]);
    if !out.is_finite() {
        return Err(Error::Overflow {
            row: 1,
            index: n as i64,
        });
    }
    Ok(out)
}

/// Threshold on `|1 − τ + δ|` below which [`phi_2d_closed`] refuses to divide.
pub const EIGENVALUE_ONE_TOLERANCE: f64 = 1e-12;

/// `I + M + … + M^(n−1) = [[f_n, f_{n−1}], [−δ f_{n−1}, 1 − δ f_{n−2}]]` with
/// `f_k = (1 − a_k + δ a_{k−1}) / (1 − τ + δ)`.
pub fn phi_2d_closed(tau: f64, delta: f64, n: usize) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one term".into()));
    }
    let denominator = 1.0 - tau + delta;
    if denominator.abs() <= EIGENVALUE_ONE_TOLERANCE {
        return Err(Error::EigenvalueOne {
            denominator: denominator.abs(),
        });
    }
    let a = a_sequence(tau, delta, n as i64);
    let a_at = |k: i64| if k < -1 { 0.0 } else { a[(k + 1) as usize] };
    // δ·a_{−2} = −1 by running the recurrence backwards from a_0 = 1, a_{−1} = 0.
    let delta_a = |k: i64| if k == -2 { -1.0 } else { delta * a_at(k) };
    let f = |k: i64| (1.0 - a_at(k) + delta_a(k - 1)) / denominator;

    let n = n as i64;
    let out = DenseMatrix::from_raw(2, vec![f(n), f(n - 1), -delta * f(n - 1), 1.0 - delta * f(n - 2)]);
    if !out.is_finite() {
        return Err(Error::Overflow { row: 1, index: n });
    }
    Ok(out)
}
