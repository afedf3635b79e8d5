//! Small dense linear algebra used as oracle, solver and benchmark competitor.
//!
//! Nothing here is tuned beyond a cache-friendly loop order; matrices in this
//! crate are at most a few hundred rows.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::{Complex64, ComplexFloat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::normal_form::NormalFormMatrix;

/// Pivot magnitude below which [`lu_solve`] reports a singular matrix.
pub const SINGULAR_PIVOT: f64 = 1e-12;

/// Square real matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data. Rejects wrong lengths and
    /// non-finite entries.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite matrix entry {bad}")));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    /// Wraps data without validation. Used for results of arithmetic whose
    /// finiteness the caller checks separately.
    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_raw(self.dim, self.data.iter().map(|v| v * factor).collect())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "vector length must match matrix dimension");
        self.rows()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Determinant from the LU factorization; zero if a pivot vanishes exactly.
    pub fn determinant(&self) -> f64 {
        match LuFactors::factor(self.dim, self.data.clone(), 0.0) {
            Ok(lu) => lu.determinant(),
            Err(_) => 0.0,
        }
    }

    /// Largest entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (row, col): (usize, usize)) -> &f64 {
        &self.data[row * self.dim + col]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (row, col): (usize, usize)) -> &mut f64 {
        &mut self.data[row * self.dim + col]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;

    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        mat_mul(self, rhs)
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;

    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim);
        DenseMatrix::from_raw(self.dim, self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;

    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim);
        DenseMatrix::from_raw(self.dim, self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect())
    }
}

/// Standard matrix product, i-k-j loop order.
pub fn mat_mul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.dim, b.dim, "matrix dimensions must agree");
    let mut out = vec![0.0; a.dim * a.dim];
    mat_mul_into(a.dim, &a.data, &b.data, &mut out);
    DenseMatrix::from_raw(a.dim, out)
}

fn mat_mul_into(n: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (a_row, out_row) in a.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
        for (&aik, b_row) in a_row.iter().zip(b.chunks_exact(n)) {
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
}

/// `a^n` by `n - 1` successive multiplications.
///
/// No repeated squaring: this is the `O(N³n)` competitor in the benchmark and
/// the reference oracle for the recurrence-based power.
pub fn power_bruteforce(a: &DenseMatrix, n: usize) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let dim = a.dim;
    let mut acc = a.data.clone();
    let mut next = vec![0.0; dim * dim];
    for _ in 2..=n {
        mat_mul_into(dim, &acc, &a.data, &mut next);
        std::mem::swap(&mut acc, &mut next);
    }
    let acc = DenseMatrix::from_raw(dim, acc);
    if acc.is_finite() {
        return Ok(acc);
    }
    // Non-finite values never become finite again, so find where they started.
    let mut probe = a.clone();
    for step in 2..=n {
        probe = mat_mul(&probe, a);
        if !probe.is_finite() {
            return Err(Error::Overflow {
                row: first_non_finite_row(&probe),
                index: step as i64,
            });
        }
    }
    Err(Error::Overflow {
        row: first_non_finite_row(&acc),
        index: n as i64,
    })
}

/// `a^n` by binary exponentiation. Extra benchmark line only; not part of the
/// three-way comparison.
pub fn power_by_squaring(a: &DenseMatrix, n: usize) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let mut result: Option<DenseMatrix> = None;
    let mut base = a.clone();
    let mut e = n;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => mat_mul(&r, &base),
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = mat_mul(&base, &base);
    }
    let result = result.expect("n >= 1 sets at least one bit");
    if !result.is_finite() {
        return Err(Error::Overflow {
            row: first_non_finite_row(&result),
            index: n as i64,
        });
    }
    Ok(result)
}

fn first_non_finite_row(m: &DenseMatrix) -> usize {
    m.rows().position(|r| r.iter().any(|v| !v.is_finite())).unwrap_or(0) + 1
}

struct LuFactors<T> {
    dim: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    swaps: usize,
}

impl<T: ComplexFloat<Real = f64>> LuFactors<T> {
    /// Doolittle LU with partial pivoting. Fails when the best available pivot
    /// is at most `min_pivot` in magnitude.
    fn factor(dim: usize, mut lu: Vec<T>, min_pivot: f64) -> Result<Self> {
        let mut perm: Vec<usize> = (0..dim).collect();
        let mut swaps = 0;
        for col in 0..dim {
            let (pivot_row, pivot_mag) = (col..dim)
                .map(|r| (r, lu[r * dim + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_mag.is_nan() || pivot_mag <= min_pivot {
                return Err(Error::Singular { pivot: pivot_mag });
            }
            if pivot_row != col {
                for j in 0..dim {
                    lu.swap(col * dim + j, pivot_row * dim + j);
                }
                perm.swap(col, pivot_row);
                swaps += 1;
            }
            let pivot = lu[col * dim + col];
            for r in col + 1..dim {
                let factor = lu[r * dim + col] / pivot;
                lu[r * dim + col] = factor;
                for j in col + 1..dim {
                    let upper = lu[col * dim + j];
                    lu[r * dim + j] = lu[r * dim + j] - factor * upper;
                }
            }
        }
        Ok(Self { dim, lu, perm, swaps })
    }

    fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[i * n + k];
                x[i] = x[i] - l * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[i * n + k];
                x[i] = x[i] - u * x[k];
            }
            x[i] = x[i] / self.lu[i * n + i];
        }
        x
    }

    fn determinant(&self) -> T {
        let mut det = (0..self.dim).fold(T::one(), |acc, i| acc * self.lu[i * self.dim + i]);
        if self.swaps % 2 == 1 {
            det = -det;
        }
        det
    }
}

/// Solution of a linear system together with its residual check.
#[derive(Clone, Debug, PartialEq)]
pub struct LuSolution {
    pub x: Vec<f64>,
    /// `‖a·x − b‖∞`.
    pub residual: f64,
    /// Set when the residual exceeds `1e-8·(1 + ‖b‖∞)`.
    pub residual_warning: bool,
}

/// Solves `a·x = b` by LU with partial pivoting.
pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<LuSolution> {
    if b.len() != a.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.len(),
        });
    }
    let lu = LuFactors::factor(a.dim, a.data.clone(), SINGULAR_PIVOT)?;
    let x = lu.solve(b);
    let ax = a.mul_vec(&x);
    let residual = ax.iter().zip(b).fold(0.0_f64, |acc, (l, r)| acc.max((l - r).abs()));
    let b_norm = b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    Ok(LuSolution {
        x,
        residual,
        residual_warning: residual.is_nan() || residual > 1e-8 * (1.0 + b_norm),
    })
}

/// Real polynomial, leading coefficient first.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Normalizes to monic. Leading zeros are stripped; an all-zero input is
    /// rejected.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let first = coeffs
            .iter()
            .position(|&c| c != 0.0)
            .ok_or_else(|| Error::InvalidArgument("polynomial has no nonzero coefficient".into()))?;
        let lead = coeffs[first];
        let coeffs = coeffs[first..].iter().map(|c| c / lead).collect();
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and derivative by Horner's scheme.
    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in &self.coeffs {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `k`-th derivative (not normalized to monic).
    fn derivative(&self, k: usize) -> Polynomial {
        let mut coeffs = self.coeffs.clone();
        for _ in 0..k.min(self.degree()) {
            let d = coeffs.len() - 1;
            coeffs = coeffs[..d]
                .iter()
                .enumerate()
                .map(|(i, c)| c * (d - i) as f64)
                .collect();
        }
        Polynomial { coeffs }
    }

    /// `Σ |c_i|·|z|^(deg-i)`, the rounding scale of a Horner evaluation at `z`.
    fn eval_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().fold(0.0, |acc, c| acc * r + c.abs())
    }
}

/// Characteristic polynomial `det(λI − a)` by Faddeev–LeVerrier.
pub fn char_poly(a: &DenseMatrix) -> Polynomial {
    let n = a.dim;
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(1.0);
    let mut m = DenseMatrix::identity(n);
    for k in 1..=n {
        let am = mat_mul(a, &m);
        let c = -am.trace() / k as f64;
        coeffs.push(c);
        m = am;
        for i in 0..n {
            m[(i, i)] += c;
        }
    }
    Polynomial { coeffs }
}

const ABERTH_MAX_ITERATIONS: usize = 200;
const ABERTH_SEED: u64 = 0x5eed_ab37;

/// All complex roots by Aberth–Ehrlich simultaneous iteration.
///
/// Starts from a circle of radius `1 + max|coeff|` with a seeded random phase.
/// A root is accepted when `|p(z)| ≤ 1e-9·max(1 + max|coeff|, Σ|c_i||z|^(deg-i))`;
/// the second term only matters for high-degree polynomials with roots away
/// from the unit disc, where Horner rounding alone exceeds the first.
/// Clustered roots converge linearly and are only accurate to about
/// `ε^(1/multiplicity)`.
pub fn poly_roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    let deg = p.degree();
    if deg == 0 {
        return Err(Error::InvalidArgument("polynomial must have degree at least 1".into()));
    }
    let max_coeff = p.coeffs[1..].iter().fold(0.0_f64, |acc, c| acc.max(c.abs()));
    if deg == 1 {
        return Ok(vec![Complex64::new(-p.coeffs[1], 0.0)]);
    }

    let radius = 1.0 + max_coeff;
    let mut rng = ChaCha8Rng::seed_from_u64(ABERTH_SEED);
    let offset: f64 = rng.gen_range(0.0..TAU / deg as f64);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let jitter: f64 = rng.gen_range(-0.1..0.1);
            Complex64::from_polar(radius, offset + TAU * k as f64 / deg as f64 + jitter / deg as f64)
        })
        .collect();

    let mut iterations = 0;
    while iterations < ABERTH_MAX_ITERATIONS {
        iterations += 1;
        let mut max_step = 0.0_f64;
        for k in 0..deg {
            let (value, deriv) = p.eval_with_derivative(z[k]);
            if value == Complex64::new(0.0, 0.0) {
                continue;
            }
            let newton = value / deriv;
            let repulsion: Complex64 = (0..deg).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let step = newton / (Complex64::new(1.0, 0.0) - newton * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if max_step <= 1e-15 {
            break;
        }
    }

    let residuals: Vec<f64> = z
        .iter()
        .map(|&r| {
            let bound = 1e-9 * (1.0 + max_coeff).max(p.eval_scale(r));
            p.eval(r).norm() / bound
        })
        .collect();
    let max_residual = residuals.iter().fold(0.0_f64, |a, &b| a.max(b));
    if max_residual.is_nan() || max_residual > 1.0 || z.iter().any(|r| !r.is_finite()) {
        return Err(Error::NoConvergence {
            iterations,
            residuals,
            max_residual,
        });
    }
    Ok(z)
}

/// Roots closer than this (relative) are treated as one unresolved multiple root.
const CLUSTER_TOLERANCE: f64 = 1e-5;

/// Replaces each cluster of nearby roots of `p` by a single refined root and
/// its multiplicity.
///
/// A `k`-fold root comes back from [`poly_roots`] as `k` points spread by
/// about `ε^(1/k)`. It is a simple root of the `(k−1)`-th derivative, so a few
/// Newton steps on that derivative from the cluster centroid recover it to
/// near machine precision.
pub fn merge_root_clusters(p: &Polynomial, roots: &[Complex64]) -> Vec<(Complex64, usize)> {
    let n = roots.len();
    let mut cluster: Vec<usize> = (0..n).collect();
    fn find(c: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while c[r] != r {
            r = c[r];
        }
        c[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() <= CLUSTER_TOLERANCE * scale {
                let (a, b) = (find(&mut cluster, i), find(&mut cluster, j));
                cluster[a.max(b)] = a.min(b);
            }
        }
    }
    let mut merged: Vec<(usize, Complex64, usize)> = Vec::new();
    for (i, &z) in roots.iter().enumerate() {
        let root = find(&mut cluster, i);
        match merged.iter_mut().find(|m| m.0 == root) {
            Some(m) => {
                m.1 += z;
                m.2 += 1;
            }
            None => merged.push((root, z, 1)),
        }
    }
    merged
        .into_iter()
        .map(|(_, sum, count)| {
            let centroid = sum / count as f64;
            if count == 1 {
                return (centroid, 1);
            }
            let q = p.derivative(count - 1);
            let mut z = centroid;
            for _ in 0..8 {
                let (value, deriv) = q.eval_with_derivative(z);
                let step = value / deriv;
                if !step.is_finite() {
                    break;
                }
                z -= step;
                if step.norm() <= 1e-16 * (1.0 + z.norm()) {
                    break;
                }
            }
            let spread = CLUSTER_TOLERANCE * centroid.norm().max(1.0);
            if (z - centroid).norm() <= spread {
                (z, count)
            } else {
                (centroid, count)
            }
        })
        .collect()
}

/// Largest eigenvalue modulus, with multiple eigenvalues resolved through
/// [`merge_root_clusters`].
pub fn spectral_radius(a: &DenseMatrix) -> Result<f64> {
    if a.dim == 0 {
        return Ok(0.0);
    }
    let p = char_poly(a);
    let roots = poly_roots(&p)?;
    Ok(merge_root_clusters(&p, &roots)
        .iter()
        .fold(0.0, |acc, (r, _)| acc.max(r.norm())))
}

/// Relative eigenvalue gap below which diagonalization refuses to run.
pub const DIAGONALIZATION_GAP: f64 = 1e-8;

/// `m^n = U·Dⁿ·U⁻¹` using the closed-form eigenvectors of the normal form.
///
/// For an eigenvalue `λ` the right eigenvector has `v₁ = 1` and
/// `v_{i+1} = λ·v_i − c_i`, where `c_i` is column one of `m`.
pub fn power_by_diagonalization(m: &NormalFormMatrix, n: usize) -> Result<DenseMatrix> {
    let eigenvalues = poly_roots(&m.characteristic_polynomial())?;
    power_from_eigenvalues(m, &eigenvalues, n)
}

/// Right eigenvector of the normal form with column one `c`, scaled so `v₁ = 1`.
///
/// Rows of `M v = λ v` give `v_{i+1} = λ v_i − c_i` and, from the bottom,
/// `v_N = c_N / λ`, `v_i = (c_i + v_{i+1}) / λ`. The forward recursion
/// multiplies rounding errors by `λ` at every step and the backward one
/// divides by it, so the direction is picked by `|λ|`.
fn eigenvector(c: &[f64], lambda: Complex64) -> Vec<Complex64> {
    let dim = c.len();
    let mut v = vec![Complex64::new(1.0, 0.0); dim];
    if lambda.norm() <= 1.0 {
        for i in 1..dim {
            v[i] = lambda * v[i - 1] - c[i - 1];
        }
    } else {
        let mut next = Complex64::new(0.0, 0.0);
        for i in (1..dim).rev() {
            next = (c[i] + next) / lambda;
            v[i] = next;
        }
    }
    v
}

/// Diagonalization power with precomputed eigenvalues.
pub(crate) fn power_from_eigenvalues(m: &NormalFormMatrix, eigenvalues: &[Complex64], n: usize) -> Result<DenseMatrix> {
    let dim = m.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let gap = min_relative_gap(eigenvalues);
    if gap <= DIAGONALIZATION_GAP {
        return Err(Error::DegenerateSpectrum { gap });
    }

    let column_one = m.column_one();
    let mut u = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        for (i, v) in eigenvector(&column_one, lambda).into_iter().enumerate() {
            u[i * dim + k] = v;
        }
    }

    let lu = LuFactors::factor(dim, u.clone(), 0.0)?;
    let mut u_inv = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut e = vec![Complex64::new(0.0, 0.0); dim];
    for col in 0..dim {
        e.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        e[col] = Complex64::new(1.0, 0.0);
        let x = lu.solve(&e);
        for row in 0..dim {
            u_inv[row * dim + col] = x[row];
        }
    }

    let powered: Vec<Complex64> = eigenvalues.iter().map(|l| l.powu(n as u32)).collect();
    // Scale rows of U⁻¹ by λᵏⁿ, then multiply by U.
    for k in 0..dim {
        for j in 0..dim {
            u_inv[k * dim + j] *= powered[k];
        }
    }
    let mut out = vec![0.0; dim * dim];
    let mut max_imag = 0.0_f64;
    let mut max_real = 0.0_f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += u[i * dim + k] * u_inv[k * dim + j];
            }
            out[i * dim + j] = acc.re;
            max_imag = max_imag.max(acc.im.abs());
            max_real = max_real.max(acc.re.abs());
        }
    }
    if !out.iter().all(|v| v.is_finite()) {
        return Err(Error::Overflow {
            row: 1,
            index: n as i64,
        });
    }
    if max_imag > 1e-8 * max_real.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "diagonalization left an imaginary residue of {max_imag:e}"
        )));
    }
    Ok(DenseMatrix::from_raw(dim, out))
}

/// Smallest `|λi − λj| / max(|λi|, |λj|, 1)` over all pairs.
pub fn min_relative_gap(eigenvalues: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, a) in eigenvalues.iter().enumerate() {
        for b in &eigenvalues[i + 1..] {
            let scale = a.norm().max(b.norm()).max(1.0);
            gap = gap.min((a - b).norm() / scale);
        }
    }
    gap
}
