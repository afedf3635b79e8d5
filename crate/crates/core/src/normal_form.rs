//! Normal-form matrices, the two-piece continuous map built from them, and
//! the L/R symbol convention.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dense_linalg::{DenseMatrix, Polynomial};
use crate::error::{Error, Result};

/// Magnitude beyond which an orbit is treated as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e150;

/// Companion-like matrix determined by the signed symmetric functions of its
/// eigenvalues.
///
/// Row `i` (1-based) has `(−1)^(i−1)·ρ_i` in column one and a `1` on the
/// superdiagonal; everything else is zero. In 2D `ρ = (τ, δ)`, in 3D
/// `ρ = (τ, σ, δ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormMatrix {
    rho: Vec<f64>,
}

impl NormalFormMatrix {
    pub fn new(dim: usize, rho: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if rho.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: rho.len(),
            });
        }
        if let Some(bad) = rho.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite coefficient {bad}")));
        }
        Ok(Self { rho })
    }

    /// Builds the matrix whose spectrum is `eigs`. Non-real eigenvalues must
    /// come in conjugate pairs.
    pub fn from_eigenvalues(eigs: &[Complex64]) -> Result<Self> {
        if eigs.is_empty() {
            return Err(Error::InvalidArgument("need at least one eigenvalue".into()));
        }
        check_conjugate_pairs(eigs)?;

        // coeffs of Π (λ − e_k), leading first.
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &e in eigs {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * e;
            }
            coeffs = next;
        }
        let rho = coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| if i % 2 == 0 { -c.re } else { c.re })
            .collect();
        Self::new(eigs.len(), rho)
    }

    pub fn dim(&self) -> usize {
        self.rho.len()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Column one of the materialized matrix: `(−1)^(i−1)·ρ_i`.
    pub fn column_one(&self) -> Vec<f64> {
        self.rho
            .iter()
            .enumerate()
            .map(|(i, &r)| if i % 2 == 0 { r } else { -r })
            .collect()
    }

    pub fn materialize(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n);
        for (i, c) in self.column_one().into_iter().enumerate() {
            m[(i, 0)] = c;
            if i + 1 < n {
                m[(i, i + 1)] = 1.0;
            }
        }
        m
    }

    /// `λ^N − ρ₁λ^(N−1) + ρ₂λ^(N−2) − … + (−1)^N ρ_N`, read off directly.
    pub fn characteristic_polynomial(&self) -> Polynomial {
        let mut coeffs = Vec::with_capacity(self.dim() + 1);
        coeffs.push(1.0);
        coeffs.extend(
            self.rho
                .iter()
                .enumerate()
                .map(|(i, &r)| if i % 2 == 0 { -r } else { r }),
        );
        Polynomial::new(coeffs).expect("monic polynomial")
    }

    /// `M·x` in `O(N)`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let x1 = x[0];
        (0..n)
            .map(|i| {
                let c = if i % 2 == 0 { self.rho[i] } else { -self.rho[i] };
                let shifted = if i + 1 < n { x[i + 1] } else { 0.0 };
                c * x1 + shifted
            })
            .collect()
    }
}

/// Shorthand for [`NormalFormMatrix::new`].
pub fn make_normal_matrix(dim: usize, rho: Vec<f64>) -> Result<NormalFormMatrix> {
    NormalFormMatrix::new(dim, rho)
}

fn check_conjugate_pairs(eigs: &[Complex64]) -> Result<()> {
    let is_real = |z: &Complex64| z.im.abs() <= 1e-12 * (1.0 + z.norm());
    let mut used = vec![false; eigs.len()];
    for i in 0..eigs.len() {
        if used[i] || is_real(&eigs[i]) {
            continue;
        }
        let target = eigs[i].conj();
        let partner = (0..eigs.len()).find(|&j| {
            j != i && !used[j] && !is_real(&eigs[j]) && (eigs[j] - target).norm() <= 1e-12 * (1.0 + target.norm())
        });
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => {
                return Err(Error::InvalidArgument(format!(
                    "complex eigenvalue {} has no conjugate partner",
                    eigs[i]
                )))
            }
        }
    }
    Ok(())
}

/// Phase-space point `(x₁, …, x_N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn origin(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn dist_inf(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    L,
    R,
}

impl Symbol {
    pub fn flip(self) -> Self {
        match self {
            Symbol::L => Symbol::R,
            Symbol::R => Symbol::L,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::L => 'L',
            Symbol::R => 'R',
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// `L` when `x₁ ≤ 0` (the border belongs to the left piece), else `R`.
pub fn symbol_of(x: &Point) -> Symbol {
    if x.0[0] <= 0.0 {
        Symbol::L
    } else {
        Symbol::R
    }
}

/// `X ↦ M_J·X + (μ, 0, …, 0)ᵀ` with `J` chosen by the sign of `x₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct PWLMap {
    left: NormalFormMatrix,
    right: NormalFormMatrix,
    mu: f64,
}

impl PWLMap {
    pub fn new(left: NormalFormMatrix, right: NormalFormMatrix, mu: f64) -> Result<Self> {
        if left.dim() != right.dim() {
            return Err(Error::DimensionMismatch {
                expected: left.dim(),
                got: right.dim(),
            });
        }
        if !mu.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite mu {mu}")));
        }
        Ok(Self { left, right, mu })
    }

    pub fn dim(&self) -> usize {
        self.left.dim()
    }

    pub fn left(&self) -> &NormalFormMatrix {
        &self.left
    }

    pub fn right(&self) -> &NormalFormMatrix {
        &self.right
    }

    pub fn matrix(&self, symbol: Symbol) -> &NormalFormMatrix {
        match symbol {
            Symbol::L => &self.left,
            Symbol::R => &self.right,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn zeta(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.dim()];
        z[0] = self.mu;
        z
    }

    /// One step of the map.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        let mut next = self.matrix(symbol_of(x)).mul_vec(&x.0);
        next[0] += self.mu;
        Ok(Point(next))
    }
}

pub fn apply_map(map: &PWLMap, x: &Point) -> Result<Point> {
    map.apply(x)
}

/// Forward orbit `x₀ … x_steps` and the symbols of `x₀ … x_(steps−1)`.
pub fn itinerary(map: &PWLMap, x0: &Point, steps: usize) -> Result<(Vec<Point>, Vec<Symbol>)> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let mut points = Vec::with_capacity(steps + 1);
    let mut symbols = Vec::with_capacity(steps);
    points.push(x0.clone());
    for step in 1..=steps {
        let current = &points[step - 1];
        symbols.push(symbol_of(current));
        let next = map.apply(current)?;
        if next.0.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
            return Err(Error::Diverged { step });
        }
        points.push(next);
    }
    Ok((points, symbols))
}

/// Alternating run-length itinerary such as `L²R` (`L2R1`).
///
/// Canonical words start with `L` and end with `R`. The orbit point `X₀`
/// carries the final `R`; iterating the map walks the runs from last to first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolWord {
    runs: Vec<(Symbol, usize)>,
}

impl SymbolWord {
    /// Any nonempty alternating sequence of runs with positive counts.
    pub fn from_runs(runs: Vec<(Symbol, usize)>) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::InvalidArgument("symbol word must have at least one run".into()));
        }
        if runs.iter().any(|&(_, count)| count == 0) {
            return Err(Error::InvalidArgument("run counts must be positive".into()));
        }
        if runs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument(
                "consecutive runs must alternate between L and R".into(),
            ));
        }
        Ok(Self { runs })
    }

    /// Alternating runs that start with `L` and end with `R`.
    pub fn canonical(runs: Vec<(Symbol, usize)>) -> Result<Self> {
        let word = Self::from_runs(runs)?;
        if !word.is_canonical() {
            return Err(Error::InvalidArgument(format!(
                "word {word} must start with L and end with R"
            )));
        }
        Ok(word)
    }

    /// `L^m R^n`.
    pub fn lmrn(m: usize, n: usize) -> Result<Self> {
        Self::canonical(vec![(Symbol::L, m), (Symbol::R, n)])
    }

    pub fn runs(&self) -> &[(Symbol, usize)] {
        &self.runs
    }

    pub fn is_canonical(&self) -> bool {
        self.runs.first().map(|r| r.0) == Some(Symbol::L) && self.runs.last().map(|r| r.0) == Some(Symbol::R)
    }

    pub fn total_period(&self) -> usize {
        self.runs.iter().map(|r| r.1).sum()
    }

    /// Symbols in written order.
    pub fn symbols(&self) -> Vec<Symbol> {
        self.runs
            .iter()
            .flat_map(|&(s, count)| std::iter::repeat_n(s, count))
            .collect()
    }

    /// Symbols of `X₀, X₁, …` along the cycle: runs visited last to first.
    pub fn cycle_symbols(&self) -> Vec<Symbol> {
        self.runs
            .iter()
            .rev()
            .flat_map(|&(s, count)| std::iter::repeat_n(s, count))
            .collect()
    }

    /// False when the expanded word is a repetition of a shorter word.
    pub fn is_primitive(&self) -> bool {
        let s = self.symbols();
        let n = s.len();
        !(1..n).any(|p| n.is_multiple_of(p) && (p..n).all(|i| s[i] == s[i - p]))
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, count) in &self.runs {
            write!(f, "{s}{count}")?;
        }
        Ok(())
    }
}

impl FromStr for SymbolWord {
    type Err = Error;

    /// Strict parser for canonical run-length words such as `L3R2`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidArgument(format!("malformed word {s:?}: {why}"));
        let mut runs = Vec::new();
        let mut chars = s.char_indices().peekable();
        while let Some((_, c)) = chars.next() {
            let symbol = match c {
                'L' => Symbol::L,
                'R' => Symbol::R,
                _ => return Err(bad("expected L or R")),
            };
            let mut digits = String::new();
            while let Some(&(_, d)) = chars.peek() {
                if d.is_ascii_digit() {
                    digits.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            if digits.is_empty() {
                return Err(bad("every symbol needs a run count"));
            }
            let count: usize = digits.parse().map_err(|_| bad("run count out of range"))?;
            runs.push((symbol, count));
        }
        Self::canonical(runs)
    }
}
