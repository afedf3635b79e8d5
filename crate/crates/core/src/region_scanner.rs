//! Parameter-plane sweeps recording which orbits of a word family exist and
//! are stable in each grid cell.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::fmt_sig17;
use crate::normal_form::{NormalFormMatrix, PWLMap, Symbol, SymbolWord};
use crate::orbit_analysis::{classify_orbit, FailureReason};

/// One swept parameter: `steps` evenly spaced values from `min` to `max`.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(param: impl Into<String>, min: f64, max: f64, steps: usize) -> Self {
        Self {
            param: param.into(),
            min,
            max,
            steps,
        }
    }

    pub fn value(&self, k: usize) -> f64 {
        self.min + (self.max - self.min) * k as f64 / (self.steps - 1) as f64
    }
}

/// A map parameter: coefficient `ρ_index` (1-based) of one piece, or `μ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    Rho(Symbol, usize),
    Mu,
}

/// Resolves a parameter name for a map of dimension `dim`.
///
/// `mu` and `rho_L[i]` / `rho_R[i]` work in every dimension; `tau_*`,
/// `delta_*` (2D and 3D) and `sigma_*` (3D) are aliases.
pub fn parse_param(name: &str, dim: usize) -> Result<Param> {
    if name == "mu" {
        return Ok(Param::Mu);
    }
    let unknown = || Error::InvalidArgument(format!("unknown parameter {name:?} for dimension {dim}"));
    let side = |s: &str| match s {
        "L" => Some(Symbol::L),
        "R" => Some(Symbol::R),
        _ => None,
    };
    if let Some(rest) = name.strip_prefix("rho_") {
        let (s, index) = rest.split_once('[').ok_or_else(unknown)?;
        let index = index.strip_suffix(']').ok_or_else(unknown)?;
        let index: usize = index.parse().map_err(|_| unknown())?;
        let symbol = side(s).ok_or_else(unknown)?;
        if index == 0 || index > dim {
            return Err(unknown());
        }
        return Ok(Param::Rho(symbol, index));
    }
    let (base, s) = name.rsplit_once('_').ok_or_else(unknown)?;
    let symbol = side(s).ok_or_else(unknown)?;
    let index = match (base, dim) {
        ("tau", 2 | 3) => 1,
        ("sigma", 3) => 2,
        ("delta", 2 | 3) => dim,
        _ => return Err(unknown()),
    };
    Ok(Param::Rho(symbol, index))
}

/// Definition of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec {
    pub dim: usize,
    pub x_axis: Axis,
    pub y_axis: Axis,
    /// Values of every parameter not on an axis. `mu` defaults to 1.
    pub fixed: BTreeMap<String, f64>,
    pub family: Vec<SymbolWord>,
}

impl ScanSpec {
    /// 3D sweep of `(τ_L, τ_R)` with `σ_L = σ_R = 1.4`, `δ_L = δ_R = 0.7`,
    /// `μ = 1` over the family `LⁿR`, `n = 1..=n_max`.
    pub fn lnr_3d(range: (f64, f64), steps: usize, n_max: usize) -> Self {
        let fixed = [
            ("sigma_L", 1.4),
            ("sigma_R", 1.4),
            ("delta_L", 0.7),
            ("delta_R", 0.7),
            ("mu", 1.0),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect();
        Self {
            dim: 3,
            x_axis: Axis::new("tau_L", range.0, range.1, steps),
            y_axis: Axis::new("tau_R", range.0, range.1, steps),
            fixed,
            family: (1..=n_max)
                .map(|n| SymbolWord::lmrn(n, 1).expect("positive runs"))
                .collect(),
        }
    }

    /// Checks the spec and returns, for every parameter, where its value comes from.
    fn resolve(&self) -> Result<ResolvedSpec> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        for axis in [&self.x_axis, &self.y_axis] {
            if axis.steps < 2 {
                return Err(Error::InvalidArgument(format!(
                    "axis {} needs at least 2 steps",
                    axis.param
                )));
            }
            if !(axis.min.is_finite() && axis.max.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "axis {} has a non-finite bound",
                    axis.param
                )));
            }
        }
        if self.family.is_empty() {
            return Err(Error::InvalidArgument("word family is empty".into()));
        }
        if let Some(w) = self.family.iter().find(|w| !w.is_canonical()) {
            return Err(Error::InvalidArgument(format!("word {w} is not canonical")));
        }

        let x = parse_param(&self.x_axis.param, self.dim)?;
        let y = parse_param(&self.y_axis.param, self.dim)?;
        if x == y {
            return Err(Error::InvalidArgument("axis parameters must differ".into()));
        }
        let mut base: BTreeMap<Param, Option<f64>> = BTreeMap::new();
        base.insert(x, None);
        base.insert(y, None);
        for (name, &value) in &self.fixed {
            let p = parse_param(name, self.dim)?;
            if !value.is_finite() {
                return Err(Error::InvalidArgument(format!("parameter {name} is not finite")));
            }
            if base.insert(p, Some(value)).is_some() {
                return Err(Error::InvalidArgument(format!("parameter {name} is bound twice")));
            }
        }
        base.entry(Param::Mu).or_insert(Some(1.0));

        let mut left = vec![0.0; self.dim];
        let mut right = vec![0.0; self.dim];
        let mut mu = 0.0;
        for side in [Symbol::L, Symbol::R] {
            for i in 1..=self.dim {
                match base.get(&Param::Rho(side, i)) {
                    Some(Some(v)) => match side {
                        Symbol::L => left[i - 1] = *v,
                        Symbol::R => right[i - 1] = *v,
                    },
                    Some(None) => {}
                    None => {
                        return Err(Error::InvalidArgument(format!(
                            "parameter rho_{side}[{i}] is not bound"
                        )))
                    }
                }
            }
        }
        if let Some(Some(v)) = base.get(&Param::Mu) {
            mu = *v;
        }
        Ok(ResolvedSpec { x, y, left, right, mu })
    }
}

struct ResolvedSpec {
    x: Param,
    y: Param,
    left: Vec<f64>,
    right: Vec<f64>,
    mu: f64,
}

impl ResolvedSpec {
    fn map_at(&self, x: f64, y: f64) -> Result<PWLMap> {
        let mut left = self.left.clone();
        let mut right = self.right.clone();
        let mut mu = self.mu;
        for (p, v) in [(self.x, x), (self.y, y)] {
            match p {
                Param::Mu => mu = v,
                Param::Rho(Symbol::L, i) => left[i - 1] = v,
                Param::Rho(Symbol::R, i) => right[i - 1] = v,
            }
        }
        let dim = left.len();
        PWLMap::new(
            NormalFormMatrix::new(dim, left)?,
            NormalFormMatrix::new(dim, right)?,
            mu,
        )
    }
}

/// Per-word verdict in one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WordOutcome {
    pub exists: bool,
    pub stable: bool,
    pub failure: Option<FailureReason>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub x_index: usize,
    pub y_index: usize,
    pub x_value: f64,
    pub y_value: f64,
    /// One entry per family word, in family order.
    pub outcomes: Vec<WordOutcome>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub spec: ScanSpec,
    /// x-major: cell `(i, j)` is at `i * y_steps + j`.
    pub cells: Vec<Cell>,
}

impl ScanResult {
    pub fn cell(&self, x_index: usize, y_index: usize) -> &Cell {
        &self.cells[x_index * self.spec.y_axis.steps + y_index]
    }

    /// Number of cells where family word `word_index` exists and is stable.
    pub fn stable_count(&self, word_index: usize) -> usize {
        self.cells.iter().filter(|c| c.outcomes[word_index].stable).count()
    }
}

fn evaluate_cell(spec: &ScanSpec, resolved: &ResolvedSpec, index: usize) -> Cell {
    let ny = spec.y_axis.steps;
    let (x_index, y_index) = (index / ny, index % ny);
    let x_value = spec.x_axis.value(x_index);
    let y_value = spec.y_axis.value(y_index);
    let outcomes = match resolved.map_at(x_value, y_value) {
        Ok(map) => spec
            .family
            .iter()
            .map(|word| match classify_orbit(&map, word) {
                Ok(rec) => WordOutcome {
                    exists: rec.exists,
                    stable: rec.stable,
                    failure: rec.failure_reason,
                },
                Err(_) => WordOutcome {
                    exists: false,
                    stable: false,
                    failure: Some(FailureReason::Overflow),
                },
            })
            .collect(),
        Err(_) => vec![
            WordOutcome {
                exists: false,
                stable: false,
                failure: Some(FailureReason::Diverged),
            };
            spec.family.len()
        ],
    };
    Cell {
        x_index,
        y_index,
        x_value,
        y_value,
        outcomes,
    }
}

/// Runs the sweep on the global rayon pool.
pub fn scan(spec: &ScanSpec) -> Result<ScanResult> {
    scan_with_threads(spec, None)
}

/// Runs the sweep on `threads` workers (`Some(1)` is fully sequential).
/// Output does not depend on the thread count.
pub fn scan_with_threads(spec: &ScanSpec, threads: Option<usize>) -> Result<ScanResult> {
    let resolved = spec.resolve()?;
    let total = spec.x_axis.steps * spec.y_axis.steps;
    let cells = match threads {
        Some(1) => (0..total).map(|i| evaluate_cell(spec, &resolved, i)).collect(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(|| {
                (0..total)
                    .into_par_iter()
                    .map(|i| evaluate_cell(spec, &resolved, i))
                    .collect()
            })
        }
        None => (0..total)
            .into_par_iter()
            .map(|i| evaluate_cell(spec, &resolved, i))
            .collect(),
    };
    Ok(ScanResult {
        spec: spec.clone(),
        cells,
    })
}

/// Writes `x_param,y_param,x_value,y_value,<word>_exists,<word>_stable,…`,
/// one row per cell in x-major order.
pub fn write_scan_csv<W: Write>(result: &ScanResult, mut out: W) -> Result<()> {
    let spec = &result.spec;
    let mut header = String::from("x_param,y_param,x_value,y_value");
    for w in &spec.family {
        header.push_str(&format!(",{w}_exists,{w}_stable"));
    }
    writeln!(out, "{header}")?;
    let flag = |b: bool| if b { "1" } else { "0" };
    for cell in &result.cells {
        let mut line = format!(
            "{},{},{},{}",
            spec.x_axis.param,
            spec.y_axis.param,
            fmt_sig17(cell.x_value),
            fmt_sig17(cell.y_value)
        );
        for o in &cell.outcomes {
            line.push(',');
            line.push_str(flag(o.exists));
            line.push(',');
            line.push_str(flag(o.stable));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}
