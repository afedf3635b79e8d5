//! Powers and geometric sums of border-collision normal-form matrices, and
//! the periodic-orbit machinery built on top of them.
//!
//! The central routine is [`gamma_power::power`], which raises an
//! `N`-dimensional normal-form matrix to the `n`-th power with `N²n`
//! multiplications by running one scalar linear recurrence per row.
//! [`orbit_analysis`] uses it to locate and classify periodic orbits of the
//! piecewise-linear normal-form map, [`region_scanner`] sweeps parameter
//! planes, and [`bench_harness`] times the method against brute-force
//! multiplication and diagonalization.

pub mod bench_harness;
pub mod dense_linalg;
pub mod error;
pub mod format;
pub mod gamma_power;
pub mod normal_form;
pub mod orbit_analysis;
pub mod region_scanner;

pub use dense_linalg::{DenseMatrix, Polynomial};
pub use error::{Error, Result};
pub use gamma_power::{geometric_sum, power, GammaState};
pub use normal_form::{NormalFormMatrix, PWLMap, Point, Symbol, SymbolWord};
pub use orbit_analysis::{classify_orbit, FailureReason, OrbitRecord};
