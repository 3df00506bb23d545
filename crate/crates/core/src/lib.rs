//! Phase-space decompositions of quantum experiments on odd-prime-power
//! dimensional systems.
//!
//! A quantum experiment (a preparation, a chain of unital channels, and a
//! measurement outcome) on a system of dimension `d = p^n` (`p` an odd prime,
//! or the single qubit `d = 2`) is decomposed into a collection of
//! *epistemically restricted* classical probability descriptions over the
//! `d × d` discrete phase space. Each classical description lives in a
//! *framework* `(B', S_n, …, S_1, B)`: a striation for the preparation, one
//! symplectic matrix per channel, and a striation for the measurement. The
//! exact quantum prediction is recovered by summing the nonrandom parts of
//! the per-framework classical predictions.
//!
//! The crate is organized in layers:
//!
//! - [`field`] — exact arithmetic in `F_{p^n}`, field traces, dual bases.
//! - [`phase`] — the `d × d` phase space: lines, striations, symplectic
//!   matrices, minimal reconstructing sets.
//! - [`ops`] — phase-point operators `A_α`, displacements `D_δ`, the
//!   symplectic unitaries `U_S`, and validity checks.
//! - [`quasi`] — quasiprobability representations of states, channels and
//!   measurement effects, and the quasiprobabilistic Born rule.
//! - [`restricted`] — the non-negative restricted distributions `R^B`,
//!   `R^S`, `R^{B'}`, their nonrandom parts, and the reconstruction maps.
//! - [`engine`] — framework enumeration, per-framework classical
//!   predictions, and the quantum prediction as a framework sum.
//! - [`composite`] — multi-particle structure over `F_{r^n}`: per-particle
//!   coordinates, tensor factorization, partial traces.
//! - [`constraint`] — the `Γ` structure function and the global
//!   pure-state / unitary / pure-measurement constraints on `R` families.
//! - [`serial`] — JSON wire formats for all of the above.
//! - [`sampling`] — seeded random states, channels and effects for demos
//!   and tests.

pub mod composite;
pub mod constraint;
pub mod engine;
pub mod error;
pub mod field;
pub mod linalg;
pub mod mrs;
pub mod ops;
pub mod phase;
pub mod quasi;
pub mod restricted;
pub mod sampling;
pub mod serial;
pub mod util;

pub use error::{Error, Result};
pub use field::{FieldBasis, FieldElement, FiniteField};
pub use linalg::CMat;
pub use phase::{Line, PhasePoint, SetMode, Slope, Striation, SymplecticMatrix};

/// Tolerance for validity checks (Hermiticity, trace, positivity, Kraus
/// completeness, unitality).
pub const VALIDITY_TOL: f64 = 1e-9;

/// Tolerance for algebraic identities on `d ≤ 9` operators.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Threshold below which a framework's nonrandom contribution is treated
/// as zero in reports.
pub const CONTRIB_TOL: f64 = 1e-10;
