//! Solvers for the one-dimensional fractional Schrödinger exterior-value problem
//!
//! ```text
//! ((-Δ)^s + q) u = g   in Ω,
//!              u = f   in Ωₑ = ℝ \ Ω̄,
//! ```
//!
//! and for the simultaneous reconstruction of the potential `q` and the
//! internal source `g` from exterior measurements `(-Δ)^s u |_{W₂}` taken
//! under two different exterior sources `f`, `f̃`.
//!
//! The crate is split into four layers:
//!
//! - [`lattice`]: the truncated uniform grid, the discrete fractional
//!   Laplacian (fractional centered differences), a principal-value quadrature
//!   oracle and the discrete coercivity check.
//! - [`field`]: state, adjoint and sensitivity solves plus exterior traces.
//! - [`inverse`]: Tikhonov functional, adjoint-state gradient and the
//!   Fletcher–Reeves conjugate gradient reconstruction.
//! - [`experiment`]: synthetic data, the two reference experiments, gradient
//!   checks and CSV/SVG output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod field;
pub mod inverse;
pub mod lattice;
pub mod quadrature;

pub use error::{Error, Result};
pub use field::{
    mollified_source, ExteriorData, FieldSolution, InteriorSystem, Medium, SourceProfile,
    TraceData,
};
pub use inverse::{
    reconstruct, CgConfig, CgState, IterationRecord, Observation, Penalty, PenaltyEnds,
    Reconstruction, Sources, Termination,
};
pub use lattice::{
    assemble_operator, build_grid, check_coercivity, fcd_weights, oracle_fraclap,
    CoercivityReport, Discretization, FracLapOp, GridSpec, RegionIndex,
};
