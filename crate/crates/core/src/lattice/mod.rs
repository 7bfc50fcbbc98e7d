//! Lattice, discrete fractional Laplacian, quadrature oracle and the
//! coercivity check.

mod coercivity;
mod grid;
mod operator;
mod oracle;

pub use coercivity::{check_coercivity, min_interior_row_sum, CoercivityReport};
pub use grid::{build_grid, GridSpec, RegionIndex};
pub use operator::{assemble_operator, fcd_weights, normalization_constant, FracLapOp};
pub use oracle::oracle_fraclap;

use crate::error::Result;

/// A grid, its region index and the assembled operator, bundled because
/// every solve needs all three.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub grid: GridSpec,
    pub regions: RegionIndex,
    pub op: FracLapOp,
}

impl Discretization {
    pub fn new(grid: GridSpec, regions: RegionIndex, s: f64) -> Result<Self> {
        let op = assemble_operator(&grid, s)?;
        Ok(Self { grid, regions, op })
    }

    /// `[x_min, x_max]` with Ω = `omega` resolved by `n_omega` cells and a
    /// one-cell gap.
    pub fn uniform(
        x_min: f64,
        x_max: f64,
        omega: (f64, f64),
        n_omega: usize,
        eps_cells: usize,
        s: f64,
    ) -> Result<Self> {
        let (grid, regions) = build_grid(x_min, x_max, omega, n_omega, eps_cells)?;
        Self::new(grid, regions, s)
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.n_nodes
    }

    pub fn n_interior(&self) -> usize {
        self.regions.interior.len()
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn interior_coordinates(&self) -> Vec<f64> {
        self.regions.interior.iter().map(|&i| self.grid.x(i)).collect()
    }

    pub fn coercivity(&self, q: &[f64]) -> CoercivityReport {
        check_coercivity(&self.op, &self.regions, q)
    }
}
