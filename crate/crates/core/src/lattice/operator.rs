use nalgebra::DMatrix;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Fractional centered-difference weights
/// `w_k = (-1)^k Γ(2s+1) / (Γ(s-k+1) Γ(s+k+1))` for `k = 0..=k_max`.
///
/// Only `w_0` goes through the Gamma function; the rest follow from
/// `w_{k+1} = w_k (k - s) / (k + 1 + s)`, which stays finite for any `k`.
pub fn fcd_weights(s: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Order(s));
    }
    if k_max < 1 {
        return Err(Error::InvalidArgument(
            "weight span must be at least 1".into(),
        ));
    }
    let mut w = Vec::with_capacity(k_max + 1);
    w.push(gamma(2.0 * s + 1.0) / gamma(s + 1.0).powi(2));
    for k in 0..k_max {
        let next = w[k] * (k as f64 - s) / (k as f64 + 1.0 + s);
        w.push(next);
    }
    Ok(w)
}

/// Normalisation constant of the 1D integral fractional Laplacian,
/// `c_{1,s} = 4^s Γ(1/2 + s) / (√π |Γ(-s)|)`.
pub fn normalization_constant(s: f64) -> f64 {
    4f64.powf(s) * gamma(0.5 + s) / (std::f64::consts::PI.sqrt() * gamma(-s).abs())
}

/// Discrete fractional Laplacian `h^{-2s} Σ_k w_{|k|} u_{i-k}` on a uniform
/// lattice; fields are taken to vanish outside the truncated domain.
#[derive(Debug, Clone)]
pub struct FracLapOp {
    pub s: f64,
    pub h: f64,
    /// `w_0..=w_K`; the negative-index half is implied by symmetry.
    pub weights: Vec<f64>,
    pub c1s: f64,
    /// `h^{-2s}`.
    pub scale: f64,
}

impl FracLapOp {
    pub fn new(s: f64, h: f64, span: usize) -> Result<Self> {
        let weights = fcd_weights(s, span)?;
        Ok(Self {
            s,
            h,
            weights,
            c1s: normalization_constant(s),
            scale: h.powf(-2.0 * s),
        })
    }

    pub fn span(&self) -> usize {
        self.weights.len() - 1
    }

    /// Matrix entry coupling nodes `i` and `j`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let k = i.abs_diff(j);
        if k > self.span() {
            0.0
        } else {
            self.scale * self.weights[k]
        }
    }

    #[inline]
    fn value_at(&self, field: &[f64], i: usize) -> f64 {
        let n = field.len();
        let span = self.span();
        let lo = i.saturating_sub(span);
        let hi = (i + span).min(n - 1);
        // fixed left-to-right order keeps results bit-reproducible
        let mut acc = 0.0;
        for (j, &u) in field.iter().enumerate().take(hi + 1).skip(lo) {
            acc += self.weights[i.abs_diff(j)] * u;
        }
        self.scale * acc
    }

    /// Operator values at the requested node indices.
    pub fn apply_at(&self, field: &[f64], at: &[usize]) -> Result<Vec<f64>> {
        let n = field.len();
        if let Some(&bad) = at.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                n_nodes: n,
            });
        }
        Ok(at.par_iter().map(|&i| self.value_at(field, i)).collect())
    }

    /// Operator values at every node.
    pub fn apply(&self, field: &[f64]) -> Vec<f64> {
        (0..field.len())
            .into_par_iter()
            .map(|i| self.value_at(field, i))
            .collect()
    }

    /// Dense block `A[rows, cols]`.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |r, c| self.entry(rows[r], cols[c]))
    }
}

/// Assembles the operator with a weight span covering the whole truncated
/// domain (`K = n_nodes - 1`).
pub fn assemble_operator(grid: &GridSpec, s: f64) -> Result<FracLapOp> {
    FracLapOp::new(s, grid.h, grid.n_nodes - 1)
}
