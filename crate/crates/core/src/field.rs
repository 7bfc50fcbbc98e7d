//! State, adjoint and sensitivity solves on the interior of Ω, and the
//! exterior trace `(-Δ)^s u |_{W₂}`.
//!
//! All three problems share the interior matrix `A_ΩΩ + diag(q)`, so the
//! Cholesky factor is held by [`InteriorSystem`] and reused across solves
//! with the same potential.

use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::lattice::{Discretization, GridSpec, RegionIndex};

/// A pair of interior arrays: the unknowns `(q, g)` of the inverse problem.
/// Gradients and search directions live in the same space and reuse this type.
#[derive(Debug, Clone, PartialEq)]
pub struct Medium {
    pub q: Vec<f64>,
    pub g: Vec<f64>,
}

impl Medium {
    pub fn new(q: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if q.len() != g.len() {
            return Err(Error::Length {
                what: "medium g",
                expected: q.len(),
                got: g.len(),
            });
        }
        if q.iter().chain(&g).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("medium has non-finite entries".into()));
        }
        Ok(Self { q, g })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            q: vec![0.0; n],
            g: vec![0.0; n],
        }
    }

    /// Samples `q(x)`, `g(x)` at the interior nodes.
    pub fn sample(
        disc: &Discretization,
        q: impl Fn(f64) -> f64,
        g: impl Fn(f64) -> f64,
    ) -> Self {
        let xs = disc.interior_coordinates();
        Self {
            q: xs.iter().map(|&x| q(x)).collect(),
            g: xs.iter().map(|&x| g(x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Discrete L² pairing `h Σ (q·q' + g·g')`.
    pub fn dot(&self, other: &Medium, h: f64) -> f64 {
        let q: f64 = self.q.iter().zip(&other.q).map(|(a, b)| a * b).sum();
        let g: f64 = self.g.iter().zip(&other.g).map(|(a, b)| a * b).sum();
        h * (q + g)
    }

    pub fn norm_sq(&self, h: f64) -> f64 {
        self.dot(self, h)
    }

    /// `self + beta · other`
    pub fn add_scaled(&self, beta: f64, other: &Medium) -> Medium {
        Medium {
            q: self.q.iter().zip(&other.q).map(|(a, b)| a + beta * b).collect(),
            g: self.g.iter().zip(&other.g).map(|(a, b)| a + beta * b).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Medium {
        Medium {
            q: self.q.iter().map(|v| c * v).collect(),
            g: self.g.iter().map(|v| c * v).collect(),
        }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        check_len("medium", n, self.q.len())?;
        check_len("medium", n, self.g.len())
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Length {
            what,
            expected,
            got,
        })
    }
}

/// Shape of an exterior source before the smooth cutoff is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceProfile {
    /// `1`
    One,
    /// `e^{-x²}`
    Gauss,
}

impl SourceProfile {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            SourceProfile::One => 1.0,
            SourceProfile::Gauss => (-x * x).exp(),
        }
    }
}

impl FromStr for SourceProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(Self::One),
            "gauss" => Ok(Self::Gauss),
            other => Err(Error::Config(format!(
                "unknown source profile {other:?} (expected \"one\" or \"gauss\")"
            ))),
        }
    }
}

/// Exterior Dirichlet data as a full-length node vector (zero on the interior).
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorData {
    pub values: Vec<f64>,
    /// Nodes where `values` may be nonzero.
    pub support: Vec<usize>,
}

impl ExteriorData {
    pub fn zeros(n_nodes: usize) -> Self {
        Self {
            values: vec![0.0; n_nodes],
            support: Vec::new(),
        }
    }

    /// Data equal to `values[k]` at `nodes[k]` and zero elsewhere.
    pub fn on_nodes(n_nodes: usize, nodes: &[usize], values: &[f64]) -> Result<Self> {
        check_len("exterior values", nodes.len(), values.len())?;
        let mut full = vec![0.0; n_nodes];
        for (&i, &v) in nodes.iter().zip(values) {
            if i >= n_nodes {
                return Err(Error::IndexOutOfRange { index: i, n_nodes });
            }
            full[i] = v;
        }
        Ok(Self {
            values: full,
            support: nodes.to_vec(),
        })
    }
}

/// Smooth cutoff: 1 at distance ≥ `margin` inside `(lo, hi)`, 0 outside, with
/// the bump transition `exp(1 - 1/(1 - t²))` across the margin strip.
fn cutoff(x: f64, lo: f64, hi: f64, margin: f64) -> f64 {
    let d = (x - lo).min(hi - x);
    if d <= 0.0 {
        0.0
    } else if d >= margin {
        1.0
    } else {
        let t = 1.0 - d / margin;
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// `profile(x)·χ(x)` on W₁, where χ is a smooth cutoff equal to one on each
/// component of W₁ shrunk by `margin`.
pub fn mollified_source(
    grid: &GridSpec,
    regions: &RegionIndex,
    profile: SourceProfile,
    margin: f64,
) -> Result<ExteriorData> {
    let narrowest = regions
        .w1_intervals
        .iter()
        .map(|(lo, hi)| hi - lo)
        .fold(f64::INFINITY, f64::min);
    if !(margin > 0.0 && margin < 0.5 * narrowest) {
        return Err(Error::InvalidArgument(format!(
            "cutoff margin {margin} must lie in (0, {}) for the given W₁",
            0.5 * narrowest
        )));
    }
    let mut values = vec![0.0; grid.n_nodes];
    let mut support = Vec::new();
    for &i in &regions.w1 {
        let x = grid.x(i);
        let chi: f64 = regions
            .w1_intervals
            .iter()
            .map(|&(lo, hi)| cutoff(x, lo, hi, margin))
            .sum();
        let v = profile.eval(x) * chi;
        if v != 0.0 {
            values[i] = v;
            support.push(i);
        }
    }
    Ok(ExteriorData { values, support })
}

/// Full-domain node values with the interior solved and the exterior
/// prescribed.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution {
    pub values: Vec<f64>,
    /// Max-norm of the interior linear-system residual.
    pub residual_norm: f64,
}

impl FieldSolution {
    pub fn interior(&self, regions: &RegionIndex) -> Vec<f64> {
        regions.interior.iter().map(|&i| self.values[i]).collect()
    }
}

/// `(-Δ)^s` of a field at the W₂ nodes, in node order.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceData {
    pub values: Vec<f64>,
}

impl TraceData {
    /// `self - other`, entrywise.
    pub fn minus(&self, other: &[f64]) -> TraceData {
        TraceData {
            values: self.values.iter().zip(other).map(|(a, b)| a - b).collect(),
        }
    }

    /// Discrete `L²(W₂)` pairing `h Σ a·b`.
    pub fn dot(&self, other: &TraceData, h: f64) -> f64 {
        h * self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
    }
}

/// The factorized interior matrix `A_ΩΩ + diag(q)` for one potential.
#[derive(Debug, Clone)]
pub struct InteriorSystem {
    matrix: DMatrix<f64>,
    factor: Cholesky<f64, Dyn>,
    q: Vec<f64>,
}

const RESIDUAL_TOL: f64 = 1e-10;

impl InteriorSystem {
    pub fn new(disc: &Discretization, q: &[f64]) -> Result<Self> {
        let interior = &disc.regions.interior;
        check_len("potential", interior.len(), q.len())?;
        let report = disc.coercivity(q);
        if !report.passed() {
            log::debug!(
                "sufficient solvability condition fails (q_min = {:.4e}, threshold {:.4e}); \
                 attempting factorization anyway",
                report.q_min,
                report.q_threshold
            );
        }
        let mut matrix = disc.op.submatrix(interior, interior);
        for (j, &qj) in q.iter().enumerate() {
            matrix[(j, j)] += qj;
        }
        let factor = Cholesky::new(matrix.clone()).ok_or(Error::NotCoercive)?;
        Ok(Self {
            matrix,
            factor,
            q: q.to_vec(),
        })
    }

    pub fn potential(&self) -> &[f64] {
        &self.q
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    fn solve_interior(&self, rhs: Vec<f64>) -> Result<(Vec<f64>, f64)> {
        let b = DVector::from_vec(rhs);
        let x = self.factor.solve(&b);
        let residual = (&self.matrix * &x - &b).amax();
        let tolerance = RESIDUAL_TOL * (1.0 + b.amax());
        if !(residual <= tolerance) {
            return Err(Error::Residual {
                residual,
                tolerance,
            });
        }
        Ok((x.data.into(), residual))
    }

    /// Solves `(A + q) u = source` in Ω with `u = exterior` outside Ω.
    fn solve_with_exterior(
        &self,
        disc: &Discretization,
        source: &[f64],
        exterior: &[f64],
    ) -> Result<FieldSolution> {
        let interior = &disc.regions.interior;
        check_len("interior source", interior.len(), source.len())?;
        check_len("exterior data", disc.n_nodes(), exterior.len())?;
        let mut ext_only = exterior.to_vec();
        for &i in interior {
            ext_only[i] = 0.0;
        }
        let coupling = disc.op.apply_at(&ext_only, interior)?;
        let rhs: Vec<f64> = source.iter().zip(&coupling).map(|(s, c)| s - c).collect();
        let (u, residual_norm) = self.solve_interior(rhs)?;
        let mut values = ext_only;
        for (&i, v) in interior.iter().zip(u) {
            values[i] = v;
        }
        Ok(FieldSolution {
            values,
            residual_norm,
        })
    }

    /// `((-Δ)^s + q) u = g` in Ω, `u = f` outside.
    pub fn solve_state(
        &self,
        disc: &Discretization,
        g: &[f64],
        exterior: &ExteriorData,
    ) -> Result<FieldSolution> {
        self.solve_with_exterior(disc, g, &exterior.values)
    }

    /// `((-Δ)^s + q) v = 0` in Ω, `v = r` on W₂ and `v = 0` elsewhere outside.
    pub fn solve_adjoint(
        &self,
        disc: &Discretization,
        residual: &TraceData,
    ) -> Result<FieldSolution> {
        let w2 = &disc.regions.w2;
        check_len("trace residual", w2.len(), residual.values.len())?;
        let mut exterior = vec![0.0; disc.n_nodes()];
        for (&i, &r) in w2.iter().zip(&residual.values) {
            exterior[i] = r;
        }
        let zero = vec![0.0; disc.n_interior()];
        self.solve_with_exterior(disc, &zero, &exterior)
    }

    /// `((-Δ)^s + q) ω = -dq·u + dg` in Ω, `ω = 0` outside.
    pub fn solve_sensitivity(
        &self,
        disc: &Discretization,
        state: &FieldSolution,
        dq: &[f64],
        dg: &[f64],
    ) -> Result<FieldSolution> {
        let interior = &disc.regions.interior;
        check_len("dq", interior.len(), dq.len())?;
        check_len("dg", interior.len(), dg.len())?;
        let rhs: Vec<f64> = interior
            .iter()
            .zip(dq.iter().zip(dg))
            .map(|(&i, (dqj, dgj))| -dqj * state.values[i] + dgj)
            .collect();
        let exterior = vec![0.0; disc.n_nodes()];
        self.solve_with_exterior(disc, &rhs, &exterior)
    }
}

pub fn solve_state(
    disc: &Discretization,
    medium: &Medium,
    exterior: &ExteriorData,
) -> Result<FieldSolution> {
    medium.check_len(disc.n_interior())?;
    InteriorSystem::new(disc, &medium.q)?.solve_state(disc, &medium.g, exterior)
}

pub fn solve_adjoint(disc: &Discretization, q: &[f64], residual: &TraceData) -> Result<FieldSolution> {
    InteriorSystem::new(disc, q)?.solve_adjoint(disc, residual)
}

pub fn solve_sensitivity(
    disc: &Discretization,
    q: &[f64],
    state: &FieldSolution,
    dq: &[f64],
    dg: &[f64],
) -> Result<FieldSolution> {
    InteriorSystem::new(disc, q)?.solve_sensitivity(disc, state, dq, dg)
}

/// `(-Δ)^s` of the full field evaluated at the W₂ nodes.
pub fn exterior_trace(disc: &Discretization, values: &[f64]) -> Result<TraceData> {
    check_len("field", disc.n_nodes(), values.len())?;
    Ok(TraceData {
        values: disc.op.apply_at(values, &disc.regions.w2)?,
    })
}
