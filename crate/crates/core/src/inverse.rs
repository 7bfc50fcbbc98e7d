//! Tikhonov reconstruction of `(q, g)` from two exterior traces.
//!
//! The functional is
//!
//! ```text
//! J(q, g) = ½ h Σ_{W₂} (r² + r̃²) + (α/2) h (‖Dq‖² + ‖Dg‖²),
//! r = (-Δ)^s u |_{W₂} - h^δ,   r̃ = (-Δ)^s ũ |_{W₂} - h̃^δ,
//! ```
//!
//! with `D` the forward difference, either zero-extended past ∂Ω or taken
//! over interior neighbours only (see [`PenaltyEnds`]). Its L²
//! gradient is `(u v + ũ ṽ + α DᵀD q, -v - ṽ + α DᵀD g)`, where `v`, `ṽ` solve
//! the adjoint problems with exterior data `r`, `r̃` on W₂. Because the
//! discrete operator is symmetric this is the exact gradient of the discrete
//! functional, not an approximation of it.

use crate::error::{Error, Result};
use crate::field::{exterior_trace, ExteriorData, FieldSolution, InteriorSystem, Medium, TraceData};
use crate::lattice::Discretization;

/// Noisy traces on W₂ for the two exterior sources.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub h: Vec<f64>,
    pub h_tilde: Vec<f64>,
    pub delta: f64,
}

/// The two exterior sources `f`, `f̃`.
#[derive(Debug, Clone)]
pub struct Sources {
    pub f: ExteriorData,
    pub f_tilde: ExteriorData,
}

/// How the difference operator `D` of the penalty treats the ends of Ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PenaltyEnds {
    /// Values are extended by zero one node past each end, so `‖Dv‖²`
    /// includes the jumps `v(±1)²/h²` (homogeneous Dirichlet, `n + 1`
    /// differences).
    #[default]
    Dirichlet,
    /// Only differences between neighbouring interior nodes (`n - 1`
    /// differences), the plain `∫_Ω v'²` for fields that do not vanish at ∂Ω.
    Free,
}

impl PenaltyEnds {
    pub fn as_str(self) -> &'static str {
        match self {
            PenaltyEnds::Dirichlet => "dirichlet",
            PenaltyEnds::Free => "free",
        }
    }
}

impl std::str::FromStr for PenaltyEnds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(PenaltyEnds::Dirichlet),
            "free" => Ok(PenaltyEnds::Free),
            other => Err(Error::Config(format!(
                "unknown penalty ends {other:?} (expected \"dirichlet\" or \"free\")"
            ))),
        }
    }
}

/// The regularization term `(α/2) h (‖Dq‖² + ‖Dg‖²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalty {
    pub alpha: f64,
    pub ends: PenaltyEnds,
}

impl Penalty {
    pub fn dirichlet(alpha: f64) -> Self {
        Self {
            alpha,
            ends: PenaltyEnds::Dirichlet,
        }
    }

    pub fn free(alpha: f64) -> Self {
        Self {
            alpha,
            ends: PenaltyEnds::Free,
        }
    }

    /// `(α/2) h (‖Dq‖² + ‖Dg‖²)`
    pub fn value(&self, medium: &Medium, h: f64) -> f64 {
        0.5 * self.alpha
            * (seminorm_sq(&medium.q, h, self.ends) + seminorm_sq(&medium.g, h, self.ends))
    }

    /// `α DᵀD` applied to both components.
    pub fn gradient(&self, medium: &Medium, h: f64) -> Medium {
        Medium {
            q: regularizer_grad(&medium.q, self.alpha, h, self.ends),
            g: regularizer_grad(&medium.g, self.alpha, h, self.ends),
        }
    }

    /// `α h (⟨Da_q, Db_q⟩ + ⟨Da_g, Db_g⟩)`
    pub fn bilinear(&self, a: &Medium, b: &Medium, h: f64) -> f64 {
        self.alpha
            * (seminorm_dot(&a.q, &b.q, h, self.ends) + seminorm_dot(&a.g, &b.g, h, self.ends))
    }
}

#[derive(Debug, Clone)]
pub struct CgConfig {
    pub penalty: Penalty,
    /// Discrepancy factor: stop once `E ≤ tau·δ²`.
    pub tau: f64,
    pub max_iter: usize,
    /// Starting point; zeros when `None`.
    pub initial: Option<Medium>,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            penalty: Penalty::dirichlet(0.0),
            tau: 4.0,
            max_iter: 500,
            initial: None,
        }
    }
}

impl CgConfig {
    fn validate(&self) -> Result<()> {
        if !(self.penalty.alpha >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha = {} < 0",
                self.penalty.alpha
            )));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidArgument(format!("tau = {} must be > 0", self.tau)));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Gradient-norm floor below which the iteration is considered converged.
pub const GRADIENT_FLOOR: f64 = 1e-14;

/// Forward differences `(v_{i+1} - v_i)/h`: `n + 1` values with `v`
/// extended by zero on both sides, or the `n - 1` interior ones.
pub fn forward_difference(v: &[f64], h: f64, ends: PenaltyEnds) -> Vec<f64> {
    let n = v.len();
    if ends == PenaltyEnds::Free {
        return v.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    }
    (0..=n)
        .map(|i| {
            let right = if i < n { v[i] } else { 0.0 };
            let left = if i > 0 { v[i - 1] } else { 0.0 };
            (right - left) / h
        })
        .collect()
}

/// `h Σ (Dv)²`, the discrete `∫ v'²`.
pub fn seminorm_sq(v: &[f64], h: f64, ends: PenaltyEnds) -> f64 {
    h * forward_difference(v, h, ends).iter().map(|d| d * d).sum::<f64>()
}

fn seminorm_dot(a: &[f64], b: &[f64], h: f64, ends: PenaltyEnds) -> f64 {
    let (da, db) = (forward_difference(a, h, ends), forward_difference(b, h, ends));
    h * da.iter().zip(&db).map(|(x, y)| x * y).sum::<f64>()
}

/// `α DᵀD v`: the discrete `-α v''` and the L² gradient of
/// `(α/2) h ‖Dv‖²`. With [`PenaltyEnds::Free`] the end rows are the
/// one-sided `α (v_0 - v_1)/h²`.
pub fn regularizer_grad(v: &[f64], alpha: f64, h: f64, ends: PenaltyEnds) -> Vec<f64> {
    let n = v.len();
    if alpha == 0.0 {
        return vec![0.0; n];
    }
    let c = alpha / (h * h);
    (0..n)
        .map(|i| {
            let outside = match ends {
                PenaltyEnds::Dirichlet => 0.0,
                PenaltyEnds::Free => v[i],
            };
            let left = if i > 0 { v[i - 1] } else { outside };
            let right = if i + 1 < n { v[i + 1] } else { outside };
            c * (2.0 * v[i] - left - right)
        })
        .collect()
}

/// Everything produced by one evaluation of the functional; the gradient and
/// the step size reuse the states and the factorization.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub j_value: f64,
    pub e_value: f64,
    pub r: TraceData,
    pub r_tilde: TraceData,
    pub u: FieldSolution,
    pub u_tilde: FieldSolution,
    pub system: InteriorSystem,
}

fn check_observation(disc: &Discretization, obs: &Observation) -> Result<()> {
    let m = disc.regions.w2.len();
    for (what, len) in [("observation h", obs.h.len()), ("observation h̃", obs.h_tilde.len())] {
        if len != m {
            return Err(Error::Length {
                what,
                expected: m,
                got: len,
            });
        }
    }
    if !(obs.delta >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise level {} < 0", obs.delta)));
    }
    Ok(())
}

pub fn eval_functional(
    disc: &Discretization,
    medium: &Medium,
    sources: &Sources,
    obs: &Observation,
    penalty: Penalty,
) -> Result<Evaluation> {
    medium.check_len(disc.n_interior())?;
    check_observation(disc, obs)?;
    let system = InteriorSystem::new(disc, &medium.q)?;
    let forward = |f: &ExteriorData, data: &[f64]| -> Result<(FieldSolution, TraceData)> {
        let u = system.solve_state(disc, &medium.g, f)?;
        let r = exterior_trace(disc, &u.values)?.minus(data);
        Ok((u, r))
    };
    let (first, second) = rayon::join(
        || forward(&sources.f, &obs.h),
        || forward(&sources.f_tilde, &obs.h_tilde),
    );
    let ((u, r), (u_tilde, r_tilde)) = (first?, second?);
    let h = disc.h();
    let e_value = r.dot(&r, h) + r_tilde.dot(&r_tilde, h);
    let j_value = 0.5 * e_value + penalty.value(medium, h);
    Ok(Evaluation {
        j_value,
        e_value,
        r,
        r_tilde,
        u,
        u_tilde,
        system,
    })
}

/// Adjoint-state gradient at the point where `eval` was computed.
pub fn gradient_from(
    disc: &Discretization,
    medium: &Medium,
    eval: &Evaluation,
    penalty: Penalty,
) -> Result<Medium> {
    let (v, v_tilde) = rayon::join(
        || eval.system.solve_adjoint(disc, &eval.r),
        || eval.system.solve_adjoint(disc, &eval.r_tilde),
    );
    let (v, v_tilde) = (v?, v_tilde?);
    let h = disc.h();
    let reg = penalty.gradient(medium, h);
    let interior = &disc.regions.interior;
    let mut q = Vec::with_capacity(interior.len());
    let mut g = Vec::with_capacity(interior.len());
    for (j, &i) in interior.iter().enumerate() {
        q.push(eval.u.values[i] * v.values[i] + eval.u_tilde.values[i] * v_tilde.values[i] + reg.q[j]);
        g.push(-v.values[i] - v_tilde.values[i] + reg.g[j]);
    }
    Ok(Medium { q, g })
}

pub fn eval_gradient(
    disc: &Discretization,
    medium: &Medium,
    sources: &Sources,
    obs: &Observation,
    penalty: Penalty,
) -> Result<Medium> {
    let eval = eval_functional(disc, medium, sources, obs, penalty)?;
    gradient_from(disc, medium, &eval, penalty)
}

/// Fletcher–Reeves `γ = ‖J'_k‖² / ‖J'_{k-1}‖²`; `Some(0)` on the first
/// iteration (`prev = None`) and `None` when the previous gradient vanished.
pub fn conjugate_coefficient(now: &Medium, prev: Option<&Medium>, h: f64) -> Option<f64> {
    match prev {
        None => Some(0.0),
        Some(p) => {
            let denom = p.norm_sq(h);
            if denom == 0.0 {
                None
            } else {
                Some(now.norm_sq(h) / denom)
            }
        }
    }
}

/// `d = -J' + γ d_prev`, falling back to `-J'` when that is not a descent
/// direction. The flag reports whether the fallback was taken.
pub fn descent_direction(
    gradient: &Medium,
    gamma: f64,
    prev: Option<&Medium>,
    h: f64,
) -> (Medium, bool) {
    let steepest = gradient.scaled(-1.0);
    let Some(prev) = prev else {
        return (steepest, false);
    };
    if gamma == 0.0 {
        return (steepest, false);
    }
    let d = steepest.add_scaled(gamma, prev);
    if gradient.dot(&d, h) >= 0.0 {
        (steepest, true)
    } else {
        (d, false)
    }
}

/// Stationary point of the linearized `β ↦ J((q, g) + β d)`:
///
/// ```text
/// β = -[⟨r, Fω⟩ + ⟨r̃, Fω̃⟩ + α(⟨Dq, Dd_q⟩ + ⟨Dg, Dd_g⟩)]
///     / [‖Fω‖² + ‖Fω̃‖² + α(‖Dd_q‖² + ‖Dd_g‖²)]
/// ```
///
/// where `ω`, `ω̃` are the sensitivities in direction `d`.
pub fn step_size(
    disc: &Discretization,
    medium: &Medium,
    eval: &Evaluation,
    direction: &Medium,
    penalty: Penalty,
) -> Result<f64> {
    direction.check_len(disc.n_interior())?;
    if direction.q.iter().chain(&direction.g).all(|&v| v == 0.0) {
        return Err(Error::Step("search direction is zero".into()));
    }
    let h = disc.h();
    let sens = |u: &FieldSolution| -> Result<TraceData> {
        let w = eval
            .system
            .solve_sensitivity(disc, u, &direction.q, &direction.g)?;
        exterior_trace(disc, &w.values)
    };
    let (fw, fw_tilde) = rayon::join(|| sens(&eval.u), || sens(&eval.u_tilde));
    let (fw, fw_tilde) = (fw?, fw_tilde?);
    let numerator = eval.r.dot(&fw, h)
        + eval.r_tilde.dot(&fw_tilde, h)
        + penalty.bilinear(medium, direction, h);
    let denominator = fw.dot(&fw, h)
        + fw_tilde.dot(&fw_tilde, h)
        + penalty.bilinear(direction, direction, h);
    if !(denominator > 0.0) {
        return Err(Error::Step(format!(
            "curvature along the search direction is {denominator:e}"
        )));
    }
    Ok(-numerator / denominator)
}

/// Iterate, search state and bookkeeping of the conjugate gradient loop.
#[derive(Debug, Clone)]
pub struct CgState {
    pub iterate: Medium,
    pub gradient: Medium,
    pub direction: Medium,
    pub grad_norm_sq: f64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub j_value: f64,
    pub e_value: f64,
    /// Step taken from this iterate; `None` on the final record.
    pub beta: Option<f64>,
    /// Conjugate coefficient used at this iterate; `None` on the final record.
    pub gamma: Option<f64>,
    pub err_q: Option<f64>,
    pub err_g: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Discrepancy,
    MaxIter,
    GradientFloor,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Discrepancy => "discrepancy",
            Termination::MaxIter => "max_iter",
            Termination::GradientFloor => "gradient_floor",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub medium: Medium,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    /// Number of restarts to steepest descent.
    pub restarts: usize,
    /// Number of step halvings needed to keep `J` from increasing.
    pub step_halvings: usize,
}

impl Reconstruction {
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    pub fn final_record(&self) -> &IterationRecord {
        self.records.last().expect("at least one record")
    }
}

/// `‖a - b‖ / ‖b‖` in the discrete L² norm (`‖a‖` if `b = 0`).
pub fn relative_l2_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let norm: f64 = b.iter().map(|y| y * y).sum();
    if norm == 0.0 {
        diff.sqrt()
    } else {
        (diff / norm).sqrt()
    }
}

// Nonlinearity in q makes the quadratic step approximate; a step that raises
// J is halved at most this many times before being accepted anyway.
const MAX_HALVINGS: usize = 40;

/// Conjugate gradient reconstruction of `(q, g)`.
pub fn reconstruct(
    disc: &Discretization,
    sources: &Sources,
    obs: &Observation,
    cfg: &CgConfig,
    truth: Option<&Medium>,
) -> Result<Reconstruction> {
    cfg.validate()?;
    check_observation(disc, obs)?;
    let n = disc.n_interior();
    let h = disc.h();
    if let Some(t) = truth {
        t.check_len(n)?;
    }
    let mut medium = match &cfg.initial {
        Some(m) => {
            m.check_len(n)?;
            m.clone()
        }
        None => Medium::zeros(n),
    };
    let threshold = cfg.tau * obs.delta * obs.delta;
    let errors = |m: &Medium| match truth {
        Some(t) => (
            Some(relative_l2_error(&m.q, &t.q)),
            Some(relative_l2_error(&m.g, &t.g)),
        ),
        None => (None, None),
    };

    let mut records = Vec::new();
    let mut eval = eval_functional(disc, &medium, sources, obs, cfg.penalty).map_err(|e| e.at_iteration(0))?;
    let mut prev: Option<(Medium, Medium)> = None;
    let mut restarts = 0;
    let mut step_halvings = 0;
    let mut k = 0;

    let termination = loop {
        let (err_q, err_g) = errors(&medium);
        let mut record = IterationRecord {
            k,
            j_value: eval.j_value,
            e_value: eval.e_value,
            beta: None,
            gamma: None,
            err_q,
            err_g,
        };
        if eval.e_value <= threshold {
            records.push(record);
            break Termination::Discrepancy;
        }
        if k >= cfg.max_iter {
            records.push(record);
            break Termination::MaxIter;
        }
        let gradient = gradient_from(disc, &medium, &eval, cfg.penalty).map_err(|e| e.at_iteration(k))?;
        let grad_norm_sq = gradient.norm_sq(h);
        if grad_norm_sq.sqrt() <= GRADIENT_FLOOR {
            records.push(record);
            break Termination::GradientFloor;
        }
        let Some(gamma) = conjugate_coefficient(&gradient, prev.as_ref().map(|(g, _)| g), h) else {
            records.push(record);
            break Termination::GradientFloor;
        };
        let (direction, restarted) =
            descent_direction(&gradient, gamma, prev.as_ref().map(|(_, d)| d), h);
        let gamma = if restarted {
            restarts += 1;
            0.0
        } else {
            gamma
        };
        let mut beta = step_size(disc, &medium, &eval, &direction, cfg.penalty).map_err(|e| e.at_iteration(k))?;

        let mut trial_medium = medium.add_scaled(beta, &direction);
        let mut trial = eval_functional(disc, &trial_medium, sources, obs, cfg.penalty);
        let mut halvings = 0;
        while halvings < MAX_HALVINGS {
            match &trial {
                Ok(t) if t.j_value <= eval.j_value => break,
                // an indefinite trial matrix is treated like an increase in J
                Err(Error::NotCoercive) | Ok(_) => {}
                Err(_) => break,
            }
            beta *= 0.5;
            halvings += 1;
            trial_medium = medium.add_scaled(beta, &direction);
            trial = eval_functional(disc, &trial_medium, sources, obs, cfg.penalty);
        }
        step_halvings += halvings;
        let trial = trial.map_err(|e| e.at_iteration(k + 1))?;
        if trial.j_value > eval.j_value {
            log::warn!("no decrease along the search direction at k={k}; stopping");
            records.push(record);
            break Termination::GradientFloor;
        }

        record.beta = Some(beta);
        record.gamma = Some(gamma);
        records.push(record);

        log::debug!(
            "k={k} J={:.6e} E={:.6e} beta={beta:.4e} gamma={gamma:.4e}",
            eval.j_value,
            eval.e_value
        );
        medium = trial_medium;
        eval = trial;
        prev = Some((gradient, direction));
        k += 1;
    };

    Ok(Reconstruction {
        medium,
        records,
        termination,
        restarts,
        step_halvings,
    })
}

/// Snapshot of the loop state at `medium`, mainly for inspection and tests.
pub fn cg_state(
    disc: &Discretization,
    medium: &Medium,
    sources: &Sources,
    obs: &Observation,
    penalty: Penalty,
) -> Result<CgState> {
    let gradient = eval_gradient(disc, medium, sources, obs, penalty)?;
    let grad_norm_sq = gradient.norm_sq(disc.h());
    Ok(CgState {
        iterate: medium.clone(),
        direction: gradient.scaled(-1.0),
        gradient,
        grad_norm_sq,
        k: 0,
    })
}
