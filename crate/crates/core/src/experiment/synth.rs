use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::field::{exterior_trace, mollified_source, InteriorSystem, Medium};
use crate::inverse::{Observation, Sources};
use crate::lattice::Discretization;

/// Inversion-grid discretization for `cfg`.
pub fn coarse_discretization(cfg: &ExperimentConfig) -> Result<Discretization> {
    Discretization::uniform(cfg.x_min, cfg.x_max, cfg.omega, cfg.n_omega, cfg.eps_cells(), cfg.s)
}

/// Data-generation discretization: `refine_factor` times finer, with the same
/// gap width so W₂ is the same set.
pub fn fine_discretization(cfg: &ExperimentConfig) -> Result<Discretization> {
    if cfg.refine_factor < 1 {
        return Err(Error::Config("refine_factor must be ≥ 1".into()));
    }
    Discretization::uniform(
        cfg.x_min,
        cfg.x_max,
        cfg.omega,
        cfg.n_omega * cfg.refine_factor,
        cfg.eps_cells() * cfg.refine_factor,
        cfg.s,
    )
}

pub fn sources(cfg: &ExperimentConfig, disc: &Discretization) -> Result<Sources> {
    Ok(Sources {
        f: mollified_source(&disc.grid, &disc.regions, cfg.profile_f, cfg.margin)?,
        f_tilde: mollified_source(&disc.grid, &disc.regions, cfg.profile_f_tilde, cfg.margin)?,
    })
}

pub fn truth_medium(cfg: &ExperimentConfig, disc: &Discretization) -> Medium {
    Medium::sample(disc, |x| cfg.truth.q(x), |x| cfg.truth.g(x))
}

/// Noise-free traces of the truth, computed on the fine grid and restricted
/// to the coarse W₂ nodes by index stride.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanTraces {
    pub h: Vec<f64>,
    pub h_tilde: Vec<f64>,
}

pub fn clean_traces(cfg: &ExperimentConfig) -> Result<CleanTraces> {
    let coarse = coarse_discretization(cfg)?;
    let fine = if cfg.refine_factor == 1 {
        coarse.clone()
    } else {
        fine_discretization(cfg)?
    };
    let r = cfg.refine_factor;
    // nested: coarse node i is fine node r·i, and both grids see the same W₂
    let fine_index: Vec<usize> = coarse.regions.w2.iter().map(|&i| i * r).collect();
    let nested = fine.grid.n_nodes == (coarse.grid.n_nodes - 1) * r + 1
        && fine_index.iter().all(|i| fine.regions.w2.binary_search(i).is_ok());
    if !nested {
        return Err(Error::Config(
            "data and inversion grids are not nested".into(),
        ));
    }

    let src = sources(cfg, &fine)?;
    let truth = truth_medium(cfg, &fine);
    let system = InteriorSystem::new(&fine, &truth.q)?;
    let u = system.solve_state(&fine, &truth.g, &src.f)?;
    let ut = system.solve_state(&fine, &truth.g, &src.f_tilde)?;
    let trace = exterior_trace(&fine, &u.values)?;
    let trace_t = exterior_trace(&fine, &ut.values)?;
    let pick = |t: &[f64]| -> Vec<f64> {
        fine_index
            .iter()
            .map(|i| t[fine.regions.w2.binary_search(i).expect("checked above")])
            .collect()
    };
    Ok(CleanTraces {
        h: pick(&trace.values),
        h_tilde: pick(&trace_t.values),
    })
}

/// Adds `δ(2ξ - 1)` with `ξ ~ U[0, 1)` per node, first to `h` then to `h̃`,
/// from a generator seeded with `seed`.
pub fn add_noise(clean: &CleanTraces, delta: f64, seed: u64) -> Observation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noisy = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|&x| x + delta * (2.0 * rng.gen::<f64>() - 1.0))
            .collect()
    };
    let h = noisy(&clean.h);
    let h_tilde = noisy(&clean.h_tilde);
    Observation { h, h_tilde, delta }
}

pub fn synthesize_observation(cfg: &ExperimentConfig, delta: f64) -> Result<Observation> {
    if !(delta >= 0.0) {
        return Err(Error::Config(format!("noise level {delta} < 0")));
    }
    Ok(add_noise(&clean_traces(cfg)?, delta, cfg.seed))
}
