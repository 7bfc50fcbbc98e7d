#![allow(dead_code)]

use fracinv_core::experiment::ExperimentConfig;
use fracinv_core::field::{exterior_trace, solve_state};
use fracinv_core::inverse::{Observation, Sources};
use fracinv_core::{mollified_source, Discretization, Medium, SourceProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `exp(1 - 1/(1 - x²))` on (-1, 1), zero elsewhere; `C^∞` with compact support.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// The reference layout: Ω = (-1, 1) inside [-3, 3].
pub fn reference_disc(n_omega: usize, eps_cells: usize, s: f64) -> Discretization {
    Discretization::uniform(-3.0, 3.0, (-1.0, 1.0), n_omega, eps_cells, s).unwrap()
}

pub fn reference_sources(disc: &Discretization) -> Sources {
    let margin = 0.5;
    Sources {
        f: mollified_source(&disc.grid, &disc.regions, SourceProfile::One, margin).unwrap(),
        f_tilde: mollified_source(&disc.grid, &disc.regions, SourceProfile::Gauss, margin).unwrap(),
    }
}

pub fn ex1_medium(disc: &Discretization) -> Medium {
    Medium::sample(disc, f64::sin, f64::cos)
}

/// Traces of `medium` computed on the same grid (no noise, no model error).
pub fn exact_observation(disc: &Discretization, src: &Sources, medium: &Medium) -> Observation {
    let trace = |f| {
        let u = solve_state(disc, medium, f).unwrap();
        exterior_trace(disc, &u.values).unwrap().values
    };
    Observation {
        h: trace(&src.f),
        h_tilde: trace(&src.f_tilde),
        delta: 0.0,
    }
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_medium(rng: &mut ChaCha8Rng, n: usize) -> Medium {
    Medium {
        q: random_vec(rng, n),
        g: random_vec(rng, n),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_experiment(name: &str) -> ExperimentConfig {
    ExperimentConfig {
        n_omega: 32,
        refine_factor: 2,
        deltas: vec![1e-2, 5e-2],
        ..ExperimentConfig::preset(name).unwrap()
    }
}
