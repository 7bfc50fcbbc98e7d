//! Shared fixtures for the benchmarks: the ex1 setup at a given resolution
//! with noisy synthetic data.

use fracinv_core::experiment::{
    coarse_discretization, sources, synthesize_observation, truth_medium, ExperimentConfig,
};
use fracinv_core::inverse::Penalty;
use fracinv_core::{Discretization, Medium, Observation, Sources};

pub struct Fixture {
    pub cfg: ExperimentConfig,
    pub disc: Discretization,
    pub sources: Sources,
    pub observation: Observation,
    pub truth: Medium,
    pub penalty: Penalty,
}

impl Fixture {
    pub fn ex1(n_omega: usize) -> Self {
        let cfg = ExperimentConfig {
            n_omega,
            ..ExperimentConfig::ex1()
        };
        let delta = cfg.deltas[0];
        let disc = coarse_discretization(&cfg).expect("reference grid");
        let sources = sources(&cfg, &disc).expect("reference sources");
        let observation = synthesize_observation(&cfg, delta).expect("synthetic data");
        let truth = truth_medium(&cfg, &disc);
        let penalty = Penalty {
            alpha: cfg.alpha.alpha(delta),
            ends: cfg.penalty_ends,
        };
        Self {
            cfg,
            disc,
            sources,
            observation,
            truth,
            penalty,
        }
    }

    /// A point away from the truth, where the misfit is not small.
    pub fn start(&self) -> Medium {
        self.truth.scaled(0.5)
    }
}
