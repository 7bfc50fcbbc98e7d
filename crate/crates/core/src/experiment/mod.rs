//! Synthetic-data experiments: configuration, noisy observations, the two
//! reference reconstructions, gradient checks and CSV/SVG output.

mod config;
mod output;
mod run;
mod synth;

pub use config::{AlphaRule, ExperimentConfig, Truth, DEFAULT_EPS_GAP, DEFAULT_MARGIN};
pub use output::{write_reconstruction_csv, write_trace_csv, LinePlot, Series};
pub use run::{
    delta_tag, emit_outputs, gradient_check, gradient_check_at, run_example, run_experiment,
    run_forward, run_inversions, summarize, DeltaRun, ExperimentResult, GradientCheckReport,
    RunArtifacts, RunSummary,
};
pub use synth::{
    add_noise, clean_traces, coarse_discretization, fine_discretization, sources,
    synthesize_observation, truth_medium, CleanTraces,
};
