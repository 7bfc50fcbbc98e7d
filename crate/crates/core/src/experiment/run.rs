use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::output::{write_reconstruction_csv, write_trace_csv, LinePlot, Series};
use super::synth::{add_noise, clean_traces, coarse_discretization, sources, truth_medium};
use crate::error::{Error, Result};
use crate::field::{exterior_trace, InteriorSystem, Medium};
use crate::inverse::{
    eval_functional, gradient_from, reconstruct, CgConfig, Observation, Penalty, Reconstruction,
    Sources, Termination,
};
use crate::lattice::Discretization;

/// Outcome of one reconstruction at one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub delta: f64,
    pub alpha: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub final_j: f64,
    pub final_e: f64,
    /// `tau·δ²`
    pub threshold: f64,
    pub err_q: f64,
    pub err_g: f64,
    pub restarts: usize,
    pub step_halvings: usize,
    /// `J` never increased between records.
    pub monotone: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunArtifacts {
    pub files: Vec<PathBuf>,
    pub summaries: Vec<RunSummary>,
}

impl RunArtifacts {
    /// True when every run stopped on the discrepancy rule.
    pub fn all_discrepancy(&self) -> bool {
        self.summaries
            .iter()
            .all(|s| s.termination == Termination::Discrepancy)
    }
}

/// Suffix used in per-noise-level file names, e.g. `1e-3`.
pub fn delta_tag(delta: f64) -> String {
    format!("{delta:e}")
}

/// A completed reconstruction together with its inputs.
#[derive(Debug, Clone)]
pub struct DeltaRun {
    pub delta: f64,
    pub alpha: f64,
    pub observation: Observation,
    pub reconstruction: Reconstruction,
}

/// Everything a full experiment computes, before anything is written.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub disc: Discretization,
    pub truth: Medium,
    pub runs: Vec<DeltaRun>,
}

pub fn run_inversions(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let disc = coarse_discretization(cfg)?;
    let src = sources(cfg, &disc)?;
    let truth = truth_medium(cfg, &disc);
    let clean = clean_traces(cfg)?;
    let runs: Result<Vec<DeltaRun>> = cfg
        .deltas
        .par_iter()
        .map(|&delta| {
            let observation = add_noise(&clean, delta, cfg.seed);
            let alpha = cfg.alpha.alpha(delta);
            let cg = CgConfig {
                penalty: Penalty {
                    alpha,
                    ends: cfg.penalty_ends,
                },
                tau: cfg.tau,
                max_iter: cfg.max_iter,
                initial: None,
            };
            let reconstruction = reconstruct(&disc, &src, &observation, &cg, Some(&truth))?;
            Ok(DeltaRun {
                delta,
                alpha,
                observation,
                reconstruction,
            })
        })
        .collect();
    Ok(ExperimentResult {
        disc,
        truth,
        runs: runs?,
    })
}

pub fn summarize(run: &DeltaRun, tau: f64) -> RunSummary {
    let rec = &run.reconstruction;
    let last = rec.final_record();
    RunSummary {
        delta: run.delta,
        alpha: run.alpha,
        iterations: rec.iterations(),
        termination: rec.termination,
        final_j: last.j_value,
        final_e: last.e_value,
        threshold: tau * run.delta * run.delta,
        err_q: last.err_q.unwrap_or(f64::NAN),
        err_g: last.err_g.unwrap_or(f64::NAN),
        restarts: rec.restarts,
        step_halvings: rec.step_halvings,
        monotone: rec.records.windows(2).all(|w| w[1].j_value <= w[0].j_value),
    }
}

/// Writes per-δ reconstruction and trace CSVs plus `q.svg` and `g.svg`.
pub fn emit_outputs(
    result: &ExperimentResult,
    cfg: &ExperimentConfig,
    out: &Path,
) -> Result<RunArtifacts> {
    fs::create_dir_all(out)?;
    let x = result.disc.interior_coordinates();
    let mut artifacts = RunArtifacts::default();
    let mut q_series = vec![Series {
        label: "true".into(),
        x: x.clone(),
        y: result.truth.q.clone(),
        dashed: false,
    }];
    let mut g_series = vec![Series {
        label: "true".into(),
        x: x.clone(),
        y: result.truth.g.clone(),
        dashed: false,
    }];
    for run in &result.runs {
        let tag = delta_tag(run.delta);
        let m = &run.reconstruction.medium;
        let rec_path = out.join(format!("reconstruction_delta_{tag}.csv"));
        write_reconstruction_csv(&rec_path, &x, &result.truth.q, &m.q, &result.truth.g, &m.g)?;
        let trace_path = out.join(format!("trace_delta_{tag}.csv"));
        write_trace_csv(&trace_path, &run.reconstruction.records)?;
        artifacts.files.push(rec_path);
        artifacts.files.push(trace_path);
        let label = format!("δ = {tag}");
        q_series.push(Series {
            label: label.clone(),
            x: x.clone(),
            y: m.q.clone(),
            dashed: true,
        });
        g_series.push(Series {
            label,
            x: x.clone(),
            y: m.g.clone(),
            dashed: true,
        });
        artifacts.summaries.push(summarize(run, cfg.tau));
    }
    let q_plot = LinePlot {
        title: format!("{}: potential q", cfg.name),
        x_label: "x".into(),
        y_label: "q(x)".into(),
        series: q_series,
    };
    let g_plot = LinePlot {
        title: format!("{}: source g", cfg.name),
        x_label: "x".into(),
        y_label: "g(x)".into(),
        series: g_series,
    };
    artifacts.files.push(q_plot.write(&out.join("q.svg"))?);
    artifacts.files.push(g_plot.write(&out.join("g.svg"))?);
    Ok(artifacts)
}

/// Synthesizes data, reconstructs for every configured δ and writes outputs.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<RunArtifacts> {
    let result = run_inversions(cfg)?;
    emit_outputs(&result, cfg, out)
}

/// One of the two reference experiments at the given noise levels and seed.
pub fn run_example(name: &str, deltas: &[f64], seed: u64, out: &Path) -> Result<RunArtifacts> {
    let mut cfg = ExperimentConfig::preset(name)?;
    cfg.deltas = deltas.to_vec();
    cfg.seed = seed;
    run_experiment(&cfg, out)
}

/// Solves the two forward problems for the truth on the inversion grid and
/// writes `forward.csv` (all nodes) and `traces.csv` (W₂ nodes).
pub fn run_forward(cfg: &ExperimentConfig, out: &Path) -> Result<RunArtifacts> {
    cfg.validate()?;
    let disc = coarse_discretization(cfg)?;
    let src = sources(cfg, &disc)?;
    let truth = truth_medium(cfg, &disc);
    let report = disc.coercivity(&truth.q);
    let system = InteriorSystem::new(&disc, &truth.q)?;
    let u = system.solve_state(&disc, &truth.g, &src.f)?;
    let ut = system.solve_state(&disc, &truth.g, &src.f_tilde)?;
    let t = exterior_trace(&disc, &u.values)?;
    let tt = exterior_trace(&disc, &ut.values)?;

    fs::create_dir_all(out)?;
    let mut field = String::from("x,f,f_tilde,u,u_tilde\n");
    for i in 0..disc.n_nodes() {
        field.push_str(&format!(
            "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}\n",
            disc.grid.x(i),
            src.f.values[i],
            src.f_tilde.values[i],
            u.values[i],
            ut.values[i]
        ));
    }
    let mut traces = String::from("x,trace,trace_tilde\n");
    for (k, &i) in disc.regions.w2.iter().enumerate() {
        traces.push_str(&format!(
            "{:.15e},{:.15e},{:.15e}\n",
            disc.grid.x(i),
            t.values[k],
            tt.values[k]
        ));
    }
    let fp = out.join("forward.csv");
    let tp = out.join("traces.csv");
    fs::write(&fp, field)?;
    fs::write(&tp, traces)?;
    log::info!(
        "residuals {:.2e} / {:.2e}; coercivity threshold {:.4}",
        u.residual_norm,
        ut.residual_norm,
        report.q_threshold
    );
    Ok(RunArtifacts {
        files: vec![fp, tp],
        summaries: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheckReport {
    /// `max |adj - fd| / max(|adj|, |fd|)` over directions (entries where
    /// both sides are below 1e-12 count as zero).
    pub max_rel_error: f64,
    pub max_abs_adjoint: f64,
    pub max_abs_fd: f64,
    /// `(adjoint, finite difference)` per direction.
    pub pairs: Vec<(f64, f64)>,
}

const ZERO_FLOOR: f64 = 1e-12;

/// Compares `h⟨J'(m), d⟩` with `(J(m + t d) - J(m - t d)) / (2t)` for
/// `n_directions` random directions `d` with entries uniform in [-1, 1].
#[allow(clippy::too_many_arguments)]
pub fn gradient_check_at(
    disc: &Discretization,
    src: &Sources,
    obs: &Observation,
    penalty: Penalty,
    point: &Medium,
    n_directions: usize,
    t: f64,
    seed: u64,
) -> Result<GradientCheckReport> {
    if !(t > 1e-8 && t < 1e-2) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {t} outside (1e-8, 1e-2)"
        )));
    }
    let eval = eval_functional(disc, point, src, obs, penalty)?;
    let grad = gradient_from(disc, point, &eval, penalty)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = disc.n_interior();
    let mut pairs = Vec::with_capacity(n_directions);
    for _ in 0..n_directions {
        let dir = Medium {
            q: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            g: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let plus = eval_functional(disc, &point.add_scaled(t, &dir), src, obs, penalty)?;
        let minus = eval_functional(disc, &point.add_scaled(-t, &dir), src, obs, penalty)?;
        let fd = (plus.j_value - minus.j_value) / (2.0 * t);
        pairs.push((grad.dot(&dir, disc.h()), fd));
    }
    let max_rel_error = pairs
        .iter()
        .map(|&(a, f)| {
            let scale = a.abs().max(f.abs());
            if scale <= ZERO_FLOOR {
                0.0
            } else {
                (a - f).abs() / scale
            }
        })
        .fold(0.0, f64::max);
    Ok(GradientCheckReport {
        max_rel_error,
        max_abs_adjoint: pairs.iter().fold(0.0, |m, p| m.max(p.0.abs())),
        max_abs_fd: pairs.iter().fold(0.0, |m, p| m.max(p.1.abs())),
        pairs,
    })
}

/// Gradient check on the inversion grid of `cfg`, with data at the first
/// configured noise level, evaluated at half the true medium.
pub fn gradient_check(
    cfg: &ExperimentConfig,
    n_directions: usize,
    t: f64,
) -> Result<GradientCheckReport> {
    let disc = coarse_discretization(cfg)?;
    let src = sources(cfg, &disc)?;
    let delta = cfg.deltas[0];
    let obs = add_noise(&clean_traces(cfg)?, delta, cfg.seed);
    let point = truth_medium(cfg, &disc).scaled(0.5);
    gradient_check_at(
        &disc,
        &src,
        &obs,
        Penalty {
            alpha: cfg.alpha.alpha(delta),
            ends: cfg.penalty_ends,
        },
        &point,
        n_directions,
        t,
        cfg.seed,
    )
}
