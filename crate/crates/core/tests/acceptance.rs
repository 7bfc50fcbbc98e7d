//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::{bump, exact_observation, random_medium, random_vec, reference_disc, rng};
use fracinv_core::experiment::{
    coarse_discretization, gradient_check, run_example, run_inversions, sources, summarize,
    truth_medium, AlphaRule, ExperimentConfig, RunSummary,
};
use fracinv_core::field::exterior_trace;
use fracinv_core::inverse::{relative_l2_error, Penalty};
use fracinv_core::{oracle_fraclap, reconstruct, CgConfig, InteriorSystem, Termination, TraceData};
use statrs::function::gamma::gamma;

const PAPER_THRESHOLD: f64 = -17.9041;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let points = [-0.75, -0.25, 0.125, 0.5, 1.5];
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [0.2, 0.4, 0.8] {
        let oracle: Vec<f64> = points
            .iter()
            .map(|&x| oracle_fraclap(bump, (-1.0, 1.0), x, s).unwrap())
            .collect();
        let errors: Vec<f64> = [256usize, 512, 1024]
            .iter()
            .map(|&n| {
                let disc = reference_disc(n, 1, s);
                let field: Vec<f64> = disc.grid.coordinates().iter().map(|&x| bump(x)).collect();
                let nodes: Vec<usize> = points
                    .iter()
                    .map(|&x| ((x - disc.grid.x_min) / disc.h()).round() as usize)
                    .collect();
                let values = disc.op.apply_at(&field, &nodes).unwrap();
                values
                    .iter()
                    .zip(&oracle)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let ok = errors[2] <= 1e-3 && errors[1] < errors[0] && errors[2] < errors[1];
        pass &= ok;
        parts.push(format!(
            "s={s}: {:.2e}/{:.2e}/{:.2e}",
            errors[0], errors[1], errors[2]
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "operator vs oracle, max error at N=256/512/1024 [{}] (tol 1e-3 at 1024, decreasing), {:.2?} (< 10 s)",
            parts.join("; "),
            elapsed
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in [0.2, 0.4, 0.8] {
        let u = |x: f64| (1.0 - x * x).max(0.0).powf(s);
        let exact = 4f64.powf(s) * gamma(s + 1.0) * gamma(s + 0.5) / gamma(0.5);
        for x in [-0.6, 0.0, 0.45] {
            let v = oracle_fraclap(u, (-1.0, 1.0), x, s).unwrap();
            worst = worst.max((v - exact).abs());
        }
    }
    outcome(
        worst <= 1e-6,
        format!("oracle on (1-x²)₊ˢ vs closed form, max error {worst:.2e} (tol 1e-6)"),
    )
}

fn criterion_3() -> Outcome {
    let disc = reference_disc(32, 1, 0.4);
    let src = common::reference_sources(&disc);
    let h = disc.h();
    let n = disc.n_interior();
    let nw = disc.regions.w2.len();
    let mut rng = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let q: Vec<f64> = random_vec(&mut rng, n).iter().map(|v| 0.5 * v).collect();
        let g = random_vec(&mut rng, n);
        let system = InteriorSystem::new(&disc, &q).unwrap();
        let u = system.solve_state(&disc, &g, &src.f).unwrap();
        let dir = random_medium(&mut rng, n);
        let r = TraceData { values: random_vec(&mut rng, nw) };
        let omega = system.solve_sensitivity(&disc, &u, &dir.q, &dir.g).unwrap();
        let v = system.solve_adjoint(&disc, &r).unwrap();
        let lhs = r.dot(&exterior_trace(&disc, &omega.values).unwrap(), h);
        let rhs: f64 = disc
            .regions
            .interior
            .iter()
            .enumerate()
            .map(|(j, &i)| (dir.q[j] * u.values[i] * v.values[i] - dir.g[j] * v.values[i]) * h)
            .sum();
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()));
    }
    outcome(
        worst <= 1e-10,
        format!("adjoint/sensitivity duality, 20 triples at N=32, max relative gap {worst:.2e} (tol 1e-10)"),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for alpha in [0.0, 1e-6] {
        let cfg = ExperimentConfig {
            n_omega: 64,
            alpha: AlphaRule::Fixed(alpha),
            ..ExperimentConfig::ex1()
        };
        let report = gradient_check(&cfg, 10, 1e-5).unwrap();
        pass &= report.max_rel_error <= 1e-6;
        parts.push(format!("α={alpha:e}: {:.2e}", report.max_rel_error));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "adjoint gradient vs central differences (t=1e-5, 10 directions, N=64) [{}] (tol 1e-6), {:.2?} (< 30 s)",
            parts.join("; "),
            elapsed
        ),
    )
}

fn criterion_5() -> Outcome {
    let cfg = ExperimentConfig {
        n_omega: 32,
        ..ExperimentConfig::ex1()
    };
    let disc = coarse_discretization(&cfg).unwrap();
    let src = sources(&cfg, &disc).unwrap();
    let truth = truth_medium(&cfg, &disc);
    let obs = exact_observation(&disc, &src, &truth);
    let cg = CgConfig {
        penalty: Penalty { alpha: 0.0, ends: cfg.penalty_ends },
        tau: cfg.tau,
        max_iter: 20_000,
        initial: None,
    };
    let rec = reconstruct(&disc, &src, &obs, &cg, Some(&truth)).unwrap();
    let e = rec.final_record().e_value;
    let eq = relative_l2_error(&rec.medium.q, &truth.q);
    let eg = relative_l2_error(&rec.medium.g, &truth.g);
    outcome(
        e <= 1e-16 && eq <= 1e-6 && eg <= 1e-6,
        format!(
            "exact data on the inversion grid (N=32, α=0, from 0, {} iterations, {}): E={e:.2e} (tol 1e-16), err_q={eq:.2e}, err_g={eg:.2e} (tol 1e-6)",
            rec.iterations(),
            rec.termination
        ),
    )
}

fn example_runs(name: &str) -> (Vec<RunSummary>, Duration) {
    let cfg = ExperimentConfig::preset(name).unwrap();
    let start = Instant::now();
    let result = run_inversions(&cfg).unwrap();
    let elapsed = start.elapsed();
    let summaries = result.runs.iter().map(|r| summarize(r, cfg.tau)).collect();
    (summaries, elapsed)
}

fn describe(s: &RunSummary) -> String {
    format!(
        "δ={:e}: {} after {} it, E={:.3e}/{:.1e}, err_q={:.3}, err_g={:.3}",
        s.delta, s.termination, s.iterations, s.final_e, s.threshold, s.err_q, s.err_g
    )
}

fn degrades(runs: &[RunSummary]) -> bool {
    runs.windows(2)
        .all(|w| w[1].err_q >= w[0].err_q && w[1].err_g >= w[0].err_g)
}

fn criterion_6(runs: &[RunSummary], elapsed: Duration) -> Outcome {
    let low = &runs[0];
    let pass = low.termination == Termination::Discrepancy
        && low.iterations <= 500
        && low.err_q <= 0.2
        && low.err_g <= 0.2
        && degrades(runs)
        && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "ex1 (N=128, refine 4, tau=4, α=δ²) [{}] (discrepancy within 500 it, errors ≤ 0.2 at δ=1e-3, non-decreasing in δ), {:.2?} (< 2 min)",
            runs.iter().map(describe).collect::<Vec<_>>().join("; "),
            elapsed
        ),
    )
}

fn criterion_7(runs: &[RunSummary], elapsed: Duration) -> Outcome {
    let pass = runs.iter().all(|s| s.termination == Termination::Discrepancy)
        && degrades(runs)
        && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "ex2 (tau=40) [{}] (discrepancy, errors non-decreasing in δ), {:.2?} (< 2 min)",
            runs.iter().map(describe).collect::<Vec<_>>().join("; "),
            elapsed
        ),
    )
}

fn criterion_8(all: &[RunSummary]) -> Outcome {
    let bad = all.iter().filter(|s| !s.monotone).count();
    outcome(
        bad == 0,
        format!("J non-increasing in all {} example runs ({bad} violations)", all.len()),
    )
}

fn criterion_9() -> Outcome {
    let disc = reference_disc(128, 1, 0.4);
    let report = disc.coercivity(&vec![0.0; disc.n_interior()]);
    let t = report.q_threshold;
    let pass = t < 0.0 && (5.0..=50.0).contains(&t.abs());
    outcome(
        pass,
        format!(
            "coercivity threshold for s=0.4, N=128: {t:.4} (paper {PAPER_THRESHOLD}); required negative with magnitude in [5, 50]"
        ),
    )
}

fn criterion_10() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_example("ex1", &[1e-3], 7, a.path()).unwrap();
    run_example("ex1", &[1e-3], 7, b.path()).unwrap();
    let mut identical = true;
    let mut checked = 0;
    for name in ["reconstruction_delta_1e-3.csv", "trace_delta_1e-3.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        identical &= !x.is_empty() && x == y;
        checked += 1;
    }
    outcome(
        identical,
        format!("two runs of example ex1, δ=1e-3, seed 7: {checked} CSV files byte-identical = {identical}"),
    )
}

fn main() {
    let (ex1, ex1_time) = example_runs("ex1");
    let (ex2, ex2_time) = example_runs("ex2");
    let all: Vec<RunSummary> = ex1.iter().chain(&ex2).cloned().collect();

    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(&ex1, ex1_time),
        criterion_7(&ex2, ex2_time),
        criterion_8(&all),
        criterion_9(),
        criterion_10(),
    ];
    let mut failed = Vec::new();
    for (k, r) in results.iter().enumerate() {
        println!("{} {:>2} {}", if r.pass { "PASS" } else { "FAIL" }, k + 1, r.detail);
        if !r.pass {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}

