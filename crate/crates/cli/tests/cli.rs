use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fracinv(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracinv"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("FRACINV_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn example_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["example", "--name", "ex1", "--delta", "1e-3", "--seed", "7"];
    let ra = fracinv(&args, a.path());
    let rb = fracinv(&args, b.path());
    assert_eq!(ra.status.code(), Some(0), "{}", String::from_utf8_lossy(&ra.stderr));
    assert_eq!(rb.status.code(), Some(0));
    for name in ["reconstruction_delta_1e-3.csv", "trace_delta_1e-3.csv", "q.svg", "g.svg"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name} differs between runs");
    }
    assert!(stdout(&ra).contains("termination=discrepancy"));
}

#[test]
fn unreached_stopping_rule_exits_4_with_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracinv(
        &["--n", "16", "--max-iter", "2", "example", "--name", "ex2", "--delta", "1e-6"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("termination=max_iter"));
    let trace = fs::read_to_string(dir.path().join("trace_delta_1e-6.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("iter,J,E,beta,gamma,err_q,err_g"));
    assert_eq!(trace.lines().count(), 4);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_alpha = fracinv(&["--alpha", "sometimes", "invert"], dir.path());
    assert_eq!(bad_alpha.status.code(), Some(2));

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[grid]\nrefine_factor = 1\n").unwrap();
    let bad_file = fracinv(&["--config", cfg.to_str().unwrap(), "invert"], dir.path());
    assert_eq!(bad_file.status.code(), Some(2));

    let missing = fracinv(&["--config", "/nonexistent/cfg.toml", "forward"], dir.path());
    assert_eq!(missing.status.code(), Some(2));

    let bad_order = fracinv(&["weights", "--s", "1.5", "--k", "3"], dir.path());
    assert_eq!(bad_order.status.code(), Some(2));

    let unknown = fracinv(&["example", "--name", "ex9"], dir.path());
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn seed_environment_variable_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "[grid]\nn_omega = 16\nrefine_factor = 2\n[data]\ndeltas = [1e-2]\nseed = 1\n[inversion]\nmax_iter = 3\n",
    )
    .unwrap();
    let run = |seed: Option<&str>, out: &Path| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_fracinv"));
        c.args(["--out", out.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "invert"]);
        match seed {
            Some(s) => c.env("FRACINV_SEED", s),
            None => c.env_remove("FRACINV_SEED"),
        };
        c.output().unwrap();
        fs::read_to_string(out.join("trace_delta_1e-2.csv")).unwrap()
    };
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let from_config = run(None, &a);
    assert_eq!(run(Some("1"), &b), from_config);
    assert_ne!(run(Some("2"), &c), from_config);

    let bad = Command::new(env!("CARGO_BIN_EXE_fracinv"))
        .args(["--config", cfg.to_str().unwrap(), "invert"])
        .env("FRACINV_SEED", "seven")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn forward_writes_fields_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracinv(&["--n", "32", "forward"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let field = fs::read_to_string(dir.path().join("forward.csv")).unwrap();
    // 32 cells in Ω of length 2 over [-3, 3]: 96 cells
    assert_eq!(field.lines().count(), 1 + 97);
    let traces = fs::read_to_string(dir.path().join("traces.csv")).unwrap();
    assert_eq!(traces.lines().next(), Some("x,trace,trace_tilde"));
}

#[test]
fn weights_match_the_recurrence() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracinv(&["weights", "--s", "0.5", "--k", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    // s = 1/2: w_0 = Γ(2)/Γ(3/2)² = 4/π, w_1 = -w_0/3, w_2 = w_1/5
    let w0 = 4.0 / std::f64::consts::PI;
    let expected = [w0, -w0 / 3.0, -w0 / 15.0];
    for (got, want) in rows.iter().zip(expected) {
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }
}

#[test]
fn gradcheck_reports_small_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracinv(&["--n", "32", "gradcheck", "--directions", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    let err: f64 = last.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(err <= 1e-6, "{last}");
}
