use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::field::SourceProfile;
use crate::inverse::PenaltyEnds;

/// Ground-truth `(q, g)` used to generate synthetic data.
#[derive(Debug, Clone, PartialEq)]
pub enum Truth {
    /// `q = sin x`, `g = cos x`
    Ex1,
    /// `q = 1 - x²`, `g = 1 - x⁴`
    Ex2,
    /// Samples `(x, q, g)` read from a CSV file, linearly interpolated.
    Table(Vec<(f64, f64, f64)>),
}

impl Truth {
    pub fn q(&self, x: f64) -> f64 {
        match self {
            Truth::Ex1 => x.sin(),
            Truth::Ex2 => 1.0 - x * x,
            Truth::Table(rows) => interpolate(rows, x, |r| r.1),
        }
    }

    pub fn g(&self, x: f64) -> f64 {
        match self {
            Truth::Ex1 => x.cos(),
            Truth::Ex2 => 1.0 - x.powi(4),
            Truth::Table(rows) => interpolate(rows, x, |r| r.2),
        }
    }

    pub fn parse(spec: &str, base: Option<&Path>) -> Result<Self> {
        match spec {
            "ex1" => Ok(Truth::Ex1),
            "ex2" => Ok(Truth::Ex2),
            other => match other.strip_prefix("table:") {
                Some(path) => {
                    let path = match base {
                        Some(dir) if Path::new(path).is_relative() => dir.join(path),
                        _ => PathBuf::from(path),
                    };
                    Self::read_table(&path)
                }
                None => Err(Error::Config(format!(
                    "unknown truth {other:?}; expected \"ex1\", \"ex2\" or \"table:<path>\""
                ))),
            },
        }
    }

    fn read_table(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> = cols.iter().map(|c| c.parse()).collect();
            match parsed {
                Ok(v) if v.len() == 3 => rows.push((v[0], v[1], v[2])),
                // header line
                Err(_) if rows.is_empty() && lineno == 0 => {}
                _ => {
                    return Err(Error::Config(format!(
                        "{}:{}: expected three numeric columns x,q,g",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        if rows.len() < 2 {
            return Err(Error::Config(format!(
                "{}: need at least two rows",
                path.display()
            )));
        }
        if rows.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Config(format!(
                "{}: x column must be strictly increasing",
                path.display()
            )));
        }
        Ok(Truth::Table(rows))
    }
}

fn interpolate(rows: &[(f64, f64, f64)], x: f64, pick: impl Fn(&(f64, f64, f64)) -> f64) -> f64 {
    if x <= rows[0].0 {
        return pick(&rows[0]);
    }
    let last = rows.len() - 1;
    if x >= rows[last].0 {
        return pick(&rows[last]);
    }
    let k = rows.partition_point(|r| r.0 <= x);
    let (a, b) = (&rows[k - 1], &rows[k]);
    let t = (x - a.0) / (b.0 - a.0);
    (1.0 - t) * pick(a) + t * pick(b)
}

/// How the regularization parameter is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaRule {
    /// `α = δ²`
    DeltaSquared,
    Fixed(f64),
}

impl AlphaRule {
    pub fn alpha(self, delta: f64) -> f64 {
        match self {
            AlphaRule::DeltaSquared => delta * delta,
            AlphaRule::Fixed(a) => a,
        }
    }

    /// Parses `auto`, `delta_sq` or a number.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "auto" | "delta_sq" => Ok(AlphaRule::DeltaSquared),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|a| *a >= 0.0)
                .map(AlphaRule::Fixed)
                .ok_or_else(|| Error::Config(format!("invalid alpha {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub s: f64,
    pub omega: (f64, f64),
    pub x_min: f64,
    pub x_max: f64,
    /// Cells across Ω on the inversion grid.
    pub n_omega: usize,
    /// Gap width ε between Ω and W₂, rounded to whole cells of the
    /// inversion grid (at least one).
    pub eps_gap: f64,
    /// Data-generation grid is `refine_factor` times finer (nested).
    pub refine_factor: usize,
    pub deltas: Vec<f64>,
    pub alpha: AlphaRule,
    pub penalty_ends: PenaltyEnds,
    pub tau: f64,
    pub max_iter: usize,
    pub profile_f: SourceProfile,
    pub profile_f_tilde: SourceProfile,
    /// Width of the cutoff transition inside each W₁ component.
    pub margin: f64,
    pub truth: Truth,
    pub seed: u64,
}

pub const DEFAULT_MARGIN: f64 = 0.9;
pub const DEFAULT_EPS_GAP: f64 = 0.125;

impl ExperimentConfig {
    /// The shared reference setup; `ex1` and `ex2` differ only in the truth
    /// and the discrepancy factor.
    fn reference(name: &str, truth: Truth, tau: f64) -> Self {
        Self {
            name: name.to_string(),
            s: 0.4,
            omega: (-1.0, 1.0),
            x_min: -3.0,
            x_max: 3.0,
            n_omega: 128,
            eps_gap: DEFAULT_EPS_GAP,
            refine_factor: 4,
            deltas: vec![1e-3, 1e-2],
            alpha: AlphaRule::DeltaSquared,
            penalty_ends: PenaltyEnds::Free,
            tau,
            max_iter: 500,
            profile_f: SourceProfile::One,
            profile_f_tilde: SourceProfile::Gauss,
            margin: DEFAULT_MARGIN,
            truth,
            seed: 7,
        }
    }

    pub fn ex1() -> Self {
        Self::reference("ex1", Truth::Ex1, 4.0)
    }

    pub fn ex2() -> Self {
        Self::reference("ex2", Truth::Ex2, 40.0)
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "ex1" => Ok(Self::ex1()),
            "ex2" => Ok(Self::ex2()),
            other => Err(Error::Config(format!(
                "unknown example {other:?}; expected ex1 or ex2"
            ))),
        }
    }

    /// Inversion-grid spacing `(b - a) / n_omega`.
    pub fn h(&self) -> f64 {
        (self.omega.1 - self.omega.0) / self.n_omega as f64
    }

    /// Gap width in inversion-grid cells.
    pub fn eps_cells(&self) -> usize {
        ((self.eps_gap / self.h()).round() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::Config(format!("s = {} must lie in (0, 1)", self.s)));
        }
        if self.refine_factor < 2 {
            return Err(Error::Config(format!(
                "refine_factor = {} must be an integer ≥ 2 (data grid strictly finer)",
                self.refine_factor
            )));
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(*d >= 0.0)) {
            return Err(Error::Config("deltas must be a non-empty list of values ≥ 0".into()));
        }
        if !(self.eps_gap > 0.0) {
            return Err(Error::Config(format!("eps_gap = {} must be > 0", self.eps_gap)));
        }
        if !(self.tau > 0.0) {
            return Err(Error::Config(format!("tau = {} must be > 0", self.tau)));
        }
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Reads a TOML file; missing keys fall back to the `ex1` setup.
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent())
    }

    pub fn from_toml_str(text: &str, base: Option<&Path>) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        let mut cfg = Self::ex1();
        let RawConfig {
            name,
            problem,
            grid,
            data,
            inversion,
        } = raw;
        if let Some(name) = name {
            cfg.name = name;
        }
        if let Some(p) = problem {
            set(&mut cfg.s, p.s);
            if let Some([a, b]) = p.omega {
                cfg.omega = (a, b);
            }
            set(&mut cfg.x_min, p.x_min);
            set(&mut cfg.x_max, p.x_max);
            if let Some(t) = p.truth {
                cfg.truth = Truth::parse(&t, base)?;
            }
        }
        if let Some(g) = grid {
            set(&mut cfg.n_omega, g.n_omega);
            set(&mut cfg.eps_gap, g.eps_gap);
            set(&mut cfg.refine_factor, g.refine_factor);
        }
        if let Some(d) = data {
            set(&mut cfg.deltas, d.deltas);
            set(&mut cfg.seed, d.seed);
            set(&mut cfg.margin, d.margin);
            if let Some(p) = d.profile_f {
                cfg.profile_f = p.parse()?;
            }
            if let Some(p) = d.profile_f_tilde {
                cfg.profile_f_tilde = p.parse()?;
            }
        }
        if let Some(i) = inversion {
            if let Some(a) = i.alpha {
                cfg.alpha = match a {
                    AlphaValue::Number(v) => AlphaRule::parse(&v.to_string())?,
                    AlphaValue::Text(t) => AlphaRule::parse(&t)?,
                };
            }
            if let Some(e) = i.penalty_ends {
                cfg.penalty_ends = e.parse()?;
            }
            set(&mut cfg.tau, i.tau);
            set(&mut cfg.max_iter, i.max_iter);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    problem: Option<RawProblem>,
    grid: Option<RawGrid>,
    data: Option<RawData>,
    inversion: Option<RawInversion>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    s: Option<f64>,
    omega: Option<[f64; 2]>,
    x_min: Option<f64>,
    x_max: Option<f64>,
    truth: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n_omega: Option<usize>,
    eps_gap: Option<f64>,
    refine_factor: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    deltas: Option<Vec<f64>>,
    seed: Option<u64>,
    margin: Option<f64>,
    profile_f: Option<String>,
    profile_f_tilde: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AlphaValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInversion {
    alpha: Option<AlphaValue>,
    penalty_ends: Option<String>,
    tau: Option<f64>,
    max_iter: Option<usize>,
}
