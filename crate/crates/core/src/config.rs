//! Run configuration: a line-oriented `key = value` file under `[section]`
//! headers. Every key is optional and checked against [`SCHEMA`]; unknown
//! keys, duplicates and malformed values are rejected before any work starts.
//! The full schema is documented in `docs/config.md`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::data::DataKind;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::solver::SolverConfig;
use crate::verify::VerifyConfig;
use crate::weighted::WeightParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Bool,
    Str,
    FloatList,
}

pub const SCHEMA: &[(&str, &str, Kind)] = &[
    ("grid", "d", Kind::Int),
    ("grid", "half_width", Kind::Float),
    ("grid", "n", Kind::Int),
    ("solver", "t_min", Kind::Float),
    ("solver", "t_max", Kind::Float),
    ("solver", "slices", Kind::Int),
    ("solver", "quad_order", Kind::Int),
    ("solver", "max_iter", Kind::Int),
    ("solver", "tol", Kind::Float),
    ("solver", "delta", Kind::Float),
    ("solver", "eta_hat", Kind::Float),
    ("solver", "eta_samples", Kind::Int),
    ("solver", "data", Kind::Str),
    ("solver", "core", Kind::Float),
    ("solver", "centers", Kind::FloatList),
    ("solver", "amplitudes", Kind::FloatList),
    ("solver", "override_smallness", Kind::Bool),
    ("weights", "gamma", Kind::Float),
    ("weights", "tilde_gamma", Kind::Float),
    ("weights", "alpha", Kind::Float),
    ("weights", "beta", Kind::Float),
    ("weights", "tilde_beta", Kind::Float),
    ("weights", "hat_beta", Kind::Float),
    ("verify", "seed", Kind::Int),
    ("verify", "lemma_half_width", Kind::Float),
    ("verify", "lemma_n", Kind::Int),
    ("verify", "young_half_width", Kind::Float),
    ("verify", "young_n", Kind::Int),
    ("verify", "oseen_half_width", Kind::Float),
    ("verify", "oseen_n", Kind::Int),
    ("verify", "t_min", Kind::Float),
    ("verify", "t_max", Kind::Float),
    ("verify", "n_times", Kind::Int),
    ("verify", "linear_betas", Kind::FloatList),
    ("verify", "linear_gammas", Kind::FloatList),
    ("verify", "young_alphas", Kind::FloatList),
    ("verify", "young_betas", Kind::FloatList),
    ("verify", "young_per_octave", Kind::Int),
    ("verify", "beta_draws", Kind::Int),
    ("verify", "beta_times", Kind::FloatList),
    ("verify", "leray_fields", Kind::Int),
    ("verify", "oseen_radii", Kind::Int),
    ("verify", "initial_data", Kind::Str),
    ("verify", "initial_core", Kind::Float),
    ("verify", "bootstrap_alphas", Kind::FloatList),
    ("verify", "bootstrap_hat_betas", Kind::FloatList),
    ("output", "dir", Kind::Str),
    ("output", "json", Kind::Bool),
    ("output", "csv", Kind::Bool),
];

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
    Str(String),
    FloatList(Vec<f64>),
}

fn cfg_err(path: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Config { path: path.into(), msg: msg.into() }
}

fn parse_value(kind: Kind, raw: &str, path: &str) -> Result<Value> {
    let bad = |what: &str| cfg_err(path, format!("expected {what}, got `{raw}`"));
    let float = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    Ok(match kind {
        Kind::Float => Value::Float(float(raw).ok_or_else(|| bad("a finite number"))?),
        Kind::Int => Value::Int(raw.parse().map_err(|_| bad("a nonnegative integer"))?),
        Kind::Bool => match raw {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => return Err(bad("true or false")),
        },
        Kind::Str => {
            let s = raw.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(raw);
            Value::Str(s.to_string())
        }
        Kind::FloatList => {
            let items: Option<Vec<f64>> = raw.split(',').map(float).collect();
            Value::FloatList(items.filter(|v| !v.is_empty()).ok_or_else(|| bad("a comma-separated list of numbers"))?)
        }
    })
}

/// Validated `section.key -> value` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    values: BTreeMap<String, Value>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = format!("line {}", i + 1);
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| cfg_err(&at, "unterminated section header"))?.trim();
                if !SCHEMA.iter().any(|(s, _, _)| *s == name) {
                    return Err(cfg_err(name, "unknown section"));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, raw) = line.split_once('=').ok_or_else(|| cfg_err(&at, "expected `key = value`"))?;
            let sec = section.as_deref().ok_or_else(|| cfg_err(&at, "key outside any section"))?;
            let key = key.trim();
            let path = format!("{sec}.{key}");
            let kind = SCHEMA
                .iter()
                .find(|(s, k, _)| *s == sec && *k == key)
                .map(|e| e.2)
                .ok_or_else(|| cfg_err(&path, "unknown key"))?;
            let v = parse_value(kind, raw.trim(), &path)?;
            if values.insert(path.clone(), v).is_some() {
                return Err(cfg_err(&path, "duplicate key"));
            }
        }
        Ok(Self { values })
    }

    fn get(&self, path: &str) -> Option<&Value> {
        self.values.get(path)
    }

    pub fn float(&self, path: &str) -> Option<f64> {
        match self.get(path) {
            Some(Value::Float(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn int(&self, path: &str) -> Option<u64> {
        match self.get(path) {
            Some(Value::Int(v)) => Some(*v),
            _ => None,
        }
    }

    fn usize(&self, path: &str) -> Result<Option<usize>> {
        self.int(path).map(|v| usize::try_from(v).map_err(|_| cfg_err(path, "value too large"))).transpose()
    }

    pub fn bool(&self, path: &str) -> Option<bool> {
        match self.get(path) {
            Some(Value::Bool(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn str(&self, path: &str) -> Option<&str> {
        match self.get(path) {
            Some(Value::Str(v)) => Some(v),
            _ => None,
        }
    }

    pub fn list(&self, path: &str) -> Option<&[f64]> {
        match self.get(path) {
            Some(Value::FloatList(v)) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveSettings {
    /// `delta` and `eta_hat` here are placeholders until calibration.
    pub solver: SolverConfig,
    /// Explicit smallness level; `None` means `1/(4 η̂)`.
    pub delta: Option<f64>,
    pub eta_samples: usize,
    pub data: DataKind,
    pub centers: Vec<Vec<f64>>,
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub json: bool,
    pub csv: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solve: SolveSettings,
    pub verify: VerifyConfig,
    pub bootstrap_alphas: Vec<f64>,
    pub bootstrap_hat_betas: Vec<f64>,
    pub seed: u64,
    pub output: OutputSettings,
    /// Hex SHA-256 of the source text.
    pub hash: String,
}

fn data_kind(path: &str, name: &str, core: f64) -> Result<DataKind> {
    match name {
        "vortex" => Ok(DataKind::Vortex { core }),
        "curl-potential" => Ok(DataKind::CurlPotential { core }),
        other => Err(cfg_err(path, format!("expected vortex or curl-potential, got `{other}`"))),
    }
}

fn grid_at(path: &str, d: usize, l: f64, n: usize) -> Result<GridSpec> {
    GridSpec::new(d, l, n).map_err(|e| cfg_err(path, e.to_string()))
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self> {
        let t = Table::parse(text)?;
        let hash = format!("{:x}", Sha256::digest(text.as_bytes()));

        let d = t.usize("grid.d")?.unwrap_or(2);
        let grid = grid_at("grid", d, t.float("grid.half_width").unwrap_or(8.0), t.usize("grid.n")?.unwrap_or(128))?;
        let h = grid.spacing();

        let defaults = VerifyConfig::default().initial;
        let params = WeightParams {
            gamma: t.float("weights.gamma").unwrap_or(defaults.gamma),
            tilde_gamma: t.float("weights.tilde_gamma").unwrap_or(defaults.tilde_gamma),
            alpha: t.float("weights.alpha").unwrap_or(defaults.alpha),
            beta: t.float("weights.beta").unwrap_or(defaults.beta),
            tilde_beta: t.float("weights.tilde_beta").unwrap_or(defaults.tilde_beta),
            hat_beta: Some(t.float("weights.hat_beta").unwrap_or(1.0)),
        };
        params.validate(d).map_err(|e| cfg_err("weights", e.to_string()))?;

        let solver = SolverConfig {
            grid,
            t_min: t.float("solver.t_min").unwrap_or(h * h),
            t_max: t.float("solver.t_max").unwrap_or(1.0),
            slices: t.usize("solver.slices")?.unwrap_or(20),
            quad_order: t.usize("solver.quad_order")?.unwrap_or(8),
            max_iter: t.usize("solver.max_iter")?.unwrap_or(40),
            tol: t.float("solver.tol").unwrap_or(1e-8),
            delta: 1.0,
            params,
            eta_hat: t.float("solver.eta_hat"),
            override_smallness: t.bool("solver.override_smallness").unwrap_or(false),
        };
        solver.validate().map_err(|e| cfg_err("solver", e.to_string()))?;
        let delta = t.float("solver.delta");
        if delta.is_some_and(|v| v <= 0.0) {
            return Err(cfg_err("solver.delta", "must be positive"));
        }
        if t.float("solver.eta_hat").is_some_and(|v| v <= 0.0) {
            return Err(cfg_err("solver.eta_hat", "must be positive"));
        }
        let core = t.float("solver.core").unwrap_or(2.0 * h);
        let data = data_kind("solver.data", t.str("solver.data").unwrap_or("curl-potential"), core)?;
        let centers: Vec<Vec<f64>> = match t.list("solver.centers") {
            Some(flat) => {
                if flat.len() % d != 0 {
                    return Err(cfg_err("solver.centers", format!("length must be a multiple of d = {d}")));
                }
                flat.chunks(d).map(|c| c.to_vec()).collect()
            }
            None => [[-0.1, 0.05], [0.12, -0.08]]
                .iter()
                .map(|c| (0..d).map(|a| c.get(a).copied().unwrap_or(0.0)).collect())
                .collect(),
        };
        let amplitudes = t.list("solver.amplitudes").map(<[f64]>::to_vec).unwrap_or_else(|| vec![1.0, 0.6]);
        if amplitudes.len() != centers.len() {
            return Err(cfg_err("solver.amplitudes", "need one amplitude per centre"));
        }
        let eta_samples = t.usize("solver.eta_samples")?.unwrap_or(8);
        if eta_samples == 0 {
            return Err(cfg_err("solver.eta_samples", "at least one sample is required"));
        }

        let base = VerifyConfig::default();
        let pick = |k: &str, lk: &str, nk: &str, g: GridSpec| -> Result<GridSpec> {
            grid_at(
                k,
                d,
                t.float(lk).unwrap_or(g.half_width()),
                t.usize(nk)?.unwrap_or(g.points_per_axis()),
            )
        };
        let pairs = |a: &str, b: &str, def: &[(f64, f64)]| -> Result<Vec<(f64, f64)>> {
            match (t.list(a), t.list(b)) {
                (None, None) => Ok(def.to_vec()),
                (Some(x), Some(y)) if x.len() == y.len() => Ok(x.iter().copied().zip(y.iter().copied()).collect()),
                _ => Err(cfg_err(b, format!("must be given together with {a}, with equal length"))),
            }
        };
        let initial_core = t.float("verify.initial_core").unwrap_or(base.initial_data.core());
        let verify = VerifyConfig {
            lemma_grid: pick("verify.lemma_half_width", "verify.lemma_half_width", "verify.lemma_n", base.lemma_grid)?,
            young_grid: pick("verify.young_half_width", "verify.young_half_width", "verify.young_n", base.young_grid)?,
            oseen_grid: pick("verify.oseen_half_width", "verify.oseen_half_width", "verify.oseen_n", base.oseen_grid)?,
            t_min: t.float("verify.t_min").unwrap_or(base.t_min),
            t_max: t.float("verify.t_max").unwrap_or(base.t_max),
            n_times: t.usize("verify.n_times")?.unwrap_or(base.n_times),
            linear_pairs: pairs("verify.linear_betas", "verify.linear_gammas", &base.linear_pairs)?,
            young_pairs: pairs("verify.young_alphas", "verify.young_betas", &base.young_pairs)?,
            young_per_octave: t.usize("verify.young_per_octave")?.unwrap_or(base.young_per_octave),
            beta_draws: t.usize("verify.beta_draws")?.unwrap_or(base.beta_draws),
            beta_times: t.list("verify.beta_times").map(<[f64]>::to_vec).unwrap_or(base.beta_times),
            leray_fields: t.usize("verify.leray_fields")?.unwrap_or(base.leray_fields),
            oseen_radii: t.usize("verify.oseen_radii")?.unwrap_or(base.oseen_radii),
            initial: WeightParams { hat_beta: None, ..params },
            initial_data: data_kind(
                "verify.initial_data",
                t.str("verify.initial_data").unwrap_or("vortex"),
                initial_core,
            )?,
        };
        verify.validate().map_err(|e| cfg_err("verify", e.to_string()))?;

        let bootstrap_alphas =
            t.list("verify.bootstrap_alphas").map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let bootstrap_hat_betas = t
            .list("verify.bootstrap_hat_betas")
            .map(<[f64]>::to_vec)
            .unwrap_or_else(|| vec![0.0, 0.5, 1.0, params.beta]);

        let output = OutputSettings {
            dir: PathBuf::from(t.str("output.dir").unwrap_or("out")),
            json: t.bool("output.json").unwrap_or(true),
            csv: t.bool("output.csv").unwrap_or(true),
        };

        Ok(Self {
            solve: SolveSettings { solver, delta, eta_samples, data, centers, amplitudes },
            verify,
            bootstrap_alphas,
            bootstrap_hat_betas,
            seed: t.int("verify.seed").unwrap_or(0),
            output,
            hash,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::from_str(&text)
    }
}
