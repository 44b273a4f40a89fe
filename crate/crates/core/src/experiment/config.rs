//! Experiment configuration: a flat TOML file of `key = value` pairs.
//!
//! Common keys:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `kind` | required | `dho`, `jc-trotter`, `jc-synth` or `cz-benchmark` |
//! | `seed` | `0` | master seed for shots and optimizer restarts |
//! | `shots` | 4096 (dho), 2000 (others) | repetitions per circuit |
//! | `calibration` | `"none"` | calibration CSV, relative to the config file, or `"none"` |
//! | `out` | `"out"` | output directory, relative to the working directory |
//! | `noise_method` | `"sampled"` | `"sampled"` (trajectories) or `"exact"` (analytic/density-matrix distribution) |
//! | `time_points` | `21` | grid size `M` (not for `cz-benchmark`) |
//! | `t_max_periods` | `2.0` | grid spans `[0, t_max_periods · T0]` |
//! | `sx_duration_us`, `cz_duration_us`, `measure_duration_us` | from calibration | duration overrides |
//!
//! `dho`: `delta` (1.0), `drive` (0.75), `n_qubits` (int or list, `[3, 6, 11]`),
//! `max_excitation` (2).
//!
//! `jc-trotter`: `omega0` (1.0), `omegaz` (1.0), `g` (0.1), `trotter_steps`
//! (int or list, `[1, …, 7]`), `merge_half_steps` (true).
//!
//! `jc-synth`: `omega0`, `omegaz`, `g` as above, `layouts` (list of
//! `"six-cz"` and `"four-cz"`, both by default), `synth_restarts` (20),
//! `synth_max_iterations` (2000), `synth_gradient_tolerance` (1e-10),
//! `synth_target_cost` (1e-10), `synth_seed` (`seed`), `synth_warm_start`
//! (false).
//!
//! `cz-benchmark`: `n_cz` (6), `repetitions` (int or list, `[1, …, 7]`).
//!
//! Keys that do not apply to the chosen kind are rejected.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::Spanned;

use crate::jc::JcParams;
use crate::noise::GateDurations;
use crate::synth::SynthOptions;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: `{key}`: {message}")]
    Invalid { line: usize, key: String, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Override(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Dho,
    JcTrotter,
    JcSynth,
    CzBenchmark,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::Dho,
        ExperimentKind::JcTrotter,
        ExperimentKind::JcSynth,
        ExperimentKind::CzBenchmark,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Dho => "dho",
            ExperimentKind::JcTrotter => "jc-trotter",
            ExperimentKind::JcSynth => "jc-synth",
            ExperimentKind::CzBenchmark => "cz-benchmark",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn default_shots(self) -> u64 {
        match self {
            ExperimentKind::Dho => 4096,
            _ => 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseMethod {
    /// Monte Carlo trajectories, `shots` per time point.
    Sampled,
    /// Exact outcome distribution (product-state or density-matrix oracle).
    Exact,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CalibrationSource {
    None,
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub points: usize,
    pub t_max_periods: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { points: 21, t_max_periods: 2.0 }
    }
}

impl TimeGrid {
    /// Uniform grid over `[0, t_max_periods · period]`, endpoints included.
    pub fn times(&self, period: f64) -> Vec<f64> {
        let t_max = self.t_max_periods * period;
        match self.points {
            0 => Vec::new(),
            1 => vec![0.0],
            m => (0..m).map(|j| t_max * j as f64 / (m - 1) as f64).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JcModel {
    pub omega0: f64,
    pub omegaz: f64,
    pub g: f64,
}

impl JcModel {
    /// Parameters for the two-qubit cavity used by every JC experiment.
    pub fn params(&self) -> crate::Result<JcParams> {
        JcParams::new(self.omega0, self.omegaz, self.g, 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayoutPool {
    SixCz,
    FourCz,
}

impl LayoutPool {
    pub fn as_str(self) -> &'static str {
        match self {
            LayoutPool::SixCz => "six-cz",
            LayoutPool::FourCz => "four-cz",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelParams {
    Dho {
        delta: f64,
        drive: f64,
        n_qubits: Vec<usize>,
        max_excitation: usize,
    },
    JcTrotter {
        model: JcModel,
        steps: Vec<usize>,
        merge_half_steps: bool,
    },
    JcSynth {
        model: JcModel,
        pools: Vec<LayoutPool>,
        synth: SynthOptions,
        warm_start: bool,
    },
    CzBenchmark {
        n_cz: usize,
        repetitions: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ModelParams,
    pub shots: u64,
    pub seed: u64,
    pub calibration: CalibrationSource,
    pub noise_method: NoiseMethod,
    pub grid: TimeGrid,
    /// Per-field overrides of the calibration file's durations.
    pub sx_duration_us: Option<f64>,
    pub cz_duration_us: Option<f64>,
    pub measure_duration_us: Option<f64>,
    pub out: PathBuf,
}

#[derive(Deserialize, Debug, Clone, PartialEq)]
#[serde(untagged)]
enum OneOrMany {
    One(i64),
    Many(Vec<i64>),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct Raw {
    kind: Option<Spanned<String>>,
    seed: Option<Spanned<i64>>,
    shots: Option<Spanned<i64>>,
    calibration: Option<Spanned<String>>,
    out: Option<Spanned<String>>,
    noise_method: Option<Spanned<String>>,
    time_points: Option<Spanned<i64>>,
    t_max_periods: Option<Spanned<f64>>,
    sx_duration_us: Option<Spanned<f64>>,
    cz_duration_us: Option<Spanned<f64>>,
    measure_duration_us: Option<Spanned<f64>>,
    delta: Option<Spanned<f64>>,
    drive: Option<Spanned<f64>>,
    n_qubits: Option<Spanned<OneOrMany>>,
    max_excitation: Option<Spanned<i64>>,
    omega0: Option<Spanned<f64>>,
    omegaz: Option<Spanned<f64>>,
    g: Option<Spanned<f64>>,
    trotter_steps: Option<Spanned<OneOrMany>>,
    merge_half_steps: Option<Spanned<bool>>,
    layouts: Option<Spanned<Vec<String>>>,
    synth_restarts: Option<Spanned<i64>>,
    synth_max_iterations: Option<Spanned<i64>>,
    synth_gradient_tolerance: Option<Spanned<f64>>,
    synth_target_cost: Option<Spanned<f64>>,
    synth_seed: Option<Spanned<i64>>,
    synth_warm_start: Option<Spanned<bool>>,
    n_cz: Option<Spanned<i64>>,
    repetitions: Option<Spanned<OneOrMany>>,
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].matches('\n').count() + 1
    }

    fn invalid<T>(&self, key: &str, v: &Spanned<T>, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            line: self.line(v.span()),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn count(&self, key: &str, v: &Option<Spanned<i64>>, default: u64, min: u64) -> Result<u64, ConfigError> {
        match v {
            None => Ok(default),
            Some(s) if *s.get_ref() >= min as i64 => Ok(*s.get_ref() as u64),
            Some(s) => Err(self.invalid(key, s, format!("must be at least {min}, got {}", s.get_ref()))),
        }
    }

    fn positive(&self, key: &str, v: &Option<Spanned<f64>>, default: f64) -> Result<f64, ConfigError> {
        match v {
            None => Ok(default),
            Some(s) if *s.get_ref() > 0.0 && s.get_ref().is_finite() => Ok(*s.get_ref()),
            Some(s) => Err(self.invalid(key, s, format!("must be positive and finite, got {}", s.get_ref()))),
        }
    }

    fn finite(&self, key: &str, v: &Option<Spanned<f64>>, default: f64) -> Result<f64, ConfigError> {
        match v {
            None => Ok(default),
            Some(s) if s.get_ref().is_finite() => Ok(*s.get_ref()),
            Some(s) => Err(self.invalid(key, s, "must be finite")),
        }
    }

    fn list(&self, key: &str, v: &Option<Spanned<OneOrMany>>, default: &[usize], min: usize) -> Result<Vec<usize>, ConfigError> {
        let Some(s) = v else {
            return Ok(default.to_vec());
        };
        let values = match s.get_ref() {
            OneOrMany::One(x) => vec![*x],
            OneOrMany::Many(xs) => xs.clone(),
        };
        if values.is_empty() {
            return Err(self.invalid(key, s, "list is empty"));
        }
        if let Some(bad) = values.iter().find(|&&x| x < min as i64) {
            return Err(self.invalid(key, s, format!("entries must be at least {min}, got {bad}")));
        }
        let out: Vec<usize> = values.iter().map(|&x| x as usize).collect();
        if out.windows(2).any(|w| w[1] <= w[0]) {
            return Err(self.invalid(key, s, "entries must be strictly increasing"));
        }
        Ok(out)
    }
}

fn kind_keys(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::Dho => &["time_points", "t_max_periods", "delta", "drive", "n_qubits", "max_excitation"],
        ExperimentKind::JcTrotter => &["time_points", "t_max_periods", "omega0", "omegaz", "g", "trotter_steps", "merge_half_steps"],
        ExperimentKind::JcSynth => &[
            "time_points",
            "t_max_periods",
            "omega0",
            "omegaz",
            "g",
            "layouts",
            "synth_restarts",
            "synth_max_iterations",
            "synth_gradient_tolerance",
            "synth_target_cost",
            "synth_seed",
            "synth_warm_start",
        ],
        ExperimentKind::CzBenchmark => &["n_cz", "repetitions"],
    }
}

/// Spans of every kind-specific key that is present.
fn present_specific(raw: &Raw) -> Vec<(&'static str, Range<usize>)> {
    let mut out = Vec::new();
    macro_rules! check {
        ($($k:ident),*) => {
            $(if let Some(v) = &raw.$k { out.push((stringify!($k), v.span())); })*
        };
    }
    check!(
        time_points, t_max_periods, delta, drive, n_qubits, max_excitation, omega0, omegaz, g,
        trotter_steps, merge_half_steps, layouts, synth_restarts, synth_max_iterations,
        synth_gradient_tolerance, synth_target_cost, synth_seed, synth_warm_start, n_cz, repetitions
    );
    out
}

fn seed_value(v: i64) -> u64 {
    v as u64
}

impl ExperimentConfig {
    /// Reads and validates `path`. Relative calibration paths resolve
    /// against the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, path.parent())
    }

    /// Parses config text; `base` anchors a relative calibration path.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, ConfigError> {
        let ctx = Ctx { text };
        let raw: Raw = toml::from_str(text).map_err(|e| ConfigError::Syntax {
            line: e.span().map(|s| ctx.line(s)).unwrap_or(1),
            message: e.message().trim().to_string(),
        })?;

        let kind_raw = raw.kind.as_ref().ok_or(ConfigError::Missing("kind"))?;
        let kind = ExperimentKind::parse(kind_raw.get_ref()).ok_or_else(|| {
            ctx.invalid(
                "kind",
                kind_raw,
                format!(
                    "unknown experiment kind `{}`; expected one of dho, jc-trotter, jc-synth, cz-benchmark",
                    kind_raw.get_ref()
                ),
            )
        })?;
        let allowed = kind_keys(kind);
        if let Some((key, span)) = present_specific(&raw).into_iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(ConfigError::Invalid {
                line: ctx.line(span),
                key: key.to_string(),
                message: format!("does not apply to kind `{}`", kind.as_str()),
            });
        }

        let seed = raw.seed.as_ref().map(|s| seed_value(*s.get_ref())).unwrap_or(0);
        if let Some(s) = raw.seed.as_ref().filter(|s| *s.get_ref() < 0) {
            return Err(ctx.invalid("seed", s, "must be non-negative"));
        }
        let shots = ctx.count("shots", &raw.shots, kind.default_shots(), 1)?;

        let calibration = match &raw.calibration {
            None => CalibrationSource::None,
            Some(s) if s.get_ref() == "none" => CalibrationSource::None,
            Some(s) => {
                let p = PathBuf::from(s.get_ref());
                let p = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p,
                };
                if !p.is_file() {
                    return Err(ctx.invalid("calibration", s, format!("file {} does not exist", p.display())));
                }
                CalibrationSource::File(p)
            }
        };
        let out = raw
            .out
            .as_ref()
            .map(|s| PathBuf::from(s.get_ref()))
            .unwrap_or_else(|| PathBuf::from("out"));
        let noise_method = match &raw.noise_method {
            None => NoiseMethod::Sampled,
            Some(s) => match s.get_ref().as_str() {
                "sampled" => NoiseMethod::Sampled,
                "exact" => NoiseMethod::Exact,
                other => return Err(ctx.invalid("noise_method", s, format!("expected `sampled` or `exact`, got `{other}`"))),
            },
        };
        let grid = TimeGrid {
            points: ctx.count("time_points", &raw.time_points, 21, 2)? as usize,
            t_max_periods: ctx.positive("t_max_periods", &raw.t_max_periods, 2.0)?,
        };
        let duration = |key: &str, v: &Option<Spanned<f64>>| -> Result<Option<f64>, ConfigError> {
            v.as_ref().map(|_| ctx.positive(key, v, 0.0)).transpose()
        };

        let jc_model = || -> Result<JcModel, ConfigError> {
            let m = JcModel {
                omega0: ctx.finite("omega0", &raw.omega0, 1.0)?,
                omegaz: ctx.finite("omegaz", &raw.omegaz, 1.0)?,
                g: ctx.positive("g", &raw.g, 0.1)?,
            };
            Ok(m)
        };

        let model = match kind {
            ExperimentKind::Dho => {
                let delta = ctx.finite("delta", &raw.delta, 1.0)?;
                if delta == 0.0 {
                    return Err(ctx.invalid("delta", raw.delta.as_ref().expect("set"), "detuning must be non-zero"));
                }
                ModelParams::Dho {
                    delta,
                    drive: ctx.finite("drive", &raw.drive, 0.75)?,
                    n_qubits: ctx.list("n_qubits", &raw.n_qubits, &[3, 6, 11], 1)?,
                    max_excitation: ctx.count("max_excitation", &raw.max_excitation, 2, 0)? as usize,
                }
            }
            ExperimentKind::JcTrotter => ModelParams::JcTrotter {
                model: jc_model()?,
                steps: ctx.list("trotter_steps", &raw.trotter_steps, &[1, 2, 3, 4, 5, 6, 7], 1)?,
                merge_half_steps: raw.merge_half_steps.as_ref().map(|s| *s.get_ref()).unwrap_or(true),
            },
            ExperimentKind::JcSynth => {
                let pools = match &raw.layouts {
                    None => vec![LayoutPool::SixCz, LayoutPool::FourCz],
                    Some(s) => {
                        let mut pools = Vec::new();
                        for name in s.get_ref() {
                            let pool = match name.as_str() {
                                "six-cz" => LayoutPool::SixCz,
                                "four-cz" => LayoutPool::FourCz,
                                other => {
                                    return Err(ctx.invalid("layouts", s, format!("unknown layout set `{other}`; expected `six-cz` or `four-cz`")))
                                }
                            };
                            if pools.contains(&pool) {
                                return Err(ctx.invalid("layouts", s, format!("`{name}` listed twice")));
                            }
                            pools.push(pool);
                        }
                        if pools.is_empty() {
                            return Err(ctx.invalid("layouts", s, "list is empty"));
                        }
                        pools
                    }
                };
                let d = SynthOptions::default();
                let synth = SynthOptions {
                    restarts: ctx.count("synth_restarts", &raw.synth_restarts, d.restarts as u64, 1)? as usize,
                    max_iterations: ctx.count("synth_max_iterations", &raw.synth_max_iterations, d.max_iterations as u64, 1)?
                        as usize,
                    gradient_tolerance: ctx.positive("synth_gradient_tolerance", &raw.synth_gradient_tolerance, d.gradient_tolerance)?,
                    target_cost: ctx.positive("synth_target_cost", &raw.synth_target_cost, d.target_cost)?,
                    seed: match &raw.synth_seed {
                        None => seed,
                        Some(s) if *s.get_ref() >= 0 => seed_value(*s.get_ref()),
                        Some(s) => return Err(ctx.invalid("synth_seed", s, "must be non-negative")),
                    },
                    ..d
                };
                ModelParams::JcSynth {
                    model: jc_model()?,
                    pools,
                    synth,
                    warm_start: raw.synth_warm_start.as_ref().map(|s| *s.get_ref()).unwrap_or(false),
                }
            }
            ExperimentKind::CzBenchmark => {
                let n_cz = ctx.count("n_cz", &raw.n_cz, 6, 2)? as usize;
                if !n_cz.is_multiple_of(2) {
                    return Err(ctx.invalid("n_cz", raw.n_cz.as_ref().expect("set"), "must be even so the ideal circuit is the identity"));
                }
                ModelParams::CzBenchmark {
                    n_cz,
                    repetitions: ctx.list("repetitions", &raw.repetitions, &[1, 2, 3, 4, 5, 6, 7], 1)?,
                }
            }
        };

        let cfg = Self {
            kind,
            model,
            shots,
            seed,
            calibration,
            noise_method,
            grid,
            sx_duration_us: duration("sx_duration_us", &raw.sx_duration_us)?,
            cz_duration_us: duration("cz_duration_us", &raw.cz_duration_us)?,
            measure_duration_us: duration("measure_duration_us", &raw.measure_duration_us)?,
            out,
        };
        if let ModelParams::JcSynth { model, .. } | ModelParams::JcTrotter { model, .. } = &cfg.model {
            model.params().map_err(|e| ConfigError::Override(e.to_string()))?;
        }
        Ok(cfg)
    }

    /// Default configuration for `kind`.
    pub fn defaults(kind: ExperimentKind) -> Self {
        Self::parse(&format!("kind = \"{}\"\n", kind.as_str()), None).expect("defaults are valid")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        if let ModelParams::JcSynth { synth, .. } = &mut self.model {
            if synth.seed == self.seed {
                synth.seed = seed;
            }
        }
        self.seed = seed;
        self
    }

    pub fn with_shots(mut self, shots: u64) -> Result<Self, ConfigError> {
        if shots == 0 {
            return Err(ConfigError::Override("--shots must be at least 1".into()));
        }
        self.shots = shots;
        Ok(self)
    }

    /// `"none"` or a file path (relative to the working directory).
    pub fn with_calibration(mut self, spec: &str) -> Result<Self, ConfigError> {
        self.calibration = if spec == "none" {
            CalibrationSource::None
        } else {
            let p = PathBuf::from(spec);
            if !p.is_file() {
                return Err(ConfigError::Override(format!("calibration file {spec} does not exist")));
            }
            CalibrationSource::File(p)
        };
        Ok(self)
    }

    pub fn with_out(mut self, out: impl Into<PathBuf>) -> Self {
        self.out = out.into();
        self
    }

    /// Duration defaults of `table`, overridden by any configured value.
    pub fn durations(&self, base: GateDurations) -> GateDurations {
        GateDurations {
            sx_us: self.sx_duration_us.unwrap_or(base.sx_us),
            cz_us: self.cz_duration_us.unwrap_or(base.cz_us),
            measure_us: self.measure_duration_us.unwrap_or(base.measure_us),
        }
    }

    /// One `key = value` line per effective setting, in a fixed order.
    /// Output paths are excluded so that moving the output does not change
    /// the digest.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let list = |v: &[usize]| format!("{v:?}");
        kv("kind", self.kind.as_str().into());
        kv("seed", self.seed.to_string());
        kv("shots", self.shots.to_string());
        kv(
            "calibration",
            match &self.calibration {
                CalibrationSource::None => "none".into(),
                CalibrationSource::File(p) => format!("file:{}", p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()),
            },
        );
        kv(
            "noise_method",
            match self.noise_method {
                NoiseMethod::Sampled => "sampled",
                NoiseMethod::Exact => "exact",
            }
            .into(),
        );
        kv("time_points", self.grid.points.to_string());
        kv("t_max_periods", format!("{:?}", self.grid.t_max_periods));
        for (k, v) in [
            ("sx_duration_us", self.sx_duration_us),
            ("cz_duration_us", self.cz_duration_us),
            ("measure_duration_us", self.measure_duration_us),
        ] {
            if let Some(v) = v {
                kv(k, format!("{v:?}"));
            }
        }
        match &self.model {
            ModelParams::Dho { delta, drive, n_qubits, max_excitation } => {
                kv("delta", format!("{delta:?}"));
                kv("drive", format!("{drive:?}"));
                kv("n_qubits", list(n_qubits));
                kv("max_excitation", max_excitation.to_string());
            }
            ModelParams::JcTrotter { model, steps, merge_half_steps } => {
                kv("jc", format!("{:?} {:?} {:?}", model.omega0, model.omegaz, model.g));
                kv("trotter_steps", list(steps));
                kv("merge_half_steps", merge_half_steps.to_string());
            }
            ModelParams::JcSynth { model, pools, synth, warm_start } => {
                kv("jc", format!("{:?} {:?} {:?}", model.omega0, model.omegaz, model.g));
                kv("layouts", pools.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(","));
                kv("synth", format!("{synth:?}"));
                kv("synth_warm_start", warm_start.to_string());
            }
            ModelParams::CzBenchmark { n_cz, repetitions } => {
                kv("n_cz", n_cz.to_string());
                kv("repetitions", list(repetitions));
            }
        }
        s
    }

    /// Hex SHA-256 of [`canonical_string`](Self::canonical_string).
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_string().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(text, None)
    }

    #[test]
    fn minimal_dho_gets_defaults() {
        let c = parse("kind = \"dho\"\n").unwrap();
        assert_eq!(c.shots, 4096);
        assert_eq!(c.grid, TimeGrid::default());
        assert_eq!(c.calibration, CalibrationSource::None);
        assert_eq!(
            c.model,
            ModelParams::Dho { delta: 1.0, drive: 0.75, n_qubits: vec![3, 6, 11], max_excitation: 2 }
        );
    }

    #[test]
    fn jc_defaults_to_2000_shots() {
        for kind in ["jc-trotter", "jc-synth", "cz-benchmark"] {
            let c = parse(&format!("kind = \"{kind}\"")).unwrap();
            assert_eq!(c.shots, 2000, "{kind}");
        }
        let c = parse("kind = \"jc-trotter\"\ntrotter_steps = 4\n").unwrap();
        assert!(matches!(c.model, ModelParams::JcTrotter { ref steps, .. } if steps == &vec![4]));
    }

    #[test]
    fn unknown_kind_is_rejected_with_line() {
        let e = parse("seed = 3\nkind = \"qft\"\n").unwrap_err();
        match e {
            ConfigError::Invalid { line, key, message } => {
                assert_eq!((line, key.as_str()), (2, "kind"));
                assert!(message.contains("qft"));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(parse("seed = 3").unwrap_err(), ConfigError::Missing("kind"));
    }

    #[test]
    fn diagnostics_point_at_lines() {
        let e = parse("kind = \"dho\"\nshots = 0\n").unwrap_err();
        assert!(matches!(e, ConfigError::Invalid { line: 2, .. }), "{e:?}");
        let e = parse("kind = \"dho\"\n\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 3, .. }), "{e:?}");
        let e = parse("kind = \"dho\"\nshots = \n").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 2, .. }), "{e:?}");
        let e = parse("kind = \"dho\"\ntrotter_steps = 3\n").unwrap_err();
        assert!(matches!(e, ConfigError::Invalid { line: 2, ref key, .. } if key == "trotter_steps"), "{e:?}");
        let e = parse("kind = \"dho\"\nn_qubits = [6, 3]\n").unwrap_err();
        assert!(e.to_string().contains("increasing"));
        let e = parse("kind = \"cz-benchmark\"\nn_cz = 5\n").unwrap_err();
        assert!(e.to_string().contains("even"));
        let e = parse("kind = \"dho\"\ncalibration = \"/nonexistent/x.csv\"\n").unwrap_err();
        assert!(e.to_string().contains("does not exist"));
    }

    #[test]
    fn calibration_resolves_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("cal.csv"), "qubit,readout_error,sx_error,cz_error,t1_us,t2_us\n0,0,0,,1,1\n").unwrap();
        let cfg_path = dir.path().join("c.toml");
        std::fs::write(&cfg_path, "kind = \"dho\"\ncalibration = \"cal.csv\"\n").unwrap();
        let c = ExperimentConfig::load(&cfg_path).unwrap();
        assert_eq!(c.calibration, CalibrationSource::File(dir.path().join("cal.csv")));
    }

    #[test]
    fn grid_and_digest() {
        let g = TimeGrid::default().times(10.0);
        assert_eq!(g.len(), 21);
        assert_eq!((g[0], g[20]), (0.0, 20.0));
        let a = parse("kind = \"dho\"").unwrap();
        let b = parse("kind = \"dho\"\nshots = 4096\n").unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), a.clone().with_seed(1).digest());
        assert_eq!(a.digest(), a.clone().with_out("elsewhere").digest());
    }

    #[test]
    fn synth_seed_follows_master_seed() {
        let c = parse("kind = \"jc-synth\"\nseed = 5\n").unwrap();
        let ModelParams::JcSynth { synth, .. } = c.clone().with_seed(9).model else { panic!() };
        assert_eq!(synth.seed, 9);
        let c = parse("kind = \"jc-synth\"\nseed = 5\nsynth_seed = 2\n").unwrap();
        let ModelParams::JcSynth { synth, .. } = c.with_seed(9).model else { panic!() };
        assert_eq!(synth.seed, 2);
    }
}
