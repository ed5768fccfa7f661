//! Flat `key=value` run configuration.
//!
//! Values are applied in order: built-in defaults, then the config file,
//! then command-line overrides. `delta` and `g` are remembered as requests
//! and resolved last against the final `kappa`, so they always win over
//! `omega0` and `epsilon`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use pseudoherm::casimir::{CasimirParams, SweepAxis};
use pseudoherm::fd;

use crate::CliError;

pub const MAX_DIM: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Config(format!("unknown format '{s}' (csv or json)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    /// Eigenvalues reported per sweep point.
    pub levels: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        fd::linspace(self.min, self.max, self.steps)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub omega0: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub dim: usize,
    pub tmax: f64,
    pub dt: f64,
    pub sweep: SweepSpec,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub allow_ep: bool,
    pub threads: Option<usize>,
    pub corrupt_metric: bool,
    pub flip_c_sign: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega0: 11.0,
            kappa: 20.0,
            epsilon: 0.1,
            alpha: 1.0,
            beta: 2.0,
            dim: 32,
            tmax: 10.0,
            dt: 0.01,
            sweep: SweepSpec {
                axis: SweepAxis::G,
                min: 0.0,
                max: 1.0,
                steps: 101,
                levels: 4,
            },
            out: None,
            format: None,
            allow_ep: false,
            threads: None,
            corrupt_metric: false,
            flip_c_sign: false,
        }
    }
}

/// Accumulates `key=value` assignments before validation.
#[derive(Clone, Debug, Default)]
pub struct ConfigBuilder {
    cfg: RunConfig,
    delta: Option<f64>,
    g: Option<f64>,
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("bad value for {key}: '{value}'")))
}

fn flag(key: &str, value: &str) -> Result<bool, CliError> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::Config(format!("bad value for {key}: '{value}'"))),
    }
}

fn axis(value: &str) -> Result<SweepAxis, CliError> {
    match value.trim() {
        "g" => Ok(SweepAxis::G),
        "delta" => Ok(SweepAxis::Delta),
        other => Err(CliError::Config(format!("unknown sweep axis '{other}' (g or delta)"))),
    }
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<&mut Self, CliError> {
        let c = &mut self.cfg;
        match key.trim() {
            "omega0" => c.omega0 = num(key, value)?,
            "kappa" => c.kappa = num(key, value)?,
            "epsilon" => c.epsilon = num(key, value)?,
            "alpha" => c.alpha = num(key, value)?,
            "beta" => c.beta = num(key, value)?,
            "delta" => self.delta = Some(num(key, value)?),
            "g" => self.g = Some(num(key, value)?),
            "dim" => c.dim = num(key, value)?,
            "tmax" => c.tmax = num(key, value)?,
            "dt" => c.dt = num(key, value)?,
            "sweep_axis" => c.sweep.axis = axis(value)?,
            "sweep_min" => c.sweep.min = num(key, value)?,
            "sweep_max" => c.sweep.max = num(key, value)?,
            "sweep_steps" => c.sweep.steps = num(key, value)?,
            "sweep_levels" => c.sweep.levels = num(key, value)?,
            "out" => c.out = Some(PathBuf::from(value.trim())),
            "format" => c.format = Some(value.parse()?),
            "allow_ep" => c.allow_ep = flag(key, value)?,
            "threads" => c.threads = Some(num(key, value)?),
            "corrupt_metric" => c.corrupt_metric = flag(key, value)?,
            "flip_c_sign" => c.flip_c_sign = flag(key, value)?,
            other => return Err(CliError::Config(format!("unknown key '{other}'"))),
        }
        Ok(self)
    }

    /// Applies every non-comment line of a config file.
    pub fn apply_text(&mut self, text: &str) -> Result<&mut Self, CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got '{raw}'", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(self)
    }

    pub fn build(&self) -> Result<RunConfig, CliError> {
        let mut c = self.cfg.clone();
        if let Some(d) = self.delta {
            c.omega0 = d + 0.5 * c.kappa;
        }
        if let Some(g) = self.g {
            c.epsilon = 8.0 * g / c.kappa;
        }
        c.validate()?;
        Ok(c)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        ConfigBuilder::new().apply_text(text)?.build()
    }

    pub fn params(&self) -> Result<CasimirParams, CliError> {
        CasimirParams::new(self.omega0, self.kappa, self.epsilon, self.alpha, self.beta)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params()?;
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.dim < 4 || self.dim > MAX_DIM {
            return bad(format!("dim must lie in [4, {MAX_DIM}], got {}", self.dim));
        }
        if !(self.tmax > 0.0 && self.tmax.is_finite()) {
            return bad(format!("tmax must be positive, got {}", self.tmax));
        }
        if !(self.dt > 0.0 && self.dt <= self.tmax) {
            return bad(format!("dt must lie in (0, tmax], got {}", self.dt));
        }
        if self.time_steps() > 10_000_000 {
            return bad("time grid exceeds 1e7 points".into());
        }
        let s = &self.sweep;
        if !(s.min.is_finite() && s.max.is_finite()) || !(s.min < s.max) {
            return bad(format!("empty sweep range [{}, {}]", s.min, s.max));
        }
        if s.steps < 2 {
            return bad(format!("sweep needs at least 2 steps, got {}", s.steps));
        }
        if s.levels == 0 || s.levels > self.dim {
            return bad(format!("sweep_levels must lie in [1, dim], got {}", s.levels));
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        Ok(())
    }

    pub fn time_steps(&self) -> usize {
        ((self.tmax / self.dt).round() as usize).max(1)
    }

    /// `[0, tmax]` with spacing as close to `dt` as divides `tmax`.
    pub fn time_grid(&self) -> Vec<f64> {
        fd::linspace(0.0, self.tmax, self.time_steps() + 1)
    }

    /// Every key with its value, sorted by key. Optional keys appear only when
    /// set. Parsing the joined lines gives back the same config.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut e: Vec<(&'static str, String)> = vec![
            ("allow_ep", self.allow_ep.to_string()),
            ("alpha", self.alpha.to_string()),
            ("beta", self.beta.to_string()),
            ("corrupt_metric", self.corrupt_metric.to_string()),
            ("dim", self.dim.to_string()),
            ("dt", self.dt.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("flip_c_sign", self.flip_c_sign.to_string()),
            ("kappa", self.kappa.to_string()),
            ("omega0", self.omega0.to_string()),
            ("sweep_axis", self.sweep.axis.name().to_string()),
            ("sweep_levels", self.sweep.levels.to_string()),
            ("sweep_max", self.sweep.max.to_string()),
            ("sweep_min", self.sweep.min.to_string()),
            ("sweep_steps", self.sweep.steps.to_string()),
            ("tmax", self.tmax.to_string()),
        ];
        if let Some(f) = self.format {
            e.push(("format", f.as_str().to_string()));
        }
        if let Some(o) = &self.out {
            e.push(("out", o.display().to_string()));
        }
        if let Some(t) = self.threads {
            e.push(("threads", t.to_string()));
        }
        e.sort_by_key(|(k, _)| *k);
        e
    }

    /// Entries that determine the numbers written; output location, format
    /// and thread count are left out so they cannot change the results.
    pub fn physics_entries(&self) -> Vec<(&'static str, String)> {
        self.entries()
            .into_iter()
            .filter(|(k, _)| !matches!(*k, "out" | "format" | "threads"))
            .collect()
    }

    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
