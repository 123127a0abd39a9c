//! Run configuration files.
//!
//! The syntax is a flat section/key-value format:
//!
//! ```text
//! # comment
//! [model]
//! alpha = 1
//! beta = 1
//! gamma = 10
//! phi = sum            # sum | max
//! g = identity         # identity | tanh | signum
//! lengths = 1, 2, 3, 4
//!
//! [run]
//! initial = 0.1, 0.2, 0.3, 0.4
//! dt = 0.02
//! steps = 2000
//! scheme = euler       # euler | rk4
//!
//! [outputs]
//! csv = traj.csv
//! svg = traj.svg
//! report = report.txt
//!
//! [analysis]
//! fit_window = 200, 392
//! theta = 0.05
//! vanish = 1e-4
//! limit_tol = 1e-2
//! ```
//!
//! Required keys are `model.alpha`, `model.beta`, `model.lengths` and
//! `run.initial`. Parsing collects every error rather than stopping at the
//! first one.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::integrate::{Scheme, Settings};
use crate::models::{Activation, ModelSpec, PathSystem, Saturation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based source line, when the error is tied to one.
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn global(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBlock {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phi: Saturation,
    pub g: Activation,
    /// User order.
    pub lengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputBlock {
    pub csv: Option<String>,
    pub svg: Option<String>,
    pub report: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisBlock {
    /// Gain-scaled time window for rate fits.
    pub fit_window: Option<(f64, f64)>,
    pub theta: f64,
    pub vanish: f64,
    pub limit_tol: f64,
}

impl Default for AnalysisBlock {
    fn default() -> Self {
        Self {
            fit_window: None,
            theta: crate::analysis::DEFAULT_THETA,
            vanish: 1e-4,
            limit_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelBlock,
    /// User order, same length as `model.lengths`.
    pub initial: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    pub scheme: Scheme,
    pub outputs: OutputBlock,
    pub analysis: AnalysisBlock,
}

pub const DEFAULT_DT: f64 = 0.02;
pub const DEFAULT_STEPS: usize = 2000;

impl RunConfig {
    /// The model and the initial state in canonical path order.
    pub fn build(&self) -> Result<(ModelSpec, Vec<f64>)> {
        let paths = PathSystem::from_lengths(&self.model.lengths)?;
        let x0 = paths.to_canonical(&self.initial);
        let model = ModelSpec::new(self.model.alpha, self.model.beta, self.model.gamma, paths)?
            .with_saturation(self.model.phi)
            .with_activation(self.model.g);
        Ok((model, x0))
    }

    pub fn settings(&self) -> Settings {
        Settings {
            dt: self.dt,
            steps: self.steps,
            scheme: self.scheme,
            policy: Default::default(),
        }
    }

    /// Serializes to the configuration syntax; `parse_config(&c.render())`
    /// reproduces `c`.
    pub fn render(&self) -> String {
        let m = &self.model;
        let mut out = String::new();
        out.push_str("[model]\n");
        out.push_str(&format!("alpha = {:?}\n", m.alpha));
        out.push_str(&format!("beta = {:?}\n", m.beta));
        out.push_str(&format!("gamma = {:?}\n", m.gamma));
        out.push_str(&format!("phi = {}\n", m.phi));
        out.push_str(&format!("g = {}\n", m.g));
        out.push_str(&format!("lengths = {}\n", join(&m.lengths)));
        out.push_str("\n[run]\n");
        out.push_str(&format!("initial = {}\n", join(&self.initial)));
        out.push_str(&format!("dt = {:?}\n", self.dt));
        out.push_str(&format!("steps = {}\n", self.steps));
        out.push_str(&format!("scheme = {}\n", self.scheme));
        let o = &self.outputs;
        if o.csv.is_some() || o.svg.is_some() || o.report.is_some() {
            out.push_str("\n[outputs]\n");
            for (key, value) in [("csv", &o.csv), ("svg", &o.svg), ("report", &o.report)] {
                if let Some(v) = value {
                    out.push_str(&format!("{key} = {v}\n"));
                }
            }
        }
        let a = &self.analysis;
        out.push_str("\n[analysis]\n");
        if let Some((lo, hi)) = a.fit_window {
            out.push_str(&format!("fit_window = {lo:?}, {hi:?}\n"));
        }
        out.push_str(&format!("theta = {:?}\n", a.theta));
        out.push_str(&format!("vanish = {:?}\n", a.vanish));
        out.push_str(&format!("limit_tol = {:?}\n", a.limit_tol));
        out
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")
}

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("model", &["alpha", "beta", "gamma", "phi", "g", "lengths"]),
    ("run", &["initial", "dt", "steps", "scheme"]),
    ("outputs", &["csv", "svg", "report"]),
    ("analysis", &["fit_window", "theta", "vanish", "limit_tol"]),
];

/// Parses and validates a configuration, reporting every error found.
pub fn parse_config(text: &str) -> std::result::Result<RunConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let mut entries: BTreeMap<(String, String), (usize, String)> = BTreeMap::new();
    let mut section: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            match rest.strip_suffix(']') {
                Some(name) => {
                    let name = name.trim();
                    if KNOWN_KEYS.iter().any(|(s, _)| *s == name) {
                        section = Some(name.to_string());
                    } else {
                        errors.push(ConfigError::at(line_no, format!("unknown section [{name}]")));
                        section = None;
                    }
                }
                None => errors.push(ConfigError::at(line_no, "unterminated section header")),
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(ConfigError::at(line_no, format!("expected `key = value`, found `{line}`")));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = section.as_deref() else {
            errors.push(ConfigError::at(line_no, format!("key `{key}` outside of a known section")));
            continue;
        };
        let allowed = KNOWN_KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            errors.push(ConfigError::at(line_no, format!("unknown key `{sec}.{key}`")));
            continue;
        }
        let slot = (sec.to_string(), key.to_string());
        if let Some((first, _)) = entries.get(&slot) {
            errors.push(ConfigError::at(
                line_no,
                format!("duplicate key `{sec}.{key}` (first set on line {first})"),
            ));
            continue;
        }
        entries.insert(slot, (line_no, value.to_string()));
    }

    let mut reader = Reader {
        entries: &entries,
        errors: &mut errors,
    };
    let alpha = reader.positive("model", "alpha", None);
    let beta = reader.positive("model", "beta", None);
    let gamma = reader.positive("model", "gamma", Some(1.0));
    let phi = reader.parsed("model", "phi", Saturation::Sum);
    let g = reader.parsed("model", "g", Activation::Identity);
    let lengths = reader.list("model", "lengths", true);
    let initial = reader.list("run", "initial", true);
    let dt = reader.positive("run", "dt", Some(DEFAULT_DT));
    let steps = reader.parsed("run", "steps", DEFAULT_STEPS);
    let scheme = reader.parsed("run", "scheme", Scheme::Euler);
    let outputs = OutputBlock {
        csv: reader.text("outputs", "csv"),
        svg: reader.text("outputs", "svg"),
        report: reader.text("outputs", "report"),
    };
    let fit_window = reader.window("analysis", "fit_window");
    let defaults = AnalysisBlock::default();
    let theta = reader.positive("analysis", "theta", Some(defaults.theta));
    let vanish = reader.positive("analysis", "vanish", Some(defaults.vanish));
    let limit_tol = reader.positive("analysis", "limit_tol", Some(defaults.limit_tol));

    if let (Some(l), Some(i)) = (&lengths, &initial) {
        if l.len() != i.len() {
            errors.push(ConfigError::global(format!(
                "length mismatch: {} lengths but {} initial values",
                l.len(),
                i.len()
            )));
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(RunConfig {
        model: ModelBlock {
            alpha: alpha.expect("checked"),
            beta: beta.expect("checked"),
            gamma: gamma.expect("checked"),
            phi,
            g,
            lengths: lengths.expect("checked"),
        },
        initial: initial.expect("checked"),
        dt: dt.expect("checked"),
        steps,
        scheme,
        outputs,
        analysis: AnalysisBlock {
            fit_window,
            theta: theta.expect("checked"),
            vanish: vanish.expect("checked"),
            limit_tol: limit_tol.expect("checked"),
        },
    })
}

/// [`parse_config`] with the errors wrapped into [`Error::Config`].
pub fn load_config(text: &str) -> Result<RunConfig> {
    parse_config(text).map_err(Error::Config)
}

struct Reader<'a> {
    entries: &'a BTreeMap<(String, String), (usize, String)>,
    errors: &'a mut Vec<ConfigError>,
}

impl Reader<'_> {
    fn get(&self, sec: &str, key: &str) -> Option<&(usize, String)> {
        self.entries.get(&(sec.to_string(), key.to_string()))
    }

    fn missing(&mut self, sec: &str, key: &str) {
        self.errors
            .push(ConfigError::global(format!("missing required key `{sec}.{key}`")));
    }

    fn positive(&mut self, sec: &str, key: &str, default: Option<f64>) -> Option<f64> {
        let Some((line, raw)) = self.get(sec, key).cloned() else {
            if default.is_none() {
                self.missing(sec, key);
            }
            return default;
        };
        match raw.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Some(v),
            Ok(v) => {
                self.errors.push(ConfigError::at(
                    line,
                    format!("`{sec}.{key}` must be positive and finite, got {v}"),
                ));
                None
            }
            Err(_) => {
                self.errors
                    .push(ConfigError::at(line, format!("`{sec}.{key}`: `{raw}` is not a number")));
                None
            }
        }
    }

    fn parsed<T: FromStr>(&mut self, sec: &str, key: &str, default: T) -> T
    where
        T::Err: fmt::Display,
    {
        let Some((line, raw)) = self.get(sec, key).cloned() else {
            return default;
        };
        match raw.parse::<T>() {
            Ok(v) => v,
            Err(e) => {
                self.errors.push(ConfigError::at(line, format!("`{sec}.{key}`: {e}")));
                default
            }
        }
    }

    fn text(&mut self, sec: &str, key: &str) -> Option<String> {
        let (line, raw) = self.get(sec, key).cloned()?;
        if raw.is_empty() {
            self.errors.push(ConfigError::at(line, format!("`{sec}.{key}` is empty")));
            return None;
        }
        Some(raw)
    }

    fn list(&mut self, sec: &str, key: &str, positive: bool) -> Option<Vec<f64>> {
        let Some((line, raw)) = self.get(sec, key).cloned() else {
            self.missing(sec, key);
            return None;
        };
        let mut values = Vec::new();
        let mut ok = true;
        for (k, item) in raw.split(',').map(str::trim).enumerate() {
            match item.parse::<f64>() {
                Ok(v) if !positive || (v > 0.0 && v.is_finite()) => values.push(v),
                Ok(v) => {
                    ok = false;
                    self.errors.push(ConfigError::at(
                        line,
                        format!("`{sec}.{key}` entry {} must be positive, got {v}", k + 1),
                    ));
                }
                Err(_) => {
                    ok = false;
                    self.errors.push(ConfigError::at(
                        line,
                        format!("`{sec}.{key}` entry {}: `{item}` is not a number", k + 1),
                    ));
                }
            }
        }
        if ok && values.is_empty() {
            self.errors.push(ConfigError::at(line, format!("`{sec}.{key}` is empty")));
            return None;
        }
        ok.then_some(values)
    }

    fn window(&mut self, sec: &str, key: &str) -> Option<(f64, f64)> {
        let (line, raw) = self.get(sec, key).cloned()?;
        let parts: Vec<std::result::Result<f64, _>> = raw.split(',').map(|p| p.trim().parse::<f64>()).collect();
        match parts.as_slice() {
            [Ok(lo), Ok(hi)] if lo >= &0.0 && lo < hi => Some((*lo, *hi)),
            _ => {
                self.errors.push(ConfigError::at(
                    line,
                    format!("`{sec}.{key}` must be two numbers `lo, hi` with 0 <= lo < hi"),
                ));
                None
            }
        }
    }
}
