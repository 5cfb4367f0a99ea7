//! Run configuration.
//!
//! The file is TOML: `[section]` headers followed by `key = value` lines.
//! Every key is optional and unknown keys are rejected. See the README for
//! the full list of sections and defaults.

use crate::background::BackgroundDescriptor;
use crate::conformal::ContractionConvention;
use crate::error::{Error, Result};
use crate::evolution::{EvolutionConfig, MonitorCeilings, Reduction};
use crate::quantum_state::{Params, StateId};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    background: RawBackground,
    state: RawState,
    params: RawParams,
    conventions: RawConventions,
    evolution: RawEvolution,
    monitors: RawMonitors,
    output: RawOutput,
    checks: RawChecks,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawBackground {
    descriptor: String,
}

impl Default for RawBackground {
    fn default() -> Self {
        Self {
            descriptor: "minkowski".into(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawState {
    descriptor: String,
}

impl Default for RawState {
    fn default() -> Self {
        Self {
            descriptor: "vacuum".into(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawParams {
    newton_constant: f64,
    cosmological_constant: f64,
    alpha: f64,
    beta: f64,
    ambiguities: [f64; 4],
    length_scale: f64,
    mass_sq: f64,
    coupling: f64,
}

impl Default for RawParams {
    fn default() -> Self {
        let p = Params::default();
        Self {
            newton_constant: p.newton_constant,
            cosmological_constant: p.cosmological_constant,
            alpha: p.alpha,
            beta: p.beta,
            ambiguities: p.ambiguities,
            length_scale: p.length_scale,
            mass_sq: p.mass_sq,
            coupling: p.coupling,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConventions {
    contraction: String,
}

impl Default for RawConventions {
    fn default() -> Self {
        Self {
            contraction: "folacci".into(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawEvolution {
    initial_data: String,
    reduction: String,
    points: usize,
    extent: f64,
    t_start: f64,
    t_end: f64,
    dt: f64,
    cfl: f64,
    output_stride: usize,
    precision: String,
    perturbation_amplitude: f64,
    perturbation_mode: u32,
    theta2_shift: f64,
}

impl Default for RawEvolution {
    fn default() -> Self {
        let cfg = EvolutionConfig::default();
        Self {
            initial_data: "desitter".into(),
            reduction: "homogeneous".into(),
            points: 1,
            extent: std::f64::consts::TAU,
            t_start: 1.0,
            t_end: cfg.t_end,
            dt: cfg.dt,
            cfl: cfg.cfl,
            output_stride: cfg.output_stride,
            precision: "f64".into(),
            perturbation_amplitude: 0.0,
            perturbation_mode: 1,
            theta2_shift: 0.0,
        }
    }
}

#[derive(Deserialize, Clone, Debug)]
#[serde(untagged)]
enum RawCeiling {
    Value(f64),
    Word(String),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawMonitors {
    delta_ceiling: Option<RawCeiling>,
    f_ceiling: Option<RawCeiling>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawOutput {
    dir: Option<String>,
    checkpoint_stride: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawChecks {
    curvature_samples: usize,
    bank_size: usize,
}

impl Default for RawChecks {
    fn default() -> Self {
        Self {
            curvature_samples: 200,
            bank_size: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialDataKind {
    /// Exact de Sitter at the numerically solved radius, optionally perturbed.
    DeSitter,
    /// `theta = 0` plus the optional perturbation.
    Minkowski,
}

impl InitialDataKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::DeSitter => "desitter",
            Self::Minkowski => "minkowski",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    F64,
    DoubleDouble,
}

impl Precision {
    pub fn label(self) -> &'static str {
        match self {
            Self::F64 => "f64",
            Self::DoubleDouble => "double_double",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionSetup {
    pub initial_data: InitialDataKind,
    pub reduction: Reduction,
    pub points: usize,
    /// Period of the `x^1` direction.
    pub extent: f64,
    pub t_start: f64,
    pub precision: Precision,
    /// `theta_0 += amplitude cos(2 pi mode x / extent)`.
    pub perturbation_amplitude: f64,
    pub perturbation_mode: u32,
    /// Constant shift of `d_t^2 theta` in the initial data.
    pub theta2_shift: f64,
    pub run: EvolutionConfig,
}

impl EvolutionSetup {
    pub fn spacing(&self) -> f64 {
        match self.reduction {
            Reduction::Homogeneous => 1.0,
            Reduction::PlaneSymmetric => self.extent / self.points as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub background: BackgroundDescriptor,
    pub state: StateId,
    pub params: Params,
    pub convention: ContractionConvention,
    pub evolution: EvolutionSetup,
    pub output_dir: Option<PathBuf>,
    /// Write a checkpoint every this many steps; 0 writes only the final state.
    pub checkpoint_stride: usize,
    pub curvature_samples: usize,
    pub bank_size: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::parse("").expect("defaults are valid")
    }
}

/// 1-based line and column of byte `offset`.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Position of `key` inside `[section]`, falling back to the section header
/// and then to the start of the file.
fn locate(text: &str, section: &str, key: &str) -> (usize, usize) {
    let mut current = String::new();
    let mut header = None;
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if let Some(name) = trimmed.strip_prefix('[').and_then(|r| r.split(']').next()) {
            current = name.trim().to_string();
            if current == section {
                header = Some((i + 1, line.len() - trimmed.len() + 1));
            }
            continue;
        }
        if current == section {
            if let Some(rest) = trimmed.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return (i + 1, line.len() - trimmed.len() + 1);
                }
            }
        }
    }
    header.unwrap_or((1, 1))
}

struct Validator<'a> {
    text: &'a str,
}

impl Validator<'_> {
    fn fail<T>(&self, section: &str, key: &str, msg: impl std::fmt::Display) -> Result<T> {
        let (line, column) = locate(self.text, section, key);
        Err(Error::Config {
            line,
            column,
            msg: format!("`{section}.{key}`: {msg}"),
        })
    }

    fn require(&self, ok: bool, section: &str, key: &str, msg: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            self.fail(section, key, msg)
        }
    }

    fn ceiling(&self, raw: &Option<RawCeiling>, key: &str, default: Option<f64>) -> Result<Option<f64>> {
        match raw {
            None => Ok(default),
            Some(RawCeiling::Word(w)) if w == "off" => Ok(None),
            Some(RawCeiling::Word(w)) => self.fail("monitors", key, format!("expected a number or \"off\", found \"{w}\"")),
            Some(RawCeiling::Value(v)) => {
                self.require(*v > 0.0 && v.is_finite(), "monitors", key, "must be a positive number")?;
                Ok(Some(*v))
            }
        }
    }
}

impl RunConfig {
    /// Parse and validate a configuration file's contents.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
            Error::Config {
                line,
                column,
                msg: e.message().trim().to_string(),
            }
        })?;
        let v = Validator { text };

        let background = match BackgroundDescriptor::parse(&raw.background.descriptor) {
            Ok(b) => b,
            Err(e) => return v.fail("background", "descriptor", e),
        };
        let state = match StateId::parse(&raw.state.descriptor) {
            Ok(s) => s,
            Err(e) => return v.fail("state", "descriptor", e),
        };
        let p = &raw.params;
        let params = Params {
            newton_constant: p.newton_constant,
            cosmological_constant: p.cosmological_constant,
            alpha: p.alpha,
            beta: p.beta,
            ambiguities: p.ambiguities,
            length_scale: p.length_scale,
            mass_sq: p.mass_sq,
            coupling: p.coupling,
        };
        if let Err(e) = params.validate() {
            return match e {
                Error::InvalidParameter { key, msg } => v.fail("params", &key, msg),
                other => Err(other),
            };
        }
        let Some(convention) = ContractionConvention::parse(&raw.conventions.contraction) else {
            return v.fail("conventions", "contraction", "expected \"folacci\" or \"literal\"");
        };

        let e = &raw.evolution;
        let initial_data = match e.initial_data.as_str() {
            "desitter" => InitialDataKind::DeSitter,
            "minkowski" => InitialDataKind::Minkowski,
            _ => return v.fail("evolution", "initial_data", "expected \"desitter\" or \"minkowski\""),
        };
        let Some(reduction) = Reduction::parse(&e.reduction) else {
            return v.fail("evolution", "reduction", "expected \"homogeneous\" or \"plane_symmetric\"");
        };
        let precision = match e.precision.as_str() {
            "f64" => Precision::F64,
            "double_double" => Precision::DoubleDouble,
            _ => return v.fail("evolution", "precision", "expected \"f64\" or \"double_double\""),
        };
        match reduction {
            Reduction::Homogeneous => v.require(e.points == 1, "evolution", "points", "homogeneous runs use one point")?,
            Reduction::PlaneSymmetric => v.require(e.points >= 5, "evolution", "points", "need at least 5 points")?,
        }
        v.require(e.extent > 0.0 && e.extent.is_finite(), "evolution", "extent", "must be positive")?;
        v.require(e.dt > 0.0 && e.dt.is_finite(), "evolution", "dt", "must be positive")?;
        v.require(e.cfl > 0.0 && e.cfl <= 0.5, "evolution", "cfl", "must lie in (0, 0.5]")?;
        v.require(e.output_stride >= 1, "evolution", "output_stride", "must be at least 1")?;
        v.require(e.t_start.is_finite(), "evolution", "t_start", "must be finite")?;
        v.require(
            e.t_end.is_finite() && e.t_end != e.t_start,
            "evolution",
            "t_end",
            "must be finite and differ from t_start",
        )?;
        if initial_data == InitialDataKind::DeSitter {
            v.require(e.t_start > 0.0, "evolution", "t_start", "de Sitter data needs conformal time > 0")?;
            v.require(e.t_end > 0.0, "evolution", "t_end", "de Sitter runs need conformal time > 0")?;
        }
        v.require(
            e.perturbation_amplitude.is_finite(),
            "evolution",
            "perturbation_amplitude",
            "must be finite",
        )?;
        v.require(e.theta2_shift.is_finite(), "evolution", "theta2_shift", "must be finite")?;

        // the conformal de Sitter chart is not harmonic, so F is only capped by request
        let f_default = match initial_data {
            InitialDataKind::DeSitter => None,
            InitialDataKind::Minkowski => MonitorCeilings::default().harmonic,
        };
        let ceilings = MonitorCeilings {
            delta: v.ceiling(&raw.monitors.delta_ceiling, "delta_ceiling", MonitorCeilings::default().delta)?,
            harmonic: v.ceiling(&raw.monitors.f_ceiling, "f_ceiling", f_default)?,
        };

        v.require(raw.checks.curvature_samples >= 1, "checks", "curvature_samples", "must be at least 1")?;
        v.require(raw.checks.bank_size >= 1, "checks", "bank_size", "must be at least 1")?;

        Ok(Self {
            background,
            state,
            params,
            convention,
            evolution: EvolutionSetup {
                initial_data,
                reduction,
                points: e.points,
                extent: e.extent,
                t_start: e.t_start,
                precision,
                perturbation_amplitude: e.perturbation_amplitude,
                perturbation_mode: e.perturbation_mode,
                theta2_shift: e.theta2_shift,
                run: EvolutionConfig {
                    t_end: e.t_end,
                    dt: e.dt,
                    cfl: e.cfl,
                    output_stride: e.output_stride,
                    ceilings,
                },
            },
            output_dir: raw.output.dir.as_ref().map(PathBuf::from),
            checkpoint_stride: raw.output.checkpoint_stride,
            curvature_samples: raw.checks.curvature_samples,
            bank_size: raw.checks.bank_size,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        Ok((Self::parse(&text)?, text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_col_counts_from_one() {
        let text = "a = 1\nbb = 2\n";
        assert_eq!(line_col(text, 0), (1, 1));
        assert_eq!(line_col(text, 6), (2, 1));
        assert_eq!(line_col(text, 9), (2, 4));
    }

    #[test]
    fn locate_respects_sections() {
        let text = "[a]\nkey = 1\n[b]\n  key = 2\n";
        assert_eq!(locate(text, "a", "key"), (2, 1));
        assert_eq!(locate(text, "b", "key"), (4, 3));
        assert_eq!(locate(text, "b", "other"), (3, 1));
        assert_eq!(locate(text, "c", "key"), (1, 1));
    }

    #[test]
    fn key_prefix_is_not_a_match() {
        let text = "[params]\nalpha_x = 1\nalpha = 2\n";
        assert_eq!(locate(text, "params", "alpha"), (3, 1));
    }
}
