//! Run configuration.
//!
//! Precedence, highest first: command-line flags, the `HIDDEN_ANGLE_HBAR`
//! environment variable (ħ only), an optional `key = value` config file,
//! built-in defaults.

use std::fs;
use std::path::Path;

use hidden_angle_core::landau_peierls::DEFAULT_DELTA;
use hidden_angle_core::{HBar, QuadratureConfig, QuadratureRule};

use crate::error::{AppError, Result};
use crate::events::UnitScale;

pub const HBAR_ENV: &str = "HIDDEN_ANGLE_HBAR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RuleArg {
    GaussHermite,
    GaussLegendre,
    AdaptiveSimpson,
}

impl From<RuleArg> for QuadratureRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::GaussHermite => QuadratureRule::GaussHermite,
            RuleArg::GaussLegendre => QuadratureRule::GaussLegendre,
            RuleArg::AdaptiveSimpson => QuadratureRule::AdaptiveSimpson,
        }
    }
}

/// One configuration layer; `None` defers to the layer below.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub hbar: Option<f64>,
    pub delta: Option<f64>,
    pub points: Option<usize>,
    pub rel_tol: Option<f64>,
    pub rule: Option<RuleArg>,
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
    pub energy_scale: Option<f64>,
    pub momentum_scale: Option<f64>,
}

impl Settings {
    /// Fields set in `self` win over `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        Settings {
            hbar: self.hbar.or(lower.hbar),
            delta: self.delta.or(lower.delta),
            points: self.points.or(lower.points),
            rel_tol: self.rel_tol.or(lower.rel_tol),
            rule: self.rule.or(lower.rule),
            seed: self.seed.or(lower.seed),
            format: self.format.or(lower.format),
            energy_scale: self.energy_scale.or(lower.energy_scale),
            momentum_scale: self.momentum_scale.or(lower.momentum_scale),
        }
    }

    /// Parses a `key = value` file; `#` starts a comment line.
    pub fn parse_file(text: &str) -> Result<Settings> {
        use clap::ValueEnum;
        let mut s = Settings::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                AppError::invalid(format!("config line {line}: expected key = value"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad =
                || AppError::invalid(format!("config line {line}: bad value {value:?} for {key}"));
            let num = || value.parse::<f64>().map_err(|_| bad());
            match key {
                "hbar" => s.hbar = Some(num()?),
                "delta" => s.delta = Some(num()?),
                "rel_tol" => s.rel_tol = Some(num()?),
                "energy_scale" => s.energy_scale = Some(num()?),
                "momentum_scale" => s.momentum_scale = Some(num()?),
                "points" => s.points = Some(value.parse().map_err(|_| bad())?),
                "seed" => s.seed = Some(value.parse().map_err(|_| bad())?),
                "rule" => s.rule = Some(RuleArg::from_str(value, true).map_err(|_| bad())?),
                "format" => {
                    s.format = Some(OutputFormat::from_str(value, true).map_err(|_| bad())?)
                }
                other => {
                    return Err(AppError::invalid(format!(
                        "config line {line}: unknown key {other:?}"
                    )))
                }
            }
        }
        Ok(s)
    }

    pub fn load_file(path: &Path) -> Result<Settings> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse_file(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub hbar: HBar,
    pub quadrature: QuadratureConfig,
    pub delta: f64,
    /// `None` lets each subcommand pick its own default.
    pub output_format: Option<OutputFormat>,
    pub seed: u64,
    pub units: UnitScale,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            hbar: HBar::NATURAL,
            quadrature: QuadratureConfig::default(),
            delta: DEFAULT_DELTA,
            output_format: None,
            seed: 0,
            units: UnitScale::default(),
        }
    }
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<RunConfig> {
        let d = RunConfig::default();
        let hbar = match s.hbar {
            Some(h) => HBar::new(h)?,
            None => d.hbar,
        };
        let quadrature = QuadratureConfig {
            rule: s.rule.map(Into::into),
            points: s.points.unwrap_or(d.quadrature.points),
            rel_tol: s.rel_tol.unwrap_or(d.quadrature.rel_tol),
        };
        quadrature.validate()?;
        let delta = s.delta.unwrap_or(d.delta);
        if !(delta.is_finite() && delta > 0.0) {
            return Err(AppError::invalid(format!(
                "delta must be positive, got {delta}"
            )));
        }
        let units = UnitScale {
            energy: s.energy_scale.unwrap_or(1.0),
            momentum: s.momentum_scale.unwrap_or(1.0),
        };
        if !(units.energy.is_finite()
            && units.energy > 0.0
            && units.momentum.is_finite()
            && units.momentum > 0.0)
        {
            return Err(AppError::invalid("unit scales must be positive"));
        }
        Ok(RunConfig {
            hbar,
            quadrature,
            delta,
            output_format: s.format,
            seed: s.seed.unwrap_or(d.seed),
            units,
        })
    }

    pub fn format_or(&self, default: OutputFormat) -> OutputFormat {
        self.output_format.unwrap_or(default)
    }
}
