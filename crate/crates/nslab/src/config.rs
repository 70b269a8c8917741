//! Experiment configuration: JSON-backed, strictly validated, echoed
//! verbatim into every report so a run is reproducible from its artifact.

use crate::error::LabError;
use nslab_core::analysis::sigma_exponents;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Decay,
    LongTime,
    Spacetime,
    Expansion,
    Separation,
    HeatLemma,
    Splitting,
    Oseen,
    Lei,
    TimeHolder,
}

impl Scenario {
    pub const ALL: [Scenario; 10] = [
        Scenario::Decay,
        Scenario::LongTime,
        Scenario::Spacetime,
        Scenario::Expansion,
        Scenario::Separation,
        Scenario::HeatLemma,
        Scenario::Splitting,
        Scenario::Oseen,
        Scenario::Lei,
        Scenario::TimeHolder,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Decay => "decay",
            Scenario::LongTime => "long-time",
            Scenario::Spacetime => "spacetime",
            Scenario::Expansion => "expansion",
            Scenario::Separation => "separation",
            Scenario::HeatLemma => "heat-lemma",
            Scenario::Splitting => "splitting",
            Scenario::Oseen => "oseen",
            Scenario::Lei => "lei",
            Scenario::TimeHolder => "time-holder",
        }
    }

    /// True when the scenario advances the nonlinear solver and therefore
    /// needs a schedule, a time step, and the box-time safety margin.
    pub fn evolves(&self) -> bool {
        !matches!(self, Scenario::HeatLemma | Scenario::Oseen)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self, LabError> {
        Scenario::ALL
            .iter()
            .copied()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
                LabError::Config(format!("unknown scenario '{s}'; expected one of {names:?}"))
            })
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl ScheduleConfig {
    /// Strictly positive output times: log-spaced from `t_min` to `t_max`,
    /// or the linear grid without its origin.
    pub fn positive_times(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Log => {
                let ratio = self.t_max / self.t_min;
                (0..self.count)
                    .map(|j| self.t_min * ratio.powf(j as f64 / (self.count - 1) as f64))
                    .collect()
            }
            Spacing::Linear => (1..self.count)
                .map(|j| self.t_max * j as f64 / (self.count - 1) as f64)
                .collect(),
        }
    }

    /// The same schedule with the initial time prepended, as solvers expect.
    pub fn times_with_origin(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Log => {
                let mut out = vec![0.0];
                out.extend(self.positive_times());
                out
            }
            Spacing::Linear => (0..self.count)
                .map(|j| self.t_max * j as f64 / (self.count - 1) as f64)
                .collect(),
        }
    }

    fn validate(&self) -> Result<(), LabError> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(LabError::Config(format!("schedule t_max = {} must be positive", self.t_max)));
        }
        if self.count < 3 {
            return Err(LabError::Config(format!("schedule count = {} too small", self.count)));
        }
        if self.spacing == Spacing::Log && !(self.t_min > 0.0 && self.t_min < self.t_max) {
            return Err(LabError::Config(format!(
                "log schedule needs 0 < t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumConfig {
    pub kind: crate::datum::DatumKind,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub eps_core: Option<f64>,
    #[serde(default)]
    pub r_env: Option<f64>,
    #[serde(default)]
    pub agreement_radius: Option<f64>,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Falls back to the experiment seed when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_p() -> f64 {
    3.0
}

fn default_amplitude() -> f64 {
    1.0
}

/// Exponent parameters of the measured statements; `p` lives on the datum.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentConfig {
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
}

/// Declared slack overrides; every scenario has pinned defaults and echoes
/// whichever value it actually used.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default)]
    pub exponent_slack: Option<f64>,
    #[serde(default)]
    pub pair_leak: Option<f64>,
    #[serde(default)]
    pub residual_rel: Option<f64>,
    #[serde(default)]
    pub ratio_cap: Option<f64>,
    #[serde(default)]
    pub heat_ratio_slack: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionConfig {
    pub omega_radius: f64,
    #[serde(default)]
    pub support_radius: Option<f64>,
    #[serde(default)]
    pub chi_r_in: Option<f64>,
    #[serde(default)]
    pub chi_r_out: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplittingConfig {
    pub alpha: f64,
    /// Threshold-selection time fed to the optimal threshold formula.
    pub time: f64,
    #[serde(default = "default_calibration_samples")]
    pub calibration_samples: usize,
}

fn default_calibration_samples() -> usize {
    12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OseenConfig {
    pub t_values: Vec<f64>,
    pub points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpConfig {
    pub center: [f64; 3],
    pub r_in: f64,
    pub r_out: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeiConfig {
    pub bumps: Vec<BumpConfig>,
    #[serde(default)]
    pub include_constant: bool,
    /// Temporal ramp of the test function: (switch-on start, fully on).
    pub ramp: (f64, f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeProbeConfig {
    pub points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub grid: GridConfig,
    pub datum: DatumConfig,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default)]
    pub fit_window: Option<(f64, f64)>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub exponents: ExponentConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub expansion: Option<ExpansionConfig>,
    #[serde(default)]
    pub splitting: Option<SplittingConfig>,
    #[serde(default)]
    pub oseen: Option<OseenConfig>,
    #[serde(default)]
    pub lei: Option<LeiConfig>,
    #[serde(default)]
    pub time_probe: Option<TimeProbeConfig>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn schedule(&self) -> Result<&ScheduleConfig, LabError> {
        self.schedule
            .as_ref()
            .ok_or_else(|| LabError::Config(format!("scenario {} needs a schedule", self.scenario)))
    }

    pub fn fit_window(&self) -> Result<(f64, f64), LabError> {
        self.fit_window
            .ok_or_else(|| LabError::Config(format!("scenario {} needs a fit window", self.scenario)))
    }

    pub fn dt(&self) -> Result<f64, LabError> {
        self.dt
            .ok_or_else(|| LabError::Config(format!("scenario {} needs an explicit dt", self.scenario)))
    }

    pub fn datum_seed(&self) -> u64 {
        self.datum.seed.unwrap_or(self.seed)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.grid.n < 8 {
            return Err(LabError::Config(format!("grid n = {} too coarse", self.grid.n)));
        }
        if !(self.grid.length.is_finite() && self.grid.length > 0.0) {
            return Err(LabError::Config(format!("grid length = {}", self.grid.length)));
        }
        if let Some(s) = &self.schedule {
            s.validate()?;
            // heat estimates degrade once sqrt(t) reaches the box scale
            if s.t_max.sqrt() > self.grid.length / 8.0 {
                return Err(LabError::Config(format!(
                    "sqrt(t_max) = {:.3} exceeds L/8 = {:.3}",
                    s.t_max.sqrt(),
                    self.grid.length / 8.0
                )));
            }
            if let Some((lo, hi)) = self.fit_window {
                if !(lo > 0.0 && lo < hi) {
                    return Err(LabError::Config(format!("fit window [{lo}, {hi}] is not ordered")));
                }
                let t_lo = match s.spacing {
                    Spacing::Log => s.t_min,
                    Spacing::Linear => 0.0,
                };
                if lo < t_lo || hi > s.t_max {
                    return Err(LabError::Config(format!(
                        "fit window [{lo}, {hi}] outside schedule [{t_lo}, {}]",
                        s.t_max
                    )));
                }
            }
        } else if self.fit_window.is_some() {
            return Err(LabError::Config("fit window given without a schedule".into()));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(LabError::Config(format!("dt = {dt} must be positive")));
            }
        }
        if let Some(d) = self.exponents.delta {
            let sigma = sigma_exponents(self.datum.p)
                .map_err(|e| LabError::Config(format!("datum p = {}: {e}", self.datum.p)))?
                .sigma;
            if !(d > 0.0 && d < sigma) {
                return Err(LabError::Config(format!(
                    "delta = {d} outside (0, sigma = {sigma:.4})"
                )));
            }
        }
        if let Some(sp) = &self.splitting {
            if !(sp.alpha > 3.0 && sp.alpha <= 4.0) {
                return Err(LabError::Config(format!("alpha = {} outside (3, 4]", sp.alpha)));
            }
            if !(sp.time > 0.0) {
                return Err(LabError::Config("splitting time must be positive".into()));
            }
        }
        if let Some(e) = &self.expansion {
            if !(e.omega_radius > 0.0 && e.omega_radius < self.grid.length / 2.0) {
                return Err(LabError::Config(format!(
                    "omega radius {} outside (0, L/2)",
                    e.omega_radius
                )));
            }
        }
        Ok(())
    }
}
