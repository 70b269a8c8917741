//! Report assembly and emission. Serialization is deterministic: struct
//! field order is fixed, series values print with full round-trip precision,
//! and wall-clock time never enters the artifact.

use crate::config::ExperimentConfig;
use crate::error::LabError;
use nslab_core::analysis::RateFit;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleStatus {
    Pass,
    Fail,
    /// The configured input produced a trivial series; nothing to assert.
    Degenerate,
    /// Measured and reported, deliberately without a pass/fail claim.
    Diagnostic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule: String,
    pub status: RuleStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl RuleOutcome {
    pub fn new(rule: impl Into<String>, status: RuleStatus) -> Self {
        RuleOutcome {
            rule: rule.into(),
            status,
            measured: None,
            target: None,
            tolerance: None,
            window: None,
            note: None,
        }
    }

    pub fn measured(mut self, v: f64) -> Self {
        self.measured = Some(v);
        self
    }

    pub fn target(mut self, v: f64) -> Self {
        self.target = Some(v);
        self
    }

    pub fn tolerance(mut self, v: f64) -> Self {
        self.tolerance = Some(v);
        self
    }

    pub fn window(mut self, w: (f64, f64)) -> Self {
        self.window = Some(w);
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.note = Some(n.into());
        self
    }
}

/// A rate fit annotated with the statement it was measured against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub window: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl NamedFit {
    pub fn from_fit(name: impl Into<String>, fit: &RateFit) -> Self {
        NamedFit {
            name: name.into(),
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            n_points: fit.n_points,
            window: fit.window,
            target: None,
            tolerance: None,
        }
    }

    pub fn against(mut self, target: f64, tolerance: f64) -> Self {
        self.target = Some(target);
        self.tolerance = Some(tolerance);
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(times.len(), values.len(), "series arrays must align");
        Series { name: name.into(), times, values }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t:.16e},{v:.16e}\n"));
        }
        out
    }

    /// Parses the exact format `to_csv` writes; lossless at 17 significant
    /// digits.
    pub fn from_csv(name: &str, text: &str) -> Result<Series, LabError> {
        let mut lines = text.lines();
        match lines.next() {
            Some("t,value") => {}
            other => {
                return Err(LabError::Config(format!(
                    "series csv header {:?} (expected \"t,value\")",
                    other
                )))
            }
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (ln, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| LabError::Config(format!("csv line {}: no comma", ln + 2)))?;
            let t: f64 = a
                .parse()
                .map_err(|e| LabError::Config(format!("csv line {}: {e}", ln + 2)))?;
            let v: f64 = b
                .parse()
                .map_err(|e| LabError::Config(format!("csv line {}: {e}", ln + 2)))?;
            times.push(t);
            values.push(v);
        }
        Ok(Series { name: name.to_string(), times, values })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Versions {
    pub nslab: String,
    pub nslab_core: String,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            nslab: env!("CARGO_PKG_VERSION").to_string(),
            nslab_core: nslab_core::VERSION.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: crate::config::Scenario,
    pub config: ExperimentConfig,
    pub fits: Vec<NamedFit>,
    pub quantities: Vec<NamedValue>,
    pub rules: Vec<RuleOutcome>,
    pub series: Vec<Series>,
    pub versions: Versions,
    /// Informational only; deliberately kept out of the serialized artifact
    /// so reruns are byte-identical.
    #[serde(skip)]
    pub wall_clock_seconds: Option<f64>,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Report {
            scenario: config.scenario,
            config: config.clone(),
            fits: Vec::new(),
            quantities: Vec::new(),
            rules: Vec::new(),
            series: Vec::new(),
            versions: Versions::default(),
            wall_clock_seconds: None,
        }
    }

    pub fn quantity(&mut self, name: impl Into<String>, value: f64) {
        self.quantities.push(NamedValue { name: name.into(), value });
    }

    pub fn passed(&self) -> bool {
        self.rules.iter().all(|r| r.status != RuleStatus::Fail)
    }

    pub fn to_json_bytes(&self) -> Result<Vec<u8>, LabError> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }
}

/// Writes `report.json` plus one `series_<name>.csv` per series; returns the
/// paths written.
pub fn write_report(report: &Report, out_dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    fs::create_dir_all(out_dir).map_err(|e| LabError::io(out_dir.display().to_string(), e))?;
    let mut written = Vec::new();
    let json_path = out_dir.join("report.json");
    fs::write(&json_path, report.to_json_bytes()?)
        .map_err(|e| LabError::io(json_path.display().to_string(), e))?;
    written.push(json_path);
    for series in &report.series {
        let path = out_dir.join(format!("series_{}.csv", series.name));
        fs::write(&path, series.to_csv()).map_err(|e| LabError::io(path.display().to_string(), e))?;
        written.push(path);
    }
    Ok(written)
}
