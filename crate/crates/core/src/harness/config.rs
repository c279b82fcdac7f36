use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::lagrangian::DistanceKind;
use crate::problems::{custom, get_example, ProblemSpec};
use crate::quadrature::QuadOptions;
use crate::reparam::Anchor;

use super::HarnessError;

/// Either a registry example name or a parametric problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemRef {
    Named(String),
    Custom(CustomProblem),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblem {
    pub custom: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ProblemRef {
    pub fn resolve(&self) -> crate::Result<ProblemSpec> {
        match self {
            ProblemRef::Named(name) => get_example(name),
            ProblemRef::Custom(c) => custom(&c.custom, &c.params),
        }
    }
}

/// `ν_k = start · factor^k` for `k = 0, …, steps − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuSchedule {
    pub start: f64,
    pub factor: f64,
    pub steps: u32,
}

impl NuSchedule {
    pub fn values(&self) -> Vec<f64> {
        (0..self.steps as i32).map(|k| self.start * self.factor.powi(k)).collect()
    }
}

fn default_dist() -> DistanceKind {
    DistanceKind::UDistance
}

fn default_p() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default = "default_dist")]
    pub dist_kind: DistanceKind,
    /// Exponent of the reported Sobolev distance.
    #[serde(default = "default_p")]
    pub p: f64,
}

impl Default for TuningConfig {
    fn default() -> Self {
        TuningConfig {
            mu: None,
            lambda_bar: None,
            rho: None,
            dist_kind: default_dist(),
            p: default_p(),
        }
    }
}

fn default_probes() -> usize {
    crate::probes::DEFAULT_PROBE_COUNT
}

fn default_nu0() -> f64 {
    1.0
}

fn default_r_levels() -> Vec<f64> {
    vec![1.0, 10.0, 100.0]
}

/// Knobs of the hypothesis checkers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default = "default_probes")]
    pub probes: usize,
    /// Radius of the velocity ball for the weak boundedness check.
    #[serde(default = "default_nu0")]
    pub nu0: f64,
    /// Levels `r` at which the limit condition reports its margin.
    #[serde(default = "default_r_levels")]
    pub r_levels: Vec<f64>,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        ChecksConfig {
            probes: default_probes(),
            nu0: default_nu0(),
            r_levels: default_r_levels(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_path: Option<PathBuf>,
    /// Columnar `(ν, s, y_ν(s))` samples for plotting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemRef,
    pub anchor: Anchor,
    pub nu_schedule: NuSchedule,
    #[serde(default)]
    pub tuning: TuningConfig,
    #[serde(default)]
    pub quad: QuadOptions,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

fn invalid(path: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn positive(path: &str, x: f64) -> Result<(), HarnessError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be positive and finite, got {x}")))
    }
}

/// Parses and validates a JSON config, filling defaults. Errors name the
/// path of the offending key.
pub fn parse_config(text: &str) -> Result<RunConfig, HarnessError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        invalid(&path, err.into_inner().to_string())
    })?;
    de.end().map_err(|err| invalid(".", err.to_string()))?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let s = &self.nu_schedule;
        positive("nu_schedule.start", s.start)?;
        if !(s.factor > 1.0 && s.factor.is_finite()) {
            return Err(invalid("nu_schedule.factor", format!("factor>1 required, got {}", s.factor)));
        }
        if s.steps < 1 {
            return Err(invalid("nu_schedule.steps", "steps>=1 required"));
        }
        if !self.nu_schedule.values().iter().all(|nu| nu.is_finite()) {
            return Err(invalid("nu_schedule", "schedule overflows"));
        }
        positive("quad.tol", self.quad.tol)?;
        if self.quad.max_depth < 1 {
            return Err(invalid("quad.max_depth", "max_depth>=1 required"));
        }
        let t = &self.tuning;
        if let Some(mu) = t.mu {
            if !(mu > 0.0 && mu < 1.0) {
                return Err(invalid("tuning.mu", format!("mu must lie in (0, 1), got {mu}")));
            }
        }
        if let Some(lambda) = t.lambda_bar {
            positive("tuning.lambda_bar", lambda)?;
        }
        if let Some(rho) = t.rho {
            positive("tuning.rho", rho)?;
        }
        if !(t.p >= 1.0 && t.p.is_finite()) {
            return Err(invalid("tuning.p", format!("p>=1 required, got {}", t.p)));
        }
        if self.checks.probes < 1 {
            return Err(invalid("checks.probes", "probes>=1 required"));
        }
        positive("checks.nu0", self.checks.nu0)?;
        if self.checks.r_levels.is_empty() {
            return Err(invalid("checks.r_levels", "at least one level required"));
        }
        for r in &self.checks.r_levels {
            positive("checks.r_levels", *r)?;
        }
        let spec = self.problem.resolve().map_err(|err| invalid("problem", err.to_string()))?;
        if self.anchor == Anchor::Both && t.lambda_bar.is_none() && spec.default_lambda.is_none() {
            return Err(invalid(
                "tuning.lambda_bar",
                format!("anchor `both` needs lambda_bar: `{}` has no default", spec.name),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
