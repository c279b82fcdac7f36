use crate::energy::{convergence_study, ConvergenceReport, StudyOptions};
use crate::hypotheses::{check_all, required_for, CheckSettings, Hypothesis, HypothesisReport};
use crate::lagrangian::DistanceOptions;
use crate::probes::Verdict;
use crate::problems::ProblemSpec;
use crate::reparam::{Anchor, Tuning};
use crate::trajectory::Target;

use super::{HarnessError, RunConfig};

/// Well-inside margin for the boundedness check when the config sets none.
const DEFAULT_CHECK_RHO: f64 = 1.0 / 16.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimVerdicts {
    pub claim: Anchor,
    pub required: Vec<Hypothesis>,
    pub reports: Vec<HypothesisReport>,
}

impl ClaimVerdicts {
    pub fn is_required(&self, name: Hypothesis) -> bool {
        self.required.contains(&name)
    }

    pub fn falsified_required(&self) -> Vec<Hypothesis> {
        self.reports
            .iter()
            .filter(|r| r.verdict == Verdict::Falsified && self.is_required(r.name))
            .map(|r| r.name)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFile {
    pub config: RunConfig,
    pub version: &'static str,
    pub verdicts: ClaimVerdicts,
    pub report: ConvergenceReport,
}

/// `λ` used by the checkers: the configured one, the problem's default, or
/// one safely above `‖y'‖₁/(T−t)` for single-endpoint runs.
fn check_lambda(config: &RunConfig, spec: &ProblemSpec) -> crate::Result<f64> {
    if let Some(lambda) = config.tuning.lambda_bar.or(spec.default_lambda) {
        return Ok(lambda);
    }
    let traj = &spec.trajectory;
    let l1 = traj.lp_norm(1.0, Target::Derivative, &config.quad)?;
    Ok(2.0 * l1 / traj.interval().length() + 1.0)
}

pub fn check_settings(config: &RunConfig, spec: &ProblemSpec) -> crate::Result<CheckSettings> {
    Ok(CheckSettings {
        consts: spec.consts,
        nu0: config.checks.nu0,
        lambda: check_lambda(config, spec)?,
        rho: config.tuning.rho.unwrap_or(DEFAULT_CHECK_RHO),
        dist: config.tuning.dist_kind,
        dist_opts: DistanceOptions::default(),
        quad: config.quad,
        r_levels: config.checks.r_levels.clone(),
        probe_count: config.checks.probes,
        seed: config.seed,
    })
}

pub fn study_tuning(config: &RunConfig, spec: &ProblemSpec) -> Tuning {
    let t = &config.tuning;
    let lambda_bar = match config.anchor {
        Anchor::Both => t.lambda_bar.or(spec.default_lambda),
        _ => t.lambda_bar,
    };
    Tuning {
        mu: t.mu,
        lambda_bar,
        rho: t.rho,
        dist: t.dist_kind,
        quad: config.quad,
        seed: config.seed,
        ..Tuning::default()
    }
}

fn resolve(config: &RunConfig) -> Result<ProblemSpec, HarnessError> {
    config.problem.resolve().map_err(|err| HarnessError::Config {
        path: "problem".into(),
        message: err.to_string(),
    })
}

pub fn run_checks(config: &RunConfig) -> Result<ClaimVerdicts, HarnessError> {
    let spec = resolve(config)?;
    checks_for(config, &spec)
}

fn checks_for(config: &RunConfig, spec: &ProblemSpec) -> Result<ClaimVerdicts, HarnessError> {
    let settings = check_settings(config, spec)?;
    let reports = check_all(&spec.lagrangian, &spec.trajectory, &settings)?;
    Ok(ClaimVerdicts {
        claim: config.anchor,
        required: required_for(config.anchor, spec.lagrangian.is_real_valued()),
        reports,
    })
}

/// Runs the checkers, then the convergence study.
pub fn run(config: &RunConfig) -> Result<ReportFile, HarnessError> {
    config.validate()?;
    let spec = resolve(config)?;
    let verdicts = checks_for(config, &spec)?;
    let tuning = study_tuning(config, &spec);
    let opts = StudyOptions {
        consts: spec.consts,
        extremes: spec.analytic.as_ref().and_then(|a| a.extremes.clone()),
        p: config.tuning.p,
        budget_probes: config.checks.probes,
    };
    let report = convergence_study(
        &spec.lagrangian,
        &spec.trajectory,
        config.anchor,
        &config.nu_schedule.values(),
        &tuning,
        &opts,
    )?;
    Ok(ReportFile {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION"),
        verdicts,
        report,
    })
}
