//! Extended-valued energies, Sobolev distances, the error budget of the
//! reparametrization and the convergence study over a ν schedule.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypotheses::ConditionSConstants;
use crate::lagrangian::{ext_mul, Lagrangian, DEFAULT_SUBGRADIENT_STEP};
use crate::probes::{ProbeConfig, ProbeSet};
use crate::quadrature::{integrate, QuadOptions};
use crate::reparam::{make_plan, reparametrize_at, lipschitz_rank, Anchor, ReparamPlan, Tuning};
use crate::trajectory::{norm, Target, Trajectory};

/// Points at which every row samples `y_ν`.
pub const ROW_SAMPLES: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyValue {
    pub value: f64,
    pub divergent: bool,
    pub depth: u32,
    pub infinite_cell: Option<(f64, f64)>,
}

impl EnergyValue {
    pub fn is_finite(&self) -> bool {
        !self.divergent && self.value.is_finite()
    }
}

/// `F(y) = ∫ Λ(s, y, y') Ψ(s, y) ds`, `+∞` when the quadrature diverges.
pub fn energy(lag: &Lagrangian, traj: &Trajectory, quad: &QuadOptions) -> Result<EnergyValue> {
    let q = traj.integrate(
        |s| {
            let z = traj.value(s);
            let v = traj.deriv(s);
            lag.density(s, &z, &v)
        },
        quad,
    );
    if q.invalid {
        return Err(Error::Numeric("energy density produced NaN".into()));
    }
    let divergent = q.divergent || !q.value.is_finite();
    Ok(EnergyValue {
        value: if divergent { f64::INFINITY } else { q.value },
        divergent,
        depth: q.depth,
        infinite_cell: q.infinite_cell,
    })
}

/// `F(y_ν) − F(y)` in extended arithmetic: `+∞` when only `F(y_ν)`
/// diverges, `−∞` when `F(y)` does.
pub fn gap(f_nu: &EnergyValue, f_y: &EnergyValue) -> f64 {
    match (f_nu.is_finite(), f_y.is_finite()) {
        (true, true) => f_nu.value - f_y.value,
        (false, true) => f64::INFINITY,
        (_, false) => f64::NEG_INFINITY,
    }
}

fn same_shape(a: &Trajectory, b: &Trajectory) -> Result<Vec<f64>> {
    if a.interval() != b.interval() || a.dim() != b.dim() {
        return Err(Error::Precondition("trajectories differ in interval or dimension".into()));
    }
    let mut cuts = a.cuts();
    cuts.extend(b.cuts());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    Ok(cuts)
}

/// `‖a' − b'‖_p`.
pub fn lp_distance_deriv(a: &Trajectory, b: &Trajectory, p: f64, quad: &QuadOptions) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Precondition(format!("p must be at least 1, got {p}")));
    }
    let cuts = same_shape(a, b)?;
    let interval = a.interval();
    let q = integrate(
        |s| {
            let da = a.deriv(s);
            let db = b.deriv(s);
            let diff: Vec<f64> = da.iter().zip(&db).map(|(x, y)| x - y).collect();
            norm(&diff).powf(p)
        },
        interval.start(),
        interval.end(),
        &cuts,
        quad,
    );
    if q.invalid {
        return Err(Error::Numeric("derivative distance produced NaN".into()));
    }
    if !q.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(q.value.powf(1.0 / p))
}

/// `‖a − b‖_p`.
pub fn lp_distance_value(a: &Trajectory, b: &Trajectory, p: f64, quad: &QuadOptions) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Precondition(format!("p must be at least 1, got {p}")));
    }
    let cuts = same_shape(a, b)?;
    let interval = a.interval();
    let q = integrate(
        |s| {
            let diff: Vec<f64> = a.value(s).iter().zip(b.value(s)).map(|(x, y)| x - y).collect();
            norm(&diff).powf(p)
        },
        interval.start(),
        interval.end(),
        &cuts,
        quad,
    );
    if !q.is_finite() {
        return Err(Error::Numeric("value distance is not finite".into()));
    }
    Ok(q.value.powf(1.0 / p))
}

/// Closed-form extremes of `P = Λ − v·∇_v Λ` for registered problems:
/// `Ξ⁺` as a function of `ν`, `Υ⁻` as a function of `λ`.
#[derive(Clone)]
pub struct PExtremes {
    pub m_psi: f64,
    pub xi_plus: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub upsilon_minus: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for PExtremes {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PExtremes").field("m_psi", &self.m_psi).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetSource {
    Analytic,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub xi_plus: f64,
    pub upsilon_minus: f64,
    pub theta: f64,
    pub m_psi: f64,
    pub eps_nu: f64,
    pub bound: f64,
    pub source: BudgetSource,
    /// Set when no admissible probe was found for `Υ`.
    pub inconclusive: Option<String>,
}

impl ErrorBudget {
    fn assemble(
        xi_plus: f64,
        upsilon_minus: f64,
        theta: f64,
        m_psi: f64,
        eps_nu: f64,
        source: BudgetSource,
    ) -> Self {
        let bound = ext_mul(ext_mul(eps_nu, m_psi), theta + xi_plus + upsilon_minus);
        ErrorBudget {
            xi_plus,
            upsilon_minus,
            theta,
            m_psi,
            eps_nu,
            bound,
            source,
            inconclusive: None,
        }
    }
}

/// `Θ = 2(1 + ‖y‖_∞)(κ‖Λ(·,y,y')‖₁ + β‖y'‖_p^p + γ(T−t))`, with
/// `0 · ∞ = 0` so that autonomous problems get `Θ = 0` even when `Λ`
/// is not integrable along `y`.
pub fn theta(lag: &Lagrangian, traj: &Trajectory, consts: &ConditionSConstants, quad: &QuadOptions) -> Result<f64> {
    let mut inner = 0.0;
    if consts.kappa > 0.0 {
        let q = traj.integrate(|s| lag.lambda(s, &traj.value(s), &traj.deriv(s)).abs(), quad);
        if q.invalid {
            return Err(Error::Numeric("Λ along the curve produced NaN".into()));
        }
        let l1 = if q.is_finite() { q.value } else { f64::INFINITY };
        inner += ext_mul(consts.kappa, l1);
    }
    if consts.beta > 0.0 {
        let p = traj.sobolev_p();
        let norm_p = traj.lp_norm(p, Target::Derivative, quad)?;
        inner += ext_mul(consts.beta, norm_p.powf(p));
    }
    inner += consts.gamma_bound * traj.interval().length();
    Ok(ext_mul(2.0 * (1.0 + traj.sup_norm()), inner))
}

/// Budget from registered closed-form extremes of `P`.
pub fn error_budget_analytic(
    plan: &ReparamPlan,
    lag: &Lagrangian,
    traj: &Trajectory,
    consts: &ConditionSConstants,
    extremes: &PExtremes,
    quad: &QuadOptions,
) -> Result<ErrorBudget> {
    let th = theta(lag, traj, consts, quad)?;
    let xi = (extremes.xi_plus)(plan.nu).max(0.0);
    let upsilon = match (plan.anchor, plan.lambda_bar) {
        (Anchor::Both, Some(lambda)) => (extremes.upsilon_minus)(lambda).max(0.0),
        _ => 0.0,
    };
    Ok(ErrorBudget::assemble(
        xi,
        upsilon,
        th,
        extremes.m_psi,
        plan.eps_nu,
        BudgetSource::Analytic,
    ))
}

fn p_value(lag: &Lagrangian, s: f64, z: &[f64], v: &[f64]) -> Option<f64> {
    lag.analytic_p(s, z, v)
        .or_else(|| lag.subgradient_p(s, z, v, DEFAULT_SUBGRADIENT_STEP).ok())
        .filter(|p| !p.is_nan())
}

/// Budget with `Ξ⁺`, `Υ⁻` and `M_Ψ` sampled on `probes`, which should lie
/// on the graph of `y`. A diagnostic only: sampled extremes do not
/// certify the inequality.
pub fn error_budget(
    plan: &ReparamPlan,
    lag: &Lagrangian,
    traj: &Trajectory,
    consts: &ConditionSConstants,
    probes: &ProbeSet,
    tuning: &Tuning,
) -> Result<ErrorBudget> {
    let th = theta(lag, traj, consts, &tuning.quad)?;
    let mut m_psi: f64 = 0.0;
    let mut xi = f64::NEG_INFINITY;
    for probe in probes.iter() {
        m_psi = m_psi.max(lag.psi(probe.s, &probe.z));
        let len = norm(&probe.v);
        let v: Vec<f64> = if len > 0.0 {
            probe.v.iter().map(|x| x / len * plan.nu * (1.0 + len)).collect()
        } else {
            let mut e = vec![0.0; probe.v.len()];
            e[0] = plan.nu;
            e
        };
        if !lag.in_domain(&probe.z, &v) {
            continue;
        }
        if let Some(p) = p_value(lag, probe.s, &probe.z, &v) {
            xi = xi.max(p);
        }
    }
    let xi_plus = xi.max(0.0);

    let mut upsilon_minus = 0.0;
    let mut note = None;
    if let (Anchor::Both, Some(lambda)) = (plan.anchor, plan.lambda_bar) {
        let rho = plan.rho.unwrap_or(0.0);
        let mut inf = f64::INFINITY;
        for probe in probes.iter() {
            let len = norm(&probe.v);
            let v: Vec<f64> = if len > 0.0 {
                probe.v.iter().map(|x| x / len * lambda * len.tanh()).collect()
            } else {
                probe.v.clone()
            };
            if !lag.in_domain(&probe.z, &v) {
                continue;
            }
            let inside = lag
                .dist_to_complement(tuning.dist, probe.s, &probe.z, &v, &tuning.dist_opts)
                .map(|d| d >= rho)
                .unwrap_or(false);
            if !inside {
                continue;
            }
            if let Some(p) = p_value(lag, probe.s, &probe.z, &v) {
                inf = inf.min(p);
            }
        }
        if inf.is_finite() {
            upsilon_minus = (-inf).max(0.0);
        } else {
            note = Some("no admissible probe for the infimum of P".to_string());
        }
    }
    let mut budget = ErrorBudget::assemble(xi_plus, upsilon_minus, th, m_psi, plan.eps_nu, BudgetSource::Sampled);
    budget.inconclusive = note;
    Ok(budget)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Infeasible,
    Inconclusive,
    Error,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Infeasible => "infeasible",
            RowStatus::Inconclusive => "inconclusive",
            RowStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub nu: f64,
    pub mu: Option<f64>,
    pub eps_nu: Option<f64>,
    pub meas_s_nu: Option<f64>,
    pub f_y_nu: Option<EnergyValue>,
    pub gap: Option<f64>,
    pub w1p_dist: Option<f64>,
    pub lip_rank: Option<f64>,
    pub budget: Option<ErrorBudget>,
    pub status: RowStatus,
    pub note: Option<String>,
    /// `(s, y_ν(s))` on a uniform grid, first component only.
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
}

impl StudyRow {
    fn empty(nu: f64, status: RowStatus, note: String) -> Self {
        StudyRow {
            nu,
            mu: None,
            eps_nu: None,
            meas_s_nu: None,
            f_y_nu: None,
            gap: None,
            w1p_dist: None,
            lip_rank: None,
            budget: None,
            status,
            note: Some(note),
            samples: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Baseline {
    #[serde(rename = "F_y")]
    pub f_y: EnergyValue,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<StudyRow>,
    pub baseline: Baseline,
}

/// Inputs of a study beyond the curve and the schedule.
#[derive(Debug, Clone)]
pub struct StudyOptions {
    pub consts: ConditionSConstants,
    pub extremes: Option<PExtremes>,
    /// Exponent of the reported Sobolev distance.
    pub p: f64,
    /// Probes used by the sampled budget when no extremes are registered.
    pub budget_probes: usize,
}

pub fn convergence_study(
    lag: &Lagrangian,
    traj: &Trajectory,
    anchor: Anchor,
    schedule: &[f64],
    tuning: &Tuning,
    opts: &StudyOptions,
) -> Result<ConvergenceReport> {
    if schedule.is_empty() {
        return Err(Error::Precondition("the nu schedule is empty".into()));
    }
    if schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("the nu schedule must be increasing".into()));
    }
    let f_y = energy(lag, traj, &tuning.quad)?;
    let probes = ProbeSet::on_graph(
        traj,
        &ProbeConfig::default()
            .with_count(opts.budget_probes)
            .with_seed(tuning.seed),
    );
    let rows: Vec<Result<StudyRow>> = schedule
        .par_iter()
        .map(|&nu| study_row(lag, traj, anchor, nu, tuning, opts, &f_y, &probes))
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        rows,
        baseline: Baseline { f_y, p: opts.p },
    })
}

#[allow(clippy::too_many_arguments)]
fn study_row(
    lag: &Lagrangian,
    traj: &Trajectory,
    anchor: Anchor,
    nu: f64,
    tuning: &Tuning,
    opts: &StudyOptions,
    f_y: &EnergyValue,
    probes: &ProbeSet,
) -> Result<StudyRow> {
    let (plan, tc, y_nu) = match reparametrize_at(traj, lag, anchor, nu, tuning) {
        Ok(built) => built,
        Err(Error::Numeric(msg)) => return Err(Error::Numeric(msg)),
        Err(err @ Error::InfeasiblePlan { .. }) => {
            let mut row = StudyRow::empty(nu, RowStatus::Infeasible, err.to_string());
            if let Ok(fast) = make_plan(traj, lag, Anchor::Initial, nu, tuning) {
                row.eps_nu = Some(fast.eps_nu);
                row.meas_s_nu = Some(fast.s_nu.measure());
            }
            return Ok(row);
        }
        Err(err) => return Ok(StudyRow::empty(nu, RowStatus::Error, err.to_string())),
    };
    let f_nu = energy(lag, &y_nu, &tuning.quad)?;
    let budget = match &opts.extremes {
        Some(ext) => error_budget_analytic(&plan, lag, traj, &opts.consts, ext, &tuning.quad)?,
        None => error_budget(&plan, lag, traj, &opts.consts, probes, tuning)?,
    };
    let status = if budget.inconclusive.is_some() {
        RowStatus::Inconclusive
    } else {
        RowStatus::Ok
    };
    let interval = traj.interval();
    let samples = interval
        .grid(ROW_SAMPLES)
        .into_iter()
        .map(|s| (s, y_nu.value1(s)))
        .collect();
    Ok(StudyRow {
        nu,
        mu: plan.mu,
        eps_nu: Some(plan.eps_nu),
        meas_s_nu: Some(plan.s_nu.measure()),
        f_y_nu: Some(f_nu),
        gap: Some(gap(&f_nu, f_y)),
        w1p_dist: Some(lp_distance_deriv(&y_nu, traj, opts.p, &tuning.quad)?),
        lip_rank: Some(lipschitz_rank(&tc)),
        note: budget.inconclusive.clone(),
        budget: Some(budget),
        status,
        samples,
    })
}
