use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{Boundary, Interval, IntervalSet};
use crate::lagrangian::Lagrangian;
use crate::probes::{ProbeConfig, ProbeSet, Verdict};
use crate::quadrature::integrate;
use crate::trajectory::{Target, Trajectory};

use super::{Anchor, Tuning};

/// Finest well-inside margin tried when `ρ` is chosen automatically.
const MAX_RHO_EXPONENT: i32 = 52;

/// Data of one reparametrization: the fast set `S_ν`, where `|y'| > ν`,
/// and, when both end points are pinned, the slow-down set `Σ_ν ⊆ Ω`
/// that absorbs the time saved on `S_ν`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReparamPlan {
    pub anchor: Anchor,
    pub nu: f64,
    pub mu: Option<f64>,
    pub lambda_bar: Option<f64>,
    pub rho: Option<f64>,
    pub s_nu: IntervalSet,
    pub sigma_nu: IntervalSet,
    /// `∫_{S_ν} (|y'|/ν − 1)`, the time saved on the fast set.
    pub eps_nu: f64,
    pub omega: IntervalSet,
    /// `‖y'‖₁`, kept for the bounds that depend on it.
    pub deriv_l1: f64,
}

impl ReparamPlan {
    pub fn is_identity(&self) -> bool {
        self.s_nu.is_empty() && self.sigma_nu.is_empty()
    }
}

/// `∫_{S} |y'|` over the pieces of `set`, exact for scalar curves.
pub(crate) fn arc_length_over(traj: &Trajectory, set: &IntervalSet, tuning: &Tuning) -> Result<f64> {
    let mut total = 0.0;
    for (a, b) in set.pieces_split_at(&traj.cuts()) {
        total += piece_arc_length(traj, a, b, tuning)?;
    }
    Ok(total)
}

/// `∫_a^b |y'|` on a piece where `y'` keeps its sign (scalar case) or by
/// quadrature of the speed (vector case).
pub(crate) fn piece_arc_length(traj: &Trajectory, a: f64, b: f64, tuning: &Tuning) -> Result<f64> {
    if traj.is_scalar() {
        return Ok((traj.value1(b) - traj.value1(a)).abs());
    }
    let q = integrate(|s| traj.speed(s), a, b, &traj.cuts(), &tuning.quad);
    if !q.is_finite() {
        return Err(Error::Numeric(format!("arc length on [{a}, {b}] is not finite")));
    }
    Ok(q.value)
}

pub fn make_plan(traj: &Trajectory, lag: &Lagrangian, anchor: Anchor, nu: f64, tuning: &Tuning) -> Result<ReparamPlan> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::Precondition(format!("nu must be positive, got {nu}")));
    }
    let interval = traj.interval();
    let deriv_l1 = traj.lp_norm(1.0, Target::Derivative, &tuning.quad)?;
    if !deriv_l1.is_finite() {
        return Err(Error::Precondition("the derivative is not integrable".into()));
    }
    let s_nu = traj.superlevel_set_with(nu, tuning.scan_nodes)?;
    let eps_nu = (arc_length_over(traj, &s_nu, tuning)? / nu - s_nu.measure()).max(0.0);

    let mut plan = ReparamPlan {
        anchor,
        nu,
        mu: None,
        lambda_bar: tuning.lambda_bar,
        rho: tuning.rho,
        s_nu,
        sigma_nu: IntervalSet::empty(),
        eps_nu,
        omega: IntervalSet::empty(),
        deriv_l1,
    };
    if anchor != Anchor::Both {
        return Ok(plan);
    }

    let duration = interval.length();
    let lambda = tuning
        .lambda_bar
        .ok_or_else(|| Error::Precondition("pinning both end points needs lambda_bar".into()))?;
    if !(lambda > deriv_l1 / duration) {
        return Err(Error::Precondition(format!(
            "lambda_bar = {lambda} must exceed ‖y'‖₁/(T−t) = {}",
            deriv_l1 / duration
        )));
    }
    let (lo, hi) = mu_window(deriv_l1, lambda, duration);
    let mu = tuning.mu.unwrap_or(0.5 * (lo + hi));
    if !(mu > lo && mu < hi) {
        return Err(Error::Precondition(format!("mu = {mu} must lie in ({lo}, {hi})")));
    }
    check_star_shaped(traj, lag, tuning)?;

    let required = eps_nu / (1.0 - mu);
    let (rho, omega) = match tuning.rho {
        Some(rho) if rho > 0.0 => (rho, omega_set(traj, lag, &plan.s_nu, mu, lambda, rho, tuning)),
        Some(rho) => return Err(Error::Precondition(format!("rho must be positive, got {rho}"))),
        None => choose_rho(traj, lag, &plan.s_nu, mu, lambda, required, tuning),
    };
    let sigma = omega.leftmost_with_measure(required).ok_or_else(|| {
        let available = omega.measure();
        Error::InfeasiblePlan {
            available,
            required,
            deficit: required - available,
        }
    })?;
    plan.mu = Some(mu);
    plan.rho = Some(rho);
    plan.lambda_bar = Some(lambda);
    plan.omega = omega;
    plan.sigma_nu = sigma;
    Ok(plan)
}

/// Open window `(‖y'‖₁/(λ(T−t)), 1)` of admissible slow-down slopes.
pub fn mu_window(deriv_l1: f64, lambda: f64, duration: f64) -> (f64, f64) {
    (deriv_l1 / (lambda * duration), 1.0)
}

/// `Ω_μ = {s : |y'(s)| < μλ}` (no well-inside requirement).
pub fn omega_mu(traj: &Trajectory, mu: f64, lambda: f64, tuning: &Tuning) -> IntervalSet {
    IntervalSet::from_predicate(traj.interval(), tuning.scan_nodes, Boundary::Inner, |s| {
        traj.speed(s) < mu * lambda
    })
}

/// `Ω = {s : |y'|/μ < λ, (s, y, y'/μ) well inside the domain by ρ} ∖ S_ν`.
pub fn omega_set(
    traj: &Trajectory,
    lag: &Lagrangian,
    s_nu: &IntervalSet,
    mu: f64,
    lambda: f64,
    rho: f64,
    tuning: &Tuning,
) -> IntervalSet {
    let pred = |s: f64| {
        let speed = traj.speed(s);
        if !(speed / mu < lambda) {
            return false;
        }
        if lag.is_real_valued() {
            return true;
        }
        let z = traj.value(s);
        let w: Vec<f64> = traj.deriv(s).iter().map(|x| x / mu).collect();
        match lag.dist_to_complement(tuning.dist, s, &z, &w, &tuning.dist_opts) {
            Ok(d) => d >= rho,
            Err(_) => false,
        }
    };
    let mut raw = Vec::new();
    for (a, b) in IntervalSet::from_interval(traj.interval()).pieces_split_at(traj.breakpoints()) {
        if let Ok(piece) = Interval::new(a, b) {
            let set = IntervalSet::from_predicate(piece, tuning.scan_nodes, Boundary::Inner, pred);
            raw.extend_from_slice(set.components());
        }
    }
    IntervalSet::new(raw).difference(s_nu)
}

/// Largest `ρ = 2^{-k}` whose `Ω` still holds the required measure; the
/// finest candidate is returned when none does, so the caller reports the
/// deficit.
fn choose_rho(
    traj: &Trajectory,
    lag: &Lagrangian,
    s_nu: &IntervalSet,
    mu: f64,
    lambda: f64,
    required: f64,
    tuning: &Tuning,
) -> (f64, IntervalSet) {
    if lag.is_real_valued() {
        // every point is infinitely far from an empty complement
        return (1.0, omega_set(traj, lag, s_nu, mu, lambda, 1.0, tuning));
    }
    let mut last = (1.0, IntervalSet::empty());
    for k in 0..=MAX_RHO_EXPONENT {
        let rho = (0.5f64).powi(k);
        let omega = omega_set(traj, lag, s_nu, mu, lambda, rho, tuning);
        if omega.measure() >= required {
            return (rho, omega);
        }
        last = (rho, omega);
    }
    last
}

fn check_star_shaped(traj: &Trajectory, lag: &Lagrangian, tuning: &Tuning) -> Result<()> {
    if lag.is_real_valued() {
        return Ok(());
    }
    let cfg = ProbeConfig::default().with_count(512).with_seed(tuning.seed);
    let probes = ProbeSet::on_graph(traj, &cfg);
    let report = lag.structure_check(&probes);
    if report.star_shaped.verdict == Verdict::Falsified {
        let w = report.star_shaped.witness.expect("falsified verdict carries a witness");
        return Err(Error::Structure(format!(
            "domain is not star-shaped in v at s = {}, z = {:?}, v = {:?}",
            w.s, w.z, w.v
        )));
    }
    Ok(())
}

