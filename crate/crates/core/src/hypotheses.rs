//! Falsification checkers for the hypotheses of the non-occurrence theorem.
//!
//! Every checker evaluates the claimed inequality on a seeded probe set.
//! `Pass` means "not falsified on these probes"; `Falsified` always ships
//! the probe at which the inequality failed by more than [`FALSIFY_TOL`].

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::bisect_predicate;
use crate::lagrangian::{DistanceKind, DistanceOptions, Lagrangian, DEFAULT_SUBGRADIENT_STEP};
use crate::probes::{Probe, ProbeSet, Verdict};
use crate::quadrature::QuadOptions;
use crate::reparam::Anchor;
use crate::trajectory::{norm, Target, Trajectory};

pub const FALSIFY_TOL: f64 = 1e-9;

/// Ratio to the median sampled value above which `Λ` is declared
/// unbounded.
const UNBOUNDED_FACTOR: f64 = 1e10;

/// Constants of the local Lipschitz-in-time condition (S); `gamma_bound`
/// is a uniform bound standing in for the integrable `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSConstants {
    pub kappa: f64,
    pub beta: f64,
    pub gamma_bound: f64,
    pub eps_star: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

impl ConditionSConstants {
    /// Constants that any autonomous Lagrangian satisfies.
    pub fn autonomous(k: f64) -> Self {
        ConditionSConstants {
            kappa: 0.0,
            beta: 0.0,
            gamma_bound: 0.0,
            eps_star: 1.0,
            k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.kappa, self.beta, self.gamma_bound, self.eps_star, self.k];
        if all.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || !(self.eps_star > 0.0) || !(self.k > 0.0) {
            return Err(Error::Precondition(
                "condition (S) constants must be finite and nonnegative, with eps_star > 0 and K > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Hypothesis {
    S,
    Ac,
    Star,
    D,
    BwYLambda,
    BprimeYLambda,
    LYLambda,
    BYPsi,
    CYPsi,
    PYPsi,
    GLambda,
    Integrability,
}

impl Hypothesis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Hypothesis::S => "S",
            Hypothesis::Ac => "Ac",
            Hypothesis::Star => "star",
            Hypothesis::D => "D",
            Hypothesis::BwYLambda => "Bw_yLambda",
            Hypothesis::BprimeYLambda => "Bprime_yLambda",
            Hypothesis::LYLambda => "L_yLambda",
            Hypothesis::BYPsi => "B_yPsi",
            Hypothesis::CYPsi => "C_yPsi",
            Hypothesis::PYPsi => "P_yPsi",
            Hypothesis::GLambda => "G_Lambda",
            Hypothesis::Integrability => "integrability",
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub name: Hypothesis,
    pub verdict: Verdict,
    pub witness: Option<Probe>,
    /// Sup or inf estimate, depending on the checker.
    pub statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// `(r, ρ(r))` pairs for the limit condition.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<(f64, f64)>,
}

impl HypothesisReport {
    fn new(name: Hypothesis, verdict: Verdict) -> Self {
        HypothesisReport {
            name,
            verdict,
            witness: None,
            statistic: None,
            note: None,
            levels: Vec::new(),
        }
    }

    pub fn pass(name: Hypothesis) -> Self {
        HypothesisReport::new(name, Verdict::Pass)
    }

    pub fn falsified(name: Hypothesis, witness: Probe) -> Self {
        let mut r = HypothesisReport::new(name, Verdict::Falsified);
        r.witness = Some(witness);
        r
    }

    pub fn inconclusive(name: Hypothesis, note: impl Into<String>) -> Self {
        let mut r = HypothesisReport::new(name, Verdict::Inconclusive);
        r.note = Some(note.into());
        r
    }

    fn with_statistic(mut self, statistic: f64) -> Self {
        self.statistic = Some(statistic);
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn exceeds(lhs: f64, rhs: f64) -> bool {
    lhs > rhs + FALSIFY_TOL * rhs.abs().max(1.0)
}

/// Maps an arbitrary probe velocity into the open ball of radius `radius`,
/// keeping its direction; large probes land close to the sphere.
fn into_ball(v: &[f64], radius: f64) -> Vec<f64> {
    let len = norm(v);
    if len == 0.0 {
        return v.to_vec();
    }
    let target = radius * len.tanh();
    v.iter().map(|x| x / len * target).collect()
}

fn graph_probe(traj: &Trajectory, s: f64) -> Probe {
    Probe::new(s, traj.value(s), traj.deriv(s))
}

pub fn verify_condition_s(
    lag: &Lagrangian,
    traj: &Trajectory,
    consts: &ConditionSConstants,
    probes: &ProbeSet,
) -> Result<HypothesisReport> {
    consts.validate()?;
    let interval = traj.interval();
    let p = traj.sobolev_p();
    let mut rng = ChaCha8Rng::seed_from_u64(probes.seed ^ 0x5c0d);
    let mut worst: f64 = 0.0;
    for probe in probes.iter() {
        let (s, z, v) = (probe.s, &probe.z, &probe.v);
        if norm(z) > consts.k || !lag.in_domain(z, v) {
            continue;
        }
        let lo = (s - consts.eps_star).max(interval.start());
        let hi = (s + consts.eps_star).min(interval.end());
        let s1 = if rng.random_bool(0.5) { s } else { rng.random_range(lo..=hi) };
        let delta = consts.eps_star * 10f64.powf(-rng.random_range(0.0..12.0));
        let s2 = if rng.random_bool(0.5) { s1 + delta } else { s1 - delta }.clamp(lo, hi);
        let l1 = lag.lambda(s1, z, v);
        let l2 = lag.lambda(s2, z, v);
        let centre = lag.lambda(s, z, v);
        if !(l1.is_finite() && l2.is_finite() && centre.is_finite()) {
            continue;
        }
        let lhs = (l2 - l1).abs();
        let rhs = (consts.kappa * centre + consts.beta * norm(v).powf(p) + consts.gamma_bound) * (s2 - s1).abs();
        // the difference cannot be resolved below the rounding of its terms
        let noise = 8.0 * f64::EPSILON * l1.abs().max(l2.abs());
        worst = worst.max(lhs - rhs - noise);
        if exceeds(lhs, rhs + noise) {
            return Ok(HypothesisReport::falsified(Hypothesis::S, probe.clone())
                .with_statistic(lhs - rhs)
                .with_note(format!("s1 = {s1:e}, s2 = {s2:e}, lhs = {lhs:e}, rhs = {rhs:e}")));
        }
    }
    Ok(HypothesisReport::pass(Hypothesis::S).with_statistic(worst))
}

/// Which boundedness hypothesis to check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundedness {
    /// `Λ` bounded on `(I × y(I) × B_{ν₀}) ∩ Dom(Λ)`.
    Weak { nu0: f64 },
    /// `Λ` bounded on the part of `I × y(I) × B_λ` that lies at least `ρ`
    /// inside the domain.
    WellInside {
        lambda: f64,
        rho: f64,
        dist: DistanceKind,
    },
}

pub fn verify_boundedness(
    lag: &Lagrangian,
    traj: &Trajectory,
    mode: Boundedness,
    probes: &ProbeSet,
    dist_opts: &DistanceOptions,
    quad: &QuadOptions,
) -> Result<HypothesisReport> {
    let (name, radius) = match mode {
        Boundedness::Weak { nu0 } => (Hypothesis::BwYLambda, nu0),
        Boundedness::WellInside { lambda, .. } => {
            let l1 = traj.lp_norm(1.0, Target::Derivative, quad)?;
            let floor = l1 / traj.interval().length();
            if !(lambda > floor) {
                return Err(Error::Precondition(format!(
                    "lambda = {lambda} must exceed ‖y'‖₁/(T−t) = {floor}"
                )));
            }
            (Hypothesis::BprimeYLambda, lambda)
        }
    };
    let admissible = |z: &[f64], v: &[f64]| -> bool {
        if !lag.in_domain(z, v) || norm(v) > radius {
            return false;
        }
        match mode {
            Boundedness::Weak { .. } => true,
            Boundedness::WellInside { rho, dist, .. } => lag
                .dist_to_complement(dist, 0.0, z, v, dist_opts)
                .map(|d| d >= rho)
                .unwrap_or(false),
        }
    };

    let mut values: Vec<f64> = Vec::new();
    let mut sup = f64::NEG_INFINITY;
    let mut arg: Option<Probe> = None;
    for probe in probes.iter() {
        let v = into_ball(&probe.v, radius);
        if !admissible(&probe.z, &v) {
            continue;
        }
        let value = lag.lambda(probe.s, &probe.z, &v);
        let candidate = Probe::new(probe.s, probe.z.clone(), v);
        if !value.is_finite() {
            return Ok(HypothesisReport::falsified(name, candidate).with_statistic(f64::INFINITY));
        }
        values.push(value);
        if value > sup {
            sup = value;
            arg = Some(candidate);
        }
    }
    if values.is_empty() {
        return Ok(HypothesisReport::inconclusive(name, "no admissible probe"));
    }
    // a bounded Λ stays within many orders of magnitude of its typical value
    values.sort_by(f64::total_cmp);
    let cap = UNBOUNDED_FACTOR * values[values.len() / 2].abs().max(1.0);
    let best = arg.expect("at least one admissible probe");
    if sup > cap {
        return Ok(HypothesisReport::falsified(name, best)
            .with_statistic(sup)
            .with_note("sampled values exceed the typical value by more than 1e10"));
    }

    // push the maximiser outwards to the edge of the admissible set
    let len = norm(&best.v);
    if len > 0.0 {
        let scaled = |r: f64| -> Vec<f64> { best.v.iter().map(|x| x * r).collect() };
        let outside = |r: f64| !admissible(&best.z, &scaled(r));
        let r_max = radius / len;
        let r_edge = if outside(r_max) {
            bisect_predicate(&outside, 1.0, r_max, false).0
        } else {
            r_max
        };
        for k in 1..=60 {
            let r = 1.0 + (r_edge - 1.0) * (1.0 - (0.5f64).powi(k));
            let v = scaled(r);
            let value = lag.lambda(best.s, &best.z, &v);
            if !value.is_finite() || value > cap {
                return Ok(HypothesisReport::falsified(name, Probe::new(best.s, best.z.clone(), v))
                    .with_statistic(value)
                    .with_note("unbounded towards the edge of the admissible set"));
            }
            sup = sup.max(value);
        }
    }
    Ok(HypothesisReport::pass(name).with_statistic(sup))
}

/// Limit condition: `Λ → +∞` uniformly as the distance to the domain
/// complement goes to zero.
pub fn verify_limit_l(
    lag: &Lagrangian,
    dist: DistanceKind,
    r_levels: &[f64],
    probes: &ProbeSet,
    dist_opts: &DistanceOptions,
) -> HypothesisReport {
    let name = Hypothesis::LYLambda;
    if lag.is_real_valued() {
        return HypothesisReport::pass(name).with_note("vacuous: real-valued Lagrangian");
    }
    let r_min = r_levels.iter().copied().fold(f64::INFINITY, f64::min);
    // (distance to complement, Λ) samples, including sequences that
    // approach the boundary
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for probe in probes.iter() {
        let (z, v) = (&probe.z, &probe.v);
        if !lag.in_domain(z, v) {
            continue;
        }
        let Ok(d) = lag.dist_to_complement(dist, probe.s, z, v, dist_opts) else {
            continue;
        };
        if !d.is_finite() {
            continue;
        }
        samples.push((d, lag.lambda(probe.s, z, v)));
        // walk towards the boundary along the velocity direction that left
        // the domain first
        let Some(dir) = escape_direction(lag, z, v, d, dist_opts) else {
            continue;
        };
        for k in 1..=40 {
            let step = d * (1.0 - (0.5f64).powi(k));
            let w: Vec<f64> = v.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            if !lag.in_domain(z, &w) {
                break;
            }
            let dw = lag.dist_to_complement(dist, probe.s, z, &w, dist_opts).unwrap_or(0.0);
            let value = lag.lambda(probe.s, z, &w);
            samples.push((dw, value));
            if dw < FALSIFY_TOL && value < r_min {
                let mut r = HypothesisReport::falsified(name, Probe::new(probe.s, z.clone(), w))
                    .with_statistic(value)
                    .with_note(format!("Λ = {value:e} at distance {dw:e} from the complement"));
                r.levels = Vec::new();
                return r;
            }
        }
    }
    if samples.is_empty() {
        return HypothesisReport::inconclusive(name, "no finite distance to the complement was found");
    }
    let mut levels = Vec::new();
    for &r in r_levels {
        let mut found = None;
        for k in 0..=60 {
            let rho = (0.5f64).powi(k);
            if samples.iter().all(|&(d, value)| d > rho || value >= r) {
                found = Some(rho);
                break;
            }
        }
        match found {
            Some(rho) => levels.push((r, rho)),
            None => {
                return HypothesisReport::inconclusive(name, format!("no margin found for r = {r}"));
            }
        }
    }
    let mut report = HypothesisReport::pass(name);
    report.levels = levels;
    report
}

/// Unit velocity direction along which the complement is reached at
/// (approximately) distance `d`.
fn escape_direction(lag: &Lagrangian, z: &[f64], v: &[f64], d: f64, opts: &DistanceOptions) -> Option<Vec<f64>> {
    let n = v.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    let len = norm(v);
    if len > 0.0 {
        dirs.push(v.iter().map(|x| x / len).collect());
        dirs.push(v.iter().map(|x| -x / len).collect());
    }
    for k in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[k] = sign;
            dirs.push(e);
        }
    }
    let reach = d * (1.0 + 1e-6) + 2.0 * opts.tol;
    dirs.into_iter().find(|dir| {
        let w: Vec<f64> = v.iter().zip(dir).map(|(a, b)| a + reach * b).collect();
        !lag.in_domain(z, &w)
    })
}

/// Estimates of `sup Ψ`, `inf Ψ` on `I × y(I)` together with the three
/// hypotheses on `Ψ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiReport {
    pub m_sup: f64,
    pub m_inf: f64,
    pub bounded: HypothesisReport,
    pub continuity: HypothesisReport,
    pub positivity: HypothesisReport,
}

pub fn verify_psi(lag: &Lagrangian, traj: &Trajectory, probes: &ProbeSet) -> PsiReport {
    let interval = traj.interval();
    let mut m_sup = f64::NEG_INFINITY;
    let mut m_inf = f64::INFINITY;
    let mut sup_at: Option<Probe> = None;
    let mut inf_at: Option<Probe> = None;
    let mut jump: Option<(Probe, f64)> = None;
    for probe in probes.iter() {
        let on_graph = Probe::new(probe.s, traj.value(probe.s), probe.v.clone());
        for p in [probe, &on_graph] {
            let value = lag.psi(p.s, &p.z);
            if value > m_sup {
                m_sup = value;
                sup_at = Some(p.clone());
            }
            if value < m_inf {
                m_inf = value;
                inf_at = Some(p.clone());
            }
        }
        if jump.is_none() {
            if let Some(size) = jump_at(lag, probe, interval) {
                jump = Some((probe.clone(), size));
            }
        }
    }
    let bounded = if m_sup.is_finite() {
        HypothesisReport::pass(Hypothesis::BYPsi).with_statistic(m_sup)
    } else {
        HypothesisReport::falsified(Hypothesis::BYPsi, sup_at.clone().expect("nonempty probes")).with_statistic(m_sup)
    };
    let positivity = if m_inf > FALSIFY_TOL {
        HypothesisReport::pass(Hypothesis::PYPsi).with_statistic(m_inf)
    } else {
        HypothesisReport::falsified(Hypothesis::PYPsi, inf_at.clone().expect("nonempty probes")).with_statistic(m_inf)
    };
    let continuity = match jump {
        None => HypothesisReport::pass(Hypothesis::CYPsi),
        Some((p, size)) => HypothesisReport::falsified(Hypothesis::CYPsi, p)
            .with_statistic(size)
            .with_note("increment does not shrink under bisection of the time step"),
    };
    PsiReport {
        m_sup,
        m_inf,
        bounded,
        continuity,
        positivity,
    }
}

/// Bisects `[s, s ± 10⁻²]` towards the larger increment of `Ψ(·, z)`; an
/// increment that survives 60 halvings is a jump.
fn jump_at(lag: &Lagrangian, probe: &Probe, interval: crate::interval::Interval) -> Option<f64> {
    let psi = |t: f64| lag.psi(t, &probe.z);
    let h = 1e-2 * interval.length();
    let (mut a, mut b) = if probe.s + h <= interval.end() {
        (probe.s, probe.s + h)
    } else {
        (probe.s - h, probe.s)
    };
    let (mut pa, mut pb) = (psi(a), psi(b));
    let first = (pb - pa).abs();
    let scale = pa.abs().max(pb.abs()).max(1.0);
    if !first.is_finite() || first <= 1e-6 * scale {
        return None;
    }
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        let pm = psi(m);
        if (pm - pa).abs() >= (pb - pm).abs() {
            b = m;
            pb = pm;
        } else {
            a = m;
            pa = pm;
        }
    }
    let last = (pb - pa).abs();
    (last > 0.25 * first).then_some(last)
}

/// Linear growth from below, `Λ ≥ α|v| − d`, on every in-domain probe.
pub fn verify_growth(lag: &Lagrangian, probes: &ProbeSet) -> HypothesisReport {
    let name = Hypothesis::GLambda;
    let Some(g) = lag.growth() else {
        return HypothesisReport::inconclusive(name, "no growth constants registered");
    };
    let mut worst = f64::INFINITY;
    for probe in probes.iter() {
        if !lag.in_domain(&probe.z, &probe.v) {
            continue;
        }
        let value = lag.lambda(probe.s, &probe.z, &probe.v);
        let floor = g.alpha * norm(&probe.v) - g.d;
        worst = worst.min(value - floor);
        if exceeds(floor, value) {
            return HypothesisReport::falsified(name, probe.clone()).with_statistic(value - floor);
        }
    }
    HypothesisReport::pass(name).with_statistic(worst)
}

/// Condition (D) with the search for `v'` restricted to the segment `[0, v]`.
pub fn verify_condition_d(
    lag: &Lagrangian,
    dist: DistanceKind,
    probes: &ProbeSet,
    dist_opts: &DistanceOptions,
) -> HypothesisReport {
    let name = Hypothesis::D;
    if lag.is_real_valued() {
        return HypothesisReport::pass(name).with_note("real-valued: every point is interior");
    }
    const THETAS: [f64; 9] = [0.0, 1.0 / 64.0, 0.125, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0];
    for probe in probes.iter() {
        if !lag.in_domain(&probe.z, &probe.v) {
            continue;
        }
        let ok = THETAS.iter().any(|&theta| {
            let w: Vec<f64> = probe.v.iter().map(|x| theta * x).collect();
            lag.in_domain(&probe.z, &w)
                && lag
                    .dist_to_complement(dist, probe.s, &probe.z, &w, dist_opts)
                    .map(|d| d > 2.0 * dist_opts.tol)
                    .unwrap_or(false)
        });
        if !ok {
            return HypothesisReport::falsified(name, probe.clone());
        }
    }
    HypothesisReport::pass(name)
}

/// `Λ(·, y, y') ∈ L¹(I)`.
pub fn verify_integrability(lag: &Lagrangian, traj: &Trajectory, quad: &QuadOptions) -> Result<HypothesisReport> {
    let name = Hypothesis::Integrability;
    let q = traj.integrate(
        |s| {
            let z = traj.value(s);
            let v = traj.deriv(s);
            lag.lambda(s, &z, &v)
        },
        quad,
    );
    if q.invalid {
        return Err(Error::Numeric("Λ along the curve produced NaN".into()));
    }
    if q.is_finite() {
        return Ok(HypothesisReport::pass(name).with_statistic(q.value));
    }
    let interval = traj.interval();
    let s = match q.infinite_cell {
        Some((a, b)) => 0.5 * (a + b),
        None => match traj.singular_points().first() {
            Some(&p) => {
                let nudge = 1e-9 * interval.length();
                if p + nudge <= interval.end() {
                    p + nudge
                } else {
                    p - nudge
                }
            }
            None => 0.5 * (interval.start() + interval.end()),
        },
    };
    Ok(HypothesisReport::falsified(name, graph_probe(traj, s)).with_statistic(f64::INFINITY))
}

/// Hypotheses each claim depends on. Integrability of `Λ` along the curve
/// is reported separately and never decides the exit status.
pub fn required_for(anchor: Anchor, real_valued: bool) -> Vec<Hypothesis> {
    let mut out = vec![
        Hypothesis::S,
        Hypothesis::Ac,
        Hypothesis::Star,
        Hypothesis::D,
        Hypothesis::BwYLambda,
        Hypothesis::BprimeYLambda,
        Hypothesis::BYPsi,
        Hypothesis::CYPsi,
    ];
    if anchor == Anchor::Both {
        out.push(Hypothesis::PYPsi);
        if !real_valued {
            out.push(Hypothesis::LYLambda);
        }
    }
    out
}

/// Inputs shared by the full battery of checks.
#[derive(Debug, Clone)]
pub struct CheckSettings {
    pub consts: ConditionSConstants,
    pub nu0: f64,
    pub lambda: f64,
    pub rho: f64,
    pub dist: DistanceKind,
    pub dist_opts: DistanceOptions,
    pub quad: QuadOptions,
    pub r_levels: Vec<f64>,
    pub probe_count: usize,
    pub seed: u64,
}

/// Runs every checker. The probe sets are drawn in the box spanned by
/// `y(I)` and along the graph of `y`.
pub fn check_all(lag: &Lagrangian, traj: &Trajectory, settings: &CheckSettings) -> Result<Vec<HypothesisReport>> {
    use crate::probes::ProbeConfig;
    let cfg = ProbeConfig::default()
        .with_count(settings.probe_count)
        .with_seed(settings.seed)
        .with_v_radius(settings.lambda.max(settings.nu0).max(1.0) * 2.0);
    let graph = ProbeSet::on_graph(traj, &cfg);
    let boxed = ProbeSet::in_box(traj.interval(), &traj.image_box(), &cfg.with_seed(settings.seed.wrapping_add(1)));
    let mut all = graph.clone();
    all.probes.extend(boxed.probes.iter().cloned());

    let structure = lag.structure_check(&all);
    let mut ac = HypothesisReport::new(Hypothesis::Ac, structure.radially_convex.verdict);
    ac.witness = structure.radially_convex.witness.clone();
    ac.statistic = structure.radially_convex.statistic;
    let mut star = HypothesisReport::new(Hypothesis::Star, structure.star_shaped.verdict);
    star.witness = structure.star_shaped.witness.clone();
    star.statistic = structure.star_shaped.statistic;

    let psi = verify_psi(lag, traj, &all);
    let mut out = vec![
        verify_condition_s(lag, traj, &settings.consts, &all)?,
        ac,
        star,
        verify_condition_d(lag, settings.dist, &all, &settings.dist_opts),
        verify_boundedness(
            lag,
            traj,
            Boundedness::Weak { nu0: settings.nu0 },
            &all,
            &settings.dist_opts,
            &settings.quad,
        )?,
        verify_boundedness(
            lag,
            traj,
            Boundedness::WellInside {
                lambda: settings.lambda,
                rho: settings.rho,
                dist: settings.dist,
            },
            &all,
            &settings.dist_opts,
            &settings.quad,
        )?,
        verify_limit_l(lag, settings.dist, &settings.r_levels, &all, &settings.dist_opts),
        psi.bounded,
        psi.continuity,
        psi.positivity,
        verify_growth(lag, &all),
        verify_integrability(lag, traj, &settings.quad)?,
    ];
    out.sort_by_key(|r| r.name);
    Ok(out)
}

/// Constants `K₀` and `λ₀` of the a-priori bound on minimizers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryBounds {
    pub k0: f64,
    pub lambda0: f64,
    pub inputs: CorollaryInputs,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryInputs {
    pub x: Vec<f64>,
    pub inf_value: f64,
    pub m_psi: f64,
    pub alpha: f64,
    pub d: f64,
    pub duration: f64,
}

pub fn corollary_bounds(inputs: CorollaryInputs) -> Result<CorollaryBounds> {
    if !(inputs.m_psi > 0.0) || !(inputs.alpha > 0.0) {
        return Err(Error::Precondition("m_psi and alpha must be positive".into()));
    }
    if !(inputs.duration > 0.0) {
        return Err(Error::Precondition("the interval must have positive length".into()));
    }
    let numerator = inputs.inf_value + inputs.m_psi * inputs.d * inputs.duration;
    let k0 = norm(&inputs.x) + numerator / (inputs.m_psi * inputs.alpha);
    let lambda0 = numerator / (inputs.m_psi * inputs.alpha * inputs.duration);
    Ok(CorollaryBounds { k0, lambda0, inputs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1BoundReport {
    pub verdict: Verdict,
    /// `∫|y'|`.
    pub lhs: f64,
    /// `(F(y) + m d (T−t)) / (m α)`.
    pub rhs: f64,
}

/// `∫|y'| ≤ (F(y) + m d (T−t)) / (m α)` with `m = inf Ψ` from the probes.
pub fn l1_lower_bound_check(
    lag: &Lagrangian,
    traj: &Trajectory,
    probes: &ProbeSet,
    quad: &QuadOptions,
) -> Result<L1BoundReport> {
    let m = verify_psi(lag, traj, probes).m_inf;
    l1_lower_bound_with(lag, traj, m, quad)
}

pub fn l1_lower_bound_with(lag: &Lagrangian, traj: &Trajectory, m_psi: f64, quad: &QuadOptions) -> Result<L1BoundReport> {
    let g = lag
        .growth()
        .ok_or_else(|| Error::Precondition("linear growth constants are missing".into()))?;
    if !(m_psi > 0.0) {
        return Err(Error::Precondition(format!("inf Ψ must be positive, got {m_psi}")));
    }
    let f = crate::energy::energy(lag, traj, quad)?.value;
    let lhs = traj.lp_norm(1.0, Target::Derivative, quad)?;
    let rhs = (f + m_psi * g.d * traj.interval().length()) / (m_psi * g.alpha);
    let tol = 1e-8 * rhs.abs().max(1.0);
    let verdict = if lhs <= rhs + tol {
        Verdict::Pass
    } else {
        Verdict::Falsified
    };
    Ok(L1BoundReport { verdict, lhs, rhs })
}

/// Step used by checkers that need a subgradient.
pub const SUBGRADIENT_STEP: f64 = DEFAULT_SUBGRADIENT_STEP;
