//! Seeded sweeps over the invariants of the reparametrization and of the
//! Lagrangian helpers. Each returns a one-line summary, or the first
//! counterexample found.

use std::collections::BTreeMap;

use lavgap::lagrangian::{DistanceKind, DistanceOptions, Lagrangian};
use lavgap::problems::{custom, get_example, ProblemSpec};
use lavgap::quadrature::integrate;
use lavgap::reparam::{omega_mu, reparametrize_at, Anchor, TimeChange, Tuning};
use lavgap::{QuadOptions, Target, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PROBES: usize = 10_000;

pub type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn power_law(a: f64, q: f64) -> ProblemSpec {
    let params = BTreeMap::from([("a".to_string(), a), ("q".to_string(), q)]);
    custom("power_law", &params).expect("valid parameters")
}

/// Curves with their single-endpoint anchor.
fn curves() -> Vec<(ProblemSpec, Anchor)> {
    vec![
        (get_example("mania").unwrap(), Anchor::Initial),
        (get_example("alberti").unwrap(), Anchor::Final),
        (get_example("baseline").unwrap(), Anchor::Initial),
        (power_law(0.3, 1.0), Anchor::Initial),
        (power_law(0.9, 3.0), Anchor::Final),
    ]
}

pub struct Built {
    pub label: String,
    pub spec: ProblemSpec,
    pub anchor: Anchor,
    pub nu: f64,
    pub mu: Option<f64>,
    pub eps: f64,
    pub tc: TimeChange,
    pub y_nu: Trajectory,
    pub plan: lavgap::reparam::ReparamPlan,
}

/// A spread of built time changes: single-endpoint ones for every curve and
/// two-endpoint ones for the curves that admit them.
pub fn built_fixtures() -> Vec<Built> {
    let mut out = Vec::new();
    let mut push = |spec: &ProblemSpec, anchor: Anchor, nu: f64, tuning: Tuning| {
        let (plan, tc, y_nu) = reparametrize_at(&spec.trajectory, &spec.lagrangian, anchor, nu, &tuning)
            .unwrap_or_else(|e| panic!("{} {anchor:?} nu={nu}: {e}", spec.name));
        out.push(Built {
            label: format!("{}/{}/nu={nu}/mu={:?}", spec.name, anchor.as_str(), plan.mu),
            spec: spec.clone(),
            anchor,
            nu,
            mu: plan.mu,
            eps: plan.eps_nu,
            tc,
            y_nu,
            plan,
        });
    };
    for (spec, anchor) in curves() {
        for nu in [1.5, 4.0, 32.0] {
            push(&spec, anchor, nu, Tuning::default());
        }
    }
    let baseline = get_example("baseline").unwrap();
    for mu in [0.6, 0.75, 0.9] {
        for nu in [4.0, 16.0, 256.0] {
            push(&baseline, Anchor::Both, nu, Tuning::default().with_lambda_bar(2.0).with_mu(mu));
        }
    }
    let mania = get_example("mania").unwrap();
    for nu in [2.0, 8.0] {
        push(&mania, Anchor::Both, nu, Tuning::default().with_lambda_bar(2.0));
    }
    let steep = power_law(0.3, 1.0);
    push(&steep, Anchor::Both, 8.0, Tuning::default().with_lambda_bar(3.0).with_mu(0.5));
    out
}

fn deriv_l1(spec: &ProblemSpec) -> f64 {
    spec.trajectory
        .lp_norm(1.0, Target::Derivative, &QuadOptions::default())
        .expect("finite norm")
}

/// `ε_ν ≤ ‖y'‖₁/ν` and `|S_ν| ≤ ‖y'‖₁/ν` for log-uniform `ν`.
pub fn eps_and_fast_set_bounds(seed: u64, count: usize) -> Outcome {
    let curves = curves();
    let norms: Vec<f64> = curves.iter().map(|(s, _)| deriv_l1(s)).collect();
    let mut rng = rng(seed);
    for _ in 0..count {
        let k = rng.random_range(0..curves.len());
        let (spec, anchor) = &curves[k];
        let nu = log_uniform(&mut rng, 0.25, 1e6);
        let (plan, _, _) = reparametrize_at(&spec.trajectory, &spec.lagrangian, *anchor, nu, &Tuning::default())
            .map_err(|e| format!("{} nu={nu}: {e}", spec.name))?;
        let bound = norms[k] / nu * (1.0 + 1e-9);
        if plan.eps_nu > bound {
            return Err(format!("{} nu={nu}: eps {} > {bound}", spec.name, plan.eps_nu));
        }
        if plan.s_nu.measure() > bound {
            return Err(format!("{} nu={nu}: |S| {} > {bound}", spec.name, plan.s_nu.measure()));
        }
    }
    Ok(format!("{count} draws of (curve, nu)"))
}

/// `{|y'| ≥ c₂} ⊆ {|y'| ≥ c₁}` whenever `c₁ ≤ c₂`.
pub fn superlevel_antitone(seed: u64, count: usize) -> Outcome {
    let curves = curves();
    let mut rng = rng(seed);
    for _ in 0..count {
        let (spec, _) = &curves[rng.random_range(0..curves.len())];
        let a = log_uniform(&mut rng, 0.05, 1e4);
        let b = log_uniform(&mut rng, 0.05, 1e4);
        let (lo, hi) = (a.min(b), a.max(b));
        let big = spec.trajectory.superlevel_set(lo).map_err(|e| e.to_string())?;
        let small = spec.trajectory.superlevel_set(hi).map_err(|e| e.to_string())?;
        if !small.is_subset_of(&big) {
            return Err(format!("{}: level {hi} set {:?} not inside level {lo} set {:?}", spec.name, small, big));
        }
    }
    Ok(format!("{count} threshold pairs"))
}

fn sample_points(rng: &mut ChaCha8Rng, fixtures: &[Built], count: usize) -> Vec<(usize, f64)> {
    (0..count)
        .map(|_| {
            let k = rng.random_range(0..fixtures.len());
            let dom = fixtures[k].tc.domain();
            (k, rng.random_range(dom.start()..=dom.end()))
        })
        .collect()
}

/// `|φ_ν(τ) − τ| ≤ 2ε_ν` on the whole interval.
pub fn phi_close_to_identity(fixtures: &[Built], seed: u64, count: usize) -> Outcome {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for (k, tau) in sample_points(&mut rng, fixtures, count) {
        let b = &fixtures[k];
        let phi = b.tc.forward(tau).map_err(|e| format!("{}: {e}", b.label))?;
        let slack = (phi - tau).abs() - 2.0 * b.eps;
        if slack > 1e-12 {
            return Err(format!("{} tau={tau}: |phi-tau| = {} > 2 eps = {}", b.label, (phi - tau).abs(), 2.0 * b.eps));
        }
        worst = worst.max((phi - tau).abs() / (2.0 * b.eps).max(f64::MIN_POSITIVE));
    }
    Ok(format!("{count} points over {} time changes, max ratio {worst:.3}", fixtures.len()))
}

/// Difference quotients of `ψ_ν` stay below `1/μ` (two end points pinned)
/// or `1` (one end point pinned).
pub fn inverse_lipschitz(fixtures: &[Built], seed: u64, count: usize) -> Outcome {
    let mut rng = rng(seed);
    for _ in 0..count {
        let b = &fixtures[rng.random_range(0..fixtures.len())];
        // ψ lives on the part of the image that lies in I
        let (lo, hi) = (
            b.tc.range().start().max(b.tc.domain().start()),
            b.tc.range().end().min(b.tc.domain().end()),
        );
        let s1 = rng.random_range(lo..hi);
        let h = log_uniform(&mut rng, 1e-6, 0.25).min(hi - s1);
        if !(h > 0.0) {
            continue;
        }
        let s2 = s1 + h;
        let q = (b.tc.invert(s2).map_err(|e| e.to_string())? - b.tc.invert(s1).map_err(|e| e.to_string())?) / h;
        let cap = match b.mu {
            Some(mu) => 1.0 / mu,
            None => 1.0,
        };
        if q > cap + 1e-8 || q < 0.0 {
            return Err(format!("{} [{s1}, {s2}]: quotient {q} outside [0, {cap}]", b.label));
        }
        let slope = b.tc.inverse_slope(s1);
        if slope > cap * (1.0 + 1e-12) {
            return Err(format!("{} s={s1}: inverse slope {slope} > {cap}", b.label));
        }
    }
    Ok(format!("{count} quotients"))
}

/// `|y_ν'| ≤ ν` almost everywhere once `ν ≥ λ`.
pub fn speed_bounded_by_nu(fixtures: &[Built], seed: u64, count: usize) -> Outcome {
    let mut rng = rng(seed);
    let eligible: Vec<&Built> = fixtures
        .iter()
        .filter(|b| b.plan.lambda_bar.is_none_or(|l| l <= b.nu))
        .collect();
    for _ in 0..count {
        let b = eligible[rng.random_range(0..eligible.len())];
        let dom = b.y_nu.interval();
        let s = rng.random_range(dom.start()..dom.end());
        let speed = b.y_nu.speed(s);
        if !(speed <= b.nu * (1.0 + 1e-9)) {
            return Err(format!("{} s={s}: |y_nu'| = {speed} > nu", b.label));
        }
    }
    Ok(format!("{count} points over {} time changes", eligible.len()))
}

/// `y_ν(I) ⊆ y(I)`; the registered curves are monotone, so `y(I)` is the
/// interval between the end values.
pub fn image_containment(fixtures: &[Built], seed: u64, count: usize) -> Outcome {
    let mut rng = rng(seed);
    for _ in 0..count {
        let b = &fixtures[rng.random_range(0..fixtures.len())];
        let dom = b.y_nu.interval();
        let (ya, yb) = (b.spec.trajectory.value1(dom.start()), b.spec.trajectory.value1(dom.end()));
        let s = rng.random_range(dom.start()..=dom.end());
        let z = b.y_nu.value1(s);
        if z < ya.min(yb) || z > ya.max(yb) {
            return Err(format!("{} s={s}: y_nu = {z} outside [{ya}, {yb}]", b.label));
        }
    }
    Ok(format!("{count} points"))
}

/// `|φ(Σ_ν)| = μ|Σ_ν|` and `|φ(S_ν)| = ∫_{S_ν} |y'|/ν`.
pub fn measure_pushforward(fixtures: &[Built]) -> Outcome {
    let image = |b: &Built, set: &lavgap::IntervalSet| -> Result<f64, String> {
        set.components()
            .iter()
            .map(|&(a, c)| Ok(b.tc.forward(c).map_err(|e| e.to_string())? - b.tc.forward(a).map_err(|e| e.to_string())?))
            .sum()
    };
    for b in fixtures {
        if let Some(mu) = b.mu {
            let got = image(b, &b.plan.sigma_nu)?;
            let want = mu * b.plan.sigma_nu.measure();
            if (got - want).abs() > 1e-9 {
                return Err(format!("{}: |phi(Sigma)| = {got}, mu|Sigma| = {want}", b.label));
            }
        }
        let got = image(b, &b.plan.s_nu)?;
        // the registered curves are monotone, so ∫|y'| over a component is
        // the change of y across it
        let traj = &b.spec.trajectory;
        let want: f64 = b.plan.s_nu.components().iter().map(|&(a, c)| (traj.value1(c) - traj.value1(a)).abs() / b.nu).sum();
        if (got - want).abs() > 1e-9 {
            return Err(format!("{}: |phi(S)| = {got}, integral = {want}", b.label));
        }
    }
    Ok(format!("{} time changes", fixtures.len()))
}

/// `|Ω_μ| ≥ (T − t) − ‖y'‖₁/(μλ)`.
pub fn omega_measure_bound(seed: u64, count: usize) -> Outcome {
    let curves = curves();
    let norms: Vec<f64> = curves.iter().map(|(s, _)| deriv_l1(s)).collect();
    let tuning = Tuning::default();
    let mut rng = rng(seed);
    for _ in 0..count {
        let k = rng.random_range(0..curves.len());
        let traj = &curves[k].0.trajectory;
        let mu = rng.random_range(0.01..1.0);
        let lambda = log_uniform(&mut rng, 0.1, 1e3);
        let set = omega_mu(traj, mu, lambda, &tuning);
        let want = traj.interval().length() - norms[k] / (mu * lambda);
        if set.measure() < want - 1e-9 {
            return Err(format!("{} mu={mu} lambda={lambda}: |Omega| = {} < {want}", curves[k].0.name, set.measure()));
        }
    }
    Ok(format!("{count} draws of (curve, mu, lambda)"))
}

/// Convex velocity Lagrangians, some extended-valued, and a representative
/// scale for the sampled velocities.
pub fn convex_lagrangians() -> Vec<(&'static str, Lagrangian, f64)> {
    vec![
        ("v^2", Lagrangian::velocity_only(|v| v * v), 4.0),
        ("|v|", Lagrangian::velocity_only(f64::abs), 4.0),
        ("v^6", Lagrangian::velocity_only(|v| v.powi(6)), 2.0),
        ("|v|^1.5+1", Lagrangian::velocity_only(|v| v.abs().powf(1.5) + 1.0), 4.0),
        ("e^v", Lagrangian::velocity_only(f64::exp), 3.0),
        (
            "barrier",
            Lagrangian::velocity_only(|v| 1.0 / (1.0 - v.abs())).with_domain(|_, v| v[0].abs() < 1.0),
            1.0,
        ),
        ("alberti", get_example("alberti").unwrap().lagrangian, 1.0),
    ]
}

fn domain_sample(rng: &mut ChaCha8Rng, lag: &Lagrangian, scale: f64) -> Option<(f64, f64, f64)> {
    for _ in 0..64 {
        let s = rng.random_range(0.0..1.0);
        let z = rng.random_range(0.0..1.0);
        let v = rng.random_range(-scale..scale);
        if lag.in_domain(&[z], &[v]) {
            return Some((s, z, v));
        }
    }
    None
}

/// `Λ(v/μ)μ − Λ(v) ≥ P(μ − 1)` with `P` from the finite-difference
/// subgradient, for `μ ∈ {1/4, 1/2, 2, 4}` whenever `v/μ` stays in the domain.
pub fn subgradient_inequality(seed: u64, count: usize) -> Outcome {
    let lags = convex_lagrangians();
    let mut rng = rng(seed);
    let mut checked = 0usize;
    for _ in 0..count {
        let (name, lag, scale) = &lags[rng.random_range(0..lags.len())];
        let Some((s, z, v)) = domain_sample(&mut rng, lag, *scale) else {
            continue;
        };
        let p = lag
            .subgradient_p(s, &[z], &[v], lavgap::lagrangian::DEFAULT_SUBGRADIENT_STEP)
            .map_err(|e| format!("{name} v={v}: {e}"))?;
        let base = lag.lambda(s, &[z], &[v]);
        for mu in [0.25, 0.5, 2.0, 4.0] {
            let w = v / mu;
            if !lag.in_domain(&[z], &[w]) {
                continue;
            }
            let lhs = lag.lambda(s, &[z], &[w]) * mu - base;
            let rhs = p * (mu - 1.0);
            let tol = 1e-6 * (1.0 + lhs.abs().max(rhs.abs()));
            if lhs < rhs - tol {
                return Err(format!("{name} s={s} z={z} v={v} mu={mu}: {lhs} < {rhs}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (probe, mu) pairs over {} Lagrangians", lags.len()))
}

/// `dist_u ≥ dist_e`, and both equal `|v₂ − v₁|` for triples sharing `(s, z)`.
pub fn distance_ordering(seed: u64, count: usize) -> Outcome {
    let lags: Vec<_> = convex_lagrangians().into_iter().filter(|(_, l, _)| !l.is_real_valued()).collect();
    let opts = DistanceOptions::default();
    let mut rng = rng(seed);
    for _ in 0..count {
        let (name, lag, scale) = &lags[rng.random_range(0..lags.len())];
        let Some((s, z, v)) = domain_sample(&mut rng, lag, *scale) else {
            continue;
        };
        let du = lag.dist_to_complement(DistanceKind::UDistance, s, &[z], &[v], &opts).map_err(|e| e.to_string())?;
        let de = lag.dist_to_complement(DistanceKind::Euclidean, s, &[z], &[v], &opts).map_err(|e| e.to_string())?;
        if de > du + 1e-9 {
            return Err(format!("{name} (s={s}, z={z}, v={v}): dist_e {de} > dist_u {du}"));
        }
        let a = lavgap::probes::Probe::scalar(s, z, v);
        let v2 = rng.random_range(-*scale..*scale);
        let b = lavgap::probes::Probe::scalar(s, z, v2);
        for kind in [DistanceKind::UDistance, DistanceKind::Euclidean] {
            let d = kind.between(&a, &b);
            if (d - (v2 - v).abs()).abs() > 1e-15 {
                return Err(format!("{kind:?} between shared-(s,z) triples: {d} vs {}", (v2 - v).abs()));
            }
        }
    }
    Ok(format!("{count} triples"))
}

/// `∫_{φ(A)} f = ∫_A f(φ) φ'` for a closed-form bijection and for built
/// time changes, with nonnegative `f` including an integrable singularity.
pub fn change_of_variables(fixtures: &[Built], seed: u64, count: usize) -> Outcome {
    let quad = QuadOptions::default();
    let fs: [(&str, fn(f64) -> f64); 3] = [
        ("y^2+sin^2", |y| y * y + (3.0 * y).sin().powi(2)),
        ("1/sqrt", |y| 1.0 / y.sqrt()),
        ("exp", f64::exp),
    ];
    let mut rng = rng(seed);
    for i in 0..count {
        let (fname, f) = fs[rng.random_range(0..fs.len())];
        let (lhs, rhs, label) = if i % 2 == 0 {
            // φ(x) = x + x²/2 maps [0, 1] onto [0, 3/2]
            let a = rng.random_range(0.0..1.0);
            let b = rng.random_range(a..=1.0);
            let phi = |x: f64| x + 0.5 * x * x;
            let lhs = integrate(f, phi(a), phi(b), &[], &quad).value;
            let rhs = integrate(|x| f(phi(x)) * (1.0 + x), a, b, &[], &quad).value;
            (lhs, rhs, format!("x+x^2/2 on [{a}, {b}]"))
        } else {
            let bf = &fixtures[rng.random_range(0..fixtures.len())];
            let dom = bf.tc.domain();
            let a = rng.random_range(dom.start()..dom.end());
            let b = rng.random_range(a..=dom.end());
            let (pa, pb) = (bf.tc.forward(a).unwrap(), bf.tc.forward(b).unwrap());
            let inner: Vec<f64> = bf.tc.breakpoints().into_iter().chain(bf.spec.trajectory.cuts()).collect();
            let outer: Vec<f64> = bf.tc.pieces().iter().flat_map(|p| [p.phi.0, p.phi.1]).collect();
            // shift away from 0 so that the singular integrand stays integrable on every piece
            let g = |y: f64| f(y + 1e-3);
            let lhs = integrate(g, pa, pb, &outer, &quad).value;
            let rhs = integrate(|t| g(bf.tc.forward(t).unwrap()) * bf.tc.slope(t), a, b, &inner, &quad).value;
            (lhs, rhs, format!("{} on [{a}, {b}]", bf.label))
        };
        if (lhs - rhs).abs() > 1e-8 * (1.0 + lhs.abs()) {
            return Err(format!("{fname} {label}: {lhs} vs {rhs}"));
        }
    }
    Ok(format!("{count} sets"))
}

/// `‖f∘φ_ν − f‖₁ → 0` for `f = 1_{[1/2, 1]}` along `ν = 4, 8, …, 4096`.
/// Returns the last distance; the sequence must be nonincreasing and end
/// below `10⁻³`.
pub fn step_function_composition() -> Outcome {
    let spec = get_example("baseline").unwrap();
    let quad = QuadOptions::default();
    let tuning = Tuning::default().with_lambda_bar(2.0).with_mu(0.75);
    let mut prev = f64::INFINITY;
    let mut last = f64::NAN;
    let f = |x: f64| -> f64 { if x >= 0.5 { 1.0 } else { 0.0 } };
    for k in 2..=12 {
        let nu = 2f64.powi(k);
        let (_, tc, _) = reparametrize_at(&spec.trajectory, &spec.lagrangian, Anchor::Both, nu, &tuning)
            .map_err(|e| e.to_string())?;
        let jump = tc.invert(0.5).map_err(|e| e.to_string())?;
        let mut cuts = tc.breakpoints();
        cuts.extend([0.5, jump]);
        let d = integrate(|t| (f(tc.forward(t).unwrap()) - f(t)).abs(), 0.0, 1.0, &cuts, &quad).value;
        if d > prev + 1e-12 {
            return Err(format!("nu={nu}: distance {d} grew from {prev}"));
        }
        prev = d;
        last = d;
    }
    if last < 1e-3 {
        Ok(format!("distance {last:.3e} at nu=4096"))
    } else {
        Err(format!("distance {last:.3e} at nu=4096 is not below 1e-3"))
    }
}
