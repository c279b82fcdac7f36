//! Extended-valued Lagrangians `L(s, z, v) = Λ(s, z, v) Ψ(s, z)`.
//!
//! `Λ` is `+∞` exactly off its effective domain `I × D_Λ`; membership in
//! `D_Λ` is decided by an explicit predicate on `(z, v)`, never inferred
//! from the values of `Λ`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::bisect_predicate;
use crate::probes::{Probe, ProbeSet, Verdict};
use crate::trajectory::norm;

pub type LambdaFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync>;
pub type PsiFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
pub type DomainFn = Arc<dyn Fn(&[f64], &[f64]) -> bool + Send + Sync>;
pub type GradFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync>;

pub const DEFAULT_SUBGRADIENT_STEP: f64 = 1e-4;

/// Linear growth from below: `Λ(s, z, v) ≥ α|v| − d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub alpha: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub autonomous: bool,
    pub real_valued: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistanceKind {
    #[serde(rename = "e", alias = "euclidean")]
    Euclidean,
    #[serde(rename = "u", alias = "u_distance")]
    UDistance,
}

impl DistanceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DistanceKind::Euclidean => "e",
            DistanceKind::UDistance => "u",
        }
    }

    /// Distance between two triples; `+∞` for the velocity-only kind when
    /// the `(s, z)` parts differ.
    pub fn between(&self, a: &Probe, b: &Probe) -> f64 {
        let dv: Vec<f64> = a.v.iter().zip(&b.v).map(|(x, y)| y - x).collect();
        match self {
            DistanceKind::UDistance => {
                if a.s == b.s && a.z == b.z {
                    norm(&dv)
                } else {
                    f64::INFINITY
                }
            }
            DistanceKind::Euclidean => {
                let dz: f64 = a.z.iter().zip(&b.z).map(|(x, y)| (y - x) * (y - x)).sum();
                let dvv: f64 = dv.iter().map(|x| x * x).sum();
                ((b.s - a.s).powi(2) + dz + dvv).sqrt()
            }
        }
    }
}

/// Search parameters for distances to the domain complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceOptions {
    /// Bisection tolerance on the boundary crossing.
    pub tol: f64,
    /// Nothing farther than this is searched; beyond it the distance is `+∞`.
    pub radius: f64,
    /// Lattice points per axis for the Euclidean search.
    pub lattice: usize,
    /// Half width of the lattice box when no axis search hit the complement.
    pub box_half_width: f64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            tol: 1e-10,
            radius: 1e6,
            lattice: 64,
            box_half_width: 10.0,
        }
    }
}

#[derive(Clone)]
pub struct Lagrangian {
    dim: usize,
    lambda: LambdaFn,
    psi: PsiFn,
    domain: Option<DomainFn>,
    autonomous: bool,
    growth: Option<Growth>,
    grad_v: Option<GradFn>,
}

impl fmt::Debug for Lagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lagrangian")
            .field("dim", &self.dim)
            .field("flags", &self.flags())
            .field("growth", &self.growth)
            .finish()
    }
}

impl Lagrangian {
    pub fn new<L, P>(dim: usize, lambda: L, psi: P) -> Self
    where
        L: Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'static,
        P: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        Lagrangian {
            dim,
            lambda: Arc::new(lambda),
            psi: Arc::new(psi),
            domain: None,
            autonomous: false,
            growth: None,
            grad_v: None,
        }
    }

    /// Autonomous, real-valued `Λ(v)` with `Ψ ≡ 1`, for scalar problems.
    pub fn velocity_only<L>(lambda: L) -> Self
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Lagrangian::new(1, move |_, _, v| lambda(v[0]), |_, _| 1.0).autonomous(true)
    }

    /// Restricts the effective domain to `{(z, v) : member(z, v)}`.
    pub fn with_domain<D>(mut self, member: D) -> Self
    where
        D: Fn(&[f64], &[f64]) -> bool + Send + Sync + 'static,
    {
        self.domain = Some(Arc::new(member));
        self
    }

    pub fn autonomous(mut self, autonomous: bool) -> Self {
        self.autonomous = autonomous;
        self
    }

    pub fn with_growth(mut self, alpha: f64, d: f64) -> Self {
        self.growth = Some(Growth { alpha, d });
        self
    }

    /// Analytic `∇_v Λ`, used to cross-check the finite-difference `P`.
    pub fn with_grad_v<G>(mut self, grad: G) -> Self
    where
        G: Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad_v = Some(Arc::new(grad));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flags(&self) -> Flags {
        Flags {
            autonomous: self.autonomous,
            real_valued: self.domain.is_none(),
        }
    }

    pub fn is_real_valued(&self) -> bool {
        self.domain.is_none()
    }

    pub fn growth(&self) -> Option<Growth> {
        self.growth
    }

    pub fn in_domain(&self, z: &[f64], v: &[f64]) -> bool {
        match &self.domain {
            None => true,
            Some(member) => member(z, v),
        }
    }

    pub fn lambda(&self, s: f64, z: &[f64], v: &[f64]) -> f64 {
        if !self.in_domain(z, v) {
            return f64::INFINITY;
        }
        (self.lambda)(s, z, v)
    }

    pub fn psi(&self, s: f64, z: &[f64]) -> f64 {
        (self.psi)(s, z)
    }

    /// `Λ Ψ` with `0 · ∞ = 0`.
    pub fn density(&self, s: f64, z: &[f64], v: &[f64]) -> f64 {
        let psi = self.psi(s, z);
        if psi == 0.0 {
            return 0.0;
        }
        ext_mul(self.lambda(s, z, v), psi)
    }

    /// `Λ − v·∇_v Λ` from the analytic gradient, when one was supplied.
    pub fn analytic_p(&self, s: f64, z: &[f64], v: &[f64]) -> Option<f64> {
        let grad = self.grad_v.as_ref()?;
        let g = grad(s, z, v);
        let dot: f64 = g.iter().zip(v).map(|(a, b)| a * b).sum();
        Some(self.lambda(s, z, v) - dot)
    }

    /// Distance from `(s, z, v)` to `(I × D_Λ)^c`. The complement is a
    /// product with `I`, so `s` never contributes.
    pub fn dist_to_complement(
        &self,
        kind: DistanceKind,
        _s: f64,
        z: &[f64],
        v: &[f64],
        opts: &DistanceOptions,
    ) -> Result<f64> {
        if !self.in_domain(z, v) {
            return Err(Error::OutsideEffectiveDomain);
        }
        if self.is_real_valued() {
            return Ok(f64::INFINITY);
        }
        match kind {
            DistanceKind::UDistance => Ok(self.velocity_escape(z, v, opts)),
            DistanceKind::Euclidean => Ok(self.euclidean_escape(z, v, opts)),
        }
    }

    /// Smallest escape distance along a fixed set of velocity directions.
    fn velocity_escape(&self, z: &[f64], v: &[f64], opts: &DistanceOptions) -> f64 {
        let n = v.len();
        let mut best = f64::INFINITY;
        for dir in velocity_directions(v) {
            let outside = |r: f64| {
                let w: Vec<f64> = (0..n).map(|k| v[k] + r * dir[k]).collect();
                !self.in_domain(z, &w)
            };
            best = best.min(ray_escape(&outside, opts, best));
        }
        best
    }

    fn euclidean_escape(&self, z: &[f64], v: &[f64], opts: &DistanceOptions) -> f64 {
        let n = z.len();
        let point: Vec<f64> = z.iter().chain(v.iter()).copied().collect();
        let dim = point.len();
        let outside_at = |p: &[f64]| !self.in_domain(&p[..n], &p[n..]);
        let along = |dir: &[f64], r: f64| -> Vec<f64> { (0..dim).map(|k| point[k] + r * dir[k]).collect() };

        // axis searches first: they include the pure velocity directions,
        // so the result never exceeds the velocity-only distance
        let mut best = f64::INFINITY;
        for k in 0..dim {
            for sign in [1.0, -1.0] {
                let mut dir = vec![0.0; dim];
                dir[k] = sign;
                let outside = |r: f64| outside_at(&along(&dir, r));
                best = best.min(ray_escape(&outside, opts, best));
            }
        }

        let half = if best.is_finite() { best } else { opts.box_half_width };
        let consider = |target: Vec<f64>, best: &mut f64| {
            let diff: Vec<f64> = (0..dim).map(|k| target[k] - point[k]).collect();
            let len = norm(&diff);
            if len == 0.0 || len >= *best || !outside_at(&target) {
                return;
            }
            let dir: Vec<f64> = diff.iter().map(|x| x / len).collect();
            let outside = |r: f64| outside_at(&along(&dir, r));
            let (_, hi) = bisect_predicate(&outside, 0.0, len, false);
            *best = best.min(hi);
        };
        if dim == 2 {
            let m = opts.lattice.max(2);
            for i in 0..m {
                for j in 0..m {
                    let a = -half + 2.0 * half * i as f64 / (m - 1) as f64;
                    let b = -half + 2.0 * half * j as f64 / (m - 1) as f64;
                    consider(vec![point[0] + a, point[1] + b], &mut best);
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..opts.lattice * opts.lattice {
                let target = (0..dim).map(|k| point[k] + rng.random_range(-half..=half)).collect();
                consider(target, &mut best);
            }
        }
        best
    }

    /// Element of `∂_μ [Λ(s, z, v/μ) μ]` at `μ = 1` by difference quotients.
    ///
    /// Central when both `μ = 1 ± h` stay in the domain, one-sided on the
    /// interior side otherwise; a Richardson pass at `h/2` removes the
    /// leading error term.
    pub fn subgradient_p(&self, s: f64, z: &[f64], v: &[f64], h: f64) -> Result<f64> {
        if !(h > 0.0 && h < 0.5) {
            return Err(Error::Precondition(format!("step h must lie in (0, 0.5), got {h}")));
        }
        if !self.in_domain(z, v) {
            return Err(Error::OutsideEffectiveDomain);
        }
        let g = |mu: f64| {
            let w: Vec<f64> = v.iter().map(|x| x / mu).collect();
            ext_mul(self.lambda(s, z, &w), mu)
        };
        let g0 = self.lambda(s, z, v);
        let quotient = |h: f64| -> Option<f64> {
            let (gp, gm) = (g(1.0 + h), g(1.0 - h));
            match (gp.is_finite(), gm.is_finite()) {
                (true, true) => Some((gp - gm) / (2.0 * h)),
                (true, false) => Some((gp - g0) / h),
                (false, true) => Some((g0 - gm) / h),
                (false, false) => None,
            }
        };
        let central = g(1.0 + h).is_finite() && g(1.0 - h).is_finite();
        let coarse = quotient(h).ok_or(Error::DegenerateProbe(h))?;
        let Some(fine) = quotient(0.5 * h) else {
            return Ok(coarse);
        };
        let central_fine = g(1.0 + 0.5 * h).is_finite() && g(1.0 - 0.5 * h).is_finite();
        if central != central_fine {
            return Ok(fine);
        }
        // error is O(h²) for the central quotient, O(h) for one-sided
        Ok(if central {
            (4.0 * fine - coarse) / 3.0
        } else {
            2.0 * fine - coarse
        })
    }

    /// Midpoint convexity of `r ↦ Λ(s, z, r v)` and star-shapedness of the
    /// domain in `v`, on every probe that lies in the domain.
    pub fn structure_check(&self, probes: &ProbeSet) -> StructureReport {
        const R_GRID: [f64; 8] = [0.125, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0];
        const SHRINK: [f64; 6] = [1e-6, 0.1, 0.25, 0.5, 0.9, 1.0];
        let mut convex = StructureVerdict::pass();
        let mut star = StructureVerdict::pass();
        let scaled = |v: &[f64], r: f64| -> Vec<f64> { v.iter().map(|x| r * x).collect() };
        for p in probes.iter() {
            if !self.in_domain(&p.z, &p.v) {
                continue;
            }
            if convex.verdict == Verdict::Pass {
                'pairs: for (i, &r1) in R_GRID.iter().enumerate() {
                    for &r2 in &R_GRID[i + 1..] {
                        let a = self.lambda(p.s, &p.z, &scaled(&p.v, r1));
                        let b = self.lambda(p.s, &p.z, &scaled(&p.v, r2));
                        if !(a.is_finite() && b.is_finite()) {
                            continue;
                        }
                        let m = self.lambda(p.s, &p.z, &scaled(&p.v, 0.5 * (r1 + r2)));
                        let chord = 0.5 * (a + b);
                        if !(m <= chord + 1e-9 * chord.abs().max(1.0)) {
                            convex = StructureVerdict::falsified(p.clone(), m - chord);
                            break 'pairs;
                        }
                    }
                }
            }
            if star.verdict == Verdict::Pass {
                for &r in &SHRINK {
                    if !self.in_domain(&p.z, &scaled(&p.v, r)) {
                        star = StructureVerdict::falsified(p.clone(), r);
                        break;
                    }
                }
            }
            if convex.verdict != Verdict::Pass && star.verdict != Verdict::Pass {
                break;
            }
        }
        StructureReport {
            radially_convex: convex,
            star_shaped: star,
        }
    }
}

/// `a · b` on `[0, +∞]` with `0 · ∞ = 0`.
pub fn ext_mul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        if a.is_nan() || b.is_nan() {
            return f64::NAN;
        }
        0.0
    } else {
        a * b
    }
}

fn velocity_directions(v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let mut dirs = Vec::new();
    let len = norm(v);
    if len > 0.0 && n > 1 {
        let unit: Vec<f64> = v.iter().map(|x| x / len).collect();
        dirs.push(unit.iter().map(|x| -x).collect());
        dirs.push(unit);
    }
    for k in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[k] = sign;
            dirs.push(e);
        }
    }
    let diag = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut e = vec![0.0; n];
                e[i] = a * diag;
                e[j] = b * diag;
                dirs.push(e);
            }
        }
    }
    dirs
}

/// Distance along a ray to the first point where `outside` holds: doubling
/// from `tol` until a hit (or `min(radius, cap)` is passed), then bisection.
fn ray_escape<F: Fn(f64) -> bool>(outside: &F, opts: &DistanceOptions, cap: f64) -> f64 {
    let limit = opts.radius.min(cap);
    let mut inside_r = 0.0;
    let mut r = opts.tol;
    loop {
        if r > limit {
            return f64::INFINITY;
        }
        if outside(r) {
            let (_, hi) = bisect_predicate(outside, inside_r, r, false);
            return hi;
        }
        inside_r = r;
        r *= 2.0;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureVerdict {
    pub verdict: Verdict,
    pub witness: Option<Probe>,
    /// Convexity defect, or the shrink factor that left the domain.
    pub statistic: Option<f64>,
}

impl StructureVerdict {
    fn pass() -> Self {
        StructureVerdict {
            verdict: Verdict::Pass,
            witness: None,
            statistic: None,
        }
    }

    fn falsified(witness: Probe, statistic: f64) -> Self {
        StructureVerdict {
            verdict: Verdict::Falsified,
            witness: Some(witness),
            statistic: Some(statistic),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub radially_convex: StructureVerdict,
    pub star_shaped: StructureVerdict,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;
    use crate::probes::ProbeConfig;

    fn alberti() -> Lagrangian {
        Lagrangian::new(1, |_, _, _| 0.0, |_, _| 1.0)
            .with_domain(|z, v| z[0] >= 0.0 && z[0] < 1.0 && v[0] <= 0.5 / (1.0 - z[0]))
            .autonomous(true)
    }

    #[test]
    fn product_convention() {
        let mania = Lagrangian::new(1, |_, _, v| v[0].powi(6), |s, z| (z[0].powi(3) - s).powi(2));
        assert_eq!(mania.density(0.0, &[1.0], &[1.0]), 1.0);
        assert_eq!(mania.density(0.125, &[0.5], &[1e300]), 0.0);
        assert_eq!(alberti().density(0.0, &[0.5], &[2.0]), f64::INFINITY);
        assert_eq!(alberti().density(0.0, &[0.5], &[0.5]), 0.0);
        assert_eq!(ext_mul(0.0, f64::INFINITY), 0.0);
    }

    #[test]
    fn u_distance_on_alberti() {
        let opts = DistanceOptions::default();
        let d = alberti()
            .dist_to_complement(DistanceKind::UDistance, 0.0, &[0.0], &[0.0], &opts)
            .unwrap();
        assert!((d - 0.5).abs() < 1e-10, "{d}");
        let d = alberti()
            .dist_to_complement(DistanceKind::UDistance, 0.0, &[0.0], &[0.5], &opts)
            .unwrap();
        assert!(d < 1e-10, "{d}");
        let err = alberti().dist_to_complement(DistanceKind::UDistance, 0.0, &[0.0], &[1.0], &opts);
        assert_eq!(err, Err(Error::OutsideEffectiveDomain));
    }

    #[test]
    fn real_valued_has_no_complement() {
        let l = Lagrangian::velocity_only(|v| v * v);
        let d = l
            .dist_to_complement(DistanceKind::Euclidean, 0.0, &[0.0], &[3.0], &DistanceOptions::default())
            .unwrap();
        assert_eq!(d, f64::INFINITY);
    }

    #[test]
    fn euclidean_sees_the_state_boundary() {
        // Dom = {|z| ≤ 1}: (0, 1) is at Euclidean distance 1 but infinitely
        // far in velocity-only distance
        let l = Lagrangian::velocity_only(|v| v * v).with_domain(|z, _| z[0].abs() <= 1.0);
        let opts = DistanceOptions::default();
        let de = l.dist_to_complement(DistanceKind::Euclidean, 0.0, &[0.0], &[1.0], &opts).unwrap();
        let du = l.dist_to_complement(DistanceKind::UDistance, 0.0, &[0.0], &[1.0], &opts).unwrap();
        assert!((de - 1.0).abs() < 1e-9, "{de}");
        assert_eq!(du, f64::INFINITY);
    }

    #[test]
    fn subgradient_examples() {
        let h = DEFAULT_SUBGRADIENT_STEP;
        let sq = Lagrangian::velocity_only(|v| v * v);
        assert!((sq.subgradient_p(0.0, &[0.0], &[3.0], h).unwrap() + 9.0).abs() < 1e-6);
        let abs = Lagrangian::velocity_only(f64::abs);
        assert!(abs.subgradient_p(0.0, &[0.0], &[-2.5], h).unwrap().abs() < 1e-9);
        let six = Lagrangian::velocity_only(|v| v.powi(6));
        assert!((six.subgradient_p(0.0, &[0.0], &[1.0], h).unwrap() + 5.0).abs() < 1e-6);
        assert!(sq.subgradient_p(0.0, &[0.0], &[1.0], 0.7).is_err());
    }

    #[test]
    fn one_sided_quotient_on_the_domain_boundary() {
        // Λ = 1/(1−|v|) at the edge of the unit ball: only μ > 1 is inside
        let l = Lagrangian::velocity_only(|v| 1.0 / (1.0 - v.abs())).with_domain(|_, v| v[0].abs() < 1.0);
        let p = l.subgradient_p(0.0, &[0.0], &[0.99995], 1e-4);
        assert!(p.is_ok());
        let none = Lagrangian::velocity_only(|_| 0.0).with_domain(|_, v| v[0] == 1.0);
        assert_eq!(none.subgradient_p(0.0, &[0.0], &[1.0], 1e-4), Err(Error::DegenerateProbe(1e-4)));
    }

    #[test]
    fn structure_examples() {
        let cfg = ProbeConfig::default().with_count(2000);
        let probes = ProbeSet::in_box(Interval::unit(), &[(0.0, 0.99)], &cfg);
        let sq = Lagrangian::velocity_only(|v| v * v).structure_check(&probes);
        assert_eq!(sq.radially_convex.verdict, Verdict::Pass);
        assert_eq!(sq.star_shaped.verdict, Verdict::Pass);
        let root = Lagrangian::velocity_only(|v| v.abs().sqrt()).structure_check(&probes);
        assert_eq!(root.radially_convex.verdict, Verdict::Falsified);
        assert!(root.radially_convex.witness.is_some());
        let al = alberti().structure_check(&probes);
        assert_eq!(al.star_shaped.verdict, Verdict::Pass);
        assert_eq!(al.radially_convex.verdict, Verdict::Pass);
    }
}
