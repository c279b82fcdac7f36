use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{bisect_predicate, Interval};
use crate::quadrature::integrate;
use crate::trajectory::Trajectory;

use super::plan::{piece_arc_length, ReparamPlan};
use super::{Anchor, Tuning};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceKind {
    /// `φ' = 1`.
    Unit,
    /// `φ' = μ` on the slow-down set.
    Slow { mu: f64 },
    /// `φ' = |y'|/ν` on the fast set.
    Scaled { nu: f64 },
}

/// One monotone piece of `φ`: `[tau.0, tau.1]` is mapped onto
/// `[phi.0, phi.1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Piece {
    pub kind: PieceKind,
    pub tau: (f64, f64),
    pub phi: (f64, f64),
}

impl Piece {
    fn ratio(&self) -> f64 {
        (self.phi.1 - self.phi.0) / (self.tau.1 - self.tau.0)
    }
}

/// The piecewise time change `φ_ν` together with the curve it was built
/// for, so that scaled pieces can be evaluated and inverted.
#[derive(Debug, Clone)]
pub struct TimeChange {
    anchor: Anchor,
    pieces: Vec<Piece>,
    domain: Interval,
    range: Interval,
    traj: Trajectory,
    tuning: Tuning,
}

pub fn build_time_change(plan: &ReparamPlan, traj: &Trajectory, tuning: &Tuning) -> Result<TimeChange> {
    let domain = traj.interval();
    let (t0, t1) = (domain.start(), domain.end());

    // fast pieces split wherever y' may jump, slow pieces, then unit gaps
    let mut marked: Vec<(f64, f64, PieceKind)> = plan
        .s_nu
        .pieces_split_at(&traj.cuts())
        .into_iter()
        .map(|(a, b)| (a, b, PieceKind::Scaled { nu: plan.nu }))
        .collect();
    if let Some(mu) = plan.mu {
        marked.extend(
            plan.sigma_nu
                .components()
                .iter()
                .map(|&(a, b)| (a, b, PieceKind::Slow { mu })),
        );
    }
    marked.retain(|&(a, b, _)| b > a);
    marked.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut spans = Vec::with_capacity(2 * marked.len() + 1);
    let mut cursor = t0;
    for (a, b, kind) in marked {
        if a < cursor {
            return Err(Error::Construction(format!("overlapping pieces at {a}")));
        }
        if a > cursor {
            spans.push((cursor, a, PieceKind::Unit));
        }
        spans.push((a, b, kind));
        cursor = b;
    }
    if cursor < t1 {
        spans.push((cursor, t1, PieceKind::Unit));
    }

    let mut lengths = Vec::with_capacity(spans.len());
    for &(a, b, kind) in &spans {
        let len = match kind {
            PieceKind::Unit => b - a,
            PieceKind::Slow { mu } => mu * (b - a),
            PieceKind::Scaled { nu } => piece_arc_length(traj, a, b, tuning)? / nu,
        };
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::Construction(format!(
                "nonpositive slope on [{a}, {b}] (image length {len})"
            )));
        }
        lengths.push(len);
    }

    let n = spans.len();
    let mut marks = vec![0.0; n + 1];
    match plan.anchor {
        Anchor::Initial | Anchor::Both => {
            marks[0] = t0;
            for k in 0..n {
                marks[k + 1] = marks[k] + lengths[k];
            }
            if plan.anchor == Anchor::Both {
                let drift = marks[n] - t1;
                if drift.abs() > 1e-9 * domain.length().max(1.0) {
                    return Err(Error::Construction(format!(
                        "time change misses the final time by {drift:e}"
                    )));
                }
                marks[n] = t1;
            }
        }
        Anchor::Final => {
            marks[n] = t1;
            for k in (0..n).rev() {
                marks[k] = marks[k + 1] - lengths[k];
            }
        }
    }
    if marks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Construction("time change is not strictly increasing".into()));
    }

    let pieces: Vec<Piece> = spans
        .iter()
        .enumerate()
        .map(|(k, &(a, b, kind))| Piece {
            kind,
            tau: (a, b),
            phi: (marks[k], marks[k + 1]),
        })
        .collect();
    let range = Interval::new(marks[0], marks[n])?;
    Ok(TimeChange {
        anchor: plan.anchor,
        pieces,
        domain,
        range,
        traj: traj.clone(),
        tuning: tuning.clone(),
    })
}

impl TimeChange {
    pub fn anchor(&self) -> Anchor {
        self.anchor
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn range(&self) -> Interval {
        self.range
    }

    /// Images `φ(τ_k)` of the piece boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.pieces.iter().map(|p| p.phi.0).collect();
        if let Some(last) = self.pieces.last() {
            out.push(last.phi.1);
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.pieces.iter().all(|p| p.kind == PieceKind::Unit) && self.range == self.domain
    }

    fn piece_at_tau(&self, tau: f64) -> &Piece {
        let idx = self.pieces.partition_point(|p| p.tau.1 < tau);
        &self.pieces[idx.min(self.pieces.len() - 1)]
    }

    fn piece_at_phi(&self, s: f64) -> &Piece {
        let idx = self.pieces.partition_point(|p| p.phi.1 < s);
        &self.pieces[idx.min(self.pieces.len() - 1)]
    }

    /// `φ(τ)`.
    pub fn forward(&self, tau: f64) -> Result<f64> {
        self.domain.check(tau)?;
        let p = self.piece_at_tau(tau);
        if tau <= p.tau.0 {
            return Ok(p.phi.0);
        }
        if tau >= p.tau.1 {
            return Ok(p.phi.1);
        }
        let value = match p.kind {
            PieceKind::Unit | PieceKind::Slow { .. } => p.phi.0 + (tau - p.tau.0) * p.ratio(),
            PieceKind::Scaled { .. } => {
                let whole = self.image_fraction(p, tau);
                p.phi.0 + whole * (p.phi.1 - p.phi.0)
            }
        };
        Ok(value.clamp(p.phi.0, p.phi.1))
    }

    /// Fraction of a scaled piece's arc length covered at `tau`.
    fn image_fraction(&self, p: &Piece, tau: f64) -> f64 {
        let traj = &self.traj;
        if traj.is_scalar() {
            let (ya, yb) = (traj.value1(p.tau.0), traj.value1(p.tau.1));
            return ((traj.value1(tau) - ya) / (yb - ya)).clamp(0.0, 1.0);
        }
        let cuts = traj.cuts();
        let part = integrate(|s| traj.speed(s), p.tau.0, tau, &cuts, &self.tuning.quad).value;
        let whole = integrate(|s| traj.speed(s), p.tau.0, p.tau.1, &cuts, &self.tuning.quad).value;
        (part / whole).clamp(0.0, 1.0)
    }

    /// `φ'(τ)` away from piece boundaries.
    pub fn slope(&self, tau: f64) -> f64 {
        let p = self.piece_at_tau(tau);
        match p.kind {
            PieceKind::Unit => 1.0,
            PieceKind::Slow { mu } => mu,
            PieceKind::Scaled { nu } => self.traj.speed(tau) / nu,
        }
    }

    /// `ψ(s) = φ^{-1}(s)` for `s` in the range of `φ` and in `I`. Affine
    /// pieces are inverted in closed form, scaled pieces through the
    /// registered inverse of `y` or by bisection to full precision.
    pub fn invert(&self, s: f64) -> Result<f64> {
        self.range.check(s)?;
        self.domain.check(s)?;
        Ok(self.inverse_unchecked(s))
    }

    pub(crate) fn inverse_unchecked(&self, s: f64) -> f64 {
        let p = self.piece_at_phi(s);
        if s <= p.phi.0 {
            return p.tau.0;
        }
        if s >= p.phi.1 {
            return p.tau.1;
        }
        match p.kind {
            PieceKind::Unit | PieceKind::Slow { .. } => {
                (p.tau.0 + (s - p.phi.0) / p.ratio()).clamp(p.tau.0, p.tau.1)
            }
            PieceKind::Scaled { .. } => self.invert_scaled(p, s),
        }
    }

    fn invert_scaled(&self, p: &Piece, s: f64) -> f64 {
        let frac = (s - p.phi.0) / (p.phi.1 - p.phi.0);
        let traj = &self.traj;
        if traj.is_scalar() {
            let (ya, yb) = (traj.value1(p.tau.0), traj.value1(p.tau.1));
            let target = ya + frac * (yb - ya);
            if let Some(inv) = traj.inverse() {
                let tau = inv(target);
                if tau.is_finite() {
                    return tau.clamp(p.tau.0, p.tau.1);
                }
            }
            let increasing = yb > ya;
            let below = |tau: f64| (traj.value1(tau) < target) == increasing;
            let (lo, hi) = bisect_predicate(&below, p.tau.0, p.tau.1, true);
            return 0.5 * (lo + hi);
        }
        let below = |tau: f64| self.image_fraction(p, tau) < frac;
        let (lo, hi) = bisect_predicate(&below, p.tau.0, p.tau.1, true);
        0.5 * (lo + hi)
    }

    /// `ψ'(s)` away from piece boundaries.
    pub fn inverse_slope(&self, s: f64) -> f64 {
        let p = self.piece_at_phi(s);
        match p.kind {
            PieceKind::Unit | PieceKind::Slow { .. } => 1.0 / p.ratio(),
            PieceKind::Scaled { nu } => nu / self.traj.speed(self.inverse_unchecked(s)),
        }
    }

    pub(crate) fn piece_for_output(&self, s: f64) -> &Piece {
        self.piece_at_phi(s)
    }

    pub(crate) fn trajectory(&self) -> &Trajectory {
        &self.traj
    }
}
