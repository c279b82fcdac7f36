//! Lipschitz reparametrizations `y_ν = y ∘ ψ_ν`.
//!
//! The time change `φ_ν` runs with slope `|y'|/ν` on the fast set `S_ν`,
//! with slope `μ` on the slow-down set `Σ_ν` (only when both end points are
//! pinned) and with slope 1 elsewhere. Its inverse `ψ_ν` is Lipschitz with
//! constant `1/μ`, and `y_ν` moves with speed exactly `ν` on `φ_ν(S_ν)`.

mod plan;
mod time_change;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::DEFAULT_SCAN_NODES;
use crate::lagrangian::{DistanceKind, DistanceOptions};
use crate::quadrature::QuadOptions;
use crate::trajectory::{norm, Trajectory};

pub use plan::{make_plan, mu_window, omega_mu, omega_set, ReparamPlan};
pub use time_change::{build_time_change, Piece, PieceKind, TimeChange};

/// Which end point the time change keeps fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    Initial,
    Final,
    Both,
}

impl Anchor {
    pub fn as_str(&self) -> &'static str {
        match self {
            Anchor::Initial => "initial",
            Anchor::Final => "final",
            Anchor::Both => "both",
        }
    }
}

/// Free parameters of the construction and the numerical knobs it uses.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuning {
    pub mu: Option<f64>,
    pub lambda_bar: Option<f64>,
    pub rho: Option<f64>,
    pub dist: DistanceKind,
    pub dist_opts: DistanceOptions,
    pub quad: QuadOptions,
    pub scan_nodes: usize,
    pub seed: u64,
}

impl Default for Tuning {
    fn default() -> Self {
        Tuning {
            mu: None,
            lambda_bar: None,
            rho: None,
            dist: DistanceKind::UDistance,
            dist_opts: DistanceOptions::default(),
            quad: QuadOptions::default(),
            scan_nodes: DEFAULT_SCAN_NODES,
            seed: 0,
        }
    }
}

impl Tuning {
    pub fn with_lambda_bar(mut self, lambda: f64) -> Self {
        self.lambda_bar = Some(lambda);
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = Some(rho);
        self
    }
}

/// Plan, time change and reparametrized curve in one call.
pub fn reparametrize_at(
    traj: &Trajectory,
    lag: &crate::lagrangian::Lagrangian,
    anchor: Anchor,
    nu: f64,
    tuning: &Tuning,
) -> Result<(ReparamPlan, TimeChange, Trajectory)> {
    let plan = make_plan(traj, lag, anchor, nu, tuning)?;
    let tc = build_time_change(&plan, traj, tuning)?;
    let y_nu = reparametrize(&tc);
    Ok((plan, tc, y_nu))
}

/// `y_ν = y ∘ ψ_ν` on the original interval.
///
/// On fast pieces of a scalar curve the composition is affine in `s`, so
/// it is evaluated as the chord between the piece's end values; every
/// piece returns its end values exactly at its end points, which makes the
/// pinned end points bit-exact.
pub fn reparametrize(tc: &TimeChange) -> Trajectory {
    let traj = tc.trajectory().clone();
    let interval = traj.interval();
    let mut cuts: Vec<f64> = tc.breakpoints();
    for c in traj.cuts() {
        if let Ok(phi) = tc.forward(c) {
            cuts.push(phi);
        }
    }
    cuts.retain(|&c| c > interval.start() && c < interval.end());

    let shared = Arc::new(tc.clone());
    let out = if traj.is_scalar() {
        let (tv, td) = (shared.clone(), shared);
        Trajectory::scalar(
            interval,
            move |s| scalar_value(&tv, s),
            move |s| scalar_deriv(&td, s),
        )
    } else {
        let dim = traj.dim();
        let (tv, td) = (shared.clone(), shared);
        Trajectory::vector(
            interval,
            dim,
            move |s| tv.trajectory().value(tv.inverse_unchecked(s)),
            move |s| vector_deriv(&td, s),
        )
    };
    out.with_breakpoints(cuts).with_sobolev_p(traj.sobolev_p())
}

fn scalar_value(tc: &TimeChange, s: f64) -> f64 {
    let p = tc.piece_for_output(s);
    let y = tc.trajectory();
    match p.kind {
        PieceKind::Scaled { .. } => {
            let (ya, yb) = (y.value1(p.tau.0), y.value1(p.tau.1));
            if s >= p.phi.1 {
                yb
            } else if s <= p.phi.0 {
                ya
            } else {
                ya + (s - p.phi.0) * ((yb - ya) / (p.phi.1 - p.phi.0))
            }
        }
        _ => y.value1(tc.inverse_unchecked(s)),
    }
}

fn scalar_deriv(tc: &TimeChange, s: f64) -> f64 {
    let p = tc.piece_for_output(s);
    let y = tc.trajectory();
    match p.kind {
        PieceKind::Scaled { nu } => nu * (y.value1(p.tau.1) - y.value1(p.tau.0)).signum(),
        PieceKind::Slow { mu } => y.deriv1(tc.inverse_unchecked(s)) / mu,
        PieceKind::Unit => y.deriv1(tc.inverse_unchecked(s)),
    }
}

fn vector_deriv(tc: &TimeChange, s: f64) -> Vec<f64> {
    let p = tc.piece_for_output(s);
    let y = tc.trajectory();
    let tau = tc.inverse_unchecked(s);
    let d = y.deriv(tau);
    match p.kind {
        PieceKind::Scaled { nu } => {
            let speed = norm(&d);
            d.iter().map(|x| nu * x / speed).collect()
        }
        PieceKind::Slow { mu } => d.iter().map(|x| x / mu).collect(),
        PieceKind::Unit => d,
    }
}

/// Essential supremum of `|y_ν'|` on the original interval: `ν` on fast
/// pieces, and a dense-grid maximum of `|y'|/φ'` on the others.
pub fn lipschitz_rank(tc: &TimeChange) -> f64 {
    const PER_PIECE: usize = 257;
    let interval = tc.domain();
    let y = tc.trajectory();
    let mut rank: f64 = 0.0;
    for p in tc.pieces() {
        let lo = p.phi.0.max(interval.start());
        let hi = p.phi.1.min(interval.end());
        if !(hi > lo) {
            continue;
        }
        match p.kind {
            PieceKind::Scaled { nu } => rank = rank.max(nu),
            PieceKind::Unit | PieceKind::Slow { .. } => {
                let slope = match p.kind {
                    PieceKind::Slow { mu } => mu,
                    _ => 1.0,
                };
                for k in 0..PER_PIECE {
                    let s = lo + (hi - lo) * k as f64 / (PER_PIECE - 1) as f64;
                    rank = rank.max(y.speed(tc.inverse_unchecked(s)) / slope);
                }
            }
        }
    }
    rank
}

/// The curve frozen at `y(cut)` on `[t, cut]` and equal to `y` afterwards.
pub fn truncate_head(traj: &Trajectory, cut: f64) -> Result<Trajectory> {
    let interval = traj.interval();
    if !(cut > interval.start() && cut < interval.end()) {
        return Err(Error::Precondition(format!(
            "cut = {cut} must lie strictly inside [{}, {}]",
            interval.start(),
            interval.end()
        )));
    }
    let singular: Vec<f64> = traj.singular_points().iter().copied().filter(|&p| p > cut).collect();
    let mut breaks: Vec<f64> = traj.breakpoints().iter().copied().filter(|&p| p > cut).collect();
    breaks.push(cut);
    let head = traj.value(cut);
    let out = if traj.is_scalar() {
        let (yv, yd) = (traj.clone(), traj.clone());
        let h = head[0];
        Trajectory::scalar(
            interval,
            move |s| if s <= cut { h } else { yv.value1(s) },
            move |s| if s < cut { 0.0 } else { yd.deriv1(s) },
        )
    } else {
        let dim = traj.dim();
        let (yv, yd) = (traj.clone(), traj.clone());
        Trajectory::vector(
            interval,
            dim,
            move |s| if s <= cut { head.clone() } else { yv.value(s) },
            move |s| if s < cut { vec![0.0; dim] } else { yd.deriv(s) },
        )
    };
    Ok(out
        .with_singular_points(singular)
        .with_breakpoints(breaks)
        .with_sobolev_p(traj.sobolev_p()))
}
