//! Adaptive quadrature for integrands with endpoint singularities and
//! extended (`+∞`) values.
//!
//! Each cell is integrated with a tanh-sinh (double exponential) rule.
//! The rule is open, so declared singular points placed at cell ends are
//! never evaluated, and its nodes cluster double-exponentially towards the
//! ends, which resolves power singularities such as `s^{-0.8}` to near
//! machine precision. Cells whose level-to-level difference stays large are
//! bisected, worst cell first, up to `max_depth` levels.
//!
//! Divergence is a value, not an error: an integrand that is `+∞` on a
//! bracketed subinterval of positive length, or whose tail contributions at
//! a cell end refuse to decay, integrates to `+∞`.

use serde::{Deserialize, Serialize};

use crate::interval::{bisect_predicate, IntervalSet};

const T_MAX: f64 = 6.1;
const MIN_LEVEL: u32 = 3;
const MAX_LEVEL: u32 = 7;
const MAX_CELLS: usize = 4096;
const TAIL_FRACTION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadOptions {
    /// Absolute and relative tolerance on the total.
    pub tol: f64,
    /// Maximum number of bisections of a single cell.
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-10,
            max_depth: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    /// Deepest bisection level reached.
    pub depth: u32,
    pub divergent: bool,
    /// Subinterval on which the integrand was found to be `+∞`.
    pub infinite_cell: Option<(f64, f64)>,
    /// Set when the integrand produced NaN.
    pub invalid: bool,
}

impl Quadrature {
    fn finite(value: f64, error: f64, depth: u32) -> Self {
        Quadrature {
            value,
            error,
            depth,
            divergent: false,
            infinite_cell: None,
            invalid: false,
        }
    }

    fn diverged(depth: u32, infinite_cell: Option<(f64, f64)>) -> Self {
        Quadrature {
            value: f64::INFINITY,
            error: f64::INFINITY,
            depth,
            divergent: true,
            infinite_cell,
            invalid: false,
        }
    }

    fn nan(depth: u32) -> Self {
        Quadrature {
            value: f64::NAN,
            error: f64::NAN,
            depth,
            divergent: false,
            infinite_cell: None,
            invalid: true,
        }
    }

    pub fn is_finite(&self) -> bool {
        !self.divergent && !self.invalid && self.value.is_finite()
    }
}

enum CellOutcome {
    Done { estimate: f64, error: f64 },
    Infinite(f64),
    TailDivergent,
    Invalid,
}

struct Cell {
    a: f64,
    b: f64,
    depth: u32,
    estimate: f64,
    error: f64,
}

/// Abscissa and weight factor of the tanh-sinh node at `t` on `[a, b]`.
/// Returns `None` when the node collapses onto an end in floating point.
#[inline]
fn node(a: f64, b: f64, t: f64) -> Option<(f64, f64, bool)> {
    let u = std::f64::consts::FRAC_PI_2 * t.sinh();
    let q = (-2.0 * u.abs()).exp();
    let len = b - a;
    // distance from the nearer end, computed without cancellation
    let dist = len * q / (1.0 + q);
    let x = if t < 0.0 {
        a + dist
    } else if t > 0.0 {
        b - dist
    } else {
        a + 0.5 * len
    };
    if !(x > a && x < b) {
        return None;
    }
    let sech2 = 4.0 * q / ((1.0 + q) * (1.0 + q));
    let w = std::f64::consts::FRAC_PI_2 * t.cosh() * sech2 * 0.5 * len;
    Some((x, w, t.abs() >= T_MAX - 1.0))
}

fn tanh_sinh_cell<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_target: f64) -> CellOutcome {
    let mut sum = 0.0;
    let mut tail = 0.0;
    let mut previous = f64::NAN;
    let mut estimate = 0.0;
    let mut error = f64::INFINITY;
    for level in 0..=MAX_LEVEL {
        let h = (0.5f64).powi(level as i32);
        let n = (T_MAX / h).floor() as i64;
        let mut level_sum = 0.0;
        let mut level_tail = 0.0;
        for j in -n..=n {
            // from level 1 on only odd multiples of h are new
            if level > 0 && j % 2 == 0 {
                continue;
            }
            let t = j as f64 * h;
            let Some((x, w, in_tail)) = node(a, b, t) else {
                continue;
            };
            let fx = f(x);
            if fx.is_nan() {
                return CellOutcome::Invalid;
            }
            if fx == f64::INFINITY {
                return CellOutcome::Infinite(x);
            }
            let term = fx * w;
            level_sum += term;
            if in_tail {
                level_tail += term.abs();
            }
        }
        sum = if level == 0 { level_sum } else { 0.5 * sum + h * level_sum };
        tail = if level == 0 { level_tail } else { 0.5 * tail + h * level_tail };
        if level == 0 {
            sum *= h;
            tail *= h;
        }
        estimate = sum;
        if level > 0 {
            error = (estimate - previous).abs();
            if level >= MIN_LEVEL && error <= rel_target * estimate.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            if level >= MIN_LEVEL && error == 0.0 {
                break;
            }
        }
        previous = estimate;
    }
    if !estimate.is_finite() || tail > TAIL_FRACTION * estimate.abs().max(1.0) {
        return CellOutcome::TailDivergent;
    }
    CellOutcome::Done { estimate, error }
}

/// Locates a subinterval of positive length around `x` on which `f = +∞`.
fn bracket_infinite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, x: f64) -> Option<(f64, f64)> {
    let is_inf = |s: f64| f(s) == f64::INFINITY;
    let n = 64;
    let mut samples: Vec<f64> = (0..n).map(|k| a + (k as f64 + 0.5) * (b - a) / n as f64).collect();
    samples.push(x);
    samples.sort_by(f64::total_cmp);
    let flags: Vec<bool> = samples.iter().map(|&s| is_inf(s)).collect();
    let pos = samples.iter().position(|&s| s == x)?;
    let (mut lo, mut hi) = (pos, pos);
    while lo > 0 && flags[lo - 1] {
        lo -= 1;
    }
    while hi + 1 < samples.len() && flags[hi + 1] {
        hi += 1;
    }
    let (mut left, mut right) = (samples[lo], samples[hi]);
    if lo == hi {
        let delta = (b - a) * 1e-6;
        let (l, r) = ((x - delta).max(a), (x + delta).min(b));
        if l < x && r > x && is_inf(l) && is_inf(r) {
            left = l;
            right = r;
        } else {
            return None;
        }
    }
    // push both ends outwards to the finite region
    let outer_left = if lo > 0 { samples[lo - 1] } else { a };
    if outer_left < left && !is_inf(outer_left) {
        left = bisect_predicate(&is_inf, outer_left, left, false).1;
    }
    let outer_right = if hi + 1 < samples.len() { samples[hi + 1] } else { b };
    if outer_right > right && !is_inf(outer_right) {
        right = bisect_predicate(&is_inf, right, outer_right, true).0;
    }
    (right > left).then_some((left, right))
}

/// Integrates `f` over `[a, b]`, splitting first at every breakpoint inside
/// the interval.
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], opts: &QuadOptions) -> Quadrature
where
    F: Fn(f64) -> f64,
{
    if !(b > a) {
        return Quadrature::finite(0.0, 0.0, 0);
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&c| c > a && c < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let cell_target = opts.tol.max(1e-15);
    let evaluate = |lo: f64, hi: f64, depth: u32| -> Result<Cell, Quadrature> {
        match tanh_sinh_cell(&f, lo, hi, cell_target) {
            CellOutcome::Done { estimate, error } => Ok(Cell {
                a: lo,
                b: hi,
                depth,
                estimate,
                error,
            }),
            CellOutcome::Infinite(x) => {
                let cell = bracket_infinite(&f, lo, hi, x);
                Err(Quadrature::diverged(depth, cell))
            }
            CellOutcome::TailDivergent => Err(Quadrature::diverged(depth, None)),
            CellOutcome::Invalid => Err(Quadrature::nan(depth)),
        }
    };

    let mut cells = Vec::new();
    for pair in edges.windows(2) {
        if pair[1] > pair[0] {
            match evaluate(pair[0], pair[1], 0) {
                Ok(cell) => cells.push(cell),
                Err(q) => return q,
            }
        }
    }

    let mut max_depth_seen = 0;
    loop {
        let total: f64 = cells.iter().map(|c| c.estimate).sum();
        let total_err: f64 = cells.iter().map(|c| c.error).sum();
        let target = opts.tol.max(opts.tol * total.abs());
        if total_err <= target || cells.len() >= MAX_CELLS {
            return Quadrature::finite(total, total_err, max_depth_seen);
        }
        // worst cell that may still be refined
        let worst = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.depth < opts.max_depth && c.b - c.a > 4.0 * f64::EPSILON * c.a.abs().max(c.b.abs()))
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        let Some(idx) = worst else {
            // every cell is at the depth cap; a cell that still carries a
            // large share of the total is treated as a non-integrable spike
            let stuck = cells.iter().any(|c| c.error > 1e3 * target && c.estimate.abs() > 1e3 * target);
            if stuck {
                return Quadrature::diverged(max_depth_seen, None);
            }
            return Quadrature::finite(total, total_err, max_depth_seen);
        };
        let parent = cells.swap_remove(idx);
        let mid = parent.a + 0.5 * (parent.b - parent.a);
        let depth = parent.depth + 1;
        max_depth_seen = max_depth_seen.max(depth);
        for (lo, hi) in [(parent.a, mid), (mid, parent.b)] {
            match evaluate(lo, hi, depth) {
                Ok(cell) => cells.push(cell),
                Err(q) => return q,
            }
        }
    }
}

/// Integrates `f` over every component of `set`.
pub fn integrate_over<F>(f: F, set: &IntervalSet, breakpoints: &[f64], opts: &QuadOptions) -> Quadrature
where
    F: Fn(f64) -> f64,
{
    let mut acc = Quadrature::finite(0.0, 0.0, 0);
    for &(a, b) in set.components() {
        let q = integrate(&f, a, b, breakpoints, opts);
        if !q.is_finite() {
            return q;
        }
        acc.value += q.value;
        acc.error += q.error;
        acc.depth = acc.depth.max(q.depth);
    }
    acc
}
