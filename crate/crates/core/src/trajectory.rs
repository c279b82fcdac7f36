//! Absolutely continuous curves `y: [t, T] → R^n` given by value and
//! derivative evaluators.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interval::{Boundary, Interval, IntervalSet, DEFAULT_SCAN_NODES};
use crate::quadrature::{integrate, QuadOptions};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
enum Eval {
    Scalar { value: ScalarFn, deriv: ScalarFn },
    Vector { dim: usize, value: VectorFn, deriv: VectorFn },
}

/// Derivative returned by [`Trajectory::sample`].
#[derive(Debug, Clone, PartialEq)]
pub enum Derivative {
    Finite(Vec<f64>),
    /// Declared singular point: `|y'|` is unbounded there.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Value,
    Derivative,
}

#[derive(Clone)]
pub struct Trajectory {
    interval: Interval,
    eval: Eval,
    singular_points: Vec<f64>,
    breakpoints: Vec<f64>,
    sobolev_p: f64,
    inverse: Option<ScalarFn>,
}

impl fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trajectory")
            .field("interval", &self.interval)
            .field("dim", &self.dim())
            .field("singular_points", &self.singular_points)
            .field("breakpoints", &self.breakpoints)
            .field("sobolev_p", &self.sobolev_p)
            .field("has_inverse", &self.inverse.is_some())
            .finish()
    }
}

impl Trajectory {
    pub fn scalar<V, D>(interval: Interval, value: V, deriv: D) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Trajectory {
            interval,
            eval: Eval::Scalar {
                value: Arc::new(value),
                deriv: Arc::new(deriv),
            },
            singular_points: Vec::new(),
            breakpoints: Vec::new(),
            sobolev_p: 1.0,
            inverse: None,
        }
    }

    pub fn vector<V, D>(interval: Interval, dim: usize, value: V, deriv: D) -> Self
    where
        V: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        D: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        assert!(dim >= 1, "dimension must be positive");
        Trajectory {
            interval,
            eval: Eval::Vector {
                dim,
                value: Arc::new(value),
                deriv: Arc::new(deriv),
            },
            singular_points: Vec::new(),
            breakpoints: Vec::new(),
            sobolev_p: 1.0,
            inverse: None,
        }
    }

    pub fn constant(interval: Interval, point: Vec<f64>) -> Self {
        if point.len() == 1 {
            let c = point[0];
            return Trajectory::scalar(interval, move |_| c, |_| 0.0);
        }
        let dim = point.len();
        Trajectory::vector(interval, dim, move |_| point.clone(), move |_| vec![0.0; dim])
    }

    /// Piecewise cubic Hermite interpolant through `(grid[i], values[i])`
    /// with node slopes from central differences (one-sided at the ends).
    /// The derivative is the exact derivative of the interpolant, so the
    /// fundamental theorem holds to rounding.
    pub fn from_samples(grid: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::Construction("need at least two samples, one per node".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Construction("sample grid must be strictly increasing".into()));
        }
        let dim = values[0].len();
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(Error::Construction("samples must share a positive dimension".into()));
        }
        let interval = Interval::new(grid[0], grid[grid.len() - 1])?;
        let n = grid.len();
        let slopes: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let (l, r) = if i == 0 {
                    (0, 1)
                } else if i == n - 1 {
                    (n - 2, n - 1)
                } else {
                    (i - 1, i + 1)
                };
                (0..dim)
                    .map(|k| (values[r][k] - values[l][k]) / (grid[r] - grid[l]))
                    .collect()
            })
            .collect();
        let table = Arc::new(HermiteTable {
            grid,
            values,
            slopes,
        });
        let breakpoints = table.grid[1..n - 1].to_vec();
        let (tv, td) = (table.clone(), table);
        let mut traj = if dim == 1 {
            Trajectory::scalar(interval, move |s| tv.eval(s, false)[0], move |s| td.eval(s, true)[0])
        } else {
            Trajectory::vector(interval, dim, move |s| tv.eval(s, false), move |s| td.eval(s, true))
        };
        traj.breakpoints = breakpoints;
        Ok(traj)
    }

    pub fn with_singular_points(mut self, points: Vec<f64>) -> Self {
        let mut points = points;
        points.sort_by(f64::total_cmp);
        points.dedup();
        self.singular_points = points;
        self
    }

    /// Points where `y'` may jump; quadrature splits there.
    pub fn with_breakpoints(mut self, points: Vec<f64>) -> Self {
        let mut points = points;
        points.sort_by(f64::total_cmp);
        points.dedup();
        self.breakpoints = points;
        self
    }

    pub fn with_sobolev_p(mut self, p: f64) -> Self {
        self.sobolev_p = p;
        self
    }

    /// Registers the inverse of a strictly monotone scalar trajectory.
    pub fn with_inverse<G>(mut self, inverse: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn dim(&self) -> usize {
        match &self.eval {
            Eval::Scalar { .. } => 1,
            Eval::Vector { dim, .. } => *dim,
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self.eval, Eval::Scalar { .. })
    }

    pub fn singular_points(&self) -> &[f64] {
        &self.singular_points
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn sobolev_p(&self) -> f64 {
        self.sobolev_p
    }

    pub fn inverse(&self) -> Option<&ScalarFn> {
        self.inverse.as_ref()
    }

    /// Singular points and breakpoints together, sorted.
    pub fn cuts(&self) -> Vec<f64> {
        let mut cuts: Vec<f64> = self
            .singular_points
            .iter()
            .chain(self.breakpoints.iter())
            .copied()
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts
    }

    fn is_singular(&self, s: f64) -> bool {
        self.singular_points.iter().any(|&p| p == s)
    }

    /// Value without domain check.
    pub fn value(&self, s: f64) -> Vec<f64> {
        match &self.eval {
            Eval::Scalar { value, .. } => vec![value(s)],
            Eval::Vector { value, .. } => value(s),
        }
    }

    /// Derivative without domain check; components may be infinite at
    /// singular points.
    pub fn deriv(&self, s: f64) -> Vec<f64> {
        match &self.eval {
            Eval::Scalar { deriv, .. } => vec![deriv(s)],
            Eval::Vector { deriv, .. } => deriv(s),
        }
    }

    /// First component of the value; the whole value for scalar curves.
    pub fn value1(&self, s: f64) -> f64 {
        match &self.eval {
            Eval::Scalar { value, .. } => value(s),
            Eval::Vector { value, .. } => value(s)[0],
        }
    }

    pub fn deriv1(&self, s: f64) -> f64 {
        match &self.eval {
            Eval::Scalar { deriv, .. } => deriv(s),
            Eval::Vector { deriv, .. } => deriv(s)[0],
        }
    }

    /// `|y'(s)|`, `+∞` at declared singular points.
    pub fn speed(&self, s: f64) -> f64 {
        if self.is_singular(s) {
            return f64::INFINITY;
        }
        let v = match &self.eval {
            Eval::Scalar { deriv, .. } => deriv(s).abs(),
            Eval::Vector { deriv, .. } => norm(&deriv(s)),
        };
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    pub fn sample(&self, s: f64) -> Result<(Vec<f64>, Derivative)> {
        self.interval.check(s)?;
        let value = self.value(s);
        if self.is_singular(s) {
            return Ok((value, Derivative::Unbounded));
        }
        let d = self.deriv(s);
        if d.iter().any(|x| !x.is_finite()) {
            return Ok((value, Derivative::Unbounded));
        }
        Ok((value, Derivative::Finite(d)))
    }

    /// `‖y‖_p` or `‖y'‖_p`; `+∞` when the integral diverges.
    pub fn lp_norm(&self, p: f64, target: Target, opts: &QuadOptions) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::Precondition(format!("p must be at least 1, got {p}")));
        }
        let q = match target {
            Target::Derivative => self.integrate(|s| self.speed(s).powf(p), opts),
            Target::Value => self.integrate(|s| norm(&self.value(s)).powf(p), opts),
        };
        if q.invalid {
            return Err(Error::Numeric("L^p integrand produced NaN".into()));
        }
        if !q.is_finite() {
            return Ok(f64::INFINITY);
        }
        Ok(q.value.powf(1.0 / p))
    }

    /// `∫ f` over the whole interval, split at the cuts.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, opts: &QuadOptions) -> crate::quadrature::Quadrature {
        integrate(f, self.interval.start(), self.interval.end(), &self.cuts(), opts)
    }

    /// `sup |y|` estimated on a dense grid including the end points.
    pub fn sup_norm(&self) -> f64 {
        self.interval
            .grid(DEFAULT_SCAN_NODES + 1)
            .into_iter()
            .chain(self.breakpoints.iter().copied())
            .map(|s| norm(&self.value(s)))
            .fold(0.0, f64::max)
    }

    /// Componentwise bounding box of `y(I)` from a dense grid.
    pub fn image_box(&self) -> Vec<(f64, f64)> {
        let dim = self.dim();
        let mut out = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        for s in self.interval.grid(DEFAULT_SCAN_NODES + 1) {
            for (k, x) in self.value(s).into_iter().enumerate() {
                out[k].0 = out[k].0.min(x);
                out[k].1 = out[k].1.max(x);
            }
        }
        out
    }

    /// `{s : |y'(s)| > threshold}` with components closed outward.
    pub fn superlevel_set(&self, threshold: f64) -> Result<IntervalSet> {
        self.superlevel_set_with(threshold, DEFAULT_SCAN_NODES)
    }

    pub fn superlevel_set_with(&self, threshold: f64, nodes: usize) -> Result<IntervalSet> {
        if !(threshold > 0.0) {
            return Err(Error::Precondition(format!("threshold must be positive, got {threshold}")));
        }
        let pred = |s: f64| self.speed(s) > threshold;
        // scan every piece between cuts separately so jumps of y' are seen
        let mut raw = Vec::new();
        for (a, b) in IntervalSet::from_interval(self.interval).pieces_split_at(&self.breakpoints) {
            let piece = Interval::new(a, b)?;
            let set = IntervalSet::from_predicate(piece, nodes, Boundary::Outer, pred);
            raw.extend_from_slice(set.components());
        }
        Ok(IntervalSet::new(raw))
    }

    /// `|y(b) − y(a) − ∫_a^b y'|`, the fundamental-theorem residual.
    pub fn ftc_residual(&self, a: f64, b: f64, opts: &QuadOptions) -> f64 {
        let cuts = self.cuts();
        let ya = self.value(a);
        let yb = self.value(b);
        let mut worst: f64 = 0.0;
        for k in 0..self.dim() {
            let q = integrate(|s| self.deriv(s)[k], a, b, &cuts, opts);
            let r = if q.is_finite() {
                (yb[k] - ya[k] - q.value).abs()
            } else {
                f64::INFINITY
            };
            worst = worst.max(r);
        }
        worst
    }
}

struct HermiteTable {
    grid: Vec<f64>,
    values: Vec<Vec<f64>>,
    slopes: Vec<Vec<f64>>,
}

impl HermiteTable {
    fn eval(&self, s: f64, derivative: bool) -> Vec<f64> {
        let n = self.grid.len();
        let i = self.grid.partition_point(|&g| g <= s).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let t = ((s - x0) / h).clamp(0.0, 1.0);
        let (y0, y1, m0, m1) = (&self.values[i], &self.values[i + 1], &self.slopes[i], &self.slopes[i + 1]);
        (0..y0.len())
            .map(|k| {
                if derivative {
                    let t2 = t * t;
                    (6.0 * t2 - 6.0 * t) / h * y0[k]
                        + (3.0 * t2 - 4.0 * t + 1.0) * m0[k]
                        + (-6.0 * t2 + 6.0 * t) / h * y1[k]
                        + (3.0 * t2 - 2.0 * t) * m1[k]
                } else {
                    let t2 = t * t;
                    let t3 = t2 * t;
                    (2.0 * t3 - 3.0 * t2 + 1.0) * y0[k]
                        + (t3 - 2.0 * t2 + t) * h * m0[k]
                        + (-2.0 * t3 + 3.0 * t2) * y1[k]
                        + (t3 - t2) * h * m1[k]
                }
            })
            .collect()
    }
}

pub fn norm(v: &[f64]) -> f64 {
    if v.len() == 1 {
        v[0].abs()
    } else {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mania() -> Trajectory {
        Trajectory::scalar(Interval::unit(), f64::cbrt, |s| s.powf(-2.0 / 3.0) / 3.0)
            .with_singular_points(vec![0.0])
    }

    #[test]
    fn sample_closed_forms() {
        let (v, d) = mania().sample(0.125).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15);
        match d {
            Derivative::Finite(d) => assert!((d[0] - 4.0 / 3.0).abs() < 1e-14),
            Derivative::Unbounded => panic!("finite derivative expected"),
        }
        assert_eq!(mania().sample(0.0).unwrap().1, Derivative::Unbounded);
        assert!(mania().sample(1.5).is_err());
    }

    #[test]
    fn lp_norms() {
        let opts = QuadOptions::default();
        let n1 = mania().lp_norm(1.0, Target::Derivative, &opts).unwrap();
        assert!((n1 - 1.0).abs() < 1e-9);
        let base = Trajectory::scalar(Interval::unit(), |s: f64| s.powf(0.6), |s: f64| 0.6 * s.powf(-0.4))
            .with_singular_points(vec![0.0]);
        let n2 = base.lp_norm(2.0, Target::Derivative, &opts).unwrap();
        assert!((n2 - 1.8f64.sqrt()).abs() < 1e-9);
        let c = Trajectory::constant(Interval::unit(), vec![3.0]);
        assert_eq!(c.lp_norm(1.0, Target::Derivative, &opts).unwrap(), 0.0);
        // y' = s^{-1} is not integrable
        let log = Trajectory::scalar(Interval::unit(), |s: f64| s.ln(), |s| 1.0 / s);
        assert_eq!(log.lp_norm(1.0, Target::Derivative, &opts).unwrap(), f64::INFINITY);
    }

    #[test]
    fn mania_superlevel_set() {
        let set = mania().superlevel_set(2.0).unwrap();
        assert_eq!(set.components().len(), 1);
        let (a, b) = set.components()[0];
        assert_eq!(a, 0.0);
        assert!((b - (1.0f64 / 6.0).powf(1.5)).abs() < 1e-15);
        assert!((set.measure() - (1.0f64 / 6.0).powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn alberti_superlevel_set() {
        let y = Trajectory::scalar(Interval::unit(), |s| 1.0 - (1.0 - s).sqrt(), |s| 0.5 / (1.0 - s).sqrt())
            .with_singular_points(vec![1.0]);
        let set = y.superlevel_set(2.0).unwrap();
        let (a, b) = set.components()[0];
        assert!((a - 0.9375).abs() < 1e-15);
        assert_eq!(b, 1.0);
    }

    #[test]
    fn lipschitz_curve_has_empty_superlevel_set() {
        let y = Trajectory::scalar(Interval::unit(), |s| s * s, |s| 2.0 * s);
        assert!(y.superlevel_set(2.5).unwrap().is_empty());
    }

    #[test]
    fn sampled_trajectory_is_ftc_consistent() {
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let values: Vec<Vec<f64>> = grid.iter().map(|&s| vec![s.sin(), s * s]).collect();
        let y = Trajectory::from_samples(grid, values).unwrap();
        assert_eq!(y.dim(), 2);
        let r = y.ftc_residual(0.1, 0.93, &QuadOptions::default());
        assert!(r < 1e-10, "{r}");
        assert!((y.value(0.5)[0] - 0.5f64.sin()).abs() < 1e-4);
        assert!((y.deriv(0.5)[1] - 1.0).abs() < 1e-2);
    }
}
