//! Registry of worked problems: the Manià and Alberti examples, a smooth
//! baseline where every hypothesis of the two-endpoint claim holds, and a
//! parametric power-law family.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::energy::PExtremes;
use crate::error::{Error, Result};
use crate::hypotheses::ConditionSConstants;
use crate::interval::Interval;
use crate::lagrangian::Lagrangian;
use crate::quadrature::QuadOptions;
use crate::trajectory::Trajectory;

/// Boundary data `y(t) = X` and, when pinned, `y(T) = Y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Endpoints {
    #[serde(rename = "X")]
    pub x: Vec<f64>,
    #[serde(rename = "Y")]
    pub y: Option<Vec<f64>>,
}

/// State constraint `y(I) ⊆ 𝒮`, as a box with optionally open upper ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSet {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub upper_open: bool,
}

impl StateSet {
    pub fn contains(&self, z: &[f64]) -> bool {
        z.iter().enumerate().all(|(k, &x)| {
            x >= self.lower[k] && if self.upper_open { x < self.upper[k] } else { x <= self.upper[k] }
        })
    }
}

#[derive(Debug, Clone)]
pub struct Analytic {
    /// `F(y)`, `+∞` when the energy diverges.
    pub f_y: f64,
    pub extremes: Option<PExtremes>,
    pub closed_forms: BTreeMap<&'static str, f64>,
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub lagrangian: Lagrangian,
    pub trajectory: Trajectory,
    pub boundary: Endpoints,
    pub state_set: Option<StateSet>,
    pub analytic: Option<Analytic>,
    pub consts: ConditionSConstants,
    /// A `λ` above `‖y'‖₁/(T−t)` for which the two-endpoint construction is
    /// known to work; `None` when the problem has no such default.
    pub default_lambda: Option<f64>,
    /// Natural Sobolev exponent of the problem.
    pub p: f64,
}

impl ProblemSpec {
    /// Checks the boundary data, the state constraint on a grid and the
    /// fundamental theorem of calculus on the curve.
    pub fn validate(&self, quad: &QuadOptions) -> Result<()> {
        let traj = &self.trajectory;
        let interval = traj.interval();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12);
        if !close(&traj.value(interval.start()), &self.boundary.x) {
            return Err(Error::Precondition(format!("{}: y(t) differs from X", self.name)));
        }
        if let Some(y) = &self.boundary.y {
            if !close(&traj.value(interval.end()), y) {
                return Err(Error::Precondition(format!("{}: y(T) differs from Y", self.name)));
            }
        }
        if let Some(set) = &self.state_set {
            // open upper ends may be reached at the final time only
            let grid = interval.grid(1025);
            if let Some(&s) = grid[..grid.len() - 1].iter().find(|&&s| !set.contains(&traj.value(s))) {
                return Err(Error::Precondition(format!("{}: y({s}) leaves the state set", self.name)));
            }
        }
        let residual = traj.ftc_residual(interval.start(), interval.end(), quad);
        if !(residual < 1e-8) {
            return Err(Error::Precondition(format!(
                "{}: fundamental theorem residual {residual:e}",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub parameters: &'static [&'static str],
}

pub fn list_examples() -> Vec<ExampleInfo> {
    vec![
        ExampleInfo {
            name: "mania",
            summary: "L = (z^3 - s)^2 v^6 on [0,1], y = s^(1/3), X = 0, Y = 1",
            parameters: &[],
        },
        ExampleInfo {
            name: "alberti",
            summary: "L = 0 on {z in [0,1), v <= 1/(2(1-z))}, +inf elsewhere, y = 1 - sqrt(1-s)",
            parameters: &[],
        },
        ExampleInfo {
            name: "baseline",
            summary: "L = v^2 on [0,1], y = s^0.6, X = 0, Y = 1, F(y) = 1.8",
            parameters: &[],
        },
        ExampleInfo {
            name: "power_law",
            summary: "L = |v|^q on [0,1], y = s^a (custom: 0 < a <= 1, q >= 1)",
            parameters: &["a", "q"],
        },
    ]
}

pub fn get_example(name: &str) -> Result<ProblemSpec> {
    match name {
        "mania" => Ok(mania()),
        "alberti" => Ok(alberti()),
        "baseline" => Ok(baseline()),
        _ => Err(Error::UnknownExample(name.to_string())),
    }
}

/// Parametric problems from the compiled-in registry.
pub fn custom(id: &str, params: &BTreeMap<String, f64>) -> Result<ProblemSpec> {
    match id {
        "power_law" => {
            for key in params.keys() {
                if key != "a" && key != "q" {
                    return Err(Error::Precondition(format!("power_law: unknown parameter `{key}`")));
                }
            }
            let get = |k: &str| {
                params
                    .get(k)
                    .copied()
                    .ok_or_else(|| Error::Precondition(format!("power_law: missing parameter `{k}`")))
            };
            power_law(get("a")?, get("q")?)
        }
        _ => Err(Error::UnknownExample(id.to_string())),
    }
}

fn unit_endpoints() -> Endpoints {
    Endpoints {
        x: vec![0.0],
        y: Some(vec![1.0]),
    }
}

fn mania() -> ProblemSpec {
    let psi = |s: f64, z: &[f64]| {
        let cube = z[0] * z[0] * z[0];
        let w = cube - s;
        // on the graph z = ∛s the difference is pure rounding, which v⁶ ~ s⁻⁴
        // would otherwise blow up into a divergent integral
        if w.abs() <= 4.0 * f64::EPSILON * cube.abs().max(s.abs()) {
            return 0.0;
        }
        w * w
    };
    let lagrangian = Lagrangian::new(1, |_, _, v| v[0].powi(6), psi)
        .autonomous(true)
        .with_growth(1.0, 1.0)
        .with_grad_v(|_, _, v| vec![6.0 * v[0].powi(5)]);
    let trajectory = Trajectory::scalar(Interval::unit(), f64::cbrt, |s: f64| s.powf(-2.0 / 3.0) / 3.0)
        .with_singular_points(vec![0.0])
        .with_inverse(|z| z * z * z)
        .with_sobolev_p(1.0);
    ProblemSpec {
        name: "mania".into(),
        lagrangian,
        trajectory,
        boundary: unit_endpoints(),
        state_set: None,
        analytic: Some(Analytic {
            f_y: 0.0,
            // P = −5v⁶
            extremes: Some(PExtremes {
                m_psi: 1.0,
                xi_plus: Arc::new(|_| 0.0),
                upsilon_minus: Arc::new(|lambda| 5.0 * lambda.powi(6)),
            }),
            closed_forms: BTreeMap::from([("F_y", 0.0), ("deriv_l1", 1.0)]),
        }),
        consts: ConditionSConstants::autonomous(2.0),
        default_lambda: Some(2.0),
        p: 1.0,
    }
}

/// Slack on the velocity bound so that `y` itself, which sits on the
/// boundary `v = q(z)`, is not rejected by rounding.
const ALBERTI_SLACK: f64 = 1e-12;

fn alberti() -> ProblemSpec {
    let lagrangian = Lagrangian::new(1, |_, _, _| 0.0, |_, _| 1.0)
        .with_domain(|z, v| {
            let z = z[0];
            (0.0..1.0).contains(&z) && v[0] <= 0.5 / (1.0 - z) * (1.0 + ALBERTI_SLACK)
        })
        .autonomous(true)
        .with_grad_v(|_, _, _| vec![0.0]);
    let trajectory = Trajectory::scalar(
        Interval::unit(),
        |s: f64| 1.0 - (1.0 - s).sqrt(),
        |s: f64| 0.5 / (1.0 - s).sqrt(),
    )
    .with_singular_points(vec![1.0])
    .with_inverse(|z| 1.0 - (1.0 - z) * (1.0 - z))
    .with_sobolev_p(1.0);
    ProblemSpec {
        name: "alberti".into(),
        lagrangian,
        trajectory,
        boundary: unit_endpoints(),
        state_set: Some(StateSet {
            lower: vec![0.0],
            upper: vec![1.0],
            upper_open: true,
        }),
        analytic: Some(Analytic {
            f_y: 0.0,
            extremes: Some(PExtremes {
                m_psi: 1.0,
                xi_plus: Arc::new(|_| 0.0),
                upsilon_minus: Arc::new(|_| 0.0),
            }),
            closed_forms: BTreeMap::from([("F_y", 0.0), ("deriv_l1", 1.0)]),
        }),
        consts: ConditionSConstants::autonomous(2.0),
        default_lambda: None,
        p: 1.0,
    }
}

fn baseline() -> ProblemSpec {
    let mut spec = power_law(0.6, 2.0).expect("valid parameters");
    spec.name = "baseline".into();
    spec
}

fn power_law(a: f64, q: f64) -> Result<ProblemSpec> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Precondition(format!("power_law: a = {a} must lie in (0, 1]")));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::Precondition(format!("power_law: q = {q} must be at least 1")));
    }
    let lagrangian = Lagrangian::velocity_only(move |v| v.abs().powf(q))
        .with_growth(1.0, 1.0)
        .with_grad_v(move |_, _, v| vec![q * v[0].abs().powf(q - 1.0) * v[0].signum()]);
    let mut trajectory = Trajectory::scalar(Interval::unit(), move |s: f64| s.powf(a), move |s: f64| a * s.powf(a - 1.0))
        .with_inverse(move |z| z.powf(1.0 / a))
        .with_sobolev_p(q);
    if a < 1.0 {
        trajectory = trajectory.with_singular_points(vec![0.0]);
    }
    let denom = q * (a - 1.0) + 1.0;
    let f_y = if denom > 0.0 { a.powf(q) / denom } else { f64::INFINITY };
    Ok(ProblemSpec {
        name: format!("power_law(a={a},q={q})"),
        lagrangian,
        trajectory,
        boundary: unit_endpoints(),
        state_set: None,
        analytic: Some(Analytic {
            f_y,
            // P = (1 − q)|v|^q
            extremes: Some(PExtremes {
                m_psi: 1.0,
                xi_plus: Arc::new(|_| 0.0),
                upsilon_minus: Arc::new(move |lambda| (q - 1.0) * lambda.powf(q)),
            }),
            closed_forms: BTreeMap::from([("F_y", f_y), ("deriv_l1", 1.0)]),
        }),
        consts: ConditionSConstants::autonomous(2.0),
        default_lambda: Some(2.0),
        p: q,
    })
}
