mod common;

use std::collections::BTreeMap;

use common::{alberti, mania, rel_err};
use lavgap::energy::{convergence_study, energy, RowStatus, StudyOptions};
use lavgap::hypotheses::{
    check_all, required_for, verify_boundedness, Boundedness, CheckSettings, Hypothesis, HypothesisReport,
};
use lavgap::lagrangian::{DistanceKind, DistanceOptions, Lagrangian};
use lavgap::probes::{ProbeConfig, ProbeSet, Verdict};
use lavgap::problems::{custom, get_example, ProblemSpec};
use lavgap::quadrature::integrate;
use lavgap::reparam::{make_plan, reparametrize_at, Anchor, Tuning};
use lavgap::{Error, Interval, QuadOptions, Trajectory};

fn settings(spec: &ProblemSpec, probes: usize, seed: u64) -> CheckSettings {
    CheckSettings {
        consts: spec.consts,
        nu0: 1.0,
        lambda: spec.default_lambda.unwrap_or(3.0),
        rho: 1.0 / 16.0,
        dist: DistanceKind::UDistance,
        dist_opts: DistanceOptions::default(),
        quad: QuadOptions::default(),
        r_levels: vec![1.0, 10.0, 100.0],
        probe_count: probes,
        seed,
    }
}

fn verdict(reports: &[HypothesisReport], name: Hypothesis) -> Verdict {
    reports.iter().find(|r| r.name == name).map(|r| r.verdict).expect("every hypothesis is reported")
}

fn study_options(spec: &ProblemSpec, p: f64) -> StudyOptions {
    StudyOptions {
        consts: spec.consts,
        extremes: spec.analytic.as_ref().and_then(|a| a.extremes.clone()),
        p,
        budget_probes: 500,
    }
}

#[test]
fn mania_energy_exceeds_linear_piece() {
    let spec = get_example("mania").unwrap();
    let quad = QuadOptions::default();
    for nu in [2.0, 4.0, 8.0, 16.0] {
        let (_, _, y_nu) = reparametrize_at(&spec.trajectory, &spec.lagrangian, Anchor::Initial, nu, &Tuning::default())
            .unwrap();
        let lag = &spec.lagrangian;
        let density = |s: f64| lag.density(s, &y_nu.value(s), &y_nu.deriv(s));
        let s0 = mania::s0(nu);
        let head = integrate(density, 0.0, s0, &[], &quad).value;
        assert!(rel_err(head, mania::fast_piece_energy(nu)) < 1e-9, "nu={nu}: {head}");
        let total = energy(lag, &y_nu, &quad).unwrap().value;
        assert!(total > head, "nu={nu}: the shifted piece carries energy too");
        assert!(total >= mania::displayed_energy(nu));
    }
}

#[test]
fn mania_linear_term_is_below_its_bound() {
    for nu in [2.0, 10.0, 100.0, 1e4] {
        let (first, second) = mania::w11_terms(nu);
        assert!(first > 0.0 && second > 0.0);
        assert!(first <= mania::w11_first_bound(nu), "nu={nu}");
    }
}

#[test]
fn mania_study_diverges() {
    let spec = get_example("mania").unwrap();
    let report = convergence_study(
        &spec.lagrangian,
        &spec.trajectory,
        Anchor::Initial,
        &[2.0, 4.0, 8.0, 16.0],
        &Tuning::default(),
        &study_options(&spec, 1.0),
    )
    .unwrap();
    assert_eq!(report.baseline.f_y.value, 0.0);
    let gaps: Vec<f64> = report.rows.iter().map(|r| r.gap.unwrap()).collect();
    assert!(gaps.windows(2).all(|w| w[1] > w[0]), "{gaps:?}");
    let w1p: Vec<f64> = report.rows.iter().map(|r| r.w1p_dist.unwrap()).collect();
    assert!(w1p.windows(2).all(|w| w[1] < w[0]), "{w1p:?}");
    for row in &report.rows {
        assert_eq!(row.status, RowStatus::Ok);
        assert!((row.lip_rank.unwrap() - row.nu).abs() < 1e-9 * row.nu);
    }
}

#[test]
fn mania_verdicts() {
    let spec = get_example("mania").unwrap();
    let reports = check_all(&spec.lagrangian, &spec.trajectory, &settings(&spec, 2000, 0)).unwrap();
    assert_eq!(verdict(&reports, Hypothesis::PYPsi), Verdict::Falsified);
    assert_eq!(verdict(&reports, Hypothesis::Integrability), Verdict::Falsified);
    for name in required_for(Anchor::Initial, true) {
        assert_eq!(verdict(&reports, name), Verdict::Pass, "{name}");
    }
}

#[test]
fn alberti_final_family() {
    let spec = get_example("alberti").unwrap();
    for nu in [1.0, 1.5, 2.0, 4.0, 8.0] {
        let plan = make_plan(&spec.trajectory, &spec.lagrangian, Anchor::Final, nu, &Tuning::default()).unwrap();
        assert!((plan.eps_nu - 1.0 / (4.0 * nu * nu)).abs() < 1e-12, "nu={nu}: {}", plan.eps_nu);
        let [(start, end)] = plan.s_nu.components() else {
            panic!("fast set {:?}", plan.s_nu);
        };
        assert!((start - alberti::t_nu(nu)).abs() < 1e-12);
        assert_eq!(*end, 1.0);
    }
}

#[test]
fn alberti_rejects_two_endpoint_plans() {
    let spec = get_example("alberti").unwrap();
    let tuning = Tuning::default().with_lambda_bar(4.0);
    let err = make_plan(&spec.trajectory, &spec.lagrangian, Anchor::Both, 4.0, &tuning).unwrap_err();
    assert!(matches!(err, Error::InfeasiblePlan { .. }), "{err:?}");
}

#[test]
fn alberti_verdicts() {
    let spec = get_example("alberti").unwrap();
    let reports = check_all(&spec.lagrangian, &spec.trajectory, &settings(&spec, 2000, 0)).unwrap();
    assert_eq!(verdict(&reports, Hypothesis::LYLambda), Verdict::Falsified);
    assert_eq!(verdict(&reports, Hypothesis::GLambda), Verdict::Inconclusive);
    for name in required_for(Anchor::Final, false) {
        assert_eq!(verdict(&reports, name), Verdict::Pass, "{name}");
    }
}

#[test]
fn baseline_two_endpoint_study() {
    let spec = get_example("baseline").unwrap();
    let reports = check_all(&spec.lagrangian, &spec.trajectory, &settings(&spec, 2000, 0)).unwrap();
    for name in required_for(Anchor::Both, true) {
        assert_eq!(verdict(&reports, name), Verdict::Pass, "{name}");
    }
    let tuning = Tuning::default().with_lambda_bar(2.0).with_mu(0.75);
    let schedule: Vec<f64> = (2..=12).map(|k| 2f64.powi(k)).collect();
    let report = convergence_study(
        &spec.lagrangian,
        &spec.trajectory,
        Anchor::Both,
        &schedule,
        &tuning,
        &study_options(&spec, 2.0),
    )
    .unwrap();
    assert!((report.baseline.f_y.value - 1.8).abs() < 1e-9);
    let mut prev_eps = f64::INFINITY;
    for row in &report.rows {
        let (gap, eps) = (row.gap.unwrap(), row.eps_nu.unwrap());
        // slowing down where |y'| is small only lowers the v² energy here
        assert!(gap <= 0.0, "nu={}: gap {gap}", row.nu);
        let budget = row.budget.as_ref().unwrap();
        assert!(gap <= budget.bound + 1e-6);
        assert!(eps <= prev_eps);
        prev_eps = eps;
        assert_eq!(row.mu, Some(0.75));
        assert!(row.lip_rank.unwrap() <= row.nu * (1.0 + 1e-12));
    }
}

#[test]
fn divergent_baseline_energy_gives_negative_infinite_gap() {
    let params = BTreeMap::from([("a".to_string(), 0.5), ("q".to_string(), 2.0)]);
    let spec = custom("power_law", &params).unwrap();
    let report = convergence_study(
        &spec.lagrangian,
        &spec.trajectory,
        Anchor::Initial,
        &[4.0, 16.0],
        &Tuning::default(),
        &study_options(&spec, 2.0),
    )
    .unwrap();
    assert!(!report.baseline.f_y.is_finite());
    for row in &report.rows {
        assert!(row.f_y_nu.unwrap().is_finite(), "Lipschitz competitors have finite energy");
        assert_eq!(row.gap, Some(f64::NEG_INFINITY));
    }
}

#[test]
fn checkers_are_deterministic_and_witnessed() {
    for name in ["mania", "alberti", "baseline"] {
        let spec = get_example(name).unwrap();
        let a = check_all(&spec.lagrangian, &spec.trajectory, &settings(&spec, 1000, 7)).unwrap();
        let b = check_all(&spec.lagrangian, &spec.trajectory, &settings(&spec, 1000, 7)).unwrap();
        assert_eq!(a, b, "{name}");
        for r in &a {
            if r.verdict == Verdict::Falsified && r.name != Hypothesis::Integrability {
                assert!(r.witness.is_some(), "{name}: {} falsified without a witness", r.name);
            }
        }
    }
}

#[test]
fn velocity_boundedness_implies_euclidean() {
    let line = Trajectory::scalar(Interval::unit(), |s| 0.5 * s, |_| 0.5);
    let probes = ProbeSet::on_graph(&line, &ProbeConfig::default().with_count(500));
    let opts = DistanceOptions::default();
    let quad = QuadOptions::default();
    let lags = [
        Lagrangian::velocity_only(|v| 1.0 / (1.0 - v.abs())).with_domain(|_, v| v[0].abs() < 1.0),
        Lagrangian::new(1, |_, z, v| 1.0 / (1.0 + z[0] - v[0]), |_, _| 1.0).with_domain(|z, v| v[0] < 1.0 + z[0]),
        get_example("alberti").unwrap().lagrangian,
    ];
    for lag in &lags {
        let mode = |dist| Boundedness::WellInside { lambda: 2.0, rho: 0.25, dist };
        let u = verify_boundedness(lag, &line, mode(DistanceKind::UDistance), &probes, &opts, &quad).unwrap();
        let e = verify_boundedness(lag, &line, mode(DistanceKind::Euclidean), &probes, &opts, &quad).unwrap();
        if u.verdict == Verdict::Pass {
            assert_eq!(e.verdict, Verdict::Pass, "{lag:?}");
        }
    }
}
