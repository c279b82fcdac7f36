//! Seeded probe sets for falsification-style checks.
//!
//! A probe is a triple `(s, z, v)`. Probe sets are generated from a
//! `ChaCha8` stream so a fixed seed yields the same set on every platform.
//! A share of the probes is adversarial: times pushed log-uniformly
//! towards the interval ends and velocities with log-uniform magnitude, to
//! reach the places where hypotheses typically fail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::interval::Interval;
use crate::trajectory::Trajectory;

pub const DEFAULT_PROBE_COUNT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub s: f64,
    pub z: Vec<f64>,
    pub v: Vec<f64>,
}

impl Probe {
    pub fn new(s: f64, z: Vec<f64>, v: Vec<f64>) -> Self {
        Probe { s, z, v }
    }

    pub fn scalar(s: f64, z: f64, v: f64) -> Self {
        Probe {
            s,
            z: vec![z],
            v: vec![v],
        }
    }
}

/// Outcome of a falsification check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Falsified,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Falsified => "falsified",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub count: usize,
    pub seed: u64,
    /// Bulk velocities are drawn from `[-v_radius, v_radius]^n`.
    pub v_radius: f64,
    /// Fraction of adversarial probes.
    pub adversarial: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            count: DEFAULT_PROBE_COUNT,
            seed: 0,
            v_radius: 4.0,
            adversarial: 0.2,
        }
    }
}

impl ProbeConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn with_v_radius(mut self, v_radius: f64) -> Self {
        self.v_radius = v_radius;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSet {
    pub seed: u64,
    pub probes: Vec<Probe>,
}

impl ProbeSet {
    pub fn from_probes(probes: Vec<Probe>) -> Self {
        ProbeSet { seed: 0, probes }
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Probe> {
        self.probes.iter()
    }

    /// Probes with `z = y(s)`: the states actually visited by the curve.
    pub fn on_graph(traj: &Trajectory, cfg: &ProbeConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let interval = traj.interval();
        let dim = traj.dim();
        let probes = (0..cfg.count)
            .map(|i| {
                let adversarial = is_adversarial(i, cfg);
                let s = draw_time(&mut rng, interval, adversarial);
                let z = traj.value(s);
                let v = draw_velocity(&mut rng, dim, cfg.v_radius, adversarial);
                Probe { s, z, v }
            })
            .collect();
        ProbeSet {
            seed: cfg.seed,
            probes,
        }
    }

    /// Probes with `z` uniform in the box `z_box` (one range per component).
    pub fn in_box(interval: Interval, z_box: &[(f64, f64)], cfg: &ProbeConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let dim = z_box.len();
        let probes = (0..cfg.count)
            .map(|i| {
                let adversarial = is_adversarial(i, cfg);
                let s = draw_time(&mut rng, interval, adversarial);
                let z = z_box
                    .iter()
                    .map(|&(lo, hi)| if hi > lo { rng.random_range(lo..=hi) } else { lo })
                    .collect();
                let v = draw_velocity(&mut rng, dim, cfg.v_radius, adversarial);
                Probe { s, z, v }
            })
            .collect();
        ProbeSet {
            seed: cfg.seed,
            probes,
        }
    }
}

fn is_adversarial(i: usize, cfg: &ProbeConfig) -> bool {
    // deterministic interleaving keeps the adversarial share exact
    let period = (1.0 / cfg.adversarial.clamp(1e-9, 1.0)).round().max(1.0) as usize;
    cfg.adversarial > 0.0 && i % period == period - 1
}

fn draw_time(rng: &mut ChaCha8Rng, interval: Interval, adversarial: bool) -> f64 {
    if !adversarial {
        return rng.random_range(interval.start()..=interval.end());
    }
    let offset = interval.length() * 10f64.powf(-rng.random_range(0.0..12.0));
    if rng.random_bool(0.5) {
        interval.clamp(interval.start() + offset)
    } else {
        interval.clamp(interval.end() - offset)
    }
}

fn draw_velocity(rng: &mut ChaCha8Rng, dim: usize, radius: f64, adversarial: bool) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            if adversarial {
                let mag = 10f64.powf(rng.random_range(-6.0..6.0));
                if rng.random_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            } else {
                rng.random_range(-radius..=radius)
            }
        })
        .collect()
}
