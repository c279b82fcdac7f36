//! Closed time intervals and finite unions of them.
//!
//! Every measurable set the reparametrization touches (the high-speed set,
//! the slow-down set and its admissible superset) is stored as an
//! [`IntervalSet`]: a sorted list of pairwise-disjoint closed components.
//! This is exact whenever the defining predicate changes value finitely
//! often, which holds for all built-in problems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of grid nodes used when scanning a predicate.
pub const DEFAULT_SCAN_NODES: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    start: f64,
    end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if start.is_finite() && end.is_finite() && start < end {
            Ok(Interval { start, end })
        } else {
            Err(Error::InvalidInterval(start, end))
        }
    }

    /// The unit interval `[0, 1]`.
    pub fn unit() -> Self {
        Interval {
            start: 0.0,
            end: 1.0,
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= self.start && s <= self.end
    }

    pub fn check(&self, s: f64) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                s,
                start: self.start,
                end: self.end,
            })
        }
    }

    pub fn clamp(&self, s: f64) -> f64 {
        s.clamp(self.start, self.end)
    }

    /// `n >= 2` equally spaced nodes including both endpoints.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let h = self.length() / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.end
                } else {
                    self.start + h * i as f64
                }
            })
            .collect()
    }
}

/// Which side of a bracketed crossing becomes the component boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Boundary on the side where the predicate fails: the set over-covers.
    Outer,
    /// Boundary on the side where the predicate holds: the set under-covers.
    Inner,
}

/// Sorted, pairwise-disjoint closed subintervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    components: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet {
            components: Vec::new(),
        }
    }

    pub fn from_interval(interval: Interval) -> Self {
        IntervalSet {
            components: vec![(interval.start, interval.end)],
        }
    }

    /// Normalizes arbitrary `(a, b)` pairs: sorts, drops empty pieces and
    /// merges overlapping or touching ones.
    pub fn new(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|&(a, b)| b > a);
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut components: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match components.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => components.push((a, b)),
            }
        }
        IntervalSet { components }
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.components.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, s: f64) -> bool {
        // components are sorted, so a binary search on left ends suffices
        let idx = self.components.partition_point(|&(a, _)| a <= s);
        idx > 0 && s <= self.components[idx - 1].1
    }

    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.components.iter().all(|&(a, b)| {
            other
                .components
                .iter()
                .any(|&(c, d)| c <= a && b <= d)
        })
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut raw = self.components.clone();
        raw.extend_from_slice(&other.components);
        IntervalSet::new(raw)
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.components.len() && j < other.components.len() {
            let (a, b) = self.components[i];
            let (c, d) = other.components[j];
            let lo = a.max(c);
            let hi = b.min(d);
            if hi > lo {
                out.push((lo, hi));
            }
            if b < d {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet::new(out)
    }

    /// Set difference up to boundary points (the result stays closed).
    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for &(a, b) in &self.components {
            let mut cursor = a;
            for &(c, d) in &other.components {
                if d <= cursor || c >= b {
                    continue;
                }
                if c > cursor {
                    out.push((cursor, c));
                }
                cursor = cursor.max(d);
                if cursor >= b {
                    break;
                }
            }
            if cursor < b {
                out.push((cursor, b));
            }
        }
        IntervalSet::new(out)
    }

    /// Complement relative to `domain`.
    pub fn complement(&self, domain: Interval) -> IntervalSet {
        IntervalSet::from_interval(domain).difference(self)
    }

    /// The components cut at every point of `cuts` lying strictly inside
    /// them. Touching pieces are kept separate.
    pub fn pieces_split_at(&self, cuts: &[f64]) -> Vec<(f64, f64)> {
        let mut sorted: Vec<f64> = cuts.iter().copied().filter(|c| c.is_finite()).collect();
        sorted.sort_by(f64::total_cmp);
        let mut out = Vec::new();
        for &(a, b) in &self.components {
            let mut left = a;
            for &c in &sorted {
                if c > left && c < b {
                    out.push((left, c));
                    left = c;
                }
            }
            out.push((left, b));
        }
        out
    }

    /// Leftmost subset with exactly the requested measure: components are
    /// accumulated from the left and the last one is split. `None` if the
    /// whole set is too small.
    pub fn leftmost_with_measure(&self, target: f64) -> Option<IntervalSet> {
        if target <= 0.0 {
            return Some(IntervalSet::empty());
        }
        let mut remaining = target;
        let mut out = Vec::new();
        for &(a, b) in &self.components {
            let len = b - a;
            if len >= remaining {
                let end = (a + remaining).min(b);
                out.push((a, end));
                return Some(IntervalSet { components: out });
            }
            out.push((a, b));
            remaining -= len;
        }
        None
    }

    /// Extracts `{s ∈ domain : pred(s)}` by scanning `nodes` equally spaced
    /// points and bisecting every sign change to full floating-point
    /// resolution.
    pub fn from_predicate<F>(domain: Interval, nodes: usize, boundary: Boundary, pred: F) -> Self
    where
        F: Fn(f64) -> bool,
    {
        let grid = domain.grid(nodes);
        let flags: Vec<bool> = grid.iter().map(|&s| pred(s)).collect();
        let mut raw = Vec::new();
        let mut open: Option<f64> = if flags[0] { Some(grid[0]) } else { None };
        for k in 1..grid.len() {
            if flags[k] == flags[k - 1] {
                continue;
            }
            let (lo, hi) = bisect_predicate(&pred, grid[k - 1], grid[k], flags[k - 1]);
            // lo keeps the left flag, hi the right flag
            if flags[k] {
                let start = match boundary {
                    Boundary::Outer => lo,
                    Boundary::Inner => hi,
                };
                open = Some(start);
            } else {
                let end = match boundary {
                    Boundary::Outer => hi,
                    Boundary::Inner => lo,
                };
                if let Some(start) = open.take() {
                    raw.push((start, end));
                }
            }
        }
        if let Some(start) = open {
            raw.push((start, domain.end));
        }
        IntervalSet::new(raw)
    }
}

/// Shrinks `[lo, hi]` around a change of `pred` until the midpoint is no
/// longer representable between the ends. `left_flag` is `pred(lo)`.
pub(crate) fn bisect_predicate<F>(pred: &F, mut lo: f64, mut hi: f64, left_flag: bool) -> (f64, f64)
where
    F: Fn(f64) -> bool,
{
    for _ in 0..2200 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) == left_flag {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}
