//! Grid sampling of the support set `V(q) ∪ [K_Q ∩ {q > 0}]`.
//!
//! Grid points are classified directly. Curve points between grid points
//! are located by bisection on every grid edge along which `q` changes sign.

use std::fmt;

use thiserror::Error;

use crate::measures::DEFAULT_AUDIT_TOL;
use crate::scenario::{PointClass, Scenario};

const BISECTION_TOL: f64 = 1e-10;
const MAX_GRID_POINTS: usize = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("bounding box is empty along axis {0}")]
    EmptyBox(usize),
    #[error("grid step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("bounding box has dimension {got}, scenario has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid would have more than {MAX_GRID_POINTS} points")]
    TooManyPoints,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    step: f64,
}

impl SamplingSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, step: f64) -> Result<Self, SamplingError> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(SamplingError::BadStep(step));
        }
        if lower.len() != upper.len() {
            return Err(SamplingError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] < upper[i])) {
            return Err(SamplingError::EmptyBox(i));
        }
        Ok(SamplingSpec { lower, upper, step })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn square(dim: usize, lo: f64, hi: f64, step: f64) -> Result<Self, SamplingError> {
        Self::new(vec![lo; dim], vec![hi; dim], step)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn counts(&self) -> Vec<usize> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| ((hi - lo) / self.step + 1e-9).floor() as usize + 1)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportLabel {
    Curve,
    Bump,
    Outside,
}

impl fmt::Display for SupportLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SupportLabel::Curve => "curve",
            SupportLabel::Bump => "bump",
            SupportLabel::Outside => "outside",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPoint {
    pub point: Vec<f64>,
    pub label: SupportLabel,
}

fn label_of(scenario: &Scenario, p: &[f64]) -> SupportLabel {
    match scenario.classify(p, DEFAULT_AUDIT_TOL) {
        PointClass::OnCurve => SupportLabel::Curve,
        PointClass::InBump => SupportLabel::Bump,
        PointClass::Violating => SupportLabel::Outside,
    }
}

/// Labeled grid points followed by bisected curve points.
pub fn support_points(
    scenario: &Scenario,
    spec: &SamplingSpec,
) -> Result<Vec<LabeledPoint>, SamplingError> {
    if spec.dim() != scenario.dim() {
        return Err(SamplingError::DimensionMismatch {
            expected: scenario.dim(),
            got: spec.dim(),
        });
    }
    let counts = spec.counts();
    let total = counts
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .filter(|&t| t <= MAX_GRID_POINTS)
        .ok_or(SamplingError::TooManyPoints)?;
    let d = spec.dim();
    let coord = |axis: usize, k: usize| spec.lower[axis] + k as f64 * spec.step;
    let q = scenario.q();

    let mut grid = Vec::with_capacity(total);
    let mut curve = Vec::new();
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let p: Vec<f64> = (0..d).map(|a| coord(a, idx[a])).collect();
        let qa = q.eval_unchecked(&p);
        for axis in 0..d {
            if idx[axis] + 1 < counts[axis] {
                let mut nb = p.clone();
                nb[axis] = coord(axis, idx[axis] + 1);
                let qb = q.eval_unchecked(&nb);
                if qa * qb < 0.0 {
                    let along = |t: f64| {
                        let mut x = p.clone();
                        x[axis] = t;
                        x
                    };
                    let t = bisect(|t| q.eval_unchecked(&along(t)), p[axis], nb[axis], qa);
                    curve.push(LabeledPoint {
                        point: along(t),
                        label: SupportLabel::Curve,
                    });
                }
            }
        }
        grid.push(LabeledPoint {
            label: label_of(scenario, &p),
            point: p,
        });
        // advance the multi-index, last axis fastest
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < counts[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    grid.extend(curve);
    Ok(grid)
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let sa = fa.signum();
    while (b - a).abs() > BISECTION_TOL {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// CSV with header `x1,x2,...,label`.
pub fn to_csv(points: &[LabeledPoint]) -> String {
    let d = points.first().map_or(2, |p| p.point.len());
    let mut out: String = (1..=d).map(|i| format!("x{i},")).collect();
    out.push_str("label\n");
    for lp in points {
        for x in &lp.point {
            out.push_str(&format!("{x},"));
        }
        out.push_str(&format!("{}\n", lp.label));
    }
    out
}
