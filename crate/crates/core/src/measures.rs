//! Explicit measures on ℝ^d and their truncated moment sequences.
//!
//! This is the brute-force oracle the rest of the crate is tested against:
//! atoms are summed directly and curve pieces are integrated with a
//! Gauss–Legendre rule large enough to be exact for every needed integrand.

use std::fmt;

use thiserror::Error;

use crate::momentseq::TruncatedSequence;
use crate::polyring::{monomial_basis, Polynomial};
use crate::quadrature::{gauss_legendre, nodes_for_exactness};
use crate::scenario::{PointClass, Scenario};

/// Tolerance for support classification.
pub const DEFAULT_AUDIT_TOL: f64 = 1e-9;

/// Node count used to audit curve pieces without a fixed rule size.
pub const AUDIT_NODES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("atom {index} has non-positive or non-finite weight {weight}")]
    NonPositiveWeight { index: usize, weight: f64 },
    #[error("atom {index} has {got} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("quadrature needs {needed} nodes for order {order}, curve fixes {given}")]
    InsufficientNodes {
        given: usize,
        needed: usize,
        order: u32,
    },
    #[error("density is negative ({value}) at parameter t = {t}")]
    NegativeDensity { t: f64, value: f64 },
    #[error("parameter interval [{t0}, {t1}] is empty or not finite")]
    EmptyInterval { t0: f64, t1: f64 },
    #[error("curve parametrization and density must be univariate polynomials")]
    NotUnivariate,
    #[error("measure has no components, its dimension is unknown")]
    Empty,
    #[error("cannot combine measures of dimension {0} and {1}")]
    CombineMismatch(usize, usize),
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: Vec<f64>,
    pub weight: f64,
}

impl Atom {
    pub fn new(point: Vec<f64>, weight: f64) -> Self {
        Atom { point, weight }
    }
}

/// Finite positive combination of point masses. May be empty (the zero
/// measure), which is how an absent bump component is represented.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self, MeasureError> {
        for (index, a) in atoms.iter().enumerate() {
            if a.point.len() != dim {
                return Err(MeasureError::DimensionMismatch {
                    index,
                    expected: dim,
                    got: a.point.len(),
                });
            }
            if !(a.weight > 0.0 && a.weight.is_finite()) || a.point.iter().any(|x| !x.is_finite()) {
                return Err(MeasureError::NonPositiveWeight {
                    index,
                    weight: a.weight,
                });
            }
        }
        Ok(AtomicMeasure { dim, atoms })
    }

    pub fn empty(dim: usize) -> Self {
        AtomicMeasure {
            dim,
            atoms: Vec::new(),
        }
    }

    pub fn dirac(point: Vec<f64>) -> Self {
        AtomicMeasure {
            dim: point.len(),
            atoms: vec![Atom::new(point, 1.0)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `∫ f dμ = Σ w_i f(p_i)`.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.weight * f(&a.point)).sum()
    }

    pub fn scaled(&self, k: f64) -> Result<Self, MeasureError> {
        if !(k > 0.0) {
            return Err(MeasureError::NonPositiveScale(k));
        }
        Ok(AtomicMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(a.point.clone(), a.weight * k))
                .collect(),
        })
    }

    pub fn plus(&self, other: &AtomicMeasure) -> Result<Self, MeasureError> {
        if self.dim != other.dim {
            return Err(MeasureError::CombineMismatch(self.dim, other.dim));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Ok(AtomicMeasure {
            dim: self.dim,
            atoms,
        })
    }

    /// Each weight replaced by `f(point) * weight`; atoms whose new weight
    /// is not positive are dropped.
    pub(crate) fn reweighted(&self, f: impl Fn(&[f64]) -> f64) -> AtomicMeasure {
        AtomicMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .filter_map(|a| {
                    let w = a.weight * f(&a.point);
                    (w > 0.0).then(|| Atom::new(a.point.clone(), w))
                })
                .collect(),
        }
    }
}

/// A measure `density(t) dt` pushed forward along a polynomial curve
/// `t ↦ (x_1(t), ..., x_d(t))`, `t ∈ [t0, t1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveMeasure {
    param: Vec<Polynomial>,
    t0: f64,
    t1: f64,
    density: Polynomial,
    nodes: Option<usize>,
}

impl CurveMeasure {
    pub fn new(
        param: Vec<Polynomial>,
        t0: f64,
        t1: f64,
        density: Polynomial,
    ) -> Result<Self, MeasureError> {
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(MeasureError::EmptyInterval { t0, t1 });
        }
        if param.is_empty() || param.iter().chain([&density]).any(|p| p.dim() != 1) {
            return Err(MeasureError::NotUnivariate);
        }
        Ok(CurveMeasure {
            param,
            t0,
            t1,
            density,
            nodes: None,
        })
    }

    /// Fix the quadrature rule size instead of choosing it per order.
    pub fn with_nodes(mut self, m: usize) -> Self {
        self.nodes = Some(m);
        self
    }

    pub fn dim(&self) -> usize {
        self.param.len()
    }

    pub fn param(&self) -> &[Polynomial] {
        &self.param
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn density(&self) -> &Polynomial {
        &self.density
    }

    pub fn nodes(&self) -> Option<usize> {
        self.nodes
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        self.param.iter().map(|p| p.eval_unchecked(&[t])).collect()
    }

    fn max_param_degree(&self) -> u32 {
        self.param.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    /// Rule size that integrates `density(t) x(t)^γ` exactly for all
    /// `|γ| <= order`.
    pub fn required_nodes(&self, order: u32) -> usize {
        nodes_for_exactness(order * self.max_param_degree() + self.density.degree())
    }

    /// Parameter values and combined weights `w_k * density(t_k) * (t1-t0)/2`
    /// of an `m`-point rule.
    fn rule(&self, m: usize) -> Result<Vec<(f64, f64)>, MeasureError> {
        let (u, w) = gauss_legendre(m);
        let half = 0.5 * (self.t1 - self.t0);
        let mid = 0.5 * (self.t1 + self.t0);
        u.iter()
            .zip(&w)
            .map(|(&ui, &wi)| {
                let t = mid + half * ui;
                let dens = self.density.eval_unchecked(&[t]);
                if dens < 0.0 {
                    return Err(MeasureError::NegativeDensity { t, value: dens });
                }
                Ok((t, wi * dens * half))
            })
            .collect()
    }

    /// Exact atomic surrogate: same moments as this curve measure up to
    /// `order`.
    pub fn discretize(&self, order: u32) -> Result<AtomicMeasure, MeasureError> {
        let needed = self.required_nodes(order);
        let m = match self.nodes {
            Some(given) if given < needed => {
                return Err(MeasureError::InsufficientNodes {
                    given,
                    needed,
                    order,
                });
            }
            Some(given) => given,
            None => needed,
        };
        let atoms = self
            .rule(m)?
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .map(|(t, w)| Atom::new(self.point(t), w))
            .collect();
        Ok(AtomicMeasure {
            dim: self.dim(),
            atoms,
        })
    }

    /// Points at which the support is audited.
    pub fn audit_points(&self) -> Vec<Vec<f64>> {
        let (u, _) = gauss_legendre(self.nodes.unwrap_or(AUDIT_NODES));
        let half = 0.5 * (self.t1 - self.t0);
        let mid = 0.5 * (self.t1 + self.t0);
        u.iter().map(|&ui| self.point(mid + half * ui)).collect()
    }
}

/// Finite sum of an atomic part and curve pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    atoms: AtomicMeasure,
    curves: Vec<CurveMeasure>,
}

impl Measure {
    pub fn new(atoms: AtomicMeasure, curves: Vec<CurveMeasure>) -> Result<Self, MeasureError> {
        if let Some(c) = curves.iter().find(|c| c.dim() != atoms.dim()) {
            return Err(MeasureError::CombineMismatch(atoms.dim(), c.dim()));
        }
        Ok(Measure { atoms, curves })
    }

    pub fn dim(&self) -> usize {
        self.atoms.dim()
    }

    pub fn atomic(&self) -> &AtomicMeasure {
        &self.atoms
    }

    pub fn curves(&self) -> &[CurveMeasure] {
        &self.curves
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.curves.is_empty()
    }

    /// Atomic measure with the same moments up to `order`.
    pub fn discretize(&self, order: u32) -> Result<AtomicMeasure, MeasureError> {
        self.curves
            .iter()
            .try_fold(self.atoms.clone(), |acc, c| acc.plus(&c.discretize(order)?))
    }

    pub fn plus(&self, other: &Measure) -> Result<Self, MeasureError> {
        let atoms = self.atoms.plus(&other.atoms)?;
        let mut curves = self.curves.clone();
        curves.extend(other.curves.iter().cloned());
        Measure::new(atoms, curves)
    }

    pub fn scaled(&self, k: f64) -> Result<Self, MeasureError> {
        let atoms = self.atoms.scaled(k)?;
        let curves = self
            .curves
            .iter()
            .map(|c| CurveMeasure {
                density: c.density.scale(k),
                ..c.clone()
            })
            .collect();
        Ok(Measure { atoms, curves })
    }
}

impl From<AtomicMeasure> for Measure {
    fn from(atoms: AtomicMeasure) -> Self {
        Measure {
            atoms,
            curves: Vec::new(),
        }
    }
}

impl From<CurveMeasure> for Measure {
    fn from(c: CurveMeasure) -> Self {
        Measure {
            atoms: AtomicMeasure::empty(c.dim()),
            curves: vec![c],
        }
    }
}

/// Truncated power moments `s_γ = ∫ x^γ dμ`.
pub trait Moments {
    fn moments(&self, order: u32) -> Result<TruncatedSequence, MeasureError>;
}

impl Moments for AtomicMeasure {
    fn moments(&self, order: u32) -> Result<TruncatedSequence, MeasureError> {
        let basis = monomial_basis(self.dim, order);
        let mut values = vec![0.0; basis.len()];
        let mut powers = vec![vec![1.0; order as usize + 1]; self.dim];
        for a in &self.atoms {
            for (i, &xi) in a.point.iter().enumerate() {
                for k in 1..=order as usize {
                    powers[i][k] = powers[i][k - 1] * xi;
                }
            }
            for (v, e) in values.iter_mut().zip(&basis) {
                let mono: f64 = e
                    .entries()
                    .iter()
                    .enumerate()
                    .map(|(i, &g)| powers[i][g as usize])
                    .product();
                *v += a.weight * mono;
            }
        }
        Ok(TruncatedSequence::from_values(self.dim, order, values).expect("basis length"))
    }
}

impl Moments for CurveMeasure {
    fn moments(&self, order: u32) -> Result<TruncatedSequence, MeasureError> {
        self.discretize(order)?.moments(order)
    }
}

impl Moments for Measure {
    fn moments(&self, order: u32) -> Result<TruncatedSequence, MeasureError> {
        let mut s = self.atoms.moments(order)?;
        for c in &self.curves {
            s = s.add_scaled(1.0, &c.moments(order)?).expect("same shape");
        }
        Ok(s)
    }
}

/// Convenience wrapper for [`Moments::moments`].
pub fn moments_of(mu: &impl Moments, order: u32) -> Result<TruncatedSequence, MeasureError> {
    mu.moments(order)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditSource {
    Atom(usize),
    CurveNode { curve: usize, node: usize },
}

impl fmt::Display for AuditSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditSource::Atom(i) => write!(f, "atom {i}"),
            AuditSource::CurveNode { curve, node } => write!(f, "curve {curve} node {node}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditEntry {
    pub source: AuditSource,
    pub point: Vec<f64>,
    pub q_value: f64,
    pub class: PointClass,
}

/// Per-point classification of a measure's support against
/// `V(q) ∪ [K_Q ∩ {q > 0}]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportAudit {
    pub entries: Vec<AuditEntry>,
    pub passed: bool,
}

impl SupportAudit {
    pub fn violations(&self) -> impl Iterator<Item = &AuditEntry> {
        self.entries
            .iter()
            .filter(|e| e.class == PointClass::Violating)
    }
}

impl fmt::Display for SupportAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let count = |c| self.entries.iter().filter(|e| e.class == c).count();
        writeln!(
            f,
            "support audit: {} ({} on-curve, {} in-bump, {} violating)",
            if self.passed { "pass" } else { "FAIL" },
            count(PointClass::OnCurve),
            count(PointClass::InBump),
            count(PointClass::Violating),
        )?;
        for e in self.violations() {
            writeln!(
                f,
                "  violating {} at {:?} (q = {:e})",
                e.source, e.point, e.q_value
            )?;
        }
        Ok(())
    }
}

pub fn support_audit(mu: &Measure, scenario: &Scenario, tol: f64) -> SupportAudit {
    let classify = |source, point: Vec<f64>| {
        let q_value = scenario.q().eval_unchecked(&point);
        let class = scenario.classify(&point, tol);
        AuditEntry {
            source,
            point,
            q_value,
            class,
        }
    };
    let mut entries: Vec<AuditEntry> = mu
        .atomic()
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| classify(AuditSource::Atom(i), a.point.clone()))
        .collect();
    for (ci, c) in mu.curves().iter().enumerate() {
        for (ni, p) in c.audit_points().into_iter().enumerate() {
            entries.push(classify(
                AuditSource::CurveNode {
                    curve: ci,
                    node: ni,
                },
                p,
            ));
        }
    }
    let passed = entries.iter().all(|e| e.class != PointClass::Violating);
    SupportAudit { entries, passed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::Exponent;

    fn t() -> Polynomial {
        Polynomial::var(1, 0)
    }

    fn e(a: u32, b: u32) -> Exponent {
        Exponent::new(vec![a, b])
    }

    fn half_disk() -> Scenario {
        let x1 = Polynomial::var(2, 0);
        let x2 = Polynomial::var(2, 1);
        let r = &(&Polynomial::one(2) - &(&x1 * &x1)) - &(&x2 * &x2);
        Scenario::new(x1, vec![r]).unwrap()
    }

    #[test]
    fn dirac_moments() {
        let s = AtomicMeasure::dirac(vec![2.0, 3.0]).moments(2).unwrap();
        let expected = [
            (e(0, 0), 1.0),
            (e(1, 0), 2.0),
            (e(0, 1), 3.0),
            (e(2, 0), 4.0),
            (e(1, 1), 6.0),
            (e(0, 2), 9.0),
        ];
        for (x, v) in expected {
            assert_eq!(s.value(&x), v);
        }
    }

    #[test]
    fn axis_segment_moments() {
        let seg = CurveMeasure::new(
            vec![Polynomial::zero(1), t()],
            -1.0,
            1.0,
            Polynomial::one(1),
        )
        .unwrap();
        let s = seg.moments(2).unwrap();
        assert!((s.value(&e(0, 0)) - 2.0).abs() < 1e-15);
        assert!(s.value(&e(0, 1)).abs() < 1e-15);
        assert!((s.value(&e(0, 2)) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.value(&e(1, 0)), 0.0);
        assert_eq!(s.value(&e(2, 0)), 0.0);
        assert_eq!(s.value(&e(1, 1)), 0.0);
    }

    #[test]
    fn sum_of_atoms_is_sum_of_sequences() {
        let a = AtomicMeasure::dirac(vec![0.5, -1.0]);
        let b = AtomicMeasure::dirac(vec![2.0, 0.25]);
        let sum = a.plus(&b).unwrap().moments(4).unwrap();
        let sep = a
            .moments(4)
            .unwrap()
            .add_scaled(1.0, &b.moments(4).unwrap())
            .unwrap();
        assert_eq!(sum, sep);
    }

    #[test]
    fn direct_summation_oracle() {
        let mu = AtomicMeasure::new(
            2,
            vec![
                Atom::new(vec![0.3, -0.7], 0.2),
                Atom::new(vec![-1.5, 2.0], 1.3),
            ],
        )
        .unwrap();
        let s = mu.moments(6).unwrap();
        for (x, v) in s.iter() {
            let direct: f64 = mu.atoms().iter().map(|a| a.weight * x.eval(&a.point)).sum();
            assert!((v - direct).abs() <= 1e-14 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn curve_moments_stable_under_refinement() {
        // parabola (t, t^2) with density 1 + t^2 on [-1, 2]
        let c = CurveMeasure::new(
            vec![t(), &t() * &t()],
            -1.0,
            2.0,
            &Polynomial::one(1) + &(&t() * &t()),
        )
        .unwrap();
        let order = 6;
        let base = c.moments(order).unwrap();
        let twice = c
            .clone()
            .with_nodes(2 * c.required_nodes(order))
            .moments(order)
            .unwrap();
        for (a, b) in base.values().iter().zip(twice.values()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        // closed form: s_(1,0) = ∫ t (1 + t²) dt on [-1, 2] = 3/2 + 15/4
        assert!((base.value(&e(1, 0)) - (1.5 + 3.75)).abs() < 1e-13);
    }

    #[test]
    fn insufficient_nodes_rejected() {
        let c = CurveMeasure::new(vec![t(), &t() * &t()], 0.0, 1.0, Polynomial::one(1))
            .unwrap()
            .with_nodes(2);
        assert!(matches!(
            c.moments(4),
            Err(MeasureError::InsufficientNodes { needed: 5, .. })
        ));
    }

    #[test]
    fn negative_density_rejected() {
        let c = CurveMeasure::new(vec![t(), t()], -1.0, 1.0, t()).unwrap();
        assert!(matches!(
            c.moments(2),
            Err(MeasureError::NegativeDensity { .. })
        ));
    }

    #[test]
    fn invalid_atoms_rejected() {
        assert!(matches!(
            AtomicMeasure::new(2, vec![Atom::new(vec![0.0, 0.0], 0.0)]),
            Err(MeasureError::NonPositiveWeight { .. })
        ));
        assert!(AtomicMeasure::new(2, vec![Atom::new(vec![0.0], 1.0)]).is_err());
        assert!(CurveMeasure::new(vec![t()], 1.0, 1.0, Polynomial::one(1)).is_err());
    }

    #[test]
    fn linearity_with_positive_scalars() {
        let a: Measure = AtomicMeasure::dirac(vec![0.1, 0.9]).into();
        let b: Measure = CurveMeasure::new(
            vec![Polynomial::zero(1), t()],
            -2.0,
            2.0,
            Polynomial::one(1),
        )
        .unwrap()
        .into();
        let combo = a
            .scaled(0.3)
            .unwrap()
            .plus(&b.scaled(2.5).unwrap())
            .unwrap();
        let lhs = combo.moments(6).unwrap();
        let rhs = a
            .moments(6)
            .unwrap()
            .scale(0.3)
            .add_scaled(2.5, &b.moments(6).unwrap())
            .unwrap();
        for (x, y) in lhs.values().iter().zip(rhs.values()) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn audit_examples() {
        let s = half_disk();
        let mu = Measure::from(
            AtomicMeasure::new(
                2,
                vec![
                    Atom::new(vec![0.0, 2.0], 1.0),
                    Atom::new(vec![0.25, 0.0], 1.0),
                    Atom::new(vec![-0.5, 0.0], 1.0),
                ],
            )
            .unwrap(),
        );
        let audit = support_audit(&mu, &s, DEFAULT_AUDIT_TOL);
        let classes: Vec<PointClass> = audit.entries.iter().map(|e| e.class).collect();
        assert_eq!(
            classes,
            [
                PointClass::OnCurve,
                PointClass::InBump,
                PointClass::Violating
            ]
        );
        assert!(!audit.passed);
        assert_eq!(audit.violations().count(), 1);

        let axis: Measure = CurveMeasure::new(
            vec![Polynomial::zero(1), t()],
            -5.0,
            5.0,
            Polynomial::one(1),
        )
        .unwrap()
        .into();
        let audit = support_audit(&axis, &s, DEFAULT_AUDIT_TOL);
        assert!(audit.passed);
        assert_eq!(audit.entries.len(), AUDIT_NODES);
    }
}
