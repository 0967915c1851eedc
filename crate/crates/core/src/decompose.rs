//! Numerical realization of the decomposition `μ = ν/q + σ` behind the
//! strong moment property of `Σ² + qQ`.
//!
//! For an audited atomic measure `μ` the functional `L = L_μ` splits as
//! follows:
//!
//! * `ν` is the measure with `L(q f) = ∫ f dν`; atomically it keeps the
//!   bump atoms with weights `w_i q(p_i)`, and carries no mass on `{q <= 0}`.
//! * `Λ(f) = L(f) - ∫ f/q dν` annihilates the ideal `(q)` and is
//!   non-negative on squares, so it is represented on `V(q)` by `σ`.
//!
//! The functions here build `ν` and `Λ`, check the two defining properties
//! of `Λ`, and rebuild `μ`'s moments from `ν` and `σ`.

use std::fmt;

use thiserror::Error;

use crate::linalg::{is_psd, LinalgError};
use crate::measures::{support_audit, AtomicMeasure, Measure, MeasureError, Moments, SupportAudit};
use crate::momentseq::{SeqError, TruncatedSequence};
use crate::polyring::Polynomial;
use crate::scenario::{PointClass, Scenario};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error("support audit failed:\n{0}")]
    AuditFailed(SupportAudit),
    #[error("atom at {point:?} has q = {q_value:e} <= tol; 1/q is not integrable there")]
    DivisionHazard { point: Vec<f64>, q_value: f64 },
    #[error("curve component has mass off V(q) at {point:?} (q = {q_value:e})")]
    OffCurve { point: Vec<f64>, q_value: f64 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Sequence(#[from] SeqError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Split an atomic measure into its bump part and its curve part.
/// Fails if any atom violates the support set.
pub fn split(
    mu: &AtomicMeasure,
    scenario: &Scenario,
    tol: f64,
) -> Result<(AtomicMeasure, AtomicMeasure), DecomposeError> {
    let audit = support_audit(&Measure::from(mu.clone()), scenario, tol);
    if !audit.passed {
        return Err(DecomposeError::AuditFailed(audit));
    }
    let mut bump = Vec::new();
    let mut curve = Vec::new();
    for (a, e) in mu.atoms().iter().zip(&audit.entries) {
        match e.class {
            PointClass::InBump => bump.push(a.clone()),
            PointClass::OnCurve => curve.push(a.clone()),
            PointClass::Violating => unreachable!("audit passed"),
        }
    }
    Ok((
        AtomicMeasure::new(mu.dim(), bump)?,
        AtomicMeasure::new(mu.dim(), curve)?,
    ))
}

/// The measure `ν` with `L_μ(q f) = ∫ f dν`: bump atoms reweighted by
/// `q(p_i)`, curve atoms dropped.
pub fn nu_from(
    mu: &AtomicMeasure,
    scenario: &Scenario,
    tol: f64,
) -> Result<AtomicMeasure, DecomposeError> {
    let (bump, _) = split(mu, scenario, tol)?;
    Ok(bump.reweighted(|p| scenario.q().eval_unchecked(p)))
}

fn check_division(nu: &AtomicMeasure, q: &Polynomial, tol: f64) -> Result<(), DecomposeError> {
    for a in nu.atoms() {
        let q_value = q.eval_unchecked(&a.point);
        if q_value <= tol {
            return Err(DecomposeError::DivisionHazard {
                point: a.point.clone(),
                q_value,
            });
        }
    }
    Ok(())
}

/// `ν/q`: the bump part of `μ` recovered from `ν`.
pub fn nu_over_q(
    nu: &AtomicMeasure,
    q: &Polynomial,
    tol: f64,
) -> Result<AtomicMeasure, DecomposeError> {
    check_division(nu, q, tol)?;
    Ok(nu.reweighted(|p| 1.0 / q.eval_unchecked(p)))
}

/// `Λ_γ = L_γ - Σ w_i p_i^γ / q(p_i)`.
pub fn lambda_from(
    l: &TruncatedSequence,
    nu: &AtomicMeasure,
    q: &Polynomial,
    tol: f64,
) -> Result<TruncatedSequence, DecomposeError> {
    let bump = nu_over_q(nu, q, tol)?;
    Ok(l.add_scaled(-1.0, &bump.moments(l.order())?)?)
}

/// Tolerances for [`verify_lambda`], both relative to `scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaTolerance {
    pub annihilation: f64,
    pub psd: f64,
    /// Magnitude of the functional `Λ` was derived from; `1 + max|L_γ|` is
    /// typical. Defaults to `1 + max|Λ_γ|` when `None`.
    pub scale: Option<f64>,
}

impl Default for LambdaTolerance {
    fn default() -> Self {
        LambdaTolerance {
            annihilation: 1e-10,
            psd: 1e-8,
            scale: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionalSource {
    /// `L` came from an explicit measure; `ν` was constructed from it.
    Measure,
    /// `L` was a raw sequence and `ν` was supplied; only the checks on `Λ`
    /// carry information.
    RawSequence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaReport {
    /// `max |Λ(q x^γ)|` over `|γ| <= order - deg q`.
    pub annihilation: f64,
    pub annihilation_bound: f64,
    pub min_eigenvalue: f64,
    pub psd_threshold: f64,
    pub annihilates: bool,
    pub positive: bool,
    pub source: FunctionalSource,
}

impl LambdaReport {
    pub fn passed(&self) -> bool {
        self.annihilates && self.positive
    }
}

impl fmt::Display for LambdaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |b: bool| if b { "pass" } else { "FAIL" };
        writeln!(
            f,
            "Lambda(q f) = 0     max residual {:.6e} (bound {:.3e})  {}",
            self.annihilation,
            self.annihilation_bound,
            verdict(self.annihilates)
        )?;
        writeln!(
            f,
            "Lambda(f^2) >= 0    min eigenvalue {:.6e} (floor {:.3e})  {}",
            self.min_eigenvalue,
            self.psd_threshold,
            verdict(self.positive)
        )?;
        if self.source == FunctionalSource::RawSequence {
            writeln!(
                f,
                "# functional supplied as a raw sequence: only the Lambda checks are meaningful"
            )?;
        }
        Ok(())
    }
}

/// Check `Λ(q f) = 0` (through the shift `q(E)Λ`) and `Λ(f²) >= 0`
/// (through the moment matrix of order `floor(order / 2)`).
pub fn verify_lambda(
    lambda: &TruncatedSequence,
    q: &Polynomial,
    tol: &LambdaTolerance,
) -> Result<LambdaReport, DecomposeError> {
    let scale = tol.scale.unwrap_or(1.0 + lambda.max_abs());
    let shifted = lambda.shift(q)?;
    let annihilation = shifted.max_abs();
    let annihilation_bound = tol.annihilation * scale * q.l1_norm().max(1.0);
    let mm = lambda.moment_matrix(lambda.order() / 2)?;
    let v = is_psd(&mm.matrix, tol.psd)?;
    let psd_threshold = v.threshold.min(-tol.psd * scale);
    Ok(LambdaReport {
        annihilation,
        annihilation_bound,
        min_eigenvalue: v.min_eigenvalue,
        psd_threshold,
        annihilates: annihilation <= annihilation_bound,
        positive: v.min_eigenvalue >= psd_threshold,
        source: FunctionalSource::Measure,
    })
}

/// Moments of `ν/q + σ` up to `order`. `σ` must live on `V(q)`.
pub fn reconstruct(
    nu: &AtomicMeasure,
    sigma: &Measure,
    q: &Polynomial,
    order: u32,
    tol: f64,
) -> Result<TruncatedSequence, DecomposeError> {
    for a in sigma.atomic().atoms() {
        let q_value = q.eval_unchecked(&a.point);
        if q_value.abs() > tol {
            return Err(DecomposeError::OffCurve {
                point: a.point.clone(),
                q_value,
            });
        }
    }
    for c in sigma.curves() {
        for p in c.audit_points() {
            let q_value = q.eval_unchecked(&p);
            if q_value.abs() > tol {
                return Err(DecomposeError::OffCurve { point: p, q_value });
            }
        }
    }
    let bump = nu_over_q(nu, q, tol)?;
    Ok(bump
        .moments(order)?
        .add_scaled(1.0, &sigma.moments(order)?)?)
}

/// Both sides of `(∫ f g dν)² <= (∫ q g² dν) L(f²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchySchwarzGap {
    pub lhs: f64,
    pub rhs: f64,
}

impl CauchySchwarzGap {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Evaluate the Cauchy–Schwarz bound linking `ν` to `L`. The `ν` integrals
/// go through the moments of `ν`; `L(f²)` through the Riesz functional.
pub fn cauchy_schwarz_gap(
    l: &TruncatedSequence,
    nu: &AtomicMeasure,
    q: &Polynomial,
    f: &Polynomial,
    g: &Polynomial,
) -> Result<CauchySchwarzGap, DecomposeError> {
    let order = (f * g).degree().max((&(q * g) * g).degree());
    let nu_moments = nu.moments(order)?;
    let fg = nu_moments.riesz_apply(&(f * g))?;
    let qgg = nu_moments.riesz_apply(&(&(q * g) * g))?;
    let ff = l.riesz_apply(&(f * f))?;
    Ok(CauchySchwarzGap {
        lhs: fg * fg,
        rhs: qgg * ff,
    })
}

/// Everything the decomposition pipeline produces for one measure.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub nu: AtomicMeasure,
    pub sigma: Measure,
    pub lambda: TruncatedSequence,
    pub report: LambdaReport,
    /// `max |reconstruct - moments_of(μ)|`.
    pub reconstruction_error: f64,
}

/// Run the full pipeline on a measure. Curve pieces lying on `V(q)` stay in
/// `σ` as they are; every other piece is replaced by its exact quadrature
/// atoms for `order` and routed atom by atom.
pub fn decompose(
    mu: &Measure,
    scenario: &Scenario,
    order: u32,
    tol: f64,
) -> Result<Decomposition, DecomposeError> {
    let audit = support_audit(mu, scenario, tol);
    if !audit.passed {
        return Err(DecomposeError::AuditFailed(audit));
    }
    let q = scenario.q();
    let mut atoms = mu.atomic().clone();
    let mut curve_pieces = Vec::new();
    for c in mu.curves() {
        let on_curve = c
            .audit_points()
            .iter()
            .all(|p| q.eval_unchecked(p).abs() <= tol);
        if on_curve {
            curve_pieces.push(c.clone());
        } else {
            atoms = atoms.plus(&c.discretize(order)?)?;
        }
    }
    let (bump, curve_atoms) = split(&atoms, scenario, tol)?;
    let nu = bump.reweighted(|p| q.eval_unchecked(p));
    let sigma = Measure::new(curve_atoms, curve_pieces)?;

    let l = mu.moments(order)?;
    let lambda = lambda_from(&l, &nu, q, tol)?;
    let report = verify_lambda(
        &lambda,
        q,
        &LambdaTolerance {
            scale: Some(1.0 + l.max_abs()),
            ..LambdaTolerance::default()
        },
    )?;
    let rebuilt = reconstruct(&nu, &sigma, q, order, tol)?;
    let reconstruction_error = rebuilt
        .values()
        .iter()
        .zip(l.values())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(Decomposition {
        nu,
        sigma,
        lambda,
        report,
        reconstruction_error,
    })
}
