//! Support sets of the form `V(q) ∪ [K_Q ∩ {q > 0}]`: the curve polynomial
//! `q`, the generators `r_1..r_k` of the archimedean module `Q`, and the
//! bookkeeping around them.

use std::fmt;

use thiserror::Error;

use crate::polyring::{PolyError, Polynomial};
use crate::sosearch::GramBlock;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("curve polynomial q must be non-zero")]
    ZeroCurve,
    #[error("dimension mismatch: scenario has dimension {expected}, polynomial has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("archimedean bound must be positive, got {0}")]
    NonPositiveBound(f64),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Who vouches for the curve hypotheses (real principal ideal, ordinary
/// multiple points with independent tangents, rational non-singular
/// unbounded components without loops). They are never checked
/// computationally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveAssertion {
    /// Shipped catalog entry whose curve is documented as valid.
    Vetted { catalog: String },
    /// Supplied by the user; `claimed_catalog` echoes a catalog name found in
    /// a scenario file, which does not upgrade the assertion.
    UserAsserted { claimed_catalog: Option<String> },
}

impl fmt::Display for CurveAssertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveAssertion::Vetted { catalog } => {
                write!(f, "curve hypotheses vetted (catalog entry \"{catalog}\")")
            }
            CurveAssertion::UserAsserted { .. } => write!(f, "curve hypotheses asserted by user"),
        }
    }
}

/// Generator of the enhanced module `Σ² + qΣ² + Σ_j q r_j Σ²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorLabel {
    One,
    Q,
    /// `q * r_j` with one-based `j`.
    QTimesR(usize),
}

impl fmt::Display for GeneratorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorLabel::One => write!(f, "1"),
            GeneratorLabel::Q => write!(f, "q"),
            GeneratorLabel::QTimesR(j) => write!(f, "q*r{j}"),
        }
    }
}

impl std::str::FromStr for GeneratorLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1" => Ok(GeneratorLabel::One),
            "q" => Ok(GeneratorLabel::Q),
            _ => s
                .strip_prefix("q*r")
                .and_then(|j| j.parse::<usize>().ok())
                .filter(|&j| j >= 1)
                .map(GeneratorLabel::QTimesR)
                .ok_or_else(|| format!("unknown generator label {s:?}")),
        }
    }
}

/// Sum-of-squares multipliers witnessing `C - |x|² = σ_0 + Σ_j r_j σ_j`.
/// `multipliers[0]` is `σ_0`, `multipliers[j]` multiplies `r_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArchimedeanWitness {
    pub bound: f64,
    pub multipliers: Vec<GramBlock>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    dim: usize,
    q: Polynomial,
    generators: Vec<Polynomial>,
    archimedean_bound: Option<f64>,
    archimedean_witness: Option<ArchimedeanWitness>,
    curve_assertion: CurveAssertion,
}

impl Scenario {
    /// A user-asserted scenario with curve polynomial `q` and module
    /// generators `r_1..r_k`.
    pub fn new(q: Polynomial, generators: Vec<Polynomial>) -> Result<Self, ScenarioError> {
        if q.is_zero() {
            return Err(ScenarioError::ZeroCurve);
        }
        let dim = q.dim();
        if let Some(r) = generators.iter().find(|r| r.dim() != dim) {
            return Err(ScenarioError::DimensionMismatch {
                expected: dim,
                got: r.dim(),
            });
        }
        Ok(Scenario {
            dim,
            q,
            generators,
            archimedean_bound: None,
            archimedean_witness: None,
            curve_assertion: CurveAssertion::UserAsserted {
                claimed_catalog: None,
            },
        })
    }

    pub fn with_archimedean_bound(mut self, c: f64) -> Result<Self, ScenarioError> {
        if !(c > 0.0) {
            return Err(ScenarioError::NonPositiveBound(c));
        }
        self.archimedean_bound = Some(c);
        Ok(self)
    }

    pub fn with_archimedean_witness(
        mut self,
        w: ArchimedeanWitness,
    ) -> Result<Self, ScenarioError> {
        if !(w.bound > 0.0) {
            return Err(ScenarioError::NonPositiveBound(w.bound));
        }
        self.archimedean_bound = Some(w.bound);
        self.archimedean_witness = Some(w);
        Ok(self)
    }

    pub fn with_assertion(mut self, a: CurveAssertion) -> Self {
        self.curve_assertion = a;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> &Polynomial {
        &self.q
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn archimedean_bound(&self) -> Option<f64> {
        self.archimedean_bound
    }

    pub fn archimedean_witness(&self) -> Option<&ArchimedeanWitness> {
        self.archimedean_witness.as_ref()
    }

    pub fn curve_assertion(&self) -> &CurveAssertion {
        &self.curve_assertion
    }

    /// Generators of the enhanced module in report order:
    /// `1, q, q r_1, ..., q r_k`.
    pub fn module_generators(&self) -> Vec<(GeneratorLabel, Polynomial)> {
        let mut out = vec![
            (GeneratorLabel::One, Polynomial::one(self.dim)),
            (GeneratorLabel::Q, self.q.clone()),
        ];
        out.extend(
            self.generators
                .iter()
                .enumerate()
                .map(|(j, r)| (GeneratorLabel::QTimesR(j + 1), &self.q * r)),
        );
        out
    }

    /// The polynomial a label stands for, if the label exists here.
    pub fn generator_polynomial(&self, label: GeneratorLabel) -> Option<Polynomial> {
        match label {
            GeneratorLabel::One => Some(Polynomial::one(self.dim)),
            GeneratorLabel::Q => Some(self.q.clone()),
            GeneratorLabel::QTimesR(j) => {
                self.generators.get(j.wrapping_sub(1)).map(|r| &self.q * r)
            }
        }
    }

    /// Negates `q`, moving the bumps to the other side of the curve.
    pub fn flip_bumps(&self) -> Scenario {
        Scenario {
            q: -&self.q,
            ..self.clone()
        }
    }

    /// Classification of a point against `V(q)`, the bump
    /// `K_Q ∩ {q > tol}`, or neither.
    pub fn classify(&self, point: &[f64], tol: f64) -> PointClass {
        let qv = self.q.eval_unchecked(point);
        if qv.abs() <= tol {
            PointClass::OnCurve
        } else if qv > tol && self.in_module_set(point, tol) {
            PointClass::InBump
        } else {
            PointClass::Violating
        }
    }

    /// Whether every `r_j(point) >= -tol`, i.e. the point lies in `K_Q`.
    pub fn in_module_set(&self, point: &[f64], tol: f64) -> bool {
        self.generators
            .iter()
            .all(|r| r.eval_unchecked(point) >= -tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointClass {
    OnCurve,
    InBump,
    Violating,
}

impl fmt::Display for PointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointClass::OnCurve => "on-curve",
            PointClass::InBump => "in-bump",
            PointClass::Violating => "violating",
        })
    }
}
