//! Positivity certificates for a truncated sequence against the module
//! `Σ² + qQ`: the moment matrix and the localizing matrices of `q` and of
//! every `q r_j` must be positive semidefinite.

use std::fmt;

use crate::linalg::{is_psd, LinalgError};
use crate::momentseq::{localizing_order, TruncatedSequence};
use crate::polyring::{Exponent, Polynomial};
use crate::scenario::{CurveAssertion, GeneratorLabel, Scenario};
use crate::sosearch::{expand_blocks, GRAM_PSD_TOL};

/// Default PSD tolerance for certificate matrices.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Coefficient residual accepted for a supplied archimedean witness.
pub const ARCHIMEDEAN_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckVerdict {
    Pass,
    Fail,
    NotCheckable,
}

impl fmt::Display for CheckVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckVerdict::Pass => "pass",
            CheckVerdict::Fail => "FAIL",
            CheckVerdict::NotCheckable => "not-checkable",
        })
    }
}

/// One checked matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixCheck {
    pub label: GeneratorLabel,
    pub generator: Polynomial,
    /// Matrix order `m`; `None` when the truncation is too short.
    pub order: Option<u32>,
    pub basis: Vec<Exponent>,
    pub min_eigenvalue: Option<f64>,
    pub threshold: Option<f64>,
    pub verdict: CheckVerdict,
    /// Coefficients (in `basis`) of a polynomial `f` with
    /// `L_s(g f²) < 0`.
    pub refutation: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub checks: Vec<MatrixCheck>,
    pub truncation_order: u32,
    pub tol: f64,
    pub curve_assertion: CurveAssertion,
    pub overall: CheckVerdict,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.overall == CheckVerdict::Pass
    }

    pub fn check(&self, label: GeneratorLabel) -> Option<&MatrixCheck> {
        self.checks.iter().find(|c| c.label == label)
    }

    /// 0 on pass, 1 when some matrix is refuted, 2 when nothing is refuted
    /// but some generator could not be checked.
    pub fn exit_code(&self) -> i32 {
        match self.overall {
            CheckVerdict::Pass => 0,
            CheckVerdict::Fail => 1,
            CheckVerdict::NotCheckable => 2,
        }
    }
}

impl fmt::Display for CertificateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let headline = match self.overall {
            CheckVerdict::Pass => {
                format!("certificate satisfied at order {}", self.truncation_order)
            }
            CheckVerdict::Fail => {
                format!("certificate violated at order {}", self.truncation_order)
            }
            CheckVerdict::NotCheckable => format!(
                "certificate incomplete at order {}: some generators not checkable",
                self.truncation_order
            ),
        };
        writeln!(f, "{headline}")?;
        writeln!(f, "# {}", self.curve_assertion)?;
        writeln!(f, "# tol = {:e}", self.tol)?;
        for c in &self.checks {
            let order = c.order.map_or("-".to_string(), |m| m.to_string());
            let min = c
                .min_eigenvalue
                .map_or("-".to_string(), |v| format!("{v:.6e}"));
            writeln!(
                f,
                "{:<8} m={:<3} min_eig={:<14} {}",
                c.label.to_string(),
                order,
                min,
                c.verdict
            )?;
            if let Some(w) = &c.refutation {
                let f_poly = Polynomial::from_terms(
                    c.generator.dim(),
                    c.basis.iter().cloned().zip(w.iter().copied()),
                )
                .map_err(|_| fmt::Error)?;
                writeln!(f, "         refuted by f = {f_poly}")?;
            }
        }
        Ok(())
    }
}

/// Check `s` against the enhanced module `Σ² + qΣ² + Σ_j q r_j Σ²`.
///
/// Each generator `g` is tested with the largest localizing matrix the
/// truncation allows, `m_g = floor((order - deg g) / 2)`.
pub fn certify(
    s: &TruncatedSequence,
    scenario: &Scenario,
    tol: f64,
) -> Result<CertificateReport, LinalgError> {
    assert_eq!(
        s.dim(),
        scenario.dim(),
        "sequence and scenario dimensions differ"
    );
    let mut checks = Vec::new();
    for (label, g) in scenario.module_generators() {
        let check = match localizing_order(s.order(), g.degree()) {
            None => MatrixCheck {
                label,
                generator: g,
                order: None,
                basis: Vec::new(),
                min_eigenvalue: None,
                threshold: None,
                verdict: CheckVerdict::NotCheckable,
                refutation: None,
            },
            Some(m) => {
                let mm = s.localizing_matrix(&g, m).expect("order checked above");
                let v = is_psd(&mm.matrix, tol)?;
                MatrixCheck {
                    label,
                    generator: g,
                    order: Some(m),
                    basis: mm.basis,
                    min_eigenvalue: Some(v.min_eigenvalue),
                    threshold: Some(v.threshold),
                    verdict: if v.psd {
                        CheckVerdict::Pass
                    } else {
                        CheckVerdict::Fail
                    },
                    refutation: v.witness,
                }
            }
        };
        checks.push(check);
    }
    let overall = if checks.iter().any(|c| c.verdict == CheckVerdict::Fail) {
        CheckVerdict::Fail
    } else if checks
        .iter()
        .any(|c| c.verdict == CheckVerdict::NotCheckable)
    {
        CheckVerdict::NotCheckable
    } else {
        CheckVerdict::Pass
    };
    Ok(CertificateReport {
        checks,
        truncation_order: s.order(),
        tol,
        curve_assertion: scenario.curve_assertion().clone(),
        overall,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ArchimedeanVerdict {
    /// `r_j = λ (C - |x|²)` for some `λ > 0`.
    GeneratorMatch { generator: usize, bound: f64 },
    /// A supplied SOS witness reproduces `C - |x|²`.
    WitnessVerified { bound: f64, residual: f64 },
    /// Nothing could be verified; the module is archimedean only by
    /// assertion.
    AssertedOnly { reason: String },
}

impl ArchimedeanVerdict {
    pub fn verified(&self) -> bool {
        !matches!(self, ArchimedeanVerdict::AssertedOnly { .. })
    }
}

impl fmt::Display for ArchimedeanVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArchimedeanVerdict::GeneratorMatch { generator, bound } => {
                write!(
                    f,
                    "archimedean: r{generator} is a positive multiple of {bound} - |x|^2"
                )
            }
            ArchimedeanVerdict::WitnessVerified { bound, residual } => {
                write!(
                    f,
                    "archimedean: witness for {bound} - |x|^2 verified (residual {residual:e})"
                )
            }
            ArchimedeanVerdict::AssertedOnly { reason } => {
                write!(f, "archimedean: asserted only ({reason})")
            }
        }
    }
}

/// `C` when `r = λ (C - |x|²)` with `λ, C > 0`, by coefficient comparison.
fn ball_bound(r: &Polynomial) -> Option<f64> {
    let d = r.dim();
    let square = |i| {
        let u = Exponent::unit(d, i);
        &u + &u
    };
    let lambda = -r.coefficient(&square(0));
    if !(lambda > 0.0) || r.num_terms() != d + 1 {
        return None;
    }
    let all_squares = (0..d).all(|i| r.coefficient(&square(i)) == -lambda);
    let c = r.coefficient(&Exponent::zero(d)) / lambda;
    (all_squares && c > 0.0).then_some(c)
}

/// Try to certify that `Q` is archimedean.
pub fn archimedean_check(scenario: &Scenario) -> ArchimedeanVerdict {
    for (j, r) in scenario.generators().iter().enumerate() {
        if let Some(bound) = ball_bound(r) {
            return ArchimedeanVerdict::GeneratorMatch {
                generator: j + 1,
                bound,
            };
        }
    }
    if let Some(w) = scenario.archimedean_witness() {
        return check_witness(scenario, w.bound, &w.multipliers);
    }
    let reason = if scenario.generators().is_empty() {
        "module has no generators".to_string()
    } else if let Some(c) = scenario.archimedean_bound() {
        format!("bound C = {c} supplied without SOS multipliers")
    } else {
        "no generator of the form C - |x|^2 and no witness supplied".to_string()
    };
    ArchimedeanVerdict::AssertedOnly { reason }
}

fn check_witness(
    scenario: &Scenario,
    bound: f64,
    multipliers: &[crate::sosearch::GramBlock],
) -> ArchimedeanVerdict {
    let d = scenario.dim();
    if multipliers.len() != scenario.generators().len() + 1 {
        return ArchimedeanVerdict::AssertedOnly {
            reason: format!(
                "witness has {} multipliers, expected {}",
                multipliers.len(),
                scenario.generators().len() + 1
            ),
        };
    }
    for (j, b) in multipliers.iter().enumerate() {
        match is_psd(&b.gram, GRAM_PSD_TOL) {
            Ok(v) if v.psd => {}
            _ => {
                return ArchimedeanVerdict::AssertedOnly {
                    reason: format!("multiplier {j} is not positive semidefinite"),
                }
            }
        }
    }
    let mut generators = vec![Polynomial::one(d)];
    generators.extend(scenario.generators().iter().cloned());
    let rebuilt = match expand_blocks(d, multipliers.iter().zip(&generators)) {
        Ok(p) => p,
        Err(e) => {
            return ArchimedeanVerdict::AssertedOnly {
                reason: e.to_string(),
            }
        }
    };
    let mut target = Polynomial::constant(d, bound);
    for i in 0..d {
        let xi = Polynomial::var(d, i);
        target = &target - &(&xi * &xi);
    }
    let residual = (&target - &rebuilt).max_abs_coefficient();
    if residual <= ARCHIMEDEAN_RESIDUAL_TOL {
        ArchimedeanVerdict::WitnessVerified { bound, residual }
    } else {
        ArchimedeanVerdict::AssertedOnly {
            reason: format!("witness residual {residual:e} exceeds {ARCHIMEDEAN_RESIDUAL_TOL:e}"),
        }
    }
}
