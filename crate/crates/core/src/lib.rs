//! Truncated moment problems whose support is a real algebraic curve `V(q)`
//! together with "bumps" `K_Q ∩ {q > 0}` cut out by polynomial inequalities.
//!
//! The crate provides sparse polynomials, truncated moment sequences with
//! their moment and localizing matrices, a symmetric eigensolver, measures
//! and their moments, the positivity certificate for the enhanced module
//! `Σ² + qΣ² + Σ_j q r_j Σ²`, the `μ = ν/q + σ` decomposition, and a
//! sum-of-squares search for module membership.

pub mod catalog;
pub mod certify;
pub mod decompose;
pub mod formats;
pub mod linalg;
pub mod measures;
pub mod momentseq;
pub mod polyring;
pub mod quadrature;
pub mod sampling;
pub mod scenario;
pub mod sosearch;

pub use certify::{
    archimedean_check, certify, ArchimedeanVerdict, CertificateReport, CheckVerdict,
};
pub use linalg::{eigen_sym, is_psd, psd_project, SymMatrix};
pub use measures::{moments_of, support_audit, AtomicMeasure, CurveMeasure, Measure, Moments};
pub use momentseq::TruncatedSequence;
pub use polyring::{monomial_basis, Exponent, Polynomial};
pub use scenario::{CurveAssertion, GeneratorLabel, Scenario};
pub use sosearch::{
    find_certificate, verify_certificate, GramDecomposition, SearchOptions, SearchOutcome,
};
