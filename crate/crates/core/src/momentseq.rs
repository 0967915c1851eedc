//! Truncated multisequences, their Riesz functional, the shift operator
//! `p(E)s`, and moment / localizing matrix assembly.

use thiserror::Error;

use crate::linalg::SymMatrix;
use crate::polyring::{binomial, monomial_basis, Exponent, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeqError {
    #[error("polynomial of degree {degree} exceeds sequence order {order}")]
    DegreeOverflow { degree: u32, order: u32 },
    #[error("sequence order {order} too small for a matrix of order {m} (needs {needed})")]
    OrderTooSmall { order: u32, m: u32, needed: u32 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: u32, right: u32 },
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("hankel matrices need a univariate sequence, got dimension {0}")]
    NotUnivariate(usize),
}

/// Moments `s_γ` for every `|γ| <= order`, stored densely in graded
/// lexicographic order.
///
/// The order is usually even; shifted sequences may have odd order.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSequence {
    dim: usize,
    order: u32,
    values: Vec<f64>,
}

/// Number of monomials of degree at most `order` in `dim` variables.
pub fn sequence_len(dim: usize, order: u32) -> usize {
    binomial(order as usize + dim, dim)
}

impl TruncatedSequence {
    pub fn zeros(dim: usize, order: u32) -> Self {
        TruncatedSequence {
            dim,
            order,
            values: vec![0.0; sequence_len(dim, order)],
        }
    }

    pub fn from_fn(dim: usize, order: u32, mut f: impl FnMut(&Exponent) -> f64) -> Self {
        let values = monomial_basis(dim, order).iter().map(&mut f).collect();
        TruncatedSequence { dim, order, values }
    }

    /// Values listed in graded lexicographic order.
    pub fn from_values(dim: usize, order: u32, values: Vec<f64>) -> Result<Self, SeqError> {
        let expected = sequence_len(dim, order);
        if values.len() != expected {
            return Err(SeqError::WrongLength {
                expected,
                got: values.len(),
            });
        }
        Ok(TruncatedSequence { dim, order, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, e: &Exponent) -> Option<f64> {
        if e.dim() != self.dim || e.degree() > self.order {
            return None;
        }
        Some(self.values[e.grlex_rank()])
    }

    /// Panicking accessor for exponents known to be in range.
    pub fn value(&self, e: &Exponent) -> f64 {
        self.get(e)
            .unwrap_or_else(|| panic!("exponent {e:?} outside sequence of order {}", self.order))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Exponent, f64)> + '_ {
        monomial_basis(self.dim, self.order)
            .into_iter()
            .zip(self.values.iter().copied())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Restriction to `|γ| <= order`.
    pub fn truncate(&self, order: u32) -> Result<Self, SeqError> {
        if order > self.order {
            return Err(SeqError::OrderTooSmall {
                order: self.order,
                m: order,
                needed: order,
            });
        }
        let len = sequence_len(self.dim, order);
        Ok(TruncatedSequence {
            dim: self.dim,
            order,
            values: self.values[..len].to_vec(),
        })
    }

    fn check_compatible(&self, other: &Self) -> Result<(), SeqError> {
        if self.dim != other.dim {
            return Err(SeqError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.order != other.order {
            return Err(SeqError::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        Ok(())
    }

    /// `self + k * other`, entrywise.
    pub fn add_scaled(&self, k: f64, other: &Self) -> Result<Self, SeqError> {
        self.check_compatible(other)?;
        Ok(TruncatedSequence {
            dim: self.dim,
            order: self.order,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + k * b)
                .collect(),
        })
    }

    pub fn scale(&self, k: f64) -> Self {
        TruncatedSequence {
            dim: self.dim,
            order: self.order,
            values: self.values.iter().map(|v| v * k).collect(),
        }
    }

    fn check_poly(&self, p: &Polynomial) -> Result<(), SeqError> {
        if p.dim() != self.dim {
            return Err(SeqError::DimensionMismatch {
                left: self.dim,
                right: p.dim(),
            });
        }
        if p.degree() > self.order {
            return Err(SeqError::DegreeOverflow {
                degree: p.degree(),
                order: self.order,
            });
        }
        Ok(())
    }

    /// The Riesz functional `L_s(p) = Σ p_λ s_λ`.
    pub fn riesz_apply(&self, p: &Polynomial) -> Result<f64, SeqError> {
        self.check_poly(p)?;
        Ok(p.terms()
            .map(|(e, c)| c * self.values[e.grlex_rank()])
            .sum())
    }

    /// `(p(E)s)(γ) = Σ_λ p_λ s_{λ+γ}`, of order `order - deg p`.
    pub fn shift(&self, p: &Polynomial) -> Result<Self, SeqError> {
        self.check_poly(p)?;
        let order = self.order - p.degree();
        let terms: Vec<(&Exponent, f64)> = p.terms().collect();
        Ok(TruncatedSequence::from_fn(self.dim, order, |g| {
            terms
                .iter()
                .map(|(l, c)| c * self.values[(*l + g).grlex_rank()])
                .sum()
        }))
    }

    /// Moment matrix indexed by `monomial_basis(d, m)` with entries
    /// `s_{α+β}`.
    pub fn moment_matrix(&self, m: u32) -> Result<MomentMatrix, SeqError> {
        if 2 * m > self.order {
            return Err(SeqError::OrderTooSmall {
                order: self.order,
                m,
                needed: 2 * m,
            });
        }
        let basis = monomial_basis(self.dim, m);
        let n = basis.len();
        let mut matrix = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                matrix.set(i, j, self.values[(&basis[i] + &basis[j]).grlex_rank()]);
            }
        }
        Ok(MomentMatrix {
            basis,
            matrix,
            localizer: None,
            sequence_order: self.order,
        })
    }

    /// Moment matrix of `g(E)s` at order `m`; its PSD-ness expresses
    /// `L_s(g f²) >= 0` for `deg f <= m`.
    pub fn localizing_matrix(&self, g: &Polynomial, m: u32) -> Result<MomentMatrix, SeqError> {
        self.check_poly(g)?;
        let needed = 2 * m + g.degree();
        if needed > self.order {
            return Err(SeqError::OrderTooSmall {
                order: self.order,
                m,
                needed,
            });
        }
        let mut mm = self.shift(g)?.moment_matrix(m)?;
        mm.localizer = Some(g.clone());
        mm.sequence_order = self.order;
        Ok(mm)
    }

    /// Univariate Hankel matrix `(s_{i+j})_{i,j<=m}`.
    pub fn hankel_matrix(&self, m: u32) -> Result<MomentMatrix, SeqError> {
        if self.dim != 1 {
            return Err(SeqError::NotUnivariate(self.dim));
        }
        self.moment_matrix(m)
    }
}

/// Largest matrix order `m` with `2m + deg g <= order`, if any.
pub fn localizing_order(order: u32, generator_degree: u32) -> Option<u32> {
    order.checked_sub(generator_degree).map(|r| r / 2)
}

/// A moment or localizing matrix together with the basis indexing it.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentMatrix {
    pub basis: Vec<Exponent>,
    pub matrix: SymMatrix,
    /// `None` for a plain moment matrix.
    pub localizer: Option<Polynomial>,
    /// Order of the sequence the matrix was assembled from.
    pub sequence_order: u32,
}

impl MomentMatrix {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn order(&self) -> u32 {
        self.basis.last().map(Exponent::degree).unwrap_or(0)
    }
}
