//! Sparse multivariate polynomials with real coefficients.
//!
//! Every ordered collection of monomials in this crate uses the graded
//! lexicographic order implemented by [`Exponent`]'s `Ord`: total degree
//! first, then lexicographic with `x1 > x2 > ... > xd`. The dense index of a
//! monomial in that order is [`Exponent::grlex_rank`], which is what moment
//! sequences and moment matrices are indexed by.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("duplicate exponent {0:?}")]
    DuplicateExponent(Vec<u32>),
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("non-finite coefficient for exponent {0:?}")]
    NonFinite(Vec<u32>),
}

/// Binomial coefficient for the small arguments that appear in monomial
/// counting.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// A multi-index `γ = (γ1, ..., γd)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(entries: Vec<u32>) -> Self {
        Exponent(entries)
    }

    pub fn zero(dim: usize) -> Self {
        Exponent(vec![0; dim])
    }

    /// The exponent of the single variable `x_{i+1}`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Exponent(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Total degree `|γ|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Position of this exponent in `monomial_basis(d, n)` for any
    /// `n >= |γ|`.
    pub fn grlex_rank(&self) -> usize {
        let d = self.dim();
        let k = self.degree() as usize;
        if k == 0 {
            return 0;
        }
        // monomials of degree < k
        let mut rank = binomial(k - 1 + d, d);
        // monomials of degree k that precede self (lexicographically larger)
        let mut remaining = k;
        for i in 0..d.saturating_sub(1) {
            let e = self.0[i] as usize;
            let free = d - i - 1;
            for v in (e + 1)..=remaining {
                rank += binomial(remaining - v + free - 1, free - 1);
            }
            remaining -= e;
        }
        rank
    }

    /// Evaluate `x^γ` with the convention `0^0 = 1`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&g, &xi)| xi.powi(g as i32))
            .product()
    }
}

impl Add for &Exponent {
    type Output = Exponent;

    fn add(self, rhs: &Exponent) -> Exponent {
        assert_eq!(self.dim(), rhs.dim(), "exponent dimension mismatch");
        Exponent(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(v: Vec<u32>) -> Self {
        Exponent(v)
    }
}

/// All exponents in `d` variables of total degree at most `n`, in graded
/// lexicographic order.
pub fn monomial_basis(d: usize, n: u32) -> Vec<Exponent> {
    let mut out = Vec::with_capacity(binomial(n as usize + d, d));
    let mut buf = vec![0u32; d];
    for k in 0..=n {
        fill_degree(&mut buf, 0, k, &mut out);
    }
    out
}

fn fill_degree(buf: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<Exponent>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(Exponent(buf.to_vec()));
        return;
    }
    if buf.is_empty() {
        if remaining == 0 {
            out.push(Exponent(Vec::new()));
        }
        return;
    }
    for v in (0..=remaining).rev() {
        buf[pos] = v;
        fill_degree(buf, pos + 1, remaining - v, out);
    }
    buf[pos] = 0;
}

/// A polynomial in `dim` indeterminates. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Exponent, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::monomial(Exponent::zero(dim), c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, 1.0)
    }

    /// The coordinate polynomial `x_{i+1}` (zero-based `i`).
    pub fn var(dim: usize, i: usize) -> Self {
        Self::monomial(Exponent::unit(dim, i), 1.0)
    }

    pub fn monomial(exp: Exponent, coef: f64) -> Self {
        let dim = exp.dim();
        let mut terms = BTreeMap::new();
        if coef != 0.0 {
            terms.insert(exp, coef);
        }
        Polynomial { dim, terms }
    }

    /// Build from `(exponent, coefficient)` pairs, summing repeated
    /// exponents.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Exponent, f64)>,
    {
        let mut p = Polynomial::zero(dim);
        for (e, c) in terms {
            if e.dim() != dim {
                return Err(PolyError::DimensionMismatch {
                    left: dim,
                    right: e.dim(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// Build from `(exponent, coefficient)` pairs, rejecting any exponent
    /// that appears twice. This is the constructor used by file parsers.
    pub fn from_unique_terms<I>(dim: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Exponent, f64)>,
    {
        if dim == 0 {
            return Err(PolyError::ZeroDimension);
        }
        let mut seen = BTreeMap::new();
        for (e, c) in terms {
            if e.dim() != dim {
                return Err(PolyError::DimensionMismatch {
                    left: dim,
                    right: e.dim(),
                });
            }
            if !c.is_finite() {
                return Err(PolyError::NonFinite(e.0));
            }
            match seen.entry(e) {
                Entry::Occupied(o) => return Err(PolyError::DuplicateExponent(o.key().0.clone())),
                Entry::Vacant(v) => {
                    v.insert(c);
                }
            }
        }
        seen.retain(|_, c| *c != 0.0);
        Ok(Polynomial { dim, terms: seen })
    }

    fn add_term(&mut self, e: Exponent, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                let v = *o.get() + c;
                if v == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Exponent::degree).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> + '_ {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, e: &Exponent) -> f64 {
        self.terms.get(e).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    fn check_dim(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.dim != other.dim {
            return Err(PolyError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dim(other)?;
        let mut out = Polynomial::zero(self.dim);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                out.add_term(a + b, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        if k == 0.0 {
            return Polynomial::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| (e.clone(), c * k))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        (0..k).fold(Polynomial::one(self.dim), |acc, _| &acc * self)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, PolyError> {
        if x.len() != self.dim {
            return Err(PolyError::DimensionMismatch {
                left: self.dim,
                right: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluate without checking the point dimension. Extra coordinates are
    /// ignored and missing ones panic.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, &c)| c * e.eval(x)).sum()
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    /// Panics on dimension mismatch; use [`Polynomial::checked_add`] for
    /// untrusted input.
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.checked_add(rhs)
            .expect("polynomial dimension mismatch")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.checked_sub(rhs)
            .expect("polynomial dimension mismatch")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.checked_mul(rhs)
            .expect("polynomial dimension mismatch")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, &c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
            if n == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let vars: Vec<String> = e
                .entries()
                .iter()
                .enumerate()
                .filter(|(_, &g)| g > 0)
                .map(|(i, &g)| {
                    if g == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, g)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1.0 {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, vars.join("*"))?;
            }
        }
        Ok(())
    }
}
