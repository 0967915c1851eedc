//! Membership search in `Σ² + qQ` with Gram-matrix certificates
//! `p = σ_0 + q σ_q + Σ_j q r_j σ_j`, `σ = vᵀ G v` with `G ⪰ 0`.
//!
//! The search alternates between two projections in the space of block
//! Gram tuples (Frobenius geometry): onto the affine set of tuples whose
//! expansion matches the coefficients of `p`, and onto the product of PSD
//! cones. A failed search only means no certificate was found within the
//! degree bound and iteration budget.

use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::linalg::{is_psd, psd_project, Cholesky, LinalgError, SymMatrix};
use crate::momentseq::sequence_len;
use crate::polyring::{monomial_basis, Exponent, PolyError, Polynomial};
use crate::sampling::{support_points, SamplingError, SamplingSpec, SupportLabel};
use crate::scenario::{GeneratorLabel, Scenario};

/// Every Gram block of a certificate must pass `is_psd` at this tolerance.
pub const GRAM_PSD_TOL: f64 = 1e-8;

const RIDGE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SosError {
    #[error("polynomial degree {degree} exceeds degree bound {bound}")]
    DegreeBoundTooSmall { degree: u32, bound: u32 },
    #[error("dimension mismatch: scenario has {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("generator {0} does not exist in this scenario")]
    UnknownLabel(GeneratorLabel),
    #[error("block {label}: basis has {basis} monomials but the Gram matrix is {gram}x{gram}")]
    BasisMismatch {
        label: GeneratorLabel,
        basis: usize,
        gram: usize,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `σ = vᵀ G v` over `basis`, multiplying the generator `label`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramBlock {
    pub label: GeneratorLabel,
    pub basis: Vec<Exponent>,
    pub gram: SymMatrix,
}

impl GramBlock {
    pub fn new(label: GeneratorLabel, basis: Vec<Exponent>, gram: SymMatrix) -> Self {
        GramBlock { label, basis, gram }
    }

    /// The sum of squares `vᵀ G v`.
    pub fn sos(&self, dim: usize) -> Result<Polynomial, SosError> {
        if self.basis.len() != self.gram.size() {
            return Err(SosError::BasisMismatch {
                label: self.label,
                basis: self.basis.len(),
                gram: self.gram.size(),
            });
        }
        if let Some(e) = self.basis.iter().find(|e| e.dim() != dim) {
            return Err(SosError::DimensionMismatch {
                expected: dim,
                got: e.dim(),
            });
        }
        let n = self.basis.len();
        let mut terms = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                terms.push((&self.basis[i] + &self.basis[j], self.gram.get(i, j)));
            }
        }
        Ok(Polynomial::from_terms(dim, terms)?)
    }

    /// Largest total degree of `generator * σ` allowed by the basis.
    pub fn product_degree(&self, generator: &Polynomial) -> u32 {
        generator.degree() + 2 * self.basis.iter().map(Exponent::degree).max().unwrap_or(0)
    }
}

/// `Σ g_i (vᵀ G_i v)` by explicit polynomial expansion.
pub fn expand_blocks<'a, I>(dim: usize, blocks: I) -> Result<Polynomial, SosError>
where
    I: IntoIterator<Item = (&'a GramBlock, &'a Polynomial)>,
{
    let mut total = Polynomial::zero(dim);
    for (b, g) in blocks {
        total = total.checked_add(&g.checked_mul(&b.sos(dim)?)?)?;
    }
    Ok(total)
}

/// A certificate of membership in `Σ² + qQ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramDecomposition {
    pub blocks: Vec<GramBlock>,
    /// Max coefficient mismatch of `p - Σ g_i vᵀ G_i v`, recomputed by
    /// expansion.
    pub residual: f64,
    pub iterations: usize,
}

impl fmt::Display for GramDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "certificate with {} blocks, residual {:e} after {} iterations",
            self.blocks.len(),
            self.residual,
            self.iterations
        )?;
        for b in &self.blocks {
            let min = crate::linalg::min_eigenvalue(&b.gram).unwrap_or(f64::NAN);
            writeln!(
                f,
                "  {:<6} basis size {:<3} trace {:<12.5e} min eig {:.3e}",
                b.label,
                b.basis.len(),
                (0..b.gram.size()).map(|i| b.gram.get(i, i)).sum::<f64>(),
                min
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub degree_bound: u32,
    pub max_iters: usize,
    pub tol: f64,
    /// Start from a random PSD tuple instead of zero.
    pub seed: Option<u64>,
}

impl SearchOptions {
    pub fn new(degree_bound: u32) -> Self {
        SearchOptions {
            degree_bound,
            max_iters: 5000,
            tol: 1e-6,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Found(GramDecomposition),
    /// No certificate within the budget. Not a proof of non-membership.
    NotFound {
        iterations: usize,
        residual: f64,
    },
}

impl SearchOutcome {
    pub fn certificate(&self) -> Option<&GramDecomposition> {
        match self {
            SearchOutcome::Found(d) => Some(d),
            SearchOutcome::NotFound { .. } => None,
        }
    }
}

/// Blocks allowed under a degree bound: every module generator with
/// `deg g <= bound`, with basis `monomial_basis(d, (bound - deg g) / 2)`.
pub fn block_layout(
    scenario: &Scenario,
    degree_bound: u32,
) -> Vec<(GeneratorLabel, Polynomial, Vec<Exponent>)> {
    scenario
        .module_generators()
        .into_iter()
        .filter(|(_, g)| g.degree() <= degree_bound)
        .map(|(label, g)| {
            let basis = monomial_basis(scenario.dim(), (degree_bound - g.degree()) / 2);
            (label, g, basis)
        })
        .collect()
}

/// Linear map from stacked svec-scaled Gram entries to coefficients.
struct CoefficientMap {
    rows: usize,
    /// Per variable: (coefficient row, value).
    columns: Vec<Vec<(usize, f64)>>,
    /// Per block: (offset into the variable vector, size).
    blocks: Vec<(usize, usize)>,
}

impl CoefficientMap {
    fn new(layout: &[(GeneratorLabel, Polynomial, Vec<Exponent>)], dim: usize, bound: u32) -> Self {
        let rows = sequence_len(dim, bound);
        let mut columns = Vec::new();
        let mut blocks = Vec::new();
        for (_, g, basis) in layout {
            let n = basis.len();
            blocks.push((columns.len(), n));
            for i in 0..n {
                for j in i..n {
                    let scale = if i == j {
                        1.0
                    } else {
                        std::f64::consts::SQRT_2
                    };
                    let shift = &basis[i] + &basis[j];
                    let col = g
                        .terms()
                        .map(|(e, c)| ((e + &shift).grlex_rank(), c * scale))
                        .collect();
                    columns.push(col);
                }
            }
        }
        CoefficientMap {
            rows,
            columns,
            blocks,
        }
    }

    fn apply(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (col, &v) in self.columns.iter().zip(y) {
            if v != 0.0 {
                for &(r, a) in col {
                    out[r] += a * v;
                }
            }
        }
        out
    }

    fn apply_transpose(&self, z: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| col.iter().map(|&(r, a)| a * z[r]).sum())
            .collect()
    }

    fn gram_normal_matrix(&self) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.rows);
        for col in &self.columns {
            for &(r, a) in col {
                for &(s, b) in col {
                    if s >= r {
                        m.set(r, s, m.get(r, s) + a * b);
                    }
                }
            }
        }
        for i in 0..self.rows {
            m.set(i, i, m.get(i, i) + RIDGE);
        }
        m
    }

    fn unpack(&self, y: &[f64], block: usize) -> SymMatrix {
        let (off, n) = self.blocks[block];
        let mut g = SymMatrix::zeros(n);
        let mut k = off;
        for i in 0..n {
            for j in i..n {
                let v = if i == j {
                    y[k]
                } else {
                    y[k] / std::f64::consts::SQRT_2
                };
                g.set(i, j, v);
                k += 1;
            }
        }
        g
    }

    fn pack(&self, g: &SymMatrix, block: usize, y: &mut [f64]) {
        let (off, n) = self.blocks[block];
        let mut k = off;
        for i in 0..n {
            for j in i..n {
                y[k] = if i == j {
                    g.get(i, j)
                } else {
                    g.get(i, j) * std::f64::consts::SQRT_2
                };
                k += 1;
            }
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Search for a Gram certificate of `p ∈ Σ² + qQ` with
/// `deg(g_i σ_i) <= degree_bound`.
pub fn find_certificate(
    p: &Polynomial,
    scenario: &Scenario,
    opts: &SearchOptions,
) -> Result<SearchOutcome, SosError> {
    let dim = scenario.dim();
    if p.dim() != dim {
        return Err(SosError::DimensionMismatch {
            expected: dim,
            got: p.dim(),
        });
    }
    if p.degree() > opts.degree_bound {
        return Err(SosError::DegreeBoundTooSmall {
            degree: p.degree(),
            bound: opts.degree_bound,
        });
    }
    let layout = block_layout(scenario, opts.degree_bound);
    let map = CoefficientMap::new(&layout, dim, opts.degree_bound);
    let chol = Cholesky::factor(&map.gram_normal_matrix())?;
    let mut target = vec![0.0; map.rows];
    for (e, c) in p.terms() {
        target[e.grlex_rank()] = c;
    }

    let mut z = vec![0.0; map.columns.len()];
    if let Some(seed) = opts.seed {
        let mut rng = StdRng::seed_from_u64(seed);
        for b in 0..map.blocks.len() {
            let n = map.blocks[b].1;
            let g = psd_project(&SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)))?;
            map.pack(&g, b, &mut z);
        }
    }

    let mut residual = max_abs_diff(&map.apply(&z), &target);
    let mut iterations = 0;
    while residual > opts.tol && iterations < opts.max_iters {
        iterations += 1;
        // affine projection: y = z - Aᵀ (AAᵀ + εI)⁻¹ (Az - b)
        let mismatch: Vec<f64> = map
            .apply(&z)
            .iter()
            .zip(&target)
            .map(|(a, b)| a - b)
            .collect();
        let correction = map.apply_transpose(&chol.solve(&mismatch));
        let y: Vec<f64> = z.iter().zip(&correction).map(|(a, c)| a - c).collect();
        // cone projection, block by block
        for b in 0..map.blocks.len() {
            let g = psd_project(&map.unpack(&y, b))?;
            map.pack(&g, b, &mut z);
        }
        residual = max_abs_diff(&map.apply(&z), &target);
    }

    if residual > opts.tol {
        return Ok(SearchOutcome::NotFound {
            iterations,
            residual,
        });
    }
    let blocks: Vec<GramBlock> = layout
        .iter()
        .enumerate()
        .map(|(b, (label, _, basis))| GramBlock::new(*label, basis.clone(), map.unpack(&z, b)))
        .collect();
    let rebuilt = expand_blocks(p.dim(), blocks.iter().zip(layout.iter().map(|(_, g, _)| g)))?;
    let residual = (p - &rebuilt).max_abs_coefficient();
    if residual > opts.tol {
        return Ok(SearchOutcome::NotFound {
            iterations,
            residual,
        });
    }
    Ok(SearchOutcome::Found(GramDecomposition {
        blocks,
        residual,
        iterations,
    }))
}

/// Result of checking a certificate against `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateVerdict {
    pub valid: bool,
    pub residual: f64,
    /// Smallest eigenvalue of each block, in block order.
    pub min_eigenvalues: Vec<f64>,
    pub all_psd: bool,
    /// Largest `deg g_i + 2 max deg(basis_i)` over the blocks.
    pub max_product_degree: u32,
}

/// Re-expand `Σ g_i vᵀ G_i v`, compare with `p`, and check every block.
pub fn verify_certificate(
    decomp: &GramDecomposition,
    p: &Polynomial,
    scenario: &Scenario,
    tol: f64,
) -> Result<CertificateVerdict, SosError> {
    let mut generators = Vec::with_capacity(decomp.blocks.len());
    for b in &decomp.blocks {
        let g = scenario
            .generator_polynomial(b.label)
            .ok_or(SosError::UnknownLabel(b.label))?;
        generators.push(g);
    }
    let rebuilt = expand_blocks(p.dim(), decomp.blocks.iter().zip(&generators))?;
    let rebuilt = if decomp.blocks.is_empty() {
        Polynomial::zero(scenario.dim())
    } else {
        rebuilt
    };
    let residual = p.checked_sub(&rebuilt)?.max_abs_coefficient();
    let mut min_eigenvalues = Vec::new();
    let mut all_psd = true;
    for b in &decomp.blocks {
        let v = is_psd(&b.gram, GRAM_PSD_TOL)?;
        all_psd &= v.psd;
        min_eigenvalues.push(v.min_eigenvalue);
    }
    let max_product_degree = decomp
        .blocks
        .iter()
        .zip(&generators)
        .map(|(b, g)| b.product_degree(g))
        .max()
        .unwrap_or(0);
    Ok(CertificateVerdict {
        valid: all_psd && residual <= tol,
        residual,
        min_eigenvalues,
        all_psd,
        max_product_degree,
    })
}

/// Minimum of `p` over sampled points of `V(q) ∪ [K_Q ∩ {q > 0}]`.
///
/// Members of the module are non-negative there, so a value below `-tol`
/// proves non-membership.
pub fn eval_nonneg_sample(
    p: &Polynomial,
    scenario: &Scenario,
    spec: &SamplingSpec,
) -> Result<f64, SamplingError> {
    let pts = support_points(scenario, spec)?;
    Ok(pts
        .iter()
        .filter(|lp| lp.label != SupportLabel::Outside)
        .map(|lp| p.eval_unchecked(&lp.point))
        .fold(f64::INFINITY, f64::min))
}
