//! Dense symmetric matrices: cyclic Jacobi eigendecomposition, PSD verdicts
//! with refutation eigenvectors, projection onto the PSD cone, and a small
//! Cholesky solver.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("matrix rows have inconsistent lengths")]
    Ragged,
    #[error("Jacobi iteration did not converge in {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),
}

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_THRESHOLD: f64 = 1e-12;

/// Dense symmetric matrix. Writes go through [`SymMatrix::set`], which stores
/// both `(i, j)` and `(j, i)` from the same value.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Fill from `f(i, j)` evaluated on the upper triangle only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Build from rows; the input must be exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LinalgError::Ragged);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(LinalgError::NotSymmetric(i, j));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    /// `Σ w v vᵀ`-style rank-one matrix `v vᵀ`.
    pub fn outer(v: &[f64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n.max(1))
            .take(self.n)
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// Row-major full storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, k: f64) -> Self {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    /// `self + k * other`.
    pub fn add_scaled(&self, k: f64, other: &SymMatrix) -> Self {
        assert_eq!(self.n, other.n, "matrix size mismatch");
        SymMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + k * b)
                .collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `vᵀ A v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl fmt::Display for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| format!("{:>12.5e}", self.get(i, j)))
                .collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column-major: eigenvector `k` is `vectors[k * n..(k + 1) * n]`.
    vectors: Vec<f64>,
    n: usize,
    pub sweeps: usize,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `V diag(f(λ)) Vᵀ`.
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.n;
        let lam: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .filter(|&k| lam[k] != 0.0)
                .map(|k| lam[k] * self.vectors[k * n + i] * self.vectors[k * n + j])
                .sum()
        })
    }
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps over all off-diagonal pairs until the off-diagonal Frobenius mass
/// drops to `1e-12 * max|A_ij|`, with at most 100 sweeps.
pub fn eigen_sym(a: &SymMatrix) -> Result<SymEigen, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = a.n;
    let mut m = a.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let threshold = OFF_DIAGONAL_THRESHOLD * a.max_abs();

    let off_mass = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * m[i * n + j] * m[i * n + j];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        if off_mass(&m) <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    let nkp = c * akp - s * akq;
                    let nkq = s * akp + c * akq;
                    m[k * n + p] = nkp;
                    m[p * n + k] = nkp;
                    m[k * n + q] = nkq;
                    m[q * n + k] = nkq;
                }
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                // v is stored row-major here; columns are eigenvectors
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &col in &order {
        vectors.extend((0..n).map(|row| v[row * n + col]));
    }
    Ok(SymEigen {
        values,
        vectors,
        n,
        sweeps,
    })
}

pub fn min_eigenvalue(a: &SymMatrix) -> Result<f64, LinalgError> {
    Ok(eigen_sym(a)?.values.last().copied().unwrap_or(0.0))
}

/// Outcome of a PSD test.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdVerdict {
    pub psd: bool,
    pub min_eigenvalue: f64,
    /// The eigenvalue floor `-tol * (1 + max|A_ij|)` used for the verdict.
    pub threshold: f64,
    /// Unit eigenvector of the smallest eigenvalue when the test fails;
    /// `wᵀ A w < 0`.
    pub witness: Option<Vec<f64>>,
}

/// PSD test with tolerance relative to the matrix scale.
pub fn is_psd(a: &SymMatrix, tol: f64) -> Result<PsdVerdict, LinalgError> {
    let threshold = -tol * (1.0 + a.max_abs());
    if a.size() == 0 {
        return Ok(PsdVerdict {
            psd: true,
            min_eigenvalue: 0.0,
            threshold,
            witness: None,
        });
    }
    let eig = eigen_sym(a)?;
    let k = eig.values.len() - 1;
    let min = eig.values[k];
    let psd = min >= threshold;
    Ok(PsdVerdict {
        psd,
        min_eigenvalue: min,
        threshold,
        witness: (!psd).then(|| eig.vector(k).to_vec()),
    })
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clamped to 0.
pub fn psd_project(a: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    let eig = eigen_sym(a)?;
    if eig.values.iter().all(|&l| l >= 0.0) {
        return Ok(a.clone());
    }
    Ok(eig.reassemble(|l| l.max(0.0)))
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(a: &SymMatrix) -> Result<Self, LinalgError> {
        let n = a.size();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite(j));
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn residuals(a: &SymMatrix, e: &SymEigen) -> (f64, f64) {
        let n = a.size();
        let mut res: f64 = 0.0;
        let mut orth: f64 = 0.0;
        for k in 0..n {
            let av = a.mul_vec(e.vector(k));
            for i in 0..n {
                res = res.max((av[i] - e.values[k] * e.vector(k)[i]).abs());
            }
            for l in 0..n {
                let dot: f64 = e
                    .vector(k)
                    .iter()
                    .zip(e.vector(l))
                    .map(|(x, y)| x * y)
                    .sum();
                let target = if k == l { 1.0 } else { 0.0 };
                orth = orth.max((dot - target).abs());
            }
        }
        (res, orth)
    }

    #[test]
    fn identity_eigenvalues() {
        let e = eigen_sym(&SymMatrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn two_by_two_analytic() {
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = eigen_sym(&a).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        assert!((min_eigenvalue(&a).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_thirty_residual() {
        let mut rng = StdRng::seed_from_u64(30);
        let a = SymMatrix::from_fn(30, |_, _| rng.gen_range(-1.0..1.0));
        let e = eigen_sym(&a).unwrap();
        let (res, orth) = residuals(&a, &e);
        assert!(res <= 1e-10 * (1.0 + a.max_abs()), "residual {res}");
        assert!(orth <= 1e-10, "orthonormality {orth}");
        for w in e.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn min_eigenvalue_examples() {
        let a = SymMatrix::diagonal(&[1.0, -1.0]);
        assert_eq!(min_eigenvalue(&a).unwrap(), -1.0);
        let v = [0.3, -1.2, 2.0, 0.5];
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        let m = min_eigenvalue(&SymMatrix::outer(&v)).unwrap();
        assert!(m.abs() <= 1e-10 * norm2);
    }

    #[test]
    fn psd_verdict_examples() {
        let ones = SymMatrix::from_fn(3, |_, _| 1.0);
        assert!(is_psd(&ones, 1e-8).unwrap().psd);
        assert!(is_psd(&SymMatrix::zeros(3), 1e-8).unwrap().psd);

        let neg = SymMatrix::diagonal(&[-0.375]);
        let v = is_psd(&neg, 1e-8).unwrap();
        assert!(!v.psd);
        assert_eq!(v.min_eigenvalue, -0.375);
        let w = v.witness.unwrap();
        assert_eq!(w.len(), 1);
        assert!((w[0].abs() - 1.0).abs() < 1e-15);
        assert!(neg.quadratic_form(&w) < 0.0);
    }

    #[test]
    fn witness_refutes() {
        let a = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let v = is_psd(&a, 1e-8).unwrap();
        assert!(!v.psd);
        assert!(a.quadratic_form(&v.witness.unwrap()) < 0.0);
    }

    #[test]
    fn projection_examples() {
        let p = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let pp = psd_project(&p).unwrap();
        assert!(pp.add_scaled(-1.0, &p).max_abs() <= 1e-10);

        let a = SymMatrix::diagonal(&[1.0, -1.0]);
        let pa = psd_project(&a).unwrap();
        assert!(
            pa.add_scaled(-1.0, &SymMatrix::diagonal(&[1.0, 0.0]))
                .max_abs()
                < 1e-15
        );

        let b = SymMatrix::diagonal(&[-1.0, -2.0]);
        assert!(psd_project(&b).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn projection_idempotent_and_psd() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..12);
            let a = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let p = psd_project(&a).unwrap();
            let pp = psd_project(&p).unwrap();
            assert!(pp.add_scaled(-1.0, &p).max_abs() <= 1e-10);
            assert!(is_psd(&p, 1e-9).unwrap().psd);
        }
    }

    #[test]
    fn non_finite_rejected() {
        let a = SymMatrix::diagonal(&[f64::NAN, 1.0]);
        assert_eq!(eigen_sym(&a).unwrap_err(), LinalgError::NonFinite);
    }

    #[test]
    fn asymmetric_rows_rejected() {
        let r = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]);
        assert_eq!(r.unwrap_err(), LinalgError::NotSymmetric(0, 1));
    }

    #[test]
    fn cholesky_solves() {
        let a = SymMatrix::from_rows(&[
            vec![4.0, 2.0, 0.4],
            vec![2.0, 5.0, 1.0],
            vec![0.4, 1.0, 3.0],
        ])
        .unwrap();
        let x = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x);
        let sol = Cholesky::factor(&a).unwrap().solve(&b);
        for (s, t) in sol.iter().zip(&x) {
            assert!((s - t).abs() < 1e-13);
        }
        assert!(Cholesky::factor(&SymMatrix::diagonal(&[1.0, -1.0])).is_err());
    }
}
