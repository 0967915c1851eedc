#![allow(dead_code)]

use bumpmoment::catalog::lookup;
use bumpmoment::linalg::SymMatrix;
use bumpmoment::measures::{Atom, AtomicMeasure, CurveMeasure, Measure};
use bumpmoment::polyring::{monomial_basis, Polynomial};
use bumpmoment::scenario::Scenario;
use bumpmoment::sosearch::{block_layout, GramBlock};
use rand::rngs::StdRng;
use rand::Rng;

pub const SCENARIOS: [&str; 3] = ["half-disk", "fig1", "fig2"];

/// A catalog scenario with samplers for its curve and bump.
pub struct Setup {
    pub name: &'static str,
    pub scenario: Scenario,
    /// Point of the unit-ball-shaped set `{r >= 0}`: centre and radius.
    pub disk: ([f64; 2], f64),
    /// Atom violating the support set.
    pub planted: [f64; 2],
}

pub fn setup(name: &'static str) -> Setup {
    let scenario = lookup(name).unwrap().scenario;
    let (disk, planted) = match name {
        "half-disk" => (([0.0, 0.0], 1.0), [-0.5, 0.0]),
        "fig1" => (([1.0, 2.0], 1.0), [1.5, 1.5]),
        "fig2" => (([0.0, 0.0], 1.0), [0.0, 0.5]),
        _ => unreachable!(),
    };
    Setup {
        name,
        scenario,
        disk,
        planted,
    }
}

fn t() -> Polynomial {
    Polynomial::var(1, 0)
}

impl Setup {
    /// Polynomial parametrization of (a branch of) the curve.
    pub fn curve_param(&self, branch: bool) -> Vec<Polynomial> {
        match self.name {
            "half-disk" => vec![Polynomial::zero(1), t()],
            "fig1" => vec![t(), &t() * &t()],
            "fig2" => {
                let slope = if branch { 3f64.sqrt() } else { -(3f64.sqrt()) };
                vec![t(), t().scale(slope)]
            }
            _ => unreachable!(),
        }
    }

    pub fn curve_point(&self, rng: &mut StdRng) -> Vec<f64> {
        let param = self.curve_param(rng.gen());
        let s = rng.gen_range(-1.8..1.8);
        param.iter().map(|p| p.eval_unchecked(&[s])).collect()
    }

    /// Uniform point of `{r >= 0}`.
    pub fn disk_point(&self, rng: &mut StdRng) -> Vec<f64> {
        let ([cx, cy], rad) = self.disk;
        loop {
            let (u, v): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if u * u + v * v <= 1.0 {
                return vec![cx + rad * u, cy + rad * v];
            }
        }
    }

    /// Uniform point of the bump `{r >= 0, q > 0}`, kept away from the curve.
    pub fn bump_point(&self, rng: &mut StdRng) -> Vec<f64> {
        loop {
            let p = self.disk_point(rng);
            if self.scenario.q().eval_unchecked(&p) > 1e-6 {
                return p;
            }
        }
    }

    pub fn random_atoms(&self, rng: &mut StdRng, max_atoms: usize) -> AtomicMeasure {
        let k = rng.gen_range(1..=max_atoms);
        let atoms = (0..k)
            .map(|_| {
                let p = if rng.gen() {
                    self.curve_point(rng)
                } else {
                    self.bump_point(rng)
                };
                Atom::new(p, rng.gen_range(0.05..1.0))
            })
            .collect();
        AtomicMeasure::new(2, atoms).unwrap()
    }

    pub fn random_segment(&self, rng: &mut StdRng) -> CurveMeasure {
        let a = rng.gen_range(-1.8..1.0);
        let b = rng.gen_range(a + 0.1..1.8);
        let density = match rng.gen_range(0..3) {
            0 => Polynomial::one(1),
            1 => Polynomial::constant(1, rng.gen_range(0.1..2.0)),
            _ => &Polynomial::one(1) + &(&t() * &t()),
        };
        CurveMeasure::new(self.curve_param(rng.gen()), a, b, density).unwrap()
    }

    /// 1 to 8 atoms on the curve and in the bump, plus up to two curve
    /// segments.
    pub fn random_measure(&self, rng: &mut StdRng) -> Measure {
        let atoms = self.random_atoms(rng, 8);
        let segments = (0..rng.gen_range(0..=2))
            .map(|_| self.random_segment(rng))
            .collect();
        Measure::new(atoms, segments).unwrap()
    }
}

pub fn random_poly(rng: &mut StdRng, dim: usize, degree: u32) -> Polynomial {
    let mut terms = Vec::new();
    for e in monomial_basis(dim, degree) {
        if rng.gen_bool(0.7) {
            terms.push((e, rng.gen_range(-1.0..1.0)));
        }
    }
    Polynomial::from_terms(dim, terms).unwrap()
}

/// `B Bᵀ` with a Gaussian-ish `B`: positive definite almost surely.
pub fn random_gram(rng: &mut StdRng, n: usize) -> SymMatrix {
    let b: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    SymMatrix::from_fn(n, |i, j| (0..n).map(|k| b[i][k] * b[j][k]).sum())
}

/// Random full-rank blocks for every generator allowed at `bound`.
pub fn planted_blocks(
    rng: &mut StdRng,
    scenario: &Scenario,
    bound: u32,
) -> Vec<(GramBlock, Polynomial)> {
    block_layout(scenario, bound)
        .into_iter()
        .map(|(label, g, basis)| {
            let n = basis.len();
            (GramBlock::new(label, basis, random_gram(rng, n)), g)
        })
        .collect()
}
