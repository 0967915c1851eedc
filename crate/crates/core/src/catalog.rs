//! Shipped scenarios whose curves are known to satisfy the curve hypotheses.

use crate::linalg::SymMatrix;
use crate::polyring::{monomial_basis, Polynomial};
use crate::scenario::{ArchimedeanWitness, CurveAssertion, GeneratorLabel, Scenario};
use crate::sosearch::GramBlock;

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub scenario: Scenario,
}

fn x(i: usize) -> Polynomial {
    Polynomial::var(2, i)
}

fn sq(p: &Polynomial) -> Polynomial {
    p * p
}

fn vetted(name: &'static str, description: &'static str, s: Scenario) -> CatalogEntry {
    CatalogEntry {
        name,
        description,
        scenario: s.with_assertion(CurveAssertion::Vetted {
            catalog: name.to_string(),
        }),
    }
}

fn half_disk() -> CatalogEntry {
    let r = &(&Polynomial::one(2) - &sq(&x(0))) - &sq(&x(1));
    let s = Scenario::new(x(0), vec![r]).unwrap();
    vetted(
        "half-disk",
        "q = x1 (the x2-axis), r = 1 - x1^2 - x2^2; bump is the right half of the unit disk",
        s,
    )
}

fn parabola_disk() -> CatalogEntry {
    let q = &x(1) - &sq(&x(0));
    let a = &x(0) - &Polynomial::one(2);
    let b = &x(1) - &Polynomial::constant(2, 2.0);
    let r = &(&Polynomial::one(2) - &sq(&a)) - &sq(&b);
    // 13 - |x|^2 = (x1 - 2)^2 + (x2 - 4)^2 + 1 + 2 r
    let sigma0 = SymMatrix::from_rows(&[
        vec![21.0, -2.0, -4.0],
        vec![-2.0, 1.0, 0.0],
        vec![-4.0, 0.0, 1.0],
    ])
    .unwrap();
    let witness = ArchimedeanWitness {
        bound: 13.0,
        multipliers: vec![
            GramBlock::new(GeneratorLabel::One, monomial_basis(2, 1), sigma0),
            GramBlock::new(
                GeneratorLabel::QTimesR(1),
                monomial_basis(2, 0),
                SymMatrix::diagonal(&[2.0]),
            ),
        ],
    };
    let s = Scenario::new(q, vec![r])
        .unwrap()
        .with_archimedean_witness(witness)
        .unwrap();
    vetted(
        "fig1",
        "q = x2 - x1^2 (parabola), r = 1 - (x1-1)^2 - (x2-2)^2; bump is the part of the unit disk at (1,2) above the parabola",
        s,
    )
}

fn crossing_lines() -> CatalogEntry {
    let q = &sq(&x(0)).scale(3.0) - &sq(&x(1));
    let r = &(&Polynomial::one(2) - &sq(&x(0))) - &sq(&x(1));
    let s = Scenario::new(q, vec![r]).unwrap();
    vetted(
        "fig2",
        "q = 3 x1^2 - x2^2 (two lines crossing at the origin), r = 1 - x1^2 - x2^2; bump is the two double cones |x2| < sqrt(3)|x1| inside the unit disk",
        s,
    )
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![half_disk(), parabola_disk(), crossing_lines()]
}

pub fn lookup(name: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.name == name)
}

pub fn names() -> Vec<&'static str> {
    catalog().iter().map(|e| e.name).collect()
}
