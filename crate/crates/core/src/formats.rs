//! JSON file formats for polynomials, sequences, measures, scenarios and
//! certificates.
//!
//! Floats are written with 17 significant digits and parsed with correct
//! rounding, so every `f64` survives a write/read cycle bit for bit.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{LinalgError, SymMatrix};
use crate::measures::{Atom, AtomicMeasure, CurveMeasure, Measure, MeasureError};
use crate::momentseq::{sequence_len, SeqError, TruncatedSequence};
use crate::polyring::{Exponent, PolyError, Polynomial};
use crate::scenario::{
    ArchimedeanWitness, CurveAssertion, GeneratorLabel, Scenario, ScenarioError,
};
use crate::sosearch::{GramBlock, GramDecomposition};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Sequence(#[from] SeqError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{0}")]
    Label(String),
    #[error("sequence entry {exp:?}: {reason}")]
    BadEntry { exp: Vec<u32>, reason: String },
    #[error("sequence is missing {count} values up to order {order}, first missing {first:?}")]
    Incomplete {
        count: usize,
        order: u32,
        first: Vec<u32>,
    },
    #[error("{0}")]
    Invalid(String),
}

struct Exact;

impl serde_json::ser::Formatter for Exact {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

fn compact<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Exact);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json emits utf-8")
}

/// A JSON array with one record per line.
fn list(records: &[String]) -> String {
    if records.is_empty() {
        "[]".to_string()
    } else {
        format!("[\n{}\n]", records.join(",\n"))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub exp: Vec<u32>,
    pub coef: f64,
}

fn poly_records(p: &Polynomial) -> Vec<TermRecord> {
    p.terms()
        .map(|(e, c)| TermRecord {
            exp: e.entries().to_vec(),
            coef: c,
        })
        .collect()
}

fn poly_from_records(dim: usize, records: Vec<TermRecord>) -> Result<Polynomial, PolyError> {
    Polynomial::from_unique_terms(
        dim,
        records.into_iter().map(|r| (Exponent::new(r.exp), r.coef)),
    )
}

pub fn polynomial_to_json(p: &Polynomial) -> String {
    let lines: Vec<String> = poly_records(p).iter().map(compact).collect();
    list(&lines) + "\n"
}

/// Parse a list of `{"exp", "coef"}` records in `dim` variables. Repeated
/// exponents are rejected.
pub fn polynomial_from_json(text: &str, dim: usize) -> Result<Polynomial, FormatError> {
    let records: Vec<TermRecord> = serde_json::from_str(text)?;
    Ok(poly_from_records(dim, records)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValueRecord {
    exp: Vec<u32>,
    val: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceFile {
    dim: usize,
    order: u32,
    values: Vec<ValueRecord>,
}

pub fn sequence_to_json(s: &TruncatedSequence) -> String {
    let records: Vec<String> = s
        .iter()
        .map(|(e, v)| {
            compact(&ValueRecord {
                exp: e.entries().to_vec(),
                val: v,
            })
        })
        .collect();
    format!(
        "{{\"dim\": {}, \"order\": {}, \"values\": {}}}\n",
        s.dim(),
        s.order(),
        list(&records)
    )
}

/// Parse a sequence file. Every exponent of degree at most `order` must
/// appear exactly once.
pub fn sequence_from_json(text: &str) -> Result<TruncatedSequence, FormatError> {
    let file: SequenceFile = serde_json::from_str(text)?;
    if file.dim == 0 {
        return Err(PolyError::ZeroDimension.into());
    }
    let len = sequence_len(file.dim, file.order);
    let mut values: Vec<Option<f64>> = vec![None; len];
    for r in file.values {
        let bad = |reason: &str| FormatError::BadEntry {
            exp: r.exp.clone(),
            reason: reason.to_string(),
        };
        if r.exp.len() != file.dim {
            return Err(bad("wrong number of exponents"));
        }
        if !r.val.is_finite() {
            return Err(bad("value is not finite"));
        }
        let e = Exponent::new(r.exp.clone());
        if e.degree() > file.order {
            return Err(bad("degree exceeds the sequence order"));
        }
        let slot = &mut values[e.grlex_rank()];
        if slot.is_some() {
            return Err(bad("duplicate exponent"));
        }
        *slot = Some(r.val);
    }
    let missing: Vec<usize> = (0..len).filter(|&i| values[i].is_none()).collect();
    if let Some(&first) = missing.first() {
        let basis = crate::polyring::monomial_basis(file.dim, file.order);
        return Err(FormatError::Incomplete {
            count: missing.len(),
            order: file.order,
            first: basis[first].entries().to_vec(),
        });
    }
    Ok(TruncatedSequence::from_values(
        file.dim,
        file.order,
        values.into_iter().map(|v| v.unwrap()).collect(),
    )?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomRecord {
    point: Vec<f64>,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveRecord {
    param: Vec<Vec<TermRecord>>,
    t0: f64,
    t1: f64,
    density: Vec<TermRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nodes: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    atoms: Vec<AtomRecord>,
    #[serde(default)]
    curves: Vec<CurveRecord>,
}

pub fn measure_to_json(mu: &Measure) -> String {
    let atoms: Vec<String> = mu
        .atomic()
        .atoms()
        .iter()
        .map(|a| {
            compact(&AtomRecord {
                point: a.point.clone(),
                weight: a.weight,
            })
        })
        .collect();
    let curves: Vec<String> = mu
        .curves()
        .iter()
        .map(|c| {
            let (t0, t1) = c.interval();
            compact(&CurveRecord {
                param: c.param().iter().map(poly_records).collect(),
                t0,
                t1,
                density: poly_records(c.density()),
                nodes: c.nodes(),
            })
        })
        .collect();
    format!(
        "{{\"dim\": {}, \"atoms\": {}, \"curves\": {}}}\n",
        mu.dim(),
        list(&atoms),
        list(&curves)
    )
}

/// Parse a measure file. `dim` may be omitted when there is at least one
/// atom or curve.
pub fn measure_from_json(text: &str) -> Result<Measure, FormatError> {
    let file: MeasureFile = serde_json::from_str(text)?;
    let dim = file
        .dim
        .or_else(|| file.atoms.first().map(|a| a.point.len()))
        .or_else(|| file.curves.first().map(|c| c.param.len()))
        .ok_or(MeasureError::Empty)?;
    let atoms = AtomicMeasure::new(
        dim,
        file.atoms
            .into_iter()
            .map(|a| Atom::new(a.point, a.weight))
            .collect(),
    )?;
    let mut curves = Vec::with_capacity(file.curves.len());
    for c in file.curves {
        let param = c
            .param
            .into_iter()
            .map(|p| poly_from_records(1, p))
            .collect::<Result<Vec<_>, _>>()?;
        let mut curve = CurveMeasure::new(param, c.t0, c.t1, poly_from_records(1, c.density)?)?;
        if let Some(m) = c.nodes {
            curve = curve.with_nodes(m);
        }
        curves.push(curve);
    }
    Ok(Measure::new(atoms, curves)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockRecord {
    label: String,
    basis: Vec<Vec<u32>>,
    gram: Vec<Vec<f64>>,
}

fn block_record(b: &GramBlock) -> BlockRecord {
    BlockRecord {
        label: b.label.to_string(),
        basis: b.basis.iter().map(|e| e.entries().to_vec()).collect(),
        gram: b.gram.rows(),
    }
}

fn block_from_record(dim: usize, r: BlockRecord) -> Result<GramBlock, FormatError> {
    let label: GeneratorLabel = r.label.parse().map_err(FormatError::Label)?;
    if let Some(e) = r.basis.iter().find(|e| e.len() != dim) {
        return Err(FormatError::Invalid(format!(
            "block {label}: basis monomial {e:?} does not have {dim} exponents"
        )));
    }
    if r.gram.len() != r.basis.len() {
        return Err(FormatError::Invalid(format!(
            "block {label}: basis has {} monomials but the Gram matrix has {} rows",
            r.basis.len(),
            r.gram.len()
        )));
    }
    let gram = SymMatrix::from_rows(&r.gram)?;
    Ok(GramBlock::new(
        label,
        r.basis.into_iter().map(Exponent::new).collect(),
        gram,
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateFile {
    blocks: Vec<BlockRecord>,
    residual: f64,
    iterations: usize,
}

pub fn certificate_to_json(c: &GramDecomposition) -> String {
    let blocks: Vec<String> = c.blocks.iter().map(|b| compact(&block_record(b))).collect();
    format!(
        "{{\"blocks\": {}, \"residual\": {}, \"iterations\": {}}}\n",
        list(&blocks),
        compact(&c.residual),
        c.iterations
    )
}

pub fn certificate_from_json(text: &str, dim: usize) -> Result<GramDecomposition, FormatError> {
    let file: CertificateFile = serde_json::from_str(text)?;
    let blocks = file
        .blocks
        .into_iter()
        .map(|b| block_from_record(dim, b))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GramDecomposition {
        blocks,
        residual: file.residual,
        iterations: file.iterations,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    dim: usize,
    q: Vec<TermRecord>,
    generators: Vec<Vec<TermRecord>>,
    #[serde(
        rename = "archimedean_C",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    archimedean_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    catalog: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    archimedean_multipliers: Option<Vec<BlockRecord>>,
}

pub fn scenario_to_json(s: &Scenario) -> String {
    let catalog = match s.curve_assertion() {
        CurveAssertion::Vetted { catalog } => Some(catalog.clone()),
        CurveAssertion::UserAsserted { claimed_catalog } => claimed_catalog.clone(),
    };
    let file = ScenarioFile {
        dim: s.dim(),
        q: poly_records(s.q()),
        generators: s.generators().iter().map(poly_records).collect(),
        archimedean_c: s.archimedean_bound(),
        catalog,
        archimedean_multipliers: s
            .archimedean_witness()
            .map(|w| w.multipliers.iter().map(block_record).collect()),
    };
    let value: serde_json::Value =
        serde_json::from_str(&compact(&file)).expect("round trip through Value");
    let mut out = String::from("{\n");
    let obj = value.as_object().expect("scenario serializes to an object");
    let fields: Vec<String> = obj
        .iter()
        .map(|(k, v)| format!("\"{k}\": {}", compact(v)))
        .collect();
    out.push_str(&fields.join(",\n"));
    out.push_str("\n}\n");
    out
}

/// Parse a scenario file. The result is always user-asserted; a `catalog`
/// name in the file is recorded but not trusted.
pub fn scenario_from_json(text: &str) -> Result<Scenario, FormatError> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    if file.dim == 0 {
        return Err(PolyError::ZeroDimension.into());
    }
    let q = poly_from_records(file.dim, file.q)?;
    let generators = file
        .generators
        .into_iter()
        .map(|g| poly_from_records(file.dim, g))
        .collect::<Result<Vec<_>, _>>()?;
    let mut s = Scenario::new(q, generators)?.with_assertion(CurveAssertion::UserAsserted {
        claimed_catalog: file.catalog,
    });
    match (file.archimedean_c, file.archimedean_multipliers) {
        (Some(bound), Some(blocks)) => {
            let multipliers = blocks
                .into_iter()
                .map(|b| block_from_record(file.dim, b))
                .collect::<Result<Vec<_>, _>>()?;
            s = s.with_archimedean_witness(ArchimedeanWitness { bound, multipliers })?;
        }
        (Some(bound), None) => s = s.with_archimedean_bound(bound)?,
        (None, Some(_)) => {
            return Err(FormatError::Invalid(
                "archimedean_multipliers given without archimedean_C".to_string(),
            ))
        }
        (None, None) => {}
    }
    Ok(s)
}
