//! JSON documents describing k and K/k.
//!
//! Field document:
//!
//! ```json
//! { "degree": 2, "basis_labels": ["1", "i"],
//!   "mult_table": [[["1","0"],["0","1"]], [["0","1"],["-1","0"]]],
//!   "signature": [0, 1], "min_poly": [1, 0, 1] }
//! ```
//!
//! `mult_table[i][j]` lists the omega-coordinates of omega_i omega_j as
//! rationals written `"p/q"` or `"p"` (plain JSON integers are accepted
//! too). Entries must be integral. When `mult_table` is omitted, `min_poly`
//! (monic, constant term first) generates a power basis. When both are
//! present, `min_poly` must vanish at one of the basis elements.
//!
//! Extension document:
//!
//! ```json
//! { "degree": 2, "mult_table": [[[["1"],["0"]], ...]] }
//! ```
//!
//! Here `mult_table[i][j][l]` is an element of k (a list of m rationals),
//! the tau_l coefficient of tau_i tau_j. Alternatively `rel_min_poly` lists
//! the coefficients (elements of k, constant term first) of a monic
//! relative polynomial generating a power basis.

use super::element::FieldElement;
use super::extension::ExtensionSpec;
use super::field::{FieldSpec, Signature, DEFAULT_EMBEDDING_PRECISION};
use super::linalg::{q, Q};
use super::poly::Poly;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalText {
    Int(i64),
    Text(String),
}

impl RationalText {
    pub fn parse(&self) -> Result<Q> {
        match self {
            RationalText::Int(v) => Ok(q(*v as i128)),
            RationalText::Text(s) => parse_rational(s),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::InvalidSpec(format!("cannot parse rational {s:?}"));
    match s.split_once('/') {
        Some((p, d)) => {
            let p: i128 = p.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(Error::ZeroDenominator);
            }
            Ok(Q::new(p, d))
        }
        None => s.parse::<i128>().map(q).map_err(|_| bad()),
    }
}

pub fn format_rational(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDocument {
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mult_table: Option<Vec<Vec<Vec<RationalText>>>>,
    pub signature: (usize, usize),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_poly: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
}

impl FieldDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("field document: {e}")))
    }

    pub fn build(&self) -> Result<FieldSpec> {
        let sig = Signature {
            real: self.signature.0,
            complex: self.signature.1,
        };
        let precision = self.precision.unwrap_or(DEFAULT_EMBEDDING_PRECISION);
        if !(precision > 0.0) {
            return Err(Error::InvalidSpec("precision must be positive".into()));
        }
        let field = match (&self.mult_table, &self.min_poly) {
            (Some(table), _) => {
                let m = self.degree;
                if table.len() != m {
                    return Err(Error::MalformedTable(format!(
                        "table has {} rows for degree {m}",
                        table.len()
                    )));
                }
                let parsed: Vec<Vec<Vec<Q>>> = table
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|e| e.iter().map(RationalText::parse).collect::<Result<Vec<_>>>())
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?;
                let labels = self
                    .basis_labels
                    .clone()
                    .unwrap_or_else(|| (1..=m).map(|i| format!("w{i}")).collect());
                FieldSpec::new(labels, &parsed, sig, precision)?
            }
            (None, Some(mp)) => {
                if mp.len() != self.degree + 1 {
                    return Err(Error::InvalidSpec("min_poly degree differs from degree".into()));
                }
                let f = FieldSpec::from_min_poly(mp, sig)?;
                if precision != DEFAULT_EMBEDDING_PRECISION {
                    f.with_precision(precision)?
                } else {
                    f
                }
            }
            (None, None) => return Err(Error::InvalidSpec("field needs mult_table or min_poly".into())),
        };
        if let (Some(_), Some(mp)) = (&self.mult_table, &self.min_poly) {
            check_min_poly(&field, mp)?;
        }
        Ok(field)
    }

    pub fn load(path: &std::path::Path) -> Result<FieldSpec> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidSpec(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)?.build()
    }

    /// Document describing an existing field by its table.
    pub fn describe(field: &FieldSpec) -> Self {
        let m = field.degree();
        FieldDocument {
            degree: m,
            basis_labels: Some(field.labels().to_vec()),
            mult_table: Some(
                (0..m)
                    .map(|i| {
                        (0..m)
                            .map(|j| field.table_entry(i, j).iter().map(|&v| RationalText::Int(v)).collect())
                            .collect()
                    })
                    .collect(),
            ),
            signature: (field.signature().real, field.signature().complex),
            min_poly: field.min_poly().map(|p| p.to_vec()),
            precision: None,
        }
    }
}

fn check_min_poly(field: &FieldSpec, mp: &[i64]) -> Result<()> {
    let m = field.degree();
    let poly = mp.iter().enumerate().fold(Poly::zero(1, m), |acc, (t, &c)| {
        if c == 0 {
            return acc;
        }
        let mut e = Poly::constant(1, field.integer(c as i128));
        for _ in 0..t {
            e = e.mul(field, &Poly::monomial(1, 0, field.one())).expect("same field");
        }
        acc.add(&e)
    });
    for j in 0..m {
        if poly.eval(field, &[FieldElement::basis(m, j)])?.is_zero() {
            return Ok(());
        }
    }
    Err(Error::InvalidSpec("min_poly vanishes at no basis element".into()))
}

pub type ElementText = Vec<RationalText>;

pub fn parse_element(field: &FieldSpec, e: &ElementText) -> Result<FieldElement> {
    let coords = e.iter().map(RationalText::parse).collect::<Result<Vec<_>>>()?;
    field.element(&coords)
}

pub fn describe_element(e: &FieldElement) -> ElementText {
    e.coords()
        .iter()
        .map(|c| RationalText::Text(format_rational(c)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionDocument {
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mult_table: Option<Vec<Vec<Vec<ElementText>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_min_poly: Option<Vec<ElementText>>,
}

impl ExtensionDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("extension document: {e}")))
    }

    pub fn build(&self, field: &FieldSpec) -> Result<ExtensionSpec> {
        let ext = match (&self.mult_table, &self.rel_min_poly) {
            (Some(t), _) => {
                let table = t
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|entry| {
                                entry
                                    .iter()
                                    .map(|e| parse_element(field, e))
                                    .collect::<Result<Vec<_>>>()
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                ExtensionSpec::new(field, table)?
            }
            (None, Some(p)) => {
                let coeffs = p.iter().map(|e| parse_element(field, e)).collect::<Result<Vec<_>>>()?;
                ExtensionSpec::from_rel_min_poly(field, &coeffs)?
            }
            (None, None) => return Err(Error::InvalidSpec("extension needs mult_table or rel_min_poly".into())),
        };
        if ext.degree() != self.degree {
            return Err(Error::InvalidSpec(format!(
                "extension degree {} but table has degree {}",
                self.degree,
                ext.degree()
            )));
        }
        Ok(ext)
    }

    pub fn load(path: &std::path::Path, field: &FieldSpec) -> Result<ExtensionSpec> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidSpec(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)?.build(field)
    }

    pub fn describe(ext: &ExtensionSpec) -> Self {
        let n = ext.degree();
        ExtensionDocument {
            degree: n,
            mult_table: Some(
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| (0..n).map(|l| describe_element(ext.entry(i, j, l))).collect())
                            .collect()
                    })
                    .collect(),
            ),
            rel_min_poly: None,
        }
    }
}
