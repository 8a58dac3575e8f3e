use super::element::FieldElement;
use super::extension::{build_norm_form, ExtensionSpec, NormFormPoly};
use super::field::FieldSpec;
use super::poly::{FlatPoly, Poly};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Residue shifts (x, y, z) applied to the variables of F.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shifts {
    pub x: Vec<FieldElement>,
    pub y: Vec<FieldElement>,
    pub z: FieldElement,
}

impl Shifts {
    pub fn zero(n: usize, m: usize) -> Self {
        Shifts {
            x: vec![FieldElement::zero(m); n],
            y: vec![FieldElement::zero(m); n],
            z: FieldElement::zero(m),
        }
    }

    /// All 2n+1 shifts in variable order.
    pub fn all(&self) -> Vec<FieldElement> {
        self.x
            .iter()
            .chain(&self.y)
            .chain(std::iter::once(&self.z))
            .cloned()
            .collect()
    }
}

/// F(k) = a N(k_1..k_n + x) + b N(k_(n+1)..k_(2n) + y) - (k_(2n+1) + z)^n,
/// with its real flattening F* and the gradient of F*.
#[derive(Clone, Debug)]
pub struct ShiftedForm {
    pub a: FieldElement,
    pub b: FieldElement,
    pub n: usize,
    pub shifts: Shifts,
    norm_form: NormFormPoly,
    f: Poly,
    f_star: FlatPoly,
    gradient: Vec<FlatPoly>,
}

pub fn build_shifted_form(
    field: &FieldSpec,
    ext: &ExtensionSpec,
    a: &FieldElement,
    b: &FieldElement,
    shifts: &Shifts,
) -> Result<ShiftedForm> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::DegenerateEquation("coefficients a and b must be nonzero".into()));
    }
    let n = ext.degree();
    if shifts.x.len() != n || shifts.y.len() != n {
        return Err(Error::MismatchedField {
            expected: n,
            got: shifts.x.len().min(shifts.y.len()),
        });
    }
    if shifts.all().iter().any(|s| !s.is_integral()) {
        return Err(Error::NotIntegral);
    }
    let nf = build_norm_form(field, ext)?;
    let nv = 2 * n + 1;
    let var = |i: usize| Poly::monomial(nv, i, field.one()).add(&Poly::constant(nv, shifts.all()[i].clone()));
    let xs: Vec<Poly> = (0..n).map(var).collect();
    let ys: Vec<Poly> = (n..2 * n).map(var).collect();
    let nx = nf.poly().substitute(field, &xs)?.scale(field, a)?;
    let ny = nf.poly().substitute(field, &ys)?.scale(field, b)?;
    let zn = var(2 * n).pow(field, n as u32)?;
    let f = nx.add(&ny).sub(&zn);
    let f_star = f.flatten(field)?;
    let gradient = f_star.gradient();
    Ok(ShiftedForm {
        a: a.clone(),
        b: b.clone(),
        n,
        shifts: shifts.clone(),
        norm_form: nf,
        f,
        f_star,
        gradient,
    })
}

impl ShiftedForm {
    pub fn norm_form(&self) -> &NormFormPoly {
        &self.norm_form
    }

    pub fn poly(&self) -> &Poly {
        &self.f
    }

    pub fn f_star(&self) -> &FlatPoly {
        &self.f_star
    }

    pub fn gradient_polys(&self) -> &[FlatPoly] {
        &self.gradient
    }

    pub fn eval(&self, field: &FieldSpec, k: &[FieldElement]) -> Result<FieldElement> {
        self.f.eval(field, k)
    }

    /// F* at real omega-coordinates (variable j, coordinate i at j m + i).
    pub fn eval_star(&self, y: &[f64]) -> Vec<f64> {
        self.f_star.eval_f64(y)
    }

    /// Jacobian of F*: `out[c][v]` = d F*_c / d y_v.
    pub fn jacobian_star(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let m = self.f_star.outputs();
        let mut out = vec![vec![0.0; self.gradient.len()]; m];
        for (v, g) in self.gradient.iter().enumerate() {
            for (c, val) in g.eval_f64(y).into_iter().enumerate() {
                out[c][v] = val;
            }
        }
        out
    }
}
