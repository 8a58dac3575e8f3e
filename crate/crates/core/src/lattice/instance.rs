use super::boxes::{rho_for_eta, ProductBox};
use crate::algebra::{
    build_shifted_form, ExtensionSpec, FieldElement, FieldSpec, IdealSpec, IntPoly, ShiftedForm, Shifts,
};
use crate::error::{Error, Result};

/// Everything needed to state and count aN(x) + bN(y) = z^n with the
/// congruence and archimedean constraints.
#[derive(Clone, Debug)]
pub struct EquationInstance {
    pub field: FieldSpec,
    pub ext: ExtensionSpec,
    pub a: FieldElement,
    pub b: FieldElement,
    pub modulus: IdealSpec,
    /// Residues (x, y, z) modulo the congruence ideal, reduced.
    pub residues: Shifts,
    /// Archimedean target point of V^(2n+1) in omega-coordinates.
    pub targets: Vec<f64>,
    pub eta: f64,
    pub rho: f64,
    pub bx: ProductBox,
    /// a N(x) + b N(y) - z^n with zero shifts.
    pub form: ShiftedForm,
    /// F with the residues as shifts.
    pub shifted: ShiftedForm,
    pub ax: IntPoly,
    pub by: IntPoly,
    pub zn: IntPoly,
}

/// Inputs for [`EquationInstance::new`].
#[derive(Clone, Debug)]
pub struct InstanceSpec {
    pub field: FieldSpec,
    pub ext: ExtensionSpec,
    pub a: FieldElement,
    pub b: FieldElement,
    pub modulus: IdealSpec,
    pub residues: Shifts,
    pub targets: Vec<f64>,
    pub eta: f64,
    pub rho: Option<f64>,
}

impl EquationInstance {
    pub fn new(spec: InstanceSpec) -> Result<Self> {
        let InstanceSpec {
            field,
            ext,
            a,
            b,
            modulus,
            residues,
            targets,
            eta,
            rho,
        } = spec;
        let m = field.degree();
        let n = ext.degree();
        if ext.base_degree() != m || modulus.degree() != m {
            return Err(Error::MismatchedField {
                expected: m,
                got: if ext.base_degree() != m {
                    ext.base_degree()
                } else {
                    modulus.degree()
                },
            });
        }
        if !a.is_integral() || !b.is_integral() {
            return Err(Error::NotIntegral);
        }
        if !(eta > 0.0) {
            return Err(Error::InvalidSpec("eta must be positive".into()));
        }
        let rho = rho.unwrap_or_else(|| rho_for_eta(&field, eta));
        let bx = ProductBox::from_center(&targets, rho, n, m)?;
        let reduce = |e: &FieldElement| -> Result<FieldElement> {
            if !e.is_integral() || e.degree() != m {
                return Err(Error::InvalidSpec("residues must be integral elements of k".into()));
            }
            Ok(FieldElement::from_i128(modulus.reduce(e.numerators())))
        };
        if residues.x.len() != n || residues.y.len() != n {
            return Err(Error::InvalidSpec(format!("expected {n} residues for x and for y")));
        }
        let residues = Shifts {
            x: residues.x.iter().map(reduce).collect::<Result<_>>()?,
            y: residues.y.iter().map(reduce).collect::<Result<_>>()?,
            z: reduce(&residues.z)?,
        };
        let form = build_shifted_form(&field, &ext, &a, &b, &Shifts::zero(n, m))?;
        let shifted = build_shifted_form(&field, &ext, &a, &b, &residues)?;
        let nf = form.norm_form().poly();
        let ax = nf.scale(&field, &a)?.flatten(&field)?.compile()?;
        let by = nf.scale(&field, &b)?.flatten(&field)?.compile()?;
        let z = crate::algebra::Poly::monomial(1, 0, field.one());
        let zn = z.pow(&field, n as u32)?.flatten(&field)?.compile()?;
        Ok(EquationInstance {
            field,
            ext,
            a,
            b,
            modulus,
            residues,
            targets,
            eta,
            rho,
            bx,
            form,
            shifted,
            ax,
            by,
            zn,
        })
    }

    /// The spec this instance was built from, for rebuilding with changes.
    pub fn spec(&self) -> InstanceSpec {
        InstanceSpec {
            field: self.field.clone(),
            ext: self.ext.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            modulus: self.modulus.clone(),
            residues: self.residues.clone(),
            targets: self.targets.clone(),
            eta: self.eta,
            rho: Some(self.rho),
        }
    }

    pub fn m(&self) -> usize {
        self.field.degree()
    }

    pub fn n(&self) -> usize {
        self.ext.degree()
    }

    /// Number of variables of F: 2n + 1.
    pub fn arity(&self) -> usize {
        2 * self.n() + 1
    }

    /// F(residues) lies in the congruence ideal.
    pub fn residues_consistent(&self) -> Result<bool> {
        let zero = vec![FieldElement::zero(self.m()); self.arity()];
        let v = self.shifted.eval(&self.field, &zero)?;
        Ok(self.modulus.contains_element(&v))
    }

    /// Some partial derivative of F at the residues is coprime to the
    /// congruence ideal.
    pub fn residues_nonsingular(&self) -> Result<bool> {
        if self.modulus.is_unit() {
            return Ok(true);
        }
        let zero = vec![FieldElement::zero(self.m()); self.arity()];
        let f = self.shifted.poly();
        for v in 0..self.arity() {
            let d = f.derivative(v);
            let val = d.eval(&self.field, &zero)?;
            if val.is_zero() {
                continue;
            }
            let ideal = IdealSpec::principal(&self.field, &val)?;
            if ideal.add(&self.modulus)?.is_unit() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Real-coordinate value of the unshifted form at a point of V^(2n+1).
    pub fn eval_real(&self, y: &[f64]) -> Vec<f64> {
        self.form.eval_star(y)
    }

    /// Exact value of aN(x) + bN(y) - z^n at integral coordinates.
    pub fn eval_exact(&self, x: &[i64], y: &[i64], z: &[i64]) -> Vec<i128> {
        let vx = self.ax.eval(x);
        let vy = self.by.eval(y);
        let vz = self.zn.eval(z);
        vx.iter().zip(&vy).zip(&vz).map(|((a, b), c)| a + b - c).collect()
    }
}
