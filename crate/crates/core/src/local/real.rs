use super::{Evidence, LocalCertificate, Place, Witness};
use crate::algebra::AlgebraPoint;
use crate::error::{Error, Result};
use crate::lattice::EquationInstance;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealTolerances {
    /// Bound on |F| at each place.
    pub tol: f64,
    /// Lower bound on the gradient norm at each place.
    pub margin: f64,
}

impl Default for RealTolerances {
    fn default() -> Self {
        RealTolerances {
            tol: 1e-9,
            margin: 1e-6,
        }
    }
}

/// |F| and the gradient norm of F at every archimedean place, with F
/// evaluated at the real point `y` of V^(2n+1).
pub fn place_values(inst: &EquationInstance, y: &[f64]) -> Vec<(f64, f64)> {
    let field = &inst.field;
    let m = inst.m();
    let value = AlgebraPoint::from_coords(field, &inst.form.eval_star(y)).components();
    let jac = inst.form.jacobian_star(y);
    let one = field.one().coords_f64();
    // dF/dX_v as a point of V: the derivative along the direction 1 in block v
    let partials: Vec<Vec<num_complex::Complex64>> = (0..inst.arity())
        .map(|v| {
            let coords: Vec<f64> = (0..m)
                .map(|c| (0..m).map(|i| jac[c][v * m + i] * one[i]).sum())
                .collect();
            AlgebraPoint::from_coords(field, &coords).components()
        })
        .collect();
    value
        .iter()
        .enumerate()
        .map(|(place, f)| {
            let g = partials.iter().map(|d| d[place].norm_sqr()).sum::<f64>().sqrt();
            (f.norm(), g)
        })
        .collect()
}

/// Certificates for the box centre at every archimedean place of k.
pub fn real_place_certify(inst: &EquationInstance) -> Result<Vec<LocalCertificate>> {
    real_place_certify_with(inst, &RealTolerances::default())
}

pub fn real_place_certify_with(inst: &EquationInstance, tols: &RealTolerances) -> Result<Vec<LocalCertificate>> {
    let sig = inst.field.signature();
    let values = place_values(inst, &inst.targets);
    let mut out = Vec::with_capacity(values.len());
    for (index, (residual, gradient)) in values.into_iter().enumerate() {
        if !(residual <= tols.tol) {
            return Err(Error::CenterNotSolution {
                residual,
                tol: tols.tol,
            });
        }
        if !(gradient > tols.margin) {
            return Err(Error::SingularCenter(format!(
                "gradient norm {gradient:e} at place {index} is below {:e}",
                tols.margin
            )));
        }
        out.push(LocalCertificate {
            place: Place::Archimedean {
                index,
                complex: index >= sig.real,
            },
            witness: Witness::Real {
                coords: inst.targets.clone(),
            },
            evidence: Evidence::Gradient {
                residual,
                tol: tols.tol,
                norm: gradient,
                margin: tols.margin,
            },
            depth: 0,
        });
    }
    Ok(out)
}

pub(super) fn replay_real(
    cert: &LocalCertificate,
    index: usize,
    coords: &[f64],
    inst: &EquationInstance,
) -> Result<()> {
    let Evidence::Gradient { tol, margin, .. } = cert.evidence else {
        return Err(Error::InconsistentLocalData(
            "archimedean place needs gradient evidence".into(),
        ));
    };
    if coords.len() != inst.arity() * inst.m() {
        return Err(Error::InconsistentLocalData(
            "witness shape does not match the instance".into(),
        ));
    }
    let values = place_values(inst, coords);
    let &(residual, gradient) = values
        .get(index)
        .ok_or_else(|| Error::InconsistentLocalData(format!("no archimedean place {index}")))?;
    if !(residual <= tol) {
        return Err(Error::CenterNotSolution { residual, tol });
    }
    if !(gradient > margin) {
        return Err(Error::InconsistentLocalData(format!(
            "gradient norm {gradient:e} below margin {margin:e}"
        )));
    }
    Ok(())
}
