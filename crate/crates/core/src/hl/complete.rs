use crate::algebra::{denominator_ideal_of, is_duality_compatible, FieldElement, IdealSpec, IntPoly};
use crate::error::{Error, Result};
use crate::lattice::EquationInstance;
use crate::numeric::{rational_phase, PhaseSum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompleteSumValue {
    pub gamma: FieldElement,
    pub denom_norm: i128,
    pub t1: Complex64,
    pub t2: Complex64,
    /// T3 at -gamma.
    pub t3: Complex64,
    /// Nm(a_gamma)^(-(2n+1)) T1 T2 T3(-gamma).
    pub value: Complex64,
    /// The unfactored sum over all (2n+1)-tuples, when evaluated.
    pub direct: Option<Complex64>,
}

/// Exact phase Tr(gamma v) as a reduced fraction (numerator, denominator).
struct TracePhase {
    /// Row vector gamma_num^T G.
    row: Vec<i128>,
    den: i128,
}

impl TracePhase {
    fn new(inst: &EquationInstance, gamma: &FieldElement) -> Self {
        let m = inst.m();
        let g = inst.field.trace_gram();
        let num = gamma.numerators();
        let row = (0..m)
            .map(|j| (0..m).map(|i| num[i] * g[i * m + j] as i128).sum())
            .collect();
        TracePhase {
            row,
            den: gamma.denominator(),
        }
    }

    fn numerator(&self, v: &[i128]) -> i128 {
        self.row
            .iter()
            .zip(v)
            .map(|(a, b)| (a * b.rem_euclid(self.den)).rem_euclid(self.den))
            .sum::<i128>()
    }
}

/// Values of a block of F at every tuple of representatives, in odometer order.
fn block_values(poly: &IntPoly, reps: &[Vec<i128>], shifts: &[FieldElement]) -> Vec<Vec<i128>> {
    let m = reps.first().map_or(0, |r| r.len());
    let arity = shifts.len();
    let total = reps.len().pow(arity as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; arity];
    let mut point = vec![0i64; arity * m];
    for _ in 0..total {
        for (i, &j) in idx.iter().enumerate() {
            for c in 0..m {
                point[i * m + c] = (reps[j][c] + shifts[i].numerators()[c]) as i64;
            }
        }
        out.push(poly.eval(&point));
        for i in (0..arity).rev() {
            idx[i] += 1;
            if idx[i] < reps.len() {
                break;
            }
            idx[i] = 0;
        }
    }
    out
}

fn phase_sum(phase: &TracePhase, values: &[Vec<i128>], sign: i128) -> Complex64 {
    let mut acc = PhaseSum::default();
    for v in values {
        acc.push(rational_phase(sign * phase.numerator(v), phase.den));
    }
    acc.value()
}

/// S_gamma = Nm(a_gamma)^(-(2n+1)) sum over k in n^(2n+1) modulo n a_gamma of
/// e(Tr(gamma F(k))), computed both as the product T1 T2 T3(-gamma) and,
/// when Nm(a_gamma)^(2n+1) fits in the budget, as the unfactored sum.
pub fn complete_sum(gamma: &FieldElement, inst: &EquationInstance, budget: u128) -> Result<CompleteSumValue> {
    let value = factored_complete_sum(gamma, inst, budget)?;
    let s = 2 * inst.n() as u32 + 1;
    let tuples = (value.denom_norm as u128).checked_pow(s).unwrap_or(u128::MAX);
    if tuples > budget {
        return Err(Error::budget("complete sum tuples", tuples, budget));
    }
    let direct = direct_complete_sum(gamma, inst)?;
    let residual = (direct - value.value).norm();
    if residual > 1e-12 * (1.0 + value.value.norm()) {
        return Err(Error::Invariant(format!(
            "complete sum factorization residual {residual:e}"
        )));
    }
    Ok(CompleteSumValue {
        direct: Some(direct),
        ..value
    })
}

fn representatives(gamma: &FieldElement, inst: &EquationInstance) -> Result<(IdealSpec, Vec<Vec<i128>>)> {
    if !is_duality_compatible(&inst.field, &inst.modulus) {
        return Err(Error::DualityIncompatible);
    }
    if gamma.degree() != inst.m() {
        return Err(Error::MismatchedField {
            expected: inst.m(),
            got: gamma.degree(),
        });
    }
    let a = denominator_ideal_of(&inst.field, gamma, &inst.modulus)?;
    let sub = inst.modulus.mul(&inst.field, &a)?;
    let reps = inst.modulus.quotient_reps(&sub)?;
    Ok((a, reps))
}

/// S_gamma through the factorization only.
pub fn factored_complete_sum(gamma: &FieldElement, inst: &EquationInstance, budget: u128) -> Result<CompleteSumValue> {
    let (a, reps) = representatives(gamma, inst)?;
    let n = inst.n();
    let per_block = (reps.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if per_block > budget {
        return Err(Error::budget("complete sum block tuples", per_block, budget));
    }
    let phase = TracePhase::new(inst, gamma);
    let r = &inst.residues;
    let t1 = phase_sum(&phase, &block_values(&inst.ax, &reps, &r.x), 1);
    let t2 = phase_sum(&phase, &block_values(&inst.by, &reps, &r.y), 1);
    let t3 = phase_sum(&phase, &block_values(&inst.zn, &reps, std::slice::from_ref(&r.z)), -1);
    let s = 2 * n as i32 + 1;
    let value = t1 * t2 * t3 / (a.norm() as f64).powi(s);
    Ok(CompleteSumValue {
        gamma: gamma.clone(),
        denom_norm: a.norm(),
        t1,
        t2,
        t3,
        value,
        direct: None,
    })
}

/// The unfactored sum over (2n+1)-tuples of representatives.
fn direct_complete_sum(gamma: &FieldElement, inst: &EquationInstance) -> Result<Complex64> {
    let (a, reps) = representatives(gamma, inst)?;
    let phase = TracePhase::new(inst, gamma);
    let r = &inst.residues;
    let vx = block_values(&inst.ax, &reps, &r.x);
    let vy = block_values(&inst.by, &reps, &r.y);
    let vz = block_values(&inst.zn, &reps, std::slice::from_ref(&r.z));
    let mut acc = PhaseSum::default();
    let m = inst.m();
    let mut f = vec![0i128; m];
    for x in &vx {
        for y in &vy {
            for z in &vz {
                for i in 0..m {
                    f[i] = x[i] + y[i] - z[i];
                }
                acc.push(rational_phase(phase.numerator(&f), phase.den));
            }
        }
    }
    let s = 2 * inst.n() as i32 + 1;
    Ok(acc.value() / (a.norm() as f64).powi(s))
}
