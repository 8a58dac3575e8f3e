use crate::error::{Error, Result};
use crate::lattice::{enumerate_tuples, EquationInstance};
use crate::numeric::{frac_product_wide, unit_phase, PhaseSum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Which of S1 (a N(x)), S2 (b N(y)) or S3 (z^n).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SumIndex {
    S1,
    S2,
    S3,
}

impl SumIndex {
    pub fn from_index(j: usize) -> Result<Self> {
        match j {
            1 => Ok(SumIndex::S1),
            2 => Ok(SumIndex::S2),
            3 => Ok(SumIndex::S3),
            _ => Err(Error::InvalidSpec(format!(
                "exponential sum index {j} must be 1, 2 or 3"
            ))),
        }
    }

    pub fn index(self) -> usize {
        match self {
            SumIndex::S1 => 1,
            SumIndex::S2 => 2,
            SumIndex::S3 => 3,
        }
    }
}

/// The multiset of values of one factor over its box, with the integer
/// vectors w = G v (G the trace form) so that Tr(alpha v) = alpha . w.
#[derive(Clone, Debug)]
pub struct Frequencies {
    pub m: usize,
    /// Distinct values in omega-coordinates with multiplicities, sorted.
    pub values: Vec<(Vec<i128>, u64)>,
    weights: Vec<Vec<i128>>,
    pub summands: u128,
}

impl Frequencies {
    pub fn from_values(inst: &EquationInstance, values: Vec<(Vec<i128>, u64)>) -> Self {
        let m = inst.m();
        let g = inst.field.trace_gram();
        let weights = values
            .iter()
            .map(|(v, _)| {
                (0..m)
                    .map(|i| (0..m).map(|j| g[i * m + j] as i128 * v[j]).sum())
                    .collect()
            })
            .collect();
        let summands = values.iter().map(|(_, c)| *c as u128).sum();
        Frequencies {
            m,
            values,
            weights,
            summands,
        }
    }

    /// Values of factor j over P times its box.
    pub fn collect(inst: &EquationInstance, j: SumIndex, p: f64, budget: u128) -> Result<Self> {
        let r = &inst.residues;
        let (pts, poly) = match j {
            SumIndex::S1 => (enumerate_tuples(&inst.modulus, &r.x, &inst.bx.x, p, budget)?, &inst.ax),
            SumIndex::S2 => (enumerate_tuples(&inst.modulus, &r.y, &inst.bx.y, p, budget)?, &inst.by),
            SumIndex::S3 => (
                enumerate_tuples(&inst.modulus, std::slice::from_ref(&r.z), &inst.bx.z, p, budget)?,
                &inst.zn,
            ),
        };
        let values = crate::lattice::count::value_histogram(poly, &pts)?;
        Ok(Self::from_values(inst, values))
    }

    /// Sum over the multiset of e(Tr(alpha v)) with compensated accumulation.
    pub fn eval(&self, alpha: &[f64]) -> Complex64 {
        let mut acc = PhaseSum::default();
        for ((_, c), w) in self.values.iter().zip(&self.weights) {
            let mut t = 0.0;
            for (a, wi) in alpha.iter().zip(w) {
                t += frac_product_wide(*a, *wi);
            }
            acc.push_weighted(unit_phase(t), *c as f64, *c);
        }
        acc.value()
    }

    /// Sum of squared multiplicities: the integral of |S|^2 over the cube.
    pub fn coincidences(&self) -> u128 {
        self.values.iter().map(|(_, c)| (*c as u128) * (*c as u128)).sum()
    }

    pub fn as_map(&self) -> HashMap<&[i128], u64> {
        self.values.iter().map(|(v, c)| (v.as_slice(), *c)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpSumValue {
    pub value: Complex64,
    pub summands: u128,
    pub which: SumIndex,
    pub p: f64,
}

/// Error bound for the accumulated phases: each term carries at most a few
/// ulps of phase error, and compensated summation adds O(eps) overall, so
/// 1e6 unit terms stay within roughly 1e6 * 8 eps ~ 2e-9 in absolute value.
pub const PHASE_ERROR_PER_TERM: f64 = 8.0 * f64::EPSILON;

pub fn eval_exp_sum(j: SumIndex, alpha: &[f64], inst: &EquationInstance, p: f64, budget: u128) -> Result<ExpSumValue> {
    if alpha.len() != inst.m() {
        return Err(Error::MismatchedField {
            expected: inst.m(),
            got: alpha.len(),
        });
    }
    let f = Frequencies::collect(inst, j, p, budget)?;
    Ok(ExpSumValue {
        value: f.eval(alpha),
        summands: f.summands,
        which: j,
        p,
    })
}
