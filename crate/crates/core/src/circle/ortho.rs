use super::expsum::{Frequencies, SumIndex};
use crate::error::{Error, Result};
use crate::lattice::{count_solutions, CountOptions, EquationInstance};
use crate::numeric::log_log_slope;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub p: f64,
    pub count: u128,
    /// Size of the packed frequency support of S1 S2.
    pub support: u128,
    /// Largest distance of a convolution coefficient from an integer.
    pub rounding: f64,
}

/// Coordinatewise range [lo, hi] of a set of value vectors.
fn ranges(values: &[(Vec<i128>, u64)], m: usize) -> Vec<(i128, i128)> {
    (0..m)
        .map(|i| {
            let lo = values.iter().map(|(v, _)| v[i]).min().unwrap_or(0);
            let hi = values.iter().map(|(v, _)| v[i]).max().unwrap_or(0);
            (lo, hi)
        })
        .collect()
}

/// The integral of S1(alpha) S2(alpha) S3(-alpha) over the unit cube,
/// evaluated in frequency space: the coefficient of e(Tr(alpha v)) in S1 S2
/// is the convolution of the value multisets, computed by a packed FFT,
/// and pairing with S3(-alpha) picks out v = z^n.
pub fn orthogonality_count(inst: &EquationInstance, p: f64, budget: u128) -> Result<OrthogonalityReport> {
    let m = inst.m();
    let fx = Frequencies::collect(inst, SumIndex::S1, p, budget)?;
    let fy = Frequencies::collect(inst, SumIndex::S2, p, budget)?;
    let fz = Frequencies::collect(inst, SumIndex::S3, p, budget)?;
    let empty = OrthogonalityReport {
        p,
        count: 0,
        support: 0,
        rounding: 0.0,
    };
    if fx.values.is_empty() || fy.values.is_empty() || fz.values.is_empty() {
        return Ok(empty);
    }
    let rx = ranges(&fx.values, m);
    let ry = ranges(&fy.values, m);
    let mut strides = Vec::with_capacity(m);
    let mut len: u128 = 1;
    for i in 0..m {
        strides.push(len);
        let s = (rx[i].1 - rx[i].0 + ry[i].1 - ry[i].0 + 1) as u128;
        len = len
            .checked_mul(s)
            .ok_or_else(|| Error::budget("frequency support", u128::MAX, budget))?;
    }
    if len > budget || len > (1u128 << 34) {
        return Err(Error::budget("frequency support", len, budget.min(1u128 << 34)));
    }
    // Sums of packed x and y indices stay below len, so a cyclic
    // convolution of length len is already linear.
    let n = len as usize;
    let pack = |v: &[i128], lo: &[(i128, i128)]| -> usize {
        (0..m).map(|i| ((v[i] - lo[i].0) as u128 * strides[i]) as usize).sum()
    };
    let mut a = vec![Complex::new(0.0, 0.0); n];
    let mut b = vec![Complex::new(0.0, 0.0); n];
    for (v, c) in &fx.values {
        a[pack(v, &rx)].re += *c as f64;
    }
    for (v, c) in &fy.values {
        b[pack(v, &ry)].re += *c as f64;
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut a);
    planner.plan_fft_forward(n).process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    planner.plan_fft_inverse(n).process(&mut a);
    let scale = 1.0 / n as f64;
    let mut count: u128 = 0;
    let mut rounding = 0.0f64;
    'z: for (v, cz) in &fz.values {
        let mut idx: u128 = 0;
        for i in 0..m {
            let off = v[i] - rx[i].0 - ry[i].0;
            let s = rx[i].1 - rx[i].0 + ry[i].1 - ry[i].0 + 1;
            if off < 0 || off >= s {
                continue 'z;
            }
            idx += off as u128 * strides[i];
        }
        let c = a[idx as usize].re * scale;
        let r = c.round();
        rounding = rounding.max((c - r).abs());
        if r < 0.0 {
            return Err(Error::Numerical(format!("negative convolution coefficient {c}")));
        }
        count += r as u128 * *cz as u128;
    }
    if rounding > 0.25 {
        return Err(Error::Numerical(format!(
            "convolution coefficients are {rounding} from an integer"
        )));
    }
    Ok(OrthogonalityReport {
        p,
        count,
        support: len,
        rounding,
    })
}

/// Runs both the frequency-space integral and the direct count and fails
/// unless they agree.
pub fn orthogonality_check(inst: &EquationInstance, p: f64, budget: u128) -> Result<OrthogonalityReport> {
    let report = orthogonality_count(inst, p, budget)?;
    let direct = count_solutions(
        inst,
        p,
        &CountOptions {
            budget_points: budget,
            witness_cap: 0,
        },
    )?;
    if direct.count != report.count {
        return Err(Error::Invariant(format!(
            "orthogonality integral {} differs from the direct count {} at P = {p}",
            report.count, direct.count
        )));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanValueRow {
    pub p: f64,
    /// The integral of |S_j|^2, equal to the number of coincidences.
    pub integral: u128,
    pub summands: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanValueReport {
    pub which: SumIndex,
    pub rows: Vec<MeanValueRow>,
    /// Least-squares slope of log integral against log P.
    pub exponent: Option<f64>,
    /// mn, the exponent of the mean-value bound.
    pub bound: f64,
}

pub fn mean_value_check(inst: &EquationInstance, j: SumIndex, ps: &[f64], budget: u128) -> Result<MeanValueReport> {
    if j == SumIndex::S3 {
        return Err(Error::InvalidSpec("mean value check applies to S1 and S2".into()));
    }
    let rows = ps
        .iter()
        .map(|&p| {
            let f = Frequencies::collect(inst, j, p, budget)?;
            Ok(MeanValueRow {
                p,
                integral: f.coincidences(),
                summands: f.summands,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let usable: Vec<&MeanValueRow> = rows.iter().filter(|r| r.integral > 0).collect();
    let exponent = (usable.len() >= 2).then(|| {
        let xs: Vec<f64> = usable.iter().map(|r| r.p).collect();
        let ys: Vec<f64> = usable.iter().map(|r| r.integral as f64).collect();
        log_log_slope(&xs, &ys)
    });
    Ok(MeanValueReport {
        which: j,
        rows,
        exponent,
        bound: (inst.m() * inst.n()) as f64,
    })
}
