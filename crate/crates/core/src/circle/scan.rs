use super::arcs::{classify_arc, ArcLabel, ArcParams, ArcPoint};
use super::expsum::{Frequencies, SumIndex};
use crate::algebra::is_duality_compatible;
use crate::error::{Error, Result};
use crate::lattice::EquationInstance;
use crate::numeric::{log_log_slope, substream, SAMPLE_CHUNK};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub ps: Vec<f64>,
    pub theta: f64,
    pub samples: usize,
    pub seed: u64,
    /// Constant C in the denominator bound.
    pub constant: f64,
    pub budget: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSample {
    pub p: f64,
    pub arc: ArcPoint,
    pub abs_s3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanMaximum {
    pub p: f64,
    pub max_abs_s3: f64,
    pub minor: usize,
    pub major: usize,
    pub summands: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinorArcScan {
    pub theta: f64,
    pub samples: Vec<ArcSample>,
    pub maxima: Vec<ScanMaximum>,
    /// Fitted exponent of the minor-arc maximum against P.
    pub exponent: Option<f64>,
}

/// Sample points of the unit cube; sample i depends only on (seed, i).
pub fn sample_points(seed: u64, m: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut chunk = 0u64;
    while out.len() < count {
        let mut rng = substream(seed, 0, chunk);
        let take = SAMPLE_CHUNK.min(count - out.len());
        for _ in 0..take {
            out.push((0..m).map(|_| rng.random::<f64>()).collect());
        }
        chunk += 1;
    }
    out
}

/// Maximum of |S3| over uniformly sampled minor-arc points, per P.
pub fn minor_arc_scan(inst: &EquationInstance, opts: &ScanOptions) -> Result<MinorArcScan> {
    if opts.samples == 0 {
        return Err(Error::InvalidSpec("sample count must be positive".into()));
    }
    if !(opts.theta > 0.0) {
        return Err(Error::InvalidSpec(format!("theta = {} must be positive", opts.theta)));
    }
    let m = inst.m();
    if m > 1 && !is_duality_compatible(&inst.field, &inst.modulus) {
        return Err(Error::DualityIncompatible);
    }
    let alphas = sample_points(opts.seed, m, opts.samples);
    let mut samples = Vec::with_capacity(alphas.len() * opts.ps.len());
    let mut maxima = Vec::with_capacity(opts.ps.len());
    for &p in &opts.ps {
        if !(p >= 2.0) {
            return Err(Error::InvalidSpec(format!("P = {p} must be at least 2")));
        }
        let params = ArcParams {
            p,
            theta: opts.theta,
            n: inst.n(),
            constant: opts.constant,
        };
        let freq = Frequencies::collect(inst, SumIndex::S3, p, opts.budget)?;
        let rows = alphas
            .par_iter()
            .map(|a| {
                let arc = classify_arc(a, &params, &inst.field, &inst.modulus)?;
                // S3 is evaluated at -alpha in the counting integral
                let neg: Vec<f64> = a.iter().map(|x| -x).collect();
                let abs_s3 = freq.eval(&neg).norm();
                Ok(ArcSample { p, arc, abs_s3 })
            })
            .collect::<Result<Vec<_>>>()?;
        let minor: Vec<&ArcSample> = rows.iter().filter(|r| r.arc.label == ArcLabel::Minor).collect();
        maxima.push(ScanMaximum {
            p,
            max_abs_s3: minor.iter().map(|r| r.abs_s3).fold(0.0, f64::max),
            minor: minor.len(),
            major: rows.len() - minor.len(),
            summands: freq.summands,
        });
        samples.extend(rows);
    }
    let fit: Vec<&ScanMaximum> = maxima.iter().filter(|r| r.max_abs_s3 > 0.0).collect();
    let exponent = (fit.len() >= 2).then(|| {
        let xs: Vec<f64> = fit.iter().map(|r| r.p).collect();
        let ys: Vec<f64> = fit.iter().map(|r| r.max_abs_s3).collect();
        log_log_slope(&xs, &ys)
    });
    Ok(MinorArcScan {
        theta: opts.theta,
        samples,
        maxima,
        exponent,
    })
}
