use super::density::{
    adaptive_local_density, bad_primes, exact_denominator_sum, histograms, primes_up_to, DensityOptions, LocalDensity,
};
use crate::algebra::{is_duality_compatible, IdealSpec};
use crate::error::Result;
use crate::lattice::EquationInstance;
use crate::numeric::log_log_slope;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    pub prime_cutoff: i128,
    pub j_max: u32,
    pub tol: f64,
    /// Cutoff on Nm(a_gamma) for the direct gamma-sum.
    pub gamma_cutoff: i128,
    pub budget: u128,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            prime_cutoff: 50,
            j_max: 2,
            tol: 1e-3,
            gamma_cutoff: 64,
            budget: 20_000_000,
        }
    }
}

/// The terms with R/2 < Nm(a_gamma) <= R.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicBlock {
    pub r: i128,
    pub re: f64,
    pub im: f64,
    pub magnitude: f64,
    /// False when the cutoff truncates the block.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectSeries {
    pub cutoff: i128,
    pub value: f64,
    pub imag: f64,
    /// The gamma = 0 term.
    pub s0: f64,
    pub blocks: Vec<DyadicBlock>,
    /// Slope of log |S_R| against log R over the nonzero complete blocks.
    pub decay_exponent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSeriesEstimate {
    pub prime_cutoff: i128,
    pub tol: f64,
    pub per_prime: Vec<LocalDensity>,
    pub euler_product: f64,
    pub all_converged: bool,
    pub direct: Option<DirectSeries>,
}

impl SingularSeriesEstimate {
    pub fn value(&self) -> f64 {
        self.euler_product
    }

    /// Sum of relative last-step changes, a proxy for the truncation error.
    pub fn relative_uncertainty(&self) -> f64 {
        self.per_prime
            .iter()
            .map(|d| {
                if d.value.abs() > 0.0 {
                    d.last_step() / d.value.abs()
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// Euler product of the local densities at the prime ideals above each
/// rational prime up to the cutoff, and for k = Q with trivial congruence
/// ideal also the direct sum of S_gamma over Nm(a_gamma) up to the
/// gamma cutoff with its dyadic blocks.
pub fn singular_series(inst: &EquationInstance, opts: &SeriesOptions) -> Result<SingularSeriesEstimate> {
    let bad = bad_primes(inst, opts.prime_cutoff)?;
    let mut primes: Vec<(IdealSpec, bool)> = Vec::new();
    for p in primes_up_to(opts.prime_cutoff) {
        for (ideal, _) in IdealSpec::primes_above(&inst.field, p, opts.budget)? {
            primes.push((ideal, bad.contains(&p)));
        }
    }
    let dopts = DensityOptions {
        j_max: opts.j_max,
        tol: opts.tol,
        budget: opts.budget,
        ..DensityOptions::default()
    };
    let per_prime = primes
        .par_iter()
        .map(|(ideal, is_bad)| adaptive_local_density(ideal, inst, *is_bad, &dopts))
        .collect::<Result<Vec<_>>>()?;
    let euler_product = per_prime.iter().map(|d| d.value).product();
    let all_converged = per_prime.iter().all(|d| d.converged);
    let direct = if inst.m() == 1 && is_duality_compatible(&inst.field, &inst.modulus) {
        Some(direct_series(inst, opts.gamma_cutoff, opts.budget)?)
    } else {
        None
    };
    Ok(SingularSeriesEstimate {
        prime_cutoff: opts.prime_cutoff,
        tol: opts.tol,
        per_prime,
        euler_product,
        all_converged,
        direct,
    })
}

/// Sum of S_gamma over gamma = t / q, 1 <= q <= cutoff, gcd(t, q) = 1
/// (k = Q, n = Z).
pub fn direct_series(inst: &EquationInstance, cutoff: i128, budget: u128) -> Result<DirectSeries> {
    let s = 2 * inst.n() as u32 + 1;
    let terms = (1..=cutoff.max(1))
        .into_par_iter()
        .map(|q| {
            let ideal = IdealSpec::rational(&inst.field, q)?;
            let h = histograms(inst, &ideal, budget)?;
            Ok((q, exact_denominator_sum(&h, q as usize, s)))
        })
        .collect::<Result<Vec<_>>>()?;
    let s0 = terms[0].1.re;
    let mut blocks = Vec::new();
    let mut r = 2i128;
    while r / 2 < cutoff {
        let sum = terms
            .iter()
            .filter(|(q, _)| *q > r / 2 && *q <= r)
            .fold(num_complex::Complex64::new(0.0, 0.0), |a, (_, v)| a + v);
        blocks.push(DyadicBlock {
            r,
            re: sum.re,
            im: sum.im,
            magnitude: sum.norm(),
            complete: r <= cutoff,
        });
        r *= 2;
    }
    let total = terms
        .iter()
        .fold(num_complex::Complex64::new(0.0, 0.0), |a, (_, v)| a + v);
    let fit: Vec<&DyadicBlock> = blocks.iter().filter(|b| b.complete && b.magnitude > 1e-14).collect();
    let decay_exponent = (fit.len() >= 2).then(|| {
        let xs: Vec<f64> = fit.iter().map(|b| b.r as f64).collect();
        let ys: Vec<f64> = fit.iter().map(|b| b.magnitude).collect();
        log_log_slope(&xs, &ys)
    });
    Ok(DirectSeries {
        cutoff,
        value: total.re,
        imag: total.im,
        s0,
        blocks,
        decay_exponent,
    })
}
