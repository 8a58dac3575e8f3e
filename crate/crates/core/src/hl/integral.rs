use crate::algebra::RealPoly;
use crate::error::{Error, Result};
use crate::lattice::EquationInstance;
use crate::numeric::{substream, weighted_intercept, Neumaier, SAMPLE_CHUNK};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralMethod {
    Slab,
    Oscillatory,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralOptions {
    pub method: IntegralMethod,
    /// Samples per epsilon (slab) or in total (oscillatory).
    pub samples: usize,
    pub eps0: f64,
    pub steps: u32,
    /// |beta| cutoff for the oscillatory form.
    pub beta_cutoff: f64,
    pub seed: u64,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        IntegralOptions {
            method: IntegralMethod::Slab,
            samples: 1 << 21,
            eps0: 0.1,
            steps: 5,
            beta_cutoff: 4.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabStep {
    pub eps: f64,
    pub hits: u64,
    pub estimate: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularIntegralEstimate {
    pub value: f64,
    pub stderr: f64,
    pub method: IntegralMethod,
    pub seed: u64,
    pub samples: u64,
    pub schedule: Vec<SlabStep>,
    pub beta_cutoff: Option<f64>,
}

/// Smallest singular value of the Jacobian of F* at y.
fn jacobian_margin(grad: &[RealPoly], y: &[f64], m: usize) -> f64 {
    let mut mat = DMatrix::<f64>::zeros(m, grad.len());
    let mut out = vec![0.0; m];
    for (v, g) in grad.iter().enumerate() {
        g.eval_into(y, &mut out);
        for c in 0..m {
            mat[(c, v)] = out[c];
        }
    }
    mat.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

const MARGIN: f64 = 1e-6;

struct Sampler {
    center: Vec<f64>,
    rho: f64,
    f: RealPoly,
    grad: Vec<RealPoly>,
    m: usize,
}

impl Sampler {
    fn new(inst: &EquationInstance) -> Result<Self> {
        let form = &inst.form;
        let grad: Vec<RealPoly> = form.gradient_polys().iter().map(|g| g.compile_real()).collect();
        let s = Sampler {
            center: inst.targets.clone(),
            rho: inst.rho,
            f: form.f_star().compile_real(),
            grad,
            m: inst.m(),
        };
        if jacobian_margin(&s.grad, &s.center, s.m) < MARGIN {
            return Err(Error::SingularCenter(
                "Jacobian of F* is rank deficient at the box centre".into(),
            ));
        }
        Ok(s)
    }

    fn volume(&self) -> f64 {
        (2.0 * self.rho).powi(self.center.len() as i32)
    }

    fn draw(&self, rng: &mut impl Rng, y: &mut [f64]) {
        for (v, c) in y.iter_mut().zip(&self.center) {
            *v = c + self.rho * (2.0 * rng.random::<f64>() - 1.0);
        }
    }

    /// Runs `per_chunk` over `count` samples of stream `stream`, chunked so
    /// that the result does not depend on the thread count.
    fn run<T: Send, F>(&self, seed: u64, stream: u64, count: usize, per_chunk: F) -> Vec<T>
    where
        F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
    {
        let chunks = count.div_ceil(SAMPLE_CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let take = SAMPLE_CHUNK.min(count - c * SAMPLE_CHUNK);
                per_chunk(&mut substream(seed, stream, c as u64), take)
            })
            .collect()
    }
}

/// The singular integral in F*-coordinates: the limit of
/// vol{y in B' : |F*_i(y)| < eps for all i} / (2 eps)^m, estimated by
/// uniform sampling at eps0 2^(-t) and extrapolated linearly to eps = 0.
pub fn singular_integral(inst: &EquationInstance, opts: &IntegralOptions) -> Result<SingularIntegralEstimate> {
    if opts.samples == 0 || opts.steps == 0 {
        return Err(Error::InvalidSpec("singular integral needs samples and steps".into()));
    }
    let sampler = Sampler::new(inst)?;
    match opts.method {
        IntegralMethod::Slab => slab(&sampler, opts),
        IntegralMethod::Oscillatory => oscillatory(&sampler, opts),
    }
}

fn slab(s: &Sampler, opts: &IntegralOptions) -> Result<SingularIntegralEstimate> {
    let m = s.m;
    let dim = s.center.len();
    let vol = s.volume();
    let mut schedule = Vec::with_capacity(opts.steps as usize);
    let mut degenerate = 0u64;
    let mut checked = 0u64;
    for t in 0..opts.steps {
        let eps = opts.eps0 * 0.5f64.powi(t as i32);
        let counts = s.run(opts.seed, 1 + t as u64, opts.samples, |rng, take| {
            let mut y = vec![0.0; dim];
            let mut out = vec![0.0; m];
            let (mut hits, mut deg, mut chk) = (0u64, 0u64, 0u64);
            for _ in 0..take {
                s.draw(rng, &mut y);
                s.f.eval_into(&y, &mut out);
                if out.iter().all(|v| v.abs() < eps) {
                    hits += 1;
                    if chk < 64 {
                        chk += 1;
                        deg += (jacobian_margin(&s.grad, &y, m) < MARGIN) as u64;
                    }
                }
            }
            (hits, deg, chk)
        });
        let hits: u64 = counts.iter().map(|c| c.0).sum();
        degenerate += counts.iter().map(|c| c.1).sum::<u64>();
        checked += counts.iter().map(|c| c.2).sum::<u64>();
        let n = opts.samples as f64;
        let frac = hits as f64 / n;
        let scale = vol / (2.0 * eps).powi(m as i32);
        // a zero count still carries the variance of a single hit
        let var_frac = (frac * (1.0 - frac)).max(1.0 / n) / n;
        schedule.push(SlabStep {
            eps,
            hits,
            estimate: scale * frac,
            stderr: scale * var_frac.sqrt(),
        });
    }
    if checked > 0 && degenerate as f64 > 0.01 * checked as f64 {
        return Err(Error::SingularCenter(format!(
            "{degenerate} of {checked} sampled slab points are singular"
        )));
    }
    let (value, stderr) = if schedule.len() == 1 {
        (schedule[0].estimate, schedule[0].stderr)
    } else {
        let xs: Vec<f64> = schedule.iter().map(|r| r.eps).collect();
        let ys: Vec<f64> = schedule.iter().map(|r| r.estimate).collect();
        let vs: Vec<f64> = schedule.iter().map(|r| r.stderr * r.stderr).collect();
        let (c0, var) = weighted_intercept(&xs, &ys, &vs);
        (c0, var.sqrt())
    };
    Ok(SingularIntegralEstimate {
        value: value.max(0.0),
        stderr,
        method: IntegralMethod::Slab,
        seed: opts.seed,
        samples: opts.samples as u64 * opts.steps as u64,
        schedule,
        beta_cutoff: None,
    })
}

/// Integral over |beta_i| < B of e(beta . F*(y)), done in closed form in
/// beta: prod_i sin(2 pi B F*_i) / (pi F*_i).
fn oscillatory(s: &Sampler, opts: &IntegralOptions) -> Result<SingularIntegralEstimate> {
    let m = s.m;
    let dim = s.center.len();
    let b = opts.beta_cutoff;
    let total = opts.samples * opts.steps as usize;
    let parts = s.run(opts.seed, 0, total, |rng, take| {
        let mut y = vec![0.0; dim];
        let mut out = vec![0.0; m];
        let (mut sum, mut sq) = (Neumaier::default(), Neumaier::default());
        for _ in 0..take {
            s.draw(rng, &mut y);
            s.f.eval_into(&y, &mut out);
            let k: f64 = out
                .iter()
                .map(|&w| {
                    if w.abs() < 1e-300 {
                        2.0 * b
                    } else {
                        (2.0 * PI * b * w).sin() / (PI * w)
                    }
                })
                .product();
            sum.add(k);
            sq.add(k * k);
        }
        (sum.value(), sq.value())
    });
    let n = total as f64;
    let mean = parts.iter().map(|p| p.0).sum::<f64>() / n;
    let meansq = parts.iter().map(|p| p.1).sum::<f64>() / n;
    let vol = s.volume();
    Ok(SingularIntegralEstimate {
        value: vol * mean,
        stderr: vol * ((meansq - mean * mean).max(0.0) / n).sqrt(),
        method: IntegralMethod::Oscillatory,
        seed: opts.seed,
        samples: total as u64,
        schedule: Vec::new(),
        beta_cutoff: Some(b),
    })
}
