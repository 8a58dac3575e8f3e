use crate::algebra::linalg::{self, Q};
use crate::algebra::{is_duality_compatible, FieldElement, IdealSpec, IntPoly};
use crate::error::{Error, Result};
use crate::lattice::EquationInstance;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Distinct values of one block of F modulo an ideal, with multiplicities.
pub(crate) type Histogram = HashMap<Vec<i128>, u64>;

/// Residues modulo `ideal` of the values of `poly` over tuples of classes
/// k_i mod `ideal` with k_i congruent to `residues[i]` modulo n + ideal.
pub(crate) fn block_histogram(
    poly: &IntPoly,
    residues: &[FieldElement],
    ideal: &IdealSpec,
    modulus: &IdealSpec,
    budget: u128,
) -> Result<Histogram> {
    let class = modulus.add(ideal)?;
    let reps = ideal.residues();
    let allowed: Vec<Vec<&Vec<i128>>> = residues
        .iter()
        .map(|r| {
            reps.iter()
                .filter(|u| {
                    let d: Vec<i128> = u.iter().zip(r.numerators()).map(|(a, b)| a - b).collect();
                    class.contains(&d)
                })
                .collect()
        })
        .collect();
    let total: u128 = allowed.iter().map(|a| a.len() as u128).product();
    if total > budget {
        return Err(Error::budget("residue tuples", total, budget));
    }
    let mut hist = Histogram::new();
    if allowed.iter().any(|a| a.is_empty()) {
        return Ok(hist);
    }
    let m = ideal.degree();
    let mut idx = vec![0usize; residues.len()];
    let mut point = vec![0i64; residues.len() * m];
    let mut out = vec![0i128; poly.outputs()];
    loop {
        for (i, &j) in idx.iter().enumerate() {
            for (c, &v) in allowed[i][j].iter().enumerate() {
                point[i * m + c] = v as i64;
            }
        }
        poly.eval_into(&point, &mut out);
        ideal.reduce_in_place(&mut out);
        if let Some(c) = hist.get_mut(out.as_slice()) {
            *c += 1;
        } else {
            hist.insert(out.clone(), 1);
        }
        let mut i = idx.len();
        loop {
            if i == 0 {
                return Ok(hist);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < allowed[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

pub(crate) struct BlockHistograms {
    pub x: Histogram,
    pub y: Histogram,
    pub z: Histogram,
}

pub(crate) fn histograms(inst: &EquationInstance, ideal: &IdealSpec, budget: u128) -> Result<BlockHistograms> {
    let r = &inst.residues;
    Ok(BlockHistograms {
        x: block_histogram(&inst.ax, &r.x, ideal, &inst.modulus, budget)?,
        y: block_histogram(&inst.by, &r.y, ideal, &inst.modulus, budget)?,
        z: block_histogram(&inst.zn, std::slice::from_ref(&r.z), ideal, &inst.modulus, budget)?,
    })
}

/// Number of (x, y, z) modulo `ideal` with a N(x) + b N(y) = z^n there.
pub(crate) fn solution_count(h: &BlockHistograms, ideal: &IdealSpec) -> u128 {
    let mut key = vec![0i128; ideal.degree()];
    let mut total = 0u128;
    for (vx, cx) in &h.x {
        for (vz, cz) in &h.z {
            for (k, (a, b)) in key.iter_mut().zip(vz.iter().zip(vx)) {
                *k = a - b;
            }
            ideal.reduce_in_place(&mut key);
            if let Some(cy) = h.y.get(key.as_slice()) {
                total += *cx as u128 * *cy as u128 * *cz as u128;
            }
        }
    }
    total
}

/// Discrete Fourier transform sum_v H(v) e(-a v / q) for every a mod q,
/// for a histogram over Z / q.
pub(crate) fn histogram_dft(h: &Histogram, q: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); q];
    for (v, c) in h {
        buf[v[0] as usize].re += *c as f64;
    }
    FftPlanner::<f64>::new().plan_fft_forward(q).process(&mut buf);
    buf
}

/// Sum of S_gamma over gamma = a / q with gcd(a, q) = 1, for k = Q and
/// n = Z, from the block histograms modulo q.
pub(crate) fn exact_denominator_sum(h: &BlockHistograms, q: usize, variables: u32) -> Complex64 {
    if q == 1 {
        return Complex64::new(1.0, 0.0);
    }
    let fx = histogram_dft(&h.x, q);
    let fy = histogram_dft(&h.y, q);
    let fz = histogram_dft(&h.z, q);
    let norm = (q as f64).powi(variables as i32);
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 1..q {
        if a.gcd(&q) != 1 {
            continue;
        }
        // T1(a/q) = sum H(v) e(a v / q) is the transform at -a
        let neg = q - a;
        acc += fx[neg] * fy[neg] * fz[a] / norm;
    }
    acc
}

/// One truncation level of a local density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityLevel {
    pub j: u32,
    pub modulus_norm: i128,
    /// Solutions modulo the j-th power, with the congruence conditions.
    pub solutions: u128,
    /// solutions / Nm(p^j)^(2n), with 2n + 1 variables.
    pub density: f64,
    /// The same truncation as 1 + sum of S_gamma, when available.
    pub exp_sum: Option<f64>,
    pub exp_sum_imag: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalDensity {
    pub prime: IdealSpec,
    pub p: i128,
    pub bad: bool,
    /// Levels j = 0, 1, ..., depth.
    pub levels: Vec<DensityLevel>,
    pub depth: u32,
    pub value: f64,
    pub converged: bool,
    pub note: String,
}

impl LocalDensity {
    pub fn truncations(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.density).collect()
    }

    /// |mu_depth - mu_(depth-1)|.
    pub fn last_step(&self) -> f64 {
        let t = self.truncations();
        if t.len() < 2 {
            return 0.0;
        }
        (t[t.len() - 1] - t[t.len() - 2]).abs()
    }
}

fn level_zero() -> DensityLevel {
    DensityLevel {
        j: 0,
        modulus_norm: 1,
        solutions: 1,
        density: 1.0,
        exp_sum: Some(1.0),
        exp_sum_imag: Some(0.0),
    }
}

/// Incremental computation of the truncations at one prime.
struct LevelStepper<'a> {
    inst: &'a EquationInstance,
    prime: IdealSpec,
    power: IdealSpec,
    exp_form: bool,
    exp_acc: Complex64,
    budget: u128,
}

impl<'a> LevelStepper<'a> {
    fn new(inst: &'a EquationInstance, prime: &IdealSpec, budget: u128) -> Self {
        LevelStepper {
            inst,
            prime: prime.clone(),
            power: IdealSpec::unit(inst.m()),
            exp_form: inst.m() == 1 && is_duality_compatible(&inst.field, &inst.modulus),
            exp_acc: Complex64::new(1.0, 0.0),
            budget,
        }
    }

    /// Residue tuples needed for the next level.
    fn next_cost(&self) -> u128 {
        let nm = (self.power.norm() as u128).saturating_mul(self.prime.norm() as u128);
        nm.saturating_pow(self.inst.n() as u32)
    }

    fn step(&mut self, j: u32) -> Result<DensityLevel> {
        self.power = self.power.mul(&self.inst.field, &self.prime)?;
        let h = histograms(self.inst, &self.power, self.budget)?;
        let solutions = solution_count(&h, &self.power);
        let s = 2 * self.inst.n() as i32 + 1;
        let nm = self.power.norm();
        let density = solutions as f64 / (nm as f64).powi(s - 1);
        let (exp_sum, exp_sum_imag) = if self.exp_form {
            self.exp_acc += exact_denominator_sum(&h, nm as usize, s as u32);
            let rel = (self.exp_acc.re - density).abs() / density.abs().max(1.0);
            if rel > 1e-9 {
                return Err(Error::Invariant(format!(
                    "exponential-sum density {} disagrees with the solution count {} at level {j}",
                    self.exp_acc.re, density
                )));
            }
            (Some(self.exp_acc.re), Some(self.exp_acc.im))
        } else {
            (None, None)
        };
        Ok(DensityLevel {
            j,
            modulus_norm: nm,
            solutions,
            density,
            exp_sum,
            exp_sum_imag,
        })
    }
}

/// Truncations mu_0, ..., mu_(j_max) of the local density at a prime ideal,
/// by counting solutions modulo p^j. For k = Q and n = Z the exponential
/// sum form 1 + sum over a_gamma = p^i (i <= j) of S_gamma is computed too
/// and must agree.
pub fn local_density(prime: &IdealSpec, j_max: u32, inst: &EquationInstance, budget: u128) -> Result<LocalDensity> {
    prime.require_prime(&inst.field, budget)?;
    let mut stepper = LevelStepper::new(inst, prime, budget);
    let mut levels = vec![level_zero()];
    for j in 1..=j_max {
        levels.push(stepper.step(j)?);
    }
    let value = levels.last().map(|l| l.density).unwrap_or(1.0);
    Ok(LocalDensity {
        p: prime.residue_characteristic().unwrap_or(0),
        prime: prime.clone(),
        bad: false,
        levels,
        depth: j_max,
        value,
        converged: false,
        note: "fixed depth".into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    /// Minimum depth before the stopping rule applies.
    pub j_max: u32,
    pub tol: f64,
    pub budget: u128,
    /// Hard cap on the depth.
    pub depth_cap: u32,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions {
            j_max: 2,
            tol: 1e-3,
            budget: 20_000_000,
            depth_cap: 40,
        }
    }
}

/// Raises the depth until |mu_(j+1) - mu_j| < tol; at bad primes the
/// condition must hold for two consecutive steps, since the truncations
/// can stall for one step before moving again.
pub fn adaptive_local_density(
    prime: &IdealSpec,
    inst: &EquationInstance,
    bad: bool,
    opts: &DensityOptions,
) -> Result<LocalDensity> {
    prime.require_prime(&inst.field, opts.budget)?;
    let mut stepper = LevelStepper::new(inst, prime, opts.budget);
    let mut levels = vec![level_zero()];
    let needed_small = if bad { 2 } else { 1 };
    let min_depth = opts.j_max.max(1) + if bad { 2 } else { 0 };
    let mut small = 0;
    let mut converged = false;
    let mut note = String::new();
    for j in 1..=opts.depth_cap {
        if stepper.next_cost() > opts.budget {
            note = format!("budget reached before depth {j}");
            break;
        }
        let level = stepper.step(j)?;
        let diff = (level.density - levels.last().unwrap().density).abs();
        levels.push(level);
        small = if diff < opts.tol && j >= 2 { small + 1 } else { 0 };
        if j >= min_depth && small >= needed_small {
            converged = true;
            note = format!("stabilized at depth {j}");
            break;
        }
    }
    if !converged && note.is_empty() {
        note = format!("depth cap {} reached", opts.depth_cap);
    }
    let depth = (levels.len() - 1) as u32;
    Ok(LocalDensity {
        p: prime.residue_characteristic().unwrap_or(0),
        prime: prime.clone(),
        bad,
        value: levels.last().unwrap().density,
        levels,
        depth,
        converged,
        note,
    })
}

/// |disc| of the order generated by the products omega_i tau_j over Z.
pub fn absolute_discriminant(inst: &EquationInstance) -> Result<i128> {
    let k = &inst.field;
    let ext = &inst.ext;
    let n = ext.degree();
    let m = k.degree();
    // relative traces of tau_l
    let mut rel_tr = Vec::with_capacity(n);
    for l in 0..n {
        let mut t = FieldElement::zero(m);
        for i in 0..n {
            t = t.add(ext.entry(l, i, i))?;
        }
        rel_tr.push(t);
    }
    let mut gram = vec![vec![Q::zero(); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            let mut t = FieldElement::zero(m);
            for (l, tr) in rel_tr.iter().enumerate() {
                t = t.add(&k.mul(ext.entry(i, j, l), tr)?)?;
            }
            for a in 0..m {
                for b in 0..m {
                    let wab = k.mul(&FieldElement::basis(m, a), &FieldElement::basis(m, b))?;
                    gram[i * m + a][j * m + b] = k.trace(&k.mul(&wab, &t)?)?;
                }
            }
        }
    }
    let d = linalg::determinant(&gram);
    if !d.is_integer() {
        return Err(Error::Invariant(
            "discriminant of an integral basis is not an integer".into(),
        ));
    }
    Ok(d.numer().abs())
}

fn rational_parts(x: &Q) -> [i128; 2] {
    [x.numer().abs(), *x.denom()]
}

/// Rational primes up to `cutoff` at which the densities need elevated
/// depth: those dividing n, Nm(a), Nm(b), Nm(n) or the discriminant.
pub fn bad_primes(inst: &EquationInstance, cutoff: i128) -> Result<Vec<i128>> {
    let k = &inst.field;
    let mut nums = vec![inst.n() as i128, inst.modulus.norm(), absolute_discriminant(inst)?];
    nums.extend(rational_parts(&k.norm(&inst.a)?));
    nums.extend(rational_parts(&k.norm(&inst.b)?));
    Ok(primes_up_to(cutoff)
        .into_iter()
        .filter(|p| nums.iter().any(|v| !v.is_zero() && v % p == 0))
        .collect())
}

pub fn primes_up_to(cutoff: i128) -> Vec<i128> {
    (2..=cutoff)
        .filter(|&p| (2..).take_while(|d| d * d <= p).all(|d| p % d != 0))
        .collect()
}
