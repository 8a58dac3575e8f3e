//! Small numerical helpers shared across modules: compensated summation,
//! phase reduction, least-squares slope fits and seeded substreams.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex phases.
#[derive(Clone, Copy, Debug, Default)]
pub struct PhaseSum {
    re: Neumaier,
    im: Neumaier,
    terms: u64,
}

impl PhaseSum {
    pub fn push(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
        self.terms += 1;
    }

    pub fn push_weighted(&mut self, z: Complex64, weight: f64, terms: u64) {
        self.re.add(z.re * weight);
        self.im.add(z.im * weight);
        self.terms += terms;
    }

    pub fn merge(&mut self, other: &PhaseSum) {
        self.re.add(other.re.sum);
        self.re.add(other.re.comp);
        self.im.add(other.im.sum);
        self.im.add(other.im.comp);
        self.terms += other.terms;
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }
}

/// Fractional part of `alpha * w`, with the rounding error of the product
/// recovered through an fma so that large integer multipliers keep full
/// precision. `w` must be exactly representable (|w| < 2^53).
#[inline]
pub fn frac_product(alpha: f64, w: i64) -> f64 {
    let wf = w as f64;
    let p = alpha * wf;
    let err = alpha.mul_add(wf, -p);
    (p - p.round()) + err
}

/// Fractional part of `alpha * w` for any i128 multiplier, splitting w into
/// 26-bit limbs; alpha * 2^(26k) is exact so its fractional part is too.
#[inline]
pub fn frac_product_wide(alpha: f64, w: i128) -> f64 {
    if w.unsigned_abs() < (1u128 << 52) {
        return frac_product(alpha, w as i64);
    }
    let neg = w < 0;
    let mut u = w.unsigned_abs();
    let mut a = alpha - alpha.round();
    let mut acc = 0.0;
    while u > 0 {
        let limb = (u & ((1 << 26) - 1)) as i64;
        acc += frac_product(a, limb);
        acc -= acc.round();
        u >>= 26;
        let scaled = a * (1u64 << 26) as f64;
        a = scaled - scaled.round();
    }
    if neg {
        -acc
    } else {
        acc
    }
}

/// e(t) = exp(2 pi i t).
#[inline]
pub fn unit_phase(t: f64) -> Complex64 {
    let t = t - t.round();
    let (s, c) = (TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// e(num / den) for an exact rational phase; reduces the numerator first.
#[inline]
pub fn rational_phase(num: i128, den: i128) -> Complex64 {
    debug_assert!(den > 0);
    let r = num.rem_euclid(den);
    let (s, c) = (TAU * (r as f64 / den as f64)).sin_cos();
    Complex64::new(c, s)
}

/// Ordinary least-squares fit y = intercept + slope * x.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Slope of log(value) against log(P).
pub fn log_log_slope(ps: &[f64], values: &[f64]) -> f64 {
    let xs: Vec<f64> = ps.iter().map(|p| p.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    linear_fit(&xs, &ys).1
}

/// Weighted least-squares intercept of y = c0 + c1 x, returning (c0, var(c0))
/// for independent observations with the given variances.
pub fn weighted_intercept(xs: &[f64], ys: &[f64], vars: &[f64]) -> (f64, f64) {
    let w: Vec<f64> = vars.iter().map(|v| 1.0 / v.max(f64::MIN_POSITIVE)).collect();
    let s0: f64 = w.iter().sum();
    let s1: f64 = w.iter().zip(xs).map(|(w, x)| w * x).sum();
    let s2: f64 = w.iter().zip(xs).map(|(w, x)| w * x * x).sum();
    let det = s0 * s2 - s1 * s1;
    // c0 = sum_k l_k y_k with l_k = w_k (s2 - s1 x_k) / det
    let mut c0 = 0.0;
    let mut var = 0.0;
    for k in 0..xs.len() {
        let l = w[k] * (s2 - s1 * xs[k]) / det;
        c0 += l * ys[k];
        var += l * l * vars[k];
    }
    (c0, var)
}

/// Number of samples per substream chunk; sample `i` always comes from
/// chunk `i / SAMPLE_CHUNK`, so results do not depend on the worker count.
pub const SAMPLE_CHUNK: usize = 1 << 14;

/// Deterministic generator for chunk `chunk` of stream `stream` under `seed`.
pub fn substream(seed: u64, stream: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(chunk);
    rng
}

/// Format with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else {
        format!("{}", x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_small_terms() {
        let mut acc = Neumaier::default();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-12).abs() < 1e-24);
    }

    #[test]
    fn frac_product_handles_large_multipliers() {
        // 0.1 * 10^12 is not exactly 10^11 in binary; the fma term keeps the residue.
        let alpha = 0.25;
        assert_eq!(frac_product(alpha, 1_000_000_000_001), 0.25);
        let f = frac_product(1.0 / 3.0, 3_000_000_000);
        assert!(f.abs() < 1e-6);
    }

    #[test]
    fn wide_product_agrees_with_exact_rational() {
        // alpha = 3/8 is exact in binary, so frac(alpha w) is known exactly
        let w: i128 = (1 << 90) + 5;
        let f = frac_product_wide(0.375, w);
        let expect = (0.375f64 * 5.0).fract();
        assert!(((f - expect) - (f - expect).round()).abs() < 1e-12);
        assert_eq!(frac_product_wide(0.25, 7), frac_product(0.25, 7));
    }

    #[test]
    fn fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let (c, s) = linear_fit(&xs, &ys);
        assert!((c - 3.0).abs() < 1e-12 && (s + 0.5).abs() < 1e-12);
        let (c0, _) = weighted_intercept(&xs, &ys, &[1.0, 2.0, 1.0, 3.0]);
        assert!((c0 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fmt17_digits() {
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
        assert_eq!(fmt17(-0.5).len(), "-5.0000000000000000e-1".len());
    }
}
