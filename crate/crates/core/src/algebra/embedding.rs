//! Archimedean embeddings of k and the algebra V = k (x) R.

use super::element::FieldElement;
use super::field::FieldSpec;
use super::linalg::{self, q, Q};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Numerical values sigma_i(omega_j) with a certified bound on the roots
/// they were built from.
#[derive(Clone, Debug)]
pub struct Embeddings {
    precision: f64,
    root_error: f64,
    /// `real[i][j]` = sigma_i(omega_j) for the real places.
    real: Vec<Vec<f64>>,
    /// `complex[i][j]` for one embedding out of each conjugate pair.
    complex: Vec<Vec<Complex64>>,
    /// Maps omega-coordinates to the real coordinates of V (re/im split).
    to_real: DMatrix<f64>,
    from_real: DMatrix<f64>,
    primitive: Vec<i64>,
    min_poly: Vec<Q>,
}

impl Embeddings {
    pub(crate) fn placeholder() -> Self {
        Embeddings {
            precision: 0.0,
            root_error: 0.0,
            real: Vec::new(),
            complex: Vec::new(),
            to_real: DMatrix::zeros(0, 0),
            from_real: DMatrix::zeros(0, 0),
            primitive: Vec::new(),
            min_poly: Vec::new(),
        }
    }

    pub(crate) fn compute(field: &FieldSpec, precision: f64) -> Result<Self> {
        let m = field.degree();
        let sig = field.signature();
        let (primitive, w) = find_primitive(field)?;
        let winv = linalg::inverse(&w).expect("primitive element gives invertible power matrix");
        // theta^m = sum_t a_t theta^t
        let theta = FieldElement::from_ints(&primitive);
        let top = field.pow(&theta, m as u32)?;
        let a = linalg::solve_left(&w, &top.coords())
            .ok_or_else(|| Error::Numerical("minimal polynomial solve failed".into()))?;
        // monic p(x) = x^m - sum a_t x^t, low to high
        let mut poly: Vec<Q> = a.iter().map(|c| -*c).collect();
        poly.push(q(1));

        let roots = polynomial_roots(&poly)?;
        let (real_roots, complex_roots) = split_roots(&roots, sig.real, sig.complex)?;

        let exact = exact_poly(&poly);
        let mut worst: f64 = 0.0;
        let mut refined_real = Vec::with_capacity(real_roots.len());
        let mut refined_complex = Vec::with_capacity(complex_roots.len());
        let all: Vec<Complex64> = real_roots.iter().chain(&complex_roots).copied().collect();
        for (idx, r) in all.iter().enumerate() {
            let (r, bound) = certify_root(&exact, &poly, *r, idx < real_roots.len());
            let sep = all
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != idx)
                .map(|(_, s)| (s - r).norm())
                .chain(complex_roots.iter().map(|s| (s.conj() - r).norm()).filter(|d| *d > 0.0))
                .fold(f64::INFINITY, f64::min);
            if !(bound < sep / 2.0) {
                return Err(Error::Numerical("root isolation failed: roots too close".into()));
            }
            let rel = if bound == 0.0 { 0.0 } else { bound / r.norm() };
            worst = worst.max(rel);
            if idx < real_roots.len() {
                refined_real.push(r.re);
            } else {
                refined_complex.push(r);
            }
        }
        if worst > precision {
            return Err(Error::PrecisionUnderflow {
                requested: precision,
                achieved: worst,
            });
        }

        let eval = |z: Complex64, j: usize| -> Complex64 {
            let mut acc = Complex64::zero();
            let mut pw = Complex64::new(1.0, 0.0);
            for t in 0..m {
                acc += pw * winv[j][t].to_f64().unwrap_or(f64::NAN);
                pw *= z;
            }
            acc
        };
        let real: Vec<Vec<f64>> = refined_real
            .iter()
            .map(|&r| (0..m).map(|j| eval(Complex64::new(r, 0.0), j).re).collect())
            .collect();
        let complex: Vec<Vec<Complex64>> = refined_complex
            .iter()
            .map(|&z| (0..m).map(|j| eval(z, j)).collect())
            .collect();

        let mut to_real = DMatrix::zeros(m, m);
        for (i, row) in real.iter().enumerate() {
            for j in 0..m {
                to_real[(i, j)] = row[j];
            }
        }
        for (i, row) in complex.iter().enumerate() {
            for j in 0..m {
                to_real[(sig.real + 2 * i, j)] = row[j].re;
                to_real[(sig.real + 2 * i + 1, j)] = row[j].im;
            }
        }
        let from_real = to_real
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("embedding matrix is singular".into()))?;

        let emb = Embeddings {
            precision,
            root_error: worst,
            real,
            complex,
            to_real,
            from_real,
            primitive,
            min_poly: poly,
        };
        emb.check_relations(field)?;
        Ok(emb)
    }

    /// The values must respect omega_a omega_b = sum_k T_abk omega_k.
    fn check_relations(&self, field: &FieldSpec) -> Result<()> {
        let m = field.degree();
        let places: Vec<Vec<Complex64>> = self
            .real
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .chain(self.complex.iter().cloned())
            .collect();
        let tol = 64.0 * self.precision.max(f64::EPSILON);
        for s in &places {
            for a in 0..m {
                for b in 0..m {
                    let lhs = s[a] * s[b];
                    let mut rhs = Complex64::zero();
                    let mut scale = lhs.norm();
                    for k in 0..m {
                        let t = field.table(a, b, k) as f64;
                        rhs += s[k] * t;
                        scale += (s[k] * t).norm();
                    }
                    if (lhs - rhs).norm() > tol * scale.max(1.0) {
                        return Err(Error::Numerical(format!(
                            "embedding values violate the table at ({a},{b})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    /// Certified relative error bound on the underlying roots.
    pub fn root_error(&self) -> f64 {
        self.root_error
    }

    pub fn real_values(&self) -> &[Vec<f64>] {
        &self.real
    }

    pub fn complex_values(&self) -> &[Vec<Complex64>] {
        &self.complex
    }

    /// The primitive element used to locate the embeddings, in omega-coordinates.
    pub fn primitive_element(&self) -> &[i64] {
        &self.primitive
    }

    /// Its minimal polynomial, constant term first.
    pub fn primitive_min_poly(&self) -> &[Q] {
        &self.min_poly
    }

    /// Sum_j |sigma_i(omega_j)| for each place in order (real, then complex).
    pub fn place_row_norms(&self) -> Vec<f64> {
        self.real
            .iter()
            .map(|r| r.iter().map(|x| x.abs()).sum())
            .chain(self.complex.iter().map(|r| r.iter().map(|z| z.norm()).sum()))
            .collect()
    }

    /// The constant c with |pi_i(x)| <= c |x| for every place.
    pub fn height_constant(&self) -> f64 {
        self.place_row_norms().into_iter().fold(0.0, f64::max)
    }

    /// C2 with Nm(v) <= C2 |v|^m.
    pub fn norm_constant(&self) -> f64 {
        let n1 = self.real.len();
        self.place_row_norms()
            .iter()
            .enumerate()
            .map(|(i, c)| if i < n1 { *c } else { c * c })
            .product()
    }

    pub fn to_real_matrix(&self) -> &DMatrix<f64> {
        &self.to_real
    }

    pub fn from_real_matrix(&self) -> &DMatrix<f64> {
        &self.from_real
    }
}

/// C1 with |vw| <= C1 |v| |w| for the max-coordinate height.
pub fn product_constant(field: &FieldSpec) -> f64 {
    let m = field.degree();
    (0..m)
        .map(|k| {
            (0..m)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .map(|(i, j)| field.table(i, j, k).unsigned_abs() as f64)
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

fn find_primitive(field: &FieldSpec) -> Result<(Vec<i64>, Vec<Vec<Q>>)> {
    let m = field.degree();
    let powers = |c: &[i64]| -> Result<Vec<Vec<Q>>> {
        let theta = FieldElement::from_ints(c);
        let mut acc = field.one();
        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            rows.push(acc.coords());
            acc = field.mul(&acc, &theta)?;
        }
        Ok(rows)
    };
    let mut candidates: Vec<Vec<i64>> = (0..m)
        .rev()
        .map(|i| (0..m).map(|k| i64::from(k == i)).collect())
        .collect();
    // small integer combinations in a fixed order
    for bound in 1..=3i64 {
        for idx in 0..(2 * bound + 1).pow(m as u32) {
            let mut c = vec![0i64; m];
            let mut r = idx;
            for v in c.iter_mut() {
                *v = r % (2 * bound + 1) - bound;
                r /= 2 * bound + 1;
            }
            candidates.push(c);
        }
    }
    for c in candidates {
        let w = powers(&c)?;
        if !linalg::determinant(&w).is_zero() {
            return Ok((c, w));
        }
    }
    Err(Error::MalformedTable(
        "no primitive element found; algebra is not a field".into(),
    ))
}

fn horner(poly: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for &c in poly.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of a monic polynomial by Aberth iteration.
fn polynomial_roots(poly: &[Q]) -> Result<Vec<Complex64>> {
    let m = poly.len() - 1;
    let c: Vec<f64> = poly.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
    if m == 1 {
        return Ok(vec![Complex64::new(-c[0], 0.0)]);
    }
    let radius = 1.0 + c[..m].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / m as f64 + 0.4))
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for k in 0..m {
            let (p, dp) = horner(&c, z[k]);
            if p == Complex64::zero() {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..m).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            z[k] -= w;
            moved = moved.max(w.norm() / z[k].norm().max(1e-300));
        }
        if moved < 1e-17 {
            break;
        }
    }
    if z.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        return Err(Error::Numerical("root iteration diverged".into()));
    }
    Ok(z)
}

fn split_roots(roots: &[Complex64], n1: usize, n2: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let mut by_imag: Vec<Complex64> = roots.to_vec();
    by_imag.sort_by(|a, b| a.im.abs().total_cmp(&b.im.abs()));
    let mut real: Vec<Complex64> = by_imag[..n1].iter().map(|r| Complex64::new(r.re, 0.0)).collect();
    let rest = &by_imag[n1..];
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    if rest.iter().any(|r| r.im.abs() <= 1e-8 * scale) || by_imag[..n1].iter().any(|r| r.im.abs() > 1e-6 * scale) {
        return Err(Error::InvalidSpec(
            "signature disagrees with the number of real embeddings".into(),
        ));
    }
    let mut complex: Vec<Complex64> = rest.iter().filter(|r| r.im > 0.0).copied().collect();
    if complex.len() != n2 {
        return Err(Error::InvalidSpec("complex embeddings do not pair up".into()));
    }
    real.sort_by(|a, b| b.re.total_cmp(&a.re));
    complex.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok((real, complex))
}

fn exact_poly(poly: &[Q]) -> Vec<BigRational> {
    poly.iter()
        .map(|c| BigRational::new(BigInt::from(*c.numer()), BigInt::from(*c.denom())))
        .collect()
}

fn to_big(x: f64) -> BigRational {
    BigRational::from_f64(x).unwrap_or_else(BigRational::zero)
}

/// p(z) evaluated exactly at the binary value of z.
fn exact_residual(poly: &[BigRational], z: Complex64) -> Complex64 {
    let (zr, zi) = (to_big(z.re), to_big(z.im));
    let mut pr = BigRational::zero();
    let mut pi = BigRational::zero();
    for c in poly.iter().rev() {
        let nr = &pr * &zr - &pi * &zi + c;
        let ni = &pr * &zi + &pi * &zr;
        pr = nr;
        pi = ni;
    }
    Complex64::new(pr.to_f64().unwrap_or(f64::NAN), pi.to_f64().unwrap_or(f64::NAN))
}

/// Polishes a root with exact residuals and returns it with a certified
/// radius m |p(r)| / |p'(r)| containing a true root.
fn certify_root(exact: &[BigRational], poly: &[Q], r: Complex64, real: bool) -> (Complex64, f64) {
    let m = poly.len() - 1;
    let c: Vec<f64> = poly.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
    let bound_at = |z: Complex64| {
        let res = exact_residual(exact, z);
        let (_, dp) = horner(&c, z);
        (res, m as f64 * res.norm() / (dp.norm() * (1.0 - 1e-9)))
    };
    let mut best = r;
    let (mut res, mut bound) = bound_at(r);
    for _ in 0..4 {
        if bound == 0.0 {
            break;
        }
        let (_, dp) = horner(&c, best);
        let mut next = best - res / dp;
        if real {
            next.im = 0.0;
        }
        let (nres, nbound) = bound_at(next);
        if nbound < bound {
            best = next;
            res = nres;
            bound = nbound;
        } else {
            break;
        }
    }
    (best, bound)
}

/// A point of V, as embedding components together with its omega-coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraPoint {
    pub real: Vec<f64>,
    pub complex: Vec<Complex64>,
    pub coords: Vec<f64>,
}

/// Trace, absolute norm and height of a point of V.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchimedeanInvariants {
    pub trace: f64,
    pub norm: f64,
    pub height: f64,
}

impl AlgebraPoint {
    pub fn from_coords(field: &FieldSpec, coords: &[f64]) -> Self {
        let e = field.embeddings();
        let real = e
            .real_values()
            .iter()
            .map(|row| row.iter().zip(coords).map(|(s, x)| s * x).sum())
            .collect();
        let complex = e
            .complex_values()
            .iter()
            .map(|row| row.iter().zip(coords).map(|(s, x)| s * *x).sum())
            .collect();
        AlgebraPoint {
            real,
            complex,
            coords: coords.to_vec(),
        }
    }

    /// Recovers the omega-coordinates from the embedding components.
    pub fn from_components(field: &FieldSpec, real: &[f64], complex: &[Complex64]) -> Result<Self> {
        let sig = field.signature();
        if real.len() != sig.real || complex.len() != sig.complex {
            return Err(Error::MismatchedField {
                expected: sig.places(),
                got: real.len() + complex.len(),
            });
        }
        let mut v = Vec::with_capacity(field.degree());
        v.extend_from_slice(real);
        for z in complex {
            v.push(z.re);
            v.push(z.im);
        }
        let x = field.embeddings().from_real_matrix() * nalgebra::DVector::from_vec(v);
        Ok(AlgebraPoint {
            real: real.to_vec(),
            complex: complex.to_vec(),
            coords: x.iter().copied().collect(),
        })
    }

    pub fn trace(&self) -> f64 {
        self.real.iter().sum::<f64>() + 2.0 * self.complex.iter().map(|z| z.re).sum::<f64>()
    }

    /// Product of real components times squared moduli of complex ones.
    pub fn signed_norm(&self) -> f64 {
        self.real.iter().product::<f64>() * self.complex.iter().map(|z| z.norm_sqr()).product::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.signed_norm().abs()
    }

    /// max_i |x_i| over the omega-coordinates.
    pub fn height(&self) -> f64 {
        self.coords.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn invariants(&self) -> ArchimedeanInvariants {
        archimedean_invariants(self)
    }

    /// Componentwise product in V.
    pub fn mul(&self, field: &FieldSpec, other: &AlgebraPoint) -> Result<AlgebraPoint> {
        let real: Vec<f64> = self.real.iter().zip(&other.real).map(|(a, b)| a * b).collect();
        let complex: Vec<Complex64> = self.complex.iter().zip(&other.complex).map(|(a, b)| a * b).collect();
        AlgebraPoint::from_components(field, &real, &complex)
    }

    /// Components of all places in order, real places as complex numbers.
    pub fn components(&self) -> Vec<Complex64> {
        self.real
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .chain(self.complex.iter().copied())
            .collect()
    }
}

pub fn archimedean_invariants(x: &AlgebraPoint) -> ArchimedeanInvariants {
    ArchimedeanInvariants {
        trace: x.trace(),
        norm: x.norm(),
        height: x.height(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::Signature;

    #[test]
    fn sqrt2_embeddings_match_bisection() {
        let k = FieldSpec::from_min_poly(&[-2, 0, 1], Signature { real: 2, complex: 0 }).unwrap();
        // bisection for the positive root of t^2 - 2
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid * mid > 2.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        let x = k.embed(&FieldElement::from_ints(&[1, 1])).unwrap();
        assert!((x.real[0] - (1.0 + lo)).abs() < 1e-12);
        assert!((x.real[1] - (1.0 - lo)).abs() < 1e-12);
        let inv = x.invariants();
        assert!((inv.trace - 2.0).abs() < 1e-12);
        assert!((inv.norm - 1.0).abs() < 1e-12);
        assert_eq!(inv.height, 1.0);
    }

    #[test]
    fn gaussian_embedding_is_one_complex_place() {
        let k = FieldSpec::from_min_poly(&[1, 0, 1], Signature { real: 0, complex: 1 }).unwrap();
        let x = k.embed(&FieldElement::from_ints(&[1, 1])).unwrap();
        assert!(x.real.is_empty());
        assert!((x.complex[0] - Complex64::new(1.0, 1.0)).norm() < 1e-15);
        let y = k.embed(&FieldElement::from_ints(&[3, 4])).unwrap();
        assert!((y.norm() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn rationals_embed_trivially() {
        let k = FieldSpec::rationals();
        let x = k.embed(&FieldElement::from_ints(&[5])).unwrap();
        assert_eq!(x.real, vec![5.0]);
    }

    #[test]
    fn impossible_precision_underflows() {
        let k = FieldSpec::from_min_poly(&[-2, 0, 0, 1], Signature { real: 1, complex: 1 }).unwrap();
        let r = k.with_precision(1e-30);
        assert!(matches!(r, Err(Error::PrecisionUnderflow { .. })));
    }

    #[test]
    fn wrong_signature_rejected() {
        let r = FieldSpec::from_min_poly(&[-2, 0, 1], Signature { real: 0, complex: 1 });
        assert!(matches!(r, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn components_round_trip() {
        let k = FieldSpec::from_min_poly(&[-2, 0, 0, 1], Signature { real: 1, complex: 1 }).unwrap();
        let x = AlgebraPoint::from_coords(&k, &[0.3, -1.2, 2.5]);
        let y = AlgebraPoint::from_components(&k, &x.real, &x.complex).unwrap();
        for (a, b) in x.coords.iter().zip(&y.coords) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
