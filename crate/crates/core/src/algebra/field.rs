use super::element::FieldElement;
use super::embedding::{AlgebraPoint, Embeddings};
use super::linalg::{self, q, Q};
use crate::error::{Error, Result};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// Default relative precision of the archimedean embedding values.
pub const DEFAULT_EMBEDDING_PRECISION: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub real: usize,
    pub complex: usize,
}

impl Signature {
    pub fn places(&self) -> usize {
        self.real + self.complex
    }
}

/// A number field k given by an integral basis and its multiplication table.
#[derive(Clone, Debug)]
pub struct FieldSpec {
    degree: usize,
    labels: Vec<String>,
    /// `table[(i * m + j) * m + k]` is the omega_k coefficient of omega_i omega_j.
    table: Vec<i64>,
    signature: Signature,
    min_poly: Option<Vec<i64>>,
    one: Vec<i64>,
    /// Gram matrix Tr(omega_i omega_j), row-major.
    trace_gram: Vec<i64>,
    embeddings: Embeddings,
}

impl FieldSpec {
    /// Builds a field from a rational multiplication table. Entries must be
    /// integral since the basis is an integral basis.
    pub fn new(labels: Vec<String>, table: &[Vec<Vec<Q>>], signature: Signature, precision: f64) -> Result<Self> {
        let m = table.len();
        if m == 0 {
            return Err(Error::InvalidSpec("degree must be positive".into()));
        }
        let mut flat = Vec::with_capacity(m * m * m);
        for (i, row) in table.iter().enumerate() {
            if row.len() != m {
                return Err(Error::MalformedTable(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            for (j, entry) in row.iter().enumerate() {
                if entry.len() != m {
                    return Err(Error::MalformedTable(format!(
                        "entry ({i},{j}) has {} coordinates, expected {m}",
                        entry.len()
                    )));
                }
                for c in entry {
                    if !c.is_integer() {
                        return Err(Error::MalformedTable(format!(
                            "entry ({i},{j}) is not integral; the basis must be an integral basis"
                        )));
                    }
                    let v = i64::try_from(*c.numer()).map_err(|_| Error::MalformedTable("entry exceeds i64".into()))?;
                    flat.push(v);
                }
            }
        }
        Self::from_flat(labels, flat, m, signature, None, precision)
    }

    /// Power basis 1, t, ..., t^(m-1) for a monic integer polynomial given
    /// by its coefficients from the constant term upwards.
    pub fn from_min_poly(coeffs: &[i64], signature: Signature) -> Result<Self> {
        let m = coeffs
            .len()
            .checked_sub(1)
            .filter(|&m| m > 0)
            .ok_or_else(|| Error::InvalidSpec("minimal polynomial must have degree >= 1".into()))?;
        if coeffs[m] != 1 {
            return Err(Error::InvalidSpec("minimal polynomial must be monic".into()));
        }
        let table = power_basis_table(coeffs);
        let labels = (0..m)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "t".to_string(),
                _ => format!("t^{i}"),
            })
            .collect();
        Self::from_flat(
            labels,
            table,
            m,
            signature,
            Some(coeffs.to_vec()),
            DEFAULT_EMBEDDING_PRECISION,
        )
    }

    pub fn rationals() -> Self {
        Self::from_min_poly(&[-1, 1], Signature { real: 1, complex: 0 })
            .map(|mut f| {
                f.labels = vec!["1".into()];
                f
            })
            .expect("Q is a valid field")
    }

    pub(crate) fn from_flat(
        labels: Vec<String>,
        table: Vec<i64>,
        m: usize,
        signature: Signature,
        min_poly: Option<Vec<i64>>,
        precision: f64,
    ) -> Result<Self> {
        if labels.len() != m {
            return Err(Error::InvalidSpec(format!(
                "{} basis labels for degree {m}",
                labels.len()
            )));
        }
        if signature.real + 2 * signature.complex != m {
            return Err(Error::InvalidSpec(format!(
                "signature ({}, {}) incompatible with degree {m}",
                signature.real, signature.complex
            )));
        }
        let t = |i: usize, j: usize, k: usize| table[(i * m + j) * m + k] as i128;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if t(i, j, k) != t(j, i, k) {
                        return Err(Error::MalformedTable(format!("not commutative at ({i},{j})")));
                    }
                }
            }
        }
        // (w_i w_j) w_l == w_i (w_j w_l)
        for i in 0..m {
            for j in 0..m {
                for l in 0..m {
                    for k in 0..m {
                        let lhs: i128 = (0..m).map(|s| t(i, j, s) * t(s, l, k)).sum();
                        let rhs: i128 = (0..m).map(|s| t(j, l, s) * t(i, s, k)).sum();
                        if lhs != rhs {
                            return Err(Error::MalformedTable(format!(
                                "not associative on basis triple ({i},{j},{l})"
                            )));
                        }
                    }
                }
            }
        }
        // unity: sum_i e_i T[i][j][k] = delta_jk
        let a: Vec<Vec<Q>> = (0..m)
            .map(|i| (0..m * m).map(|jk| q(t(i, jk / m, jk % m))).collect())
            .collect();
        let b: Vec<Q> = (0..m * m).map(|jk| q(i128::from(jk / m == jk % m))).collect();
        let one =
            linalg::solve_left(&a, &b).ok_or_else(|| Error::MalformedTable("table has no identity element".into()))?;
        if one.iter().any(|c| !c.is_integer()) {
            return Err(Error::MalformedTable("identity element is not integral".into()));
        }
        let one: Vec<i64> = one.iter().map(|c| *c.numer() as i64).collect();
        let traces: Vec<i128> = (0..m).map(|k| (0..m).map(|l| t(k, l, l)).sum()).collect();
        let trace_gram = (0..m * m)
            .map(|ij| (0..m).map(|k| t(ij / m, ij % m, k) * traces[k]).sum::<i128>() as i64)
            .collect();
        let mut field = FieldSpec {
            degree: m,
            labels,
            table,
            signature,
            min_poly,
            one,
            trace_gram,
            embeddings: Embeddings::placeholder(),
        };
        field.embeddings = Embeddings::compute(&field, precision)?;
        Ok(field)
    }

    /// Recomputes the embedding values at a different relative precision.
    pub fn with_precision(mut self, precision: f64) -> Result<Self> {
        self.embeddings = Embeddings::compute(&self, precision)?;
        Ok(self)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn min_poly(&self) -> Option<&[i64]> {
        self.min_poly.as_deref()
    }

    #[inline]
    pub fn table(&self, i: usize, j: usize, k: usize) -> i64 {
        self.table[(i * self.degree + j) * self.degree + k]
    }

    pub fn table_entry(&self, i: usize, j: usize) -> Vec<i64> {
        (0..self.degree).map(|k| self.table(i, j, k)).collect()
    }

    pub fn trace_gram(&self) -> &[i64] {
        &self.trace_gram
    }

    pub fn embeddings(&self) -> &Embeddings {
        &self.embeddings
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::from_ints(&self.one)
    }

    pub fn one_ints(&self) -> &[i64] {
        &self.one
    }

    pub fn scalar(&self, c: Q) -> FieldElement {
        self.one().scale(c)
    }

    pub fn integer(&self, c: i128) -> FieldElement {
        self.one().scale_int(c)
    }

    pub fn element(&self, coords: &[Q]) -> Result<FieldElement> {
        self.check_len(coords.len())?;
        Ok(FieldElement::from_rationals(coords))
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.degree {
            return Err(Error::MismatchedField {
                expected: self.degree,
                got,
            });
        }
        Ok(())
    }

    pub fn mul(&self, u: &FieldElement, v: &FieldElement) -> Result<FieldElement> {
        self.check_len(u.degree())?;
        self.check_len(v.degree())?;
        let m = self.degree;
        let (un, vn) = (u.numerators(), v.numerators());
        let mut out = vec![0i128; m];
        for i in 0..m {
            if un[i] == 0 {
                continue;
            }
            for j in 0..m {
                if vn[j] == 0 {
                    continue;
                }
                let p = un[i] * vn[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let t = self.table(i, j, k);
                    if t != 0 {
                        *o += p * t as i128;
                    }
                }
            }
        }
        FieldElement::from_parts(out, u.denominator() * v.denominator())
    }

    /// Product of integral elements in place; the hot-loop variant of `mul`.
    #[inline]
    pub fn mul_ints(&self, u: &[i64], v: &[i64], out: &mut [i64]) {
        let m = self.degree;
        out.iter_mut().for_each(|o| *o = 0);
        for i in 0..m {
            if u[i] == 0 {
                continue;
            }
            for j in 0..m {
                if v[j] == 0 {
                    continue;
                }
                let p = u[i] * v[j];
                let base = (i * m + j) * m;
                for k in 0..m {
                    out[k] += p * self.table[base + k];
                }
            }
        }
    }

    pub fn pow(&self, u: &FieldElement, e: u32) -> Result<FieldElement> {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, u)?;
        }
        Ok(acc)
    }

    /// Matrix of multiplication by u: row i holds the coordinates of omega_i u.
    pub fn mult_matrix(&self, u: &FieldElement) -> Result<Vec<Vec<Q>>> {
        (0..self.degree)
            .map(|i| Ok(self.mul(&FieldElement::basis(self.degree, i), u)?.coords()))
            .collect()
    }

    /// Absolute norm N_{k/Q}(u), the determinant of multiplication by u.
    pub fn norm(&self, u: &FieldElement) -> Result<Q> {
        Ok(linalg::determinant(&self.mult_matrix(u)?))
    }

    /// Absolute trace Tr_{k/Q}(u).
    pub fn trace(&self, u: &FieldElement) -> Result<Q> {
        let mm = self.mult_matrix(u)?;
        Ok((0..self.degree).fold(Q::zero(), |acc, i| acc + mm[i][i]))
    }

    /// Tr(u v) for integral coordinate vectors via the trace Gram matrix.
    #[inline]
    pub fn trace_pairing_ints(&self, u: &[i64], v: &[i64]) -> i128 {
        let m = self.degree;
        let mut s = 0i128;
        for i in 0..m {
            for j in 0..m {
                s += u[i] as i128 * v[j] as i128 * self.trace_gram[i * m + j] as i128;
            }
        }
        s
    }

    pub fn inverse(&self, u: &FieldElement) -> Result<FieldElement> {
        if u.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        // x * M_u = 1 where row i of M_u is omega_i u.
        let mm = self.mult_matrix(u)?;
        let one = self.one().coords();
        let x = linalg::solve_left(&mm, &one).ok_or(Error::ZeroDenominator)?;
        Ok(FieldElement::from_rationals(&x))
    }

    pub fn div(&self, num: &FieldElement, den: &FieldElement) -> Result<FieldElement> {
        let inv = self.inverse(den)?;
        self.mul(num, &inv)
    }

    pub fn embed(&self, u: &FieldElement) -> Result<AlgebraPoint> {
        self.check_len(u.degree())?;
        Ok(AlgebraPoint::from_coords(self, &u.coords_f64()))
    }

    pub fn is_one(&self, u: &FieldElement) -> bool {
        u == &self.one()
    }
}

/// Power-basis multiplication table of a monic integer polynomial.
fn power_basis_table(coeffs: &[i64]) -> Vec<i64> {
    let m = coeffs.len() - 1;
    // powers[t] = coordinates of theta^t for t < 2m - 1
    let mut powers: Vec<Vec<i64>> = (0..m).map(|t| (0..m).map(|k| i64::from(k == t)).collect()).collect();
    for t in m..(2 * m).saturating_sub(1).max(m) {
        let prev = &powers[t - 1];
        // theta * prev: shift up, reduce theta^m
        let mut next = vec![0i64; m];
        next[1..m].copy_from_slice(&prev[..m - 1]);
        let top = prev[m - 1];
        for k in 0..m {
            next[k] -= top * coeffs[k];
        }
        powers.push(next);
    }
    let mut table = Vec::with_capacity(m * m * m);
    for i in 0..m {
        for j in 0..m {
            table.extend_from_slice(&powers[i + j]);
        }
    }
    table
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.table == other.table && self.signature == other.signature
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt2() -> FieldSpec {
        FieldSpec::from_min_poly(&[-2, 0, 1], Signature { real: 2, complex: 0 }).unwrap()
    }

    fn cbrt2() -> FieldSpec {
        FieldSpec::from_min_poly(&[-2, 0, 0, 1], Signature { real: 1, complex: 1 }).unwrap()
    }

    #[test]
    fn conjugate_product_in_q_sqrt2() {
        let k = sqrt2();
        let p = k
            .mul(&FieldElement::from_ints(&[1, 1]), &FieldElement::from_ints(&[1, -1]))
            .unwrap();
        assert_eq!(p, FieldElement::from_ints(&[-1, 0]));
    }

    #[test]
    fn identity_is_neutral() {
        let k = cbrt2();
        let u = FieldElement::from_ints(&[3, -1, 7]);
        assert_eq!(k.mul(&u, &k.one()).unwrap(), u);
        assert_eq!(k.one_ints(), &[1, 0, 0]);
    }

    #[test]
    fn theta_times_theta_squared_is_two() {
        let k = cbrt2();
        let p = k
            .mul(
                &FieldElement::from_ints(&[0, 1, 0]),
                &FieldElement::from_ints(&[0, 0, 1]),
            )
            .unwrap();
        assert_eq!(p, FieldElement::from_ints(&[2, 0, 0]));
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let k = cbrt2();
        let r = k.mul(&FieldElement::from_ints(&[1, 0]), &FieldElement::from_ints(&[1, 0, 0]));
        assert!(matches!(r, Err(Error::MismatchedField { .. })));
    }

    #[test]
    fn non_associative_table_rejected() {
        // 2-dim table with w1*w1 = w0 + w1 but w0 is not an identity for w1.
        let t = |v: [i64; 2]| vec![q(v[0] as i128), q(v[1] as i128)];
        let table = vec![vec![t([1, 0]), t([0, 1])], vec![t([0, 1]), t([1, 1])]];
        // this one is fine (Fibonacci ring); break associativity by hand:
        let mut bad = table.clone();
        bad[1][1] = t([0, 2]);
        bad[0][0] = t([0, 1]);
        let labels = vec!["a".into(), "b".into()];
        let sig = Signature { real: 2, complex: 0 };
        assert!(FieldSpec::new(labels.clone(), &table, sig, DEFAULT_EMBEDDING_PRECISION).is_ok());
        assert!(matches!(
            FieldSpec::new(labels, &bad, sig, DEFAULT_EMBEDDING_PRECISION),
            Err(Error::MalformedTable(_))
        ));
    }

    #[test]
    fn inverse_and_norm() {
        let k = sqrt2();
        let u = FieldElement::from_ints(&[1, 1]);
        let inv = k.inverse(&u).unwrap();
        assert_eq!(inv, FieldElement::from_ints(&[-1, 1]));
        assert_eq!(k.norm(&u).unwrap(), q(-1));
        assert_eq!(k.trace(&u).unwrap(), q(2));
        let c = cbrt2();
        assert_eq!(c.norm(&FieldElement::from_ints(&[1, 1, 0])).unwrap(), q(3));
    }

    #[test]
    fn trace_gram_of_gaussian_integers() {
        let k = FieldSpec::from_min_poly(&[1, 0, 1], Signature { real: 0, complex: 1 }).unwrap();
        assert_eq!(k.trace_gram(), &[2, 0, 0, -2]);
    }
}
