use super::element::FieldElement;
use super::field::FieldSpec;
use super::poly::{FlatPoly, Poly};
use crate::error::{Error, Result};

/// A relative extension K/k of degree n with an integral tau-basis over the
/// ring of integers of k. The first basis element must be 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionSpec {
    degree: usize,
    m: usize,
    /// `table[(i * n + j) * n + l]` is the tau_l coefficient of tau_i tau_j.
    table: Vec<FieldElement>,
}

impl ExtensionSpec {
    pub fn new(field: &FieldSpec, table: Vec<Vec<Vec<FieldElement>>>) -> Result<Self> {
        let n = table.len();
        let m = field.degree();
        if n == 0 {
            return Err(Error::InvalidSpec("extension degree must be positive".into()));
        }
        let mut flat = Vec::with_capacity(n * n * n);
        for (i, row) in table.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::MalformedTable(format!("tau row {i} has wrong length")));
            }
            for (j, entry) in row.into_iter().enumerate() {
                if entry.len() != n {
                    return Err(Error::MalformedTable(format!("tau entry ({i},{j}) has wrong length")));
                }
                for c in entry {
                    if c.degree() != m {
                        return Err(Error::MismatchedField {
                            expected: m,
                            got: c.degree(),
                        });
                    }
                    if !c.is_integral() {
                        return Err(Error::MalformedTable(format!(
                            "tau entry ({i},{j}) is not integral; tau must be an integral basis"
                        )));
                    }
                    flat.push(c);
                }
            }
        }
        let ext = ExtensionSpec {
            degree: n,
            m,
            table: flat,
        };
        ext.validate(field)?;
        Ok(ext)
    }

    /// Power basis 1, s, ..., s^(n-1) for a monic relative polynomial with
    /// integral coefficients (constant term first).
    pub fn from_rel_min_poly(field: &FieldSpec, coeffs: &[FieldElement]) -> Result<Self> {
        let n = coeffs
            .len()
            .checked_sub(1)
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidSpec("relative polynomial must have degree >= 1".into()))?;
        if !field.is_one(&coeffs[n]) {
            return Err(Error::InvalidSpec("relative polynomial must be monic".into()));
        }
        let m = field.degree();
        let mut powers: Vec<Vec<FieldElement>> = (0..n)
            .map(|t| {
                (0..n)
                    .map(|k| if k == t { field.one() } else { FieldElement::zero(m) })
                    .collect()
            })
            .collect();
        for t in n..(2 * n - 1).max(n) {
            let prev = powers[t - 1].clone();
            let mut next = vec![FieldElement::zero(m); n];
            next[1..n].clone_from_slice(&prev[..(n - 1)]);
            let top = &prev[n - 1];
            for k in 0..n {
                next[k] = next[k].sub(&field.mul(top, &coeffs[k])?)?;
            }
            powers.push(next);
        }
        let table = (0..n)
            .map(|i| (0..n).map(|j| powers[i + j].clone()).collect())
            .collect();
        Self::new(field, table)
    }

    fn validate(&self, field: &FieldSpec) -> Result<()> {
        let n = self.degree;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    if self.entry(i, j, l) != self.entry(j, i, l) {
                        return Err(Error::MalformedTable(format!("tau table not commutative at ({i},{j})")));
                    }
                }
                let expect_one = (0..n).all(|l| {
                    let e = self.entry(0, j, l);
                    if l == j {
                        field.is_one(e)
                    } else {
                        e.is_zero()
                    }
                });
                if !expect_one {
                    return Err(Error::MalformedTable("tau_1 must be the identity".into()));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut ei = vec![FieldElement::zero(self.m); n];
                    ei[i] = field.one();
                    let mut ej = ei.clone();
                    ej.swap(i, j);
                    let mut ek = vec![FieldElement::zero(self.m); n];
                    ek[k] = field.one();
                    let lhs = self.mul(field, &self.mul(field, &ei, &ej)?, &ek)?;
                    let rhs = self.mul(field, &ei, &self.mul(field, &ej, &ek)?)?;
                    if lhs != rhs {
                        return Err(Error::MalformedTable(format!(
                            "tau table not associative on ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base_degree(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize, l: usize) -> &FieldElement {
        &self.table[(i * self.degree + j) * self.degree + l]
    }

    /// Product of two elements of K given in tau-coordinates.
    pub fn mul(&self, field: &FieldSpec, x: &[FieldElement], y: &[FieldElement]) -> Result<Vec<FieldElement>> {
        let n = self.degree;
        if x.len() != n || y.len() != n {
            return Err(Error::MismatchedField {
                expected: n,
                got: x.len().min(y.len()),
            });
        }
        let mut out = vec![FieldElement::zero(self.m); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let p = field.mul(&x[i], &y[j])?;
                for (l, o) in out.iter_mut().enumerate() {
                    let t = self.entry(i, j, l);
                    if !t.is_zero() {
                        *o = o.add(&field.mul(&p, t)?)?;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// The norm form N(x) = N_{K/k}(sum x_j tau_j), with its flattening over Q.
#[derive(Clone, Debug)]
pub struct NormFormPoly {
    poly: Poly,
    flat: FlatPoly,
}

impl NormFormPoly {
    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn flat(&self) -> &FlatPoly {
        &self.flat
    }

    pub fn eval(&self, field: &FieldSpec, x: &[FieldElement]) -> Result<FieldElement> {
        self.poly.eval(field, x)
    }
}

/// Determinant of multiplication by a generic element, expanded symbolically.
pub fn build_norm_form(field: &FieldSpec, ext: &ExtensionSpec) -> Result<NormFormPoly> {
    let n = ext.degree();
    let m = field.degree();
    // mat[i][l] = sum_j x_j T[i][j][l]: tau_i times the generic element
    let mat: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|l| {
                    (0..n).fold(Poly::zero(n, m), |acc, j| {
                        let t = ext.entry(i, j, l);
                        if t.is_zero() {
                            acc
                        } else {
                            acc.add(&Poly::monomial(n, j, t.clone()))
                        }
                    })
                })
                .collect()
        })
        .collect();
    let mut det = Poly::zero(n, m);
    for (perm, sign) in permutations(n) {
        let mut term = Poly::constant(n, field.integer(sign));
        for (i, &p) in perm.iter().enumerate() {
            term = term.mul(field, &mat[i][p])?;
        }
        det = det.add(&term);
    }
    if !det.is_homogeneous(n as u32) {
        return Err(Error::Invariant("norm form is not homogeneous".into()));
    }
    if det.terms().any(|(_, c)| !c.is_integral()) {
        return Err(Error::Invariant("norm form has non-integral coefficients".into()));
    }
    let flat = det.flatten(field)?;
    Ok(NormFormPoly { poly: det, flat })
}

/// All permutations of 0..n with their signs.
fn permutations(n: usize) -> Vec<(Vec<usize>, i128)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, i128)>) {
        let n = used.len();
        if prefix.len() == n {
            let mut inv = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if prefix[i] > prefix[j] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inv % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::Signature;
    use crate::algebra::linalg::q;

    #[test]
    fn gaussian_norm_form() {
        let z = FieldSpec::rationals();
        let ext = ExtensionSpec::from_rel_min_poly(&z, &[z.integer(1), z.integer(0), z.integer(1)]).unwrap();
        let nf = build_norm_form(&z, &ext).unwrap();
        assert_eq!(nf.flat().eval_exact(&[q(3), q(4)]), vec![q(25)]);
        assert_eq!(nf.flat().eval_exact(&[q(1), q(0)]), vec![q(1)]);
    }

    #[test]
    fn cube_root_two_norm_form() {
        let z = FieldSpec::rationals();
        let ext =
            ExtensionSpec::from_rel_min_poly(&z, &[z.integer(-2), z.integer(0), z.integer(0), z.integer(1)]).unwrap();
        let nf = build_norm_form(&z, &ext).unwrap();
        for (a, b, c) in [(1i128, 2i128, 3i128), (-2, 5, 1), (0, 0, 1)] {
            let expect = a * a * a + 2 * b * b * b + 4 * c * c * c - 6 * a * b * c;
            assert_eq!(nf.flat().eval_exact(&[q(a), q(b), q(c)]), vec![q(expect)]);
        }
    }

    #[test]
    fn relative_extension_over_sqrt2() {
        let k = FieldSpec::from_min_poly(&[-2, 0, 1], Signature { real: 2, complex: 0 }).unwrap();
        let ext = ExtensionSpec::from_rel_min_poly(&k, &[k.integer(1), k.integer(0), k.integer(1)]).unwrap();
        let nf = build_norm_form(&k, &ext).unwrap();
        let x = [FieldElement::from_ints(&[1, 1]), FieldElement::from_ints(&[0, 1])];
        // (1+r)^2 + r^2 = 3 + 2r + 2 = 5 + 2r
        assert_eq!(nf.eval(&k, &x).unwrap(), FieldElement::from_ints(&[5, 2]));
    }

    #[test]
    fn non_integral_table_rejected() {
        let z = FieldSpec::rationals();
        let half = FieldElement::from_parts(vec![1], 2).unwrap();
        let r = ExtensionSpec::from_rel_min_poly(&z, &[half, z.integer(0), z.integer(1)]);
        assert!(matches!(r, Err(Error::MalformedTable(_))));
    }
}
