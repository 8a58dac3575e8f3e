//! Multivariate polynomials over k and their flattenings over Q.

use super::element::FieldElement;
use super::field::FieldSpec;
use super::linalg::{q, Q};
use crate::error::{Error, Result};
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;

/// A polynomial in `nvars` variables with coefficients in k, keyed by
/// exponent vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    nvars: usize,
    m: usize,
    terms: BTreeMap<Vec<u32>, FieldElement>,
}

impl Poly {
    pub fn zero(nvars: usize, m: usize) -> Self {
        Poly {
            nvars,
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: FieldElement) -> Self {
        let mut p = Poly::zero(nvars, c.degree());
        p.add_term(vec![0; nvars], c);
        p
    }

    /// c * x_var
    pub fn monomial(nvars: usize, var: usize, c: FieldElement) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        let mut p = Poly::zero(nvars, c.degree());
        p.add_term(e, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &FieldElement)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Partial derivative in variable `var`.
    pub fn derivative(&self, var: usize) -> Poly {
        let mut d = Poly::zero(self.nvars, self.m);
        for (exps, c) in &self.terms {
            if exps[var] > 0 {
                let mut e = exps.clone();
                e[var] -= 1;
                d.add_term(e, c.scale_int(exps[var] as i128));
            }
        }
        d
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: FieldElement) {
        debug_assert_eq!(exps.len(), self.nvars);
        let entry = self.terms.entry(exps);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c).expect("coefficients share a field");
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut r = self.clone();
        for (e, c) in &other.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            m: self.m,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, field: &FieldSpec, other: &Poly) -> Result<Poly> {
        let mut r = Poly::zero(self.nvars, self.m);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                r.add_term(e, field.mul(ca, cb)?);
            }
        }
        Ok(r)
    }

    pub fn scale(&self, field: &FieldSpec, c: &FieldElement) -> Result<Poly> {
        let mut r = Poly::zero(self.nvars, self.m);
        for (e, a) in &self.terms {
            r.add_term(e.clone(), field.mul(a, c)?);
        }
        Ok(r)
    }

    pub fn pow(&self, field: &FieldSpec, e: u32) -> Result<Poly> {
        let mut acc = Poly::constant(self.nvars, field.one());
        for _ in 0..e {
            acc = acc.mul(field, self)?;
        }
        Ok(acc)
    }

    /// Substitutes x_i -> x_i + shift_i.
    pub fn shift(&self, field: &FieldSpec, shifts: &[FieldElement]) -> Result<Poly> {
        let n = self.nvars;
        let lin: Vec<Poly> = (0..n)
            .map(|i| Poly::monomial(n, i, field.one()).add(&Poly::constant(n, shifts[i].clone())))
            .collect();
        self.substitute(field, &lin)
    }

    /// Replaces variable i by the polynomial `subs[i]`.
    pub fn substitute(&self, field: &FieldSpec, subs: &[Poly]) -> Result<Poly> {
        let nv = subs.first().map_or(0, |p| p.nvars);
        let mut cache: Vec<Vec<Poly>> = subs
            .iter()
            .map(|s| vec![Poly::constant(nv, field.one()), s.clone()])
            .collect();
        let mut out = Poly::zero(nv, self.m);
        for (exps, c) in &self.terms {
            let mut t = Poly::constant(nv, c.clone());
            for (i, &e) in exps.iter().enumerate() {
                while cache[i].len() <= e as usize {
                    let next = cache[i].last().expect("nonempty").mul(field, &subs[i])?;
                    cache[i].push(next);
                }
                if e > 0 {
                    t = t.mul(field, &cache[i][e as usize])?;
                }
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    pub fn eval(&self, field: &FieldSpec, x: &[FieldElement]) -> Result<FieldElement> {
        if x.len() != self.nvars {
            return Err(Error::MismatchedField {
                expected: self.nvars,
                got: x.len(),
            });
        }
        let mut acc = FieldElement::zero(self.m);
        for (exps, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(exps) {
                for _ in 0..e {
                    t = field.mul(&t, xi)?;
                }
            }
            acc = acc.add(&t)?;
        }
        Ok(acc)
    }

    pub fn is_homogeneous(&self, degree: u32) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() == degree)
    }

    /// Expands each x_j as sum_i y_(j m + i) omega_i, giving m polynomials
    /// over Q in nvars * m variables.
    pub fn flatten(&self, field: &FieldSpec) -> Result<FlatPoly> {
        let m = field.degree();
        let nv = self.nvars * m;
        let subs: Vec<Poly> = (0..self.nvars)
            .map(|j| {
                (0..m).fold(Poly::zero(nv, m), |acc, i| {
                    acc.add(&Poly::monomial(nv, j * m + i, FieldElement::basis(m, i)))
                })
            })
            .collect();
        let expanded = self.substitute(field, &subs)?;
        Ok(FlatPoly {
            nvars: nv,
            m,
            terms: expanded
                .terms
                .into_iter()
                .map(|(exps, c)| FlatTerm {
                    exps,
                    coeff: c.coords(),
                })
                .collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatTerm {
    pub exps: Vec<u32>,
    pub coeff: Vec<Q>,
}

/// An m-tuple of polynomials over Q sharing their monomials: the omega-
/// coordinates of a k-valued polynomial in rational variables.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatPoly {
    nvars: usize,
    m: usize,
    terms: Vec<FlatTerm>,
}

impl FlatPoly {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn outputs(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &[FlatTerm] {
        &self.terms
    }

    pub fn is_integral(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.iter().all(|c| c.is_integer()))
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for t in &self.terms {
            let mut mono = 1.0;
            for (xi, &e) in x.iter().zip(&t.exps) {
                if e > 0 {
                    mono *= xi.powi(e as i32);
                }
            }
            for (o, c) in out.iter_mut().zip(&t.coeff) {
                if !c.is_zero() {
                    *o += c.to_f64().unwrap_or(f64::NAN) * mono;
                }
            }
        }
        out
    }

    pub fn eval_exact(&self, x: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.m];
        for t in &self.terms {
            let mut mono = q(1);
            for (xi, &e) in x.iter().zip(&t.exps) {
                for _ in 0..e {
                    mono *= *xi;
                }
            }
            for (o, c) in out.iter_mut().zip(&t.coeff) {
                *o += *c * mono;
            }
        }
        out
    }

    pub fn derivative(&self, var: usize) -> FlatPoly {
        let mut terms = Vec::new();
        for t in &self.terms {
            let e = t.exps[var];
            if e == 0 {
                continue;
            }
            let mut exps = t.exps.clone();
            exps[var] -= 1;
            terms.push(FlatTerm {
                exps,
                coeff: t.coeff.iter().map(|c| *c * q(e as i128)).collect(),
            });
        }
        FlatPoly {
            nvars: self.nvars,
            m: self.m,
            terms,
        }
    }

    pub fn gradient(&self) -> Vec<FlatPoly> {
        (0..self.nvars).map(|v| self.derivative(v)).collect()
    }

    /// Compiles to an evaluator over integer points; requires integral
    /// coefficients.
    pub fn compile(&self) -> Result<IntPoly> {
        if !self.is_integral() {
            return Err(Error::NotIntegral);
        }
        let mut maxe = vec![0u32; self.nvars];
        for t in &self.terms {
            for (mx, &e) in maxe.iter_mut().zip(&t.exps) {
                *mx = (*mx).max(e);
            }
        }
        Ok(IntPoly {
            nvars: self.nvars,
            m: self.m,
            max_exp: maxe,
            terms: self
                .terms
                .iter()
                .map(|t| IntTerm {
                    factors: t
                        .exps
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(v, &e)| (v, e))
                        .collect(),
                    coeff: t.coeff.iter().map(|c| *c.numer()).collect(),
                })
                .collect(),
        })
    }

    /// Compiles to a floating-point evaluator.
    pub fn compile_real(&self) -> RealPoly {
        RealPoly {
            nvars: self.nvars,
            m: self.m,
            terms: self
                .terms
                .iter()
                .map(|t| RealTerm {
                    factors: t
                        .exps
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(v, &e)| (v, e as i32))
                        .collect(),
                    coeff: t
                        .coeff
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(k, c)| (k, c.to_f64().unwrap_or(f64::NAN)))
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
struct RealTerm {
    factors: Vec<(usize, i32)>,
    coeff: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct RealPoly {
    nvars: usize,
    m: usize,
    terms: Vec<RealTerm>,
}

impl RealPoly {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn outputs(&self) -> usize {
        self.m
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for t in &self.terms {
            let mut mono = 1.0;
            for &(v, e) in &t.factors {
                mono *= x[v].powi(e);
            }
            for &(k, c) in &t.coeff {
                out[k] += c * mono;
            }
        }
    }
}

#[derive(Clone, Debug)]
struct IntTerm {
    factors: Vec<(usize, u32)>,
    coeff: Vec<i128>,
}

/// Integer-coefficient flattened polynomial for exact evaluation in hot loops.
#[derive(Clone, Debug)]
pub struct IntPoly {
    nvars: usize,
    m: usize,
    max_exp: Vec<u32>,
    terms: Vec<IntTerm>,
}

impl IntPoly {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn outputs(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.factors.iter().map(|f| f.1).sum())
            .max()
            .unwrap_or(0)
    }

    /// Evaluates into `out`, which must have length m.
    #[inline]
    pub fn eval_into(&self, x: &[i64], out: &mut [i128]) {
        out.iter_mut().for_each(|o| *o = 0);
        for t in &self.terms {
            let mut mono: i128 = 1;
            for &(v, e) in &t.factors {
                let xv = x[v] as i128;
                for _ in 0..e {
                    mono *= xv;
                }
            }
            if mono == 0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(&t.coeff) {
                *o += c * mono;
            }
        }
    }

    pub fn eval(&self, x: &[i64]) -> Vec<i128> {
        let mut out = vec![0; self.m];
        self.eval_into(x, &mut out);
        out
    }

    /// Crude bound on |value| for |x_i| <= r, used to rule out overflow.
    pub fn magnitude_bound(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let c = t.coeff.iter().map(|c| c.unsigned_abs() as f64).fold(0.0, f64::max);
                c * t.factors.iter().map(|&(_, e)| r.powi(e as i32)).product::<f64>()
            })
            .sum()
    }

    pub fn max_exponents(&self) -> &[u32] {
        &self.max_exp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::Signature;

    #[test]
    fn flatten_square_over_gaussian() {
        let k = FieldSpec::from_min_poly(&[1, 0, 1], Signature { real: 0, complex: 1 }).unwrap();
        let x = Poly::monomial(1, 0, k.one());
        let sq = x.pow(&k, 2).unwrap();
        let flat = sq.flatten(&k).unwrap();
        // (a + b i)^2 = a^2 - b^2 + 2ab i
        assert_eq!(flat.eval_exact(&[q(3), q(2)]), vec![q(5), q(12)]);
        let ip = flat.compile().unwrap();
        assert_eq!(ip.eval(&[3, 2]), vec![5, 12]);
        let d = flat.derivative(1);
        assert_eq!(d.eval_exact(&[q(3), q(2)]), vec![q(-4), q(6)]);
    }

    #[test]
    fn shift_and_eval() {
        let z = FieldSpec::rationals();
        let x = Poly::monomial(1, 0, z.one());
        let sq = x.pow(&z, 2).unwrap();
        let shifted = sq.shift(&z, &[z.integer(3)]).unwrap();
        assert_eq!(shifted.eval(&z, &[z.integer(1)]).unwrap(), z.integer(16));
    }
}
