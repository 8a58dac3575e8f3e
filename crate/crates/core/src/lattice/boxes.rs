use crate::algebra::{FieldElement, FieldSpec, IdealSpec};
use crate::error::{Error, Result};
use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// A box {x : |x - v| < rho} in V^s, with |.| the max over omega-coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    /// s * m coordinates, variable-major.
    pub center: Vec<f64>,
    pub radius: f64,
    pub arity: usize,
}

impl BoxSpec {
    pub fn new(center: Vec<f64>, radius: f64, arity: usize) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::InvalidSpec(format!("box radius {radius} must lie in (0, 1)")));
        }
        if arity == 0 || center.len() % arity != 0 {
            return Err(Error::InvalidSpec(
                "box centre length is not a multiple of the arity".into(),
            ));
        }
        Ok(BoxSpec { center, radius, arity })
    }

    pub fn degree(&self) -> usize {
        self.center.len() / self.arity
    }

    /// The one-variable box for variable `i`.
    pub fn factor(&self, i: usize) -> BoxSpec {
        let m = self.degree();
        BoxSpec {
            center: self.center[i * m..(i + 1) * m].to_vec(),
            radius: self.radius,
            arity: 1,
        }
    }

    /// Whether x (integral coordinates) lies in the dilation P times this box.
    pub fn contains_dilated(&self, x: &[i64], p: f64) -> bool {
        let w = self.radius * p;
        x.iter()
            .zip(&self.center)
            .all(|(&xi, &c)| (xi as f64 - p * c).abs() < w)
    }

    /// The same region with centre and radius scaled by t (t B at dilation P
    /// equals B at dilation t P).
    pub fn scaled(&self, t: f64) -> BoxSpec {
        BoxSpec {
            center: self.center.iter().map(|c| c * t).collect(),
            radius: self.radius * t,
            arity: self.arity,
        }
    }
}

/// The product box B1 x B2 x B3 for (x, y, z).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductBox {
    pub x: BoxSpec,
    pub y: BoxSpec,
    pub z: BoxSpec,
}

impl ProductBox {
    pub fn from_center(center: &[f64], radius: f64, n: usize, m: usize) -> Result<Self> {
        if center.len() != (2 * n + 1) * m {
            return Err(Error::InvalidSpec(format!(
                "box centre has {} coordinates, expected {}",
                center.len(),
                (2 * n + 1) * m
            )));
        }
        Ok(ProductBox {
            x: BoxSpec::new(center[..n * m].to_vec(), radius, n)?,
            y: BoxSpec::new(center[n * m..2 * n * m].to_vec(), radius, n)?,
            z: BoxSpec::new(center[2 * n * m..].to_vec(), radius, 1)?,
        })
    }

    pub fn center(&self) -> Vec<f64> {
        self.x
            .center
            .iter()
            .chain(&self.y.center)
            .chain(&self.z.center)
            .copied()
            .collect()
    }

    pub fn radius(&self) -> f64 {
        self.x.radius
    }
}

/// rho = eta / (2 c^2): a point within rho P of P v in omega-coordinates is
/// within c rho P <= eta P / 2 of P v at every place (c >= 1).
pub fn rho_for_eta(field: &FieldSpec, eta: f64) -> f64 {
    let c = field.embeddings().height_constant();
    eta / (2.0 * c * c)
}

/// Streams the elements of residue + ideal lying in P times a one-variable
/// box, in lexicographic order of their lattice coordinates.
#[derive(Clone, Debug)]
pub struct ClassStream {
    h: Vec<Vec<i128>>,
    lo: Vec<i128>,
    hi: Vec<i128>,
    t: Vec<i128>,
    tmax: Vec<i128>,
    partial: Vec<Vec<i128>>,
    level: usize,
    fresh: bool,
    done: bool,
}

impl ClassStream {
    fn range(&self, j: usize) -> (i128, i128) {
        let p = self.partial[j][j];
        let d = self.h[j][j];
        (
            Integer::div_ceil(&(self.lo[j] - p), &d),
            Integer::div_floor(&(self.hi[j] - p), &d),
        )
    }

    fn set_partial(&mut self, j: usize) {
        let t = self.t[j];
        let next: Vec<i128> = self.partial[j].iter().zip(&self.h[j]).map(|(a, b)| a + t * b).collect();
        self.partial[j + 1] = next;
    }

    /// Upper bound on the number of elements produced.
    pub fn size_bound(&self) -> u128 {
        (0..self.h.len())
            .map(|j| {
                let span = (self.hi[j] - self.lo[j]).max(-1) + 1;
                (span as u128).div_ceil(self.h[j][j] as u128) + 1
            })
            .product()
    }
}

impl Iterator for ClassStream {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let m = self.h.len();
        loop {
            if self.done {
                return None;
            }
            if self.fresh {
                if self.level == m {
                    self.fresh = false;
                    let out = self.partial[m].iter().map(|&v| v as i64).collect();
                    if m == 0 {
                        self.done = true;
                    } else {
                        self.level = m - 1;
                    }
                    return Some(out);
                }
                let (a, b) = self.range(self.level);
                if a > b {
                    self.fresh = false;
                    if self.level == 0 {
                        self.done = true;
                    } else {
                        self.level -= 1;
                    }
                    continue;
                }
                self.t[self.level] = a;
                self.tmax[self.level] = b;
                self.set_partial(self.level);
                self.level += 1;
            } else {
                let j = self.level;
                self.t[j] += 1;
                if self.t[j] > self.tmax[j] {
                    if j == 0 {
                        self.done = true;
                    } else {
                        self.level -= 1;
                    }
                    continue;
                }
                self.set_partial(j);
                self.level += 1;
                self.fresh = true;
            }
        }
    }
}

/// Integral elements x = residue (mod ideal) with |x - P c| < rho P.
pub fn enumerate_congruence_class(
    ideal: &IdealSpec,
    residue: &FieldElement,
    bx: &BoxSpec,
    p: f64,
) -> Result<ClassStream> {
    let m = ideal.degree();
    if residue.degree() != m || bx.center.len() != m {
        return Err(Error::MismatchedField {
            expected: m,
            got: if residue.degree() != m {
                residue.degree()
            } else {
                bx.center.len()
            },
        });
    }
    if !residue.is_integral() {
        return Err(Error::NotIntegral);
    }
    let w = bx.radius * p;
    let lim = 2f64.powi(62);
    let mut lo = Vec::with_capacity(m);
    let mut hi = Vec::with_capacity(m);
    for &c in &bx.center {
        let (l, h) = (p * c - w, p * c + w);
        if !(l.abs() < lim && h.abs() < lim) {
            return Err(Error::Numerical("box exceeds integer range".into()));
        }
        // smallest integer above l, largest below h
        lo.push(l.floor() as i128 + 1);
        hi.push(h.ceil() as i128 - 1);
    }
    let r = ideal.reduce(residue.numerators());
    let mut partial = vec![vec![0i128; m]; m + 1];
    partial[0] = r;
    Ok(ClassStream {
        h: ideal.basis().to_vec(),
        lo,
        hi,
        t: vec![0; m],
        tmax: vec![0; m],
        partial,
        level: 0,
        fresh: true,
        done: false,
    })
}

/// All s-tuples of class elements in P times an s-variable box, flattened
/// to s * m coordinates, in lexicographic order.
pub fn enumerate_tuples(
    ideal: &IdealSpec,
    residues: &[FieldElement],
    bx: &BoxSpec,
    p: f64,
    budget: u128,
) -> Result<Vec<Vec<i64>>> {
    let mut factors = Vec::with_capacity(bx.arity);
    let mut bound: u128 = 1;
    for (i, r) in residues.iter().enumerate() {
        let s = enumerate_congruence_class(ideal, r, &bx.factor(i), p)?;
        bound = bound.saturating_mul(s.size_bound());
        factors.push(s);
    }
    if bound > budget {
        return Err(Error::budget("box points", bound, budget));
    }
    let lists: Vec<Vec<Vec<i64>>> = factors.into_iter().map(|s| s.collect()).collect();
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for list in &lists {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for prefix in &out {
            for e in list {
                let mut v = prefix.clone();
                v.extend_from_slice(e);
                next.push(v);
            }
        }
        out = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_box(c: Vec<f64>, r: f64) -> BoxSpec {
        BoxSpec::new(c, r, 1).unwrap()
    }

    #[test]
    fn odd_integers() {
        let z = FieldSpec::rationals();
        let two = IdealSpec::rational(&z, 2).unwrap();
        let v: Vec<i64> = enumerate_congruence_class(&two, &z.integer(1), &one_box(vec![0.0], 0.5), 20.0)
            .unwrap()
            .map(|x| x[0])
            .collect();
        assert_eq!(v, vec![-9, -7, -5, -3, -1, 1, 3, 5, 7, 9]);
    }

    #[test]
    fn all_integers_in_interval() {
        let z = FieldSpec::rationals();
        let v: Vec<i64> =
            enumerate_congruence_class(&IdealSpec::unit(1), &z.integer(0), &one_box(vec![0.0], 0.25), 10.0)
                .unwrap()
                .map(|x| x[0])
                .collect();
        assert_eq!(v, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn sqrt2_coordinate_box() {
        let v: Vec<Vec<i64>> = enumerate_congruence_class(
            &IdealSpec::unit(2),
            &FieldElement::zero(2),
            &one_box(vec![0.0, 0.0], 0.5),
            3.0,
        )
        .unwrap()
        .collect();
        assert_eq!(v.len(), 9);
    }

    #[test]
    fn empty_box_yields_nothing() {
        let z = FieldSpec::rationals();
        let s = enumerate_congruence_class(&IdealSpec::unit(1), &z.integer(0), &one_box(vec![0.5], 0.1), 1.0).unwrap();
        assert_eq!(s.count(), 0);
    }

    #[test]
    fn radius_out_of_range_rejected() {
        assert!(BoxSpec::new(vec![0.0], 1.0, 1).is_err());
        assert!(BoxSpec::new(vec![0.0], 0.0, 1).is_err());
    }
}
