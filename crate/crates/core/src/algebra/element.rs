use super::linalg::{common_denominator, Q};
use crate::error::{Error, Result};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// An element of k in coordinates with respect to the integral basis,
/// stored as integer numerators over one positive common denominator.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElement {
    num: Vec<i128>,
    den: i128,
}

impl FieldElement {
    pub fn zero(m: usize) -> Self {
        FieldElement {
            num: vec![0; m],
            den: 1,
        }
    }

    /// The basis element omega_i.
    pub fn basis(m: usize, i: usize) -> Self {
        let mut num = vec![0; m];
        num[i] = 1;
        FieldElement { num, den: 1 }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        FieldElement {
            num: coords.iter().map(|&c| c as i128).collect(),
            den: 1,
        }
    }

    pub fn from_i128(coords: Vec<i128>) -> Self {
        FieldElement { num: coords, den: 1 }
    }

    pub fn from_parts(num: Vec<i128>, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        let mut e = FieldElement { num, den };
        e.normalize();
        Ok(e)
    }

    pub fn from_rationals(coords: &[Q]) -> Self {
        let den = common_denominator(coords);
        let num = coords.iter().map(|c| c.numer() * (den / c.denom())).collect();
        let mut e = FieldElement { num, den };
        e.normalize();
        e
    }

    fn normalize(&mut self) {
        if self.den < 0 {
            self.den = -self.den;
            for x in self.num.iter_mut() {
                *x = -*x;
            }
        }
        let g = self.num.iter().fold(self.den, |g, x| g.gcd(x));
        if g > 1 {
            self.den /= g;
            for x in self.num.iter_mut() {
                *x /= g;
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.num.len()
    }

    pub fn numerators(&self) -> &[i128] {
        &self.num
    }

    pub fn denominator(&self) -> i128 {
        self.den
    }

    pub fn coord(&self, i: usize) -> Q {
        Q::new(self.num[i], self.den)
    }

    pub fn coords(&self) -> Vec<Q> {
        self.num.iter().map(|&n| Q::new(n, self.den)).collect()
    }

    pub fn coords_f64(&self) -> Vec<f64> {
        self.num.iter().map(|&n| n as f64 / self.den as f64).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|x| x.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    /// Integer coordinates, if integral and within i64.
    pub fn to_ints(&self) -> Result<Vec<i64>> {
        if !self.is_integral() {
            return Err(Error::NotIntegral);
        }
        self.num
            .iter()
            .map(|&x| i64::try_from(x).map_err(|_| Error::Numerical("coordinate exceeds i64".into())))
            .collect()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.num.len() != other.num.len() {
            return Err(Error::MismatchedField {
                expected: self.num.len(),
                got: other.num.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let l = self.den.lcm(&other.den);
        let (fa, fb) = (l / self.den, l / other.den);
        let num = self.num.iter().zip(&other.num).map(|(a, b)| a * fa + b * fb).collect();
        FieldElement::from_parts(num, l)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        FieldElement {
            num: self.num.iter().map(|x| -x).collect(),
            den: self.den,
        }
    }

    pub fn scale(&self, c: Q) -> Self {
        let num = self.num.iter().map(|x| x * c.numer()).collect();
        FieldElement::from_parts(num, self.den * c.denom()).expect("nonzero denominator")
    }

    pub fn scale_int(&self, c: i128) -> Self {
        self.scale(Q::from_integer(c))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", c)?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_common_denominator() {
        let e = FieldElement::from_parts(vec![2, -4], -6).unwrap();
        assert_eq!(e.numerators(), &[-1, 2]);
        assert_eq!(e.denominator(), 3);
        assert!(FieldElement::from_parts(vec![1], 0).is_err());
    }

    #[test]
    fn add_mismatch_is_error() {
        let a = FieldElement::from_ints(&[1, 2]);
        let b = FieldElement::from_ints(&[1]);
        assert!(matches!(a.add(&b), Err(Error::MismatchedField { .. })));
    }
}
