use super::element::FieldElement;
use super::field::FieldSpec;
use super::linalg::{self, q, Q};
use crate::error::{Error, Result};
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// A nonzero integral ideal, stored as the row Hermite normal form of a
/// Z-basis in omega-coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IdealSpec {
    basis: Vec<Vec<i128>>,
    norm: i128,
}

impl IdealSpec {
    /// The whole ring of integers.
    pub fn unit(m: usize) -> Self {
        let basis = (0..m).map(|i| (0..m).map(|j| i128::from(i == j)).collect()).collect();
        IdealSpec { basis, norm: 1 }
    }

    fn from_rows(rows: Vec<Vec<i128>>, m: usize) -> Result<Self> {
        let basis = linalg::hnf(rows, m).ok_or_else(|| Error::InvalidSpec("ideal must be nonzero".into()))?;
        let norm = (0..m).map(|i| basis[i][i]).product();
        Ok(IdealSpec { basis, norm })
    }

    /// The ideal generated over the ring of integers by integral elements.
    pub fn from_generators(field: &FieldSpec, gens: &[FieldElement]) -> Result<Self> {
        let m = field.degree();
        let mut rows = Vec::with_capacity(gens.len() * m);
        for g in gens {
            if !g.is_integral() {
                return Err(Error::NotIntegral);
            }
            for i in 0..m {
                let p = field.mul(&FieldElement::basis(m, i), g)?;
                rows.push(p.numerators().to_vec());
            }
        }
        Self::from_rows(rows, m)
    }

    pub fn principal(field: &FieldSpec, g: &FieldElement) -> Result<Self> {
        Self::from_generators(field, std::slice::from_ref(g))
    }

    pub fn rational(field: &FieldSpec, n: i128) -> Result<Self> {
        Self::principal(field, &field.integer(n))
    }

    /// Canonicalizes a Z-basis, checking that it spans an ideal.
    pub fn from_basis(field: &FieldSpec, rows: Vec<Vec<i128>>) -> Result<Self> {
        let m = field.degree();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::MismatchedField {
                expected: m,
                got: rows.iter().map(|r| r.len()).find(|&l| l != m).unwrap_or(0),
            });
        }
        let ideal = Self::from_rows(rows, m)?;
        for row in &ideal.basis {
            let e = FieldElement::from_i128(row.clone());
            for i in 0..m {
                let p = field.mul(&FieldElement::basis(m, i), &e)?;
                if !ideal.contains(p.numerators()) {
                    return Err(Error::InvalidSpec("basis is not closed under multiplication".into()));
                }
            }
        }
        Ok(ideal)
    }

    pub fn degree(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<i128>] {
        &self.basis
    }

    pub fn norm(&self) -> i128 {
        self.norm
    }

    pub fn is_unit(&self) -> bool {
        self.norm == 1
    }

    /// Reduces integer coordinates into the box prod [0, H_ii).
    pub fn reduce(&self, v: &[i128]) -> Vec<i128> {
        let mut v = v.to_vec();
        self.reduce_in_place(&mut v);
        v
    }

    pub fn reduce_in_place(&self, v: &mut [i128]) {
        for (i, row) in self.basis.iter().enumerate() {
            let f = Integer::div_floor(&v[i], &row[i]);
            if f != 0 {
                for (x, r) in v.iter_mut().zip(row) {
                    *x -= f * r;
                }
            }
        }
    }

    /// Canonical representative of a rational vector modulo the ideal lattice.
    pub fn reduce_rational(&self, v: &[Q]) -> Vec<Q> {
        let mut v = v.to_vec();
        for (i, row) in self.basis.iter().enumerate() {
            let f = (v[i] / q(row[i])).floor();
            if !f.is_zero() {
                for (x, r) in v.iter_mut().zip(row) {
                    *x -= f * q(*r);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[i128]) -> bool {
        self.reduce(v).iter().all(|x| *x == 0)
    }

    pub fn contains_element(&self, e: &FieldElement) -> bool {
        e.is_integral() && self.contains(e.numerators())
    }

    /// self contains other.
    pub fn divides(&self, other: &IdealSpec) -> bool {
        other.basis.iter().all(|r| self.contains(r))
    }

    pub fn add(&self, other: &IdealSpec) -> Result<IdealSpec> {
        let rows = self.basis.iter().chain(&other.basis).cloned().collect();
        Self::from_rows(rows, self.degree())
    }

    pub fn mul(&self, field: &FieldSpec, other: &IdealSpec) -> Result<IdealSpec> {
        let mut rows = Vec::with_capacity(self.degree() * other.degree());
        for a in &self.basis {
            for b in &other.basis {
                let p = field.mul(&FieldElement::from_i128(a.clone()), &FieldElement::from_i128(b.clone()))?;
                rows.push(p.numerators().to_vec());
            }
        }
        Self::from_rows(rows, self.degree())
    }

    pub fn pow(&self, field: &FieldSpec, e: u32) -> Result<IdealSpec> {
        let mut acc = IdealSpec::unit(self.degree());
        for _ in 0..e {
            acc = acc.mul(field, self)?;
        }
        Ok(acc)
    }

    /// Largest e with self^e containing `other`, capped at `cap`.
    pub fn valuation_of(&self, field: &FieldSpec, other: &IdealSpec, cap: u32) -> Result<u32> {
        let mut e = 0;
        let mut pw = self.clone();
        while e < cap && pw.divides(other) {
            e += 1;
            pw = pw.mul(field, self)?;
        }
        Ok(e)
    }

    /// Representatives of self / sub for an ideal sub contained in self,
    /// in lexicographic order of lattice coordinates.
    pub fn quotient_reps(&self, sub: &IdealSpec) -> Result<Vec<Vec<i128>>> {
        let m = self.degree();
        if !self.divides(sub) {
            return Err(Error::InvalidSpec("quotient requires containment".into()));
        }
        // express sub's basis in self's basis: x * H_self = row
        let h: Vec<Vec<Q>> = self.basis.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
        let mut coeffs = Vec::with_capacity(m);
        for r in &sub.basis {
            let row: Vec<Q> = r.iter().map(|&x| q(x)).collect();
            let x = linalg::solve_left(&h, &row).ok_or_else(|| Error::Invariant("basis change failed".into()))?;
            coeffs.push(x.iter().map(|c| *c.numer()).collect());
        }
        let d = linalg::hnf(coeffs, m).ok_or_else(|| Error::Invariant("sublattice not full rank".into()))?;
        let diag: Vec<i128> = (0..m).map(|i| d[i][i]).collect();
        let count: i128 = diag.iter().product();
        let mut reps = Vec::with_capacity(count as usize);
        let mut c = vec![0i128; m];
        loop {
            let mut v = vec![0i128; m];
            for (ci, row) in c.iter().zip(&self.basis) {
                for (x, r) in v.iter_mut().zip(row) {
                    *x += ci * r;
                }
            }
            reps.push(v);
            let mut i = m;
            loop {
                if i == 0 {
                    return Ok(reps);
                }
                i -= 1;
                c[i] += 1;
                if c[i] < diag[i] {
                    break;
                }
                c[i] = 0;
            }
        }
    }

    /// Representatives of the residue ring modulo self.
    pub fn residues(&self) -> Vec<Vec<i128>> {
        IdealSpec::unit(self.degree())
            .quotient_reps(self)
            .expect("every ideal lies in the ring")
    }

    /// The rational prime below a prime ideal, if the norm is a prime power.
    pub fn residue_characteristic(&self) -> Option<i128> {
        let n = self.norm;
        if n < 2 {
            return None;
        }
        let p = (2..).find(|p| n % p == 0)?;
        let mut r = n;
        while r % p == 0 {
            r /= p;
        }
        (r == 1).then_some(p)
    }

    /// Exact primality test by checking that every nonzero residue is a unit
    /// (x^(N-1) == 1). Intended for small norms.
    pub fn is_prime(&self, field: &FieldSpec, budget: u128) -> Result<bool> {
        if self.residue_characteristic().is_none() {
            return Ok(false);
        }
        if self.norm as u128 > budget {
            return Err(Error::budget("prime test residues", self.norm as u128, budget));
        }
        let one = self.reduce(field.one().numerators());
        for r in self.residues().into_iter().skip(1) {
            if self.pow_mod(field, &r, (self.norm - 1) as u128) != one {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn require_prime(&self, field: &FieldSpec, budget: u128) -> Result<()> {
        if self.is_prime(field, budget)? {
            Ok(())
        } else {
            Err(Error::NotPrime(format!("ideal of norm {} is not prime", self.norm)))
        }
    }

    /// Product of integral coordinate vectors reduced modulo self.
    pub fn mul_mod(&self, field: &FieldSpec, a: &[i128], b: &[i128]) -> Vec<i128> {
        let m = self.degree();
        let mut out = vec![0i128; m];
        for i in 0..m {
            if a[i] == 0 {
                continue;
            }
            for j in 0..m {
                if b[j] == 0 {
                    continue;
                }
                let p = a[i] * b[j];
                for (k, o) in out.iter_mut().enumerate() {
                    *o += p * field.table(i, j, k) as i128;
                }
            }
        }
        self.reduce(&out)
    }

    pub fn pow_mod(&self, field: &FieldSpec, a: &[i128], mut e: u128) -> Vec<i128> {
        let mut base = self.reduce(a);
        let mut acc = self.reduce(field.one().numerators());
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_mod(field, &acc, &base);
            }
            base = self.mul_mod(field, &base, &base);
            e >>= 1;
        }
        acc
    }

    /// The prime ideals above a rational prime p, each with its ramification
    /// index, found among two-element ideals (p, g).
    pub fn primes_above(field: &FieldSpec, p: i128, budget: u128) -> Result<Vec<(IdealSpec, u32)>> {
        let m = field.degree();
        let pp = IdealSpec::rational(field, p)?;
        let mut reps = pp.residues();
        reps.sort_by_key(|r| {
            (
                r.iter().map(|x| x.abs().min((p - x).abs())).max().unwrap_or(0),
                r.clone(),
            )
        });
        let mut found: Vec<(IdealSpec, u32)> = Vec::new();
        let mut covered = 0usize;
        for g in reps {
            let cand = IdealSpec::from_generators(field, &[field.integer(p), FieldElement::from_i128(g)])?;
            if cand.is_unit() || found.iter().any(|(f, _)| *f == cand) {
                continue;
            }
            if cand.is_prime(field, budget)? {
                let e = cand.valuation_of(field, &pp, 64)?;
                let f = cand.norm().ilog(p) as usize;
                covered += e as usize * f;
                found.push((cand, e));
                if covered == m {
                    break;
                }
            }
        }
        if covered != m {
            return Err(Error::Invariant(format!("prime decomposition above {p} incomplete")));
        }
        found.sort_by(|a, b| a.0.norm.cmp(&b.0.norm).then(a.0.basis.cmp(&b.0.basis)));
        Ok(found)
    }
}

/// The denominator ideal {kappa : kappa gamma in n} of gamma = num / den.
pub fn denominator_ideal(
    field: &FieldSpec,
    num: &FieldElement,
    den: &FieldElement,
    modulus: &IdealSpec,
) -> Result<IdealSpec> {
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let gamma = field.div(num, den)?;
    denominator_ideal_of(field, &gamma, modulus)
}

pub fn denominator_ideal_of(field: &FieldSpec, gamma: &FieldElement, modulus: &IdealSpec) -> Result<IdealSpec> {
    let m = field.degree();
    if gamma.is_zero() {
        return Ok(IdealSpec::unit(m));
    }
    let mg = field.mult_matrix(gamma)?;
    let h: Vec<Vec<Q>> = modulus
        .basis
        .iter()
        .map(|r| r.iter().map(|&x| q(x)).collect())
        .collect();
    let hinv = linalg::inverse(&h).expect("ideal basis is nonsingular");
    let prod: Vec<Vec<Q>> = mg.iter().map(|row| linalg::vec_mat(row, &hinv)).collect();
    let d = prod
        .iter()
        .fold(1i128, |acc, row| acc.lcm(&linalg::common_denominator(row)));
    let b: Vec<Vec<i128>> = prod
        .iter()
        .map(|row| row.iter().map(|x| x.numer() * (d / x.denom())).collect())
        .collect();
    let basis = linalg::kernel_mod(&b, d);
    let norm = (0..m).map(|i| basis[i][i]).product();
    Ok(IdealSpec { basis, norm })
}

/// Trace-dual basis of the ring of integers, as rational coordinate vectors.
pub fn trace_dual_basis(field: &FieldSpec) -> Vec<Vec<Q>> {
    let m = field.degree();
    let g: Vec<Vec<Q>> = (0..m)
        .map(|i| (0..m).map(|j| q(field.trace_gram()[i * m + j] as i128)).collect())
        .collect();
    linalg::inverse(&g).expect("trace form of a number field is nondegenerate")
}

/// Whether the exponential-sum normalization with phases e(Tr(gamma F))
/// taken over classes of gamma modulo n is consistent: the trace dual of
/// the ring must lie in n.
pub fn is_duality_compatible(field: &FieldSpec, modulus: &IdealSpec) -> bool {
    trace_dual_basis(field).iter().all(|v| {
        v.iter().all(|x| x.is_integer()) && modulus.contains(&v.iter().map(|x| *x.numer()).collect::<Vec<_>>())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::Signature;

    fn gaussian() -> FieldSpec {
        FieldSpec::from_min_poly(&[1, 0, 1], Signature { real: 0, complex: 1 }).unwrap()
    }

    #[test]
    fn norms_of_principal_ideals() {
        let k = gaussian();
        let i = IdealSpec::principal(&k, &FieldElement::from_ints(&[2, 1])).unwrap();
        assert_eq!(i.norm(), 5);
        assert!(i.contains(&[5, 0]));
        assert!(!i.contains(&[1, 0]));
        assert!(i.is_prime(&k, 1000).unwrap());
        let two = IdealSpec::rational(&k, 2).unwrap();
        assert_eq!(two.norm(), 4);
        assert!(!two.is_prime(&k, 1000).unwrap());
    }

    #[test]
    fn denominator_ideal_examples() {
        let z = FieldSpec::rationals();
        let one = IdealSpec::unit(1);
        let a = denominator_ideal(&z, &FieldElement::from_ints(&[3]), &FieldElement::from_ints(&[4]), &one).unwrap();
        assert_eq!(a.norm(), 4);
        let zero = denominator_ideal(&z, &FieldElement::zero(1), &FieldElement::from_ints(&[7]), &one).unwrap();
        assert_eq!(zero.norm(), 1);
        assert!(matches!(
            denominator_ideal(&z, &FieldElement::from_ints(&[1]), &FieldElement::zero(1), &one),
            Err(Error::ZeroDenominator)
        ));
        let k = gaussian();
        let a = denominator_ideal(
            &k,
            &FieldElement::from_ints(&[1, 1]),
            &FieldElement::from_ints(&[2, 0]),
            &IdealSpec::unit(2),
        )
        .unwrap();
        assert_eq!(a.norm(), 2);
    }

    #[test]
    fn quotient_reps_count() {
        let k = gaussian();
        let p = IdealSpec::principal(&k, &FieldElement::from_ints(&[2, 1])).unwrap();
        let p2 = p.pow(&k, 2).unwrap();
        let reps = p.quotient_reps(&p2).unwrap();
        assert_eq!(reps.len(), 5);
        assert!(reps.iter().all(|r| p.contains(r)));
        assert_eq!(p2.residues().len(), 25);
    }

    #[test]
    fn primes_above_split_inert_ramified() {
        let k = gaussian();
        assert_eq!(IdealSpec::primes_above(&k, 5, 10_000).unwrap().len(), 2);
        let three = IdealSpec::primes_above(&k, 3, 10_000).unwrap();
        assert_eq!(three.len(), 1);
        assert_eq!(three[0].0.norm(), 9);
        let two = IdealSpec::primes_above(&k, 2, 10_000).unwrap();
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].1, 2);
    }

    #[test]
    fn duality_only_for_rationals_and_unit_ideal() {
        let z = FieldSpec::rationals();
        assert!(is_duality_compatible(&z, &IdealSpec::unit(1)));
        assert!(!is_duality_compatible(&z, &IdealSpec::rational(&z, 3).unwrap()));
        assert!(!is_duality_compatible(&gaussian(), &IdealSpec::unit(2)));
    }
}
