use crate::algebra::ideal::denominator_ideal_of;
use crate::algebra::linalg::Q;
use crate::algebra::{FieldElement, FieldSpec, IdealSpec};
use crate::error::Result;
use crate::lattice::{enumerate_congruence_class, BoxSpec};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A rational approximation gamma = lambda / mu with lambda, mu in n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Approximant {
    pub lambda: FieldElement,
    pub mu: FieldElement,
    /// Canonical representative of gamma modulo n.
    pub gamma: FieldElement,
    pub denom_norm: i128,
    /// max-coordinate distance from alpha to the nearest translate of gamma.
    pub distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcLabel {
    Major,
    Minor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcPoint {
    pub alpha: Vec<f64>,
    pub label: ArcLabel,
    pub approximant: Option<Approximant>,
    pub theta: f64,
    /// Admissible bound on Nm(a_gamma).
    pub norm_bound: f64,
    /// Major-arc radius.
    pub radius: f64,
}

/// Bounds defining the major arcs at (P, theta): Nm(a_gamma) <= C P^(m(n-1)theta)
/// and |alpha - gamma| <= P^(-n + m(n-1)theta).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcParams {
    pub p: f64,
    pub theta: f64,
    pub n: usize,
    pub constant: f64,
}

impl ArcParams {
    pub fn norm_bound(&self, m: usize) -> f64 {
        self.constant * self.p.powf(m as f64 * (self.n as f64 - 1.0) * self.theta)
    }

    pub fn radius(&self, m: usize) -> f64 {
        self.p
            .powf(-(self.n as f64) + m as f64 * (self.n as f64 - 1.0) * self.theta)
    }

    /// Bound on |mu| for the denominator search when m > 1.
    pub fn mu_bound(&self) -> f64 {
        self.p.powf((self.n as f64 - 1.0) * self.theta)
    }
}

fn big(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite")
}

fn big_q(x: &Q) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

/// Exact max over coordinates of the distance from alpha to gamma + Z^m.
fn exact_torus_distance(alpha: &[f64], gamma: &[Q]) -> BigRational {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    alpha
        .iter()
        .zip(gamma)
        .map(|(a, g)| {
            let d = big(*a) - big_q(g);
            let r = (&d + &half).floor();
            (d - r).abs()
        })
        .fold(BigRational::zero(), |acc, x| if x > acc { x } else { acc })
}

/// Re-verifies both defining inequalities exactly.
pub fn verify_major(alpha: &[f64], a: &Approximant, norm_bound: f64, radius: f64) -> bool {
    let dist = exact_torus_distance(alpha, &a.gamma.coords());
    (a.denom_norm as f64) <= norm_bound && dist <= big(radius)
}

fn make_approximant(
    field: &FieldSpec,
    modulus: &IdealSpec,
    alpha: &[f64],
    lambda: FieldElement,
    mu: FieldElement,
) -> Result<Approximant> {
    let gamma = field.div(&lambda, &mu)?;
    let canon = FieldElement::from_rationals(&modulus.reduce_rational(&gamma.coords()));
    let ideal = denominator_ideal_of(field, &canon, modulus)?;
    let distance = exact_torus_distance(alpha, &canon.coords())
        .to_f64()
        .unwrap_or(f64::INFINITY);
    Ok(Approximant {
        lambda,
        mu,
        gamma: canon,
        denom_norm: ideal.norm(),
        distance,
    })
}

/// Convergents and semiconvergents a/b of x with b <= qmax.
fn continued_fraction_candidates(x: f64, qmax: i128) -> Vec<(i128, i128)> {
    let xr = big(x);
    let mut out = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::from(0), BigInt::from(1), BigInt::from(1), BigInt::from(0));
    let mut rem = xr;
    for _ in 0..64 {
        let a = rem.floor().to_integer();
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        // semiconvergents between the previous and this convergent
        let mut t = BigInt::from(1);
        while t < a {
            let qs = &t * &q1 + &q0;
            if qs > BigInt::from(qmax) {
                break;
            }
            let ps = &t * &p1 + &p0;
            out.push((ps.to_i128().unwrap_or(0), qs.to_i128().unwrap_or(1)));
            t += 1;
        }
        if q2 > BigInt::from(qmax) {
            break;
        }
        out.push((p2.to_i128().unwrap_or(0), q2.to_i128().unwrap_or(1)));
        let frac = &rem - BigRational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        rem = frac.recip();
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
    }
    out
}

/// Labels alpha as major (with a witness gamma) or minor.
pub fn classify_arc(alpha: &[f64], params: &ArcParams, field: &FieldSpec, modulus: &IdealSpec) -> Result<ArcPoint> {
    let m = field.degree();
    let norm_bound = params.norm_bound(m);
    let radius = params.radius(m);
    let mut best: Option<Approximant> = None;
    let mut consider = |a: Approximant| {
        if !verify_major(alpha, &a, norm_bound, radius) {
            return;
        }
        let better = match &best {
            None => true,
            Some(b) => (a.denom_norm, a.distance) < (b.denom_norm, b.distance),
        };
        if better {
            best = Some(a);
        }
    };
    if m == 1 {
        // Nm(a_gamma) >= b for gamma = a/b in lowest terms, so b <= bound.
        let qmax = norm_bound.floor().max(0.0) as i128;
        let x = alpha[0] - alpha[0].floor();
        let cands: Vec<(i128, i128)> = if radius >= 1.0 / (2.0 * (qmax.max(1) as f64).powi(2)) {
            (1..=qmax)
                .flat_map(|b| {
                    let a = (x * b as f64).round() as i128;
                    [(a - 1, b), (a, b), (a + 1, b)]
                })
                .collect()
        } else {
            continue_with_endpoints(continued_fraction_candidates(x, qmax))
        };
        let nrm = modulus.basis()[0][0];
        for (a, b) in cands {
            if b < 1 {
                continue;
            }
            // lambda = a N, mu = b N both lie in n = (N)
            let lambda = FieldElement::from_i128(vec![a * nrm]);
            let mu = FieldElement::from_i128(vec![b * nrm]);
            consider(make_approximant(field, modulus, alpha, lambda, mu)?);
        }
    } else {
        let bound = params.mu_bound().floor();
        if bound >= 1.0 {
            let bx = BoxSpec {
                center: vec![0.0; m],
                radius: 0.5,
                arity: 1,
            };
            let stream = enumerate_congruence_class(modulus, &FieldElement::zero(m), &bx, 2.0 * bound + 1.0)?;
            for mu in stream {
                // mu and -mu give the same gamma
                match mu.iter().find(|&&c| c != 0) {
                    Some(&c) if c > 0 => {}
                    _ => continue,
                }
                let mu_e = FieldElement::from_ints(&mu);
                for lambda in nearest_lattice_points(field, modulus, alpha, &mu) {
                    consider(make_approximant(field, modulus, alpha, lambda, mu_e.clone())?);
                }
            }
        }
    }
    Ok(ArcPoint {
        alpha: alpha.to_vec(),
        label: if best.is_some() {
            ArcLabel::Major
        } else {
            ArcLabel::Minor
        },
        approximant: best,
        theta: params.theta,
        norm_bound,
        radius,
    })
}

/// The fraction 0/1 is always a candidate (alpha near an integer).
fn continue_with_endpoints(mut c: Vec<(i128, i128)>) -> Vec<(i128, i128)> {
    c.push((0, 1));
    c.push((1, 1));
    c
}

/// Lattice points of n near mu alpha: sequential rounding in the
/// triangular basis and its +-1 neighbours.
fn nearest_lattice_points(field: &FieldSpec, modulus: &IdealSpec, alpha: &[f64], mu: &[i64]) -> Vec<FieldElement> {
    let m = field.degree();
    let mut target = vec![0.0; m];
    for i in 0..m {
        for j in 0..m {
            if mu[j] == 0 {
                continue;
            }
            for (k, t) in target.iter_mut().enumerate() {
                *t += alpha[i] * mu[j] as f64 * field.table(i, j, k) as f64;
            }
        }
    }
    let h = modulus.basis();
    let mut t = vec![0i128; m];
    for j in 0..m {
        let partial: f64 = (0..j).map(|i| t[i] as f64 * h[i][j] as f64).sum();
        t[j] = ((target[j] - partial) / h[j][j] as f64).round() as i128;
    }
    let mut out = Vec::new();
    for code in 0..3usize.pow(m as u32) {
        let mut c = code;
        let mut v = vec![0i128; m];
        for (i, row) in h.iter().enumerate() {
            let ti = t[i] + (c % 3) as i128 - 1;
            c /= 3;
            for (x, r) in v.iter_mut().zip(row) {
                *x += ti * r;
            }
        }
        out.push(FieldElement::from_i128(v));
    }
    out
}

/// Lebesgue measure of the union of major arcs for k = Q: the number of
/// admissible gamma modulo n times the arc length 2r.
pub fn arc_measure(params: &ArcParams, modulus: &IdealSpec) -> Result<f64> {
    if modulus.degree() != 1 {
        return Err(crate::error::Error::InvalidSpec(
            "arc measure is implemented for k = Q".into(),
        ));
    }
    let nrm = modulus.basis()[0][0];
    let qb = params.norm_bound(1);
    let qmax = qb.floor() as i128;
    let mut count: u128 = 0;
    for b in 1..=qmax {
        for a in 0..nrm * b {
            if num_integer::gcd(a, b) != 1 {
                continue;
            }
            let norm = b * nrm / num_integer::gcd(nrm, a);
            if (norm as f64) <= qb {
                count += 1;
            }
        }
    }
    // arcs in the unit interval: classes modulo (N) cover N unit intervals
    Ok(count as f64 * (2.0 * params.radius(1)).min(1.0) / nrm as f64)
}
