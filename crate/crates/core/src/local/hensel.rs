use super::{Evidence, LocalCertificate, Place, Witness};
use crate::algebra::{FieldElement, FieldSpec, IdealSpec, IntPoly, Poly};
use crate::error::{Error, Result};
use crate::lattice::EquationInstance;
use serde::{Deserialize, Serialize};

/// What an unsuccessful search looked at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InsolubilityReport {
    pub p: i128,
    pub prime: IdealSpec,
    /// Depth of the modulus the search ran at.
    pub search_depth: u32,
    pub examined: u128,
    /// Roots found at the search depth, all singular.
    pub singular_roots: u128,
    /// True when there is no root at all at the search depth, so no
    /// p-adic solution exists.
    pub definitive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HenselOutcome {
    Certified(LocalCertificate),
    NotFound(InsolubilityReport),
}

impl HenselOutcome {
    pub fn certificate(&self) -> Option<&LocalCertificate> {
        match self {
            HenselOutcome::Certified(c) => Some(c),
            HenselOutcome::NotFound(_) => None,
        }
    }
}

/// A polynomial over the ring of integers of k with its partial derivatives,
/// compiled for integer evaluation in omega-coordinates.
pub struct CompiledSystem {
    arity: usize,
    f: IntPoly,
    partials: Vec<IntPoly>,
}

impl CompiledSystem {
    pub fn new(field: &FieldSpec, poly: &Poly) -> Result<Self> {
        let f = poly.flatten(field)?.compile()?;
        let partials = (0..poly.nvars())
            .map(|v| poly.derivative(v).flatten(field)?.compile())
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledSystem {
            arity: poly.nvars(),
            f,
            partials,
        })
    }

    fn flat(&self, point: &[Vec<i128>]) -> Result<Vec<i64>> {
        point
            .iter()
            .flatten()
            .map(|&c| i64::try_from(c).map_err(|_| Error::Numerical("witness coordinate exceeds i64".into())))
            .collect()
    }

    pub fn value(&self, point: &[Vec<i128>]) -> Result<Vec<i128>> {
        Ok(self.f.eval(&self.flat(point)?))
    }

    pub fn partial(&self, v: usize, point: &[Vec<i128>]) -> Result<Vec<i128>> {
        Ok(self.partials[v].eval(&self.flat(point)?))
    }
}

/// Exact p-adic valuation of an integral element, capped.
pub fn valuation(field: &FieldSpec, prime: &IdealSpec, v: &[i128], cap: u32) -> Result<u32> {
    let mut power = prime.clone();
    let mut e = 0;
    while e < cap && power.contains(v) {
        e += 1;
        power = power.mul(field, prime)?;
    }
    Ok(e)
}

/// A root modulo p^depth with a partial derivative of valuation exactly
/// `delta`, where depth >= 2 delta + 1, so that it lifts.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchHit {
    pub point: Vec<Vec<i128>>,
    pub variable: usize,
    pub delta: u32,
    pub depth: u32,
}

/// Totals of a search over residue tuples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RootSearch {
    pub hit: Option<SearchHit>,
    pub examined: u128,
    /// Roots at the last completed depth without a suitable derivative.
    pub singular_roots: u128,
    /// Last depth searched exhaustively.
    pub completed_depth: u32,
}

/// Lexicographic search (first variable most significant) over the tuples
/// modulo p^d, d = max(2 delta + 1, e), that agree with `base` modulo p^e.
#[allow(clippy::too_many_arguments)]
fn search_at(
    field: &FieldSpec,
    sys: &CompiledSystem,
    prime: &IdealSpec,
    base: &[Vec<i128>],
    e: u32,
    delta: u32,
    budget: u128,
    strict: bool,
    acc: &mut RootSearch,
) -> Result<bool> {
    let d = (2 * delta + 1).max(e);
    let outer = prime.pow(field, e)?;
    let inner = prime.pow(field, d)?;
    let steps = outer.quotient_reps(&inner)?;
    let total = (steps.len() as u128).checked_pow(sys.arity as u32).unwrap_or(u128::MAX);
    let mut idx = vec![0usize; sys.arity];
    let shift = |v: usize, k: usize| -> Vec<i128> { base[v].iter().zip(&steps[k]).map(|(a, b)| a + b).collect() };
    let mut point: Vec<Vec<i128>> = (0..sys.arity).map(|v| shift(v, 0)).collect();
    let mut singular = 0u128;
    let mut examined = 0u128;
    loop {
        examined += 1;
        if acc.examined + examined > budget {
            if strict {
                return Err(Error::budget("residue search", acc.examined + total, budget));
            }
            acc.examined += examined - 1;
            return Ok(false);
        }
        if inner.contains(&sys.value(&point)?) {
            let mut chosen = None;
            for v in 0..sys.arity {
                let dv = sys.partial(v, &point)?;
                if valuation(field, prime, &dv, delta + 1)? == delta {
                    chosen = Some(v);
                    break;
                }
            }
            match chosen {
                Some(variable) => {
                    acc.examined += examined;
                    acc.hit = Some(SearchHit {
                        point,
                        variable,
                        delta,
                        depth: d,
                    });
                    return Ok(true);
                }
                None => singular += 1,
            }
        }
        let mut i = sys.arity;
        loop {
            if i == 0 {
                acc.examined += examined;
                acc.singular_roots = singular;
                acc.completed_depth = d;
                return Ok(true);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < steps.len() {
                point[i] = shift(i, idx[i]);
                break;
            }
            idx[i] = 0;
            point[i] = shift(i, 0);
        }
    }
}

/// Searches delta = 0, 1, ..., delta_cap in turn, stopping at the first
/// hit. Running out of budget is an error during the delta = 0 search and
/// ends the search otherwise.
pub fn nonsingular_root(
    field: &FieldSpec,
    sys: &CompiledSystem,
    prime: &IdealSpec,
    base: &[Vec<i128>],
    e: u32,
    delta_cap: u32,
    budget: u128,
) -> Result<RootSearch> {
    let mut acc = RootSearch::default();
    for delta in 0..=delta_cap {
        if (2 * delta + 1).max(e) == acc.completed_depth && delta > 0 {
            continue;
        }
        if !search_at(field, sys, prime, base, e, delta, budget, delta == 0, &mut acc)? || acc.hit.is_some() {
            break;
        }
        if acc.singular_roots == 0 {
            break;
        }
    }
    Ok(acc)
}

/// Lifts a root modulo p^from whose partial in `var` has valuation delta,
/// from >= 2 delta + 1, to a root modulo p^to. Step j adds the unique
/// t in p^(j - delta) / p^(j - delta + 1) that makes F vanish mod p^(j+1).
#[allow(clippy::too_many_arguments)]
pub fn hensel_lift(
    field: &FieldSpec,
    sys: &CompiledSystem,
    prime: &IdealSpec,
    mut point: Vec<Vec<i128>>,
    var: usize,
    delta: u32,
    from: u32,
    to: u32,
) -> Result<Vec<Vec<i128>>> {
    if from < 2 * delta + 1 {
        return Err(Error::InconsistentLocalData(format!(
            "depth {from} is too shallow for derivative valuation {delta}"
        )));
    }
    let mut power = prime.pow(field, from)?;
    if !power.contains(&sys.value(&point)?) {
        return Err(Error::InconsistentLocalData(format!(
            "starting point is not a root modulo p^{from}"
        )));
    }
    for j in from..to {
        let next = power.mul(field, prime)?;
        let lo = prime.pow(field, j - delta)?;
        let hi = lo.mul(field, prime)?;
        let mut found: Option<Vec<i128>> = None;
        for t in lo.quotient_reps(&hi)? {
            let mut cand = point.clone();
            for (c, d) in cand[var].iter_mut().zip(&t) {
                *c += d;
            }
            if next.contains(&sys.value(&cand)?) {
                if found.is_some() {
                    return Err(Error::Invariant(format!("Hensel step {j} -> {} is not unique", j + 1)));
                }
                found = Some(cand[var].clone());
            }
        }
        let lifted = found.ok_or_else(|| Error::Invariant(format!("Hensel step {j} -> {} has no solution", j + 1)))?;
        point[var] = lifted;
        for c in point.iter_mut() {
            next.reduce_in_place(c);
        }
        power = next;
    }
    Ok(point)
}

/// Largest e with p^e dividing the congruence ideal.
pub fn congruence_depth(prime: &IdealSpec, inst: &EquationInstance) -> Result<u32> {
    if inst.modulus.is_unit() {
        return Ok(0);
    }
    prime.valuation_of(&inst.field, &inst.modulus, 64)
}

pub const DELTA_CAP: u32 = 3;

/// A nonsingular root of F modulo p^j (j >= j_target) that lifts to a
/// p-adic solution. For p dividing the congruence ideal the witness
/// refines the prescribed residues modulo the p-part.
pub fn hensel_certify(
    prime: &IdealSpec,
    inst: &EquationInstance,
    j_target: u32,
    budget: u128,
) -> Result<HenselOutcome> {
    let field = &inst.field;
    prime.require_prime(field, budget)?;
    let p = prime.residue_characteristic().unwrap_or(0);
    let sys = CompiledSystem::new(field, inst.form.poly())?;
    let e = congruence_depth(prime, inst)?;
    let base: Vec<Vec<i128>> = if e > 0 {
        inst.residues.all().iter().map(|x| x.numerators().to_vec()).collect()
    } else {
        vec![vec![0; inst.m()]; inst.arity()]
    };
    let search = nonsingular_root(field, &sys, prime, &base, e, DELTA_CAP, budget)?;
    let Some(hit) = search.hit else {
        return Ok(HenselOutcome::NotFound(InsolubilityReport {
            p,
            prime: prime.clone(),
            search_depth: search.completed_depth,
            examined: search.examined,
            singular_roots: search.singular_roots,
            definitive: search.singular_roots == 0,
        }));
    };
    let depth = j_target.max(hit.depth);
    let witness = hensel_lift(field, &sys, prime, hit.point, hit.variable, hit.delta, hit.depth, depth)?;
    let derivative = sys.partial(hit.variable, &witness)?;
    Ok(HenselOutcome::Certified(LocalCertificate {
        place: Place::Finite {
            p,
            prime: prime.clone(),
        },
        witness: Witness::Residues { coords: witness },
        evidence: Evidence::Partial {
            variable: hit.variable,
            derivative,
            valuation: hit.delta,
        },
        depth,
    }))
}

/// Exact replay of a finite-place certificate.
pub(super) fn replay_finite(
    cert: &LocalCertificate,
    prime: &IdealSpec,
    coords: &[Vec<i128>],
    inst: &EquationInstance,
) -> Result<()> {
    let field = &inst.field;
    let Evidence::Partial {
        variable,
        derivative,
        valuation: delta,
    } = &cert.evidence
    else {
        return Err(Error::InconsistentLocalData(
            "finite place needs a partial derivative".into(),
        ));
    };
    if cert.depth < 2 * delta + 1 {
        return Err(Error::InconsistentLocalData(
            "depth too shallow for the stated valuation".into(),
        ));
    }
    if coords.len() != inst.arity() || coords.iter().any(|c| c.len() != inst.m()) || *variable >= inst.arity() {
        return Err(Error::InconsistentLocalData(
            "witness shape does not match the instance".into(),
        ));
    }
    let point: Vec<FieldElement> = coords.iter().map(|c| FieldElement::from_i128(c.clone())).collect();
    let f = inst.form.poly();
    let value = f.eval(field, &point)?;
    let power = prime.pow(field, cert.depth)?;
    if !power.contains_element(&value) {
        return Err(Error::InconsistentLocalData(format!(
            "F(witness) is not zero modulo p^{}",
            cert.depth
        )));
    }
    let d = f.derivative(*variable).eval(field, &point)?;
    if d.numerators() != derivative.as_slice() || d.denominator() != 1 {
        return Err(Error::InconsistentLocalData("stated derivative does not match".into()));
    }
    if valuation(field, prime, d.numerators(), delta + 1)? != *delta {
        return Err(Error::InconsistentLocalData(
            "stated derivative has a different valuation".into(),
        ));
    }
    let e = congruence_depth(prime, inst)?;
    if e > 0 {
        let pe = prime.pow(field, e.min(cert.depth))?;
        for (w, r) in point.iter().zip(inst.residues.all()) {
            if !pe.contains_element(&w.sub(&r)?) {
                return Err(Error::InconsistentLocalData(
                    "witness does not refine the congruence residues".into(),
                ));
            }
        }
    }
    Ok(())
}
