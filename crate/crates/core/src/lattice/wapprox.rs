use super::count::{collect_witnesses, enumerate_sides, Solution};
use super::instance::EquationInstance;
use crate::algebra::{AlgebraPoint, FieldElement};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Distance of one coordinate of a witness from its scaled target at one
/// infinite place, measured with the usual absolute value of k_v.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaceDistance {
    pub variable: usize,
    pub place: usize,
    pub distance: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub p: f64,
    pub eta: f64,
    pub solution: Solution,
    /// omega-coordinates of aN(x) + bN(y) - z^n; all zero for a solution.
    pub residual: Vec<i128>,
    pub congruences_hold: bool,
    pub distances: Vec<PlaceDistance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub p: f64,
    pub points: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionReport {
    pub tried: Vec<ScheduleStep>,
    pub stopped_by_budget: bool,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchOutcome {
    Found {
        certificate: WitnessCertificate,
        tried: Vec<ScheduleStep>,
    },
    Exhausted(ExhaustionReport),
}

/// P = p0, 2 p0, 4 p0, ... (`steps` values).
pub fn doubling_schedule(p0: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|i| p0 * 2f64.powi(i as i32)).collect()
}

/// Upper limit on the default schedule; the point budget normally stops it first.
pub const DEFAULT_SCHEDULE_STEPS: usize = 24;

pub fn check_local_data(inst: &EquationInstance) -> Result<()> {
    if !inst.residues_consistent()? {
        return Err(Error::InconsistentLocalData(
            "residues do not satisfy the equation modulo the congruence ideal".into(),
        ));
    }
    if !inst.residues_nonsingular()? {
        return Err(Error::InconsistentLocalData(
            "residues are singular modulo the congruence ideal".into(),
        ));
    }
    let v = inst.eval_real(&inst.targets);
    let scale = 1.0
        + inst
            .targets
            .iter()
            .fold(0.0f64, |a, t| a.max(t.abs()))
            .powi(inst.n() as i32);
    let residual = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let tol = 1e-9 * scale;
    if residual > tol {
        return Err(Error::CenterNotSolution { residual, tol });
    }
    Ok(())
}

/// Searches P B' for a solution along the schedule, returning the first one
/// (in enumeration order) with a certificate.
pub fn weak_approx_search(inst: &EquationInstance, schedule: &[f64], budget: u128) -> Result<SearchOutcome> {
    check_local_data(inst)?;
    let mut tried = Vec::new();
    for &p in schedule {
        let sides = match enumerate_sides(inst, p, budget) {
            Ok(s) => s,
            Err(Error::BudgetExceeded { .. }) => {
                return Ok(SearchOutcome::Exhausted(ExhaustionReport {
                    tried,
                    stopped_by_budget: true,
                    message: format!("point budget {budget} reached at P = {p}"),
                }))
            }
            Err(e) => return Err(e),
        };
        let points = (sides.x.len() + sides.y.len() + sides.z.len()) as u128;
        let work = sides.x.len() as u128 * sides.z.len() as u128 + points;
        if work > budget {
            return Ok(SearchOutcome::Exhausted(ExhaustionReport {
                tried,
                stopped_by_budget: true,
                message: format!("point budget {budget} reached at P = {p}"),
            }));
        }
        tried.push(ScheduleStep { p, points });
        if let Some(sol) = collect_witnesses(inst, &sides, 1).into_iter().next() {
            let certificate = certify_witness(inst, p, sol)?;
            if !certificate.distances.iter().all(|d| d.distance < d.bound) {
                return Err(Error::Invariant(
                    "box point violates the archimedean approximation".into(),
                ));
            }
            return Ok(SearchOutcome::Found { certificate, tried });
        }
    }
    Ok(SearchOutcome::Exhausted(ExhaustionReport {
        tried,
        stopped_by_budget: false,
        message: "schedule exhausted without a witness".into(),
    }))
}

pub fn certify_witness(inst: &EquationInstance, p: f64, sol: Solution) -> Result<WitnessCertificate> {
    let m = inst.m();
    let n = inst.n();
    let k = &inst.field;
    let vars: Vec<&[i64]> = (0..n)
        .map(|i| &sol.x[i * m..(i + 1) * m])
        .chain((0..n).map(|i| &sol.y[i * m..(i + 1) * m]))
        .chain(std::iter::once(sol.z.as_slice()))
        .collect();
    // exact value through arithmetic in k rather than the flattened form
    let nf = inst.form.norm_form();
    let elems = |s: &[&[i64]]| -> Vec<FieldElement> { s.iter().map(|v| FieldElement::from_ints(v)).collect() };
    let ax = k.mul(&inst.a, &nf.eval(k, &elems(&vars[..n]))?)?;
    let by = k.mul(&inst.b, &nf.eval(k, &elems(&vars[n..2 * n]))?)?;
    let zn = k.pow(&FieldElement::from_ints(vars[2 * n]), n as u32)?;
    let res = ax.add(&by)?.sub(&zn)?;
    let residual = res.numerators().to_vec();
    let shifts = inst.residues.all();
    let congruences_hold = vars.iter().zip(&shifts).all(|(v, r)| {
        let d: Vec<i128> = v.iter().zip(r.numerators()).map(|(a, b)| *a as i128 - b).collect();
        inst.modulus.contains(&d)
    });
    let mut distances = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        let target = &inst.targets[i * m..(i + 1) * m];
        let diff: Vec<f64> = v.iter().zip(target).map(|(&a, t)| a as f64 - p * t).collect();
        let pt = AlgebraPoint::from_coords(k, &diff);
        for (place, c) in pt.components().iter().enumerate() {
            distances.push(PlaceDistance {
                variable: i,
                place,
                distance: c.norm(),
                bound: p * inst.eta,
            });
        }
    }
    Ok(WitnessCertificate {
        p,
        eta: inst.eta,
        solution: sol,
        residual,
        congruences_hold,
        distances,
    })
}

/// Replays a certificate from scratch against the instance.
pub fn verify_witness(inst: &EquationInstance, cert: &WitnessCertificate) -> Result<()> {
    let again = certify_witness(inst, cert.p, cert.solution.clone())?;
    if again.residual.iter().any(|&r| r != 0) {
        return Err(Error::Invariant("witness does not satisfy the equation".into()));
    }
    if !again.congruences_hold {
        return Err(Error::Invariant("witness violates the congruence conditions".into()));
    }
    if let Some(d) = again.distances.iter().find(|d| !(d.distance < d.bound)) {
        return Err(Error::Invariant(format!(
            "variable {} at place {} is {} from its target (bound {})",
            d.variable, d.place, d.distance, d.bound
        )));
    }
    if again.residual != cert.residual || again.congruences_hold != cert.congruences_hold {
        return Err(Error::Invariant("certificate fields disagree with replay".into()));
    }
    Ok(())
}
