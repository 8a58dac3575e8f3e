use super::boxes::enumerate_tuples;
use super::instance::EquationInstance;
use crate::algebra::{FieldElement, IntPoly};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountOptions {
    /// Cap on enumerated points plus hash probes.
    pub budget_points: u128,
    /// Number of explicit solutions to report (0 for none).
    pub witness_cap: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            budget_points: 1_000_000_000,
            witness_cap: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<i64>,
    pub y: Vec<i64>,
    pub z: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub p: f64,
    pub count: u128,
    pub elapsed_ms: f64,
    pub budget_hit: bool,
    /// Lattice points enumerated across the three factors.
    pub points: u128,
    /// Hash-table lookups performed.
    pub probes: u128,
    pub witnesses: Vec<Solution>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub rows: Vec<CountRow>,
}

/// The three enumerated factors of P B' with their congruence classes.
pub(crate) struct Sides {
    pub x: Vec<Vec<i64>>,
    pub y: Vec<Vec<i64>>,
    pub z: Vec<Vec<i64>>,
}

pub(crate) fn enumerate_sides(inst: &EquationInstance, p: f64, budget: u128) -> Result<Sides> {
    if !(p >= 1.0) {
        return Err(Error::InvalidSpec(format!("P = {p} must be at least 1")));
    }
    let r = &inst.residues;
    let x = enumerate_tuples(&inst.modulus, &r.x, &inst.bx.x, p, budget)?;
    let y = enumerate_tuples(&inst.modulus, &r.y, &inst.bx.y, p, budget)?;
    let z = enumerate_tuples(&inst.modulus, std::slice::from_ref(&r.z), &inst.bx.z, p, budget)?;
    let total = (x.len() + y.len() + z.len()) as u128;
    if total > budget {
        return Err(Error::budget("box points", total, budget));
    }
    Ok(Sides { x, y, z })
}

fn check_range(poly: &IntPoly, pts: &[Vec<i64>]) -> Result<()> {
    let r = pts
        .iter()
        .flat_map(|v| v.iter())
        .map(|c| c.unsigned_abs())
        .max()
        .unwrap_or(0) as f64;
    if poly.magnitude_bound(r.max(1.0)) > 1e35 {
        return Err(Error::Numerical("form values exceed exact integer range".into()));
    }
    Ok(())
}

/// Distinct values of `poly` over `pts` with multiplicities, sorted.
pub(crate) fn value_histogram(poly: &IntPoly, pts: &[Vec<i64>]) -> Result<Vec<(Vec<i128>, u64)>> {
    check_range(poly, pts)?;
    let mut h: HashMap<Vec<i128>, u64> = HashMap::new();
    let mut buf = vec![0i128; poly.outputs()];
    for x in pts {
        poly.eval_into(x, &mut buf);
        if let Some(c) = h.get_mut(buf.as_slice()) {
            *c += 1;
        } else {
            h.insert(buf.clone(), 1);
        }
    }
    let mut v: Vec<(Vec<i128>, u64)> = h.into_iter().collect();
    v.sort_unstable();
    Ok(v)
}

/// Exact number of (x, y, z) in P B' with the congruences and
/// aN(x) + bN(y) = z^n. The distinct values of bN(y) are indexed and then
/// probed with z^n - aN(x) for each pair of distinct values.
pub fn count_solutions(inst: &EquationInstance, p: f64, opts: &CountOptions) -> Result<CountRow> {
    let start = Instant::now();
    let budget = opts.budget_points;
    let sides = enumerate_sides(inst, p, budget)?;
    let points = (sides.x.len() + sides.y.len() + sides.z.len()) as u128;
    let hx = value_histogram(&inst.ax, &sides.x)?;
    let hy = value_histogram(&inst.by, &sides.y)?;
    let hz = value_histogram(&inst.zn, &sides.z)?;
    let probes = hx.len() as u128 * hz.len() as u128;
    if points + probes > budget {
        return Err(Error::budget("points and probes", points + probes, budget));
    }
    let index: HashMap<&[i128], u64> = hy.iter().map(|(k, c)| (k.as_slice(), *c)).collect();
    let m = inst.m();
    let count: u128 = hx
        .par_chunks(256)
        .map(|chunk| {
            let mut key = vec![0i128; m];
            let mut acc: u128 = 0;
            for (vx, cx) in chunk {
                for (vz, cz) in &hz {
                    for i in 0..m {
                        key[i] = vz[i] - vx[i];
                    }
                    if let Some(cy) = index.get(key.as_slice()) {
                        acc += *cx as u128 * *cy as u128 * *cz as u128;
                    }
                }
            }
            acc
        })
        .sum();
    let witnesses = if opts.witness_cap > 0 {
        collect_witnesses(inst, &sides, opts.witness_cap)
    } else {
        Vec::new()
    };
    Ok(CountRow {
        p,
        count,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        budget_hit: false,
        points,
        probes,
        witnesses,
    })
}

/// First solutions in enumeration order of x, then z, then y.
pub(crate) fn collect_witnesses(inst: &EquationInstance, sides: &Sides, cap: usize) -> Vec<Solution> {
    let mut by_value: HashMap<Vec<i128>, Vec<usize>> = HashMap::new();
    for (i, y) in sides.y.iter().enumerate() {
        by_value.entry(inst.by.eval(y)).or_default().push(i);
    }
    let zs: Vec<Vec<i128>> = sides.z.iter().map(|z| inst.zn.eval(z)).collect();
    let mut out = Vec::new();
    for x in &sides.x {
        let vx = inst.ax.eval(x);
        for (z, vz) in sides.z.iter().zip(&zs) {
            let key: Vec<i128> = vz.iter().zip(&vx).map(|(a, b)| a - b).collect();
            if let Some(ys) = by_value.get(&key) {
                for &iy in ys {
                    out.push(Solution {
                        x: x.clone(),
                        y: sides.y[iy].clone(),
                        z: z.clone(),
                    });
                    if out.len() >= cap {
                        return out;
                    }
                }
            }
        }
    }
    out
}

/// Direct triple loop with exact arithmetic in k, for cross-validation.
pub fn naive_count(inst: &EquationInstance, p: f64, budget: u128) -> Result<u128> {
    let sides = enumerate_sides(inst, p, budget)?;
    let triples = sides.x.len() as u128 * sides.y.len() as u128 * sides.z.len() as u128;
    if triples > budget {
        return Err(Error::budget("naive triples", triples, budget));
    }
    let k = &inst.field;
    let m = inst.m();
    let n = inst.n();
    let nf = inst.form.norm_form();
    let elems = |v: &[i64], s: usize| -> Vec<FieldElement> {
        (0..s)
            .map(|i| FieldElement::from_ints(&v[i * m..(i + 1) * m]))
            .collect()
    };
    let ax: Vec<FieldElement> = sides
        .x
        .iter()
        .map(|x| k.mul(&inst.a, &nf.eval(k, &elems(x, n))?))
        .collect::<Result<_>>()?;
    let by: Vec<FieldElement> = sides
        .y
        .iter()
        .map(|y| k.mul(&inst.b, &nf.eval(k, &elems(y, n))?))
        .collect::<Result<_>>()?;
    let zn: Vec<FieldElement> = sides
        .z
        .iter()
        .map(|z| k.pow(&FieldElement::from_ints(z), n as u32))
        .collect::<Result<_>>()?;
    let mut count = 0u128;
    for u in &ax {
        for v in &by {
            let s = u.add(v)?;
            for w in &zn {
                if &s == w {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}
