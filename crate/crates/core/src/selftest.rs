//! Seeded invariant checks over the built-in fields and instances.

use crate::algebra::{
    build_norm_form, denominator_ideal, product_constant, AlgebraPoint, FieldElement, FieldSpec, IdealSpec,
};
use crate::circle::{eval_exp_sum, orthogonality_count, SumIndex};
use crate::error::Result;
use crate::fixtures;
use crate::lattice::{count_solutions, naive_count, CountOptions, EquationInstance};
use crate::local::{hensel_certify, real_place_certify};
use crate::numeric::substream;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub trials: u64,
    /// First failure, or empty.
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Random trials per field and property.
    pub trials: u64,
    pub budget: u128,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            seed: 42,
            trials: 200,
            budget: 50_000_000,
        }
    }
}

type Outcome = std::result::Result<(), String>;

fn run_trials(name: String, trials: u64, mut body: impl FnMut(u64) -> Outcome) -> Check {
    for t in 0..trials {
        if let Err(detail) = body(t) {
            return Check {
                name,
                passed: false,
                trials: t + 1,
                detail,
            };
        }
    }
    Check {
        name,
        passed: true,
        trials,
        detail: String::new(),
    }
}

fn single(name: &str, body: impl FnOnce() -> Result<Outcome>) -> Check {
    let outcome = body().unwrap_or_else(|e| Err(e.to_string()));
    Check {
        name: name.to_string(),
        passed: outcome.is_ok(),
        trials: 1,
        detail: outcome.err().unwrap_or_default(),
    }
}

fn random_element(rng: &mut ChaCha8Rng, m: usize) -> FieldElement {
    let v: Vec<i64> = (0..m).map(|_| rng.random_range(-20i64..=20)).collect();
    FieldElement::from_ints(&v)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: crate::Error) -> String {
    e.to_string()
}

/// The six algebra properties on one field.
pub fn algebra_checks(label: &str, k: &FieldSpec, opts: &SelftestOptions, stream: u64) -> Vec<Check> {
    let m = k.degree();
    let n = opts.trials;
    let rng = |p: u64| substream(opts.seed, stream * 16 + p, 0);
    let mut out = Vec::new();

    let ext = fixtures::power_extension(k, &[-1, -1, 0, 1]);
    let mut r = rng(0);
    out.push(match build_norm_form(k, &ext) {
        Err(e) => Check {
            name: format!("{label}: norm multiplicativity"),
            passed: false,
            trials: 0,
            detail: e.to_string(),
        },
        Ok(nf) => run_trials(format!("{label}: norm multiplicativity"), n, |_| {
            let xs: Vec<FieldElement> = (0..3).map(|_| random_element(&mut r, m)).collect();
            let ys: Vec<FieldElement> = (0..3).map(|_| random_element(&mut r, m)).collect();
            let prod = ext.mul(k, &xs, &ys).map_err(err)?;
            let lhs = nf.eval(k, &prod).map_err(err)?;
            let rhs = k
                .mul(&nf.eval(k, &xs).map_err(err)?, &nf.eval(k, &ys).map_err(err)?)
                .map_err(err)?;
            ensure(lhs == rhs, || format!("N(xy) != N(x)N(y) at x = {xs:?}, y = {ys:?}"))
        }),
    });

    let mut r = rng(1);
    out.push(run_trials(format!("{label}: embedding is a ring map"), n, |_| {
        let u = random_element(&mut r, m);
        let v = random_element(&mut r, m);
        let eu = k.embed(&u).map_err(err)?.components();
        let ev = k.embed(&v).map_err(err)?.components();
        let euv = k.embed(&k.mul(&u, &v).map_err(err)?).map_err(err)?.components();
        let esum = k.embed(&u.add(&v).map_err(err)?).map_err(err)?.components();
        let scale = 1.0 + eu.iter().chain(&ev).map(|z| z.norm()).fold(0.0, f64::max).powi(2);
        for i in 0..eu.len() {
            ensure((euv[i] - eu[i] * ev[i]).norm() <= 1e-12 * scale, || {
                format!("product at place {i}, u = {u:?}")
            })?;
            ensure((esum[i] - eu[i] - ev[i]).norm() <= 1e-12 * scale, || {
                format!("sum at place {i}, u = {u:?}")
            })?;
        }
        Ok(())
    }));

    let mut r = rng(2);
    out.push(run_trials(format!("{label}: trace linearity"), n, |_| {
        let a = crate::algebra::Q::new(r.random_range(-20i128..=20), 3);
        let b = crate::algebra::Q::new(7, r.random_range(1i128..=20));
        let v = random_element(&mut r, m);
        let w = random_element(&mut r, m);
        let comb = v.scale(a).add(&w.scale(b)).map_err(err)?;
        let exact = k.trace(&comb).map_err(err)?;
        let split = a * k.trace(&v).map_err(err)? + b * k.trace(&w).map_err(err)?;
        ensure(exact == split, || format!("Tr not linear at {v:?}, {w:?}"))?;
        let numeric = k.embed(&comb).map_err(err)?.trace();
        let e = *exact.numer() as f64 / *exact.denom() as f64;
        ensure((numeric - e).abs() <= 1e-10 * (1.0 + e.abs()), || {
            format!("embedded trace {numeric} vs {e}")
        })
    }));

    let mut r = rng(3);
    out.push(run_trials(format!("{label}: norm compatibility"), n, |_| {
        let mut e = random_element(&mut r, m);
        if e.is_zero() {
            e = k.one();
        }
        let exact = k.norm(&e).map_err(err)?;
        let abs = (*exact.numer() as f64 / *exact.denom() as f64).abs();
        let numeric = k.embed(&e).map_err(err)?.norm();
        ensure((numeric - abs).abs() <= 1e-8 * abs, || {
            format!("embedded norm {numeric} vs {abs} at {e:?}")
        })?;
        let ideal = IdealSpec::principal(k, &e).map_err(err)?;
        ensure(
            crate::algebra::Q::from(ideal.norm()) == num_traits::Signed::abs(&exact),
            || format!("ideal norm {} vs |N(e)| at {e:?}", ideal.norm()),
        )
    }));

    let mut r = rng(4);
    let emb = k.embeddings();
    let (c, c1, c2) = (emb.height_constant(), product_constant(k), emb.norm_constant());
    out.push(run_trials(format!("{label}: archimedean constants"), n, |_| {
        let v: Vec<f64> = (0..m).map(|_| r.random_range(-5.0..5.0)).collect();
        let w: Vec<f64> = (0..m).map(|_| r.random_range(-5.0..5.0)).collect();
        let pv = AlgebraPoint::from_coords(k, &v);
        let pw = AlgebraPoint::from_coords(k, &w);
        let hv = pv.height();
        for z in pv.components() {
            ensure(z.norm() <= c * hv * (1.0 + 1e-12), || format!("|v_i| > c |v| at {v:?}"))?;
        }
        let vw = pv.mul(k, &pw).map_err(err)?;
        ensure(vw.height() <= c1 * hv * pw.height() * (1.0 + 1e-9), || {
            format!("|vw| bound at {v:?}, {w:?}")
        })?;
        ensure(pv.norm() <= c2 * hv.powi(m as i32) * (1.0 + 1e-12), || {
            format!("norm bound at {v:?}")
        })
    }));

    let mut r = rng(5);
    out.push(run_trials(format!("{label}: denominator ideals"), n, |t| {
        let g = [1i128, 2, 3][(t % 3) as usize];
        let modulus = IdealSpec::rational(k, g).map_err(err)?;
        let mut mu = random_element(&mut r, m);
        if mu.is_zero() {
            mu = k.one();
        }
        let lambda = random_element(&mut r, m).scale_int(g);
        let a = denominator_ideal(k, &lambda, &mu, &modulus).map_err(err)?;
        let gamma = k.div(&lambda, &mu).map_err(err)?;
        for row in a.basis() {
            let kappa = FieldElement::from_i128(row.clone());
            ensure(modulus.contains_element(&k.mul(&kappa, &gamma).map_err(err)?), || {
                format!("kappa gamma outside n for gamma = {gamma:?}")
            })?;
            for i in 0..m {
                let t = k.mul(&kappa, &FieldElement::basis(m, i)).map_err(err)?;
                ensure(a.contains_element(&t), || {
                    format!("not closed under w{i} for gamma = {gamma:?}")
                })?;
            }
        }
        for i in 0..m {
            let t = k.mul(&mu, &FieldElement::basis(m, i)).map_err(err)?;
            ensure(a.contains_element(&t), || {
                format!("<mu> not inside for gamma = {gamma:?}")
            })?;
        }
        Ok(())
    }));
    out
}

/// Counting, orthogonality, exponential-sum and certificate checks on one
/// instance.
pub fn instance_checks(label: &str, inst: &EquationInstance, small_p: &[f64], opts: &SelftestOptions) -> Vec<Check> {
    let budget = opts.budget;
    let count_opts = CountOptions {
        budget_points: budget,
        witness_cap: 0,
    };
    let mut out = Vec::new();
    out.push(single(&format!("{label}: meet-in-the-middle equals naive"), || {
        for &p in small_p {
            let fast = count_solutions(inst, p, &count_opts)?.count;
            let slow = naive_count(inst, p, budget)?;
            if fast != slow {
                return Ok(Err(format!("P = {p}: {fast} vs {slow}")));
            }
        }
        Ok(Ok(()))
    }));
    out.push(single(&format!("{label}: orthogonality equals count"), || {
        for &p in small_p {
            let direct = count_solutions(inst, p, &count_opts)?.count;
            let integral = orthogonality_count(inst, p, budget)?.count;
            if direct != integral {
                return Ok(Err(format!("P = {p}: {integral} vs {direct}")));
            }
        }
        Ok(Ok(()))
    }));
    let p = small_p.last().copied().unwrap_or(8.0);
    let mut r = substream(opts.seed, 1000, 0);
    let m = inst.m();
    out.push(run_trials(
        format!("{label}: exponential sums bounded and conjugate"),
        opts.trials / 10,
        |_| {
            let alpha: Vec<f64> = (0..m).map(|_| r.random::<f64>()).collect();
            let neg: Vec<f64> = alpha.iter().map(|a| -a).collect();
            for j in [SumIndex::S1, SumIndex::S2, SumIndex::S3] {
                let s = eval_exp_sum(j, &alpha, inst, p, budget).map_err(err)?;
                let t = eval_exp_sum(j, &neg, inst, p, budget).map_err(err)?;
                ensure(s.value.norm() <= s.summands as f64 * (1.0 + 1e-12), || {
                    format!("|S{}| exceeds {} at {alpha:?}", j.index(), s.summands)
                })?;
                ensure(
                    (s.value - t.value.conj()).norm() <= 1e-12 * (1.0 + s.summands as f64),
                    || format!("S{}(-a) is not conj S{}(a) at {alpha:?}", j.index(), j.index()),
                )?;
            }
            Ok(())
        },
    ));
    out.push(single(&format!("{label}: local certificates replay"), || {
        for q in crate::hl::primes_up_to(13) {
            for (prime, _) in IdealSpec::primes_above(&inst.field, q, budget)? {
                if let Some(cert) = hensel_certify(&prime, inst, 3, budget)?.certificate() {
                    cert.replay(inst)?;
                }
            }
        }
        for cert in real_place_certify(inst)? {
            cert.replay(inst)?;
        }
        Ok(Ok(()))
    }));
    out
}

/// The full suite: algebra properties on the four built-in fields, then
/// instance invariants on the Q(i) and Q(cbrt 2) fixtures.
pub fn run(opts: &SelftestOptions) -> Vec<Check> {
    let mut out = Vec::new();
    for (i, (label, k)) in fixtures::named_fields().into_iter().enumerate() {
        out.extend(algebra_checks(label, &k, opts, i as u64));
    }
    out.extend(instance_checks("Q(i)", &fixtures::gaussian(), &[4.0, 8.0, 12.0], opts));
    out.extend(instance_checks(
        "Q(cbrt2)",
        &fixtures::cube_root_two(),
        &[4.0, 8.0],
        opts,
    ));
    out
}
