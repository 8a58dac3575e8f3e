//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use normcircle::algebra::{FieldElement, FieldSpec, IdealSpec, Shifts};
use normcircle::circle::{mean_value_check, minor_arc_scan, orthogonality_count, ScanOptions, SumIndex};
use normcircle::fixtures;
use normcircle::hl::{local_density, primes_up_to, singular_integral, singular_series, IntegralOptions, SeriesOptions};
use normcircle::lattice::{
    count_solutions, doubling_schedule, naive_count, verify_witness, weak_approx_search, CountOptions,
    EquationInstance, InstanceSpec, SearchOutcome, DEFAULT_SCHEDULE_STEPS,
};
use normcircle::local::certify_places;
use normcircle::numeric::substream;
use normcircle::selftest::{self, SelftestOptions};
use rand::Rng;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

const BUDGET: u128 = 2_000_000_000;
const SEED: u64 = 42;

type Verdict = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e(err: normcircle::Error) -> String {
    err.to_string()
}

fn count(inst: &EquationInstance, p: f64) -> Result<u128, String> {
    let opts = CountOptions {
        budget_points: BUDGET,
        witness_cap: 0,
    };
    count_solutions(inst, p, &opts).map(|r| r.count).map_err(e)
}

fn orthogonality() -> Verdict {
    let start = Instant::now();
    let inst = fixtures::gaussian();
    let mut parts = Vec::new();
    for p in [8.0, 12.0, 16.0] {
        let o = orthogonality_count(&inst, p, BUDGET).map_err(e)?.count;
        let c = count(&inst, p)?;
        if o != c {
            return Err(format!("P={p}: orthogonality {o}, count {c}"));
        }
        parts.push(format!("P={p}: {c}"));
    }
    let t = start.elapsed();
    ensure(
        t < Duration::from_secs(60),
        format!("{} in {:.1}s", parts.join(", "), t.as_secs_f64()),
    )
}

fn random_ints(rng: &mut impl Rng, len: usize, lo: i128, hi: i128) -> Vec<i128> {
    (0..len).map(|_| rng.random_range(lo..=hi)).collect()
}

/// K = k(sqrt(-c)) over k = Q or Q(sqrt 2), with rational integer a, b.
/// The centre lies on the real surface and the residues solve the
/// equation modulo q.
fn random_instance(rng: &mut impl Rng, k: FieldSpec) -> EquationInstance {
    let m = k.degree();
    let c = rng.random_range(1..=3i128);
    let (a, b) = (rng.random_range(1..=3i128), rng.random_range(1..=3i128));
    let norm = |u: i128, v: i128| u * u + c * v * v;
    let q = if m == 1 { rng.random_range(1..=3i128) } else { 1 };
    let (xr, yr, zr) = loop {
        let (x, y, z) = (
            random_ints(rng, 2, 0, 2),
            random_ints(rng, 2, 0, 2),
            rng.random_range(0..=2i128),
        );
        if (a * norm(x[0], x[1]) + b * norm(y[0], y[1]) - z * z).rem_euclid(q) == 0 {
            break (x, y, z);
        }
    };
    let embed = |v: i128| FieldElement::from_parts((0..m).map(|i| if i == 0 { v } else { 0 }).collect(), 1).unwrap();
    let centre: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let rhs = a as f64 * (centre[0].powi(2) + c as f64 * centre[1].powi(2))
        + b as f64 * (centre[2].powi(2) + c as f64 * centre[3].powi(2));
    let mut targets = vec![0.0; 5 * m];
    for (v, t) in centre.iter().chain([rhs.sqrt()].iter()).enumerate() {
        targets[v * m] = *t;
    }
    EquationInstance::new(InstanceSpec {
        a: k.integer(a),
        b: k.integer(b),
        modulus: IdealSpec::rational(&k, q).unwrap(),
        residues: Shifts {
            x: xr.iter().map(|&v| embed(v)).collect(),
            y: yr.iter().map(|&v| embed(v)).collect(),
            z: embed(zr),
        },
        ext: fixtures::power_extension(&k, &[c, 0, 1]),
        targets,
        eta: 0.5,
        rho: Some(if m == 1 { rng.random_range(0.2..0.4) } else { 0.2 }),
        field: k,
    })
    .unwrap()
}

fn counting_oracle() -> Verdict {
    let mut rng = substream(SEED, 2, 0);
    let mut parts = Vec::new();
    for i in 0..10 {
        let (k, p) = if i % 2 == 0 {
            (fixtures::rationals(), rng.random_range(8.0..=12.0))
        } else {
            (fixtures::q_sqrt2(), rng.random_range(8.0..=12.0))
        };
        let inst = random_instance(&mut rng, k);
        let fast = count(&inst, p)?;
        let slow = naive_count(&inst, p, BUDGET).map_err(e)?;
        if fast != slow {
            return Err(format!(
                "instance {i} at P={p:.3}: meet-in-the-middle {fast}, naive {slow}"
            ));
        }
        parts.push(fast);
    }
    let nonzero = parts.iter().filter(|&&c| c > 0).count();
    let counts: Vec<String> = parts.iter().map(u128::to_string).collect();
    ensure(nonzero >= 5, format!("10 instances agree, counts {}", counts.join(" ")))
}

fn asymptotic_ratio() -> Verdict {
    let start = Instant::now();
    let inst = fixtures::gaussian();
    let series = singular_series(&inst, &SeriesOptions::default()).map_err(e)?;
    let integral = singular_integral(
        &inst,
        &IntegralOptions {
            seed: SEED,
            ..IntegralOptions::default()
        },
    )
    .map_err(e)?;
    let mut ok = true;
    let mut parts = vec![format!("S={:.4} J={:.6}", series.value(), integral.value)];
    for p in [200.0, 400.0] {
        let c = count(&inst, p)?;
        let ratio = c as f64 / (series.value() * integral.value * p.powi(3));
        ok &= (0.85..=1.15).contains(&ratio);
        parts.push(format!("P={p}: {c} ratio {ratio:.4}"));
    }
    let t = start.elapsed();
    parts.push(format!("{:.1}s", t.as_secs_f64()));
    ensure(ok && t < Duration::from_secs(600), parts.join(", "))
}

/// Solutions of x1^2 + x2^2 + y1^2 + y2^2 = z^2 mod q, by direct enumeration.
fn brute_density(q: i64) -> f64 {
    let mut roots = vec![0u64; q as usize];
    for z in 0..q {
        roots[(z * z % q) as usize] += 1;
    }
    let mut total = 0u64;
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    total += roots[((a * a + b * b + c * c + d * d) % q) as usize];
                }
            }
        }
    }
    total as f64 / (q as f64).powi(4)
}

fn density_stabilization() -> Verdict {
    let inst = fixtures::gaussian();
    let s = singular_series(&inst, &SeriesOptions::default()).map_err(e)?;
    let ps: Vec<i128> = s.per_prime.iter().map(|d| d.p).collect();
    if ps != primes_up_to(50) {
        return Err(format!("primes {ps:?}"));
    }
    let worst = s.per_prime.iter().map(|d| d.last_step()).fold(0.0, f64::max);
    if !(s.all_converged && worst < 1e-3) {
        return Err(format!("largest last step {worst:e}"));
    }
    for p in [3i128, 5, 7] {
        let ideal = IdealSpec::rational(&inst.field, p).map_err(e)?;
        let d = local_density(&ideal, 2, &inst, BUDGET).map_err(e)?;
        for j in 1..=2u32 {
            let level = &d.levels[j as usize];
            let oracle = brute_density((p as i64).pow(j));
            let sum = level.exp_sum.unwrap_or(f64::NAN);
            if level.density != oracle || (sum - oracle).abs() > 1e-9 * oracle {
                return Err(format!(
                    "p={p} j={j}: counting {} exp-sum {sum} direct {oracle}",
                    level.density
                ));
            }
        }
    }
    Ok(format!(
        "{} primes, largest last step {worst:.2e}; identity exact for p=3,5,7 j<=2",
        ps.len()
    ))
}

fn minor_arc_exponent() -> Verdict {
    let s = minor_arc_scan(
        &fixtures::gaussian(),
        &ScanOptions {
            ps: vec![64.0, 128.0, 256.0, 512.0],
            theta: 0.3,
            samples: 1000,
            seed: SEED,
            constant: 1.0,
            budget: BUDGET,
        },
    )
    .map_err(e)?;
    let x = s.exponent.ok_or("no exponent fitted")?;
    ensure(x <= 0.9, format!("exponent {x:.4}"))
}

fn mean_value_exponent() -> Verdict {
    let r = mean_value_check(&fixtures::gaussian(), SumIndex::S1, &[8.0, 16.0, 32.0, 64.0], BUDGET).map_err(e)?;
    let x = r.exponent.ok_or("no exponent fitted")?;
    ensure(x <= 2.3, format!("exponent {x:.4}"))
}

fn algebra_suite() -> Verdict {
    let opts = SelftestOptions {
        seed: SEED,
        ..SelftestOptions::default()
    };
    let mut checks = Vec::new();
    for (i, (label, k)) in fixtures::named_fields().into_iter().enumerate() {
        checks.extend(selftest::algebra_checks(label, &k, &opts, i as u64));
    }
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    let min_trials = checks.iter().map(|c| c.trials).min().unwrap_or(0);
    ensure(
        failed.is_empty() && min_trials >= 200,
        format!(
            "{} checks, {} failed {failed:?}, at least {min_trials} trials each",
            checks.len(),
            failed.len()
        ),
    )
}

fn witness_search() -> Verdict {
    let inst = fixtures::gaussian_wapprox();
    let schedule = doubling_schedule(8.0, DEFAULT_SCHEDULE_STEPS);
    match weak_approx_search(&inst, &schedule, BUDGET).map_err(e)? {
        SearchOutcome::Found { certificate, .. } => {
            verify_witness(&inst, &certificate).map_err(e)?;
            let s = &certificate.solution;
            let exact = inst.eval_exact(&s.x, &s.y, &s.z);
            ensure(
                exact.iter().all(|&v| v == 0) && certificate.congruences_hold,
                format!("P={} x={:?} y={:?} z={:?}, replayed", certificate.p, s.x, s.y, s.z),
            )
        }
        SearchOutcome::Exhausted(r) => Err(r.message),
    }
}

fn positivity_linkage() -> Verdict {
    let family = [
        ("gaussian", fixtures::gaussian()),
        ("gaussian-wapprox", fixtures::gaussian_wapprox()),
        ("cube-root-two", fixtures::cube_root_two()),
        ("sqrt2-gaussian", fixtures::sqrt2_gaussian(None)),
        ("vanishing-series", fixtures::vanishing_series()),
    ];
    let mut parts = Vec::new();
    for (name, inst) in family {
        let survey = certify_places(&inst, 50, 3, SeriesOptions::default().budget).map_err(e)?;
        if !survey.all_certified() {
            parts.push(format!("{name}: not all certified"));
            continue;
        }
        let s = singular_series(&inst, &SeriesOptions::default()).map_err(e)?;
        let j = singular_integral(
            &inst,
            &IntegralOptions {
                samples: 1 << 17,
                seed: SEED,
                ..IntegralOptions::default()
            },
        )
        .map_err(e)?;
        let min_mu = s.per_prime.iter().map(|d| d.value).fold(f64::INFINITY, f64::min);
        if !(min_mu > 0.0 && j.value > 0.0) {
            return Err(format!("{name}: min mu {min_mu}, J {}", j.value));
        }
        parts.push(format!("{name}: min mu {min_mu:.4}, J {:.3e}", j.value));
    }
    Ok(parts.join("; "))
}

fn artifacts(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut v = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|x| x.to_string())? {
        let entry = entry.map_err(|x| x.to_string())?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name != "timings.json" {
            v.push((name, std::fs::read(entry.path()).map_err(|x| x.to_string())?));
        }
    }
    v.sort();
    Ok(v)
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|x| x.to_string())?;
    let mut runs = Vec::new();
    for name in ["first", "second"] {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_normcircle"))
            .args(["selftest", "--jobs", "1", "--seed", "42", "--out"])
            .arg(&out)
            .env_remove("NORMCIRCLE_CONFIG")
            .status()
            .map_err(|x| x.to_string())?;
        if !status.success() {
            return Err(format!("selftest exited with {status}"));
        }
        runs.push(artifacts(&out)?);
    }
    let names: Vec<_> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    ensure(
        runs[0] == runs[1],
        format!("{} identical artifacts {names:?}", names.len()),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        ("orthogonality oracle", orthogonality),
        ("counting oracle", counting_oracle),
        ("asymptotic ratio", asymptotic_ratio),
        ("local density stabilization", density_stabilization),
        ("minor-arc exponent", minor_arc_exponent),
        ("mean-value exponent", mean_value_exponent),
        ("algebra property suite", algebra_suite),
        ("witness search", witness_search),
        ("positivity linkage", positivity_linkage),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(d) => println!("PASS {:>2} {name}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
