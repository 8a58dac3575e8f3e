use normcircle::algebra::{FieldElement, IdealSpec, Shifts};
use normcircle::circle::*;
use normcircle::fixtures;
use normcircle::lattice::{count_solutions, naive_count, CountOptions, EquationInstance, InstanceSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;

const BUDGET: u128 = 50_000_000;

fn gaussian_with(targets: Vec<f64>, rho: f64) -> EquationInstance {
    let k = fixtures::rationals();
    let ext = fixtures::adjoin_i(&k);
    EquationInstance::new(InstanceSpec {
        a: k.one(),
        b: k.one(),
        modulus: IdealSpec::unit(1),
        residues: Shifts::zero(2, 1),
        targets,
        eta: 0.5,
        rho: Some(rho),
        field: k,
        ext,
    })
    .unwrap()
}

fn params(p: f64, theta: f64) -> ArcParams {
    ArcParams {
        p,
        theta,
        n: 2,
        constant: 1.0,
    }
}

#[test]
fn zero_phase_counts_summands() {
    let inst = fixtures::gaussian();
    for j in [SumIndex::S1, SumIndex::S2, SumIndex::S3] {
        let s = eval_exp_sum(j, &[0.0], &inst, 20.0, BUDGET).unwrap();
        assert_eq!(s.value.re, s.summands as f64);
        assert_eq!(s.value.im, 0.0);
    }
}

#[test]
fn nine_term_quadratic_sum() {
    let inst = gaussian_with(vec![0.6, 0.8, 0.0, 0.0, 0.5], 0.5);
    let s = eval_exp_sum(SumIndex::S3, &[0.25], &inst, 10.0, BUDGET).unwrap();
    assert_eq!(s.summands, 9);
    let direct: Complex64 = (1..=9)
        .map(|z: i64| Complex64::from_polar(1.0, TAU * (z * z) as f64 / 4.0))
        .sum();
    assert!((s.value - direct).norm() < 1e-12, "{} vs {}", s.value, direct);
}

#[test]
fn conjugate_symmetry() {
    let inst = fixtures::sqrt2_gaussian(None);
    let alpha = [0.123456, 0.7654321];
    let neg = [-alpha[0], -alpha[1]];
    for j in [SumIndex::S1, SumIndex::S2, SumIndex::S3] {
        let a = eval_exp_sum(j, &alpha, &inst, 12.0, BUDGET).unwrap().value;
        let b = eval_exp_sum(j, &neg, &inst, 12.0, BUDGET).unwrap().value;
        assert!((a - b.conj()).norm() < 1e-12);
    }
}

#[test]
fn integer_period() {
    let inst = fixtures::gaussian();
    let f = Frequencies::collect(&inst, SumIndex::S1, 40.0, BUDGET).unwrap();
    let alpha = 314_159.0 / (1u64 << 20) as f64;
    let a = f.eval(&[alpha]);
    let b = f.eval(&[alpha + 1.0]);
    let c = f.eval(&[alpha - 3.0]);
    assert!((a - b).norm() < 1e-12);
    assert!((a - c).norm() < 1e-12);
}

#[test]
fn bad_sum_index() {
    assert!(SumIndex::from_index(0).is_err());
    assert_eq!(SumIndex::from_index(2).unwrap(), SumIndex::S2);
}

#[test]
fn classify_near_third() {
    let k = fixtures::rationals();
    let arc = classify_arc(&[1.0 / 3.0 + 1e-5], &params(100.0, 0.3), &k, &IdealSpec::unit(1)).unwrap();
    assert_eq!(arc.label, ArcLabel::Major);
    let g = arc.approximant.unwrap();
    assert_eq!(g.gamma, FieldElement::from_rationals(&[num_rational::Ratio::new(1, 3)]));
    assert_eq!(g.denom_norm, 3);
}

#[test]
fn classify_golden_ratio_minor() {
    let k = fixtures::rationals();
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let p = params(100.0, 0.3);
    let arc = classify_arc(&[phi], &p, &k, &IdealSpec::unit(1)).unwrap();
    assert_eq!(arc.label, ArcLabel::Minor);
    // independent check over every denominator up to the bound
    let r = p.radius(1);
    for q in 1..=(p.norm_bound(1) as i64) {
        for a in 0..=q {
            assert!((phi - a as f64 / q as f64).abs() > r);
        }
    }
}

#[test]
fn classify_exact_rational() {
    let k = fixtures::rationals();
    let arc = classify_arc(&[0.5], &params(100.0, 0.3), &k, &IdealSpec::unit(1)).unwrap();
    let g = arc.approximant.unwrap();
    assert_eq!(g.denom_norm, 2);
    assert_eq!(g.distance, 0.0);
}

#[test]
fn classify_with_modulus() {
    // with n = (3), gamma = 1/2 has denominator ideal (6)
    let k = fixtures::rationals();
    let n3 = IdealSpec::rational(&k, 3).unwrap();
    let arc = classify_arc(&[0.5], &params(1000.0, 0.3), &k, &n3).unwrap();
    let g = arc.approximant.unwrap();
    assert_eq!(g.denom_norm, 6);
    let none = classify_arc(&[0.5], &params(100.0, 0.3), &k, &n3).unwrap();
    assert_eq!(none.label, ArcLabel::Minor);
}

#[test]
fn classify_gaussian_field() {
    let k = fixtures::q_i();
    let unit = IdealSpec::unit(2);
    let arc = classify_arc(&[0.5, 0.0], &params(100.0, 0.3), &k, &unit).unwrap();
    assert_eq!(arc.label, ArcLabel::Major);
    let g = arc.approximant.unwrap();
    assert_eq!(g.distance, 0.0);
    assert_eq!(g.denom_norm, 4);
    // (1 + i)/2 has denominator (1 + i), norm 2
    let arc = classify_arc(&[0.5, 0.5 + 1e-6], &params(100.0, 0.3), &k, &unit).unwrap();
    assert_eq!(arc.approximant.unwrap().denom_norm, 2);
    let zero = classify_arc(&[0.0, 0.0], &params(100.0, 0.3), &k, &unit).unwrap();
    assert_eq!(zero.approximant.unwrap().denom_norm, 1);
}

#[test]
fn orthogonality_matches_direct_count() {
    let inst = fixtures::gaussian();
    for p in [8.0, 12.0, 16.0] {
        let r = orthogonality_check(&inst, p, BUDGET).unwrap();
        assert!(r.rounding < 1e-6);
    }
    let r = orthogonality_count(&inst, 50.0, BUDGET).unwrap();
    assert_eq!(r.count, 2711);
}

#[test]
fn orthogonality_on_sqrt2() {
    let inst = fixtures::sqrt2_gaussian(Some(0.15));
    for p in [6.0, 10.0] {
        let o = orthogonality_count(&inst, p, BUDGET).unwrap().count;
        assert_eq!(o, naive_count(&inst, p, BUDGET).unwrap());
    }
}

#[test]
fn orthogonality_empty_box() {
    let inst = fixtures::gaussian();
    assert_eq!(orthogonality_count(&inst, 1.0, BUDGET).unwrap().count, 0);
}

#[test]
fn orthogonality_without_solutions() {
    let inst = gaussian_with(vec![0.6, 0.8, 0.0, 0.0, 0.1], 0.05);
    let p = 10.0;
    assert_eq!(naive_count(&inst, p, BUDGET).unwrap(), 0);
    let r = orthogonality_count(&inst, p, BUDGET).unwrap();
    assert_eq!(r.count, 0);
    assert_eq!(count_solutions(&inst, p, &CountOptions::default()).unwrap().count, 0);
}

#[test]
fn orthogonality_budget() {
    let inst = fixtures::gaussian();
    assert!(matches!(
        orthogonality_count(&inst, 200.0, 1000),
        Err(normcircle::Error::BudgetExceeded { .. })
    ));
}

#[test]
fn mean_value_single_summand() {
    let inst = fixtures::gaussian();
    let r = mean_value_check(&inst, SumIndex::S1, &[2.0], BUDGET).unwrap();
    assert_eq!(r.rows[0].summands, 1);
    assert_eq!(r.rows[0].integral, 1);
}

#[test]
fn mean_value_matches_pair_count() {
    // box factor for x at P = 16: x1 in (5.6, 13.6), x2 in (8.8, 16.8)
    let inst = fixtures::gaussian();
    let f = Frequencies::collect(&inst, SumIndex::S1, 16.0, BUDGET).unwrap();
    let values: Vec<i64> = (6..=13)
        .flat_map(|a: i64| (9..=16).map(move |b: i64| a * a + b * b))
        .collect();
    let mut pairs = 0u128;
    for a in &values {
        for b in &values {
            pairs += (a == b) as u128;
        }
    }
    assert_eq!(f.summands, 64);
    assert_eq!(f.coincidences(), pairs);
}

#[test]
fn mean_value_exponent() {
    let inst = fixtures::gaussian();
    let r = mean_value_check(&inst, SumIndex::S1, &[8.0, 16.0, 32.0, 64.0], BUDGET).unwrap();
    let e = r.exponent.unwrap();
    assert!(e <= r.bound + 0.3, "exponent {e}");
    assert!(mean_value_check(&inst, SumIndex::S3, &[8.0], BUDGET).is_err());
}

fn scan_opts(samples: usize) -> ScanOptions {
    ScanOptions {
        ps: vec![64.0, 128.0],
        theta: 0.3,
        samples,
        seed: 7,
        constant: 1.0,
        budget: BUDGET,
    }
}

#[test]
fn scan_is_monotone_in_samples() {
    let inst = fixtures::gaussian();
    let a = minor_arc_scan(&inst, &scan_opts(500)).unwrap();
    let b = minor_arc_scan(&inst, &scan_opts(1000)).unwrap();
    for (x, y) in a.maxima.iter().zip(&b.maxima) {
        assert!(y.max_abs_s3 >= x.max_abs_s3);
    }
    assert_eq!(&b.samples[..500], &a.samples[..500]);
}

#[test]
fn scan_samples_are_reproducible() {
    assert_eq!(sample_points(3, 2, 100), sample_points(3, 2, 100));
    let big = sample_points(3, 1, 20_000);
    assert_eq!(&big[..100], &sample_points(3, 1, 100)[..]);
}

#[test]
fn scan_minor_exponent_below_one() {
    let inst = fixtures::gaussian();
    let opts = ScanOptions {
        ps: vec![64.0, 128.0, 256.0, 512.0],
        samples: 1000,
        ..scan_opts(1000)
    };
    let s = minor_arc_scan(&inst, &opts).unwrap();
    assert!(s.exponent.unwrap() < 0.9, "{:?}", s.exponent);
    for row in &s.samples {
        if row.arc.label == ArcLabel::Major {
            let g = row.arc.approximant.as_ref().unwrap();
            assert!(verify_major(&row.arc.alpha, g, row.arc.norm_bound, row.arc.radius));
        }
    }
}

#[test]
fn scan_rejects_incompatible_duality() {
    let inst = fixtures::sqrt2_gaussian(None);
    assert!(matches!(
        minor_arc_scan(&inst, &scan_opts(10)),
        Err(normcircle::Error::DualityIncompatible)
    ));
}

#[test]
fn arc_measure_decreases() {
    let unit = IdealSpec::unit(1);
    let mut last = f64::INFINITY;
    for p in [16.0, 64.0, 256.0, 1024.0, 4096.0] {
        let mu = arc_measure(&params(p, 0.3), &unit).unwrap();
        assert!(mu < last, "P = {p}: {mu} >= {last}");
        last = mu;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sums_bounded_by_summands(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let inst = fixtures::sqrt2_gaussian(None);
        for j in [SumIndex::S1, SumIndex::S3] {
            let s = eval_exp_sum(j, &[a, b], &inst, 10.0, BUDGET).unwrap();
            prop_assert!(s.value.norm() <= s.summands as f64 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn major_labels_reverify(a in 0.0f64..1.0, p in 4.0f64..400.0, theta in 0.05f64..0.6) {
        let k = fixtures::rationals();
        let arc = classify_arc(&[a], &params(p, theta), &k, &IdealSpec::unit(1)).unwrap();
        if let Some(g) = &arc.approximant {
            prop_assert!(verify_major(&arc.alpha, g, arc.norm_bound, arc.radius));
        } else {
            // brute force confirms there is no admissible fraction
            let r = arc.radius;
            for q in 1..=(arc.norm_bound.floor() as i64) {
                let num = (a * q as f64).round();
                prop_assert!((a - num / q as f64).abs() > r * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn major_labels_reverify_gaussian_field(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let k = fixtures::q_i();
        let arc = classify_arc(&[a, b], &params(50.0, 0.4), &k, &IdealSpec::unit(2)).unwrap();
        if let Some(g) = &arc.approximant {
            prop_assert!(verify_major(&arc.alpha, g, arc.norm_bound, arc.radius));
        }
    }
}
