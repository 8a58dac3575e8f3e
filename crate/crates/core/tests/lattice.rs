use normcircle::algebra::{FieldElement, IdealSpec};
use normcircle::fixtures;
use normcircle::lattice::*;
use proptest::prelude::*;

const BUDGET: u128 = 50_000_000;

fn opts() -> CountOptions {
    CountOptions {
        budget_points: BUDGET,
        witness_cap: 0,
    }
}

#[test]
fn gaussian_counts_match_reference_values() {
    let inst = fixtures::gaussian();
    assert_eq!(count_solutions(&inst, 50.0, &opts()).unwrap().count, 2711);
    assert_eq!(count_solutions(&inst, 100.0, &opts()).unwrap().count, 19301);
}

#[test]
fn meet_in_the_middle_matches_naive() {
    let inst = fixtures::gaussian();
    for p in [4.0, 8.0, 12.0] {
        let fast = count_solutions(&inst, p, &opts()).unwrap().count;
        assert_eq!(fast, naive_count(&inst, p, BUDGET).unwrap(), "P = {p}");
    }
    let inst = fixtures::sqrt2_gaussian(Some(0.15));
    for p in [6.0, 10.0, 12.0] {
        let fast = count_solutions(&inst, p, &opts()).unwrap().count;
        assert_eq!(fast, naive_count(&inst, p, BUDGET).unwrap(), "P = {p}");
    }
}

#[test]
fn known_point_is_counted() {
    // box with all coordinates in (0, P) at P = 6 contains (1, 2, 2, 4, 5)
    let base = fixtures::gaussian();
    let mut spec = base.spec();
    spec.targets = vec![0.5; 5];
    spec.rho = Some(0.5);
    let inst = EquationInstance::new(spec).unwrap();
    let row = count_solutions(
        &inst,
        6.0,
        &CountOptions {
            budget_points: BUDGET,
            witness_cap: 1000,
        },
    )
    .unwrap();
    assert!(row.witnesses.contains(&Solution {
        x: vec![1, 2],
        y: vec![2, 4],
        z: vec![5]
    }));
    assert_eq!(row.witnesses.len() as u128, row.count);
}

#[test]
fn empty_box_counts_zero() {
    let inst = fixtures::gaussian();
    assert_eq!(count_solutions(&inst, 1.0, &opts()).unwrap().count, 0);
}

#[test]
fn budget_overrun_is_an_error() {
    let inst = fixtures::gaussian();
    let r = count_solutions(
        &inst,
        400.0,
        &CountOptions {
            budget_points: 1000,
            witness_cap: 0,
        },
    );
    assert!(matches!(r, Err(normcircle::Error::BudgetExceeded { .. })));
}

#[test]
fn dilation_consistency() {
    let base = fixtures::gaussian();
    let mut spec = base.spec();
    spec.rho = Some(0.1);
    let small = EquationInstance::new(spec.clone()).unwrap();
    spec.targets = spec.targets.iter().map(|t| 2.0 * t).collect();
    spec.rho = Some(0.2);
    let doubled = EquationInstance::new(spec).unwrap();
    for p in [10.0, 25.0, 40.0] {
        assert_eq!(
            count_solutions(&small, 2.0 * p, &opts()).unwrap().count,
            count_solutions(&doubled, p, &opts()).unwrap().count
        );
    }
}

#[test]
fn counts_grow_with_the_box() {
    let base = fixtures::gaussian();
    let mut prev = 0;
    for rho in [0.05, 0.1, 0.2, 0.3] {
        let mut spec = base.spec();
        spec.rho = Some(rho);
        let c = count_solutions(&EquationInstance::new(spec).unwrap(), 40.0, &opts())
            .unwrap()
            .count;
        assert!(c >= prev);
        prev = c;
    }
}

#[test]
fn wapprox_finds_certified_witness() {
    let inst = fixtures::gaussian_wapprox();
    let out = weak_approx_search(&inst, &doubling_schedule(8.0, DEFAULT_SCHEDULE_STEPS), BUDGET).unwrap();
    match out {
        SearchOutcome::Found { certificate, .. } => {
            verify_witness(&inst, &certificate).unwrap();
            assert!(certificate.congruences_hold);
            let found = SearchOutcome::Found {
                certificate,
                tried: Vec::new(),
            };
            let value = serde_json::to_value(&found).unwrap();
            assert_eq!(serde_json::from_value::<SearchOutcome>(value).unwrap(), found);
        }
        other => panic!("no witness: {other:?}"),
    }
}

#[test]
fn wapprox_rejects_inconsistent_residues() {
    let base = fixtures::gaussian_wapprox();
    let mut spec = base.spec();
    spec.residues.z = base.field.integer(0);
    let inst = EquationInstance::new(spec).unwrap();
    let r = weak_approx_search(&inst, &[8.0], BUDGET);
    assert!(matches!(r, Err(normcircle::Error::InconsistentLocalData(_))));
}

#[test]
fn wapprox_with_trivial_congruence() {
    let base = fixtures::gaussian();
    let mut spec = base.spec();
    spec.eta = 1.0;
    spec.rho = None;
    let inst = EquationInstance::new(spec).unwrap();
    let out = weak_approx_search(&inst, &doubling_schedule(8.0, 6), BUDGET).unwrap();
    assert!(matches!(out, SearchOutcome::Found { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_equals_cube_filter(
        which in 0usize..3,
        gen in (1i64..5, -3i64..4),
        res in (-6i64..6, -6i64..6),
        c in (-1.0f64..1.0, -1.0f64..1.0),
        rho in 0.05f64..0.95,
        p in 1.0f64..8.0,
    ) {
        let (field, ideal) = match which {
            0 => {
                let f = fixtures::rationals();
                let i = IdealSpec::rational(&f, gen.0 as i128).unwrap();
                (f, i)
            }
            1 => {
                let f = fixtures::q_i();
                let i = IdealSpec::principal(&f, &FieldElement::from_ints(&[gen.0, gen.1])).unwrap();
                (f, i)
            }
            _ => {
                let f = fixtures::q_sqrt2();
                let g = FieldElement::from_ints(&[gen.0, gen.1]);
                if g.is_zero() { return Ok(()); }
                let i = IdealSpec::principal(&f, &g).unwrap();
                (f, i)
            }
        };
        let m = field.degree();
        let r = FieldElement::from_ints(&[res.0, res.1][..m]);
        let center = vec![c.0, c.1][..m].to_vec();
        let bx = BoxSpec::new(center.clone(), rho, 1).unwrap();
        let got: Vec<Vec<i64>> = enumerate_congruence_class(&ideal, &r, &bx, p).unwrap().collect();
        let mut expect = Vec::new();
        let w = (rho * p).ceil() as i64 + 1;
        let lo: Vec<i64> = center.iter().map(|c| (c * p).floor() as i64 - w).collect();
        let mut v = lo.clone();
        loop {
            let d: Vec<i128> = v.iter().zip(r.numerators()).map(|(a, b)| *a as i128 - b).collect();
            if ideal.contains(&d) && bx.contains_dilated(&v, p) {
                expect.push(v.clone());
            }
            let mut i = m;
            let mut carry = true;
            while carry && i > 0 {
                i -= 1;
                v[i] += 1;
                if v[i] > lo[i] + 2 * w + 2 { v[i] = lo[i]; } else { carry = false; }
            }
            if carry { break; }
        }
        let mut sorted = got.clone();
        sorted.sort();
        expect.sort();
        prop_assert_eq!(sorted.len(), got.len());
        prop_assert_eq!(sorted, expect);
    }
}
