//! Built-in fields, extensions and equation instances.

use crate::algebra::{ExtensionSpec, FieldElement, FieldSpec, IdealSpec, Shifts, Signature};
use crate::lattice::{EquationInstance, InstanceSpec};

pub fn rationals() -> FieldSpec {
    FieldSpec::rationals()
}

pub fn q_sqrt2() -> FieldSpec {
    FieldSpec::from_min_poly(&[-2, 0, 1], Signature { real: 2, complex: 0 }).expect("Q(sqrt 2)")
}

pub fn q_i() -> FieldSpec {
    FieldSpec::from_min_poly(&[1, 0, 1], Signature { real: 0, complex: 1 }).expect("Q(i)")
}

pub fn q_cbrt2() -> FieldSpec {
    FieldSpec::from_min_poly(&[-2, 0, 0, 1], Signature { real: 1, complex: 1 }).expect("Q(cbrt 2)")
}

/// Relative power basis for a monic polynomial with rational integer
/// coefficients, over any base field.
pub fn power_extension(field: &FieldSpec, coeffs: &[i128]) -> ExtensionSpec {
    let c: Vec<FieldElement> = coeffs.iter().map(|&v| field.integer(v)).collect();
    ExtensionSpec::from_rel_min_poly(field, &c).expect("valid relative polynomial")
}

/// K = k(i) with tau = (1, i).
pub fn adjoin_i(field: &FieldSpec) -> ExtensionSpec {
    power_extension(field, &[1, 0, 1])
}

fn ints(field: &FieldSpec, v: &[i128]) -> Vec<FieldElement> {
    v.iter().map(|&x| field.integer(x)).collect()
}

/// k = Q, K = Q(i), a = b = 1, trivial congruence, centre (0.6, 0.8, 0, 0, 1)
/// and eta = 0.5, so rho = 0.25.
pub fn gaussian() -> EquationInstance {
    let k = rationals();
    let ext = adjoin_i(&k);
    EquationInstance::new(InstanceSpec {
        a: k.one(),
        b: k.one(),
        modulus: IdealSpec::unit(1),
        residues: Shifts::zero(2, 1),
        targets: vec![0.6, 0.8, 0.0, 0.0, 1.0],
        eta: 0.5,
        rho: None,
        field: k,
        ext,
    })
    .expect("gaussian fixture")
}

/// The gaussian equation with congruence ideal (3), residues of the seed
/// solution (1, 2, 2, 4, 5) and targets that seed divided by 5; eta = 0.3.
pub fn gaussian_wapprox() -> EquationInstance {
    let k = rationals();
    let ext = adjoin_i(&k);
    let modulus = IdealSpec::rational(&k, 3).expect("ideal (3)");
    EquationInstance::new(InstanceSpec {
        a: k.one(),
        b: k.one(),
        modulus,
        residues: Shifts {
            x: ints(&k, &[1, 2]),
            y: ints(&k, &[2, 4]),
            z: k.integer(5),
        },
        targets: vec![0.2, 0.4, 0.4, 0.8, 1.0],
        eta: 0.3,
        rho: None,
        field: k,
        ext,
    })
    .expect("wapprox fixture")
}

/// k = Q, K = Q(cbrt 2), a = b = 1, centre x = y = 1, z = cbrt 2.
pub fn cube_root_two() -> EquationInstance {
    let k = rationals();
    let ext = power_extension(&k, &[-2, 0, 0, 1]);
    EquationInstance::new(InstanceSpec {
        a: k.one(),
        b: k.one(),
        modulus: IdealSpec::unit(1),
        residues: Shifts::zero(3, 1),
        targets: vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 2f64.cbrt()],
        eta: 0.5,
        rho: None,
        field: k,
        ext,
    })
    .expect("cube root fixture")
}

/// k = Q, K = Q(t) with t^3 - t - 1 (2 is inert), a = 2, b = 4. The 2-adic
/// valuations of the three terms are distinct modulo 3, so only the
/// trivial 2-adic solution exists and the singular series vanishes, while
/// the real centre x = y = 1, z = 6^(1/3) is nonsingular.
pub fn vanishing_series() -> EquationInstance {
    let k = rationals();
    let ext = power_extension(&k, &[-1, -1, 0, 1]);
    EquationInstance::new(InstanceSpec {
        a: k.integer(2),
        b: k.integer(4),
        modulus: IdealSpec::unit(1),
        residues: Shifts::zero(3, 1),
        targets: vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 6f64.cbrt()],
        eta: 0.5,
        rho: None,
        field: k,
        ext,
    })
    .expect("vanishing series fixture")
}

/// k = Q(sqrt 2), K = k(i), a = b = 1, rational centre (0.6, 0.8, 0, 0, 1).
pub fn sqrt2_gaussian(rho: Option<f64>) -> EquationInstance {
    let k = q_sqrt2();
    let ext = adjoin_i(&k);
    EquationInstance::new(InstanceSpec {
        a: k.one(),
        b: k.one(),
        modulus: IdealSpec::unit(2),
        residues: Shifts::zero(2, 2),
        targets: vec![0.6, 0.0, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        eta: 0.5,
        rho,
        field: k,
        ext,
    })
    .expect("sqrt 2 fixture")
}

/// All built-in fields by name.
pub fn named_fields() -> Vec<(&'static str, FieldSpec)> {
    vec![
        ("Q", rationals()),
        ("Q(sqrt2)", q_sqrt2()),
        ("Q(i)", q_i()),
        ("Q(cbrt2)", q_cbrt2()),
    ]
}

/// Built-in instances by name.
pub fn instance_by_name(name: &str) -> Option<EquationInstance> {
    Some(match name {
        "gaussian" => gaussian(),
        "gaussian-wapprox" => gaussian_wapprox(),
        "cube-root-two" => cube_root_two(),
        "vanishing-series" => vanishing_series(),
        "sqrt2-gaussian" => sqrt2_gaussian(None),
        _ => return None,
    })
}

pub const INSTANCE_NAMES: &[&str] = &[
    "gaussian",
    "gaussian-wapprox",
    "cube-root-two",
    "vanishing-series",
    "sqrt2-gaussian",
];
