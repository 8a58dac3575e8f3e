//! Certificates for nonsingular local solutions: Hensel lifts at finite
//! primes and the box centre at the archimedean places.

mod hensel;
mod real;

pub use hensel::{
    congruence_depth, hensel_certify, hensel_lift, nonsingular_root, valuation, CompiledSystem, HenselOutcome,
    InsolubilityReport, RootSearch, SearchHit, DELTA_CAP,
};
pub use real::{place_values, real_place_certify, real_place_certify_with, RealTolerances};

use crate::algebra::IdealSpec;
use crate::error::Result;
use crate::lattice::EquationInstance;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Place {
    Finite { p: i128, prime: IdealSpec },
    Archimedean { index: usize, complex: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Omega-coordinates of each variable, reduced modulo p^depth.
    Residues { coords: Vec<Vec<i128>> },
    /// Real omega-coordinates of the point.
    Real { coords: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    /// dF/dX_variable at the witness, of p-adic valuation `valuation`,
    /// with depth at least 2 valuation + 1.
    Partial {
        variable: usize,
        derivative: Vec<i128>,
        valuation: u32,
    },
    Gradient {
        residual: f64,
        tol: f64,
        norm: f64,
        margin: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalCertificate {
    pub place: Place,
    pub witness: Witness,
    pub evidence: Evidence,
    /// Lift depth j; zero at archimedean places.
    pub depth: u32,
}

impl LocalCertificate {
    /// Re-evaluates the witness and the stated derivative condition.
    pub fn replay(&self, inst: &EquationInstance) -> Result<()> {
        match (&self.place, &self.witness) {
            (Place::Finite { prime, .. }, Witness::Residues { coords }) => {
                hensel::replay_finite(self, prime, coords, inst)
            }
            (Place::Archimedean { index, .. }, Witness::Real { coords }) => {
                real::replay_real(self, *index, coords, inst)
            }
            _ => Err(crate::Error::InconsistentLocalData(
                "place and witness kinds differ".into(),
            )),
        }
    }
}

/// Certification at every prime ideal above the rational primes up to
/// `cutoff` and at the archimedean places.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalSurvey {
    pub finite: Vec<HenselOutcome>,
    pub archimedean: Vec<LocalCertificate>,
}

impl LocalSurvey {
    pub fn all_certified(&self) -> bool {
        self.finite.iter().all(|o| o.certificate().is_some())
    }
}

pub fn certify_places(inst: &EquationInstance, cutoff: i128, j_target: u32, budget: u128) -> Result<LocalSurvey> {
    use rayon::prelude::*;
    let mut primes = Vec::new();
    for p in crate::hl::primes_up_to(cutoff) {
        for (ideal, _) in IdealSpec::primes_above(&inst.field, p, budget)? {
            primes.push(ideal);
        }
    }
    let finite = primes
        .par_iter()
        .map(|q| hensel_certify(q, inst, j_target, budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalSurvey {
        finite,
        archimedean: real_place_certify(inst)?,
    })
}
