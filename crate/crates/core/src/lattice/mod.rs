//! Boxes, congruence-class enumeration, exact solution counts and the
//! weak-approximation point search.

pub mod boxes;
pub mod count;
pub mod instance;
pub mod wapprox;

pub use boxes::{enumerate_congruence_class, enumerate_tuples, rho_for_eta, BoxSpec, ClassStream, ProductBox};
pub use count::{count_solutions, naive_count, CountOptions, CountReport, CountRow, Solution};
pub use instance::{EquationInstance, InstanceSpec};
pub use wapprox::{
    certify_witness, check_local_data, doubling_schedule, verify_witness, weak_approx_search, ExhaustionReport,
    PlaceDistance, ScheduleStep, SearchOutcome, WitnessCertificate, DEFAULT_SCHEDULE_STEPS,
};
