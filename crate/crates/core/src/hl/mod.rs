//! The Hardy-Littlewood main term: complete sums, local densities, the
//! singular series and the singular integral.

pub mod complete;
pub mod density;
pub mod integral;
pub mod predict;
pub mod series;

pub use complete::{complete_sum, factored_complete_sum, CompleteSumValue};
pub use density::{
    absolute_discriminant, adaptive_local_density, bad_primes, local_density, primes_up_to, DensityLevel,
    DensityOptions, LocalDensity,
};
pub use integral::{singular_integral, IntegralMethod, IntegralOptions, SingularIntegralEstimate, SlabStep};
pub use predict::{prediction, Prediction};
pub use series::{direct_series, singular_series, DirectSeries, DyadicBlock, SeriesOptions, SingularSeriesEstimate};
