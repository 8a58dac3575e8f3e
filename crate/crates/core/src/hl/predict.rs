use super::integral::SingularIntegralEstimate;
use super::series::SingularSeriesEstimate;
use crate::error::{Error, Result};
use crate::lattice::EquationInstance;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub p: f64,
    pub value: f64,
    pub stderr: f64,
    pub series: f64,
    pub integral: f64,
    /// (n + 1) m.
    pub exponent: u32,
}

/// S J P^((n+1)m), with the integral's standard error and the series'
/// last-step changes propagated as relative errors.
pub fn prediction(
    inst: &EquationInstance,
    series: Option<&SingularSeriesEstimate>,
    integral: Option<&SingularIntegralEstimate>,
    p: f64,
) -> Result<Prediction> {
    let series = series.ok_or(Error::MissingEstimate("singular series"))?;
    let integral = integral.ok_or(Error::MissingEstimate("singular integral"))?;
    let exponent = ((inst.n() + 1) * inst.m()) as u32;
    let s = series.value();
    let j = integral.value;
    let scale = p.powi(exponent as i32);
    let value = s * j * scale;
    let stderr = (s * integral.stderr).hypot(j * s * series.relative_uncertainty()) * scale;
    Ok(Prediction {
        p,
        value,
        stderr,
        series: s,
        integral: j,
        exponent,
    })
}
