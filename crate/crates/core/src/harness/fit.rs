use serde::{Deserialize, Serialize};

use super::experiment::AggregateResult;
use crate::error::{Error, Result};
use crate::policy::PolicyKind;
use crate::simplex::ls_slope;

/// Exponent `nu` of a fit `regret ~ c (ln T / T)^nu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub nu: f64,
    pub used: Vec<u64>,
    /// Checkpoints dropped for nonpositive mean regret.
    pub excluded: Vec<u64>,
}

/// Least-squares slope of `ln regret` against `ln(ln T / T)`.
pub fn fit_power_law(points: &[(u64, f64)]) -> Result<ScalingFit> {
    let mut pts = Vec::new();
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    for &(t, r) in points {
        if t < 3 {
            return Err(Error::Config(format!("checkpoint {t} too small for ln(ln T / T)")));
        }
        if r > 0.0 && r.is_finite() {
            let tf = t as f64;
            pts.push(((tf.ln() / tf).ln(), r.ln()));
            used.push(t);
        } else {
            excluded.push(t);
        }
    }
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} checkpoints with positive regret, need at least 4",
            pts.len()
        )));
    }
    Ok(ScalingFit {
        nu: ls_slope(&pts),
        used,
        excluded,
    })
}

/// Fits the mean-regret series of one policy across its checkpoints.
pub fn fit_scaling(result: &AggregateResult, policy: PolicyKind) -> Result<ScalingFit> {
    let points: Vec<(u64, f64)> = result.series(policy).iter().map(|r| (r.checkpoint, r.mean)).collect();
    fit_power_law(&points)
}
