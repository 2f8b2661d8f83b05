use serde::{Deserialize, Serialize};

use super::{BanditEnv, PolicyTrajectory};
use crate::error::{Error, Result};
use crate::riskmetric::{DistortionSpec, MixtureEvaluator};
use crate::simplex::{grid_argmax, GridScheme, GridSpec};

/// How long the explore phase lasts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtcExploration {
    /// `ceil(N(eps) / K)` pulls per arm from the gap-dependent formula.
    Theoretical,
    /// A fixed number of pulls per arm.
    PerArm(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtcConfig {
    pub eps: f64,
    pub delta_min: f64,
    pub horizon: u64,
    pub exploration: EtcExploration,
}

/// Raw value of the exploration length
/// `256 K e (2 K L / gap)^(2/q) [32/sqrt(e) + sqrt(ln(2 K T^2 (eps^-(K-1) + 1)))]^2`.
pub fn n_epsilon_value(k: usize, l: f64, q: f64, delta_min: f64, eps: f64, horizon: u64) -> f64 {
    let kf = k as f64;
    let t = horizon as f64;
    let e = std::f64::consts::E;
    let log_term = (2.0 * kf * t * t * (eps.powf(-(kf - 1.0)) + 1.0)).ln();
    let bracket = 32.0 / e.sqrt() + log_term.sqrt();
    256.0 * kf * e * (2.0 * kf * l / delta_min).powf(2.0 / q) * bracket * bracket
}

/// `ceil(N(eps))`, failing when the explore phase does not fit the horizon.
pub fn n_epsilon(k: usize, l: f64, q: f64, delta_min: f64, eps: f64, horizon: u64) -> Result<u64> {
    if k == 0 || !(l > 0.0) || !(q > 0.0) || !(delta_min > 0.0) || !(eps > 0.0) || horizon < 2 {
        return Err(Error::Config(
            "exploration length needs positive K, L, q, gap, eps and T >= 2".into(),
        ));
    }
    let n = n_epsilon_value(k, l, q, delta_min, eps, horizon).ceil();
    if !(n <= horizon as f64) {
        return Err(Error::HorizonTooSmall {
            required: if n.is_finite() && n < u64::MAX as f64 { n as u64 } else { u64::MAX },
            horizon,
        });
    }
    Ok(n as u64)
}

impl EtcConfig {
    /// Pulls per arm in the explore phase.
    pub fn per_arm(&self, k: usize, spec: &DistortionSpec) -> Result<u64> {
        match self.exploration {
            EtcExploration::PerArm(n) => Ok(n.max(1)),
            EtcExploration::Theoretical => {
                if !(self.delta_min > 0.0) {
                    return Err(Error::Config(format!("gap {} must be positive", self.delta_min)));
                }
                let n = n_epsilon(k, spec.holder_l, spec.holder_q, self.delta_min, self.eps, self.horizon)?;
                Ok(n.div_ceil(k as u64))
            }
        }
    }
}

/// Explore-then-commit for mixtures.
///
/// Each arm is sampled the same number of times, the empirical riskmetric is
/// maximized over the lattice of step `eps`, and the remaining budget is
/// spent so that arm `i < K` reaches `floor(T a_i)` pulls where it has not
/// already. Whatever is left goes to the last arm. Both phases draw their
/// samples in per-arm batches.
pub fn etc_run(env: &mut BanditEnv, cfg: &EtcConfig, spec: &DistortionSpec) -> Result<PolicyTrajectory> {
    let k = env.k();
    let horizon = env.horizon();
    if cfg.horizon != horizon {
        return Err(Error::Config(format!(
            "config horizon {} differs from environment horizon {horizon}",
            cfg.horizon
        )));
    }
    let per_arm = cfg.per_arm(k, spec)?;
    let explore = per_arm
        .checked_mul(k as u64)
        .filter(|&n| n <= horizon)
        .ok_or(Error::HorizonTooSmall {
            required: per_arm.saturating_mul(k as u64),
            horizon,
        })?;

    let mut tr = PolicyTrajectory::new(k, horizon);
    for i in 0..k {
        let tallies = env.pull_batch(i, per_arm);
        tr.record_batch(i, &tallies);
    }

    let cdfs = tr
        .empirical()
        .iter()
        .map(|e| e.to_cdf())
        .collect::<Result<Vec<_>>>()?;
    let eval = MixtureEvaluator::new(spec, &cdfs)?;
    let grid = GridSpec::new(k, cfg.eps, GridScheme::EtcLattice)?;
    let (a_hat, _) = grid_argmax(&eval, &grid)?;
    tr.record_estimate(explore, &a_hat);

    let mut left = horizon - explore;
    for (i, &a) in a_hat.iter().enumerate().take(k - 1) {
        let target = (horizon as f64 * a + 1e-9).floor() as u64;
        if target > per_arm {
            let extra = (target - per_arm).min(left);
            let tallies = env.pull_batch(i, extra);
            tr.record_batch(i, &tallies);
            left -= extra;
        }
    }
    let tallies = env.pull_batch(k - 1, left);
    tr.record_batch(k - 1, &tallies);
    Ok(tr)
}
