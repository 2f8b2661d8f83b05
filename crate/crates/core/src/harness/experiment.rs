use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{EtcExplorationRule, ExperimentConfig};
use crate::dist::{format_arms, ArmModel, FiniteCdf};
use crate::error::{Error, Result};
use crate::policy::{
    etc_run, n_epsilon, ucb_run, uniform_run, BanditEnv, EtcConfig, EtcExploration, PolicyKind, PolicyTrajectory,
    UcbConfig, UcbVariant,
};
use crate::riskmetric::{mixture_value, DistortionSpec};
use crate::simplex::{min_gap, oracle_continuous, GridScheme, GridSpec, MixtureWeights, DEFAULT_RESOLUTION};

/// Optimal mixture value of one instance, tagged with the instance it was
/// computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalValue {
    pub value: f64,
    pub weights: MixtureWeights,
    instance: u64,
}

fn instance_hash(spec: &DistortionSpec, arms: &[ArmModel]) -> u64 {
    let mut h = DefaultHasher::new();
    spec.to_string().hash(&mut h);
    format_arms(arms).hash(&mut h);
    h.finish()
}

impl OptimalValue {
    pub fn compute(spec: &DistortionSpec, arms: &[ArmModel]) -> Result<Self> {
        let cdfs: Vec<FiniteCdf> = arms.iter().map(ArmModel::to_cdf).collect();
        let o = oracle_continuous(spec, &cdfs, DEFAULT_RESOLUTION)?;
        Ok(Self {
            value: o.value,
            weights: o.weights,
            instance: instance_hash(spec, arms),
        })
    }

    pub fn is_for(&self, spec: &DistortionSpec, arms: &[ArmModel]) -> bool {
        self.instance == instance_hash(spec, arms)
    }
}

/// `V* - V(tau_T / T, F)` for a finished run.
///
/// A single run can land above the optimum's value only through numerical
/// noise, but the realized mixture is random, so no sign is enforced.
pub fn regret_of_trajectory(
    traj: &PolicyTrajectory,
    spec: &DistortionSpec,
    arms: &[ArmModel],
    vstar: &OptimalValue,
) -> Result<f64> {
    if !vstar.is_for(spec, arms) {
        return Err(Error::InstanceMismatch);
    }
    if traj.t() != traj.horizon() {
        return Err(Error::InsufficientData(format!(
            "trajectory stopped at {} of {} rounds",
            traj.t(),
            traj.horizon()
        )));
    }
    let cdfs: Vec<FiniteCdf> = arms.iter().map(ArmModel::to_cdf).collect();
    Ok(vstar.value - mixture_value(spec, &traj.final_fractions()?, &cdfs)?)
}

/// One row of aggregated output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Value of the swept parameter, or the horizon for plain runs.
    pub sweep_param: f64,
    pub policy: PolicyKind,
    pub checkpoint: u64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub stderr: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub rows: Vec<ResultRow>,
    pub config: std::collections::BTreeMap<String, String>,
    pub notes: Vec<String>,
}

impl AggregateResult {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows of one policy in checkpoint order.
    pub fn series(&self, policy: PolicyKind) -> Vec<&ResultRow> {
        let mut v: Vec<&ResultRow> = self.rows.iter().filter(|r| r.policy == policy).collect();
        v.sort_by(|a, b| a.sweep_param.total_cmp(&b.sweep_param).then(a.checkpoint.cmp(&b.checkpoint)));
        v
    }

    pub fn row(&self, policy: PolicyKind, checkpoint: u64) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.policy == policy && r.checkpoint == checkpoint)
    }

    pub fn extend(&mut self, other: AggregateResult) {
        self.rows.extend(other.rows);
        self.notes.extend(other.notes);
    }
}

/// Summary statistics, accumulated in slice order so that the result does
/// not depend on which worker finished first.
pub fn summarize(xs: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let stderr = if xs.len() > 1 {
        let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        (ss / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    // Rounding in the mean can push it a hair outside [min, max] when all
    // trials agree.
    (mean.clamp(min, max), min, max, stderr)
}

/// Per-horizon settings shared by every trial of one policy.
#[derive(Debug, Clone)]
pub(crate) enum PolicyPlan {
    Etc(EtcConfig),
    Ucb(Box<UcbConfig>),
    Uniform,
}

pub(crate) fn plan(cfg: &ExperimentConfig, policy: PolicyKind, horizon: u64, notes: &mut Vec<String>) -> Result<PolicyPlan> {
    let k = cfg.arms.len();
    let eps = cfg.eps.eval(k, horizon);
    match policy {
        PolicyKind::Uniform => Ok(PolicyPlan::Uniform),
        PolicyKind::Ucb | PolicyKind::CeUcb => {
            let variant = if policy == PolicyKind::Ucb {
                UcbVariant::Exact
            } else {
                UcbVariant::ComputationallyEfficient
            };
            let mut u = UcbConfig::new(cfg.rho, eps, horizon, variant);
            u.exploration_per_arm = cfg.ucb_exploration.per_arm(horizon);
            u.recompute_stride = cfg.recompute_stride;
            let need = u.forced_per_arm().saturating_mul(k as u64);
            if need > horizon {
                return Err(Error::HorizonTooSmall { required: need, horizon });
            }
            Ok(PolicyPlan::Ucb(Box::new(u)))
        }
        PolicyKind::Etc => {
            let delta = match cfg.delta_min {
                Some(d) => Some(d),
                None => {
                    let cdfs: Vec<FiniteCdf> = cfg.arms.iter().map(ArmModel::to_cdf).collect();
                    let grid = GridSpec::new(k, eps, GridScheme::EtcLattice)?;
                    match min_gap(&cfg.spec, &cdfs, &grid) {
                        Ok(d) => Some(d),
                        Err(Error::GapUndefined) => None,
                        Err(e) => return Err(e),
                    }
                }
            };
            let fallback = || (horizon as f64).powf(2.0 / 3.0).ceil() as u64;
            let exploration = match cfg.etc_exploration {
                EtcExplorationRule::PerArm(n) => EtcExploration::PerArm(n),
                EtcExplorationRule::Theoretical => {
                    let d = delta.ok_or(Error::GapUndefined)?;
                    n_epsilon(k, cfg.spec.holder_l, cfg.spec.holder_q, d, eps, horizon)?;
                    EtcExploration::Theoretical
                }
                EtcExplorationRule::Auto => {
                    let fits = delta.map(|d| n_epsilon(k, cfg.spec.holder_l, cfg.spec.holder_q, d, eps, horizon));
                    match fits {
                        Some(Ok(_)) => EtcExploration::Theoretical,
                        _ => {
                            let n = fallback().min(horizon / k as u64).max(1);
                            notes.push(format!(
                                "etc at T={horizon}: gap-dependent exploration exceeds the horizon, using {n} pulls per arm"
                            ));
                            EtcExploration::PerArm(n)
                        }
                    }
                }
            };
            Ok(PolicyPlan::Etc(EtcConfig {
                eps,
                delta_min: delta.unwrap_or(0.0),
                horizon,
                exploration,
            }))
        }
    }
}

pub(crate) fn run_one(
    plan: &PolicyPlan,
    spec: &DistortionSpec,
    arms: &[ArmModel],
    horizon: u64,
    seed: u64,
    trial: u64,
) -> Result<PolicyTrajectory> {
    let mut env = BanditEnv::new(arms.to_vec(), horizon, seed, trial)?;
    match plan {
        PolicyPlan::Etc(c) => etc_run(&mut env, c, spec),
        PolicyPlan::Ucb(c) => ucb_run(&mut env, c, spec),
        PolicyPlan::Uniform => Ok(uniform_run(&mut env)),
    }
}

fn wrap(policy: PolicyKind, horizon: u64) -> impl Fn(Error) -> Error {
    move |e| Error::Trial {
        policy: policy.token().to_string(),
        horizon,
        source: Box::new(e),
    }
}

/// Worker count: the explicit setting, else `DRBANDIT_THREADS`, else rayon's
/// default.
pub fn worker_count(explicit: Option<usize>) -> Option<usize> {
    explicit.or_else(|| {
        std::env::var("DRBANDIT_THREADS")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&n: &usize| n > 0)
    })
}

/// Runs every (policy, horizon) pair for `cfg.trials` independent trials.
///
/// Trial `j` of every policy and horizon uses the same per-arm random
/// streams, so policies are compared on common random numbers. Output does
/// not depend on the number of workers.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    cfg.validate()?;
    let vstar = OptimalValue::compute(&cfg.spec, &cfg.arms)?;
    let mut notes = Vec::new();

    // Check every precondition before spending time on trials.
    let mut plans = Vec::new();
    for &policy in &cfg.policies {
        for &horizon in &cfg.horizons {
            let p = plan(cfg, policy, horizon, &mut notes).map_err(wrap(policy, horizon))?;
            plans.push((policy, horizon, p));
        }
    }

    let work = || -> Result<Vec<ResultRow>> {
        let mut rows = Vec::new();
        for (policy, horizon, p) in &plans {
            let regrets = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let tr = run_one(p, &cfg.spec, &cfg.arms, *horizon, cfg.seed, trial)?;
                    regret_of_trajectory(&tr, &cfg.spec, &cfg.arms, &vstar)
                })
                .collect::<Result<Vec<f64>>>()
                .map_err(wrap(*policy, *horizon))?;
            let (mean, min, max, stderr) = summarize(&regrets);
            rows.push(ResultRow {
                sweep_param: *horizon as f64,
                policy: *policy,
                checkpoint: *horizon,
                mean,
                min,
                max,
                stderr,
                seed: cfg.seed,
            });
        }
        Ok(rows)
    };

    let rows = match worker_count(cfg.threads) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok(AggregateResult {
        rows,
        config: cfg.echo(),
        notes,
    })
}
