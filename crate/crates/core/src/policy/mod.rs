//! Bandit policies that track a mixture of arms, plus the uniform baseline.
//!
//! Every policy plays against a [`BanditEnv`] and returns the complete
//! [`PolicyTrajectory`] of its run.

mod etc;
mod trajectory;
mod ucb;
mod uniform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::{ArmModel, RngStream};
use crate::error::{Error, Result};

pub use etc::{etc_run, n_epsilon, n_epsilon_value, EtcConfig, EtcExploration};
pub use trajectory::PolicyTrajectory;
pub use ucb::{ce_index, t_epsilon, ucb_optimistic, ucb_run, under_sampled_arm, UcbConfig, UcbState, UcbVariant};
pub use uniform::uniform_run;

/// A simulated `K`-armed bandit with one random stream per arm.
#[derive(Debug, Clone)]
pub struct BanditEnv {
    arms: Vec<ArmModel>,
    horizon: u64,
    streams: Vec<RngStream>,
}

impl BanditEnv {
    pub fn new(arms: Vec<ArmModel>, horizon: u64, seed: u64, trial: u64) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::Config("bandit needs at least one arm".into()));
        }
        if horizon < arms.len() as u64 {
            return Err(Error::HorizonTooSmall {
                required: arms.len() as u64,
                horizon,
            });
        }
        let streams = (0..arms.len())
            .map(|i| RngStream::new(seed, trial, i as u32))
            .collect();
        Ok(Self { arms, horizon, streams })
    }

    pub fn k(&self) -> usize {
        self.arms.len()
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn arms(&self) -> &[ArmModel] {
        &self.arms
    }

    pub fn pull(&mut self, i: usize) -> f64 {
        self.arms[i].sample(&mut self.streams[i])
    }

    /// Tallies of `n` pulls of arm `i`.
    pub fn pull_batch(&mut self, i: usize, n: u64) -> Vec<(f64, u64)> {
        self.arms[i].sample_counts(n, &mut self.streams[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Etc,
    Ucb,
    CeUcb,
    Uniform,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [PolicyKind::Etc, PolicyKind::Ucb, PolicyKind::CeUcb, PolicyKind::Uniform];

    pub fn token(&self) -> &'static str {
        match self {
            PolicyKind::Etc => "etc",
            PolicyKind::Ucb => "ucb",
            PolicyKind::CeUcb => "ce-ucb",
            PolicyKind::Uniform => "uniform",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "etc" => Ok(PolicyKind::Etc),
            "ucb" => Ok(PolicyKind::Ucb),
            "ce-ucb" | "ceucb" | "ce_ucb" => Ok(PolicyKind::CeUcb),
            "uniform" => Ok(PolicyKind::Uniform),
            other => Err(Error::Parse(format!("unknown policy `{other}` (etc|ucb|ce-ucb|uniform)"))),
        }
    }
}

/// Parses a comma separated policy list.
pub fn parse_policies(s: &str) -> Result<Vec<PolicyKind>> {
    let v = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(Error::Parse("policy list is empty".into()));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_tokens_round_trip() {
        for p in PolicyKind::ALL {
            assert_eq!(p.token().parse::<PolicyKind>().unwrap(), p);
        }
        assert!("thompson".parse::<PolicyKind>().is_err());
        assert_eq!(parse_policies("ucb,etc").unwrap(), vec![PolicyKind::Ucb, PolicyKind::Etc]);
    }

    #[test]
    fn env_rejects_short_horizon() {
        let arms = vec![ArmModel::bernoulli(0.5).unwrap(); 3];
        assert!(matches!(BanditEnv::new(arms, 2, 0, 0), Err(Error::HorizonTooSmall { .. })));
    }
}
