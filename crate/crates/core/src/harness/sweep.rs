use std::fmt;
use std::str::FromStr;

use super::config::{ExperimentConfig, UcbExploration};
use super::experiment::{run_experiment, AggregateResult};
use crate::dist::ArmModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Horizon, with UCB exploration `T/10` per arm.
    OverT,
    /// Number of arms, with evenly spaced Bernoulli means, `T = 3e5` and UCB
    /// exploration `T/20` per arm.
    OverK,
    /// Second arm mean against a first arm at 0.55.
    OverGap,
    /// Exploration rate on the three-arm instance `(0.4, 0.65, 0.9)` at
    /// `T = 75000`.
    OverRho,
}

impl SweepKind {
    pub const ALL: [SweepKind; 4] = [SweepKind::OverT, SweepKind::OverK, SweepKind::OverGap, SweepKind::OverRho];

    /// Values swept when none are given.
    pub fn default_values(&self) -> Vec<f64> {
        match self {
            SweepKind::OverT => vec![1e4, 2e4, 5e4, 1e5],
            SweepKind::OverK => vec![2.0, 3.0, 4.0, 5.0, 6.0],
            SweepKind::OverGap => vec![0.65, 0.75, 0.85, 0.95],
            SweepKind::OverRho => vec![0.05, 0.1, 0.2, 0.4],
        }
    }

    pub fn token(&self) -> &'static str {
        match self {
            SweepKind::OverT => "horizon",
            SweepKind::OverK => "arms",
            SweepKind::OverGap => "gap",
            SweepKind::OverRho => "rho",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for SweepKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "horizon" | "t" | "over-t" => Ok(SweepKind::OverT),
            "arms" | "k" | "over-k" => Ok(SweepKind::OverK),
            "gap" | "over-gap" => Ok(SweepKind::OverGap),
            "rho" | "over-rho" => Ok(SweepKind::OverRho),
            other => Err(Error::Parse(format!("unknown sweep `{other}` (horizon|arms|gap|rho)"))),
        }
    }
}

pub const OVER_K_HORIZON: u64 = 300_000;
pub const OVER_RHO_HORIZON: u64 = 75_000;
pub const GAP_BASE_MEAN: f64 = 0.55;

/// `k` Bernoulli arms with means evenly spaced over `[0.4, 0.9]`.
pub fn evenly_spaced_arms(k: usize) -> Result<Vec<ArmModel>> {
    if k < 2 {
        return Err(Error::Config("an arm-count sweep needs K >= 2".into()));
    }
    (0..k)
        .map(|i| ArmModel::bernoulli(0.4 + 0.5 * i as f64 / (k - 1) as f64))
        .collect()
}

/// The configuration used at one point of a sweep.
pub fn sweep_point(kind: SweepKind, base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
    let mut cfg = base.clone();
    match kind {
        SweepKind::OverT => {
            if !(value >= 2.0) || value.fract() != 0.0 {
                return Err(Error::Config(format!("horizon {value} must be an integer >= 2")));
            }
            cfg.horizons = vec![value as u64];
            cfg.ucb_exploration = UcbExploration::FractionOfHorizon(0.1);
        }
        SweepKind::OverK => {
            if value.fract() != 0.0 {
                return Err(Error::Config(format!("arm count {value} must be an integer")));
            }
            cfg.arms = evenly_spaced_arms(value as usize)?;
            cfg.horizons = vec![OVER_K_HORIZON];
            cfg.ucb_exploration = UcbExploration::FractionOfHorizon(0.05);
        }
        SweepKind::OverGap => {
            cfg.arms = vec![ArmModel::bernoulli(GAP_BASE_MEAN)?, ArmModel::bernoulli(value)?];
        }
        SweepKind::OverRho => {
            cfg.arms = vec![
                ArmModel::bernoulli(0.4)?,
                ArmModel::bernoulli(0.65)?,
                ArmModel::bernoulli(0.9)?,
            ];
            cfg.horizons = vec![OVER_RHO_HORIZON];
            cfg.rho = value;
            cfg.ucb_exploration = UcbExploration::Formula;
        }
    }
    Ok(cfg)
}

/// Runs one experiment per swept value. Rows carry the swept value in
/// `sweep_param`.
pub fn sweep(kind: SweepKind, base: &ExperimentConfig, values: &[f64]) -> Result<AggregateResult> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let mut out: Option<AggregateResult> = None;
    for &v in values {
        let cfg = sweep_point(kind, base, v)?;
        let mut res = run_experiment(&cfg)?;
        for r in &mut res.rows {
            r.sweep_param = v;
        }
        match &mut out {
            Some(o) => o.extend(res),
            None => {
                res.config.insert("sweep".into(), kind.token().into());
                out = Some(res);
            }
        }
    }
    Ok(out.expect("at least one value"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::PolicyKind;

    #[test]
    fn single_horizon_sweep_matches_run() {
        let base = ExperimentConfig {
            trials: 4,
            policies: vec![PolicyKind::Ucb],
            ..Default::default()
        };
        let s = sweep(SweepKind::OverT, &base, &[5000.0]).unwrap();
        let mut cfg = base.clone();
        cfg.horizons = vec![5000];
        cfg.ucb_exploration = UcbExploration::FractionOfHorizon(0.1);
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(s.rows, r.rows);
    }

    #[test]
    fn even_spacing() {
        let arms = evenly_spaced_arms(3).unwrap();
        let ps: Vec<f64> = arms.iter().map(|a| a.bernoulli_p().unwrap()).collect();
        assert_eq!(ps, vec![0.4, 0.65, 0.9]);
    }
}
