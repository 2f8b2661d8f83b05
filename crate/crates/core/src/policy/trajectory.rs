use crate::dist::EmpiricalCdf;
use crate::error::Result;
use crate::simplex::MixtureWeights;

/// Full record of one policy run.
///
/// Actions are stored run-length encoded so that batched phases of very
/// long horizons stay small. Mixture estimates are stored only when they
/// change.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTrajectory {
    horizon: u64,
    runs: Vec<(usize, u64)>,
    estimates: Vec<(u64, Vec<f64>)>,
    pulls: Vec<u64>,
    empirical: Vec<EmpiricalCdf>,
}

impl PolicyTrajectory {
    pub fn new(k: usize, horizon: u64) -> Self {
        Self {
            horizon,
            runs: Vec::new(),
            estimates: Vec::new(),
            pulls: vec![0; k],
            empirical: vec![EmpiricalCdf::new(); k],
        }
    }

    pub fn record(&mut self, arm: usize, reward: f64) {
        self.extend_run(arm, 1);
        self.empirical[arm].push(reward);
    }

    pub fn record_batch(&mut self, arm: usize, tallies: &[(f64, u64)]) {
        let n: u64 = tallies.iter().map(|t| t.1).sum();
        if n == 0 {
            return;
        }
        self.extend_run(arm, n);
        for &(x, c) in tallies {
            self.empirical[arm].push_count(x, c);
        }
    }

    fn extend_run(&mut self, arm: usize, n: u64) {
        match self.runs.last_mut() {
            Some((a, len)) if *a == arm => *len += n,
            _ => self.runs.push((arm, n)),
        }
        self.pulls[arm] += n;
    }

    /// Logs the estimate in force from round `t + 1` on, unless unchanged.
    pub fn record_estimate(&mut self, t: u64, w: &[f64]) {
        if self.estimates.last().is_some_and(|(_, last)| last.as_slice() == w) {
            return;
        }
        self.estimates.push((t, w.to_vec()));
    }

    pub fn k(&self) -> usize {
        self.pulls.len()
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Rounds played so far.
    pub fn t(&self) -> u64 {
        self.pulls.iter().sum()
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn runs(&self) -> &[(usize, u64)] {
        &self.runs
    }

    pub fn estimates(&self) -> &[(u64, Vec<f64>)] {
        &self.estimates
    }

    /// Number of times the estimate changed after it was first set.
    pub fn estimate_changes(&self) -> usize {
        self.estimates.len().saturating_sub(1)
    }

    pub fn empirical(&self) -> &[EmpiricalCdf] {
        &self.empirical
    }

    /// `tau_T / T`.
    pub fn final_fractions(&self) -> Result<MixtureWeights> {
        MixtureWeights::from_counts(&self.pulls)
    }

    /// Actions one round at a time.
    pub fn actions(&self) -> impl Iterator<Item = usize> + '_ {
        self.runs
            .iter()
            .flat_map(|&(a, n)| std::iter::repeat_n(a, n as usize))
    }

    /// Pull counts after round `t`, replayed from the action record.
    pub fn pulls_at(&self, t: u64) -> Vec<u64> {
        let mut out = vec![0; self.k()];
        let mut left = t;
        for &(a, n) in &self.runs {
            if left == 0 {
                break;
            }
            let take = n.min(left);
            out[a] += take;
            left -= take;
        }
        out
    }

    /// Replays the action record and checks that per-arm counts grow by
    /// exactly one unit of time in total per round and end at the stored
    /// pull counts.
    pub fn is_consistent(&self) -> bool {
        let mut counts = vec![0u64; self.k()];
        let mut t = 0u64;
        for &(a, n) in &self.runs {
            if a >= counts.len() || n == 0 {
                return false;
            }
            counts[a] += n;
            t += n;
            if counts.iter().sum::<u64>() != t {
                return false;
            }
        }
        counts == self.pulls
            && self.empirical.iter().zip(&self.pulls).all(|(e, &p)| e.n() == p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_merge_and_replay() {
        let mut tr = PolicyTrajectory::new(2, 10);
        tr.record(0, 1.0);
        tr.record(0, 0.0);
        tr.record(1, 1.0);
        tr.record_batch(1, &[(0.0, 3), (1.0, 2)]);
        assert_eq!(tr.runs(), &[(0, 2), (1, 6)]);
        assert_eq!(tr.pulls_at(3), vec![2, 1]);
        assert_eq!(tr.t(), 8);
        assert!(tr.is_consistent());
        assert_eq!(tr.actions().count(), 8);
    }

    #[test]
    fn estimates_only_on_change() {
        let mut tr = PolicyTrajectory::new(2, 10);
        tr.record_estimate(2, &[0.25, 0.75]);
        tr.record_estimate(3, &[0.25, 0.75]);
        tr.record_estimate(4, &[0.75, 0.25]);
        assert_eq!(tr.estimates().len(), 2);
        assert_eq!(tr.estimate_changes(), 1);
    }
}
