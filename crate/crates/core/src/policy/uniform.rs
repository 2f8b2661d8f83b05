use super::{BanditEnv, PolicyTrajectory};

/// Round-robin over the arms for the whole horizon. The remainder of
/// `T / K` goes to the lowest indices.
pub fn uniform_run(env: &mut BanditEnv) -> PolicyTrajectory {
    let k = env.k();
    let horizon = env.horizon();
    let mut tr = PolicyTrajectory::new(k, horizon);
    tr.record_estimate(0, &vec![1.0 / k as f64; k]);
    for t in 0..horizon {
        let arm = (t % k as u64) as usize;
        let x = env.pull(arm);
        tr.record(arm, x);
    }
    tr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ArmModel;

    fn env(k: usize, t: u64) -> BanditEnv {
        BanditEnv::new(vec![ArmModel::bernoulli(0.5).unwrap(); k], t, 1, 0).unwrap()
    }

    #[test]
    fn equal_split() {
        assert_eq!(uniform_run(&mut env(4, 100)).pulls(), &[25, 25, 25, 25]);
    }

    #[test]
    fn remainder_to_lowest_indices() {
        assert_eq!(uniform_run(&mut env(3, 10)).pulls(), &[4, 3, 3]);
    }

    #[test]
    fn fractions_approach_uniform() {
        let tr = uniform_run(&mut env(3, 10_001));
        for f in tr.final_fractions().unwrap().as_slice() {
            assert!((f - 1.0 / 3.0).abs() < 1e-4);
        }
    }
}
