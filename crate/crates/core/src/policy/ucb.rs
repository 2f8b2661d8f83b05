use serde::{Deserialize, Serialize};

use super::{BanditEnv, PolicyTrajectory};
use crate::dist::{confidence_radius, EmpiricalCdf, FiniteCdf, ATOM_MERGE_TOL};
use crate::error::{Error, Result};
use crate::riskmetric::{bernoulli_means, dot, DistortionSpec, MixtureEvaluator};
use crate::simplex::{GridScheme, GridSpec, MixtureWeights, TIE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UcbVariant {
    /// Optimistic estimate maximized over the distribution confidence balls.
    Exact,
    /// Empirical riskmetric plus a closed-form exploration bonus.
    ComputationallyEfficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcbConfig {
    pub rho: f64,
    pub eps: f64,
    pub horizon: u64,
    pub variant: UcbVariant,
    /// Replaces `ceil(rho T eps / 4)` as the forced pulls per arm.
    pub exploration_per_arm: Option<u64>,
    /// Recompute the estimate every this many rounds after exploration.
    pub recompute_stride: u64,
    /// True arm distributions to use instead of the empirical ones, with
    /// zero confidence radius. Used to study the tracking rule in isolation.
    #[serde(skip)]
    pub oracle_cdfs: Option<Vec<FiniteCdf>>,
}

impl UcbConfig {
    pub fn new(rho: f64, eps: f64, horizon: u64, variant: UcbVariant) -> Self {
        Self {
            rho,
            eps,
            horizon,
            variant,
            exploration_per_arm: None,
            recompute_stride: 1,
            oracle_cdfs: None,
        }
    }

    /// Forced round-robin pulls per arm.
    pub fn forced_per_arm(&self) -> u64 {
        match self.exploration_per_arm {
            Some(n) => n.max(1),
            None => (self.rho * self.horizon as f64 * self.eps / 4.0).ceil().max(1.0) as u64,
        }
    }

    fn validate(&self, k: usize) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::Config(format!("exploration rate {} must lie in (0, 1)", self.rho)));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::Config(format!("grid step {} must lie in (0, 1]", self.eps)));
        }
        if self.recompute_stride == 0 {
            return Err(Error::Config("recompute stride must be at least 1".into()));
        }
        if let Some(o) = &self.oracle_cdfs {
            if o.len() != k {
                return Err(Error::DimensionMismatch { expected: k, got: o.len() });
            }
        }
        let need = self.forced_per_arm().saturating_mul(k as u64);
        if need > self.horizon {
            return Err(Error::HorizonTooSmall {
                required: need,
                horizon: self.horizon,
            });
        }
        Ok(())
    }
}

/// Confidence-set bookkeeping shared by both UCB variants.
#[derive(Debug, Clone)]
pub struct UcbState {
    horizon: u64,
    cdfs: Vec<FiniteCdf>,
    radii: Vec<f64>,
    eval: MixtureEvaluator,
    spec: DistortionSpec,
    previous: Option<Vec<f64>>,
}

impl UcbState {
    pub fn from_empirical(spec: &DistortionSpec, emp: &[EmpiricalCdf], horizon: u64) -> Result<Self> {
        let mut cdfs = Vec::with_capacity(emp.len());
        let mut radii = Vec::with_capacity(emp.len());
        for (i, e) in emp.iter().enumerate() {
            if e.n() == 0 {
                return Err(Error::UnpulledArm(i));
            }
            cdfs.push(e.to_cdf()?);
            radii.push(confidence_radius(e.n(), horizon)?);
        }
        let eval = MixtureEvaluator::new(spec, &cdfs)?;
        Ok(Self {
            horizon,
            cdfs,
            radii,
            eval,
            spec: *spec,
            previous: None,
        })
    }

    /// A state whose confidence sets are the single true distributions.
    pub fn with_oracle(spec: &DistortionSpec, cdfs: Vec<FiniteCdf>, horizon: u64) -> Result<Self> {
        let eval = MixtureEvaluator::new(spec, &cdfs)?;
        Ok(Self {
            horizon,
            radii: vec![0.0; cdfs.len()],
            cdfs,
            eval,
            spec: *spec,
            previous: None,
        })
    }

    /// Refreshes arm `i` after new observations.
    pub fn update_arm(&mut self, i: usize, emp: &EmpiricalCdf) -> Result<()> {
        if emp.n() == 0 {
            return Err(Error::UnpulledArm(i));
        }
        self.cdfs[i] = emp.to_cdf()?;
        self.radii[i] = confidence_radius(emp.n(), self.horizon)?;
        self.eval = MixtureEvaluator::new(&self.spec, &self.cdfs)?;
        Ok(())
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn cdfs(&self) -> &[FiniteCdf] {
        &self.cdfs
    }

    pub fn previous(&self) -> Option<&[f64]> {
        self.previous.as_deref()
    }

    pub fn set_previous(&mut self, w: Vec<f64>) {
        self.previous = Some(w);
    }

    /// Empirical `V(a, F_t)`.
    pub fn empirical_value(&self, a: &[f64]) -> f64 {
        self.eval.value(a)
    }
}

// Optimistic value of a mixture.
type Objective<'a> = dyn Fn(&[f64]) -> f64 + 'a;

/// Optimistic estimate: the grid point whose best-case riskmetric over the
/// confidence sets is largest.
///
/// Bernoulli arms keep their confidence sets inside the Bernoulli family,
/// where the Wasserstein ball around `p_hat` is the interval
/// `[p_hat - r, p_hat + r]`. The inner maximum of `h(<a, p'>)` over the box
/// of intervals is then `h` maximized over `[<a, lo>, <a, hi>]`, which
/// concavity of `h` gives in closed form.
///
/// Other arms use [`ShiftFamily`] candidates: probability mass moved to the
/// arm's top or bottom observed atom, scanned in steps of `1e-3` and
/// combined by coordinate ascent.
///
/// The previous estimate is kept whenever it still attains the maximum.
/// Otherwise ties are broken by the larger empirical riskmetric and then
/// lexicographically.
pub fn ucb_optimistic(state: &UcbState, grid: &GridSpec, spec: &DistortionSpec) -> Result<MixtureWeights> {
    let k = state.cdfs.len();
    if grid.k != k {
        return Err(Error::DimensionMismatch { expected: k, got: grid.k });
    }
    let opt: Box<Objective<'_>> = match bernoulli_means(&state.cdfs) {
        Some(ps) => {
            let lo: Vec<f64> = ps.iter().zip(&state.radii).map(|(p, r)| (p - r).max(0.0)).collect();
            let hi: Vec<f64> = ps.iter().zip(&state.radii).map(|(p, r)| (p + r).min(1.0)).collect();
            if let Some(prev) = state.previous() {
                if spec.max_on(dot(prev, &lo), dot(prev, &hi)) >= spec.h_max() - TIE_TOL {
                    return MixtureWeights::new(prev.to_vec());
                }
            }
            Box::new(move |a: &[f64]| spec.max_on(dot(a, &lo), dot(a, &hi)))
        }
        None => {
            let fam = ShiftFamily::new(spec, &state.cdfs, &state.radii);
            Box::new(move |a: &[f64]| fam.optimistic(a))
        }
    };

    let mut scores: Vec<(f64, f64)> = Vec::new();
    grid.for_each(|a| scores.push((opt(a), state.empirical_value(a))));
    if scores.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let top = scores.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    if let Some(prev) = state.previous() {
        if opt(prev) >= top - TIE_TOL {
            return MixtureWeights::new(prev.to_vec());
        }
    }
    let mut best: Option<(usize, f64)> = None;
    for (j, &(o, e)) in scores.iter().enumerate() {
        if o < top - TIE_TOL {
            continue;
        }
        if best.is_none_or(|(_, be)| e > be + TIE_TOL) {
            best = Some((j, e));
        }
    }
    let target = best.expect("maximum is attained").0;
    let mut out = None;
    let mut j = 0;
    grid.for_each(|a| {
        if j == target {
            out = Some(a.to_vec());
        }
        j += 1;
    });
    MixtureWeights::new(out.expect("index within grid"))
}

/// Candidate distributions inside each arm's Wasserstein ball.
///
/// For `theta > 0` a mass `theta` is taken from the bottom of the arm's
/// distribution and placed on its largest atom; for `theta < 0` a mass
/// `|theta|` is taken from the top and placed on its smallest atom. Each
/// family is monotone in stochastic order and its Wasserstein distance from
/// the empirical distribution grows with `|theta|`.
struct ShiftFamily<'a> {
    spec: &'a DistortionSpec,
    /// Union of all atoms.
    xs: Vec<f64>,
    /// `surv[i][j] = P_i(X > xs[j])` for the empirical distributions.
    surv: Vec<Vec<f64>>,
    lo_idx: Vec<usize>,
    hi_idx: Vec<usize>,
    /// Admissible shifts per arm, sorted, always containing zero.
    thetas: Vec<Vec<f64>>,
}

const SHIFT_STEP: f64 = 1e-3;
const ASCENT_SWEEPS: usize = 2;

impl<'a> ShiftFamily<'a> {
    fn new(spec: &'a DistortionSpec, cdfs: &[FiniteCdf], radii: &[f64]) -> Self {
        let mut xs: Vec<f64> = cdfs.iter().flat_map(|f| f.values().iter().copied()).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < ATOM_MERGE_TOL);
        let locate = |x: f64| xs.partition_point(|&u| u < x - ATOM_MERGE_TOL);
        let surv = cdfs
            .iter()
            .map(|f| xs.iter().map(|&x| (1.0 - f.cdf(x)).max(0.0)).collect())
            .collect();
        let lo_idx = cdfs.iter().map(|f| locate(f.min_value())).collect();
        let hi_idx = cdfs.iter().map(|f| locate(f.max_value())).collect();
        let steps = (1.0 / SHIFT_STEP).round() as i64;
        let thetas = cdfs
            .iter()
            .zip(radii)
            .map(|(f, &r)| {
                (-steps..=steps)
                    .map(|j| j as f64 * SHIFT_STEP)
                    .filter(|&th| shift_distance(f, th) <= r)
                    .collect()
            })
            .collect();
        Self {
            spec,
            xs,
            surv,
            lo_idx,
            hi_idx,
            thetas,
        }
    }

    fn shifted(&self, i: usize, theta: f64, j: usize) -> f64 {
        let s = self.surv[i][j];
        if j >= self.hi_idx[i] {
            0.0
        } else if j < self.lo_idx[i] {
            1.0
        } else if theta >= 0.0 {
            (s + theta).min(1.0)
        } else {
            (s + theta).max(0.0)
        }
    }

    fn value(&self, a: &[f64], theta: &[f64]) -> f64 {
        let m = self.xs.len();
        let mut total = self.xs[0] * self.spec.h(1.0);
        for j in 0..m - 1 {
            let s: f64 = (0..a.len()).map(|i| a[i] * self.shifted(i, theta[i], j)).sum();
            total += (self.xs[j + 1] - self.xs[j]) * self.spec.h(s);
        }
        total
    }

    fn optimistic(&self, a: &[f64]) -> f64 {
        let k = a.len();
        let mut theta = vec![0.0; k];
        let mut best = self.value(a, &theta);
        for _ in 0..ASCENT_SWEEPS {
            for i in 0..k {
                if a[i] == 0.0 {
                    continue;
                }
                let keep = theta[i];
                let mut arg = keep;
                for &th in &self.thetas[i] {
                    theta[i] = th;
                    let v = self.value(a, &theta);
                    if v > best {
                        best = v;
                        arg = th;
                    }
                }
                theta[i] = arg;
            }
        }
        best
    }
}

/// Wasserstein distance between `f` and its `theta` shift.
fn shift_distance(f: &FiniteCdf, theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let xs = f.values();
    let cum = f.cumulative();
    let mut w = 0.0;
    for j in 0..xs.len() - 1 {
        let gap = xs[j + 1] - xs[j];
        let c = cum[j].1;
        w += gap * if theta > 0.0 { c.min(theta) } else { (1.0 - c).min(-theta) };
    }
    w
}

/// `UCB_t(a) = V(a, F_t) + L sum_i (a_i r_i)^q`.
pub fn ce_index(state: &UcbState, a: &[f64], spec: &DistortionSpec) -> f64 {
    let bonus: f64 = a
        .iter()
        .zip(&state.radii)
        .map(|(ai, ri)| {
            let x = ai * ri;
            if spec.holder_q == 1.0 {
                x
            } else {
                x.powf(spec.holder_q)
            }
        })
        .sum();
    state.empirical_value(a) + spec.holder_l * bonus
}

fn ce_argmax(state: &UcbState, grid: &GridSpec, spec: &DistortionSpec) -> Result<MixtureWeights> {
    let mut best: Option<(Vec<f64>, f64)> = None;
    grid.for_each(|a| {
        let v = ce_index(state, a, spec);
        match &mut best {
            Some((bw, bv)) if v > *bv + TIE_TOL => {
                bw.copy_from_slice(a);
                *bv = v;
            }
            Some(_) => {}
            None => best = Some((a.to_vec(), v)),
        }
    });
    let (w, top) = best.ok_or(Error::EmptyGrid)?;
    if let Some(prev) = state.previous() {
        if ce_index(state, prev, spec) >= top - TIE_TOL {
            return MixtureWeights::new(prev.to_vec());
        }
    }
    MixtureWeights::new(w)
}

/// The most under-sampled arm, `argmax_i t a_i - tau_i`, lowest index on
/// ties.
pub fn under_sampled_arm(t: u64, a: &[f64], pulls: &[u64]) -> usize {
    let t = t as f64;
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, (&ai, &ni)) in a.iter().zip(pulls).enumerate() {
        let v = t * ai - ni as f64;
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Mixture UCB: forced round-robin exploration, then at every round the
/// most under-sampled arm with respect to the current estimate.
pub fn ucb_run(env: &mut BanditEnv, cfg: &UcbConfig, spec: &DistortionSpec) -> Result<PolicyTrajectory> {
    let k = env.k();
    let horizon = env.horizon();
    if cfg.horizon != horizon {
        return Err(Error::Config(format!(
            "config horizon {} differs from environment horizon {horizon}",
            cfg.horizon
        )));
    }
    cfg.validate(k)?;
    let mut tr = PolicyTrajectory::new(k, horizon);
    if k == 1 {
        tr.record_estimate(0, &[1.0]);
        for _ in 0..horizon {
            let x = env.pull(0);
            tr.record(0, x);
        }
        return Ok(tr);
    }

    let n0 = cfg.forced_per_arm();
    for _ in 0..n0 {
        for i in 0..k {
            let x = env.pull(i);
            tr.record(i, x);
        }
    }
    let mut t = n0 * k as u64;

    let oracle = cfg.oracle_cdfs.is_some();
    let mut state = match &cfg.oracle_cdfs {
        Some(cdfs) => UcbState::with_oracle(spec, cdfs.clone(), horizon)?,
        None => UcbState::from_empirical(spec, tr.empirical(), horizon)?,
    };
    let grid = GridSpec::new(k, cfg.eps, GridScheme::UcbMidpoint)?;
    let estimate = |state: &UcbState| match cfg.variant {
        UcbVariant::Exact => ucb_optimistic(state, &grid, spec),
        UcbVariant::ComputationallyEfficient => ce_argmax(state, &grid, spec),
    };

    let mut a = estimate(&state)?.into_vec();
    tr.record_estimate(t, &a);
    state.set_previous(a.clone());

    while t < horizon {
        let arm = under_sampled_arm(t, &a, tr.pulls());
        let x = env.pull(arm);
        tr.record(arm, x);
        t += 1;
        if !oracle {
            state.update_arm(arm, &tr.empirical()[arm])?;
        }
        if t < horizon && (t - n0 * k as u64).is_multiple_of(cfg.recompute_stride) {
            a = estimate(&state)?.into_vec();
            tr.record_estimate(t, &a);
            state.set_previous(a.clone());
        }
    }
    Ok(tr)
}

/// Warm-up times `(T_0(eps), T(eps))` after which the tracking analysis of
/// the UCB policies applies. `T_0` is the first round from which the
/// exploration-rate confidence width stays below the gap-dependent
/// threshold, and `T(eps) = (2 / eps)(T_0 - 1)`.
///
/// Returns `None` when `T_0` does not fit in 64 bits.
pub fn t_epsilon(k: usize, l: f64, q: f64, delta_min: f64, eps: f64, rho: f64) -> Option<(u64, f64)> {
    let thresh = (delta_min / (2.0 * k as f64 * l)).powf(1.0 / q) / 16.0;
    let e = std::f64::consts::E;
    let width = |s: u64| {
        let s = s as f64;
        ((2.0 * e * s.ln()).sqrt() + 32.0) / (rho * s * eps / 4.0).sqrt()
    };
    // The width decreases for s >= 2; find the first s below threshold.
    let mut hi: u64 = 2;
    while width(hi) > thresh {
        hi = hi.checked_mul(2)?;
    }
    let mut lo = hi / 2;
    if lo < 2 {
        lo = 1;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if width(mid) <= thresh {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t0 = if width(lo) <= thresh && lo >= 2 { lo } else { hi };
    Some((t0, 2.0 / eps * (t0 as f64 - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ArmModel;
    use crate::simplex::oracle_discrete;

    fn gini() -> DistortionSpec {
        "gini".parse().unwrap()
    }

    fn emp(ps: &[(u64, u64)]) -> Vec<EmpiricalCdf> {
        ps.iter()
            .map(|&(zeros, ones)| {
                let mut e = EmpiricalCdf::new();
                e.push_count(0.0, zeros);
                e.push_count(1.0, ones);
                e
            })
            .collect()
    }

    #[test]
    fn zero_radius_gives_discrete_oracle() {
        let cdfs = vec![FiniteCdf::bernoulli(0.4).unwrap(), FiniteCdf::bernoulli(0.9).unwrap()];
        let grid = GridSpec::new(2, 0.05, GridScheme::UcbMidpoint).unwrap();
        let st = UcbState::with_oracle(&gini(), cdfs.clone(), 1000).unwrap();
        let a = ucb_optimistic(&st, &grid, &gini()).unwrap();
        assert_eq!(a, oracle_discrete(&gini(), &cdfs, &grid).unwrap().weights);
    }

    #[test]
    fn zero_radius_general_support_gives_discrete_oracle() {
        let cdfs = vec![
            FiniteCdf::from_masses([(0.0, 0.5), (2.0, 0.5)]).unwrap(),
            FiniteCdf::from_masses([(1.0, 0.7), (1.5, 0.3)]).unwrap(),
        ];
        let grid = GridSpec::new(2, 0.1, GridScheme::UcbMidpoint).unwrap();
        let st = UcbState::with_oracle(&gini(), cdfs.clone(), 1000).unwrap();
        let a = ucb_optimistic(&st, &grid, &gini()).unwrap();
        assert_eq!(a, oracle_discrete(&gini(), &cdfs, &grid).unwrap().weights);
    }

    #[test]
    fn sticky_with_unchanged_state() {
        let mut st = UcbState::from_empirical(&gini(), &emp(&[(60, 40), (10, 90)]), 10_000).unwrap();
        let grid = GridSpec::new(2, 0.1, GridScheme::UcbMidpoint).unwrap();
        let a = ucb_optimistic(&st, &grid, &gini()).unwrap();
        st.set_previous(a.as_slice().to_vec());
        let b = ucb_optimistic(&st, &grid, &gini()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wide_radii_reach_peak_of_h() {
        let st = UcbState::from_empirical(&gini(), &emp(&[(6, 4), (1, 9)]), 10_000).unwrap();
        assert!(st.radii().iter().all(|&r| r > 1.0));
        let grid = GridSpec::new(2, 0.1, GridScheme::UcbMidpoint).unwrap();
        let a = ucb_optimistic(&st, &grid, &gini()).unwrap();
        let ps = bernoulli_means(st.cdfs()).unwrap();
        let lo: Vec<f64> = ps.iter().map(|p| (p - 2.0).max(0.0)).collect();
        let hi: Vec<f64> = ps.iter().map(|p| (p + 2.0).min(1.0)).collect();
        let g = gini();
        assert_eq!(g.max_on(dot(a.as_slice(), &lo), dot(a.as_slice(), &hi)), 0.25);
        // Among the tied points the empirical value decides.
        let best_emp = GridSpec::new(2, 0.1, GridScheme::UcbMidpoint)
            .unwrap()
            .enumerate()
            .iter()
            .map(|w| st.empirical_value(w.as_slice()))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((st.empirical_value(a.as_slice()) - best_emp).abs() < 1e-12);
    }

    #[test]
    fn shift_distance_matches_wasserstein() {
        let f = FiniteCdf::from_masses([(0.0, 0.3), (1.0, 0.5), (4.0, 0.2)]).unwrap();
        for th in [-0.9f64, -0.4, -0.1, 0.1, 0.35, 1.0] {
            let shifted = if th > 0.0 {
                // Move mass th from the bottom to the top atom.
                let mut left = th;
                let mut atoms: Vec<(f64, f64)> = Vec::new();
                for (&x, &m) in f.values().iter().zip(f.masses()) {
                    let take = left.min(m);
                    left -= take;
                    atoms.push((x, m - take));
                }
                atoms.push((4.0, th));
                FiniteCdf::from_masses(atoms).unwrap()
            } else {
                let mut left = -th;
                let mut atoms: Vec<(f64, f64)> = Vec::new();
                for (&x, &m) in f.values().iter().zip(f.masses()).rev() {
                    let take = left.min(m);
                    left -= take;
                    atoms.push((x, m - take));
                }
                atoms.push((0.0, -th));
                FiniteCdf::from_masses(atoms).unwrap()
            };
            let w = crate::dist::wasserstein1(&f, &shifted);
            assert!((shift_distance(&f, th) - w).abs() < 1e-12, "theta={th}");
        }
    }

    #[test]
    fn ce_bonus_examples() {
        let st = UcbState::from_empirical(&gini(), &emp(&[(50, 50), (50, 50)]), 1000).unwrap();
        let r = st.radii()[0];
        let v = st.empirical_value(&[0.5, 0.5]);
        assert!((ce_index(&st, &[0.5, 0.5], &gini()) - v - r).abs() < 1e-12);
        let v = st.empirical_value(&[1.0, 0.0]);
        assert!((ce_index(&st, &[1.0, 0.0], &gini()) - v - r).abs() < 1e-12);
    }

    #[test]
    fn under_sampling_rule() {
        assert_eq!(under_sampled_arm(10, &[0.5, 0.5], &[5, 5]), 0);
        assert_eq!(under_sampled_arm(10, &[0.8, 0.2], &[5, 5]), 0);
        assert_eq!(under_sampled_arm(10, &[0.2, 0.8], &[5, 5]), 1);
    }

    #[test]
    fn single_arm_pulls_only_that_arm() {
        let mut env = BanditEnv::new(vec![ArmModel::bernoulli(0.3).unwrap()], 50, 1, 0).unwrap();
        let cfg = UcbConfig::new(0.1, 0.5, 50, UcbVariant::Exact);
        let tr = ucb_run(&mut env, &cfg, &gini()).unwrap();
        assert_eq!(tr.pulls(), &[50]);
    }

    #[test]
    fn exploration_must_fit() {
        let arms = vec![ArmModel::bernoulli(0.3).unwrap(); 2];
        let mut env = BanditEnv::new(arms, 100, 1, 0).unwrap();
        let mut cfg = UcbConfig::new(0.1, 0.5, 100, UcbVariant::Exact);
        cfg.exploration_per_arm = Some(60);
        assert!(matches!(ucb_run(&mut env, &cfg, &gini()), Err(Error::HorizonTooSmall { .. })));
    }

    #[test]
    fn oracle_tracking_is_within_k_over_t() {
        let arms = vec![ArmModel::bernoulli(0.4).unwrap(), ArmModel::bernoulli(0.9).unwrap()];
        let cdfs: Vec<FiniteCdf> = arms.iter().map(ArmModel::to_cdf).collect();
        let t = 5000;
        let mut env = BanditEnv::new(arms, t, 3, 0).unwrap();
        let mut cfg = UcbConfig::new(0.1, 0.1, t, UcbVariant::Exact);
        cfg.exploration_per_arm = Some(20);
        cfg.oracle_cdfs = Some(cdfs);
        let tr = ucb_run(&mut env, &cfg, &gini()).unwrap();
        assert_eq!(tr.estimate_changes(), 0);
        let a = &tr.estimates()[0].1;
        let warm = (40.0 - 1.0) / a.iter().cloned().fold(1.0, f64::min);
        let mut counts = [0u64; 2];
        for (s, arm) in tr.actions().enumerate() {
            counts[arm] += 1;
            let s = s as f64 + 1.0;
            if s >= warm {
                for i in 0..2 {
                    assert!((counts[i] as f64 / s - a[i]).abs() < 2.0 / s);
                }
            }
        }
    }

    #[test]
    fn t_epsilon_is_consistent() {
        let (t0, te) = t_epsilon(2, 1.0, 1.0, 0.0125, 0.1, 0.1).unwrap();
        let e = std::f64::consts::E;
        let thresh = (0.0125f64 / 4.0) / 16.0;
        let width = |s: f64| ((2.0 * e * s.ln()).sqrt() + 32.0) / (0.1 * s * 0.1 / 4.0).sqrt();
        assert!(width(t0 as f64) <= thresh);
        assert!(width(t0 as f64 - 1.0) > thresh);
        assert!((te - 20.0 * (t0 as f64 - 1.0)).abs() < 1e-6 * te);
    }
}
