//! Points of the probability simplex, the discretization grids used by the
//! policies, and the oracle searches for the best mixture.

use serde::{Deserialize, Serialize};

use crate::dist::FiniteCdf;
use crate::error::{Error, Result};
use crate::riskmetric::{bernoulli_means, DistortionSpec, MixtureEvaluator};

/// Allowed deviation of a weight vector's sum from one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Values closer than this are treated as equal by every argmax.
pub const TIE_TOL: f64 = 1e-12;

/// Default step on the mean axis for the continuous oracle.
pub const DEFAULT_RESOLUTION: f64 = 1e-4;

/// A point of the simplex: nonnegative weights that sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixtureWeights(Vec<f64>);

impl MixtureWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidWeights("no coordinates".into()));
        }
        if let Some(x) = w.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidWeights(format!("coordinate {x} is not a nonnegative number")));
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("coordinates sum to {s}")));
        }
        // Adding 0.0 turns -0.0 into 0.0.
        Ok(Self(w.into_iter().map(|x| x + 0.0).collect()))
    }

    pub fn vertex(k: usize, i: usize) -> Self {
        let mut w = vec![0.0; k];
        w[i] = 1.0;
        Self(w)
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    /// Pull fractions `counts / sum(counts)`.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidWeights("all counts are zero".into()));
        }
        Ok(Self(counts.iter().map(|&c| c as f64 / n as f64).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn l1(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    /// Index of the single nonzero coordinate, if any.
    pub fn vertex_index(&self) -> Option<usize> {
        let mut nz = self.0.iter().enumerate().filter(|(_, &x)| x > 0.0);
        match (nz.next(), nz.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }
}

impl TryFrom<Vec<f64>> for MixtureWeights {
    type Error = Error;
    fn try_from(w: Vec<f64>) -> Result<Self> {
        Self::new(w)
    }
}

impl From<MixtureWeights> for Vec<f64> {
    fn from(w: MixtureWeights) -> Self {
        w.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScheme {
    /// Coordinates on `{0, eps, 2 eps, ...}`.
    EtcLattice,
    /// Coordinates on the cell midpoints `{eps/2, 3 eps/2, ...}`.
    UcbMidpoint,
}

/// A finite discretization of the simplex.
///
/// The first `K - 1` coordinates lie on the scheme's lattice and the last
/// one takes whatever mass is left, so it may fall off the lattice when
/// `1 / eps` is not an integer or under the midpoint scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub k: usize,
    pub eps: f64,
    pub scheme: GridScheme,
}

impl GridSpec {
    pub fn new(k: usize, eps: f64, scheme: GridScheme) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("grid needs at least one coordinate".into()));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Config(format!("grid step {eps} must lie in (0, 1]")));
        }
        Ok(Self { k, eps, scheme })
    }

    fn offset(&self) -> f64 {
        match self.scheme {
            GridScheme::EtcLattice => 0.0,
            GridScheme::UcbMidpoint => 0.5,
        }
    }

    /// Calls `f` on every grid point in lexicographic order without
    /// materializing the grid.
    pub fn for_each<F: FnMut(&[f64])>(&self, mut f: F) {
        let mut buf = vec![0.0; self.k];
        if self.k == 1 {
            buf[0] = 1.0;
            f(&buf);
            return;
        }
        self.rec(0, 0.0, &mut buf, &mut f);
    }

    fn rec<F: FnMut(&[f64])>(&self, level: usize, units: f64, buf: &mut [f64], f: &mut F) {
        let off = self.offset();
        if level == self.k - 1 {
            let last = 1.0 - self.eps * units;
            if last < -1e-9 {
                return;
            }
            buf[level] = last.max(0.0);
            f(buf);
            return;
        }
        let mut n = 0u64;
        loop {
            let u = units + n as f64 + off;
            if self.eps * u > 1.0 + 1e-9 {
                break;
            }
            buf[level] = (self.eps * (n as f64 + off)).min(1.0);
            self.rec(level + 1, u, buf, f);
            n += 1;
        }
    }

    pub fn enumerate(&self) -> Vec<MixtureWeights> {
        let mut out = Vec::new();
        self.for_each(|w| out.push(MixtureWeights(w.to_vec())));
        out
    }

    pub fn count(&self) -> usize {
        let mut n = 0;
        self.for_each(|_| n += 1);
        n
    }
}

/// Lexicographic enumeration of the simplex lattice of step `eps`.
pub fn enumerate_grid(g: &GridSpec) -> Vec<MixtureWeights> {
    g.enumerate()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    ClosedFormBernoulli,
    GridSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub weights: MixtureWeights,
    pub value: f64,
    pub method: OracleMethod,
}

/// Exhaustive argmax of `V(., F)` over a grid with lexicographic
/// tie-breaking: a later point replaces the incumbent only when it is
/// better by more than [`TIE_TOL`].
pub fn grid_argmax(eval: &MixtureEvaluator, grid: &GridSpec) -> Result<(Vec<f64>, f64)> {
    if grid.k != eval.k() {
        return Err(Error::DimensionMismatch {
            expected: eval.k(),
            got: grid.k,
        });
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    grid.for_each(|w| {
        let v = eval.value(w);
        match &mut best {
            Some((bw, bv)) if v > *bv + TIE_TOL => {
                bw.copy_from_slice(w);
                *bv = v;
            }
            Some(_) => {}
            None => best = Some((w.to_vec(), v)),
        }
    });
    best.ok_or(Error::EmptyGrid)
}

/// Best mixture on a grid.
pub fn oracle_discrete(spec: &DistortionSpec, arms: &[FiniteCdf], grid: &GridSpec) -> Result<OracleResult> {
    let eval = MixtureEvaluator::new(spec, arms)?;
    let (w, v) = grid_argmax(&eval, grid)?;
    Ok(OracleResult {
        weights: MixtureWeights(w),
        value: v,
        method: OracleMethod::GridSearch,
    })
}

/// Gap between the best grid value and the best value that is not tied
/// with it.
pub fn min_gap(spec: &DistortionSpec, arms: &[FiniteCdf], grid: &GridSpec) -> Result<f64> {
    let eval = MixtureEvaluator::new(spec, arms)?;
    if grid.k != eval.k() {
        return Err(Error::DimensionMismatch {
            expected: eval.k(),
            got: grid.k,
        });
    }
    let mut values = Vec::new();
    grid.for_each(|w| values.push(eval.value(w)));
    if values.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let runner_up = values
        .iter()
        .copied()
        .filter(|&v| v < best - TIE_TOL)
        .fold(f64::NEG_INFINITY, f64::max);
    if runner_up == f64::NEG_INFINITY {
        return Err(Error::GapUndefined);
    }
    Ok(best - runner_up)
}

/// Least-squares slope of `log min_gap(eps)` against `log eps`.
pub fn beta_estimate(spec: &DistortionSpec, arms: &[FiniteCdf], eps_sequence: &[f64]) -> Result<f64> {
    if eps_sequence.len() < 3 {
        return Err(Error::InsufficientData("need at least three grid steps".into()));
    }
    let mut pts = Vec::with_capacity(eps_sequence.len());
    for &eps in eps_sequence {
        let g = GridSpec::new(arms.len(), eps, GridScheme::EtcLattice)?;
        pts.push((eps.ln(), min_gap(spec, arms, &g)?.ln()));
    }
    Ok(ls_slope(&pts))
}

pub(crate) fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Upper bound `L (K W)^r (eps / 2)^r` on the value lost by restricting the
/// argmax to a grid of step `eps`.
pub fn discretization_bound(spec: &DistortionSpec, k: usize, w_ratio: f64, r: f64, eps: f64) -> f64 {
    spec.holder_l * (k as f64 * w_ratio).powf(r) * (eps / 2.0).powf(r)
}

/// Best mixture over the whole simplex.
///
/// Bernoulli instances reduce to maximizing `h(m)` over the achievable means
/// `m in [min p, max p]`. The maximizing mean is located by a scan of step
/// `resolution` together with the analytic peak, and the weights returned
/// are the lexicographically smallest that realize it.
///
/// Other instances use the lattice of step `resolution`. When that lattice
/// is too large to scan, a coarser lattice is scanned and the incumbent is
/// refined by pairwise mass transfers down to `resolution`; every supported
/// riskmetric is concave along mixtures, so this local search is global.
pub fn oracle_continuous(spec: &DistortionSpec, arms: &[FiniteCdf], resolution: f64) -> Result<OracleResult> {
    if arms.is_empty() {
        return Err(Error::InvalidDistribution("no arms".into()));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::Config(format!("resolution {resolution} must lie in (0, 1]")));
    }
    if let Some(ps) = bernoulli_means(arms) {
        return Ok(bernoulli_oracle(spec, &ps, resolution));
    }
    general_oracle(spec, arms, resolution)
}

fn bernoulli_oracle(spec: &DistortionSpec, ps: &[f64], resolution: f64) -> OracleResult {
    let lo = ps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ps.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let peak = spec.peak().clamp(lo, hi);
    let mut cands = vec![lo, hi, peak];
    let steps = ((hi - lo) / resolution).floor() as u64;
    // Scan points right next to the peak can round to the same value of h
    // and would then win the tie-break with a slightly wrong mean.
    cands.extend(
        (1..=steps)
            .map(|j| lo + j as f64 * resolution)
            .filter(|&m| m <= hi && (m - peak).abs() > 1e-6),
    );

    let best = cands.iter().map(|&m| spec.h(m)).fold(f64::NEG_INFINITY, f64::max);
    let mut chosen: Option<Vec<f64>> = None;
    // Exact ties only: near a quadratic peak a value tolerance of `t`
    // admits means `sqrt(t)` away from the maximizer.
    for &m in &cands {
        if spec.h(m) < best {
            continue;
        }
        let w = lex_min_weights(ps, m);
        if chosen.as_ref().is_none_or(|c| lex_less(&w, c)) {
            chosen = Some(w);
        }
    }
    let w = chosen.expect("candidate set contains the maximizer");
    let value = spec.h(crate::riskmetric::dot(&w, ps));
    OracleResult {
        weights: MixtureWeights(w),
        value,
        method: OracleMethod::ClosedFormBernoulli,
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Lexicographically smallest weights with `<w, p> = m`, for `m` between
/// the smallest and largest entry of `p`.
///
/// Coordinates are fixed left to right, each at the least value that still
/// lets the remaining arms hit the target.
pub fn lex_min_weights(ps: &[f64], m: f64) -> Vec<f64> {
    let k = ps.len();
    let mut w = vec![0.0; k];
    let mut mass = 1.0_f64;
    let mut target = m;
    for i in 0..k - 1 {
        let rest = &ps[i + 1..];
        let lo = rest.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rest.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // target - a p_i must lie in [(mass - a) lo, (mass - a) hi].
        let mut a_lo = 0.0_f64;
        let mut a_hi = mass;
        for (c, d, at_least) in [(lo - ps[i], mass * lo - target, true), (hi - ps[i], mass * hi - target, false)] {
            if c.abs() < 1e-15 {
                continue;
            }
            let bound = d / c;
            // `c a >= d` for the lower constraint and `c a <= d` for the upper.
            if (c > 0.0) == at_least {
                a_lo = a_lo.max(bound);
            } else {
                a_hi = a_hi.min(bound);
            }
        }
        debug_assert!(a_lo <= a_hi + 1e-9, "target mean outside the reachable range");
        // `+ 0.0` drops a negative zero left by the max above.
        let a = a_lo.clamp(0.0, mass.max(0.0)) + 0.0;
        w[i] = a;
        mass -= a;
        target -= a * ps[i];
    }
    w[k - 1] = mass.max(0.0);
    w
}

const REFINE_GRID_LIMIT: usize = 200_000;

fn general_oracle(spec: &DistortionSpec, arms: &[FiniteCdf], resolution: f64) -> Result<OracleResult> {
    let k = arms.len();
    let eval = MixtureEvaluator::new(spec, arms)?;
    let mut eps = resolution;
    while k > 1 && lattice_size(k, eps) > REFINE_GRID_LIMIT as f64 {
        eps *= 2.0;
    }
    let eps = eps.min(1.0);
    let grid = GridSpec::new(k, eps, GridScheme::EtcLattice)?;
    let (mut w, mut v) = grid_argmax(&eval, &grid)?;

    let mut step = eps / 2.0;
    while eps > resolution && step >= resolution / 2.0 {
        let mut improved = false;
        for i in 0..k {
            for j in 0..k {
                if i == j || w[i] <= 0.0 {
                    continue;
                }
                let d = step.min(w[i]);
                let mut c = w.clone();
                c[i] -= d;
                c[j] += d;
                let cv = eval.value(&c);
                if cv > v + TIE_TOL {
                    w = c;
                    v = cv;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok(OracleResult {
        weights: MixtureWeights(w),
        value: v,
        method: OracleMethod::GridSearch,
    })
}

fn lattice_size(k: usize, eps: f64) -> f64 {
    // C(n + k - 1, k - 1) with n = 1 / eps.
    let n = (1.0 / eps).floor();
    (1..k).fold(1.0, |acc, j| acc * (n + j as f64) / j as f64)
}

/// `V` at every vertex, i.e. each arm on its own.
pub fn vertex_values(spec: &DistortionSpec, arms: &[FiniteCdf]) -> Result<Vec<f64>> {
    arms.iter().map(|f| crate::riskmetric::choquet(spec, f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern(ps: &[f64]) -> Vec<FiniteCdf> {
        ps.iter().map(|&p| FiniteCdf::bernoulli(p).unwrap()).collect()
    }

    fn spec(t: &str) -> DistortionSpec {
        t.parse().unwrap()
    }

    fn pts(g: GridSpec) -> Vec<Vec<f64>> {
        g.enumerate().into_iter().map(MixtureWeights::into_vec).collect()
    }

    #[test]
    fn weights_validation() {
        assert!(MixtureWeights::new(vec![0.5, 0.5]).is_ok());
        assert!(MixtureWeights::new(vec![0.5, 0.6]).is_err());
        assert!(MixtureWeights::new(vec![-0.1, 1.1]).is_err());
        assert!(MixtureWeights::new(vec![]).is_err());
        assert_eq!(MixtureWeights::vertex(3, 1).vertex_index(), Some(1));
        assert_eq!(MixtureWeights::uniform(2).vertex_index(), None);
    }

    #[test]
    fn grid_examples() {
        let g = GridSpec::new(2, 0.5, GridScheme::EtcLattice).unwrap();
        assert_eq!(pts(g), vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
        let g = GridSpec::new(2, 0.5, GridScheme::UcbMidpoint).unwrap();
        assert_eq!(pts(g), vec![vec![0.25, 0.75], vec![0.75, 0.25]]);
        let g = GridSpec::new(1, 0.3, GridScheme::EtcLattice).unwrap();
        assert_eq!(pts(g), vec![vec![1.0]]);
    }

    #[test]
    fn grid_counts_are_compositions() {
        for (k, n, expect) in [(2usize, 10u64, 11usize), (3, 10, 66), (4, 5, 56), (6, 4, 126)] {
            let g = GridSpec::new(k, 1.0 / n as f64, GridScheme::EtcLattice).unwrap();
            assert_eq!(g.count(), expect, "k={k} n={n}");
        }
    }

    #[test]
    fn grid_points_are_valid_and_residual_absorbed() {
        for scheme in [GridScheme::EtcLattice, GridScheme::UcbMidpoint] {
            for eps in [0.3, 0.15, 0.07] {
                let g = GridSpec::new(3, eps, scheme).unwrap();
                for w in g.enumerate() {
                    MixtureWeights::new(w.as_slice().to_vec()).unwrap();
                }
            }
        }
    }

    #[test]
    fn oracle_continuous_examples() {
        let r = oracle_continuous(&spec("gini"), &bern(&[0.4, 0.9]), DEFAULT_RESOLUTION).unwrap();
        assert!((r.weights.as_slice()[0] - 0.8).abs() < 1e-9);
        assert!((r.value - 0.25).abs() < 1e-12);
        assert_eq!(r.method, OracleMethod::ClosedFormBernoulli);

        let r = oracle_continuous(&spec("mean"), &bern(&[0.4, 0.9]), DEFAULT_RESOLUTION).unwrap();
        assert_eq!(r.weights.as_slice(), &[0.0, 1.0]);
        assert!((r.value - 0.9).abs() < 1e-15);

        let r = oracle_continuous(&spec("gini"), &bern(&[0.2, 0.8]), DEFAULT_RESOLUTION).unwrap();
        assert!((r.weights.as_slice()[0] - 0.5).abs() < 1e-9);
        assert!((r.value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn lex_min_weights_hits_target() {
        let ps = [0.9, 0.1, 0.5, 0.3];
        for m in [0.1, 0.2, 0.35, 0.5, 0.77, 0.9] {
            let w = lex_min_weights(&ps, m);
            let s: f64 = w.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!((crate::riskmetric::dot(&w, &ps) - m).abs() < 1e-12, "m={m} w={w:?}");
            assert!(w.iter().all(|&x| x >= 0.0));
        }
        assert_eq!(lex_min_weights(&ps, 0.5), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn oracle_discrete_examples() {
        let g = GridSpec::new(2, 0.5, GridScheme::EtcLattice).unwrap();
        let r = oracle_discrete(&spec("gini"), &bern(&[0.4, 0.9]), &g).unwrap();
        assert_eq!(r.weights.as_slice(), &[1.0, 0.0]);
        assert!((r.value - 0.24).abs() < 1e-15);

        let r = oracle_discrete(&spec("mean"), &bern(&[0.4, 0.9]), &g).unwrap();
        assert_eq!(r.weights.as_slice(), &[0.0, 1.0]);
        assert!((r.value - 0.9).abs() < 1e-15);

        let f = FiniteCdf::from_masses([(0.5, 0.5), (2.0, 0.5)]).unwrap();
        let g1 = GridSpec::new(1, 0.1, GridScheme::EtcLattice).unwrap();
        let r = oracle_discrete(&spec("wang"), std::slice::from_ref(&f), &g1).unwrap();
        assert_eq!(r.weights.as_slice(), &[1.0]);
        assert!((r.value - crate::riskmetric::choquet(&spec("wang"), &f).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn min_gap_examples() {
        let g = GridSpec::new(2, 0.5, GridScheme::EtcLattice).unwrap();
        let d = min_gap(&spec("gini"), &bern(&[0.4, 0.9]), &g).unwrap();
        assert!((d - 0.0125).abs() < 1e-12);
        let d = min_gap(&spec("mean"), &bern(&[0.4, 0.9]), &g).unwrap();
        assert!((d - 0.25).abs() < 1e-12);
        let g1 = GridSpec::new(2, 1.0, GridScheme::EtcLattice).unwrap();
        assert_eq!(min_gap(&spec("gini"), &bern(&[0.3, 0.3]), &g1), Err(Error::GapUndefined));
    }

    #[test]
    fn beta_for_monotone() {
        let arms = bern(&[0.3, 0.55, 0.8]);
        for t in ["mean", "dualpower:2", "quadratic:0.5"] {
            let b = beta_estimate(&spec(t), &arms, &[0.2, 0.1, 0.05, 0.02]).unwrap();
            assert!((b - 1.0).abs() < 0.1, "{t}: {b}");
        }
        let b = beta_estimate(&spec("gini"), &bern(&[0.3, 0.8]), &[0.2, 0.1, 0.05, 0.02]).unwrap();
        assert!(b.is_finite() && b > 0.0);
    }

    #[test]
    fn general_oracle_matches_fine_lattice_for_two_arms() {
        let arms = vec![
            FiniteCdf::from_masses([(0.0, 0.5), (2.0, 0.5)]).unwrap(),
            FiniteCdf::from_masses([(1.0, 0.7), (1.5, 0.3)]).unwrap(),
        ];
        for s in crate::riskmetric::all_kinds() {
            let r = oracle_continuous(&s, &arms, 1e-3).unwrap();
            let g = GridSpec::new(2, 1e-3, GridScheme::EtcLattice).unwrap();
            let d = oracle_discrete(&s, &arms, &g).unwrap();
            assert!((r.value - d.value).abs() < 1e-12, "{s}");
        }
    }

    #[test]
    fn general_oracle_refines_three_arms() {
        let arms = vec![
            FiniteCdf::from_masses([(0.0, 0.5), (2.0, 0.5)]).unwrap(),
            FiniteCdf::from_masses([(1.0, 0.7), (1.5, 0.3)]).unwrap(),
            FiniteCdf::from_masses([(0.2, 0.9), (3.0, 0.1)]).unwrap(),
        ];
        let s = spec("gini");
        let r = oracle_continuous(&s, &arms, 1e-4).unwrap();
        let g = GridSpec::new(3, 0.01, GridScheme::EtcLattice).unwrap();
        let d = oracle_discrete(&s, &arms, &g).unwrap();
        assert!(r.value >= d.value - 1e-12);
    }
}
