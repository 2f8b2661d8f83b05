//! Distortion functions and exact evaluation of distortion riskmetrics.
//!
//! A distortion riskmetric maps a distribution `F` on the nonnegative reals
//! to the Choquet integral `U_h(F) = integral_0^inf h(1 - F(x)) dx`. For a
//! finitely supported `F` this is a finite sum over the gaps between atoms,
//! which is what [`choquet`] evaluates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::{ArmModel, FiniteCdf};
use crate::error::{Error, Result};
use crate::simplex::MixtureWeights;

/// The supported distortion functions with their parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistortionKind {
    RiskNeutral,
    /// `1 - (1 - u)^s`, `s >= 2`.
    DualPower { s: f64 },
    /// `(1 + s) u - s u^2`, `s in [0, 1]`.
    Quadratic { s: f64 },
    /// `min(u / (1 - alpha), 1)`, `alpha in (0, 1)`.
    CVaR { alpha: f64 },
    /// Proportional hazard transform `u^s`, `s in (0, 1)`.
    Pht { s: f64 },
    /// `min(u, 1 - u)`.
    MeanMedianDeviation,
    /// Inter-ES range at level one half: `2 min(u, 1 - u)`.
    InterEsRange,
    /// `sqrt(u) - u`.
    WangRightTail,
    /// `u (1 - u)`.
    GiniDeviation,
}

/// A distortion function together with its continuity metadata.
///
/// `holder_q` and `holder_l` bound `U_h(G1) - U_h(G2) <= L W1(G1, G2)^q`.
/// `holder_r` is the worst case exponent of the bound around the optimal
/// mixture; [`effective_r`] sharpens it for a concrete Bernoulli instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionSpec {
    pub kind: DistortionKind,
    pub holder_q: f64,
    pub holder_r: f64,
    pub holder_l: f64,
    /// Gap exponent, where it is known independently of the instance.
    pub beta: Option<f64>,
    pub monotone: bool,
}

impl DistortionSpec {
    pub fn new(kind: DistortionKind) -> Result<Self> {
        use DistortionKind::*;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let (q, r, l, beta, monotone) = match kind {
            RiskNeutral => (1.0, 1.0, 1.0, Some(1.0), true),
            DualPower { s } => {
                if !(s >= 2.0 && s.is_finite()) {
                    return bad(format!("dual power s={s} must be >= 2"));
                }
                (1.0, 1.0, s, Some(1.0), true)
            }
            Quadratic { s } => {
                if !(0.0..=1.0).contains(&s) {
                    return bad(format!("quadratic s={s} must lie in [0, 1]"));
                }
                (1.0, 1.0, 1.0 + s, Some(1.0), true)
            }
            CVaR { alpha } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return bad(format!("cvar alpha={alpha} must lie in (0, 1)"));
                }
                // Lipschitz constant of h; beta only holds conditionally.
                (1.0, 1.0, 1.0 / (1.0 - alpha), None, true)
            }
            Pht { s } => {
                if !(s > 0.0 && s < 1.0) {
                    return bad(format!("pht s={s} must lie in (0, 1)"));
                }
                (s, s, 1.0, Some(1.0), true)
            }
            MeanMedianDeviation => (1.0, 1.0, 1.0, None, false),
            InterEsRange => (1.0, 1.0, 2.0, None, false),
            WangRightTail => (0.5, 1.0, 1.0, None, false),
            GiniDeviation => (1.0, 2.0, 1.0, None, false),
        };
        Ok(Self {
            kind,
            holder_q: q,
            holder_r: r,
            holder_l: l,
            beta,
            monotone,
        })
    }

    /// `h(u)`. Inputs are clamped to `[0, 1]` so that rounding drift in a
    /// mixture coordinate can never leave the domain.
    pub fn h(&self, u: f64) -> f64 {
        use DistortionKind::*;
        let u = u.clamp(0.0, 1.0);
        match self.kind {
            RiskNeutral => u,
            DualPower { s } => 1.0 - (1.0 - u).powf(s),
            Quadratic { s } => (1.0 + s) * u - s * u * u,
            CVaR { alpha } => (u / (1.0 - alpha)).min(1.0),
            Pht { s } => u.powf(s),
            MeanMedianDeviation => u.min(1.0 - u),
            InterEsRange => 2.0 * u.min(1.0 - u),
            WangRightTail => u.sqrt() - u,
            GiniDeviation => u * (1.0 - u),
        }
    }

    /// Smallest maximizer of `h` on `[0, 1]`.
    ///
    /// Every supported `h` is concave, so the maximum of `h` over an interval
    /// `[a, b]` sits at `peak().clamp(a, b)`.
    pub fn peak(&self) -> f64 {
        use DistortionKind::*;
        match self.kind {
            RiskNeutral | DualPower { .. } | Quadratic { .. } | Pht { .. } => 1.0,
            CVaR { alpha } => 1.0 - alpha,
            MeanMedianDeviation | InterEsRange | GiniDeviation => 0.5,
            WangRightTail => 0.25,
        }
    }

    /// `max_u h(u)`.
    pub fn h_max(&self) -> f64 {
        self.h(self.peak())
    }

    /// Whether `h` is concave. True for every supported kind; kept as a
    /// predicate so that properties relying on concavity say so.
    pub fn is_concave(&self) -> bool {
        true
    }

    /// Maximum of `h` over `[lo, hi]`, exact by concavity.
    pub fn max_on(&self, lo: f64, hi: f64) -> f64 {
        self.h(self.peak().clamp(lo, hi))
    }
}

impl FromStr for DistortionSpec {
    type Err = Error;

    /// Tokens: `mean`, `dualpower:2`, `quadratic:0.5`, `cvar:0.75`,
    /// `pht:0.5`, `mmd`, `ier`, `wang`, `gini`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim().to_string(), Some(a.trim().to_string())),
            None => (s.clone(), None),
        };
        let num = |what: &str| -> Result<f64> {
            let a = arg
                .as_deref()
                .ok_or_else(|| Error::Parse(format!("`{what}` needs a parameter, e.g. `{what}:0.5`")))?;
            a.parse::<f64>()
                .map_err(|_| Error::Parse(format!("`{a}` is not a number")))
        };
        let no_arg = |kind: DistortionKind| -> Result<DistortionKind> {
            match &arg {
                Some(a) => Err(Error::Parse(format!("`{name}` takes no parameter, got `{a}`"))),
                None => Ok(kind),
            }
        };
        use DistortionKind::*;
        let kind = match name.as_str() {
            "mean" | "neutral" | "riskneutral" => no_arg(RiskNeutral)?,
            "dualpower" | "dp" => DualPower { s: num("dualpower")? },
            "quadratic" | "quad" => Quadratic { s: num("quadratic")? },
            "cvar" => CVaR { alpha: num("cvar")? },
            "pht" => Pht { s: num("pht")? },
            "mmd" => no_arg(MeanMedianDeviation)?,
            "ier" => no_arg(InterEsRange)?,
            "wang" => no_arg(WangRightTail)?,
            "gini" => no_arg(GiniDeviation)?,
            other => return Err(Error::Parse(format!("unknown riskmetric `{other}`"))),
        };
        DistortionSpec::new(kind)
    }
}

impl fmt::Display for DistortionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DistortionKind::*;
        match self.kind {
            RiskNeutral => write!(f, "mean"),
            DualPower { s } => write!(f, "dualpower:{s}"),
            Quadratic { s } => write!(f, "quadratic:{s}"),
            CVaR { alpha } => write!(f, "cvar:{alpha}"),
            Pht { s } => write!(f, "pht:{s}"),
            MeanMedianDeviation => write!(f, "mmd"),
            InterEsRange => write!(f, "ier"),
            WangRightTail => write!(f, "wang"),
            GiniDeviation => write!(f, "gini"),
        }
    }
}

/// All nine kinds with representative parameters.
pub fn all_kinds() -> Vec<DistortionSpec> {
    ["mean", "dualpower:2", "quadratic:0.5", "cvar:0.75", "pht:0.5", "mmd", "ier", "wang", "gini"]
        .iter()
        .map(|t| t.parse().expect("built-in token"))
        .collect()
}

pub fn eval_h(spec: &DistortionSpec, u: f64) -> f64 {
    spec.h(u)
}

/// Exact Choquet integral of `h` against a finitely supported distribution
/// on the nonnegative reals.
pub fn choquet(spec: &DistortionSpec, cdf: &FiniteCdf) -> Result<f64> {
    let xs = cdf.values();
    if let Some(&x) = xs.iter().find(|&&x| x < 0.0) {
        return Err(Error::NegativeSupport(x));
    }
    let surv = cdf.survival_at_atoms();
    let mut total = xs[0] * spec.h(1.0);
    for j in 0..xs.len() - 1 {
        total += (xs[j + 1] - xs[j]) * spec.h(surv[j]);
    }
    Ok(total)
}

/// `V(alpha, F)`: the riskmetric of the mixture `sum_i alpha_i F_i`.
///
/// All-Bernoulli instances use the closed form `h(<alpha, p>)`.
pub fn mixture_value(spec: &DistortionSpec, weights: &MixtureWeights, arms: &[FiniteCdf]) -> Result<f64> {
    let w = weights.as_slice();
    if w.len() != arms.len() {
        return Err(Error::DimensionMismatch {
            expected: arms.len(),
            got: w.len(),
        });
    }
    if let Some(ps) = bernoulli_means(arms) {
        return Ok(spec.h(dot(w, &ps)));
    }
    choquet(spec, &crate::dist::mix(weights, arms)?)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Bernoulli parameters if every arm is supported in `{0, 1}`.
pub fn bernoulli_means(arms: &[FiniteCdf]) -> Option<Vec<f64>> {
    arms.iter().map(FiniteCdf::bernoulli_mean).collect()
}

/// Repeated evaluation of `V(., F)` for a fixed instance.
///
/// The general path keeps the union support and every arm's survival
/// function on it, so one evaluation costs `O(K * atoms)` with no
/// allocation or sorting.
#[derive(Debug, Clone)]
pub struct MixtureEvaluator {
    spec: DistortionSpec,
    kind: EvalKind,
}

#[derive(Debug, Clone)]
enum EvalKind {
    Bernoulli(Vec<f64>),
    General {
        xs: Vec<f64>,
        /// `surv[i][j] = P_i(X > xs[j])`
        surv: Vec<Vec<f64>>,
    },
}

impl MixtureEvaluator {
    pub fn new(spec: &DistortionSpec, arms: &[FiniteCdf]) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidDistribution("no arms".into()));
        }
        if let Some(ps) = bernoulli_means(arms) {
            return Ok(Self {
                spec: *spec,
                kind: EvalKind::Bernoulli(ps),
            });
        }
        let mut xs: Vec<f64> = arms.iter().flat_map(|f| f.values().iter().copied()).collect();
        if let Some(&x) = xs.iter().find(|&&x| x < 0.0) {
            return Err(Error::NegativeSupport(x));
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < crate::dist::ATOM_MERGE_TOL);
        let surv = arms
            .iter()
            .map(|f| xs.iter().map(|&x| 1.0 - f.cdf(x)).map(|s| s.max(0.0)).collect())
            .collect();
        Ok(Self {
            spec: *spec,
            kind: EvalKind::General { xs, surv },
        })
    }

    pub fn k(&self) -> usize {
        match &self.kind {
            EvalKind::Bernoulli(p) => p.len(),
            EvalKind::General { surv, .. } => surv.len(),
        }
    }

    pub fn spec(&self) -> &DistortionSpec {
        &self.spec
    }

    pub fn bernoulli_means(&self) -> Option<&[f64]> {
        match &self.kind {
            EvalKind::Bernoulli(p) => Some(p),
            EvalKind::General { .. } => None,
        }
    }

    /// `V(w, F)` for raw weights; the caller guarantees `w` is on the simplex.
    pub fn value(&self, w: &[f64]) -> f64 {
        match &self.kind {
            EvalKind::Bernoulli(ps) => self.spec.h(dot(w, ps)),
            EvalKind::General { xs, surv } => {
                let mut total = xs[0] * self.spec.h(1.0);
                for j in 0..xs.len() - 1 {
                    let s: f64 = w.iter().zip(surv).map(|(wi, si)| wi * si[j]).sum();
                    total += (xs[j + 1] - xs[j]) * self.spec.h(s);
                }
                total
            }
        }
    }
}

/// Mixture exponent `r` specialized to a Bernoulli instance.
///
/// The peaked distortions only earn their table exponent when the arm means
/// straddle the peak; otherwise the optimum is a vertex where `h` has a
/// nonzero slope. Non-Bernoulli instances fall back to `r = q`, which is
/// always valid.
pub fn effective_r(spec: &DistortionSpec, arms: &[ArmModel]) -> f64 {
    let ps: Option<Vec<f64>> = arms.iter().map(ArmModel::bernoulli_p).collect();
    let Some(ps) = ps else {
        return spec.holder_q;
    };
    let lo = ps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match spec.kind {
        DistortionKind::GiniDeviation => {
            if lo <= 0.5 && 0.5 <= hi {
                2.0
            } else {
                1.0
            }
        }
        DistortionKind::WangRightTail => {
            // With every mean left of the peak the optimum is the largest
            // mean, where h only behaves like a square root.
            if hi >= 0.25 {
                1.0
            } else {
                0.5
            }
        }
        _ => spec.holder_r,
    }
}

/// Gap exponent for a concrete instance, where it is characterized.
pub fn beta_for_instance(spec: &DistortionSpec, arms: &[ArmModel]) -> Option<f64> {
    match spec.kind {
        DistortionKind::CVaR { alpha } => arms
            .iter()
            .all(|a| a.mean() < 1.0 - alpha)
            .then_some(1.0),
        _ => spec.beta,
    }
}

/// Upper bound `B` on the riskmetric over the convex hull of the arms.
pub fn upper_bound(spec: &DistortionSpec, arms: &[ArmModel]) -> f64 {
    let top = arms.iter().map(ArmModel::max_value).fold(0.0, f64::max);
    top * spec.h_max()
}
