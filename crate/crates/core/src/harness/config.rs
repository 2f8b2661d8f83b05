use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dist::{format_arms, parse_arms, ArmModel};
use crate::error::{Error, Result};
use crate::policy::{parse_policies, PolicyKind};
use crate::riskmetric::DistortionSpec;

/// How the grid step is chosen for a run of `K` arms and horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsRule {
    Fixed(f64),
    /// `sqrt(K ln T / T)`, capped at one.
    SqrtKLogTOverT,
}

impl EpsRule {
    pub fn eval(&self, k: usize, horizon: u64) -> f64 {
        match *self {
            EpsRule::Fixed(e) => e,
            EpsRule::SqrtKLogTOverT => {
                let t = horizon as f64;
                (k as f64 * t.ln() / t).sqrt().min(1.0)
            }
        }
    }
}

impl fmt::Display for EpsRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsRule::Fixed(e) => write!(f, "{e}"),
            EpsRule::SqrtKLogTOverT => f.write_str("sqrt(K logT / T)"),
        }
    }
}

impl FromStr for EpsRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        match compact.as_str() {
            "sqrt(klogt/t)" | "sqrt(klog(t)/t)" | "sqrt(klnt/t)" | "formula" | "auto" => Ok(EpsRule::SqrtKLogTOverT),
            _ => {
                let e: f64 = compact
                    .parse()
                    .map_err(|_| Error::Parse(format!("grid step `{s}` is neither a number nor `sqrt(K logT / T)`")))?;
                if !(e > 0.0 && e <= 1.0) {
                    return Err(Error::Config(format!("grid step {e} must lie in (0, 1]")));
                }
                Ok(EpsRule::Fixed(e))
            }
        }
    }
}

/// Forced exploration of the UCB policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UcbExploration {
    /// `ceil(rho T eps / 4)` pulls per arm.
    Formula,
    /// `ceil(f T)` pulls per arm.
    FractionOfHorizon(f64),
    PerArm(u64),
}

impl UcbExploration {
    pub fn per_arm(&self, horizon: u64) -> Option<u64> {
        match *self {
            UcbExploration::Formula => None,
            UcbExploration::FractionOfHorizon(f) => Some((f * horizon as f64).ceil().max(1.0) as u64),
            UcbExploration::PerArm(n) => Some(n),
        }
    }
}

impl fmt::Display for UcbExploration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UcbExploration::Formula => f.write_str("formula"),
            UcbExploration::FractionOfHorizon(x) => write!(f, "T/{}", 1.0 / x),
            UcbExploration::PerArm(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for UcbExploration {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("formula") {
            return Ok(UcbExploration::Formula);
        }
        if let Some(d) = s.strip_prefix("T/") {
            let d: f64 = d.trim().parse().map_err(|_| Error::Parse(format!("bad exploration fraction `{s}`")))?;
            if !(d >= 1.0) {
                return Err(Error::Config(format!("exploration `{s}` must be T/d with d >= 1")));
            }
            return Ok(UcbExploration::FractionOfHorizon(1.0 / d));
        }
        s.parse()
            .map(UcbExploration::PerArm)
            .map_err(|_| Error::Parse(format!("exploration `{s}` must be `formula`, `T/d` or a pull count")))
    }
}

/// Explore length of the explore-then-commit policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtcExplorationRule {
    /// The gap-dependent length when it fits the horizon, otherwise
    /// `ceil(T^(2/3))` pulls per arm.
    Auto,
    Theoretical,
    PerArm(u64),
}

impl fmt::Display for EtcExplorationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EtcExplorationRule::Auto => f.write_str("auto"),
            EtcExplorationRule::Theoretical => f.write_str("theoretical"),
            EtcExplorationRule::PerArm(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for EtcExplorationRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(EtcExplorationRule::Auto),
            "theoretical" | "theory" => Ok(EtcExplorationRule::Theoretical),
            other => other
                .parse()
                .map(EtcExplorationRule::PerArm)
                .map_err(|_| Error::Parse(format!("ETC exploration `{s}` must be auto, theoretical or a count"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
    Svg,
}

impl FromStr for ExportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            "svg" => Ok(ExportFormat::Svg),
            other => Err(Error::Parse(format!("unknown format `{other}` (csv|json|svg)"))),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
            ExportFormat::Svg => "svg",
        })
    }
}

pub const DESK_TRIALS: u64 = 100;
pub const FULL_SCALE_TRIALS: u64 = 1000;

/// Everything one Monte-Carlo experiment needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: DistortionSpec,
    pub arms: Vec<ArmModel>,
    pub policies: Vec<PolicyKind>,
    /// Each horizon is a separate fixed-horizon run and one checkpoint.
    pub horizons: Vec<u64>,
    pub trials: u64,
    pub eps: EpsRule,
    pub rho: f64,
    pub seed: u64,
    pub delta_min: Option<f64>,
    pub recompute_stride: u64,
    pub ucb_exploration: UcbExploration,
    pub etc_exploration: EtcExplorationRule,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: ExportFormat,
}

impl Default for ExperimentConfig {
    /// The two-arm Gini instance with Bernoulli(0.4) and Bernoulli(0.9).
    fn default() -> Self {
        Self {
            spec: "gini".parse().expect("builtin token"),
            arms: vec![
                ArmModel::bernoulli(0.4).expect("valid"),
                ArmModel::bernoulli(0.9).expect("valid"),
            ],
            policies: vec![PolicyKind::Etc, PolicyKind::Ucb],
            horizons: vec![100_000],
            trials: DESK_TRIALS,
            eps: EpsRule::SqrtKLogTOverT,
            rho: 0.1,
            seed: 0,
            delta_min: None,
            recompute_stride: 1,
            ucb_exploration: UcbExploration::Formula,
            etc_exploration: EtcExplorationRule::Auto,
            threads: None,
            out: None,
            format: ExportFormat::Csv,
        }
    }
}

/// Keys accepted in config files, identical to the long CLI flag names.
pub const CONFIG_KEYS: &[&str] = &[
    "riskmetric",
    "arms",
    "policy",
    "horizon",
    "trials",
    "eps",
    "eps-rule",
    "rho",
    "seed",
    "delta-min",
    "recompute-stride",
    "ucb-exploration",
    "etc-exploration",
    "threads",
    "out",
    "format",
    "paper-scale",
];

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .replace('_', "")
        .parse()
        .map_err(|_| Error::Parse(format!("`{key}`: cannot parse `{v}`")))
}

/// Parses `1e5`, `100000` or `100_000` as a count.
pub fn parse_count(key: &str, v: &str) -> Result<u64> {
    let f: f64 = parse_num(key, v)?;
    if !(f >= 0.0) || f.fract() != 0.0 || f > u64::MAX as f64 {
        return Err(Error::Parse(format!("`{key}`: `{v}` is not a nonnegative integer")));
    }
    Ok(f as u64)
}

impl ExperimentConfig {
    /// Sets one key. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-").to_ascii_lowercase();
        let v = value.trim();
        match key.as_str() {
            "riskmetric" => self.spec = v.parse()?,
            "arms" => self.arms = parse_arms(v)?,
            "policy" | "policies" => self.policies = parse_policies(v)?,
            "horizon" | "horizons" => {
                self.horizons = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse_count("horizon", s))
                    .collect::<Result<_>>()?
            }
            "trials" => self.trials = parse_count("trials", v)?,
            "eps" | "eps-rule" => self.eps = v.parse()?,
            "rho" => self.rho = parse_num("rho", v)?,
            "seed" => self.seed = parse_count("seed", v)?,
            "delta-min" => self.delta_min = Some(parse_num("delta-min", v)?),
            "recompute-stride" => self.recompute_stride = parse_count("recompute-stride", v)?,
            "ucb-exploration" => self.ucb_exploration = v.parse()?,
            "etc-exploration" => self.etc_exploration = v.parse()?,
            "threads" => self.threads = Some(parse_count("threads", v)? as usize),
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = v.parse()?,
            "paper-scale" => {
                if parse_bool(v)? {
                    self.apply_full_scale();
                }
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Full-scale trial count, as used for publication-quality runs.
    pub fn apply_full_scale(&mut self) {
        self.trials = FULL_SCALE_TRIALS;
    }

    /// Applies `key = value` pairs in order.
    pub fn apply_all<'a, I>(&mut self, pairs: I) -> Result<()>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Reads a flat `key = value` file. `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        cfg.apply_all(parse_kv(&text)?.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trial count must be at least 1".into()));
        }
        if self.arms.is_empty() {
            return Err(Error::Config("at least one arm is required".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("at least one policy is required".into()));
        }
        if self.horizons.is_empty() {
            return Err(Error::Config("at least one horizon is required".into()));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::Config(format!("rho {} must lie in (0, 1)", self.rho)));
        }
        if self.recompute_stride == 0 {
            return Err(Error::Config("recompute stride must be at least 1".into()));
        }
        if let Some(d) = self.delta_min {
            if !(d > 0.0) {
                return Err(Error::Config(format!("gap override {d} must be positive")));
            }
        }
        Ok(())
    }

    /// Key/value echo stored with every result.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("riskmetric".into(), self.spec.to_string());
        m.insert("arms".into(), format_arms(&self.arms));
        m.insert(
            "policy".into(),
            self.policies.iter().map(|p| p.token()).collect::<Vec<_>>().join(","),
        );
        m.insert(
            "horizon".into(),
            self.horizons.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","),
        );
        m.insert("trials".into(), self.trials.to_string());
        m.insert("eps".into(), self.eps.to_string());
        m.insert("rho".into(), self.rho.to_string());
        m.insert("seed".into(), self.seed.to_string());
        if let Some(d) = self.delta_min {
            m.insert("delta-min".into(), d.to_string());
        }
        m.insert("recompute-stride".into(), self.recompute_stride.to_string());
        m.insert("ucb-exploration".into(), self.ucb_exploration.to_string());
        m.insert("etc-exploration".into(), self.etc_exploration.to_string());
        m
    }
}

fn parse_bool(v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(Error::Parse(format!("`{other}` is not a boolean"))),
    }
}

/// Splits flat `key = value` text into pairs in file order.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_formula() {
        let e = EpsRule::SqrtKLogTOverT.eval(2, 100_000);
        assert!((e - (2.0 * (1e5f64).ln() / 1e5).sqrt()).abs() < 1e-15);
        assert_eq!("sqrt(K logT / T)".parse::<EpsRule>().unwrap(), EpsRule::SqrtKLogTOverT);
        assert_eq!("0.1".parse::<EpsRule>().unwrap(), EpsRule::Fixed(0.1));
        assert!("1.5".parse::<EpsRule>().is_err());
    }

    #[test]
    fn file_then_override() {
        let text = "# comment\nriskmetric = cvar:0.5\narms = bern:0.2,bern:0.7\nhorizon = 1e4, 2e4\ntrials=10\n";
        let mut cfg = ExperimentConfig::default();
        cfg.apply_all(parse_kv(text).unwrap().iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        assert_eq!(cfg.horizons, vec![10_000, 20_000]);
        cfg.set("trials", "3").unwrap();
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.spec.to_string(), "cvar:0.5");
        assert!(cfg.set("bogus", "1").is_err());
    }

    #[test]
    fn exploration_tokens() {
        assert_eq!("T/10".parse::<UcbExploration>().unwrap().per_arm(100_000), Some(10_000));
        assert_eq!("formula".parse::<UcbExploration>().unwrap(), UcbExploration::Formula);
        assert_eq!("250".parse::<EtcExplorationRule>().unwrap(), EtcExplorationRule::PerArm(250));
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = ExperimentConfig { trials: 0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
