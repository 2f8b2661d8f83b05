//! Command-line front end for the drbandit toolkit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use drbandit::dist::{parse_arms, ArmModel, FiniteCdf};
use drbandit::harness::{
    self, parse_csv, run_experiment, sweep, AggregateResult, ExperimentConfig, ExportFormat, SweepKind,
};
use drbandit::policy::{n_epsilon_value, PolicyKind};
use drbandit::riskmetric::{all_kinds, choquet, eval_h, DistortionSpec};
use drbandit::simplex::{min_gap, oracle_continuous, GridScheme, GridSpec, DEFAULT_RESOLUTION};
use drbandit::{Error, Result};

#[derive(Parser)]
#[command(name = "drbandit", version, about = "Risk-sensitive mixture bandits under distortion riskmetrics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimal mixture of an instance.
    Oracle {
        #[arg(long, default_value = "gini")]
        riskmetric: String,
        #[arg(long, default_value = "bern:0.4,bern:0.9")]
        arms: String,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: f64,
    },
    /// Minimum sub-optimality gap of the grid and the resulting ETC
    /// exploration length.
    Gap {
        #[arg(long, default_value = "gini")]
        riskmetric: String,
        #[arg(long, default_value = "bern:0.4,bern:0.9")]
        arms: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = Scheme::Etc)]
        scheme: Scheme,
        /// Horizon used for the exploration length.
        #[arg(long)]
        horizon: Option<String>,
    },
    /// Monte-Carlo regret at one or more horizons.
    Run(Common),
    /// Regret across a swept parameter.
    Sweep {
        #[arg(long, value_parser = parse_sweep)]
        kind: SweepKind,
        /// Comma separated values; defaults depend on the sweep.
        #[arg(long)]
        values: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Scaling exponent of mean regret from a results CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "ucb")]
        policy: String,
    },
    /// Quick self-check of closed forms and the two-arm Gini oracle.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Etc,
    Ucb,
}

fn parse_sweep(s: &str) -> std::result::Result<SweepKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    riskmetric: Option<String>,
    #[arg(long)]
    arms: Option<String>,
    #[arg(long)]
    policy: Option<String>,
    /// Comma separated horizons, each one checkpoint.
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Fixed grid step.
    #[arg(long, conflicts_with = "eps_rule")]
    eps: Option<String>,
    /// Grid-step formula, `sqrt(K logT / T)`.
    #[arg(long)]
    eps_rule: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    delta_min: Option<String>,
    #[arg(long)]
    recompute_stride: Option<String>,
    /// `formula`, `T/d` or a pull count.
    #[arg(long)]
    ucb_exploration: Option<String>,
    /// `auto`, `theoretical` or a pull count.
    #[arg(long)]
    etc_exploration: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Full-scale trial count (1000 trials).
    #[arg(long)]
    paper_scale: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let out = self.out.as_ref().map(|p| p.to_string_lossy().into_owned());
        let flags: [(&str, Option<&String>); 16] = [
            ("riskmetric", self.riskmetric.as_ref()),
            ("arms", self.arms.as_ref()),
            ("policy", self.policy.as_ref()),
            ("horizon", self.horizon.as_ref()),
            ("trials", self.trials.as_ref()),
            ("eps", self.eps.as_ref()),
            ("eps-rule", self.eps_rule.as_ref()),
            ("rho", self.rho.as_ref()),
            ("seed", self.seed.as_ref()),
            ("delta-min", self.delta_min.as_ref()),
            ("recompute-stride", self.recompute_stride.as_ref()),
            ("ucb-exploration", self.ucb_exploration.as_ref()),
            ("etc-exploration", self.etc_exploration.as_ref()),
            ("threads", self.threads.as_ref()),
            ("out", out.as_ref()),
            ("format", self.format.as_ref()),
        ];
        if self.paper_scale {
            cfg.apply_full_scale();
        }
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn instance(riskmetric: &str, arms: &str) -> Result<(DistortionSpec, Vec<ArmModel>, Vec<FiniteCdf>)> {
    let spec: DistortionSpec = riskmetric.parse()?;
    let arms = parse_arms(arms)?;
    let cdfs = arms.iter().map(ArmModel::to_cdf).collect();
    Ok((spec, arms, cdfs))
}

fn emit(res: &AggregateResult, cfg: &ExperimentConfig) -> Result<()> {
    for n in &res.notes {
        eprintln!("note: {n}");
    }
    match &cfg.out {
        Some(p) => {
            harness::export(res, cfg.format, p)?;
            eprintln!("wrote {}", p.display());
        }
        None => {
            let text = match cfg.format {
                ExportFormat::Csv => harness::to_csv(res)?,
                ExportFormat::Json => harness::to_json(res)?,
                ExportFormat::Svg => harness::to_svg(res)?,
            };
            print!("{text}");
        }
    }
    Ok(())
}

fn fmt_weights(w: &[f64]) -> String {
    let parts: Vec<String> = w.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn verify() -> Result<bool> {
    let mut ok = true;
    let mut check = |name: &str, pass: bool| {
        println!("{} {name}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    };
    let closed_form = all_kinds().iter().all(|s| {
        (1..20).all(|j| {
            let p = j as f64 / 20.0;
            let c = choquet(s, &FiniteCdf::bernoulli(p).expect("valid")).expect("nonnegative");
            (c - eval_h(s, p)).abs() < 1e-12
        })
    });
    check("Bernoulli riskmetric equals h(p)", closed_form);
    let (spec, _, cdfs) = instance("gini", "bern:0.4,bern:0.9")?;
    let o = oracle_continuous(&spec, &cdfs, DEFAULT_RESOLUTION)?;
    let w = o.weights.as_slice();
    check(
        "two-arm Gini oracle mixture is (0.8, 0.2) with value 0.25",
        (w[0] - 0.8).abs() < 1e-3 && (w[1] - 0.2).abs() < 1e-3 && (o.value - 0.25).abs() < 1e-6,
    );
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Oracle {
            riskmetric,
            arms,
            resolution,
        } => {
            let (spec, _, cdfs) = instance(&riskmetric, &arms)?;
            let o = oracle_continuous(&spec, &cdfs, resolution)?;
            println!("riskmetric {spec}");
            println!("weights    {}", fmt_weights(o.weights.as_slice()));
            println!("value      {:.12}", o.value);
            println!("method     {:?}", o.method);
        }
        Cmd::Gap {
            riskmetric,
            arms,
            eps,
            scheme,
            horizon,
        } => {
            let (spec, arms, cdfs) = instance(&riskmetric, &arms)?;
            let scheme = match scheme {
                Scheme::Etc => GridScheme::EtcLattice,
                Scheme::Ucb => GridScheme::UcbMidpoint,
            };
            let grid = GridSpec::new(arms.len(), eps, scheme)?;
            let d = min_gap(&spec, &cdfs, &grid)?;
            println!("grid points {}", grid.count());
            println!("min gap     {d:.6e}");
            if let Some(h) = horizon {
                let t = harness::parse_count("horizon", &h)?;
                let n = n_epsilon_value(arms.len(), spec.holder_l, spec.holder_q, d, eps, t);
                println!("N(eps)      {n:.6e} ({} horizon {t})", if n <= t as f64 { "fits" } else { "exceeds" });
            }
        }
        Cmd::Run(common) => {
            let cfg = common.config()?;
            let res = run_experiment(&cfg)?;
            emit(&res, &cfg)?;
        }
        Cmd::Sweep { kind, values, common } => {
            let cfg = common.config()?;
            let values = match values {
                Some(v) => v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad sweep value `{s}`"))))
                    .collect::<Result<Vec<_>>>()?,
                None => kind.default_values(),
            };
            let res = sweep(kind, &cfg, &values)?;
            emit(&res, &cfg)?;
        }
        Cmd::Fit { input, policy } => {
            let policy: PolicyKind = policy.parse()?;
            let rows = parse_csv(&std::fs::read_to_string(&input)?)?;
            let points: Vec<(u64, f64)> = rows
                .iter()
                .filter(|r| r.policy == policy)
                .map(|r| (r.checkpoint, r.mean))
                .collect();
            let fit = harness::fit_power_law(&points)?;
            println!("nu        {:.4}", fit.nu);
            println!("used      {:?}", fit.used);
            if !fit.excluded.is_empty() {
                println!("excluded  {:?} (nonpositive mean regret)", fit.excluded);
            }
        }
        Cmd::Verify => return verify(),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
