//! `holderlab`: run exponent calculations, solves and regularity analyses from JSON configs.
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use holderlab::exponents::{EquationClass, EquationParams, SourceIntegrability};
use holderlab::lab::{
    self, catalog, parse_formats, run_and_report, write_failure_manifest, ExperimentConfig, ExperimentKind,
    SweepParams,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "holderlab", version, about = "Hölder regularity laboratory for degenerate parabolic equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (a single JSON document)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory [default: config `output_dir`, then $HOLDERLAB_OUT, then ./holderlab-out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized sweeps
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Comma-separated artifact formats: csv, json, svg, field
    #[arg(long, global = true, default_value = "csv,json,svg")]
    formats: String,
}

#[derive(Subcommand)]
enum Command {
    /// Sharp Hölder exponents and θ for one parameter tuple
    Exponents(EquationArgs),
    /// Check the integrability window for one parameter tuple
    Admissible(EquationArgs),
    /// Compare a transformed source norm with its predicted scaling factor
    ScaleVerify,
    /// Solve the configured equation
    Solve,
    /// Measure oscillation decay on a solved or loaded field
    Analyze,
    /// Run a built-in experiment by name
    Reproduce {
        name: Option<String>,
        /// List the built-in experiments and exit
        #[arg(long)]
        list: bool,
    },
    /// Exponents over seeded random admissible tuples
    Sweep {
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        count: Option<usize>,
        /// Assumed homogeneous exponent for porous medium / doubly nonlinear tuples
        #[arg(long)]
        homogeneous: Option<f64>,
    },
}

/// Inline equation inputs; each one overrides the config file.
#[derive(Args)]
struct EquationArgs {
    /// heat, p_parabolic, pme or doubly_nonlinear
    #[arg(long)]
    class: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Space integrability exponent (`inf` allowed)
    #[arg(long)]
    q: Option<f64>,
    /// Time integrability exponent (`inf` allowed)
    #[arg(long)]
    r: Option<f64>,
    /// Assumed homogeneous exponent
    #[arg(long)]
    homogeneous: Option<f64>,
}

fn parse_class(s: &str) -> anyhow::Result<EquationClass> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .with_context(|| format!("unknown equation class `{s}`"))
}

impl EquationArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) -> anyhow::Result<()> {
        if self.class.is_some() || self.p.is_some() || self.m.is_some() || self.n.is_some() {
            let base = cfg.equation;
            let class = match &self.class {
                Some(c) => parse_class(c)?,
                None => base.map(|e| e.class).context("--class is required without a config equation")?,
            };
            let default_p = if class == EquationClass::Heat || class == EquationClass::Pme { 2.0 } else { f64::NAN };
            let p = self.p.or(base.map(|e| e.p)).unwrap_or(default_p);
            let m = self.m.or(base.map(|e| e.m)).unwrap_or(1.0);
            let n = self.n.or(base.map(|e| e.n)).context("--n is required")?;
            cfg.equation = Some(EquationParams::new(class, p, m, n)?);
        }
        if self.q.is_some() || self.r.is_some() {
            let base = cfg.integrability;
            let q = self.q.or(base.map(|i| i.q)).context("--q is required")?;
            let r = self.r.or(base.map(|i| i.r)).context("--r is required")?;
            cfg.integrability = Some(SourceIntegrability { q, r });
        }
        if self.homogeneous.is_some() {
            cfg.homogeneous = self.homogeneous;
        }
        Ok(())
    }
}

fn load_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let (Some(fp), Some(dir)) = (&cfg.field_path, path.parent()) {
        if fp.is_relative() {
            cfg.field_path = Some(dir.join(fp));
        }
    }
    Ok(cfg)
}

fn build_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let loaded = cli.config.as_deref().map(load_config).transpose()?;
    let need = |what: &str| -> anyhow::Result<ExperimentConfig> {
        match &loaded {
            Some(c) => Ok(c.clone()),
            None => bail!("`{what}` needs --config <path>"),
        }
    };
    let mut cfg = match &cli.command {
        Command::Exponents(args) | Command::Admissible(args) => {
            let kind = if matches!(cli.command, Command::Exponents(_)) {
                ExperimentKind::Exponents
            } else {
                ExperimentKind::Admissible
            };
            let mut c = loaded.clone().unwrap_or_else(|| ExperimentConfig::new(kind.clone()));
            c.experiment = kind;
            args.apply(&mut c)?;
            c
        }
        Command::ScaleVerify => ExperimentConfig {
            experiment: ExperimentKind::ScaleVerify,
            ..need("scale-verify")?
        },
        Command::Solve => ExperimentConfig {
            experiment: ExperimentKind::Solve,
            ..need("solve")?
        },
        Command::Analyze => ExperimentConfig {
            experiment: ExperimentKind::Analyze,
            ..need("analyze")?
        },
        Command::Reproduce { name, .. } => {
            let name = match (name, &loaded) {
                (Some(n), _) => n.clone(),
                (None, Some(ExperimentConfig {
                    experiment: ExperimentKind::Reproduce { name },
                    ..
                })) => name.clone(),
                _ => bail!("reproduce needs an experiment name; see `holderlab reproduce --list`"),
            };
            let kind = ExperimentKind::Reproduce { name };
            let mut c = loaded.clone().unwrap_or_else(|| ExperimentConfig::new(kind.clone()));
            c.experiment = kind;
            c
        }
        Command::Sweep {
            class,
            count,
            homogeneous,
        } => {
            let mut c = loaded.clone().unwrap_or_else(|| ExperimentConfig::new(ExperimentKind::Sweep));
            c.experiment = ExperimentKind::Sweep;
            let base = c.sweep.clone();
            let class = match class {
                Some(s) => parse_class(s)?,
                None => base.as_ref().map(|s| s.class).unwrap_or(EquationClass::PParabolic),
            };
            c.sweep = Some(SweepParams {
                class,
                count: count.or(base.as_ref().map(|s| s.count)).unwrap_or(100),
                homogeneous: homogeneous.or(base.and_then(|s| s.homogeneous)),
            });
            c
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn output_dir(cli: &Cli, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .or_else(|| std::env::var_os("HOLDERLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("holderlab-out"))
}

fn run(cli: &Cli) -> anyhow::Result<i32> {
    if let Command::Reproduce { list: true, .. } = cli.command {
        for name in catalog::names() {
            println!("{name}");
        }
        return Ok(lab::EXIT_PASS);
    }
    let formats = match parse_formats(&cli.formats) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(lab::EXIT_CONFIG);
        }
    };
    let cfg = match build_config(cli) {
        Ok(c) => c,
        Err(e) => {
            let dir = output_dir(cli, None);
            let err = match e.downcast::<holderlab::Error>() {
                Ok(err) => err,
                Err(other) => holderlab::Error::ConfigInvalid(format!("{other:#}")),
            };
            eprintln!("error: {err}");
            return Ok(write_failure_manifest(&dir, None, &err)?.exit_code);
        }
    };
    let dir = output_dir(cli, Some(&cfg));
    let outcome = run_and_report(&cfg, &formats, &dir)?;

    if let Some(art) = &outcome.artifacts {
        for (k, v) in &art.metrics {
            println!("{k:>28} = {v}");
        }
        for a in &art.assertions {
            let bound = match (a.min, a.max) {
                (Some(lo), Some(hi)) => format!("in [{lo}, {hi}]"),
                (Some(lo), None) => format!(">= {lo}"),
                (None, Some(hi)) => format!("<= {hi}"),
                (None, None) => String::new(),
            };
            let value = a.value.map(|v| v.to_string()).unwrap_or_else(|| "missing".into());
            println!("{} {} = {value} ({bound})", if a.passed { "PASS" } else { "FAIL" }, a.metric);
        }
    }
    if let Some(e) = &outcome.summary.error {
        eprintln!("error: {e}");
    }
    println!("status: {} -> {}", outcome.summary.status, dir.display());
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(lab::EXIT_RUNTIME as u8)
        }
    }
}
