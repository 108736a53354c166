use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bilevel_core::bilevel::ParamGrid;
use bilevel_core::io::{self, DataSpec, RunConfig};
use bilevel_core::regularizers::{BaseRegularizer, DoubleIntegrand, PhiSpec, RhoSpec};
use bilevel_core::{Error, ExtendedParam, FamilySpec, Result};

#[derive(Parser)]
#[command(name = "bilevel", version, about = "Bi-level parameter learning for variational denoising")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Family name (weight, weight-l2, exponent, lipschitz-exponent, brezis_nguyen,
    /// aubert_kornprobst, spectral_fractional), optionally `name:dim`, or inline JSON.
    #[arg(long, global = true)]
    family: Option<String>,
    /// Interior sampling grid `lo:hi:count:scale` (scale: linear, log, s-linear, reciprocal).
    #[arg(long, global = true)]
    param_grid: Option<String>,
    /// Whether to evaluate the edge models (on/off).
    #[arg(long, global = true)]
    edges: Option<String>,
    /// Parameter for solve/eval: a number, `lower`, `upper` (or `inf`).
    #[arg(long, global = true, allow_hyphen_values = true)]
    param: Option<String>,
    #[arg(long, global = true, num_args = 1..)]
    data_clean: Vec<PathBuf>,
    #[arg(long, global = true, num_args = 1..)]
    data_noisy: Vec<PathBuf>,
    /// Built-in dataset instead of files.
    #[arg(long, global = true)]
    data_builtin: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; falls back to BILEVEL_THREADS.
    #[arg(long, global = true, env = "BILEVEL_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Learn the parameter on the closed range and write report.json.
    Learn,
    /// Reconstruct the noisy signals at --param.
    Solve,
    /// Evaluate the upper-level functional at --param.
    Eval,
    /// Check the data conditions of the family.
    Conditions,
    /// Sequence scans and monotonicity checks.
    Mosco,
    /// Run a built-in demo and compare with its known values.
    Demo { name: String },
    /// Print the JSON schema of report.json.
    Schema,
}

fn family_from_name(spec: &str) -> Result<FamilySpec> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        return serde_json::from_str(spec).map_err(|e| Error::Config(format!("--family: {e}")));
    }
    let (name, dim) = match spec.split_once(':') {
        Some((n, d)) => (n, d.parse().map_err(|_| Error::Config(format!("bad dimension in `{spec}`")))?),
        None => (spec, 1),
    };
    let name = name.replace('-', "_");
    Ok(match name.as_str() {
        "weight" | "weight_tv" => FamilySpec::Weight { base: BaseRegularizer::Tv },
        "weight_l2" | "quadratic" => FamilySpec::Weight { base: BaseRegularizer::QuadraticL2 },
        "exponent" => FamilySpec::Exponent { integrand: DoubleIntegrand::abs_diff(1.0)? },
        "lipschitz_exponent" => FamilySpec::Exponent { integrand: DoubleIntegrand::diff_quotient(1.0)? },
        "brezis_nguyen" | "bn" => FamilySpec::BrezisNguyen { phi: PhiSpec::quad_cap(dim)?, k_phi: None },
        "aubert_kornprobst" | "ak" => FamilySpec::AubertKornprobst { rho: RhoSpec::unit_ball(dim)? },
        "spectral_fractional" | "spectral" => FamilySpec::SpectralFractional { mu: 0.05, m_max: 64 },
        _ => return Err(Error::Config(format!("unknown family `{spec}`"))),
    })
}

fn parse_param(s: &str) -> Result<ExtendedParam> {
    match s.trim() {
        "lower" | "lower_edge" => Ok(ExtendedParam::LowerEdge),
        "upper" | "upper_edge" | "inf" | "infinity" => Ok(ExtendedParam::UpperEdge),
        t => t
            .parse::<f64>()
            .map(ExtendedParam::Interior)
            .map_err(|_| Error::Config(format!("bad parameter `{t}`"))),
    }
}

fn build_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match (&c.config, &c.family) {
        (Some(p), _) => RunConfig::from_file(p)?,
        (None, Some(f)) => RunConfig::new(family_from_name(f)?),
        (None, None) => return Err(Error::Config("give --config or --family".into())),
    };
    if let (Some(_), Some(f)) = (&c.config, &c.family) {
        cfg.family = family_from_name(f)?;
    }
    if let Some(g) = &c.param_grid {
        cfg.param_grid = Some(g.parse::<ParamGrid>()?);
    }
    if let Some(e) = &c.edges {
        let on = match e.as_str() {
            "on" | "true" | "yes" => true,
            "off" | "false" | "no" => false,
            _ => return Err(Error::Config(format!("--edges takes on/off, got `{e}`"))),
        };
        let mut g = cfg.param_grid();
        g.include_edges = on;
        cfg.param_grid = Some(g);
    }
    if let Some(p) = &c.param {
        cfg.param = Some(parse_param(p)?);
    }
    if let Some(b) = &c.data_builtin {
        cfg.data = DataSpec::Builtin { builtin: b.clone() };
    } else if !c.data_clean.is_empty() || !c.data_noisy.is_empty() {
        cfg.data = DataSpec::Files {
            clean: c.data_clean.clone(),
            noisy: c.data_noisy.clone(),
        };
    }
    if let Some(o) = &c.out {
        cfg.out = Some(o.clone());
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if c.threads.is_some() {
        cfg.threads = c.threads;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<i32> {
    if let Command::Schema = cli.command {
        print!("{}", io::REPORT_SCHEMA);
        return Ok(io::EXIT_OK);
    }
    let cfg = match (&cli.command, &cli.common.config, &cli.common.family) {
        // Demos generate their own data; a config is optional.
        (Command::Demo { .. }, None, None) => {
            let mut c = RunConfig::new(FamilySpec::Weight { base: BaseRegularizer::Tv });
            c.out = cli.common.out.clone();
            c.seed = cli.common.seed.unwrap_or(0);
            c.threads = cli.common.threads;
            c
        }
        _ => build_config(&cli.common)?,
    };
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = match &cli.command {
        Command::Learn => io::cmd_learn(&cfg)?,
        Command::Solve => io::cmd_solve(&cfg)?,
        Command::Eval => io::cmd_eval(&cfg)?,
        Command::Conditions => io::cmd_conditions(&cfg)?,
        Command::Mosco => io::cmd_mosco(&cfg)?,
        Command::Demo { name } => io::cmd_demo(name, &cfg)?.0,
        Command::Schema => unreachable!(),
    };
    println!("{}", out.summary.trim_end());
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(if out.ok { io::EXIT_OK } else { io::EXIT_CHECK_FAILED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(io::exit_code(&e) as u8)
        }
    }
}
