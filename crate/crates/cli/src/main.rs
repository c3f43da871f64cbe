use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use loewner_lab::disc::DiscSpec;
use loewner_lab::geometry::{GeometryKind, GeometrySpec};
use loewner_lab::reports::{
    emit_report, error_exit_code, run_experiment, ExperimentConfig, ExperimentKind, EXIT_USAGE,
};
use loewner_lab::LabError;

/// Batch experiments on Loewner chains, Caratheodory families and sharp
/// coefficient bounds.
#[derive(Parser, Debug)]
#[command(name = "loewner-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form versus boundary-grid d1 table.
    D1(Common),
    /// Radial functional a0 against d1.
    A0(Common),
    /// Certify a canonical (or inflated) shear field in M_g.
    Certify(Common),
    /// Integrator checks on the canonical shear field.
    FlowCheck(Common),
    /// Support-point scan of the coefficient functional L_{i,j}.
    Scan(Common),
    /// Diagonal and mixed coefficient bounds by |g'(0)|.
    Gprime(Common),
    /// Growth of the unbounded support map.
    UnboundedGrowth(Common),
    /// Shearing commutes with parametric limits.
    ShearCommute(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path (JSON); a CSV companion is written for tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Disc function family (moebius, starlike_order, almost_starlike, strongly_starlike).
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Parameter grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    /// Ball geometry (euclidean, polydisc, spectral2).
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    i: Option<usize>,
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    pieces: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<i8>,
    /// Leave the wall time out of the report so reruns are byte-identical.
    #[arg(long)]
    omit_timing: bool,
}

impl Command {
    fn split(self) -> (ExperimentKind, Common) {
        match self {
            Command::D1(c) => (ExperimentKind::D1Table, c),
            Command::A0(c) => (ExperimentKind::A0Table, c),
            Command::Certify(c) => (ExperimentKind::Certify, c),
            Command::FlowCheck(c) => (ExperimentKind::FlowCheck, c),
            Command::Scan(c) => (ExperimentKind::Scan, c),
            Command::Gprime(c) => (ExperimentKind::Gprime, c),
            Command::UnboundedGrowth(c) => (ExperimentKind::UnboundedGrowth, c),
            Command::ShearCommute(c) => (ExperimentKind::ShearCommute, c),
        }
    }
}

fn parse_kind(s: &str) -> Result<GeometryKind, LabError> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| LabError::Config {
            field: "domain".into(),
            message: format!("unknown geometry `{s}`"),
        })
}

fn build_config(kind: ExperimentKind, c: Common) -> Result<ExperimentConfig, LabError> {
    let mut cfg = match &c.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_path(path)?;
            if cfg.experiment != kind {
                return Err(LabError::Config {
                    field: "experiment".into(),
                    message: format!(
                        "config is for `{}`, subcommand runs `{}`",
                        cfg.experiment.name(),
                        kind.name()
                    ),
                });
            }
            cfg
        }
        None => {
            let mut cfg = ExperimentConfig::new(kind, 0);
            cfg.seed = None;
            cfg
        }
    };
    if let Some(s) = c.seed {
        cfg.seed = Some(s);
    }
    if c.family.is_some() || c.alpha.is_some() {
        let base = cfg.g_spec.clone().unwrap_or(DiscSpec::moebius());
        cfg.g_spec = Some(DiscSpec {
            family: c.family.unwrap_or(base.family),
            alpha: c.alpha.or(base.alpha),
        });
    }
    if c.domain.is_some() || c.dim.is_some() {
        let kind = match &c.domain {
            Some(d) => parse_kind(d)?,
            None => cfg.domain_spec.as_ref().map_or(GeometryKind::Polydisc, |d| d.kind),
        };
        let n = c.dim.unwrap_or(match kind {
            GeometryKind::Spectral2 => 4,
            _ => cfg.domain_spec.as_ref().map_or(2, |d| d.n),
        });
        cfg.domain_spec = Some(GeometrySpec { kind, n });
    }
    macro_rules! over {
        ($($f:ident),*) => { $( if c.$f.is_some() { cfg.$f = c.$f; } )* };
    }
    over!(i, j, n, pieces, samples, tol, eps, scale, sign, alphas);
    if c.out.is_some() {
        cfg.output_path = c.out;
    }
    Ok(cfg)
}

fn configure_threads() {
    if let Some(n) = std::env::var("LOEWNER_LAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let (kind, common) = cli.command.split();
    let omit_timing = common.omit_timing;
    let cfg = match build_config(kind, common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let mut env = match run_experiment(&cfg) {
        Ok(env) => env,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(error_exit_code(&e) as u8);
        }
    };
    let wall = env.wall_time_s.unwrap_or(0.0);
    if omit_timing {
        env.wall_time_s = None;
    }
    match &cfg.output_path {
        Some(path) => {
            if let Err(e) = emit_report(&env, path) {
                eprintln!("error: {e}");
                return ExitCode::from(error_exit_code(&e) as u8);
            }
        }
        None => match serde_json::to_string_pretty(&env) {
            Ok(s) => println!("{s}"),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE as u8);
            }
        },
    }
    eprintln!("{} ({wall:.3} s)", env.summary);
    ExitCode::from(env.exit_code() as u8)
}
