use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfl_cli::commands::{
    list_theorems, run_constant, run_hls, run_sharpness_sweep, run_sweep, run_verify, section_from_flags,
    sharpness_csv, standard_oracles, sweep_csv, parse_range, SweepParam,
};
use mfl_cli::config::{RunConfig, TheoremSection};
use mfl_cli::CliError;
use mfl_core::TheoremId;

#[derive(Parser)]
#[command(name = "mfl", version, about = "Numerical checks for multilinear fractional operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured corpus seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Re-evaluate argmax members at half the spacing.
    #[arg(long, global = true)]
    refine: bool,
}

/// Exponents given on the command line instead of a config section.
#[derive(Args)]
struct ExponentFlags {
    #[arg(long)]
    theorem: String,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma separated `p_1,...,p_m`.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Kernel integrability (`inf` allowed).
    #[arg(long, default_value = "inf")]
    s: String,
    #[arg(long, default_value_t = 0.0)]
    kappa: f64,
    #[arg(long)]
    outer_p: Option<f64>,
    /// Comma separated kernel descriptors.
    #[arg(long, value_delimiter = ',')]
    kernels: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every section of the configuration.
    Verify,
    /// Empirical constant of one statement.
    Constant {
        #[command(flatten)]
        exps: ExponentFlags,
        /// Adversarial search steps after the corpus pass.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Vary one parameter and tabulate.
    Sweep {
        /// `alpha`, `kappa` or `L`.
        #[arg(long)]
        param: String,
        /// `start:stop:step`.
        #[arg(long)]
        range: String,
        /// Required unless sweeping `L`.
        #[arg(long)]
        theorem: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long, default_value = "inf")]
        s: String,
        #[arg(long, default_value_t = 0.0)]
        kappa: f64,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "G")]
        points: Option<usize>,
    },
    /// HLS sharpness ratio against the Lieb constant.
    Hls {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long = "L")]
        half_width: f64,
        #[arg(long = "G")]
        points: usize,
    },
    /// Print the registered statements and their hypotheses.
    ListTheorems,
}

fn parse_s(s: &str) -> Result<f64, CliError> {
    match s {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse().map_err(|_| CliError::Usage(format!("bad s {s:?}"))),
    }
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.refine |= common.refine;
    Ok(cfg)
}

/// The first config section for `theorem`, unless exponents are given as flags.
fn pick_section(cfg: &RunConfig, theorem: TheoremId, alpha: Option<f64>, p: Option<Vec<f64>>, s: &str, kappa: f64, outer_p: Option<f64>, kernels: Option<Vec<String>>) -> Result<TheoremSection, CliError> {
    match (alpha, p) {
        (Some(alpha), Some(p)) => section_from_flags(theorem, cfg.n, alpha, parse_s(s)?, p, kappa, outer_p, kernels),
        _ => cfg
            .sections
            .iter()
            .find(|sec| sec.theorem == theorem)
            .cloned()
            .ok_or_else(|| CliError::Usage(format!("no section for {theorem}; pass --alpha and --p"))),
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    if let Some(t) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let out_dir = cli.common.out.clone();
    match cli.command {
        Command::ListTheorems => {
            print!("{}", list_theorems());
            Ok(0)
        }
        Command::Verify => {
            let cfg = load(&cli.common)?;
            let outcome = run_verify(&cfg, &standard_oracles())?;
            outcome.write(&out_dir.unwrap_or_else(|| PathBuf::from(".")))?;
            for f in &outcome.metadata.failures {
                eprintln!("FAIL {f}");
            }
            for w in &outcome.metadata.warning_messages {
                eprintln!("warning: {w}");
            }
            println!(
                "{} rows, {} refusals, {} warnings, {} failures",
                outcome.rows.len(),
                outcome.metadata.refusals.len(),
                outcome.metadata.warnings,
                outcome.metadata.failures.len()
            );
            Ok(outcome.exit_code())
        }
        Command::Constant { exps, budget } => {
            let mut cfg = load(&cli.common)?;
            if let Some(b) = budget {
                cfg.budget = b;
            }
            let theorem = TheoremId::parse(&exps.theorem)?;
            let section = pick_section(&cfg, theorem, exps.alpha, exps.p, &exps.s, exps.kappa, exps.outer_p, exps.kernels)?;
            let outcome = run_constant(&cfg, &section)?;
            if let Some(dir) = &out_dir {
                outcome.write(dir)?;
            }
            print!("{}", mfl_cli::report::csv_string(&outcome.rows)?);
            for f in &outcome.metadata.failures {
                eprintln!("FAIL {f}");
            }
            Ok(outcome.exit_code())
        }
        Command::Sweep { param, range, theorem, alpha, p, s, kappa, lambda, n, points } => {
            let mut cfg = load(&cli.common)?;
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(g) = points {
                cfg.points = g;
            }
            let param: SweepParam = param.parse()?;
            let values = parse_range(&range)?;
            let csv = if param == SweepParam::HalfWidth {
                let lambda = lambda.ok_or_else(|| CliError::Usage("--lambda is required for L sweeps".into()))?;
                sharpness_csv(&run_sharpness_sweep(cfg.n, lambda, cfg.points, &values)?)?
            } else {
                let theorem = theorem.ok_or_else(|| CliError::Usage("--theorem is required".into()))?;
                let theorem = TheoremId::parse(&theorem)?;
                let section = pick_section(&cfg, theorem, alpha, p, &s, kappa, None, None)?;
                sweep_csv(&run_sweep(&cfg, &section, param, &values)?)?
            };
            if let Some(dir) = &out_dir {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("sweep.csv"), &csv)?;
            }
            print!("{csv}");
            Ok(0)
        }
        Command::Hls { n, lambda, half_width, points } => {
            let rows = run_hls(n, lambda, half_width, points, cli.common.refine)?;
            let csv = sharpness_csv(&rows)?;
            if let Some(dir) = &out_dir {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("hls.csv"), &csv)?;
            }
            print!("{csv}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
