use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use interconnect_cli::{analyze, pipeline, selftest, synthesize, CliError, Overrides, RunConfig};

const DEFAULT_OUT: &str = "interconnect-out";

#[derive(Parser)]
#[command(
    name = "interconnect",
    version,
    about = "Null-controllability analysis and control synthesis for interconnected heat and wave systems"
)]
struct Cli {
    /// Output directory (overrides the config file).
    #[arg(long, global = true, env = "INTERCONNECT_OUT_DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Number of heat and wave modes.
    #[arg(long)]
    modes: Option<usize>,
    /// Number of time-grid intervals.
    #[arg(long)]
    grid: Option<usize>,
    /// Final time t1.
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Strong-minimality evidence for the exponential family.
    Analyze(RunArgs),
    /// Minimum-norm heat control from the moment problem.
    Synthesize(RunArgs),
    /// Full heat-wave run: synthesis, inversion, simulation and verification.
    Pipeline(RunArgs),
    /// Run the analytic oracle checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb_kernel: f64,
    },
}

fn load(args: &RunArgs, out: Option<PathBuf>) -> Result<(RunConfig, PathBuf), CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.apply(Overrides {
        modes: args.modes,
        grid: args.grid,
        horizon: args.horizon,
    });
    let dir = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok((cfg, dir))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let (cfg, dir) = load(&args, cli.out)?;
            let r = analyze(&cfg, &dir)?;
            println!(
                "verdict: {} (gamma = {:e})",
                r.verdict,
                r.gamma_sequence.last().copied().unwrap_or(0.0)
            );
            report_dir(&dir);
        }
        Command::Synthesize(args) => {
            let (cfg, dir) = load(&args, cli.out)?;
            synthesize(&cfg, &dir)?;
            report_dir(&dir);
        }
        Command::Pipeline(args) => {
            let (cfg, dir) = load(&args, cli.out)?;
            let r = pipeline(&cfg, &dir)?;
            if let Some(c) = &r.classification {
                println!("case: {}", c.case);
            }
            if let Some(ratio) = r.terminal_ratio() {
                println!("terminal / uncontrolled: {ratio:e}");
            }
            report_dir(&dir);
        }
        Command::Selftest {
            seed,
            perturb_kernel,
        } => {
            let outcome = selftest(seed, perturb_kernel, cli.out.as_deref())?;
            for line in &outcome.lines {
                println!("{line}");
            }
            println!(
                "selftest: {} passed, {} failed",
                outcome.passed, outcome.failed
            );
            if outcome.failed > 0 {
                return Err(CliError::SelfTest {
                    failed: outcome.failed,
                    total: outcome.passed + outcome.failed,
                });
            }
        }
    }
    Ok(())
}

fn report_dir(dir: &Path) {
    println!("reports written to {}", dir.display());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
