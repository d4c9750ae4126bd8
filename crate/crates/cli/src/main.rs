use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uwauth_cli::config::{parse_config, ExperimentConfig, OutputFormat};
use uwauth_cli::{commands, CliError, RunOptions, EXIT_REPORT_FLAGS};

#[derive(Parser)]
#[command(name = "uwauth", version = commands::VERSION, about = "Impersonation detection experiments for underwater acoustic sensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep: one result file per curve family.
    Simulate(RunArgs),
    /// Closed-form curves on the same grid.
    Analytic(RunArgs),
    /// Compare Monte Carlo against closed form; exit 3 on any gating flag.
    Validate(RunArgs),
    /// Write the preset attacker-placement configs.
    EmitScenarios {
        #[arg(long, default_value = "scenarios")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides plan.seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long, default_value_t = 1.0, hide = true)]
    sigma_scale: f64,
}

impl RunArgs {
    fn load(&self) -> Result<(ExperimentConfig, RunOptions), CliError> {
        let cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                parse_config(&text)?
            }
            None => ExperimentConfig::default(),
        };
        let opts = RunOptions {
            out: self.out.clone(),
            workers: self.workers,
            seed: self.seed,
            format: self.format,
            sigma_scale: self.sigma_scale,
        };
        Ok((cfg, opts))
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate(a) => {
            let (cfg, opts) = a.load()?;
            let out = commands::simulate(&cfg, &opts)?;
            log::info!("wrote {} files", out.files.len());
            Ok(0)
        }
        Command::Analytic(a) => {
            let (cfg, opts) = a.load()?;
            let out = commands::analytic(&cfg, &opts)?;
            log::info!("wrote {} files", out.files.len());
            Ok(0)
        }
        Command::Validate(a) => {
            let (cfg, opts) = a.load()?;
            let out = commands::validate(&cfg, &opts)?;
            Ok(if out.pass() { 0 } else { EXIT_REPORT_FLAGS })
        }
        Command::EmitScenarios { out } => {
            for p in commands::emit_scenarios(&out)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
