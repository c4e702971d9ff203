use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gwphase_cli::{emit, list_scenarios, run, CliError, OutputFormat, RunConfig};

/// Scenario runner for the complex geometric phase of metastable systems.
#[derive(Parser)]
#[command(name = "gwphase", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a config and emit its records.
    Run {
        /// TOML configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout (or the config's output.path) when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format override: csv or json.
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// List the available scenarios.
    ListScenarios,
    /// Parse and validate a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if let CliError::Numerical(inner) = &err {
                // Diagnostic record for failed runs.
                let diagnostic = serde_json::json!({
                    "status": "numerical-failure",
                    "detail": inner.to_string(),
                });
                eprintln!("{diagnostic}");
            }
            ExitCode::from(err.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> gwphase_cli::Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            format,
        } => {
            let cfg = RunConfig::load(&config)?;
            let records = run(&cfg)?;
            let path = out.or_else(|| cfg.output_path.clone());
            let fmt = format.unwrap_or(cfg.output_format);
            emit(&records, fmt, path.as_deref())?;
            if let Some(r) = records.first() {
                eprintln!("# wall_time_s={:.3}", r.wall_time_s);
            }
            Ok(())
        }
        Command::ListScenarios => {
            for (name, summary) in list_scenarios() {
                println!("{name:<10} {summary}");
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = RunConfig::load(&config)?;
            println!("ok: {}", gwphase_cli::run::describe(&cfg));
            Ok(())
        }
    }
}
