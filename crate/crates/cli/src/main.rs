use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fermitrap::config::{Command, RunConfig};
use fermitrap::CliError;

/// Thomas-Fermi, scattering and semiclassical numerics for trapped
/// two-spin Fermi gases.
#[derive(Parser, Debug)]
#[command(name = "fermitrap", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// TOML configuration file
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output_dir` in the config)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps
    #[arg(long)]
    jobs: Option<usize>,

    /// Assert that the run uses no random numbers. Every code path is
    /// deterministic, so this only records the assertion.
    #[arg(long)]
    seedless: bool,

    /// Also write a JSON mirror of every CSV
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| -> Result<fermitrap::RunReport, CliError> {
        let mut cfg = match &cli.config {
            Some(p) => RunConfig::from_path(p)?,
            None => RunConfig::default(),
        };
        cfg.json |= cli.json;
        if let Some(j) = cli.jobs {
            if j == 0 {
                return Err(CliError::Config("--jobs must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build_global()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        let out = cli
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        fermitrap::run(cli.command, &cfg, &out)
    })();
    match result {
        Ok(report) => {
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
            if report.checks.is_empty() {
                return ExitCode::SUCCESS;
            }
            println!("{:>3}  {:<6}  {:<48}  measured", "id", "status", "criterion");
            for c in &report.checks {
                println!(
                    "{:>3}  {:<6}  {:<48}  {}",
                    c.id,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured
                );
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            println!("{} of {} checks passed", report.checks.len() - failed, report.checks.len());
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
