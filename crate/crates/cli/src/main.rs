use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wach_core::config::RunConfig;
use wach_core::report::{run, selftest, Command, Report};

#[derive(Parser)]
#[command(
    name = "wach",
    version,
    about = "Build and verify Wach modules over truncated Z_p[[pi]]"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute P and the Gamma-generator matrices.
    Build(RunArgs),
    /// Build, then run the checks listed in the config.
    Verify(RunArgs),
    /// Randomized law checks for one prime.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; `-` reads stdin.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long)]
    prime: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

fn read_config(path: &PathBuf) -> Result<RunConfig, String> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| format!("reading stdin: {e}"))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?
    };
    RunConfig::from_json_str(&text).map_err(|e| e.to_string())
}

fn emit(report: &Report, output: &Output) -> Result<(), String> {
    let body = match output.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    match &output.out {
        Some(path) => fs::write(path, body).map_err(|e| format!("writing {}: {e}", path.display())),
        None => io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| format!("writing stdout: {e}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let (report, output) = match &cli.command {
        Cmd::Build(a) | Cmd::Verify(a) => {
            let cfg = match read_config(&a.config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let which = match cli.command {
                Cmd::Build(_) => Command::Build,
                _ => Command::Verify,
            };
            (run(&cfg, which), &a.output)
        }
        Cmd::Selftest(a) => (selftest(a.prime, a.seed), &a.output),
    };
    if let Err(e) = emit(&report, output) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
