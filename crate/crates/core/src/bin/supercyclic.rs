use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use supercyclic::scenario::{
    emit_report, run_scenario, ReportFormat, ScenarioConfig, TestKind, VerdictReport,
};
use supercyclic::LabError;

/// Density, transitivity and criterion checks for operator families on ℂ^d.
#[derive(Parser)]
#[command(name = "supercyclic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report.
    Check {
        /// sc, transitive, strict, supertransitive, gdelta, criterion,
        /// semigroup, group or tail.
        #[arg(value_parser = parse_test)]
        test: TestKind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        /// json or csv-plot.
        #[arg(long, default_value = "json", value_parser = parse_format)]
        format: ReportFormat,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_test(s: &str) -> Result<TestKind, String> {
    s.parse().map_err(|e: LabError| e.to_string())
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: LabError| e.to_string())
}

fn load(
    path: &PathBuf,
    test: TestKind,
    seed: Option<u64>,
    budget: Option<usize>,
    eps: Option<f64>,
) -> Result<ScenarioConfig, LabError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut config = ScenarioConfig::from_json(&text)?;
    match config.test {
        Some(declared) if declared != test => {
            return Err(LabError::Config(format!(
                "config declares test '{declared}' but '{test}' was requested"
            )))
        }
        _ => config.test = Some(test),
    }
    if seed.is_some() {
        config.seed = seed;
    }
    if let Some(b) = budget {
        config.tolerance.budget = b;
    }
    if let Some(e) = eps {
        config.tolerance.eps_density = e;
    }
    Ok(config)
}

fn write(bytes: &[u8], out: Option<&PathBuf>) -> Result<(), LabError> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| LabError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| LabError::Config(format!("cannot write report: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let Command::Check {
        test,
        config,
        seed,
        budget,
        eps,
        format,
        out,
    } = Cli::parse().command;

    let config = match load(&config, test, seed, budget, eps) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let report = match run_scenario(&config) {
        Ok(r) => r,
        Err(e @ LabError::Config(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            VerdictReport::from_error(&config, test, &e)
        }
    };
    if let Err(e) = write(&emit_report(&report, format), out.as_ref()) {
        eprintln!("error: {e}");
        return ExitCode::from(3);
    }
    ExitCode::from(report.verdict.exit_code() as u8)
}
