//! `gz`: command-line front end of the concavity laboratory.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gz_core::integrals::{Method, DEFAULT_MC_BUDGET};
use report::{Emitter, Format, EXIT_INPUT};

#[derive(Parser, Debug)]
#[command(name = "gz", version, about = "Dimensional Brunn-Minkowski concavity laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Seed of every random stream used by the run.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo sample budget (default: $GZ_DEFAULT_BUDGET or 2000000).
    #[arg(long)]
    pub budget: Option<u64>,
    /// Integration method: auto, mc or radial.
    #[arg(long, default_value = "auto", value_parser = parse_method)]
    #[serde(serialize_with = "ser_method")]
    pub method: Method,
    /// Share samples between the measures of a gap.
    #[arg(long)]
    pub crn: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave the wall time out of the report, making it byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: gz_core::GzError| e.to_string())
}

fn ser_method<S: serde::Serializer>(m: &Method, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match m {
        Method::Mc => "mc",
        Method::Radial => "radial",
        Method::Auto => "auto",
    })
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measure of one body.
    Measure(commands::MeasureArgs),
    /// Concavity gap of a pair on a lambda grid.
    Gap(commands::GapArgs),
    /// Largest exponent at which a pair's gap holds.
    Profile(commands::ProfileArgs),
    /// Lemma-level inequality checks on one body.
    Lemmas(commands::LemmasArgs),
    /// The function alpha on a grid.
    Alpha(commands::GridArgs),
    /// The function beta on a grid.
    Beta(commands::GridArgs),
    /// One-dimensional Bochner identity residuals.
    Bochner(commands::GridArgs),
    /// First and second shape variations of a planar body.
    Variation(commands::VariationArgs),
    /// Local concavity constant of a planar body along a perturbation.
    Localc(commands::VariationArgs),
    /// Derivative-free search for pairs with a small gap.
    Search(commands::SearchArgs),
    /// Runs the acceptance suite.
    Acceptance(commands::AcceptanceArgs),
}

impl Common {
    pub fn resolved_budget(&self) -> Result<u64, String> {
        if let Some(b) = self.budget {
            return Ok(b);
        }
        match std::env::var("GZ_DEFAULT_BUDGET") {
            Ok(v) => v.trim().parse().map_err(|_| format!("GZ_DEFAULT_BUDGET={v:?} is not a sample count")),
            Err(_) => Ok(DEFAULT_MC_BUDGET),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let (name, common) = match &cli.command {
        Command::Measure(a) => ("measure", &a.common),
        Command::Gap(a) => ("gap", &a.common),
        Command::Profile(a) => ("profile", &a.common),
        Command::Lemmas(a) => ("lemmas", &a.common),
        Command::Alpha(a) => ("alpha", &a.common),
        Command::Beta(a) => ("beta", &a.common),
        Command::Bochner(a) => ("bochner", &a.common),
        Command::Variation(a) => ("variation", &a.common),
        Command::Localc(a) => ("localc", &a.common),
        Command::Search(a) => ("search", &a.common),
        Command::Acceptance(a) => ("acceptance", &a.common),
    };
    let budget = match common.resolved_budget() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("gz: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let outcome = match &cli.command {
        Command::Measure(a) => commands::measure(a, budget),
        Command::Gap(a) => commands::gap(a, budget),
        Command::Profile(a) => commands::profile(a, budget),
        Command::Lemmas(a) => commands::lemmas(a, budget),
        Command::Alpha(a) => commands::alpha(a),
        Command::Beta(a) => commands::beta(a),
        Command::Bochner(a) => commands::bochner(a),
        Command::Variation(a) => commands::variation(a),
        Command::Localc(a) => commands::localc(a),
        Command::Search(a) => commands::search(a, budget),
        Command::Acceptance(a) => commands::acceptance(a, budget),
    };
    let (config, outcome) = match outcome {
        Ok(v) => v,
        Err(e) => {
            eprintln!("gz {name}: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let emitter = Emitter {
        command: name,
        config: serde_json::json!({ "common": common, "budget": budget, "command": config }),
        seed: common.seed,
        format: common.format,
        out: common.out.clone(),
        timing: !common.no_timing,
    };
    let text = emitter.render(&outcome, start.elapsed().as_secs_f64());
    if let Err(e) = emitter.write(&text) {
        eprintln!("gz {name}: cannot write report: {e}");
        return ExitCode::from(EXIT_INPUT as u8);
    }
    ExitCode::from(outcome.exit as u8)
}
