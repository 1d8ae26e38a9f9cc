//! `symcalc run <config.json>`: runs the verification suites and writes
//! report.json plus one CSV per suite.
//!
//! Exit codes: 0 all checks pass, 1 a tolerance failed, 2 bad configuration,
//! 3 a suite hit a runtime error.

mod config;
mod report;
mod suites;
mod svg;

use clap::{Parser, Subcommand};
use config::Resolved;
use report::{checks_csv, float17, Environment, GridInfo, Report, SuiteError, SCHEMA_VERSION};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<symcalc::Error> for CliError {
    fn from(e: symcalc::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "symcalc", version, about = "Numerical verification of a phase-space operator calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites listed in a JSON experiment config.
    Run {
        config: PathBuf,
        /// Run only this suite (repeatable); suites absent from the config use defaults.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Output directory.
        #[arg(long, default_value = "report")]
        out: PathBuf,
        /// Also write SVG figures.
        #[arg(long)]
        svg: bool,
    },
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn run(config: &Path, names: &[String], out: &Path, svg: bool) -> Result<bool, CliError> {
    let text = std::fs::read_to_string(config).map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", config.display())))?;
    let mut res = Resolved::from_json(&text)?;
    res.select(names)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;

    let mut ctx = suites::Ctx { res: &res, out, svg, files: vec![] };
    let mut checks = vec![];
    let mut errors = vec![];
    let mut suites_run = vec![];
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for exp in &res.experiments {
        let count = seen.entry(exp.suite.clone()).or_default();
        *count += 1;
        let stem = if *count == 1 { exp.suite.clone() } else { format!("{}-{count}", exp.suite) };
        suites_run.push(stem.clone());
        match suites::run_suite(&mut ctx, exp) {
            Ok(rows) => {
                for c in &rows {
                    let crit = c.criterion.map(|k| format!(" [{k}]")).unwrap_or_default();
                    println!(
                        "{} {}/{}{crit}: {} {} {}",
                        if c.pass { "PASS" } else { "FAIL" },
                        c.suite,
                        c.name,
                        float17(c.measured),
                        c.relation.symbol(),
                        float17(c.threshold)
                    );
                }
                let name = format!("{stem}.csv");
                write(&out.join(&name), &checks_csv(&rows))?;
                ctx.files.push(name);
                checks.extend(rows);
            }
            Err(e) => {
                println!("ERROR {stem}: {e}");
                errors.push(SuiteError { suite: stem, message: e.to_string() });
            }
        }
    }
    let mut files = std::mem::take(&mut ctx.files);
    files.push("report.json".into());
    let g = &res.config.grid;
    let report = Report {
        schema_version: SCHEMA_VERSION,
        suite: res.config.id.clone(),
        suites_run,
        checks,
        errors,
        files,
        environment: Environment {
            grid: GridInfo {
                n: res.grid.n(),
                d: res.grid.d(),
                h: res.grid.h(),
                mode: serde_json::to_value(g.mode).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                refine_n: res.refine.n(),
                alias_budget: res.grid.alias_budget(),
            },
            seed: res.config.ensembles.seed,
            version: env!("CARGO_PKG_VERSION").into(),
        },
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(format!("report.json: {e}")))?;
    write(&out.join("report.json"), &(json + "\n"))?;
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    println!("{} of {} checks pass, {} suite error(s)", report.checks.len() - failed, report.checks.len(), report.errors.len());
    if let Some(e) = report.errors.first() {
        return Err(CliError::Runtime(format!("{}: {}", e.suite, e.message)));
    }
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, suites, out, svg } => match run(&config, &suites, &out, svg) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("symcalc: {e}");
                ExitCode::from(e.code())
            }
        },
    }
}
