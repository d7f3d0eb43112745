//! Command-line interface for the `shockcop` binary.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on input
//! or I/O errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{Config, ExampleSpec};
use crate::copulas::Family;
use crate::error::{Error, Result};
use crate::example;
use crate::genfn::Generator;
use crate::surface::{level_evaluator, surface_for, BoundLevel};
use crate::verify::check_quasicopula;
use crate::verify::suites::{self, Suite, SuiteOptions};

#[derive(Debug, Parser)]
#[command(name = "shockcop", version, about = "Shock-model copulas and their p-box bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a copula or bound surface on a unit grid and write CSV or JSON.
    Surface {
        #[arg(long)]
        config: PathBuf,
        /// Override the family given in the config.
        #[arg(long)]
        family: Option<Family>,
        #[arg(long, value_enum)]
        bound: BoundLevel,
        /// Points per axis.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the exponential worked example and write its fixtures.
    Example {
        /// JSON file with an `example` object overriding the default rates.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "example-out")]
        out: PathBuf,
    },
    /// Run verification suites and print a JSON report.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Extra generators (a `generators` config) to validate in the axioms suite.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Smaller instance counts for a fast smoke run.
        #[arg(long)]
        quick: bool,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli, stdout: &mut impl Write) -> Result<i32> {
    match cli.command {
        Command::Surface {
            config,
            family,
            bound,
            grid,
            out,
        } => {
            let Config::Model(mut spec) = Config::load(&config)? else {
                return Err(Error::Config(format!("{} is not a model config", config.display())));
            };
            if let Some(f) = family {
                spec = spec.with_family(f);
            }
            let model = spec.build()?;
            let hash = spec.hash();
            let surface = surface_for(&model, bound, grid, &hash)?;
            surface.write_to(&out)?;
            let mut summary = serde_json::json!({
                "out": out,
                "rows": surface.len(),
                "family": model.family(),
                "bound": bound,
                "model_hash": hash,
            });
            if matches!(bound, BoundLevel::EnvelopeInf | BoundLevel::EnvelopeSup) {
                // envelopes need not be n-increasing; report the worst cell found
                let f = level_evaluator(&model, bound)?;
                let q = check_quasicopula(f, model.dim(), grid.min(21), 1e-12);
                summary["quasicopula"] = serde_json::json!(q.pass);
                summary["negative_cell"] = if q.min_cell_volume < -1e-12 {
                    serde_json::to_value(&q.min_cell)?
                } else {
                    serde_json::Value::Null
                };
            }
            writeln!(stdout, "{}", serde_json::to_string_pretty(&summary)?)?;
            Ok(0)
        }
        Command::Example { config, out } => {
            let spec = match config {
                Some(path) => match Config::load(&path)? {
                    Config::Example(e) => e,
                    _ => return Err(Error::Config(format!("{} has no example object", path.display()))),
                },
                None => ExampleSpec::default(),
            };
            let report = example::run(&spec, Some(&out))?;
            if report.pass {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&report)?)?;
                Ok(0)
            } else {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&report.failures())?)?;
                Ok(1)
            }
        }
        Command::Verify {
            suite,
            seed,
            config,
            quick,
            out,
        } => {
            let extra: Vec<Generator> = match config {
                Some(path) => match Config::load(&path)? {
                    Config::Generators(specs) => specs.iter().map(|s| s.build()).collect::<Result<_>>()?,
                    _ => return Err(Error::Config(format!("{} has no generators list", path.display()))),
                },
                None => Vec::new(),
            };
            let opts = if quick {
                SuiteOptions::quick(seed)
            } else {
                SuiteOptions::full(seed)
            };
            let reports = suites::run(suite, &opts, &extra)?;
            let text = serde_json::to_string_pretty(&reports)?;
            if let Some(path) = out {
                std::fs::write(path, &text)?;
            }
            writeln!(stdout, "{text}")?;
            Ok(if reports.iter().all(|r| r.pass) { 0 } else { 1 })
        }
    }
}
