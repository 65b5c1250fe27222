//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on runtime errors, 2 on bad usage.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::game::{delta_grid, gamma_grid, threshold_sweep, GameConfig};
use crate::hedging::{run_hedging, HedgingOptions, PropensityRecurrence};
use crate::report;
use crate::scenario::{parse_scenario, run_scenario, Scenario};
use crate::semantics::check_frame;

#[derive(Debug, Parser)]
#[command(
    name = "modal-hedge",
    version,
    about = "Coordination games with epistemic hedging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario end to end (default format: json lines).
    Simulate {
        scenario: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Classify a (delta, gamma) grid into equilibrium regions (default: csv).
    Sweep {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        delta_steps: u32,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        gamma_steps: u32,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Trace the hedging process (default: csv).
    Hedge {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[arg(long, default_value_t = 0.5)]
        hesitation: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Report reflexivity, symmetry and transitivity of a scenario's model
    /// (default: one line of text).
    FrameCheck {
        scenario: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

fn load(path: &PathBuf) -> Result<Scenario> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?;
    parse_scenario(&text).with_context(|| format!("parsing scenario {}", path.display()))
}

fn execute(command: Command) -> Result<(String, Option<PathBuf>)> {
    let (text, output) = match command {
        Command::Simulate { scenario, output } => {
            let scenario = load(&scenario)?;
            let run = run_scenario(&scenario)?;
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => report::run_jsonl(&run),
                Format::Csv => report::run_csv(&run),
            };
            (text, output)
        }
        Command::Sweep {
            delta_steps,
            gamma_steps,
            tau,
            output,
        } => {
            let rows = threshold_sweep(&delta_grid(delta_steps), &gamma_grid(gamma_steps), tau)?;
            let text = match output.format.unwrap_or(Format::Csv) {
                Format::Csv => report::sweep_csv(&rows),
                Format::Json => report::sweep_json(&rows),
            };
            (text, output)
        }
        Command::Hedge {
            delta,
            gamma,
            steps,
            tolerance,
            hesitation,
            output,
        } => {
            let config = GameConfig::new(delta, gamma)?;
            let mut options = HedgingOptions::new(steps, tolerance);
            options.recurrence = PropensityRecurrence::new(hesitation)?;
            let trace = run_hedging(&config, &options)?;
            let text = match output.format.unwrap_or(Format::Csv) {
                Format::Csv => report::hedging_csv(&trace),
                Format::Json => report::hedging_json(&trace),
            };
            (text, output)
        }
        Command::FrameCheck { scenario, output } => {
            let scenario = load(&scenario)?;
            let model = scenario.series.build_model()?;
            let frame = check_frame(&model);
            let text = match output.format {
                None => report::frame_text(&frame),
                Some(Format::Json) => report::frame_json(&frame),
                Some(Format::Csv) => report::frame_csv(&frame),
            };
            (text, output)
        }
    };
    Ok((text, output.out))
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status. Results go to `--out` when given, otherwise to `stdout`.
pub fn dispatch<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let rendered = err.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let outcome = execute(cli.command).and_then(|(text, out)| match out {
        Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display())),
        None => stdout
            .write_all(text.as_bytes())
            .context("writing to stdout"),
    });
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err:#}");
            1
        }
    }
}
