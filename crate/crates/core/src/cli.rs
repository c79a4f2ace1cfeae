//! Command-line surface: `train`, `run`, `export-fixed`, `verify`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::ann::{
    classify, export_weights_float, import_weights_float, train, Classification, DecisionConfig, FixedInference,
    FixedNetwork, Hyperparams, Network, TrainingSet, DEFAULT_ACTIVATION_THRESHOLD,
};
use crate::sensor::ObstacleBits;
use crate::sim::{emit_plot_svg, emit_trace_csv, run, Scenario};

#[derive(Debug, Parser)]
#[command(name = "wallbot", version, about = "Train, export, verify and simulate the wall-following robot network")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the network and write a float weight file.
    Train {
        /// Dataset file (`b1 b2 b3 b4 b5 label` per line); defaults to the built-in 14-row table.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        hidden: usize,
        #[arg(long, default_value_t = 0.1)]
        learning_rate: f64,
        #[arg(long, default_value_t = 50_000)]
        max_epochs: u32,
        #[arg(long, default_value_t = 0.01)]
        target_error: f64,
        #[arg(long, default_value_t = 0.5)]
        init_scale: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Simulate a scenario with a trained network.
    Run {
        scenario: PathBuf,
        weights: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Quantize a float weight file to signed 16-bit fixed point.
    ExportFixed {
        weights: PathBuf,
        #[arg(long, default_value_t = 12)]
        frac_bits: u32,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check a weight file against the decision table, and optionally a fixed-point export against it.
    Verify {
        weights: PathBuf,
        #[arg(long)]
        fixed: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ACTIVATION_THRESHOLD)]
        activation_threshold: f64,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_dataset(path: Option<&Path>) -> Result<TrainingSet> {
    match path {
        Some(p) => TrainingSet::parse(&read(p)?).with_context(|| format!("parsing {}", p.display())),
        None => Ok(TrainingSet::decision_table()),
    }
}

fn load_weights(path: &Path) -> Result<Network<f64>> {
    import_weights_float(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn fmt_outputs(out: &[f64; 4]) -> String {
    out.iter().map(|o| format!("{o:+.4}")).collect::<Vec<_>>().join(" ")
}

/// Runs a parsed command, writing reports to `out`. Errors are returned for the caller to print.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<ExitCode> {
    match cli.command {
        Command::Train { dataset, seed, hidden, learning_rate, max_epochs, target_error, init_scale, output } => {
            let data = load_dataset(dataset.as_deref())?;
            let hp = Hyperparams { learning_rate, max_epochs, target_error, seed, init_scale, hidden };
            let trained = train(&data, &hp)?;
            write(&output, &export_weights_float(&trained.network, Some(&hp)))?;
            writeln!(
                out,
                "trained {} rows in {} epochs, sse {:.6}{}; wrote {}",
                data.len(),
                trained.epochs,
                trained.sse,
                if trained.reached_target { "" } else { " (target not reached, all rows correct)" },
                output.display()
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { scenario, weights, trace: trace_path, svg } => {
            let sc = Scenario::load(&scenario).with_context(|| format!("loading {}", scenario.display()))?;
            let net = load_weights(&weights)?;
            let trace = run(&sc, &net);
            let last = trace.last().expect("max_ticks is positive");
            let fallbacks = trace.iter().filter(|r| r.fallback_used).count();
            writeln!(
                out,
                "{} ticks, halted: {}, final pose ({:.3}, {:.3}, {:.2}°), fallbacks: {}",
                trace.len(),
                last.halted.map_or("none", |h| h.name()),
                last.after.x(),
                last.after.y(),
                last.after.heading().to_degrees(),
                fallbacks
            )?;
            if let Some(p) = trace_path {
                emit_trace_csv(&trace, &p)?;
            }
            if let Some(p) = svg {
                emit_plot_svg(&sc, &trace, &p)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportFixed { weights, frac_bits, output } => {
            let net = load_weights(&weights)?;
            let fixed = FixedNetwork::quantize(&net, frac_bits)?;
            write(&output, &fixed.to_text())?;
            writeln!(out, "wrote Q{}.{} table to {}", 15 - frac_bits, frac_bits, output.display())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { weights, fixed, dataset, activation_threshold } => {
            let net = load_weights(&weights)?;
            let data = load_dataset(dataset.as_deref())?;
            let cfg = DecisionConfig::new(activation_threshold)?;
            let mut ok = true;

            let mut failing = Vec::new();
            for (bits, expected) in data.rows() {
                let got = classify(&net, *bits, &cfg);
                let pass = got == Classification::Decided(*expected);
                let act = net.forward(&bits.as_inputs()).out;
                writeln!(
                    out,
                    "{bits}  expected {expected:<8} got {got:<9} [{}]  {}",
                    fmt_outputs(&act),
                    if pass { "ok" } else { "FAIL" }
                )?;
                if !pass {
                    failing.push(bits.to_string());
                }
            }
            let passed = data.len() - failing.len();
            writeln!(out, "{passed}/{} rows pass", data.len())?;
            if !failing.is_empty() {
                writeln!(out, "failing rows: {}", failing.join(", "))?;
                ok = false;
            }

            if let Some(path) = fixed {
                let q = FixedNetwork::parse(&read(&path)?).with_context(|| format!("parsing {}", path.display()))?;
                if q.hidden() != net.hidden() {
                    anyhow::bail!("fixed-point file has {} hidden units, float file {}", q.hidden(), net.hidden());
                }
                let inference = FixedInference::new(q.frac_bits(), activation_threshold)?;
                let disagree: Vec<String> = ObstacleBits::all()
                    .filter(|b| inference.classify(&q, *b) != classify(&net, *b, &cfg))
                    .map(|b| format!("{b} (float {}, fixed {})", classify(&net, b, &cfg), inference.classify(&q, b)))
                    .collect();
                writeln!(
                    out,
                    "fixed point Q{}.{}: {}/32 inputs agree with float classify",
                    15 - q.frac_bits(),
                    q.frac_bits(),
                    32 - disagree.len()
                )?;
                if !disagree.is_empty() {
                    writeln!(out, "disagreements: {}", disagree.join(", "))?;
                    ok = false;
                }
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
