//! `ltlearn` — learn, enumerate, and check LTL formulas over lasso traces
//! under first-order syntactic constraints.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ltlearn_cli::commands::{
    cmd_bench, cmd_enumerate, cmd_export, cmd_import, cmd_learn, cmd_oracle, cmd_verify,
    CmdOutput, InstanceOptions,
};
use ltlearn_cli::report::OutputFormat;

#[derive(Parser)]
#[command(
    name = "ltlearn",
    version,
    about = "Learn LTL formulas from lasso traces under syntactic constraints"
)]
struct Cli {
    /// Report style
    #[arg(long, global = true, value_enum, default_value_t = Output::Human)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Human,
    Machine,
}

impl From<Output> for OutputFormat {
    fn from(o: Output) -> OutputFormat {
        match o {
            Output::Human => OutputFormat::Human,
            Output::Machine => OutputFormat::Machine,
        }
    }
}

#[derive(Args)]
struct Instance {
    /// Trace file: positive traces, `---`, negative traces, optionally
    /// `---` and comma-separated proposition names
    traces: PathBuf,
    /// Constraint files, applied in order
    #[arg(short, long = "constraints", value_name = "FILE")]
    constraints: Vec<PathBuf>,
    /// Built-in constraint presets (no-dag-reuse, no-tautology, nnf,
    /// liveness-pattern)
    #[arg(long = "preset", value_name = "NAME")]
    presets: Vec<String>,
    /// Syntax-DAG node budget
    #[arg(long, default_value_t = 6, value_name = "N")]
    max_nodes: usize,
    /// Drop the built-in lowest-priority size objective
    #[arg(long)]
    no_default_size: bool,
    /// Give up after this many seconds (checked between solver calls)
    #[arg(long, value_name = "SECS")]
    timeout: Option<u64>,
}

impl Instance {
    fn options(&self, iterative: bool) -> InstanceOptions {
        InstanceOptions {
            max_nodes: self.max_nodes,
            presets: self.presets.clone(),
            default_size_objective: !self.no_default_size,
            iterative,
            timeout: self.timeout.map(Duration::from_secs),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Learn one lexicographically optimal formula
    Learn {
        #[command(flatten)]
        instance: Instance,
        /// Try budgets 1..=max-nodes in order, smallest first
        #[arg(long)]
        iterative: bool,
    },
    /// List distinct solutions, blocking each structural model
    Enumerate {
        #[command(flatten)]
        instance: Instance,
        /// Stop after this many distinct formulas
        #[arg(long, default_value_t = 10, value_name = "M")]
        limit: usize,
        /// Keep the optimal cost bounds fixed instead of relaxing them
        #[arg(long)]
        co_optimal: bool,
    },
    /// Check a given formula against a sample and constraints
    Verify {
        #[command(flatten)]
        instance: Instance,
        /// Formula text, e.g. 'G (!(p & q))'
        #[arg(long, value_name = "TEXT")]
        formula: String,
        /// Check the formula as a plain tree instead of a shared DAG
        #[arg(long)]
        tree: bool,
    },
    /// Write the weighted-CNF instance plus a `.map` variable sidecar
    ExportWcnf {
        #[command(flatten)]
        instance: Instance,
        /// Output WCNF path
        #[arg(long, value_name = "FILE")]
        wcnf: PathBuf,
    },
    /// Decode and verify an external solver's model of the exported instance
    ImportModel {
        #[command(flatten)]
        instance: Instance,
        /// Model file: DIMACS `v` lines or a 0/1 assignment string
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
    },
    /// Exhaustive reference search for the smallest consistent formula
    Oracle {
        /// Trace file
        traces: PathBuf,
        /// Constraint files acting as a shape filter
        #[arg(short, long = "constraints", value_name = "FILE")]
        constraints: Vec<PathBuf>,
        /// Built-in constraint presets
        #[arg(long = "preset", value_name = "NAME")]
        presets: Vec<String>,
        /// Largest tree size to try
        #[arg(long, default_value_t = 6, value_name = "S")]
        max_size: usize,
        /// Allow tree sizes beyond 8
        #[arg(long)]
        force: bool,
    },
    /// Run benchmark suite directories and compare against expected.txt
    Bench {
        /// Suite directories (traces.txt, constraints.lc, expected.txt, suite.cfg)
        dirs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format: OutputFormat = cli.output.into();
    let result = match &cli.command {
        Command::Learn { instance, iterative } => cmd_learn(
            &instance.traces,
            &instance.constraints,
            &instance.options(*iterative),
            format,
        ),
        Command::Enumerate { instance, limit, co_optimal } => cmd_enumerate(
            &instance.traces,
            &instance.constraints,
            &instance.options(false),
            *limit,
            *co_optimal,
            format,
        ),
        Command::Verify { instance, formula, tree } => cmd_verify(
            &instance.traces,
            &instance.constraints,
            &instance.presets,
            formula,
            *tree,
            format,
        ),
        Command::ExportWcnf { instance, wcnf } => cmd_export(
            &instance.traces,
            &instance.constraints,
            &instance.options(false),
            wcnf,
            format,
        ),
        Command::ImportModel { instance, model } => cmd_import(
            &instance.traces,
            &instance.constraints,
            &instance.options(false),
            model,
            format,
        ),
        Command::Oracle { traces, constraints, presets, max_size, force } => {
            cmd_oracle(traces, constraints, presets, *max_size, *force, format)
        }
        Command::Bench { dirs } => cmd_bench(dirs, format),
    };
    match result {
        Ok(CmdOutput { text, code }) => {
            print!("{text}");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
