//! `hforge`: generate, reduce, verify and solve the constructions in
//! `hforge-core`, and run the batch experiments.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "hforge", version, about = "Gadgets, reductions and verifiers for FVS, DVD and Deadline")]
pub struct Cli {
    /// Upper bound on enumerated objects (cube points, subsets, tests).
    #[arg(long, global = true, env = "HFORGE_BUDGET", default_value_t = hforge_core::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Write the result here instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a test gadget.
    #[command(subcommand)]
    Gadget(GadgetCmd),
    /// Generate a Unique Games instance.
    Ug(UgArgs),
    /// Apply one of the reductions.
    #[command(subcommand)]
    Reduce(ReduceCmd),
    /// Build a partition witness for a gadget or reduced graph.
    #[command(subcommand)]
    Witness(WitnessCmd),
    /// Check a witness or a realization. Exit code 1 when the check fails.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Run the influence decoder on the survivors of a deletion.
    Decode(DecodeArgs),
    /// Exact and approximate solvers for small instances.
    #[command(subcommand)]
    Solve(SolveCmd),
    /// Batch experiments with tabular reports.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Convert a graph file to another format.
    #[command(subcommand)]
    Export(ExportCmd),
}

#[derive(Args, Debug, Clone, Copy)]
pub struct CubeArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long = "R")]
    pub r: usize,
    #[arg(long = "slen", default_value_t = 1)]
    pub s_len: usize,
}

#[derive(Subcommand, Debug)]
pub enum GadgetCmd {
    Fvs(CubeArgs),
    Dvd {
        #[command(flatten)]
        cube: CubeArgs,
        #[arg(long, default_value_t = 2)]
        layers: usize,
    },
}

#[derive(Args, Debug)]
pub struct UgArgs {
    /// Plant a labeling that satisfies every edge.
    #[arg(long, conflicts_with = "random")]
    pub satisfiable: bool,
    /// Independent uniformly random permutations.
    #[arg(long)]
    pub random: bool,
    #[arg(long)]
    pub nv: usize,
    #[arg(long)]
    pub nw: usize,
    #[arg(long)]
    pub deg: usize,
    #[arg(long = "R")]
    pub r: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct UgReduceArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long = "slen", default_value_t = 1)]
    pub s_len: usize,
    #[arg(long, default_value_t = 1)]
    pub t: usize,
}

#[derive(Subcommand, Debug)]
pub enum ReduceCmd {
    UgToFvs {
        #[command(flatten)]
        p: UgReduceArgs,
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
    },
    UgToDvd {
        #[command(flatten)]
        p: UgReduceArgs,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
    },
    DvdToDeadline {
        #[arg(long)]
        k: usize,
        /// Offset added to every r_i duration, as "p/q".
        #[arg(long)]
        gamma: Option<String>,
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum WitnessCmd {
    /// Partition of a gadget by the dictator on coordinate `s`.
    Dictator {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        s: usize,
    },
    /// Partition of a reduced graph by a labeling (the planted one by default).
    Labeling {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        ug: PathBuf,
        #[arg(long)]
        labeling: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    Completeness {
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        /// Check only this class; all classes when absent.
        #[arg(long)]
        class: Option<usize>,
        /// δ for the layer-count advisory reported on layered graphs.
        #[arg(long, default_value = "1/10")]
        delta: String,
    },
    Deadline {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        realization: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub ug: PathBuf,
    /// Survivors are the tests of this witness class.
    #[arg(long)]
    pub witness: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub class: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value = "1/4")]
    pub eta: String,
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum SolveCmd {
    Fvs {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
    },
    Dvd {
        #[arg(long)]
        k: usize,
        /// Use the disjoint-path k-approximation instead of exhaustive search.
        #[arg(long)]
        approx: bool,
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
    },
    Deadline {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
    },
    Ug {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum ExperimentCmd {
    SubcubeStats {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long = "R", default_value_t = 5)]
        r: usize,
        #[arg(long = "slen", default_value_t = 2)]
        s_len: usize,
        /// dictator:<i>, majority or random:<seed>.
        #[arg(long = "fn", default_value = "dictator:0")]
        function: String,
        /// Estimate from this many random subcubes instead of enumerating.
        #[arg(long)]
        sampled: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    DvdDeadlineEquiv {
        #[arg(long = "max-n", default_value_t = 4)]
        max_n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ExportCmd {
    Dot {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
