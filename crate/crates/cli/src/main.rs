use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use treerange_core::harness::{run_and_write, ExperimentConfig, ExperimentKind, HarnessError, VerifyLevel};

#[derive(Parser)]
#[command(name = "treerange", version, about = "Range of tree-indexed random walks: simulations and exact checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// R_n/n on the invariant infinite tree
    InfiniteRange(Flags),
    /// Probability that the walk on the infinite tree never revisits the root location
    NoReturn(Flags),
    /// a·E[∏Φ(−S_j)] with an h-table
    ConstantFormula(Flags),
    /// R/n for trees conditioned on n + 1 vertices
    ConditionedRange(Flags),
    /// (log n/n)·R_n for the free snake
    SnakeFree(Flags),
    /// (log n/n)·R•_n for the snake excursion
    SnakeExcursion(Flags),
    /// Exact P(head at 0 after k steps)
    HeadReturnExact(Flags),
    /// Probability that the snake head avoids 0
    NoReturnHead(Flags),
    /// Lattice Green function at a point, optionally dumping a table
    Green(Flags),
    /// Green function summed along a walk
    GreenSum(Flags),
    /// Log-partial products of the positivity criterion
    Suffcond(Flags),
    /// Bessel-process log integral
    Bessel(Flags),
    /// Branching random walk from p particles
    Brw(Flags),
    /// Exact and statistical self-checks
    Verify(Flags),
    /// Experiment named inside the config file
    Run(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// JSON config; inline flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    /// Overridden by TREERANGE_SEED when set
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    j_max: Option<u64>,
    /// Comma-separated
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<u64>>,
    /// Comma-separated
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<u64>>,
    #[arg(long)]
    radius: Option<i32>,
    #[arg(long)]
    green_radius: Option<i32>,
    #[arg(long)]
    h_trees: Option<u64>,
    #[arg(long)]
    size_cap: Option<u64>,
    #[arg(long)]
    progeny_cap: Option<u64>,
    #[arg(long)]
    step_cap: Option<u64>,
    /// Comma-separated coordinates
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x: Option<Vec<i32>>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum)]
    level: Option<Level>,
    #[arg(long)]
    corrupt_green: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Level {
    Fast,
    Full,
}

impl Flags {
    fn inline(self) -> ExperimentConfig {
        ExperimentConfig {
            dim: self.dim,
            n: self.n,
            p: self.p,
            reps: self.reps,
            seed: self.seed,
            workers: self.workers,
            out: self.out,
            horizon: self.horizon,
            j_max: self.j_max,
            checkpoints: self.checkpoints,
            ks: self.ks,
            radius: self.radius,
            green_radius: self.green_radius,
            h_trees: self.h_trees,
            size_cap: self.size_cap,
            progeny_cap: self.progeny_cap,
            step_cap: self.step_cap,
            x: self.x,
            eps: self.eps,
            dump: self.dump,
            m: self.m,
            alpha: self.alpha,
            r: self.r,
            t: self.t,
            dt: self.dt,
            level: self.level.map(|l| match l {
                Level::Fast => VerifyLevel::Fast,
                Level::Full => VerifyLevel::Full,
            }),
            corrupt_green: self.corrupt_green.then_some(true),
            ..Default::default()
        }
    }
}

impl Command {
    fn split(self) -> (Option<ExperimentKind>, Flags) {
        use ExperimentKind as K;
        match self {
            Command::InfiniteRange(f) => (Some(K::InfiniteRange), f),
            Command::NoReturn(f) => (Some(K::NoReturn), f),
            Command::ConstantFormula(f) => (Some(K::ConstantFormula), f),
            Command::ConditionedRange(f) => (Some(K::ConditionedRange), f),
            Command::SnakeFree(f) => (Some(K::SnakeFree), f),
            Command::SnakeExcursion(f) => (Some(K::SnakeExcursion), f),
            Command::HeadReturnExact(f) => (Some(K::HeadReturnExact), f),
            Command::NoReturnHead(f) => (Some(K::NoReturnHead), f),
            Command::Green(f) => (Some(K::Green), f),
            Command::GreenSum(f) => (Some(K::GreenSum), f),
            Command::Suffcond(f) => (Some(K::Suffcond), f),
            Command::Bessel(f) => (Some(K::Bessel), f),
            Command::Brw(f) => (Some(K::Brw), f),
            Command::Verify(f) => (Some(K::Verify), f),
            Command::Run(f) => (None, f),
        }
    }
}

fn resolve(command: Command) -> Result<ExperimentConfig, HarnessError> {
    let (kind, mut flags) = command.split();
    let base = match flags.config.take() {
        Some(path) => ExperimentConfig::from_path(&path)?,
        None => ExperimentConfig::default(),
    };
    if let (Some(k), Some(file_kind)) = (kind, base.experiment) {
        if k != file_kind {
            return Err(HarnessError::Config(format!("config names experiment {:?} but the subcommand is {:?}", file_kind.name(), k.name())));
        }
    }
    let mut cfg = base.overlay(flags.inline());
    if kind.is_some() {
        cfg.experiment = kind;
    }
    cfg.kind()?;
    cfg.apply_env()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(cli.command).and_then(|cfg| run_and_write(&cfg, io::stdout().lock()));
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("treerange: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
