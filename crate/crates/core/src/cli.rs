//! The `star` command line.
//!
//! Exit status is 0 on success, 1 for usage errors, 2 when an input or
//! parameter fails validation and 3 when sampling gives up (mask attempts or
//! completion trials exhausted).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{acceptance_experiment, default_ratios, write_stats_csv, BenchConfig, DEFAULT_MASKS_PER_RATIO};
use crate::completion::{check_postfix_condition, completion_order, CompletionConfig, RootStrategy, Traversal, DEFAULT_MAX_TRIALS};
use crate::entropy::{distance_entropy_profile, position_entropy_map, sequence_entropy_profile, GibbsModel, DEFAULT_COUPLING};
use crate::error::Error;
use crate::lattice::{Lattice, Region};
use crate::masking::{random_connected_mask, read_mask, write_mask, DEFAULT_MAX_ATTEMPTS};
use crate::orders::{write_order, OrderKind};
use crate::rng::Rng;
use crate::spanning::{count_spanning_trees, ln_biguint, ENUMERATION_LIMIT};
use crate::stats::{tree_frequencies, DEFAULT_ALPHA};
use crate::traversal::{bfs_order, dfs_order, SequenceOrder};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_GENERATION: i32 = 3;

/// Largest lattice `count-trees` accepts.
pub const COUNT_LIMIT: usize = 1024;

#[derive(Debug, Parser)]
#[command(name = "star", version, about = "Spanning-tree sequence orders for token lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Raster,
    Random,
    Star,
}

impl From<KindArg> for OrderKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Raster => OrderKind::Raster,
            KindArg::Random => OrderKind::RandomPermutation,
            KindArg::Star => OrderKind::SpanningTree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraversalArg {
    Bfs,
    Dfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RootArg {
    Farthest,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Study {
    Distance,
    Position,
    Sequence,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a sequence order file
    Order {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long = "h")]
        height: usize,
        #[arg(long = "w")]
        width: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a random connected mask file
    Mask {
        #[arg(long = "h")]
        height: usize,
        #[arg(long = "w")]
        width: usize,
        #[arg(long)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
        max_attempts: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample an order with the mask as postfix
    Complete {
        #[arg(long)]
        mask: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TraversalArg::Bfs)]
        traversal: TraversalArg,
        #[arg(long, value_enum, default_value_t = RootArg::Farthest)]
        root: RootArg,
        #[arg(long, default_value_t = DEFAULT_MAX_TRIALS)]
        max_trials: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, hide = true, default_value_t = cfg!(debug_assertions), action = clap::ArgAction::Set)]
        self_check: bool,
    },
    /// Print the exact number of spanning trees of the lattice
    CountTrees {
        #[arg(long = "h")]
        height: usize,
        #[arg(long = "w")]
        width: usize,
    },
    /// Chi-square test of sampled trees against uniform
    VerifyUniformity {
        #[arg(long = "h")]
        height: usize,
        #[arg(long = "w")]
        width: usize,
        #[arg(long, default_value_t = 40_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Completion acceptance benchmark
    Bench {
        #[arg(long = "h", default_value_t = 16)]
        height: usize,
        #[arg(long = "w", default_value_t = 16)]
        width: usize,
        #[arg(long, default_value_t = DEFAULT_MASKS_PER_RATIO)]
        masks_per_ratio: usize,
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_MAX_TRIALS)]
        max_trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads, 0 for one per core
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Conditional entropy profiles of the toy Gibbs model
    Entropy {
        #[arg(long, value_enum)]
        study: Study,
        #[arg(long, default_value_t = DEFAULT_COUPLING, allow_negative_numbers = true)]
        j: f64,
        #[arg(long = "h", default_value_t = 4)]
        height: usize,
        #[arg(long = "w", default_value_t = 4)]
        width: usize,
        /// Orders (or prefixes, for the distance study) to sample
        #[arg(long, default_value_t = 200)]
        orders: usize,
        /// Order family; defaults to star for sequence and random for distance
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INVALID, message: message.into() }
    }

    fn generation(message: impl Into<String>) -> Self {
        Failure { code: EXIT_GENERATION, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::MaskGenerationFailed { .. } => EXIT_GENERATION,
            Error::AtRatio { source, .. } if matches!(**source, Error::MaskGenerationFailed { .. }) => EXIT_GENERATION,
            _ => EXIT_INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::invalid(format!("cannot create {}: {e}", path.display())))
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::invalid(format!("cannot write {}: {e}", path.display()))
}

/// Parses `args` (program name first) and runs the command, writing the
/// report to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn report(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<(), Failure> {
    out.write_fmt(text).map_err(|e| Failure::invalid(format!("cannot write report: {e}")))
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        report($out, format_args!("{}\n", format_args!($($arg)*)))
    };
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Order { kind, height, width, seed, out: path } => {
            let lattice = Lattice::new(height, width)?;
            let kind = OrderKind::from(kind);
            let order = kind.generate(lattice, &mut Rng::new(seed));
            let mut file = create(&path)?;
            write_order(&order, &mut file).and_then(|_| file.flush()).map_err(|e| io_failure(&path, e))?;
            say!(out, "seed: {seed}")?;
            say!(out, "kind: {}", kind.name())?;
            say!(out, "wrote {} positions to {}", order.len(), path.display())
        }
        Command::Mask { height, width, ratio, seed, max_attempts, out: path } => {
            let lattice = Lattice::new(height, width)?;
            let mask = random_connected_mask(lattice, ratio, &mut Rng::new(seed), max_attempts)?;
            let mut file = create(&path)?;
            write_mask(&mask, &mut file).and_then(|_| file.flush()).map_err(|e| io_failure(&path, e))?;
            say!(out, "seed: {seed}")?;
            say!(out, "masked {} of {} positions, wrote {}", mask.len(), lattice.len(), path.display())
        }
        Command::Complete { mask, seed, traversal, root, max_trials, out: path, self_check } => {
            let file = File::open(&mask).map_err(|e| Failure::invalid(format!("cannot open {}: {e}", mask.display())))?;
            let mask = read_mask(file)?;
            let config = CompletionConfig {
                traversal: match traversal {
                    TraversalArg::Bfs => Traversal::Bfs,
                    TraversalArg::Dfs => Traversal::Dfs,
                },
                root: match root {
                    RootArg::Farthest => RootStrategy::Farthest,
                    RootArg::Random => RootStrategy::Random,
                },
                max_trials,
            };
            if max_trials == 0 {
                return Err(Failure::invalid("max trials must be at least 1"));
            }
            let lattice = mask.lattice();
            let result = completion_order(lattice, mask.region(), &mut Rng::new(seed), config)?;
            say!(out, "seed: {seed}")?;
            say!(out, "trials: {}", result.trials)?;
            let (Some(order), Some(tree)) = (result.order, result.tree) else {
                return Err(Failure::generation(format!("no accepted tree within {max_trials} trials")));
            };
            if self_check {
                let n_free = lattice.len() - mask.len();
                let split = order.indices()[..n_free].iter().all(|&i| !mask.region().contains_index(i));
                let consistent = match config.traversal {
                    Traversal::Bfs => check_postfix_condition(&tree, mask.region()) && bfs_order(&tree) == order,
                    Traversal::Dfs => dfs_order(&tree) == order,
                };
                if !(order.is_valid() && order.len() == lattice.len() && split && tree.is_valid() && consistent) {
                    return Err(Failure::generation("self-check failed on the sampled order"));
                }
            }
            let full = SequenceOrder::full(lattice, order.into_indices());
            let mut file = create(&path)?;
            write_order(&full, &mut file).and_then(|_| file.flush()).map_err(|e| io_failure(&path, e))?;
            say!(out, "wrote {}", path.display())
        }
        Command::CountTrees { height, width } => {
            let lattice = Lattice::new(height, width)?;
            if lattice.len() > COUNT_LIMIT {
                return Err(Error::SizeLimit { what: "lattice for exact counting", size: lattice.len(), limit: COUNT_LIMIT }.into());
            }
            let count = count_spanning_trees(&Region::full(lattice));
            say!(out, "{count}")?;
            say!(out, "ln/N: {:.12}", ln_biguint(&count) / lattice.len() as f64)
        }
        Command::VerifyUniformity { height, width, samples, seed } => {
            let lattice = Lattice::new(height, width)?;
            if lattice.len() > ENUMERATION_LIMIT {
                return Err(Error::SizeLimit { what: "lattice for enumeration", size: lattice.len(), limit: ENUMERATION_LIMIT }.into());
            }
            if samples == 0 {
                return Err(Failure::invalid("samples must be at least 1"));
            }
            let region = Region::full(lattice);
            let freq = tree_frequencies(&region, lattice.vertex(0), samples, &mut Rng::new(seed))?;
            let test = freq.chi_square();
            say!(out, "seed: {seed}")?;
            say!(out, "trees: {}", freq.trees.len())?;
            say!(out, "samples: {samples}")?;
            say!(out, "chi2: {:.6}", test.statistic)?;
            say!(out, "dof: {}", test.dof)?;
            say!(out, "p-value: {:.6}", test.p_value)?;
            say!(out, "alpha {DEFAULT_ALPHA}: {}", if test.passes(DEFAULT_ALPHA) { "pass" } else { "fail" })
        }
        Command::Bench { height, width, masks_per_ratio, ratios, max_trials, seed, workers, out: path } => {
            let config = BenchConfig {
                height,
                width,
                ratios: ratios.unwrap_or_else(default_ratios),
                masks_per_ratio,
                max_trials,
                max_mask_attempts: DEFAULT_MAX_ATTEMPTS,
                seed,
                workers,
            };
            let stats = acceptance_experiment(&config)?;
            let file = create(&path)?;
            write_stats_csv(&stats, file).map_err(|e| io_failure(&path, e))?;
            say!(out, "seed: {seed}")?;
            for s in &stats {
                say!(
                    out,
                    "ratio {:.2} {} {:<8} mean trials {:>7.3} failures {:>6.2}%",
                    s.ratio,
                    s.traversal,
                    s.root,
                    s.mean_trials,
                    100.0 * s.failure_ratio
                )?;
            }
            say!(out, "wrote {}", path.display())
        }
        Command::Entropy { study, j, height, width, orders, kind, seed, out: path } => {
            let model = GibbsModel::new(Lattice::new(height, width)?, j)?;
            let mut rng = Rng::new(seed);
            let profile = match study {
                Study::Distance => {
                    let kind = kind.map_or(OrderKind::RandomPermutation, OrderKind::from);
                    distance_entropy_profile(&model, &mut rng, orders, kind)?
                }
                Study::Position => position_entropy_map(&model, &mut rng, orders)?,
                Study::Sequence => {
                    let kind = kind.map_or(OrderKind::SpanningTree, OrderKind::from);
                    sequence_entropy_profile(&model, kind, &mut rng, orders)?
                }
            };
            let file = create(&path)?;
            profile.write_csv(file).map_err(|e| io_failure(&path, e))?;
            say!(out, "seed: {seed}")?;
            say!(out, "rows: {}", profile.rows.len())?;
            say!(out, "wrote {}", path.display())
        }
    }
}
