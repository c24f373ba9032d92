//! `fraclab` — config-driven experiment runner.
//!
//! Every subcommand resolves to a fully deterministic config; outputs embed
//! the config hash, seed and version, are written atomically, and are served
//! from the cache when the same (config, version) pair was run before. The
//! cache directory comes from `FRACLAB_CACHE_DIR` (no caching when unset).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;
mod presets;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "fraclab", version, about = "dyadic-measure experiment runner")]
struct Cli {
    /// JSON config file; fields present in it override the flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// output directory
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// worker threads for parallel sweeps (output order is deterministic
    /// regardless)
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bernoulli-convolution entropy sweep with dip detection
    ScanBernoulli(commands::ScanBernoulliArgs),
    /// Entropy profile of a parametric IFS from a description file
    EntropyProfile(commands::EntropyProfileArgs),
    /// Finite transversality audit over a parameter grid
    Transversality(commands::TransversalityArgs),
    /// Exact overlap search in a quadratic field
    Overlaps(commands::OverlapsArgs),
    /// Direction scan of the four-corner Cantor system
    ProjectCantor(commands::ProjectCantorArgs),
    /// Two-scale Assouad estimates for planar presets
    Assouad(commands::AssouadArgs),
    /// Scenery orbit of the magnification operator
    Scenery(commands::SceneryArgs),
    /// Uniform-entropy-dimension statistic
    UniformEntropy(commands::UniformEntropyArgs),
    /// Dyadic-spreading checker
    Spreading(commands::SpreadingArgs),
    /// Sumset growth experiment (entropy-increase hypotheses + union)
    SumsetGrowth(commands::SumsetGrowthArgs),
    /// Tree regularization between uniform levels
    Regularize(commands::RegularizeArgs),
    /// Porosity witness measure and mass bound
    Porosity(commands::PorosityArgs),
    /// Print the schema and a runnable example for a subcommand
    Describe(DescribeArgs),
}

#[derive(Args)]
struct DescribeArgs {
    /// subcommand name, e.g. scan-bernoulli
    name: String,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build_global()
        .ok();
    let ctx = output::RunContext::new(cli.out_dir.clone(), cli.config.as_deref())?;
    match cli.command {
        Command::ScanBernoulli(a) => commands::scan_bernoulli(&ctx, a),
        Command::EntropyProfile(a) => commands::entropy_profile(&ctx, a),
        Command::Transversality(a) => commands::transversality(&ctx, a),
        Command::Overlaps(a) => commands::overlaps(&ctx, a),
        Command::ProjectCantor(a) => commands::project_cantor(&ctx, a),
        Command::Assouad(a) => commands::assouad(&ctx, a),
        Command::Scenery(a) => commands::scenery(&ctx, a),
        Command::UniformEntropy(a) => commands::uniform_entropy(&ctx, a),
        Command::Spreading(a) => commands::spreading(&ctx, a),
        Command::SumsetGrowth(a) => commands::sumset_growth(&ctx, a),
        Command::Regularize(a) => commands::regularize(&ctx, a),
        Command::Porosity(a) => commands::porosity(&ctx, a),
        Command::Describe(d) => commands::describe(&d.name),
    }
}
