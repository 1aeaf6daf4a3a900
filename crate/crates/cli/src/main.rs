//! `simulate`: exciton wave packet transport in a lossless polaritonic
//! wire. Runs a named preset or a TOML config file and writes plot-ready
//! CSV/JSON data plus a provenance manifest.

use std::path::PathBuf;

use clap::Parser;
use polariton_cli::driver::{build_plan, resolve_workers, Invocation};
use polariton_cli::error::{AppError, Result};
use polariton_cli::{manifest, runner};

#[derive(Debug, Parser)]
#[command(
    name = "simulate",
    version,
    about = "Exciton wave packet dynamics in a multimode polaritonic wire",
    after_help = "TARGET is a preset name (size-sweep, cutoff-sweep, disorder-sweep, \
photon-weights, unidirectional, det-trajectories; append :full for the published \
scale) or a path to a TOML config file.\n\nExit codes: 0 success, 2 configuration \
error, 3 numerical error, 4 resource guard."
)]
struct Cli {
    /// Preset name or config file path.
    target: String,

    /// Master seed; overrides the config value.
    #[arg(long)]
    seed: Option<u64>,

    /// Disorder realizations per run; overrides the config value.
    #[arg(long)]
    realizations: Option<usize>,

    /// Worker threads. When absent, SIMULATE_WORKERS is consulted, then
    /// the number of cores.
    #[arg(long)]
    workers: Option<usize>,

    /// Output directory; overrides the config value.
    #[arg(long)]
    out: Option<PathBuf>,

    /// section.key=value adjustments applied to every run member, after
    /// the file or preset values and before the dedicated flags.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn run(cli: Cli) -> Result<()> {
    let workers = resolve_workers(cli.workers)?;
    if let Some(n) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| AppError::Config(format!("cannot configure {n} workers: {e}")))?;
    }
    let invocation = Invocation {
        target: cli.target,
        seed: cli.seed,
        realizations: cli.realizations,
        out: cli.out,
        overrides: cli.overrides,
    };
    let plan = build_plan(&invocation)?;
    let out_root = PathBuf::from(&plan.members[0].config.output.directory);
    println!("{}: {} run(s) -> {}", plan.name, plan.members.len(), out_root.display());
    let manifest = runner::execute(&plan, &out_root, rayon::current_num_threads())?;
    println!(
        "done in {:.1} s; manifest {}",
        manifest.wall_time_s,
        out_root.join(manifest::MANIFEST_FILE).display()
    );
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
