//! `ringsync` — build rewired ring lattices, simulate Izhikevich populations
//! on them, and measure how strongly (and at what frequency) the spiking
//! synchronizes.
//!
//! Exit codes: 0 success, 1 invalid parameters, 2 file/parse problems,
//! 3 numeric fault during integration.

mod config;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{FileConfig, NetFlags, OutputFormat, Settings, SimFlags};
use ringsync::analysis::{convolve_counts, sync_measure, write_series, KERNEL_RADIUS};
use ringsync::simulate::{build_system, read_raster, run_simulation, spike_counts, write_raster};
use ringsync::sweep::{run_sweep, write_csv, write_metadata};
use ringsync::topology::{read_edge_list, write_edge_list};
use ringsync::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ringsync",
    version,
    about = "Ring-lattice spiking-network toolkit",
    long_about = "Build Watts-Strogatz rewired ring lattices of Izhikevich units, \
simulate them with optional distance-proportional spike delays, and measure \
the synchrony of the resulting spike trains.\n\nSet RINGSYNC_WORKERS to cap \
the worker-thread count used by metrics and sweeps."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Help text for the shared --config flag.
const CONFIG_HELP: &str = "TOML run-configuration file; command-line flags \
override its values. Recognized keys: n, ne, ni, k, p, seed, duration, w_e, \
w_i, t_e, t_i, delay, distance_scale, sims, p_grid, out, format. Defaults: \
n=1000, ne=800, ni=200, k=10, w_e=32, w_i=22, t_e=3, t_i=11, duration=2000, \
distance_scale=25";

#[derive(Subcommand)]
enum Command {
    /// Build a rewired ring lattice and write its edge list
    Generate {
        #[command(flatten)]
        net: NetFlags,
        /// Rewiring probability in [0, 1] [default: 0]
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_name = "FILE", long_help = CONFIG_HELP)]
        config: Option<PathBuf>,
        /// Output edge-list path [default: network.txt]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print clustering coefficient and mean path length of an edge list
    Metrics {
        /// Edge-list file produced by `generate`
        file: PathBuf,
    },
    /// Run one spiking simulation and write its raster
    Simulate {
        #[command(flatten)]
        net: NetFlags,
        #[command(flatten)]
        sim: SimFlags,
        /// Rewiring probability in [0, 1] [default: 0]
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_name = "FILE", long_help = CONFIG_HELP)]
        config: Option<PathBuf>,
        /// Output raster path [default: raster.txt]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure synchrony strength and dominant frequency of a raster
    Analyze {
        /// Raster file produced by `simulate` [default: raster.txt]
        #[arg(default_value = "raster.txt")]
        file: PathBuf,
        /// Also write the smoothed mean-field series to this path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep rewiring probabilities, averaging metrics over seed ensembles
    Sweep {
        #[command(flatten)]
        net: NetFlags,
        #[command(flatten)]
        sim: SimFlags,
        /// Simulations per grid point [default: 10]
        #[arg(long)]
        sims: Option<usize>,
        /// Comma-separated rewiring probabilities [default: 0 plus 17 log-spaced
        /// points from 1e-4 to 1]
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        p_grid: Option<Vec<f64>>,
        #[arg(long, value_name = "FILE", long_help = CONFIG_HELP)]
        config: Option<PathBuf>,
        /// Output table path [default: sweep.csv or sweep.json per --format]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format [default: csv]
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let failed = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if failed { 1 } else { 0 });
        }
    };
    match init_workers().and_then(|()| dispatch(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 1,
        Error::Parse { .. } | Error::Io(_) => 2,
        Error::Divergence { .. } => 3,
    }
}

/// Honor RINGSYNC_WORKERS by sizing the global worker pool before first use.
fn init_workers() -> Result<()> {
    let value = match std::env::var("RINGSYNC_WORKERS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(Error::config(format!("RINGSYNC_WORKERS: {e}"))),
        Ok(v) => v,
    };
    let workers: usize = value.trim().parse().map_err(|_| {
        Error::config(format!(
            "RINGSYNC_WORKERS must be a positive integer, got {value:?}"
        ))
    })?;
    if workers == 0 {
        return Err(Error::config("RINGSYNC_WORKERS must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Error::config(format!("worker pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            net,
            p,
            config,
            out,
        } => cmd_generate(net, p, config, out),
        Command::Metrics { file } => cmd_metrics(&file),
        Command::Simulate {
            net,
            sim,
            p,
            config,
            out,
        } => cmd_simulate(net, sim, p, config, out),
        Command::Analyze { file, out } => cmd_analyze(&file, out),
        Command::Sweep {
            net,
            sim,
            sims,
            p_grid,
            config,
            out,
            format,
        } => cmd_sweep(net, sim, sims, p_grid, config, out, format),
    }
}

fn load(config: Option<&Path>) -> Result<FileConfig> {
    match config {
        Some(path) => FileConfig::load(path),
        None => Ok(FileConfig::default()),
    }
}

/// Output path precedence: --out flag, then the config file's `out`, then the
/// subcommand default.
fn out_path(flag: Option<PathBuf>, s: &Settings, default: &str) -> PathBuf {
    flag.or_else(|| s.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(default))
}

fn cmd_generate(
    net: NetFlags,
    p: Option<f64>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<()> {
    let file = load(config.as_deref())?;
    let s = Settings::resolve(&file, &net, &SimFlags::default(), p, None, None)?;
    s.sim.validate()?;
    let (network, _) = build_system(s.n, s.ne, s.ni, s.k, s.p, &s.sim)?;

    let path = out_path(out, &s, "network.txt");
    let mut w = BufWriter::new(File::create(&path)?);
    write_edge_list(&network, &mut w)?;
    w.flush()?;

    println!(
        "N={} k={} p={} edges={}",
        network.n,
        network.k,
        network.p,
        network.edges.len()
    );
    Ok(())
}

fn cmd_metrics(file: &Path) -> Result<()> {
    let network = read_edge_list(BufReader::new(File::open(file)?))?;
    let c = network.clustering_coefficient();
    match network.mean_path_length() {
        Some(l) => println!("C={c} L={l}"),
        None => println!("C={c} L=inf"),
    }
    Ok(())
}

fn cmd_simulate(
    net: NetFlags,
    sim: SimFlags,
    p: Option<f64>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<()> {
    let file = load(config.as_deref())?;
    let s = Settings::resolve(&file, &net, &sim, p, None, None)?;
    s.sim.validate()?;
    let (network, population) = build_system(s.n, s.ne, s.ni, s.k, s.p, &s.sim)?;
    let (raster, _) = run_simulation(&network, &population, &s.sim)?;

    let path = out_path(out, &s, "raster.txt");
    let mut w = BufWriter::new(File::create(&path)?);
    write_raster(&raster, &mut w)?;
    w.flush()?;

    println!(
        "wrote {} ({} spikes, {} ms, seed {})",
        path.display(),
        raster.events.len(),
        s.sim.duration,
        s.sim.seed
    );
    Ok(())
}

fn cmd_analyze(file: &Path, out: Option<PathBuf>) -> Result<()> {
    let raster = read_raster(BufReader::new(File::open(file)?))?;
    let counts = spike_counts(&raster, raster.meta.duration);
    let series = convolve_counts(&counts, KERNEL_RADIUS);
    let measure = sync_measure(&series)?;

    if let Some(path) = out {
        let mut w = BufWriter::new(File::create(&path)?);
        write_series(&raster.meta, &series, &mut w)?;
        w.flush()?;
    }

    match measure.dominant_freq_hz {
        Some(f) => println!("S={:e} freq={}Hz", measure.s, f),
        None => println!("S={:e} freq=nanHz", measure.s),
    }
    Ok(())
}

fn cmd_sweep(
    net: NetFlags,
    sim: SimFlags,
    sims: Option<usize>,
    p_grid: Option<Vec<f64>>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
) -> Result<()> {
    let file = load(config.as_deref())?;
    let s = Settings::resolve(&file, &net, &sim, None, sims, p_grid.as_ref())?;
    let format = format.unwrap_or(s.format);
    let sweep_cfg = s.sweep_config();
    sweep_cfg.validate()?;
    let result = run_sweep(&sweep_cfg)?;

    match format {
        OutputFormat::Csv => {
            let path = out_path(out, &s, "sweep.csv");
            let mut w = BufWriter::new(File::create(&path)?);
            write_csv(&result, &mut w)?;
            w.flush()?;
            let meta_path = path.with_extension("meta.json");
            let mut w = BufWriter::new(File::create(&meta_path)?);
            write_metadata(&result, &mut w)?;
            w.flush()?;
            println!(
                "wrote {} ({} rows, {} sims per p)",
                path.display(),
                result.rows.len(),
                sweep_cfg.sims_per_p
            );
            println!("wrote {}", meta_path.display());
        }
        OutputFormat::Json => {
            let path = out_path(out, &s, "sweep.json");
            let mut w = BufWriter::new(File::create(&path)?);
            serde_json::to_writer_pretty(&mut w, &result)
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            writeln!(w)?;
            w.flush()?;
            println!(
                "wrote {} ({} rows, {} sims per p)",
                path.display(),
                result.rows.len(),
                sweep_cfg.sims_per_p
            );
        }
    }
    Ok(())
}
