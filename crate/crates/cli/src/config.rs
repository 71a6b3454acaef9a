//! Run-configuration handling: a TOML file of optional fields merged under
//! command-line flags, both layered over the built-in defaults
//! (N=1000, Ne=800, Ni=200, k=10, w_e=32, w_i=22, t_e=3, t_i=11,
//! duration=2000 ms, distance_scale=25).

use std::path::Path;

use ringsync::simulate::SimConfig;
use ringsync::sweep::SweepConfig;
use ringsync::{Error, Result};
use serde::Deserialize;

/// Output table format for `sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    /// Comma-separated rows plus a JSON metadata sidecar.
    Csv,
    /// One JSON document holding rows and metadata together.
    Json,
}

/// Optional overrides read from a `--config` TOML file. Every field may be
/// omitted; unknown keys are rejected so typos fail loudly.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub ne: Option<usize>,
    pub ni: Option<usize>,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub duration: Option<u32>,
    pub w_e: Option<f64>,
    pub w_i: Option<f64>,
    pub t_e: Option<f64>,
    pub t_i: Option<f64>,
    pub delay: Option<bool>,
    pub distance_scale: Option<u32>,
    pub sims: Option<usize>,
    pub p_grid: Option<Vec<f64>>,
    pub out: Option<String>,
    pub format: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| Error::config(format!("config file {}: {e}", path.display())))
    }
}

/// Flag values shared by the network-building subcommands. `None` means the
/// flag was not given, so the config file (then the default) decides.
#[derive(Debug, Clone, Copy, Default, clap::Args)]
pub struct NetFlags {
    /// Number of units in the ring [default: 1000]
    #[arg(long)]
    pub n: Option<usize>,
    /// Out-degree per unit, split evenly clockwise/counterclockwise; must
    /// be even [default: 10]
    #[arg(long)]
    pub k: Option<usize>,
    /// Base RNG seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Flag values shared by the simulating subcommands.
#[derive(Debug, Clone, Copy, Default, clap::Args)]
pub struct SimFlags {
    /// Run length in ms [default: 2000]
    #[arg(long)]
    pub duration: Option<u32>,
    /// Delay spike delivery in proportion to ring distance [default: off]
    #[arg(long)]
    pub delay: bool,
    /// Ring hops per ms of delivery delay when --delay is on [default: 25]
    #[arg(long)]
    pub distance_scale: Option<u32>,
}

/// Fully resolved settings: defaults, overridden by the config file,
/// overridden by command-line flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub n: usize,
    pub ne: usize,
    pub ni: usize,
    pub k: usize,
    pub p: f64,
    pub sims: usize,
    pub p_grid: Option<Vec<f64>>,
    pub sim: SimConfig,
    pub out: Option<String>,
    pub format: OutputFormat,
}

impl Settings {
    pub fn resolve(
        file: &FileConfig,
        net: &NetFlags,
        sim_flags: &SimFlags,
        p_flag: Option<f64>,
        sims: Option<usize>,
        p_grid: Option<&Vec<f64>>,
    ) -> Result<Settings> {
        let defaults = SweepConfig::default();

        let n = net.n.or(file.n).unwrap_or(defaults.n);
        let k = net.k.or(file.k).unwrap_or(defaults.k);
        let p = p_flag.or(file.p).unwrap_or(0.0);

        // The population split follows the file when given, else the 4:1
        // default ratio scaled to n. A half-given split fills in the rest.
        let (ne, ni) = match (file.ne, file.ni) {
            (Some(ne), Some(ni)) => (ne, ni),
            (Some(ne), None) => (ne, checked_rest(n, ne, "ne")?),
            (None, Some(ni)) => (checked_rest(n, ni, "ni")?, ni),
            (None, None) => {
                let ne = n * 4 / 5;
                (ne, n - ne)
            }
        };

        let sim = SimConfig {
            duration: sim_flags.duration.or(file.duration).unwrap_or(2000),
            w_e: file.w_e.unwrap_or(32.0),
            w_i: file.w_i.unwrap_or(22.0),
            t_e: file.t_e.unwrap_or(3.0),
            t_i: file.t_i.unwrap_or(11.0),
            delay_enabled: sim_flags.delay || file.delay.unwrap_or(false),
            distance_scale: sim_flags
                .distance_scale
                .or(file.distance_scale)
                .unwrap_or(25),
            seed: net.seed.or(file.seed).unwrap_or(0),
        };

        let format = match file.format.as_deref() {
            None => OutputFormat::Csv,
            Some("csv") => OutputFormat::Csv,
            Some("json") => OutputFormat::Json,
            Some(other) => {
                return Err(Error::config(format!(
                    "output format must be csv or json, got {other}"
                )))
            }
        };

        Ok(Settings {
            n,
            ne,
            ni,
            k,
            p,
            sims: sims.or(file.sims).unwrap_or(defaults.sims_per_p),
            p_grid: p_grid.cloned().or_else(|| file.p_grid.clone()),
            sim,
            out: file.out.clone(),
            format,
        })
    }

    /// The settings as a sweep description over the resolved p grid.
    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            p_grid: self
                .p_grid
                .clone()
                .unwrap_or_else(ringsync::sweep::default_p_grid),
            sims_per_p: self.sims,
            base_seed: self.sim.seed,
            n: self.n,
            ne: self.ne,
            ni: self.ni,
            k: self.k,
            sim: self.sim,
        }
    }
}

fn checked_rest(n: usize, part: usize, name: &str) -> Result<usize> {
    n.checked_sub(part)
        .ok_or_else(|| Error::config(format!("{name} = {part} exceeds network size {n}")))
}
