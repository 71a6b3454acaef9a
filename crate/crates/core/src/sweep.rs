//! Experiment orchestration: run seeded simulation ensembles across a grid
//! of rewiring probabilities, aggregate the graph statistics and the
//! synchronization measure, normalize, and emit CSV + JSON artifacts.
//!
//! Every (p, sim) cell gets its own seed derived injectively from the base
//! seed, so cells are independent, reproducible, and safe to run on any
//! number of workers: aggregation happens in (p_index, sim_index) order
//! regardless of completion order, and output files are byte-identical
//! across runs and across worker counts.

use std::io::Write;

use rayon::prelude::*;

use crate::analysis::{convolve_counts, normalize_s, sync_measure, KERNEL_RADIUS};
use crate::error::Error;
use crate::neuron::NeuronKind;
use crate::simulate::{build_system, run_simulation, SimConfig};
use crate::topology::Network;
use crate::Result;

/// Full description of one sweep.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepConfig {
    /// Rewiring probabilities to visit, in order.
    pub p_grid: Vec<f64>,
    /// Ensemble size per grid point.
    pub sims_per_p: usize,
    /// Root of the per-cell seed derivation.
    pub base_seed: u64,
    pub n: usize,
    pub ne: usize,
    pub ni: usize,
    pub k: usize,
    /// Simulation parameters; its `seed` field is ignored (cells derive
    /// their own).
    pub sim: SimConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            p_grid: default_p_grid(),
            sims_per_p: 10,
            base_seed: 0,
            n: 1000,
            ne: 800,
            ni: 200,
            k: 10,
            sim: SimConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_grid.is_empty() {
            return Err(Error::config("p grid must not be empty"));
        }
        for &p in &self.p_grid {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!(
                    "rewiring probability must lie in [0, 1], got {p}"
                )));
            }
        }
        if self.sims_per_p == 0 {
            return Err(Error::config("ensemble size must be at least 1"));
        }
        if self.ne + self.ni != self.n {
            return Err(Error::config(format!(
                "population split {} + {} does not equal network size {}",
                self.ne, self.ni, self.n
            )));
        }
        self.sim.validate()
    }
}

/// The default grid: p = 0, then 17 logarithmically spaced points from
/// 10⁻⁴ to 1.
pub fn default_p_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    grid.extend((0..=16).map(|i| 10f64.powf(-4.0 + 0.25 * i as f64)));
    grid
}

/// SplitMix64 finalizer — a bijection on u64, so distinct inputs give
/// distinct outputs.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one (p, sim) cell. Injective for any fixed base seed: the cell
/// coordinates are packed into disjoint bit ranges and passed through a
/// bijective mixer.
pub fn derive_seed(base_seed: u64, p_index: usize, sim_index: usize) -> u64 {
    splitmix64(base_seed ^ (((p_index as u64) << 32) | sim_index as u64))
}

/// Aggregated record for one grid point.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub c: f64,
    /// Mean path length over connected runs; absent if every run in the
    /// cell came out disconnected.
    pub l: Option<f64>,
    pub s: f64,
    pub c_norm: f64,
    pub l_norm: Option<f64>,
    pub s_norm: f64,
    /// Mean dominant frequency over runs that had one.
    pub freq_hz: Option<f64>,
    pub n_sims: usize,
    pub c_std: f64,
    pub l_std: f64,
    pub s_std: f64,
}

/// Outcome of a whole sweep: one row per grid point plus provenance.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub config: SweepConfig,
    /// FNV-1a hash of the serialized config, hex-encoded.
    pub config_hash: String,
    pub derived_seeds: Vec<Vec<u64>>,
    /// True when every simulation produced S = 0; the S_norm column is then
    /// left unnormalized zeros.
    pub degenerate_s: bool,
    /// Number of simulations whose rewired graph was disconnected (excluded
    /// from the L means).
    pub disconnected_runs: usize,
}

struct CellOutcome {
    c: f64,
    l: Option<f64>,
    s: f64,
    freq_hz: Option<f64>,
}

fn run_cell(config: &SweepConfig, p: f64, seed: u64) -> Result<CellOutcome> {
    let sim = SimConfig { seed, ..config.sim };
    let (net, population) = build_system(config.n, config.ne, config.ni, config.k, p, &sim)?;
    let c = net.clustering_coefficient();
    let l = net.mean_path_length();
    let (_, counts) = run_simulation(&net, &population, &sim)?;
    let series = convolve_counts(&counts, KERNEL_RADIUS);
    let measure = sync_measure(&series)?;
    Ok(CellOutcome {
        c,
        l,
        s: measure.s,
        freq_hz: measure.dominant_freq_hz,
    })
}

/// The p = 0 graph statistics that normalize the C and L columns. The
/// pristine lattice is deterministic, so these are exact per (n, k).
fn lattice_baseline(n: usize, k: usize) -> Result<(f64, f64)> {
    // Metrics ignore weights and unit kinds; any population works.
    let kinds = vec![NeuronKind::Excitatory; n];
    let mut rng = crate::rng::stream(0, crate::rng::Stream::Topology);
    let lattice = Network::ring(n, k, &kinds, 1.0, 1.0, &mut rng)?;
    let c0 = lattice.clustering_coefficient();
    let l0 = lattice
        .mean_path_length()
        .ok_or_else(|| Error::config("ring lattice is disconnected; k must be at least 2"))?;
    Ok((c0, l0))
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (so a one-sim ensemble reports 0 rather
/// than NaN).
fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Run the full grid. Cells execute in parallel; results aggregate in grid
/// order, so the outcome is independent of worker count and identical
/// across repeated runs.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;

    let derived_seeds: Vec<Vec<u64>> = (0..config.p_grid.len())
        .map(|ip| {
            (0..config.sims_per_p)
                .map(|j| derive_seed(config.base_seed, ip, j))
                .collect()
        })
        .collect();

    let cells: Vec<(usize, usize)> = (0..config.p_grid.len())
        .flat_map(|ip| (0..config.sims_per_p).map(move |j| (ip, j)))
        .collect();
    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|&(ip, j)| run_cell(config, config.p_grid[ip], derived_seeds[ip][j]))
        .collect::<Result<_>>()?;

    let (c0, l0) = lattice_baseline(config.n, config.k)?;

    let mut rows = Vec::with_capacity(config.p_grid.len());
    let mut disconnected_runs = 0usize;
    for (ip, &p) in config.p_grid.iter().enumerate() {
        let cell = &outcomes[ip * config.sims_per_p..(ip + 1) * config.sims_per_p];
        let cs: Vec<f64> = cell.iter().map(|o| o.c).collect();
        let ls: Vec<f64> = cell.iter().filter_map(|o| o.l).collect();
        let ss: Vec<f64> = cell.iter().map(|o| o.s).collect();
        let freqs: Vec<f64> = cell.iter().filter_map(|o| o.freq_hz).collect();
        disconnected_runs += cell.len() - ls.len();

        let l = (!ls.is_empty()).then(|| mean(&ls));
        rows.push(SweepRow {
            p,
            c: mean(&cs),
            l,
            s: mean(&ss),
            c_norm: mean(&cs) / c0,
            l_norm: l.map(|v| v / l0),
            s_norm: 0.0, // filled below once the global max is known
            freq_hz: (!freqs.is_empty()).then(|| mean(&freqs)),
            n_sims: config.sims_per_p,
            c_std: std_dev(&cs),
            l_std: if ls.is_empty() { 0.0 } else { std_dev(&ls) },
            s_std: std_dev(&ss),
        });
    }

    let s_means: Vec<f64> = rows.iter().map(|r| r.s).collect();
    let (s_norm, degenerate_s) = normalize_s(&s_means);
    for (row, sn) in rows.iter_mut().zip(s_norm) {
        row.s_norm = sn;
    }

    let config_json = serde_json::to_string(config).map_err(|e| Error::config(e.to_string()))?;
    Ok(SweepResult {
        rows,
        config: config.clone(),
        config_hash: format!("{:016x}", fnv1a64(config_json.as_bytes())),
        derived_seeds,
        degenerate_s,
        disconnected_runs,
    })
}

/// FNV-1a over a byte string.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write the per-p table as CSV. The three standard-deviation columns ride
/// after the core columns; fields with no defined value are left empty.
pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    writeln!(
        out,
        "p,C,L,S,C_norm,L_norm,S_norm,freq_hz,n_sims,seed,C_std,L_std,S_std"
    )?;
    for r in &result.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.p,
            r.c,
            opt(r.l),
            r.s,
            r.c_norm,
            opt(r.l_norm),
            r.s_norm,
            opt(r.freq_hz),
            r.n_sims,
            result.config.base_seed,
            r.c_std,
            r.l_std,
            r.s_std,
        )?;
    }
    Ok(())
}

/// Companion metadata: the full config, its hash, per-cell seeds, and the
/// degenerate/disconnected flags — everything needed to reproduce or audit
/// the CSV, with no volatile fields.
pub fn write_metadata<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    let doc = serde_json::json!({
        "config": result.config,
        "config_hash": result.config_hash,
        "derived_seeds": result.derived_seeds,
        "degenerate_s": result.degenerate_s,
        "disconnected_runs": result.disconnected_runs,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::config(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}
