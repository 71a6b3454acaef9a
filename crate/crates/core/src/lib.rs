//! Spiking-network simulation on ring lattices with Watts-Strogatz rewiring.
//!
//! The crate builds sparsely connected networks of Izhikevich units laid out
//! on a ring, interpolates them from regular through small-world to random
//! topology, runs time-stepped simulations (optionally with
//! distance-proportional spike propagation delays), and measures how global
//! spike synchronization co-varies with the graph's clustering coefficient
//! and characteristic path length.
//!
//! Module map:
//! - [`neuron`] — Izhikevich unit dynamics and population construction
//! - [`topology`] — ring lattice, rewiring, clustering / path-length metrics
//! - [`simulate`] — the tick loop, delay scheduling, spike rasters
//! - [`analysis`] — kernel convolution, power spectrum, the S measure
//! - [`sweep`] — seeded ensembles over a grid of rewiring probabilities

pub mod analysis;
pub mod error;
pub mod neuron;
pub mod rng;
pub mod simulate;
pub mod sweep;
pub mod topology;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
