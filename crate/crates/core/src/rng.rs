//! Seeded random-number streams.
//!
//! Every run uses three independent streams derived from one seed: topology
//! construction, population parameters, and thalamic background input. Keeping
//! the streams separate means a delay-on and a delay-off run of the same seed
//! share an identical network, identical unit parameters, and identical noise.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The independent random streams a single run draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Edge weights and rewiring choices.
    Topology,
    /// Unit parameter draws and inhibitory placement.
    Population,
    /// Per-tick background input.
    Thalamic,
}

impl Stream {
    fn index(self) -> u64 {
        match self {
            Stream::Topology => 0,
            Stream::Population => 1,
            Stream::Thalamic => 2,
        }
    }
}

/// A generator for one of a seed's independent streams.
pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.index());
    rng
}
