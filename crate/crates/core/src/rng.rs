//! Named random streams derived from a single master seed.
//!
//! Every stream is a ChaCha8 generator keyed by the master seed and
//! separated by a fixed ChaCha stream id, so adding a stream never shifts
//! the draws of another one and the output is identical on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream ids. Never renumber: traces depend on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Policy = 1,
    Shadowing = 2,
    Fading = 3,
    Surrogate = 4,
}

pub fn stream(seed: u64, which: Stream) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

/// The generators one run owns exclusively.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub policy: StreamRng,
    pub shadowing: StreamRng,
    pub fading: StreamRng,
}

impl RunStreams {
    pub fn new(seed: u64) -> Self {
        RunStreams {
            policy: stream(seed, Stream::Policy),
            shadowing: stream(seed, Stream::Shadowing),
            fading: stream(seed, Stream::Fading),
        }
    }
}
