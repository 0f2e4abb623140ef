//! Seed split scheme.
//!
//! Every random draw descends from one user seed. A task gets its own
//! ChaCha8 stream: the generator is keyed by the seed and the stream
//! number is `(domain << 32) | index`, so trials of one experiment and the
//! different experiments of one run never share a stream and can be
//! evaluated in any order or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub mod domain {
    pub const PHASES: u64 = 1;
    pub const CONSISTENCY: u64 = 2;
    pub const ALIGNMENT: u64 = 3;
    pub const DFS: u64 = 4;
    pub const MOMENTUM: u64 = 5;
    pub const MESSAGES: u64 = 6;
}

pub fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 32) | (index & 0xffff_ffff));
    rng
}
