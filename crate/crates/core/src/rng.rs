//! Per-run random streams.
//!
//! Run `i` of a query seeded with `seed` always draws from the same
//! stream, whichever worker executes it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

pub fn run_rng(seed: u64, run: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}
