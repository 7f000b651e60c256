//! Fixtures shared by the kernel benchmarks.

use kgfield::random::random_field;
use kgfield::{LatticeField, ModelParams, MomentumLattice};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random band-limited field on a cubic `n^d` lattice with a fixed seed.
pub fn fixture(d: usize, n: usize, seed: u64) -> LatticeField {
    let lat = MomentumLattice::cubic(d, 8.0, n).expect("valid lattice");
    let params = ModelParams::new(1.0, 1.0, 0.25).expect("valid params");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_field(&lat, &params, 0.8, 0.0, &mut rng)
}
