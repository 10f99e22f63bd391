#![allow(dead_code)]

pub mod enumerate;
pub mod fuzz;
pub mod gen;
pub mod oracle;
pub mod policies;
pub mod proofs;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
