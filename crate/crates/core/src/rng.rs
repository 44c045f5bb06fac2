use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// All randomized constructions draw from this generator so that a `u64` seed
/// fully determines the result on every platform.
pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SHA-256 over the little-endian bit patterns of `inputs` followed by `outputs`,
/// truncated to 64 bits. Used to tie a run and its comparator to the same data.
pub fn data_hash(inputs: &[f64], outputs: &[f64]) -> u64 {
    let mut h = Sha256::new();
    h.update((inputs.len() as u64).to_le_bytes());
    for v in inputs {
        h.update(v.to_bits().to_le_bytes());
    }
    h.update((outputs.len() as u64).to_le_bytes());
    for v in outputs {
        h.update(v.to_bits().to_le_bytes());
    }
    let digest = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}
