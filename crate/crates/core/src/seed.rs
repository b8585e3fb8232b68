//! Deterministic seed derivation and per-purpose random streams.
//!
//! Seeds are 64-bit FNV-1a hashes over
//! `global_seed (8 bytes, little endian) | 0x1f | image_id | 0x1f | factor | 0x1f | severity (1 byte)`.
//! A derived seed keys a ChaCha8 generator; each random decision inside an
//! operator draws from its own ChaCha stream id so that adding draws to one
//! purpose never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const FIELD_SEPARATOR: u8 = 0x1f;

fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(state, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub fn derive_seed(global_seed: u64, image_id: &str, factor: &str, severity: u8) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &global_seed.to_le_bytes());
    h = fnv1a(h, &[FIELD_SEPARATOR]);
    h = fnv1a(h, image_id.as_bytes());
    h = fnv1a(h, &[FIELD_SEPARATOR]);
    h = fnv1a(h, factor.as_bytes());
    h = fnv1a(h, &[FIELD_SEPARATOR]);
    fnv1a(h, &[severity])
}

/// Independent random streams keyed by one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams(u64);

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn seed(&self) -> u64 {
        self.0
    }

    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(id);
        rng
    }
}
