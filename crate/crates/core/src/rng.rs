//! Counter-derived random substreams.
//!
//! Every stochastic operation names its context as a path of indices below a
//! master seed, e.g. `(seed, [window, replication])`. The path is hashed into
//! a ChaCha key, so a replication's draws depend on nothing but its path:
//! scheduling and thread count cannot change them. There is no global RNG.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep substreams of different consumers apart.
pub mod tag {
    pub const DGP: u64 = 0x6467_7000;
    pub const AVR_BOOT: u64 = 0x6176_7200;
    pub const GS_BOOT: u64 = 0x6773_0000;
    pub const WINDOW: u64 = 0x7769_6e00;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `path` into `master`, giving a child seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &i| {
        splitmix64(acc ^ splitmix64(i.wrapping_add(0x5851_F42D_4C95_7F2D)))
    })
}

/// Independent generator for the context `path` under `master`.
pub fn substream(master: u64, path: &[u64]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = derive_seed(master, path);
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
