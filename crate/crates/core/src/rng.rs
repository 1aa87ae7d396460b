//! Independent random streams keyed by seed, replicate and purpose.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Each role gets its own ChaCha stream id, so
/// adding draws for one purpose never shifts another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    ProcessNoise = 0,
    MeasurementNoise = 1,
    InitialState = 2,
    PolicyMix = 3,
    LinkDraws = 4,
    CouplingOmega = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, replicate: u64, role: StreamRole) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(replicate.wrapping_add(0x5851_f42d_4c95_7f2d)));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(role as u64);
    rng
}
