//! Seed derivation.
//!
//! Every random stream in the pipeline is seeded by
//! `derive_seed(master, stage, pair, run)`: the stage name is hashed with
//! 64-bit FNV-1a, then master seed, stage hash, pair id and run id are folded
//! through SplitMix64 one after another. The scheme depends on nothing but its
//! four inputs, so any single run of a long schedule can be recomputed in
//! isolation.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stage: &str, pair: u64, run: u64) -> u64 {
    [fnv1a(stage.as_bytes()), pair, run]
        .into_iter()
        .fold(splitmix64(master), |h, x| splitmix64(h ^ x))
}
