use crate::rng::mix64;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// `mix64(base_seed ^ mix64(fnv1a64(identity)))` where `mix64` is the
/// SplitMix64 finalizer (add golden gamma, then two xor-shift-multiply rounds).
pub fn derive_seed(base_seed: u64, identity: &str) -> u64 {
    mix64(base_seed ^ mix64(fnv1a64(identity.as_bytes())))
}
