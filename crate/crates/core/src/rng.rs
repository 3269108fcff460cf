//! Seeded random streams.
//!
//! Every run draws from independent substreams keyed by `(seed, tag, step,
//! agent)`. Agents never share a stream, so the order in which agents are
//! visited inside a step cannot change the outcome.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

pub type SimRng = Pcg64Mcg;

/// Stream purposes. The numeric values are part of the determinism contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    Recommend = 2,
    Rewire = 3,
    Generate = 4,
    Baseline = 5,
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run-global stream (initialization, Monte-Carlo baseline).
pub fn stream(seed: u64, tag: Stream) -> SimRng {
    SimRng::seed_from_u64(mix64(seed ^ mix64(tag as u64)))
}

/// Per-agent, per-step stream.
#[inline]
pub fn substream(seed: u64, tag: Stream, step: u32, agent: usize) -> SimRng {
    let key = mix64(seed ^ mix64(tag as u64))
        ^ mix64(((step as u64) << 32) | agent as u64);
    SimRng::seed_from_u64(mix64(key))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn substreams_are_distinct_and_repeatable() {
        let a: u64 = substream(7, Stream::Recommend, 3, 4).random();
        let b: u64 = substream(7, Stream::Recommend, 3, 4).random();
        let c: u64 = substream(7, Stream::Recommend, 3, 5).random();
        let d: u64 = substream(7, Stream::Rewire, 3, 4).random();
        let e: u64 = substream(7, Stream::Recommend, 4, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_ne!(a, e);
    }
}
