//! Seed derivation. One base seed fans out into independent streams (games
//! in a tournament, evaluation episodes) through a splitmix64 scramble, so
//! results do not depend on execution order.

/// Derive the `index`-th child seed of `base`. splitmix64 finalizer over the
/// combined words; stable across platforms.
pub fn split_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
