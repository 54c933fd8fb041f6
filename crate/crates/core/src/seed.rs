/// Mixes a base seed with a list of stream tags (fold index, class, noise
/// level bits, ...) into an independent 64-bit seed.
///
/// Uses the splitmix64 finalizer, so nearby inputs give unrelated outputs.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix(base ^ 0x6a09_e667_f3bc_c908);
    for &tag in tags {
        state = splitmix(state ^ splitmix(tag.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    state
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
