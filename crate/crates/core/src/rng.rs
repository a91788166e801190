//! Keyed ChaCha20 substreams.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator whose output depends only on `seed` and `key`.
///
/// The seed fixes the ChaCha20 key; the hashed `key` selects the 64-bit
/// stream id, so substreams never overlap and can be drawn in any order.
pub(crate) fn keyed_rng(seed: u64, key: &[u64]) -> ChaCha20Rng {
    let stream = key.iter().fold(0u64, |h, &k| splitmix(h ^ k));
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// FNV-1a, for turning ids into substream keys.
pub(crate) fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}
