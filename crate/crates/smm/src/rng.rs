//! Counter-based random bits.
//!
//! All randomness in the crate flows through [`hash_words`], a fixed-point
//! chain of splitmix64 finalizer rounds over a tuple of `u64` words. Given
//! the same words it always returns the same output, so random streams can be
//! indexed (seed, purpose, counter) instead of carrying mutable state across
//! threads. Derived keys for sub-streams come from [`derive_key`], which
//! folds a string tag and an index into the parent seed.

/// One round of the splitmix64 output finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Hashes a tuple of words into a single well-mixed `u64`.
///
/// The chain absorbs each word with the splitmix64 golden-ratio increment, so
/// tuples that differ in any word (or in length) produce unrelated outputs.
pub fn hash_words(words: &[u64]) -> u64 {
    let mut h = 0x9e3779b97f4a7c15u64;
    for &w in words {
        h = mix(h.wrapping_add(0x9e3779b97f4a7c15).wrapping_add(w));
    }
    // Absorb the length so a trailing zero word is distinct from absence.
    mix(h ^ (words.len() as u64).wrapping_mul(0xff51afd7ed558ccd))
}

/// Derives an independent sub-stream key from a parent seed.
///
/// `tag` names the purpose of the sub-stream ("data", "sim", ...) and `idx`
/// distinguishes siblings with the same purpose. Structurally different
/// (seed, tag, idx) triples give independent keys.
pub fn derive_key(seed: u64, tag: &str, idx: u64) -> u64 {
    let mut words = Vec::with_capacity(2 + tag.len().div_ceil(8));
    words.push(seed);
    for chunk in tag.as_bytes().chunks(8) {
        let mut w = [0u8; 8];
        w[..chunk.len()].copy_from_slice(chunk);
        words.push(u64::from_le_bytes(w));
    }
    words.push(idx);
    hash_words(&words)
}

/// Maps 64 random bits to a uniform double strictly inside (0, 1).
///
/// Uses the top 52 bits centred on half-integers: `(k + 0.5) * 2^-52` with
/// `k` in `[0, 2^52)`. Both endpoints stay exactly representable (the
/// extremes are `2^-53` and `1 - 2^-53`), so the result can never round to
/// 0.0 or 1.0 and the inverse normal CDF is always defined on it.
#[inline]
pub fn bits_to_unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / 4503599627370496.0)
}

/// A counter-based uniform stream: draw `i` is `hash(key, i)`.
///
/// The struct only stores the key and a cursor; cloning or re-creating it
/// with the same key replays the identical stream.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        CounterRng { key, counter: 0 }
    }

    /// The i-th 64-bit word of the stream, independent of the cursor.
    #[inline]
    pub fn word_at(&self, i: u64) -> u64 {
        hash_words(&[self.key, i])
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let w = self.word_at(self.counter);
        self.counter += 1;
        w
    }

    /// Next uniform draw, strictly inside (0, 1).
    #[inline]
    pub fn next_unit_open(&mut self) -> f64 {
        bits_to_unit_open(self.next_u64())
    }
}
