//! Randomisations of digital nets: nested uniform scrambling, digital
//! shifts, and antithetic reflection.

use super::direction::PRECISION_BITS;
use super::points::{PointMatrix, Provenance};
use super::QmcError;
use crate::rng::hash_words;

/// Seed for a nested uniform scramble. The same key always reproduces the
/// same scramble; independent keys give independent scrambles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScrambleKey {
    pub seed: u64,
}

const SCRAMBLE_TAG: u64 = 0x6f77656e_73637262; // "owenscrb"

/// Applies a nested uniform (Owen-style) scramble to raw Sobol points.
///
/// Each coordinate's binary digits pass through a random permutation tree:
/// the permutation applied to digit `j` depends on the first `j - 1` digits
/// of the original point, and in base 2 each permutation is just a
/// conditional bit flip. Flips are realised lazily as one hash bit per
/// (coordinate, depth, prefix), so two points agreeing in their leading
/// digits see identical flips there and the net structure is preserved,
/// while distinct coordinates scramble independently.
pub fn nested_scramble(points: &PointMatrix, key: &ScrambleKey) -> Result<PointMatrix, QmcError> {
    let seed = key.seed;
    scramble_with(points, move |dim, depth, prefix| {
        hash_words(&[seed, SCRAMBLE_TAG, dim as u64, depth as u64, prefix]) & 1 == 1
    })
}

/// Scramble with an explicit flip function (exposed for tests that force a
/// known permutation). `flip(dim, depth, prefix)` decides whether the digit
/// at 1-based `depth` is flipped given the first `depth - 1` original digits.
pub fn scramble_with<F>(points: &PointMatrix, flip: F) -> Result<PointMatrix, QmcError>
where
    F: Fn(usize, u32, u64) -> bool,
{
    if points.provenance() != Provenance::Sobol {
        return Err(QmcError::Invalid(
            "nested scrambling applies to raw Sobol points only".into(),
        ));
    }
    let k = PRECISION_BITS;
    let scale = (-(k as f64)).exp2();
    let up = (k as f64).exp2();
    let mut values = Vec::with_capacity(points.n() * points.d());
    for i in 0..points.n() {
        for j in 0..points.d() {
            let bits = (points.get(i, j) * up) as u64;
            let mut out = 0u64;
            for depth in 1..=k {
                let prefix = if depth == 1 { 0 } else { bits >> (k - depth + 1) };
                let digit = (bits >> (k - depth)) & 1;
                let flipped = digit ^ u64::from(flip(j, depth, prefix));
                out |= flipped << (k - depth);
            }
            values.push(out as f64 * scale);
        }
    }
    PointMatrix::new(points.n(), points.d(), values, Provenance::ScrambledSobol)
}

/// Adds `shift[j]` to coordinate `j` modulo 1 (a digital shift).
pub fn digital_shift(points: &PointMatrix, shift: &[f64]) -> Result<PointMatrix, QmcError> {
    if points.provenance() != Provenance::Sobol {
        return Err(QmcError::Invalid(
            "digital shifting applies to raw Sobol points only".into(),
        ));
    }
    if shift.len() != points.d() {
        return Err(QmcError::Invalid(format!(
            "shift vector has length {}, expected {}",
            shift.len(),
            points.d()
        )));
    }
    if let Some(s) = shift.iter().find(|s| !(0.0..1.0).contains(*s)) {
        return Err(QmcError::Invalid(format!("shift value {s} outside [0, 1)")));
    }
    let mut values = Vec::with_capacity(points.n() * points.d());
    for i in 0..points.n() {
        for (j, &s) in shift.iter().enumerate() {
            let mut v = points.get(i, j) + s;
            if v >= 1.0 {
                v -= 1.0;
            }
            values.push(v);
        }
    }
    PointMatrix::new(points.n(), points.d(), values, Provenance::ShiftedSobol)
}

/// Appends the antithetic reflection `1 - u` (taken modulo 1, so the unit
/// interval stays half-open and the map is an involution) to a point set.
/// The result has `2n` rows: the originals followed by their reflections in
/// the same order.
pub fn antithetic_extend(points: &PointMatrix) -> Result<PointMatrix, QmcError> {
    let mut values = Vec::with_capacity(2 * points.n() * points.d());
    values.extend_from_slice(points.values());
    for i in 0..points.n() {
        for j in 0..points.d() {
            let mut r = 1.0 - points.get(i, j);
            if r >= 1.0 {
                r = 0.0;
            }
            values.push(r);
        }
    }
    PointMatrix::new(2 * points.n(), points.d(), values, Provenance::Antithetic)
}
