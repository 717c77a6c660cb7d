//! Sobol point construction.

use super::direction::{DirectionTable, PRECISION_BITS};
use super::points::{PointMatrix, Provenance};
use super::QmcError;

/// Generates `n` Sobol points in `d` dimensions starting at `start_index`.
///
/// Point `i` of coordinate `j` is the XOR of the direction words selected by
/// the set bits of the plain binary expansion of `start_index + i`, so index
/// 0 is always the origin. Indices must stay below `2^52`, the carried
/// precision.
pub fn sobol_points(
    table: &DirectionTable,
    n: usize,
    d: usize,
    start_index: u64,
) -> Result<PointMatrix, QmcError> {
    if d == 0 {
        return Err(QmcError::Invalid("dimension must be positive".into()));
    }
    if d > table.dims() {
        return Err(QmcError::DimensionTooLarge {
            requested: d,
            available: table.dims(),
        });
    }
    let last = start_index
        .checked_add(n as u64)
        .filter(|&e| e <= 1u64 << PRECISION_BITS)
        .ok_or_else(|| {
            QmcError::Invalid(format!(
                "index range [{start_index}, {start_index}+{n}) exceeds 2^{PRECISION_BITS}"
            ))
        })?;
    let _ = last;

    let words: Vec<Vec<u64>> = (0..d)
        .map(|j| table.direction_words(j))
        .collect::<Result<_, _>>()?;
    let scale = (-(PRECISION_BITS as f64)).exp2();
    let mut values = Vec::with_capacity(n * d);
    for i in 0..n {
        let idx = start_index + i as u64;
        for w in words.iter() {
            let mut x = 0u64;
            let mut bits = idx;
            let mut b = 0usize;
            while bits != 0 {
                if bits & 1 == 1 {
                    x ^= w[b];
                }
                bits >>= 1;
                b += 1;
            }
            values.push(x as f64 * scale);
        }
    }
    PointMatrix::new(n, d, values, Provenance::Sobol)
}
