//! Quasi-Monte Carlo point sets.
//!
//! Conventions used throughout the module:
//!
//! - Points are `f64` values in `[0, 1)` stored row-major in a
//!   [`PointMatrix`]; row `i` is point `i`, column `j` is coordinate `j`.
//! - Sobol points are built from direction numbers with `K = 52` binary
//!   digits of precision, so every raw coordinate is an exact multiple of
//!   `2^-52` and digit manipulations (scrambling, shifting) are lossless.
//! - Point indexing starts at 0 and uses the plain binary expansion of the
//!   index, so the first point of every Sobol dimension is 0.
//! - Scrambling and shifting consume randomness only through the
//!   counter-based hash in [`crate::rng`], keyed by an explicit seed.

mod direction;
mod discrepancy;
mod normal;
mod points;
mod scramble;
mod sobol;
mod uniformity;

pub use direction::{
    expand_direction_numbers, parse_direction_file, van_der_corput_direction_numbers,
    DimensionSpec, DirectionTable, PRECISION_BITS,
};
pub use discrepancy::{star_discrepancy, DiscrepancyMode};
pub use normal::{inv_normal_cdf, normal_cdf};
pub use points::{PointMatrix, Provenance};
pub use scramble::{antithetic_extend, digital_shift, nested_scramble, scramble_with, ScrambleKey};
pub use sobol::sobol_points;
pub use uniformity::uniformity_chi_square;

use thiserror::Error;

/// Errors from point construction and transformation.
#[derive(Debug, Error)]
pub enum QmcError {
    /// A direction-number file could not be parsed; `line` is 1-based.
    #[error("direction file, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// More coordinates were requested than the direction table provides.
    #[error("requested dimension {requested} but the table has {available}")]
    DimensionTooLarge { requested: usize, available: usize },
    /// The inverse normal CDF is only defined strictly inside (0, 1).
    #[error("inverse normal CDF input {0} is outside the open interval (0, 1)")]
    NormalDomain(f64),
    /// A structural precondition on the inputs failed.
    #[error("{0}")]
    Invalid(String),
}
