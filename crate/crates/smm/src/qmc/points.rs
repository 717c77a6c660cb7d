//! Point-set container.

use super::QmcError;
use std::io::Write;

/// How a point set was produced. Transformations check provenance so that,
/// for example, a digital scramble is only applied to a raw digital net.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Raw Sobol points, exact multiples of `2^-52`.
    Sobol,
    /// Sobol points after a nested uniform scramble.
    ScrambledSobol,
    /// Sobol points after a digital (mod-1) shift.
    ShiftedSobol,
    /// Antithetic reflection appended to another set.
    Antithetic,
    /// Counter-based pseudo-random uniforms.
    PseudoRandom,
}

/// An `n x d` matrix of points in `[0, 1)^d`, stored row-major.
#[derive(Debug, Clone)]
pub struct PointMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
    provenance: Provenance,
}

impl PointMatrix {
    /// Builds a matrix, checking shape and the `[0, 1)` range invariant.
    pub fn new(
        n: usize,
        d: usize,
        values: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self, QmcError> {
        if values.len() != n * d {
            return Err(QmcError::Invalid(format!(
                "point matrix {n}x{d} needs {} values, got {}",
                n * d,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..1.0).contains(*v)) {
            return Err(QmcError::Invalid(format!(
                "point value {v} lies outside [0, 1)"
            )));
        }
        Ok(PointMatrix {
            n,
            d,
            values,
            provenance,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.d + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column `j` as an owned vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    /// Writes the matrix as comma-separated rows using the shortest
    /// round-trip decimal form of each value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}
