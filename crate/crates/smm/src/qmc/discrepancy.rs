//! Star discrepancy of a point set.

use super::points::PointMatrix;
use super::QmcError;

/// How the star discrepancy is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscrepancyMode {
    /// Exact value in one dimension via the sorted-sample formula.
    Exact1D,
    /// Lower bound in any dimension: the supremum over anchored boxes is
    /// restricted to a candidate grid mixing `resolution` equispaced levels
    /// per axis with the data coordinates themselves (and their upward
    /// neighbours, capturing boxes that just include a point).
    GridLowerBound { resolution: usize },
}

/// Star discrepancy `sup_u |#{x_i in [0, u)} / n - vol([0, u))|`.
pub fn star_discrepancy(points: &PointMatrix, mode: DiscrepancyMode) -> Result<f64, QmcError> {
    if points.n() == 0 {
        return Err(QmcError::Invalid("empty point set".into()));
    }
    match mode {
        DiscrepancyMode::Exact1D => {
            if points.d() != 1 {
                return Err(QmcError::Invalid(format!(
                    "exact star discrepancy needs d = 1, got d = {}",
                    points.d()
                )));
            }
            let mut x = points.column(0);
            x.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = x.len() as f64;
            let mut best: f64 = 0.0;
            for (i, &xi) in x.iter().enumerate() {
                let i = i as f64;
                best = best.max((i + 1.0) / n - xi).max(xi - i / n);
            }
            Ok(best)
        }
        DiscrepancyMode::GridLowerBound { resolution } => {
            if resolution == 0 {
                return Err(QmcError::Invalid("resolution must be positive".into()));
            }
            let d = points.d();
            let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(d);
            for j in 0..d {
                let mut c: Vec<f64> = (1..=resolution)
                    .map(|k| k as f64 / resolution as f64)
                    .collect();
                for i in 0..points.n() {
                    let x = points.get(i, j);
                    c.push(x);
                    let up = f64::from_bits(x.to_bits() + 1);
                    c.push(up.min(1.0));
                }
                c.sort_by(|a, b| a.partial_cmp(b).unwrap());
                c.dedup();
                candidates.push(c);
            }
            let total: f64 = candidates.iter().map(|c| c.len() as f64).product();
            if total > 2e7 {
                return Err(QmcError::Invalid(format!(
                    "candidate grid has ~{total:.0} corners; lower the resolution"
                )));
            }
            let n = points.n() as f64;
            let mut corner = vec![0usize; d];
            let mut best: f64 = 0.0;
            loop {
                let u: Vec<f64> = (0..d).map(|j| candidates[j][corner[j]]).collect();
                let mut count = 0usize;
                for i in 0..points.n() {
                    if points.row(i).iter().zip(&u).all(|(x, b)| x < b) {
                        count += 1;
                    }
                }
                let vol: f64 = u.iter().product();
                best = best.max((count as f64 / n - vol).abs());
                // advance the mixed-radix counter over candidate corners
                let mut j = 0;
                loop {
                    if j == d {
                        return Ok(best);
                    }
                    corner[j] += 1;
                    if corner[j] < candidates[j].len() {
                        break;
                    }
                    corner[j] = 0;
                    j += 1;
                }
            }
        }
    }
}
