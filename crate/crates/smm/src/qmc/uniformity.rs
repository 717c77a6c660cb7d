//! Marginal uniformity diagnostics.

use super::points::PointMatrix;
use super::QmcError;

/// Per-coordinate chi-square statistic against the uniform law.
///
/// Each coordinate is binned into `bins` equal-width cells and
/// `sum (observed - expected)^2 / expected` is returned per coordinate
/// (`bins - 1` degrees of freedom under uniformity). Requires at least five
/// expected observations per cell (`n >= 5 * bins`).
pub fn uniformity_chi_square(points: &PointMatrix, bins: usize) -> Result<Vec<f64>, QmcError> {
    if bins < 2 {
        return Err(QmcError::Invalid("need at least two bins".into()));
    }
    if points.n() < 5 * bins {
        return Err(QmcError::Invalid(format!(
            "chi-square with {bins} bins needs n >= {}, got {}",
            5 * bins,
            points.n()
        )));
    }
    let expected = points.n() as f64 / bins as f64;
    let mut stats = Vec::with_capacity(points.d());
    for j in 0..points.d() {
        let mut counts = vec![0usize; bins];
        for i in 0..points.n() {
            let b = ((points.get(i, j) * bins as f64) as usize).min(bins - 1);
            counts[b] += 1;
        }
        stats.push(
            counts
                .iter()
                .map(|&c| {
                    let diff = c as f64 - expected;
                    diff * diff / expected
                })
                .sum(),
        );
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmc::points::Provenance;
    use crate::rng::CounterRng;

    #[test]
    fn uniform_draws_pass_and_clumped_draws_fail() {
        let n = 2000;
        let mut rng = CounterRng::new(11);
        let vals: Vec<f64> = (0..n).map(|_| rng.next_unit_open()).collect();
        let uniform = PointMatrix::new(n, 1, vals, Provenance::PseudoRandom).unwrap();
        // 99.9% critical value for 15 degrees of freedom is about 37.7.
        let stat = uniformity_chi_square(&uniform, 16).unwrap()[0];
        assert!(stat < 37.7, "stat = {stat}");

        let clumped: Vec<f64> = (0..n).map(|i| 0.5 + 1e-3 * (i as f64 / n as f64)).collect();
        let bad = PointMatrix::new(n, 1, clumped, Provenance::PseudoRandom).unwrap();
        let stat = uniformity_chi_square(&bad, 16).unwrap()[0];
        assert!(stat > 1000.0, "stat = {stat}");
    }

    #[test]
    fn sample_size_floor_is_enforced() {
        let vals = vec![0.5; 40];
        let p = PointMatrix::new(40, 1, vals, Provenance::PseudoRandom).unwrap();
        assert!(uniformity_chi_square(&p, 16).is_err());
        assert!(uniformity_chi_square(&p, 1).is_err());
        assert!(uniformity_chi_square(&p, 8).is_ok());
    }
}
