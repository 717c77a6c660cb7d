//! Derivative-free simplex minimiser.

/// Diagnostics and result of a simplex minimisation.
#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead with the standard coefficients (reflect 1, expand 2,
/// contract 0.5, shrink 0.5).
///
/// The initial simplex perturbs each coordinate of `start` by 5%
/// (absolute 0.05 when the coordinate is 0). Iteration stops when the
/// simplex value spread has fallen below `tolerance` times the initial
/// spread *and* the simplex has geometrically collapsed (coordinate spread
/// below `1e-6 * (1 + |x|)`), or at `max_iter`. Using a spread ratio rather
/// than an absolute threshold makes the trajectory invariant to rescaling
/// the objective.
///
/// The objective may return `+inf` (e.g. a barrier outside a parameter box);
/// such vertices simply rank worst. A non-finite value at the start point is
/// an error. If every initial vertex has the same value the objective gives
/// the simplex no direction: the start point is returned with
/// `converged = false`.
pub fn nelder_mead<F>(
    mut f: F,
    start: &[f64],
    tolerance: f64,
    max_iter: usize,
) -> Result<NmResult, String>
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = start.len();
    if dim == 0 {
        return Err("empty start point".to_string());
    }
    let f0 = f(start);
    if f0.is_nan() || f0 == f64::NEG_INFINITY || f0 == f64::INFINITY {
        return Err(format!("objective is not finite at the start point: {f0}"));
    }
    let mut evaluations = 1usize;
    let eval = |f: &mut F, x: &[f64], count: &mut usize| -> f64 {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    // vertices[k] = (point, value), kept sorted best-first.
    let mut vertices: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    vertices.push((start.to_vec(), f0));
    for j in 0..dim {
        let mut v = start.to_vec();
        v[j] = if v[j] != 0.0 { v[j] * 1.05 } else { 0.05 };
        let fv = eval(&mut f, &v, &mut evaluations);
        vertices.push((v, fv));
    }
    sort_vertices(&mut vertices);

    let initial_spread = spread(&vertices);
    if initial_spread == 0.0 {
        return Ok(NmResult {
            x: start.to_vec(),
            value: f0,
            iterations: 0,
            evaluations,
            converged: false,
        });
    }
    let value_target = tolerance * initial_spread;

    let mut iterations = 0usize;
    let mut converged = false;
    while iterations < max_iter {
        if spread(&vertices) <= value_target && collapsed(&vertices) {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|j| vertices[..dim].iter().map(|(v, _)| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = vertices[dim].clone();
        let combine = |a: f64| -> Vec<f64> {
            (0..dim)
                .map(|j| centroid[j] + a * (centroid[j] - worst.0[j]))
                .collect()
        };

        let xr = combine(1.0);
        let fr = eval(&mut f, &xr, &mut evaluations);
        if fr < vertices[0].1 {
            let xe = combine(2.0);
            let fe = eval(&mut f, &xe, &mut evaluations);
            vertices[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < vertices[dim - 1].1 {
            vertices[dim] = (xr, fr);
        } else {
            // Contract toward the better of the reflection and the worst.
            let (outside, base) = if fr < worst.1 { (true, fr) } else { (false, worst.1) };
            let xc = combine(if outside { 0.5 } else { -0.5 });
            let fc = eval(&mut f, &xc, &mut evaluations);
            if fc < base {
                vertices[dim] = (xc, fc);
            } else {
                // Shrink everything toward the best vertex.
                let best = vertices[0].0.clone();
                for v in vertices.iter_mut().skip(1) {
                    for j in 0..dim {
                        v.0[j] = best[j] + 0.5 * (v.0[j] - best[j]);
                    }
                    v.1 = eval(&mut f, &v.0, &mut evaluations);
                }
            }
        }
        sort_vertices(&mut vertices);
    }
    if !converged {
        converged = spread(&vertices) <= value_target && collapsed(&vertices);
    }

    Ok(NmResult {
        x: vertices[0].0.clone(),
        value: vertices[0].1,
        iterations,
        evaluations,
        converged,
    })
}

fn sort_vertices(vertices: &mut [(Vec<f64>, f64)]) {
    vertices.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
}

fn spread(vertices: &[(Vec<f64>, f64)]) -> f64 {
    let best = vertices[0].1;
    let worst = vertices[vertices.len() - 1].1;
    if !worst.is_finite() {
        f64::INFINITY
    } else {
        worst - best
    }
}

fn collapsed(vertices: &[(Vec<f64>, f64)]) -> bool {
    let best = &vertices[0].0;
    vertices.iter().all(|(v, _)| {
        v.iter()
            .zip(best)
            .all(|(a, b)| (a - b).abs() <= 1e-6 * (1.0 + b.abs()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_in_one_dimension() {
        let r = nelder_mead(|x| (x[0] - 3.0) * (x[0] - 3.0), &[0.0], 1e-8, 2000).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 3.0).abs() < 1e-5, "x = {}", r.x[0]);
    }

    #[test]
    fn nonsmooth_l1_objective() {
        let r = nelder_mead(|x| x[0].abs() + x[1].abs(), &[1.0, 1.0], 1e-8, 2000).unwrap();
        assert!(r.value < 1e-4, "value = {}", r.value);
    }

    #[test]
    fn iteration_cap_flags_nonconvergence() {
        let r = nelder_mead(|x| (x[0] - 3.0) * (x[0] - 3.0), &[0.0], 1e-8, 1).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn flat_objective_returns_the_start_unconverged() {
        let r = nelder_mead(|_| 7.0, &[0.4, -0.2], 1e-8, 2000).unwrap();
        assert!(!r.converged);
        assert_eq!(r.x, vec![0.4, -0.2]);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn non_finite_start_is_an_error() {
        assert!(nelder_mead(|_| f64::NAN, &[0.0], 1e-8, 10).is_err());
        assert!(nelder_mead(|_| f64::INFINITY, &[0.0], 1e-8, 10).is_err());
    }

    #[test]
    fn trajectory_is_invariant_to_objective_scale() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2);
        let a = nelder_mead(|x| f(x), &[0.0, 0.0], 1e-8, 2000).unwrap();
        let b = nelder_mead(|x| 1e6 * f(x), &[0.0, 0.0], 1e-8, 2000).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn rosenbrock_two_dimensional() {
        let f = |x: &[f64]| {
            100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
        };
        let r = nelder_mead(f, &[-1.2, 1.0], 1e-10, 5000).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn infinite_barrier_keeps_the_simplex_inside() {
        // Minimum of (x-2)^2 restricted to x <= 0.5 is at the boundary.
        let f = |x: &[f64]| {
            if x[0] > 0.5 {
                f64::INFINITY
            } else {
                (x[0] - 2.0) * (x[0] - 2.0)
            }
        };
        let r = nelder_mead(f, &[0.0], 1e-8, 2000).unwrap();
        assert!(r.x[0] <= 0.5);
        assert!((r.x[0] - 0.5).abs() < 1e-3, "x = {}", r.x[0]);
    }
}
