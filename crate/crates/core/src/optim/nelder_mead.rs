//! Nelder-Mead downhill simplex.
//!
//! Coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
//! The initial simplex steps 5% along each coordinate (0.00025 for zero
//! coordinates). A simplex whose edge matrix has zero determinant is rebuilt
//! around its best vertex with step 0.05.
//!
//! Evaluation budget: `d + 1` for the initial simplex, then at most `d + 2`
//! per iteration.

use nalgebra::DMatrix;

use super::{Evaluator, OptimError, OptimizationTrace, OptimizerSpec, Termination};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const RESTART_STEP: f64 = 0.05;

fn initial_step(x: f64) -> f64 {
    if x != 0.0 {
        0.05 * x
    } else {
        0.00025
    }
}

/// `c + t (c − w)`
fn along(centroid: &[f64], worst: &[f64], t: f64) -> Vec<f64> {
    centroid.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect()
}

fn degenerate(points: &[Vec<f64>]) -> bool {
    let d = points.len() - 1;
    let edges = DMatrix::from_fn(d, d, |j, i| points[j + 1][i] - points[0][i]);
    let det = edges.determinant();
    det == 0.0 || !det.is_finite()
}

pub fn nelder_mead_minimize<F>(objective: F, x0: &[f64], spec: &OptimizerSpec) -> Result<OptimizationTrace, OptimError>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut ev = Evaluator::start(objective, x0, spec)?;
    if spec.max_iterations == 0 {
        return Ok(ev.finish(Termination::MaxIterations, Vec::new()));
    }
    let d = x0.len();
    let mut points = vec![x0.to_vec()];
    let mut values = vec![ev.best_f()];
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += initial_step(p[i]);
        values.push(ev.eval(&p)?);
        points.push(p);
    }

    let mut termination = Termination::MaxIterations;
    while ev.iterations() < spec.max_iterations {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        points = order.iter().map(|&i| points[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let x_spread = points[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&points[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let f_spread = values[1..].iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max);
        if x_spread <= spec.x_tolerance && f_spread <= spec.f_tolerance {
            termination = Termination::SimplexConverged;
            break;
        }

        if degenerate(&points) {
            let best = points[0].clone();
            for j in 1..=d {
                let mut p = best.clone();
                p[j - 1] += RESTART_STEP;
                values[j] = ev.eval(&p)?;
                points[j] = p;
            }
            ev.end_iteration();
            continue;
        }

        let worst = points[d].clone();
        let centroid: Vec<f64> = (0..d)
            .map(|i| points[..d].iter().map(|p| p[i]).sum::<f64>() / d as f64)
            .collect();

        let reflected = along(&centroid, &worst, REFLECT);
        let f_reflected = ev.eval(&reflected)?;

        if f_reflected < values[0] {
            let expanded = along(&centroid, &worst, EXPAND);
            let f_expanded = ev.eval(&expanded)?;
            if f_expanded < f_reflected {
                points[d] = expanded;
                values[d] = f_expanded;
            } else {
                points[d] = reflected;
                values[d] = f_reflected;
            }
        } else if f_reflected < values[d - 1] {
            points[d] = reflected;
            values[d] = f_reflected;
        } else {
            let accepted = if f_reflected < values[d] {
                let outside = along(&centroid, &worst, CONTRACT * REFLECT);
                let f_outside = ev.eval(&outside)?;
                (f_outside <= f_reflected).then_some((outside, f_outside))
            } else {
                let inside = along(&centroid, &worst, -CONTRACT);
                let f_inside = ev.eval(&inside)?;
                (f_inside < values[d]).then_some((inside, f_inside))
            };
            match accepted {
                Some((p, f)) => {
                    points[d] = p;
                    values[d] = f;
                }
                None => {
                    let best = points[0].clone();
                    for j in 1..=d {
                        let p: Vec<f64> = best
                            .iter()
                            .zip(&points[j])
                            .map(|(b, x)| b + SHRINK * (x - b))
                            .collect();
                        values[j] = ev.eval(&p)?;
                        points[j] = p;
                    }
                }
            }
        }
        ev.end_iteration();
    }
    Ok(ev.finish(termination, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{minimize, OptimizerKind};

    fn spec(max_iterations: usize) -> OptimizerSpec {
        OptimizerSpec::new(OptimizerKind::NelderMead).with_max_iterations(max_iterations)
    }

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn sphere() {
        let t = minimize(|x: &[f64]| x[0] * x[0] + x[1] * x[1], &[1.0, 1.0], &spec(500)).unwrap();
        assert!(t.best_f < 1e-8, "{}", t.best_f);
        assert!(t.best_x.iter().all(|v| v.abs() < 1e-4));
        assert_eq!(t.termination, Termination::SimplexConverged);
    }

    #[test]
    fn rosenbrock_valley() {
        let t = minimize(rosenbrock, &[-1.2, 1.0], &spec(2000)).unwrap();
        assert!((t.best_x[0] - 1.0).abs() < 1e-3 && (t.best_x[1] - 1.0).abs() < 1e-3, "{:?}", t.best_x);
    }

    #[test]
    fn evaluation_budget() {
        for d in 1..6 {
            let x0 = vec![0.7; d];
            let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * v * v).sum::<f64>();
            let t = minimize(f, &x0, &spec(40)).unwrap();
            assert!(t.evaluations <= d + 1 + t.iterations * (d + 2));
        }
    }

    #[test]
    fn one_dimension_works() {
        let t = minimize(|x: &[f64]| (x[0] - 2.0).powi(2), &[0.0], &spec(500)).unwrap();
        assert!((t.best_x[0] - 2.0).abs() < 1e-4);
    }

    #[test]
    fn detects_degenerate_simplex() {
        assert!(degenerate(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]));
        assert!(!degenerate(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]));
    }

    #[test]
    fn restart_from_collapsed_start() {
        // identical coordinates on a flat direction still leave a valid simplex
        let f = |x: &[f64]| (x[0] - x[1]).powi(2) + 0.01 * (x[0] + x[1] - 1.0).powi(2);
        let t = minimize(f, &[0.0, 0.0], &spec(3000)).unwrap();
        assert!(t.best_f < 1e-6, "{}", t.best_f);
    }
}
