//! Linear-approximation trust-region method on a simplex of `d + 1` points.
//!
//! Unconstrained form of Powell's COBYLA: the interpolation simplex defines a
//! linear model, each trust step moves a distance `rho` down the model
//! gradient, and `rho` is halved whenever a step fails while the simplex
//! geometry is acceptable. Geometry repair moves a badly placed vertex
//! perpendicular to its opposite face.

use nalgebra::{DMatrix, DVector};

use super::{Evaluator, OptimError, OptimizationTrace, OptimizerSpec, Termination};

/// Minimum acceptable vertex distance from its opposite face, as a fraction of `rho`.
const ALPHA: f64 = 0.25;
/// Maximum acceptable vertex distance from the pole, as a multiple of `rho`.
const BETA: f64 = 2.1;
/// Length of a geometry-repair step, as a fraction of `rho`.
const GAMMA: f64 = 0.5;
/// Ratio of actual to predicted reduction below which a step counts as failed.
const ACCEPT_RATIO: f64 = 0.1;

struct Simplex {
    /// `points[0]` is the pole (best vertex).
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

struct Model {
    gradient: DVector<f64>,
    /// Inverse of the edge matrix whose row `j` is `points[j+1] − points[0]`.
    inverse: DMatrix<f64>,
}

impl Simplex {
    fn dim(&self) -> usize {
        self.points.len() - 1
    }

    fn move_best_to_pole(&mut self) {
        let best = (0..self.values.len())
            .min_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
            .unwrap_or(0);
        self.points.swap(0, best);
        self.values.swap(0, best);
    }

    fn edges(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |j, i| self.points[j + 1][i] - self.points[0][i])
    }

    fn model(&self) -> Option<Model> {
        let d = self.dim();
        let inverse = self.edges().try_inverse()?;
        if inverse.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let df = DVector::from_fn(d, |j, _| self.values[j + 1] - self.values[0]);
        Some(Model {
            gradient: &inverse * df,
            inverse,
        })
    }

    fn distance_to_pole(&self, j: usize) -> f64 {
        dist(&self.points[j + 1], &self.points[0])
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Index of a vertex that violates the geometry conditions, if any.
fn worst_vertex(simplex: &Simplex, model: &Model, rho: f64) -> Option<usize> {
    let d = simplex.dim();
    let far = (0..d)
        .map(|j| (j, simplex.distance_to_pole(j)))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    if far.1 > BETA * rho {
        return Some(far.0);
    }
    // distance of vertex j from the face opposite it is 1 / ‖column j of the inverse‖
    let flat = (0..d)
        .map(|j| (j, 1.0 / model.inverse.column(j).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    (flat.1 < ALPHA * rho).then_some(flat.0)
}

pub fn cobyla_minimize<F>(objective: F, x0: &[f64], spec: &OptimizerSpec) -> Result<OptimizationTrace, OptimError>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut ev = Evaluator::start(objective, x0, spec)?;
    let mut radii = Vec::new();
    if spec.max_iterations == 0 {
        return Ok(ev.finish(Termination::MaxIterations, radii));
    }
    let d = x0.len();
    let mut rho = spec.rho_begin;
    let mut simplex = Simplex {
        points: vec![x0.to_vec()],
        values: vec![ev.best_f()],
    };
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += rho;
        simplex.values.push(ev.eval(&p)?);
        simplex.points.push(p);
    }

    let mut termination = Termination::MaxIterations;
    while ev.iterations() < spec.max_iterations {
        simplex.move_best_to_pole();
        let Some(model) = simplex.model() else {
            // collapsed simplex: rebuild it around the pole
            let pole = simplex.points[0].clone();
            for j in 0..d {
                let mut p = pole.clone();
                p[j] += rho;
                simplex.values[j + 1] = ev.eval(&p)?;
                simplex.points[j + 1] = p;
            }
            ev.end_iteration();
            radii.push(rho);
            continue;
        };

        let gnorm = model.gradient.norm();
        let predicted = rho * gnorm;
        if predicted > 0.0 && predicted.is_finite() {
            let pole = simplex.points[0].clone();
            let trial: Vec<f64> = pole
                .iter()
                .zip(model.gradient.iter())
                .map(|(x, g)| x - rho * g / gnorm)
                .collect();
            let f_trial = ev.eval(&trial)?;
            let actual = simplex.values[0] - f_trial;
            let step_failed = actual < ACCEPT_RATIO * predicted;

            // barycentric weights of the step: s = Eᵀ λ
            let s = DVector::from_fn(d, |i, _| trial[i] - pole[i]);
            let lambda = model.inverse.transpose() * s;
            let improved = f_trial < simplex.values[0];
            let (j, weight) = (0..d)
                .map(|j| {
                    let spread = (dist(&simplex.points[j + 1], &trial) / rho).max(1.0);
                    (j, lambda[j].abs() * spread)
                })
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("dimension is at least one");
            if improved || weight > 1.0 {
                simplex.points[j + 1] = trial;
                simplex.values[j + 1] = f_trial;
            }
            ev.end_iteration();
            radii.push(rho);
            if !step_failed {
                continue;
            }
        }

        if let Some(j) = worst_vertex(&simplex, &model, rho) {
            if ev.iterations() >= spec.max_iterations {
                break;
            }
            let column = model.inverse.column(j);
            let scale = GAMMA * rho / column.norm();
            let mut step: Vec<f64> = column.iter().map(|v| v * scale).collect();
            let slope: f64 = step.iter().zip(model.gradient.iter()).map(|(s, g)| s * g).sum();
            if slope > 0.0 {
                step.iter_mut().for_each(|s| *s = -*s);
            }
            let p: Vec<f64> = simplex.points[0].iter().zip(&step).map(|(x, s)| x + s).collect();
            simplex.values[j + 1] = ev.eval(&p)?;
            simplex.points[j + 1] = p;
            ev.end_iteration();
            radii.push(rho);
            continue;
        }

        if rho <= spec.rho_end {
            termination = Termination::RadiusConverged;
            break;
        }
        rho *= 0.5;
        if rho <= 1.5 * spec.rho_end {
            rho = spec.rho_end;
        }
        if let Some(r) = radii.last_mut() {
            *r = rho;
        }
    }
    Ok(ev.finish(termination, radii))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{minimize, OptimizerKind};

    fn spec() -> OptimizerSpec {
        OptimizerSpec::new(OptimizerKind::Cobyla)
    }

    #[test]
    fn sphere_two_d() {
        let t = minimize(|x: &[f64]| x[0] * x[0] + x[1] * x[1], &[3.0, 4.0], &spec().with_max_iterations(500)).unwrap();
        assert!(t.best_f < 1e-6, "{}", t.best_f);
    }

    #[test]
    fn linear_objective_runs_out_of_budget() {
        let t = minimize(|x: &[f64]| x[0], &[0.0], &spec().with_max_iterations(50)).unwrap();
        assert_eq!(t.termination, Termination::MaxIterations);
        assert_eq!(t.iterations, 50);
        assert!(t.radius_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(t.best_f <= -49.0);
    }

    #[test]
    fn ill_conditioned_quadratic() {
        let f = |x: &[f64]| x[0] * x[0] + 100.0 * x[1] * x[1];
        let t = minimize(f, &[1.0, 1.0], &spec().with_max_iterations(500)).unwrap();
        assert!(t.best_f < 1e-4, "{}", t.best_f);
    }

    #[test]
    fn radius_shrinks_to_final_value() {
        let f = |x: &[f64]| (x[0] - 0.5).powi(2) + (x[1] + 0.25).powi(2);
        let t = minimize(f, &[0.0, 0.0], &spec().with_max_iterations(5000)).unwrap();
        assert_eq!(t.termination, Termination::RadiusConverged);
        assert_eq!(*t.radius_history.last().unwrap(), 1e-6);
        assert!(t.radius_history.windows(2).all(|w| w[1] <= w[0]));
        assert!((t.best_x[0] - 0.5).abs() < 1e-5 && (t.best_x[1] + 0.25).abs() < 1e-5);
    }
}
