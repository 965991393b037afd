//! Simultaneous perturbation stochastic approximation.
//!
//! Evaluation budget: one call at `x0`, `2 · calibration_pairs` calls when
//! `a` is calibrated, two per iteration and one at the final iterate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Evaluator, OptimError, OptimizationTrace, OptimizerSpec, SpsaGains, StallMonitor, Termination};

/// Outcome of one two-sided perturbation step.
#[derive(Debug, Clone, PartialEq)]
pub struct SpsaUpdate {
    pub x: Vec<f64>,
    pub gradient: Vec<f64>,
    pub f_plus: f64,
    pub f_minus: f64,
}

/// `x − a_k · g` with `g_i = (f(x + c_kΔ) − f(x − c_kΔ)) / (2 c_k Δ_i)`.
pub fn spsa_update<F>(
    mut objective: F,
    x: &[f64],
    delta: &[f64],
    a_k: f64,
    c_k: f64,
) -> Result<SpsaUpdate, OptimError>
where
    F: FnMut(&[f64]) -> Result<f64, OptimError>,
{
    let plus: Vec<f64> = x.iter().zip(delta).map(|(x, d)| x + c_k * d).collect();
    let minus: Vec<f64> = x.iter().zip(delta).map(|(x, d)| x - c_k * d).collect();
    let f_plus = objective(&plus)?;
    let f_minus = objective(&minus)?;
    let diff = f_plus - f_minus;
    let gradient: Vec<f64> = delta.iter().map(|d| diff / (2.0 * c_k * d)).collect();
    let x = x.iter().zip(&gradient).map(|(x, g)| x - a_k * g).collect();
    Ok(SpsaUpdate {
        x,
        gradient,
        f_plus,
        f_minus,
    })
}

fn rademacher(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// Resolved schedule with a concrete `a` and `A`.
#[derive(Debug, Clone, Copy)]
struct Schedule {
    a: f64,
    stability: f64,
    c: f64,
    alpha: f64,
    gamma: f64,
}

impl Schedule {
    fn a_k(&self, k: usize) -> f64 {
        self.a / (self.stability + k as f64 + 1.0).powf(self.alpha)
    }

    fn c_k(&self, k: usize) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }
}

/// One SPSA iteration with a perturbation drawn from `rng`: exactly two evaluations.
pub fn spsa_step<F>(
    objective: F,
    x: &[f64],
    k: usize,
    gains: &SpsaGains,
    max_iterations: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>, OptimError>
where
    F: FnMut(&[f64]) -> Result<f64, OptimError>,
{
    let a = gains
        .a
        .ok_or_else(|| OptimError::InvalidSpec("spsa_step needs an explicit gain `a`".into()))?;
    let schedule = Schedule {
        a,
        stability: gains.stability.unwrap_or(0.1 * max_iterations as f64),
        c: gains.c,
        alpha: gains.alpha,
        gamma: gains.gamma,
    };
    let delta = rademacher(rng, x.len());
    Ok(spsa_update(objective, x, &delta, schedule.a_k(k), schedule.c_k(k))?.x)
}

pub fn spsa_minimize<F>(objective: F, x0: &[f64], spec: &OptimizerSpec) -> Result<OptimizationTrace, OptimError>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut ev = Evaluator::start(objective, x0, spec)?;
    if spec.max_iterations == 0 {
        return Ok(ev.finish(Termination::MaxIterations, Vec::new()));
    }
    let gains = &spec.spsa;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let stability = gains.stability.unwrap_or(0.1 * spec.max_iterations as f64);

    let a = match gains.a {
        Some(a) => a,
        None => {
            // mean |f(x+cΔ) − f(x−cΔ)| / 2c over the probe pairs
            let mut magnitude = 0.0;
            for _ in 0..gains.calibration_pairs {
                let delta = rademacher(&mut rng, x0.len());
                let plus: Vec<f64> = x0.iter().zip(&delta).map(|(x, d)| x + gains.c * d).collect();
                let minus: Vec<f64> = x0.iter().zip(&delta).map(|(x, d)| x - gains.c * d).collect();
                let diff = ev.eval(&plus)? - ev.eval(&minus)?;
                magnitude += (diff / (2.0 * gains.c)).abs();
            }
            magnitude /= gains.calibration_pairs as f64;
            let scale = (stability + 1.0).powf(gains.alpha);
            if magnitude < 1e-10 {
                gains.target_step * scale
            } else {
                gains.target_step * scale / magnitude
            }
        }
    };
    let schedule = Schedule {
        a,
        stability,
        c: gains.c,
        alpha: gains.alpha,
        gamma: gains.gamma,
    };

    let mut stall = StallMonitor::new(spec.stall_iterations, spec.f_tolerance, ev.best_f());
    let mut x = x0.to_vec();
    let mut termination = Termination::MaxIterations;
    for k in 0..spec.max_iterations {
        let delta = rademacher(&mut rng, x.len());
        x = spsa_update(|p: &[f64]| ev.eval(p), &x, &delta, schedule.a_k(k), schedule.c_k(k))?.x;
        ev.end_iteration();
        if stall.update(ev.best_f()) {
            termination = Termination::Stalled;
            break;
        }
    }
    // the iterate itself is never evaluated inside the loop
    ev.eval(&x)?;
    ev.refresh_last_iteration();
    Ok(ev.finish(termination, Vec::new()))
}
