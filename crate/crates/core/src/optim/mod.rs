//! Derivative-free minimizers behind one interface.
//!
//! Every optimizer evaluates the objective through [`Evaluator`], which
//! counts calls, rejects non-finite values and keeps the best point seen so
//! far. `best_f` in a trace is therefore the minimum over every evaluated
//! point, and the per-iteration history is non-increasing by construction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod cobyla;
mod nelder_mead;
mod spsa;

pub use cobyla::cobyla_minimize;
pub use nelder_mead::nelder_mead_minimize;
pub use spsa::{spsa_minimize, spsa_step, spsa_update, SpsaUpdate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("initial point is empty")]
    EmptyStart,
    #[error("initial point has a non-finite coordinate")]
    NonFiniteStart,
    #[error("objective is not finite at the initial point ({0})")]
    NonFiniteInitialValue(f64),
    #[error("objective returned {value} at evaluation {evaluation}")]
    NonFiniteValue { value: f64, evaluation: usize },
    #[error("invalid optimizer settings: {0}")]
    InvalidSpec(String),
    #[error("unknown optimizer `{0}`")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OptimizerKind {
    #[serde(rename = "SPSA")]
    Spsa,
    #[serde(rename = "COBYLA")]
    Cobyla,
    NelderMead,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 3] = [
        OptimizerKind::Spsa,
        OptimizerKind::Cobyla,
        OptimizerKind::NelderMead,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Spsa => "SPSA",
            OptimizerKind::Cobyla => "COBYLA",
            OptimizerKind::NelderMead => "NelderMead",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = OptimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "spsa" => Ok(OptimizerKind::Spsa),
            "cobyla" => Ok(OptimizerKind::Cobyla),
            "neldermead" => Ok(OptimizerKind::NelderMead),
            _ => Err(OptimError::UnknownKind(s.to_string())),
        }
    }
}

/// SPSA gain schedule `a_k = a / (A + k + 1)^α`, `c_k = c / (k + 1)^γ`.
///
/// `a = None` calibrates `a` from the objective before the first step;
/// `stability = None` uses `A = 0.1 · max_iterations`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpsaGains {
    pub a: Option<f64>,
    pub c: f64,
    pub stability: Option<f64>,
    pub alpha: f64,
    pub gamma: f64,
    /// Desired magnitude of the first update, in radians.
    pub target_step: f64,
    pub calibration_pairs: usize,
}

impl Default for SpsaGains {
    fn default() -> Self {
        Self {
            a: None,
            c: 0.1,
            stability: None,
            alpha: 0.602,
            gamma: 0.101,
            target_step: 0.1,
            calibration_pairs: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    pub max_iterations: usize,
    pub f_tolerance: f64,
    pub x_tolerance: f64,
    /// Consecutive iterations with best-f improvement below `f_tolerance`
    /// that end an SPSA run. Zero disables the check.
    pub stall_iterations: usize,
    pub seed: u64,
    pub spsa: SpsaGains,
    pub rho_begin: f64,
    pub rho_end: f64,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Spsa,
            max_iterations: 100,
            f_tolerance: 1e-6,
            x_tolerance: 1e-6,
            stall_iterations: 10,
            seed: 0,
            spsa: SpsaGains::default(),
            rho_begin: 1.0,
            rho_end: 1e-6,
        }
    }
}

impl OptimizerSpec {
    pub fn new(kind: OptimizerKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(OptimError::InvalidSpec(format!("{name} must be positive, got {v}")))
            }
        };
        positive("f_tolerance", self.f_tolerance)?;
        positive("x_tolerance", self.x_tolerance)?;
        match self.kind {
            OptimizerKind::Spsa => {
                let g = &self.spsa;
                positive("c", g.c)?;
                positive("alpha", g.alpha)?;
                positive("gamma", g.gamma)?;
                positive("target_step", g.target_step)?;
                if let Some(a) = g.a {
                    positive("a", a)?;
                } else if g.calibration_pairs == 0 {
                    return Err(OptimError::InvalidSpec(
                        "calibration needs at least one probe pair".into(),
                    ));
                }
                if let Some(s) = g.stability {
                    if !(s >= 0.0 && s.is_finite()) {
                        return Err(OptimError::InvalidSpec(format!("stability must be ≥ 0, got {s}")));
                    }
                }
            }
            OptimizerKind::Cobyla => {
                positive("rho_begin", self.rho_begin)?;
                positive("rho_end", self.rho_end)?;
                if self.rho_end > self.rho_begin {
                    return Err(OptimError::InvalidSpec("rho_end exceeds rho_begin".into()));
                }
            }
            OptimizerKind::NelderMead => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIterations,
    /// Best value improved by less than `f_tolerance` for `stall_iterations` iterations.
    Stalled,
    /// Simplex spread fell below both tolerances (Nelder-Mead).
    SimplexConverged,
    /// Trust radius reached `rho_end` without further progress (COBYLA).
    RadiusConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub evaluations: usize,
    pub iterations: usize,
    /// Best-so-far value after each iteration.
    pub history: Vec<f64>,
    /// Trust radius after each iteration; COBYLA only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radius_history: Vec<f64>,
    pub termination: Termination,
}

/// Runs the optimizer selected by `spec.kind`.
///
/// `max_iterations = 0` evaluates `x0` once and returns it.
pub fn minimize<F>(objective: F, x0: &[f64], spec: &OptimizerSpec) -> Result<OptimizationTrace, OptimError>
where
    F: FnMut(&[f64]) -> f64,
{
    match spec.kind {
        OptimizerKind::Spsa => spsa_minimize(objective, x0, spec),
        OptimizerKind::Cobyla => cobyla_minimize(objective, x0, spec),
        OptimizerKind::NelderMead => nelder_mead_minimize(objective, x0, spec),
    }
}

/// Counting, best-tracking wrapper around the objective.
pub(crate) struct Evaluator<F> {
    objective: F,
    evaluations: usize,
    best_x: Vec<f64>,
    best_f: f64,
    history: Vec<f64>,
}

impl<F: FnMut(&[f64]) -> f64> Evaluator<F> {
    /// Validates `x0`, evaluates it and seeds the best point.
    pub(crate) fn start(mut objective: F, x0: &[f64], spec: &OptimizerSpec) -> Result<Self, OptimError> {
        spec.validate()?;
        if x0.is_empty() {
            return Err(OptimError::EmptyStart);
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(OptimError::NonFiniteStart);
        }
        let f0 = objective(x0);
        if !f0.is_finite() {
            return Err(OptimError::NonFiniteInitialValue(f0));
        }
        Ok(Self {
            objective,
            evaluations: 1,
            best_x: x0.to_vec(),
            best_f: f0,
            history: Vec::new(),
        })
    }

    pub(crate) fn best_f(&self) -> f64 {
        self.best_f
    }

    pub(crate) fn eval(&mut self, x: &[f64]) -> Result<f64, OptimError> {
        let f = (self.objective)(x);
        self.evaluations += 1;
        if !f.is_finite() {
            return Err(OptimError::NonFiniteValue {
                value: f,
                evaluation: self.evaluations,
            });
        }
        if f < self.best_f {
            self.best_f = f;
            self.best_x.clear();
            self.best_x.extend_from_slice(x);
        }
        Ok(f)
    }

    /// Closes an iteration, recording the best value.
    pub(crate) fn end_iteration(&mut self) {
        self.history.push(self.best_f);
    }

    /// Folds evaluations made after the last iteration closed into its record.
    pub(crate) fn refresh_last_iteration(&mut self) {
        if let Some(last) = self.history.last_mut() {
            *last = self.best_f;
        }
    }

    pub(crate) fn iterations(&self) -> usize {
        self.history.len()
    }

    pub(crate) fn finish(self, termination: Termination, radius_history: Vec<f64>) -> OptimizationTrace {
        OptimizationTrace {
            iterations: self.history.len(),
            best_x: self.best_x,
            best_f: self.best_f,
            evaluations: self.evaluations,
            history: self.history,
            radius_history,
            termination,
        }
    }
}

/// Tracks consecutive iterations whose best-f improvement is below a tolerance.
pub(crate) struct StallMonitor {
    window: usize,
    tolerance: f64,
    last: f64,
    count: usize,
}

impl StallMonitor {
    pub(crate) fn new(window: usize, tolerance: f64, start: f64) -> Self {
        Self {
            window,
            tolerance,
            last: start,
            count: 0,
        }
    }

    /// Feeds the best value after an iteration; true once the window is exhausted.
    pub(crate) fn update(&mut self, best: f64) -> bool {
        if self.last - best < self.tolerance {
            self.count += 1;
        } else {
            self.count = 0;
        }
        self.last = best;
        self.window > 0 && self.count >= self.window
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn rejects_bad_starts() {
        for kind in OptimizerKind::ALL {
            let spec = OptimizerSpec::new(kind);
            assert_eq!(minimize(sphere, &[], &spec), Err(OptimError::EmptyStart));
            assert_eq!(minimize(sphere, &[f64::NAN], &spec), Err(OptimError::NonFiniteStart));
            assert!(matches!(
                minimize(|_: &[f64]| f64::INFINITY, &[1.0], &spec),
                Err(OptimError::NonFiniteInitialValue(_))
            ));
        }
    }

    #[test]
    fn non_finite_mid_run_is_an_error() {
        for kind in OptimizerKind::ALL {
            let spec = OptimizerSpec::new(kind);
            let mut calls = 0;
            let r = minimize(
                |x: &[f64]| {
                    calls += 1;
                    if calls > 3 {
                        f64::NAN
                    } else {
                        sphere(x)
                    }
                },
                &[1.0, 1.0],
                &spec,
            );
            assert!(matches!(r, Err(OptimError::NonFiniteValue { .. })), "{kind}");
        }
    }

    #[test]
    fn zero_budget_returns_start() {
        for kind in OptimizerKind::ALL {
            let spec = OptimizerSpec::new(kind).with_max_iterations(0);
            let t = minimize(sphere, &[0.5, -0.5], &spec).unwrap();
            assert_eq!(t.best_x, [0.5, -0.5]);
            assert_eq!(t.best_f, 0.5);
            assert_eq!(t.evaluations, 1);
            assert_eq!(t.iterations, 0);
        }
    }

    #[test]
    fn spec_validation() {
        let mut spec = OptimizerSpec::new(OptimizerKind::Cobyla);
        spec.rho_end = 2.0;
        assert!(matches!(spec.validate(), Err(OptimError::InvalidSpec(_))));
        let mut spec = OptimizerSpec::new(OptimizerKind::Spsa);
        spec.f_tolerance = 0.0;
        assert!(spec.validate().is_err());
        let mut spec = OptimizerSpec::new(OptimizerKind::Spsa);
        spec.spsa.calibration_pairs = 0;
        assert!(spec.validate().is_err());
        spec.spsa.a = Some(0.2);
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn kind_names() {
        for kind in OptimizerKind::ALL {
            assert_eq!(kind.name().parse::<OptimizerKind>().unwrap(), kind);
        }
        assert_eq!("nelder-mead".parse::<OptimizerKind>().unwrap(), OptimizerKind::NelderMead);
        assert!("adam".parse::<OptimizerKind>().is_err());
        let json = serde_json::to_string(&OptimizerKind::Spsa).unwrap();
        assert_eq!(json, "\"SPSA\"");
    }

    #[test]
    fn stall_monitor_counts_consecutive() {
        let mut m = StallMonitor::new(3, 0.1, 1.0);
        assert!(!m.update(0.95));
        assert!(!m.update(0.94));
        assert!(!m.update(0.5));
        assert!(!m.update(0.5));
        assert!(!m.update(0.5));
        assert!(m.update(0.5));
        let mut off = StallMonitor::new(0, 0.1, 1.0);
        assert!((0..100).all(|_| !off.update(1.0)));
    }
}
