//! Regression model: feature map, then ansatz, then an all-Z parity readout.
//!
//! The prediction is `(⟨Z…Z⟩ + 1) / 2`, so it always lies in `[0, 1]`. The
//! training cost is the plain mean squared error over the training set.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::{AnsatzSpec, CircuitError, FeatureMapSpec};
use crate::data::Dataset;
use crate::optim::{minimize, OptimError, OptimizationTrace, OptimizerSpec};
use crate::sim::{Circuit, Observable, SimError, Statevector};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error("feature vector has {got} entries, the feature map encodes {expected}")]
    FeatureDimension { expected: usize, got: usize },
    #[error("expected {expected} trained parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("feature map has {feature_map} qubits but the ansatz has {ansatz}")]
    QubitMismatch { feature_map: usize, ansatz: usize },
    #[error("observable acts on {observable} qubits, circuit has {circuit}")]
    ObservableSize { observable: usize, circuit: usize },
    #[error("dataset is empty")]
    EmptySet,
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad model record: {0}")]
    Json(#[from] serde_json::Error),
}

/// One point in the hyperparameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub feature_map: FeatureMapSpec,
    pub ansatz: AnsatzSpec,
    pub optimizer: OptimizerSpec,
    pub seed: u64,
}

impl TrialConfig {
    pub fn qubits(&self) -> usize {
        self.feature_map.num_qubits
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.feature_map.validate()?;
        self.ansatz.validate()?;
        self.optimizer.validate()?;
        if self.feature_map.num_qubits != self.ansatz.num_qubits {
            return Err(EngineError::QubitMismatch {
                feature_map: self.feature_map.num_qubits,
                ansatz: self.ansatz.num_qubits,
            });
        }
        Ok(())
    }
}

/// Affine readout `offset + scale · ⟨O⟩`, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputMap {
    pub scale: f64,
    pub offset: f64,
}

impl Default for OutputMap {
    fn default() -> Self {
        Self {
            scale: 0.5,
            offset: 0.5,
        }
    }
}

impl OutputMap {
    pub fn apply(&self, expectation: f64) -> f64 {
        (self.offset + self.scale * expectation).clamp(0.0, 1.0)
    }
}

/// Serialized form of [`VqrModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelRecord {
    feature_map: FeatureMapSpec,
    ansatz: AnsatzSpec,
    observable: Observable,
    output_map: OutputMap,
    trained_parameters: Vec<f64>,
    seed: u64,
}

#[derive(Debug, Clone)]
pub struct VqrModel {
    feature_map: FeatureMapSpec,
    ansatz: AnsatzSpec,
    observable: Observable,
    output_map: OutputMap,
    parameters: Vec<f64>,
    seed: u64,
    encoder: Circuit,
    variational: Circuit,
}

impl PartialEq for VqrModel {
    fn eq(&self, other: &Self) -> bool {
        self.record() == other.record()
    }
}

impl VqrModel {
    /// Builds both circuits; `parameters` must match the ansatz parameter count.
    pub fn new(
        feature_map: FeatureMapSpec,
        ansatz: AnsatzSpec,
        parameters: Vec<f64>,
        seed: u64,
    ) -> Result<Self, EngineError> {
        let observable = Observable::all_z(feature_map.num_qubits);
        Self::from_record(ModelRecord {
            feature_map,
            ansatz,
            observable,
            output_map: OutputMap::default(),
            trained_parameters: parameters,
            seed,
        })
    }

    fn from_record(r: ModelRecord) -> Result<Self, EngineError> {
        if r.feature_map.num_qubits != r.ansatz.num_qubits {
            return Err(EngineError::QubitMismatch {
                feature_map: r.feature_map.num_qubits,
                ansatz: r.ansatz.num_qubits,
            });
        }
        let encoder = r.feature_map.build()?;
        let variational = r.ansatz.build()?;
        if r.trained_parameters.len() != variational.num_parameters() {
            return Err(EngineError::ParameterCount {
                expected: variational.num_parameters(),
                got: r.trained_parameters.len(),
            });
        }
        let observable = Observable::new(r.observable.factors().to_vec())?;
        if observable.num_qubits() != encoder.num_qubits() {
            return Err(EngineError::ObservableSize {
                observable: observable.num_qubits(),
                circuit: encoder.num_qubits(),
            });
        }
        if let Some(i) = r.trained_parameters.iter().position(|v| !v.is_finite()) {
            return Err(SimError::NonFiniteBinding(format!("theta[{i}]")).into());
        }
        Ok(Self {
            feature_map: r.feature_map,
            ansatz: r.ansatz,
            observable,
            output_map: r.output_map,
            parameters: r.trained_parameters,
            seed: r.seed,
            encoder,
            variational,
        })
    }

    fn record(&self) -> ModelRecord {
        ModelRecord {
            feature_map: self.feature_map.clone(),
            ansatz: self.ansatz.clone(),
            observable: self.observable.clone(),
            output_map: self.output_map,
            trained_parameters: self.parameters.clone(),
            seed: self.seed,
        }
    }

    pub fn feature_map(&self) -> &FeatureMapSpec {
        &self.feature_map
    }

    pub fn ansatz(&self) -> &AnsatzSpec {
        &self.ansatz
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn parameters(&self) -> &[f64] {
        &self.parameters
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_qubits(&self) -> usize {
        self.encoder.num_qubits()
    }

    pub fn num_features(&self) -> usize {
        self.encoder.num_parameters()
    }

    pub fn num_parameters(&self) -> usize {
        self.variational.num_parameters()
    }

    pub fn set_parameters(&mut self, parameters: Vec<f64>) -> Result<(), EngineError> {
        if parameters.len() != self.num_parameters() {
            return Err(EngineError::ParameterCount {
                expected: self.num_parameters(),
                got: parameters.len(),
            });
        }
        self.parameters = parameters;
        Ok(())
    }

    /// Feature-map state for `x`; independent of the trainable parameters.
    pub fn encode(&self, x: &[f64]) -> Result<Statevector, EngineError> {
        if x.len() != self.num_features() {
            return Err(EngineError::FeatureDimension {
                expected: self.num_features(),
                got: x.len(),
            });
        }
        Ok(self.encoder.run_values(x)?)
    }

    fn readout(&self, encoded: &Statevector, theta: &[f64]) -> Result<f64, EngineError> {
        let mut state = encoded.clone();
        self.variational.apply_to(&mut state, theta)?;
        Ok(self.output_map.apply(state.expectation(&self.observable)?))
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64, EngineError> {
        self.readout(&self.encode(x)?, &self.parameters)
    }

    pub fn predict_batch(&self, features: &[Vec<f64>]) -> Result<Vec<f64>, EngineError> {
        features.iter().map(|x| self.predict(x)).collect()
    }

    /// Training MSE at `theta`, leaving the stored parameters untouched.
    pub fn cost(&self, theta: &[f64], data: &Dataset) -> Result<f64, EngineError> {
        EncodedSet::new(self, data)?.cost(self, theta)
    }

    pub fn evaluate(&self, data: &Dataset) -> Result<Metrics, EngineError> {
        Metrics::from_predictions(&self.predict_batch(&data.features)?, &data.targets)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.record()).expect("model record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        Self::from_record(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), EngineError> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|source| EngineError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EngineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| EngineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Training samples with their feature-map states precomputed.
struct EncodedSet<'a> {
    states: Vec<Statevector>,
    targets: &'a [f64],
}

impl<'a> EncodedSet<'a> {
    fn new(model: &VqrModel, data: &'a Dataset) -> Result<Self, EngineError> {
        if data.is_empty() {
            return Err(EngineError::EmptySet);
        }
        let states = data
            .features
            .iter()
            .map(|x| model.encode(x))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            states,
            targets: &data.targets,
        })
    }

    fn cost(&self, model: &VqrModel, theta: &[f64]) -> Result<f64, EngineError> {
        let mut sum = 0.0;
        for (state, y) in self.states.iter().zip(self.targets) {
            let e = model.readout(state, theta)? - y;
            sum += e * e;
        }
        Ok(sum / self.states.len() as f64)
    }
}

/// `cost` as a free function: MSE of `predictions` against `targets`.
pub fn mean_squared_error(predictions: &[f64], targets: &[f64]) -> Result<f64, EngineError> {
    Ok(Metrics::from_predictions(predictions, targets)?.mse)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub mae: f64,
}

impl Metrics {
    pub fn from_predictions(predictions: &[f64], targets: &[f64]) -> Result<Self, EngineError> {
        if predictions.is_empty() {
            return Err(EngineError::EmptySet);
        }
        if predictions.len() != targets.len() {
            return Err(EngineError::FeatureDimension {
                expected: targets.len(),
                got: predictions.len(),
            });
        }
        let m = predictions.len() as f64;
        let (sq, abs) = predictions
            .iter()
            .zip(targets)
            .fold((0.0, 0.0), |(sq, abs), (p, y)| {
                let e = p - y;
                (sq + e * e, abs + e.abs())
            });
        Ok(Self {
            mse: sq / m,
            mae: abs / m,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub initial_cost: f64,
    pub final_cost: f64,
    pub trace: OptimizationTrace,
    pub wall_time: f64,
    pub seed: u64,
}

/// Uniform draws from `[−π, π]`.
pub fn initial_parameters(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI))
        .collect()
}

/// Minimizes training MSE from a seeded random start.
///
/// `seed` draws the initial parameters and also seeds the optimizer, so the
/// optimizer seed stored in `config` is ignored.
pub fn train(config: &TrialConfig, data: &Dataset, seed: u64) -> Result<(VqrModel, TrainReport), EngineError> {
    let started = Instant::now();
    config.validate()?;
    let theta0 = initial_parameters(config.ansatz.num_parameters(), seed);
    let mut model = VqrModel::new(config.feature_map.clone(), config.ansatz.clone(), theta0.clone(), seed)?;
    let encoded = EncodedSet::new(&model, data)?;
    let initial_cost = encoded.cost(&model, &theta0)?;
    let spec = config.optimizer.clone().with_seed(seed);
    let trace = minimize(
        |theta: &[f64]| encoded.cost(&model, theta).unwrap_or(f64::NAN),
        &theta0,
        &spec,
    )?;
    model.set_parameters(trace.best_x.clone())?;
    let report = TrainReport {
        initial_cost,
        final_cost: trace.best_f.min(initial_cost),
        trace,
        wall_time: started.elapsed().as_secs_f64(),
        seed,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{AnsatzKind, EntanglementStrategy};
    use crate::optim::OptimizerKind;
    use std::f64::consts::PI;

    fn ra(n: usize, reps: usize) -> AnsatzSpec {
        AnsatzSpec::new(AnsatzKind::RealAmplitudes, n, Some(EntanglementStrategy::Linear)).with_reps(reps)
    }

    #[test]
    fn zero_parameters_give_uniform_parity() {
        let a = ra(2, 1);
        let model = VqrModel::new(FeatureMapSpec::z(2).with_reps(1), a.clone(), vec![0.0; a.num_parameters()], 0).unwrap();
        assert!((model.predict(&[0.0, 0.0]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_qubit_closed_form() {
        // H then P(2x) then RY(θ): ⟨Z⟩ = −sin θ · cos 2x
        let a = ra(1, 1);
        for &(x, t) in &[(0.0, PI), (0.3, 0.7), (1.2, -2.0)] {
            let model = VqrModel::new(FeatureMapSpec::z(1).with_reps(1), a.clone(), vec![t, 0.0], 0).unwrap();
            let expected = (1.0 - t.sin() * (2.0 * x as f64).cos()) / 2.0;
            assert!((model.predict(&[x]).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_errors() {
        let a = ra(2, 1);
        let model = VqrModel::new(FeatureMapSpec::z(2), a.clone(), vec![0.0; a.num_parameters()], 0).unwrap();
        assert!(matches!(model.predict(&[0.1]), Err(EngineError::FeatureDimension { expected: 2, got: 1 })));
        assert!(matches!(
            VqrModel::new(FeatureMapSpec::z(2), a, vec![0.0], 0),
            Err(EngineError::ParameterCount { .. })
        ));
        assert!(matches!(
            VqrModel::new(FeatureMapSpec::z(3), ra(2, 1), vec![0.0; 4], 0),
            Err(EngineError::QubitMismatch { .. })
        ));
    }

    #[test]
    fn metric_arithmetic() {
        let m = Metrics::from_predictions(&[0.5, 0.5], &[0.0, 1.0]).unwrap();
        assert_eq!((m.mse, m.mae), (0.25, 0.5));
        assert_eq!(Metrics::from_predictions(&[0.3, 0.7], &[0.3, 0.7]).unwrap().mse, 0.0);
        assert!((mean_squared_error(&[0.2], &[0.5]).unwrap() - 0.09).abs() < 1e-15);
        assert!(matches!(Metrics::from_predictions(&[], &[]), Err(EngineError::EmptySet)));
    }

    #[test]
    fn zero_budget_returns_start() {
        let data = Dataset::new(vec![vec![0.1, 0.2], vec![1.0, 2.0]], vec![0.2, 0.7]).unwrap();
        let config = TrialConfig {
            feature_map: FeatureMapSpec::z(2),
            ansatz: ra(2, 1),
            optimizer: OptimizerSpec::new(OptimizerKind::Cobyla).with_max_iterations(0),
            seed: 0,
        };
        let (model, report) = train(&config, &data, 9).unwrap();
        assert_eq!(model.parameters(), initial_parameters(4, 9).as_slice());
        assert_eq!(report.final_cost, report.initial_cost);
    }

    #[test]
    fn training_reduces_cost_and_is_deterministic() {
        let xs: Vec<Vec<f64>> = (0..12).map(|i| vec![PI * i as f64 / 11.0, PI * ((i * 5) % 12) as f64 / 11.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x[0] + x[1]) / (2.0 * PI)).collect();
        let data = Dataset::new(xs, ys).unwrap();
        let config = TrialConfig {
            feature_map: FeatureMapSpec::z(2),
            ansatz: ra(2, 2),
            optimizer: OptimizerSpec::new(OptimizerKind::Spsa).with_max_iterations(60),
            seed: 0,
        };
        let (m1, r1) = train(&config, &data, 4).unwrap();
        let (m2, r2) = train(&config, &data, 4).unwrap();
        assert!(r1.final_cost < r1.initial_cost);
        assert_eq!(m1, m2);
        assert_eq!(r1.trace, r2.trace);
        assert!((m1.cost(m1.parameters(), &data).unwrap() - r1.final_cost).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let a = ra(3, 2);
        let params = initial_parameters(a.num_parameters(), 1);
        let model = VqrModel::new(FeatureMapSpec::z(3), a, params, 1).unwrap();
        let back = VqrModel::from_json(&model.to_json()).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.predict(&[0.1, 0.2, 0.3]).unwrap(), model.predict(&[0.1, 0.2, 0.3]).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        model.save(&path).unwrap();
        assert_eq!(VqrModel::load(&path).unwrap(), model);
    }

    #[test]
    fn invalid_record_rejected() {
        let a = ra(2, 1);
        let model = VqrModel::new(FeatureMapSpec::z(2), a, vec![0.0; 4], 0).unwrap();
        let text = model.to_json().replace("\"Z\"", "\"I\"");
        assert!(matches!(VqrModel::from_json(&text), Err(EngineError::Sim(SimError::TrivialObservable))));
    }
}
