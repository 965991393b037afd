//! Feature maps, ansatzes and entanglement layouts.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{Angle, Circuit, Gate, GateKind, ParamRole, SimError, Statevector};

pub const DEFAULT_FEATURE_MAP_REPS: usize = 2;
pub const DEFAULT_ANSATZ_REPS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("entanglement needs at least 2 qubits, got {0}")]
    TooFewQubits(usize),
    #[error("repetitions must be at least 1")]
    ZeroReps,
    #[error("{0} does not take an entanglement strategy")]
    UnexpectedEntanglement(&'static str),
    #[error("spec is not a {0}")]
    WrongKind(&'static str),
    #[error("TwoLocal needs at least one rotation block")]
    NoRotationBlocks,
    #[error("value {value} does not fit in {num_qubits} qubits")]
    ValueTooLarge { value: u64, num_qubits: usize },
    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Which qubit pairs receive two-qubit gates in a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntanglementStrategy {
    Full,
    Linear,
    Circular,
    Pairwise,
    Sca,
}

impl EntanglementStrategy {
    pub const ALL: [EntanglementStrategy; 5] = [
        EntanglementStrategy::Full,
        EntanglementStrategy::Linear,
        EntanglementStrategy::Circular,
        EntanglementStrategy::Pairwise,
        EntanglementStrategy::Sca,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntanglementStrategy::Full => "full",
            EntanglementStrategy::Linear => "linear",
            EntanglementStrategy::Circular => "circular",
            EntanglementStrategy::Pairwise => "pairwise",
            EntanglementStrategy::Sca => "sca",
        }
    }
}

impl fmt::Display for EntanglementStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntanglementStrategy {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| CircuitError::Unknown {
                what: "entanglement strategy",
                name: s.to_string(),
            })
    }
}

/// Ordered `(control, target)` pairs for repetition `rep` of an `n`-qubit layer.
///
/// `Circular` puts the wrap pair `(n-1, 0)` ahead of the linear chain. `Sca`
/// starts from the same list, moves the wrap pair forward by `rep` positions
/// (mod `n`) and swaps control and target on odd repetitions.
pub fn entanglement_pairs(
    n: usize,
    strategy: EntanglementStrategy,
    rep: usize,
) -> Result<Vec<(usize, usize)>, CircuitError> {
    if n < 2 {
        return Err(CircuitError::TooFewQubits(n));
    }
    let linear = || (0..n - 1).map(|i| (i, i + 1));
    let pairs = match strategy {
        EntanglementStrategy::Full => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect(),
        EntanglementStrategy::Linear => linear().collect(),
        EntanglementStrategy::Circular => std::iter::once((n - 1, 0)).chain(linear()).collect(),
        EntanglementStrategy::Pairwise => {
            let start = rep % 2;
            (start..n - 1).step_by(2).map(|i| (i, i + 1)).collect()
        }
        EntanglementStrategy::Sca => {
            let mut pairs: Vec<_> = linear().collect();
            pairs.insert(rep % n, (n - 1, 0));
            if rep % 2 == 1 {
                pairs.iter_mut().for_each(|p| *p = (p.1, p.0));
            }
            pairs
        }
    };
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureMapKind {
    ZFeatureMap,
    ZZFeatureMap,
}

impl FeatureMapKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureMapKind::ZFeatureMap => "ZFeatureMap",
            FeatureMapKind::ZZFeatureMap => "ZZFeatureMap",
        }
    }

    pub fn takes_entanglement(self) -> bool {
        self == FeatureMapKind::ZZFeatureMap
    }
}

impl fmt::Display for FeatureMapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureMapKind {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "zfeaturemap" | "z" => Ok(FeatureMapKind::ZFeatureMap),
            "zzfeaturemap" | "zz" => Ok(FeatureMapKind::ZZFeatureMap),
            _ => Err(CircuitError::Unknown {
                what: "feature map",
                name: s.to_string(),
            }),
        }
    }
}

/// Encoding circuit description.
///
/// A ZZ map without an explicit strategy uses full entanglement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub kind: FeatureMapKind,
    pub num_qubits: usize,
    pub reps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entanglement: Option<EntanglementStrategy>,
}

impl FeatureMapSpec {
    pub fn z(num_qubits: usize) -> Self {
        Self {
            kind: FeatureMapKind::ZFeatureMap,
            num_qubits,
            reps: DEFAULT_FEATURE_MAP_REPS,
            entanglement: None,
        }
    }

    pub fn zz(num_qubits: usize, entanglement: EntanglementStrategy) -> Self {
        Self {
            kind: FeatureMapKind::ZZFeatureMap,
            num_qubits,
            reps: DEFAULT_FEATURE_MAP_REPS,
            entanglement: Some(entanglement),
        }
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        if self.reps == 0 {
            return Err(CircuitError::ZeroReps);
        }
        match self.kind {
            FeatureMapKind::ZFeatureMap => {
                if self.entanglement.is_some() {
                    return Err(CircuitError::UnexpectedEntanglement("ZFeatureMap"));
                }
                if self.num_qubits == 0 {
                    return Err(SimError::RegisterSize(0).into());
                }
            }
            FeatureMapKind::ZZFeatureMap => {
                if self.num_qubits < 2 {
                    return Err(CircuitError::TooFewQubits(self.num_qubits));
                }
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Circuit, CircuitError> {
        match self.kind {
            FeatureMapKind::ZFeatureMap => build_z_feature_map(self),
            FeatureMapKind::ZZFeatureMap => build_zz_feature_map(self),
        }
    }
}

fn encoding_layer(circuit: &mut Circuit, n: usize) -> Result<(), CircuitError> {
    for q in 0..n {
        circuit.push(Gate::h(q))?;
    }
    for q in 0..n {
        let angle = Angle::Param {
            param: q,
            scale: 2.0,
        };
        circuit.push(Gate::new(GateKind::P, vec![q], Some(angle)))?;
    }
    Ok(())
}

fn declare_features(circuit: &mut Circuit, n: usize) {
    for q in 0..n {
        circuit.add_parameter(format!("x[{q}]"), ParamRole::Encoding);
    }
}

/// Per repetition: H on every qubit, then `P(2·x_i)` on qubit `i`.
pub fn build_z_feature_map(spec: &FeatureMapSpec) -> Result<Circuit, CircuitError> {
    spec.validate()?;
    if spec.kind != FeatureMapKind::ZFeatureMap {
        return Err(CircuitError::WrongKind("ZFeatureMap"));
    }
    let n = spec.num_qubits;
    let mut circuit = Circuit::new(n)?;
    declare_features(&mut circuit, n);
    for _ in 0..spec.reps {
        encoding_layer(&mut circuit, n)?;
    }
    Ok(circuit)
}

/// Z layer followed by `CX · P(2(π−x_i)(π−x_j)) · CX` for every entangled pair.
pub fn build_zz_feature_map(spec: &FeatureMapSpec) -> Result<Circuit, CircuitError> {
    spec.validate()?;
    if spec.kind != FeatureMapKind::ZZFeatureMap {
        return Err(CircuitError::WrongKind("ZZFeatureMap"));
    }
    let n = spec.num_qubits;
    let strategy = spec.entanglement.unwrap_or(EntanglementStrategy::Full);
    let mut circuit = Circuit::new(n)?;
    declare_features(&mut circuit, n);
    for rep in 0..spec.reps {
        encoding_layer(&mut circuit, n)?;
        for (i, j) in entanglement_pairs(n, strategy, rep)? {
            let phase = Angle::PairPhase {
                first: i,
                second: j,
                scale: 2.0,
            };
            circuit.push(Gate::cx(i, j))?;
            circuit.push(Gate::new(GateKind::P, vec![j], Some(phase)))?;
            circuit.push(Gate::cx(i, j))?;
        }
    }
    Ok(circuit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnsatzKind {
    EfficientSU2,
    TwoLocal,
    RealAmplitudes,
    PauliTwoDesign,
}

impl AnsatzKind {
    pub const ALL: [AnsatzKind; 4] = [
        AnsatzKind::EfficientSU2,
        AnsatzKind::TwoLocal,
        AnsatzKind::RealAmplitudes,
        AnsatzKind::PauliTwoDesign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AnsatzKind::EfficientSU2 => "EfficientSU2",
            AnsatzKind::TwoLocal => "TwoLocal",
            AnsatzKind::RealAmplitudes => "RealAmplitudes",
            AnsatzKind::PauliTwoDesign => "PauliTwoDesign",
        }
    }

    pub fn takes_entanglement(self) -> bool {
        self != AnsatzKind::PauliTwoDesign
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnsatzKind {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| CircuitError::Unknown {
                what: "ansatz",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RotationAxis {
    X,
    Y,
    Z,
}

impl RotationAxis {
    fn gate(self) -> GateKind {
        match self {
            RotationAxis::X => GateKind::RX,
            RotationAxis::Y => GateKind::RY,
            RotationAxis::Z => GateKind::RZ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Entangler {
    CX,
    CZ,
}

fn default_rotations() -> Vec<RotationAxis> {
    vec![RotationAxis::Y]
}

fn default_entangler() -> Entangler {
    Entangler::CX
}

fn is_default_rotations(r: &[RotationAxis]) -> bool {
    r == [RotationAxis::Y]
}

fn is_default_entangler(e: &Entangler) -> bool {
    *e == Entangler::CX
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

/// Trainable circuit description.
///
/// `rotations` and `entangler` only shape `TwoLocal`; `seed` only shapes
/// `PauliTwoDesign`. Non-PauliTwoDesign kinds without an explicit strategy
/// use full entanglement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub num_qubits: usize,
    pub reps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entanglement: Option<EntanglementStrategy>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub seed: u64,
    #[serde(default = "default_rotations", skip_serializing_if = "is_default_rotations")]
    pub rotations: Vec<RotationAxis>,
    #[serde(default = "default_entangler", skip_serializing_if = "is_default_entangler")]
    pub entangler: Entangler,
}

impl AnsatzSpec {
    pub fn new(kind: AnsatzKind, num_qubits: usize, entanglement: Option<EntanglementStrategy>) -> Self {
        Self {
            kind,
            num_qubits,
            reps: DEFAULT_ANSATZ_REPS,
            entanglement,
            seed: 0,
            rotations: default_rotations(),
            entangler: default_entangler(),
        }
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        if self.reps == 0 {
            return Err(CircuitError::ZeroReps);
        }
        if self.num_qubits == 0 {
            return Err(SimError::RegisterSize(0).into());
        }
        if self.kind == AnsatzKind::PauliTwoDesign && self.entanglement.is_some() {
            return Err(CircuitError::UnexpectedEntanglement("PauliTwoDesign"));
        }
        if self.kind == AnsatzKind::TwoLocal && self.rotations.is_empty() {
            return Err(CircuitError::NoRotationBlocks);
        }
        Ok(())
    }

    /// Closed-form trainable parameter count.
    pub fn num_parameters(&self) -> usize {
        let n = self.num_qubits;
        let layers = self.reps + 1;
        match self.kind {
            AnsatzKind::RealAmplitudes | AnsatzKind::PauliTwoDesign => n * layers,
            AnsatzKind::EfficientSU2 => 2 * n * layers,
            AnsatzKind::TwoLocal => self.rotations.len() * n * layers,
        }
    }

    pub fn build(&self) -> Result<Circuit, CircuitError> {
        build_ansatz(self)
    }
}

struct Builder {
    circuit: Circuit,
}

impl Builder {
    fn rotation_layer(&mut self, axis: RotationAxis) -> Result<(), CircuitError> {
        for q in 0..self.circuit.num_qubits() {
            self.rotation(axis, q)?;
        }
        Ok(())
    }

    fn rotation(&mut self, axis: RotationAxis, q: usize) -> Result<(), CircuitError> {
        let k = self.circuit.num_parameters();
        let p = self.circuit.add_parameter(format!("theta[{k}]"), ParamRole::Trainable);
        self.circuit
            .push(Gate::new(axis.gate(), vec![q], Some(Angle::param(p))))?;
        Ok(())
    }

    fn entangle(&mut self, pairs: &[(usize, usize)], entangler: Entangler) -> Result<(), CircuitError> {
        for &(c, t) in pairs {
            self.circuit.push(match entangler {
                Entangler::CX => Gate::cx(c, t),
                Entangler::CZ => Gate::cz(c, t),
            })?;
        }
        Ok(())
    }
}

/// Builds the trainable circuit for `spec`; it declares no encoding parameters.
pub fn build_ansatz(spec: &AnsatzSpec) -> Result<Circuit, CircuitError> {
    spec.validate()?;
    let n = spec.num_qubits;
    let mut b = Builder {
        circuit: Circuit::new(n)?,
    };
    let strategy = spec.entanglement.unwrap_or(EntanglementStrategy::Full);
    let pairs = |rep: usize, strategy: EntanglementStrategy| -> Result<Vec<(usize, usize)>, CircuitError> {
        if n < 2 {
            Ok(Vec::new())
        } else {
            entanglement_pairs(n, strategy, rep)
        }
    };

    let (rotations, entangler) = match spec.kind {
        AnsatzKind::RealAmplitudes => (vec![RotationAxis::Y], Entangler::CX),
        AnsatzKind::EfficientSU2 => (vec![RotationAxis::Y, RotationAxis::Z], Entangler::CX),
        AnsatzKind::TwoLocal => (spec.rotations.clone(), spec.entangler),
        AnsatzKind::PauliTwoDesign => {
            for q in 0..n {
                b.circuit
                    .push(Gate::rotation(GateKind::RY, q, FRAC_PI_4))?;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let axes = [RotationAxis::X, RotationAxis::Y, RotationAxis::Z];
            for rep in 0..=spec.reps {
                for q in 0..n {
                    b.rotation(axes[rng.gen_range(0..3)], q)?;
                }
                if rep < spec.reps {
                    b.entangle(&pairs(rep, EntanglementStrategy::Pairwise)?, Entangler::CZ)?;
                }
            }
            return Ok(b.circuit);
        }
    };

    for rep in 0..=spec.reps {
        for &axis in &rotations {
            b.rotation_layer(axis)?;
        }
        if rep < spec.reps {
            b.entangle(&pairs(rep, strategy)?, entangler)?;
        }
    }
    Ok(b.circuit)
}

/// `|binary(value)⟩`, with bit `i` of `value` on qubit `i`.
pub fn basis_encode(value: u64, num_qubits: usize) -> Result<Statevector, CircuitError> {
    if num_qubits < 64 && value >> num_qubits != 0 {
        return Err(CircuitError::ValueTooLarge { value, num_qubits });
    }
    Ok(Statevector::basis(num_qubits, value as usize)?)
}
