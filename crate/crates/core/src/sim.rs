//! Dense statevector simulator.
//!
//! Qubit 0 is the least significant bit of the amplitude index, so the basis
//! state `|q_{n-1} ... q_1 q_0⟩` lives at index `Σ q_i 2^i`. Bitstrings
//! returned by [`Statevector::sample_counts`] are printed most significant
//! qubit first, which makes `|101⟩` the string `"101"` at index 5.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Amplitude type.
pub type Complex = Complex64;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 24;

const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("gate {gate} expects {expected} target(s), got {got}")]
    TargetArity {
        gate: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("gate targets must be distinct, got {0:?}")]
    DuplicateTargets(Vec<usize>),
    #[error("gate angle is symbolic and has not been bound")]
    UnboundAngle,
    #[error("angle reference to undeclared parameter {0}")]
    UnknownParameter(usize),
    #[error("missing binding for parameter `{0}`")]
    MissingBinding(String),
    #[error("binding for parameter `{0}` is not finite")]
    NonFiniteBinding(String),
    #[error("expected {expected} parameter values, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("observable acts on {observable} qubits but the state has {state}")]
    QubitCountMismatch { observable: usize, state: usize },
    #[error("observable must contain at least one Z factor")]
    TrivialObservable,
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("register size {0} is outside 1..={MAX_QUBITS}")]
    RegisterSize(usize),
    #[error("amplitude vector of length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("amplitudes are not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("cannot compose circuits on {left} and {right} qubits")]
    ComposeMismatch { left: usize, right: usize },
}

/// State of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex>,
}

impl Statevector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self, SimError> {
        Self::basis(num_qubits, 0)
    }

    /// Computational basis state at `index`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, SimError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(SimError::RegisterSize(num_qubits));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(SimError::QubitOutOfRange {
                index,
                num_qubits,
            });
        }
        let mut amplitudes = vec![Complex::new(0.0, 0.0); dim];
        amplitudes[index] = Complex::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes, checking the length and the normalization.
    pub fn from_amplitudes(amplitudes: Vec<Complex>) -> Result<Self, SimError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(SimError::NotPowerOfTwo(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(SimError::RegisterSize(num_qubits));
        }
        let state = Self {
            num_qubits,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex> {
        self.amplitudes
    }

    /// Σ |c_i|².
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Applies a gate whose angle (if any) is a literal value.
    pub fn apply(&mut self, gate: &Gate) -> Result<(), SimError> {
        gate.validate(self.num_qubits)?;
        let angle = match gate.angle {
            Some(Angle::Value(v)) => v,
            Some(_) => return Err(SimError::UnboundAngle),
            None => 0.0,
        };
        self.apply_kind(gate.kind, &gate.targets, angle);
        Ok(())
    }

    /// Gate application without validation; callers guarantee valid targets.
    fn apply_kind(&mut self, kind: GateKind, targets: &[usize], angle: f64) {
        match kind {
            GateKind::CX => self.apply_cx(targets[0], targets[1]),
            GateKind::CZ => self.apply_cz(targets[0], targets[1]),
            GateKind::RZ => {
                let half = 0.5 * angle;
                let lo = Complex::from_polar(1.0, -half);
                let hi = Complex::from_polar(1.0, half);
                self.apply_diagonal(targets[0], lo, hi)
            }
            GateKind::P => {
                self.apply_diagonal(targets[0], Complex::new(1.0, 0.0), Complex::from_polar(1.0, angle))
            }
            _ => {
                let m = kind.single_qubit_matrix(angle);
                self.apply_single(targets[0], m)
            }
        }
    }

    fn apply_single(&mut self, qubit: usize, m: [[Complex; 2]; 2]) {
        let stride = 1usize << qubit;
        let dim = self.amplitudes.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + stride {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i + stride];
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i + stride] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += stride << 1;
        }
    }

    fn apply_diagonal(&mut self, qubit: usize, lo: Complex, hi: Complex) {
        let mask = 1usize << qubit;
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            *amp *= if i & mask == 0 { lo } else { hi };
        }
    }

    fn apply_cx(&mut self, control: usize, target: usize) {
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amplitudes.swap(i, i | tmask);
            }
        }
    }

    fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// ⟨ψ|O|ψ⟩ for a diagonal Z-string observable.
    pub fn expectation(&self, obs: &Observable) -> Result<f64, SimError> {
        if obs.num_qubits() != self.num_qubits {
            return Err(SimError::QubitCountMismatch {
                observable: obs.num_qubits(),
                state: self.num_qubits,
            });
        }
        let mask = obs.z_mask();
        let value: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let p = c.norm_sqr();
                if (i & mask).count_ones() % 2 == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum();
        Ok(value.clamp(-1.0, 1.0))
    }

    /// Draws `shots` measurement outcomes in the computational basis.
    pub fn sample_counts(&self, shots: usize, seed: u64) -> Result<BTreeMap<String, usize>, SimError> {
        if shots == 0 {
            return Err(SimError::ZeroShots);
        }
        let mut cumulative = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        for c in &self.amplitudes {
            acc += c.norm_sqr();
            cumulative.push(acc);
        }
        let total = acc;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = self.amplitudes.len() - 1;
        let mut tally = vec![0usize; self.amplitudes.len()];
        for _ in 0..shots {
            let u: f64 = rng.gen::<f64>() * total;
            // first bucket whose cumulative mass exceeds u; it always has p > 0
            let idx = cumulative.partition_point(|&c| c <= u);
            tally[idx.min(last)] += 1;
        }
        Ok(tally
            .into_iter()
            .enumerate()
            .filter(|(_, n)| *n > 0)
            .map(|(i, n)| (bitstring(i, self.num_qubits), n))
            .collect())
    }
}

/// Index rendered as an `n`-character bitstring, qubit `n-1` first.
pub fn bitstring(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    RX,
    RY,
    RZ,
    P,
    CX,
    CZ,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::H,
        GateKind::X,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::P,
        GateKind::CX,
        GateKind::CZ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::RX => "rx",
            GateKind::RY => "ry",
            GateKind::RZ => "rz",
            GateKind::P => "p",
            GateKind::CX => "cx",
            GateKind::CZ => "cz",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ => 2,
            _ => 1,
        }
    }

    pub fn is_parametric(self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::P)
    }

    /// 2×2 unitary of a single-qubit kind, row-major.
    ///
    /// # Panics
    /// On two-qubit kinds.
    pub fn single_qubit_matrix(self, angle: f64) -> [[Complex; 2]; 2] {
        let c = |re: f64, im: f64| Complex::new(re, im);
        let (cos, sin) = ((0.5 * angle).cos(), (0.5 * angle).sin());
        match self {
            GateKind::H => [
                [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
                [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)],
            ],
            GateKind::X => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
            GateKind::RX => [[c(cos, 0.0), c(0.0, -sin)], [c(0.0, -sin), c(cos, 0.0)]],
            GateKind::RY => [[c(cos, 0.0), c(-sin, 0.0)], [c(sin, 0.0), c(cos, 0.0)]],
            GateKind::RZ => [
                [Complex::from_polar(1.0, -0.5 * angle), c(0.0, 0.0)],
                [c(0.0, 0.0), Complex::from_polar(1.0, 0.5 * angle)],
            ],
            GateKind::P => [
                [c(1.0, 0.0), c(0.0, 0.0)],
                [c(0.0, 0.0), Complex::from_polar(1.0, angle)],
            ],
            GateKind::CX | GateKind::CZ => panic!("{} is a two-qubit gate", self.name()),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rotation angle of a gate: a literal, or an expression over circuit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Value(f64),
    /// `scale · θ[param]`
    Param { param: usize, scale: f64 },
    /// `scale · (π − θ[first]) · (π − θ[second])`, the pair phase of the ZZ map.
    PairPhase {
        first: usize,
        second: usize,
        scale: f64,
    },
}

impl Angle {
    pub fn param(param: usize) -> Self {
        Angle::Param { param, scale: 1.0 }
    }

    fn resolve(&self, values: &[f64]) -> f64 {
        match *self {
            Angle::Value(v) => v,
            Angle::Param { param, scale } => scale * values[param],
            Angle::PairPhase {
                first,
                second,
                scale,
            } => scale * (PI - values[first]) * (PI - values[second]),
        }
    }

    fn references(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Angle::Value(_) => (None, None),
            Angle::Param { param, .. } => (Some(param), None),
            Angle::PairPhase { first, second, .. } => (Some(first), Some(second)),
        };
        a.into_iter().chain(b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    /// `[qubit]` for single-qubit kinds, `[control, target]` for CX/CZ.
    pub targets: Vec<usize>,
    pub angle: Option<Angle>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>, angle: Option<Angle>) -> Self {
        Self {
            kind,
            targets,
            angle,
        }
    }

    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, vec![q], None)
    }

    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, vec![q], None)
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self::new(GateKind::CX, vec![control, target], None)
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::CZ, vec![a, b], None)
    }

    /// Parametric single-qubit gate with a literal angle.
    pub fn rotation(kind: GateKind, q: usize, angle: f64) -> Self {
        Self::new(kind, vec![q], Some(Angle::Value(angle)))
    }

    pub fn validate(&self, num_qubits: usize) -> Result<(), SimError> {
        if self.targets.len() != self.kind.arity() {
            return Err(SimError::TargetArity {
                gate: self.kind.name(),
                expected: self.kind.arity(),
                got: self.targets.len(),
            });
        }
        if let Some(&index) = self.targets.iter().find(|&&q| q >= num_qubits) {
            return Err(SimError::QubitOutOfRange { index, num_qubits });
        }
        if self.targets.len() == 2 && self.targets[0] == self.targets[1] {
            return Err(SimError::DuplicateTargets(self.targets.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamRole {
    /// Bound per data sample.
    Encoding,
    /// Bound per optimizer step.
    Trainable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub role: ParamRole,
}

/// Ordered gate list over declared symbolic parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    parameters: Vec<Parameter>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self, SimError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(SimError::RegisterSize(num_qubits));
        }
        Ok(Self {
            num_qubits,
            gates: Vec::new(),
            parameters: Vec::new(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.parameters
    }

    pub fn num_parameters(&self) -> usize {
        self.parameters.len()
    }

    pub fn count_role(&self, role: ParamRole) -> usize {
        self.parameters.iter().filter(|p| p.role == role).count()
    }

    /// Declares a new parameter and returns its index.
    pub fn add_parameter(&mut self, name: impl Into<String>, role: ParamRole) -> usize {
        self.parameters.push(Parameter {
            name: name.into(),
            role,
        });
        self.parameters.len() - 1
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), SimError> {
        gate.validate(self.num_qubits)?;
        if let Some(angle) = &gate.angle {
            if let Some(p) = angle.references().find(|&p| p >= self.parameters.len()) {
                return Err(SimError::UnknownParameter(p));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Appends `other` after `self`; its parameters follow ours in order.
    pub fn compose(&self, other: &Circuit) -> Result<Circuit, SimError> {
        if self.num_qubits != other.num_qubits {
            return Err(SimError::ComposeMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        let offset = self.parameters.len();
        let shift = |angle: Angle| match angle {
            Angle::Value(v) => Angle::Value(v),
            Angle::Param { param, scale } => Angle::Param {
                param: param + offset,
                scale,
            },
            Angle::PairPhase {
                first,
                second,
                scale,
            } => Angle::PairPhase {
                first: first + offset,
                second: second + offset,
                scale,
            },
        };
        let mut out = self.clone();
        out.parameters.extend(other.parameters.iter().cloned());
        out.gates.extend(other.gates.iter().map(|g| Gate {
            kind: g.kind,
            targets: g.targets.clone(),
            angle: g.angle.map(shift),
        }));
        Ok(out)
    }

    /// Runs from `|0…0⟩` with bindings given by parameter name.
    pub fn run(&self, bindings: &BTreeMap<String, f64>) -> Result<Statevector, SimError> {
        let values = self
            .parameters
            .iter()
            .map(|p| match bindings.get(&p.name) {
                Some(v) if v.is_finite() => Ok(*v),
                Some(_) => Err(SimError::NonFiniteBinding(p.name.clone())),
                None => Err(SimError::MissingBinding(p.name.clone())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.run_values(&values)
    }

    /// Runs from `|0…0⟩` with one value per declared parameter, in order.
    pub fn run_values(&self, values: &[f64]) -> Result<Statevector, SimError> {
        let mut state = Statevector::zero(self.num_qubits)?;
        self.apply_to(&mut state, values)?;
        Ok(state)
    }

    /// Applies the circuit to an existing state.
    pub fn apply_to(&self, state: &mut Statevector, values: &[f64]) -> Result<(), SimError> {
        if values.len() != self.parameters.len() {
            return Err(SimError::ParameterCount {
                expected: self.parameters.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SimError::NonFiniteBinding(self.parameters[i].name.clone()));
        }
        if state.num_qubits != self.num_qubits {
            return Err(SimError::QubitCountMismatch {
                observable: self.num_qubits,
                state: state.num_qubits,
            });
        }
        for gate in &self.gates {
            let angle = gate.angle.map_or(0.0, |a| a.resolve(values));
            state.apply_kind(gate.kind, &gate.targets, angle);
        }
        Ok(())
    }

    /// Copy of the gate list with every angle resolved to a literal.
    pub fn bind(&self, values: &[f64]) -> Result<Vec<Gate>, SimError> {
        if values.len() != self.parameters.len() {
            return Err(SimError::ParameterCount {
                expected: self.parameters.len(),
                got: values.len(),
            });
        }
        Ok(self
            .gates
            .iter()
            .map(|g| Gate {
                kind: g.kind,
                targets: g.targets.clone(),
                angle: g.angle.map(|a| Angle::Value(a.resolve(values))),
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    Z,
}

/// Tensor product of per-qubit Z / I factors, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observable {
    factors: Vec<Pauli>,
}

impl Observable {
    pub fn new(factors: Vec<Pauli>) -> Result<Self, SimError> {
        if !factors.contains(&Pauli::Z) {
            return Err(SimError::TrivialObservable);
        }
        Ok(Self { factors })
    }

    /// Z on every qubit.
    pub fn all_z(num_qubits: usize) -> Self {
        Self {
            factors: vec![Pauli::Z; num_qubits.max(1)],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.factors
    }

    fn z_mask(&self) -> usize {
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == Pauli::Z)
            .fold(0, |m, (q, _)| m | 1 << q)
    }
}
