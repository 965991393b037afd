//! Shared test support: a dense-matrix circuit oracle and random circuits.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::Rng;
use vqr_core::sim::{Gate, GateKind};

pub type Matrix = Vec<Vec<C>>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect())
        .collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

/// Textbook 2×2 matrices, written out independently of the simulator.
pub fn one_qubit(kind: GateKind, theta: f64) -> Matrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    match kind {
        GateKind::H => vec![vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]],
        GateKind::X => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        GateKind::RX => vec![vec![c(co, 0.0), c(0.0, -si)], vec![c(0.0, -si), c(co, 0.0)]],
        GateKind::RY => vec![vec![c(co, 0.0), c(-si, 0.0)], vec![c(si, 0.0), c(co, 0.0)]],
        GateKind::RZ => vec![
            vec![c(co, -si), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(co, si)],
        ],
        GateKind::P => vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(theta.cos(), theta.sin())],
        ],
        GateKind::CX | GateKind::CZ => unreachable!("two-qubit kind"),
    }
}

/// Tensor product over qubits `n−1 … 0` (qubit 0 is the least significant bit).
fn embed(n: usize, factor: impl Fn(usize) -> Matrix) -> Matrix {
    (0..n).rev().fold(vec![vec![c(1.0, 0.0)]], |acc, q| kron(&acc, &factor(q)))
}

fn projector(bit: usize) -> Matrix {
    let mut m = vec![vec![c(0.0, 0.0); 2]; 2];
    m[bit][bit] = c(1.0, 0.0);
    m
}

/// Full `2ⁿ × 2ⁿ` unitary of a gate with a literal angle.
pub fn gate_matrix(n: usize, kind: GateKind, targets: &[usize], theta: f64) -> Matrix {
    match kind {
        GateKind::CX | GateKind::CZ => {
            let (ctrl, tgt) = (targets[0], targets[1]);
            let u = if kind == GateKind::CX {
                one_qubit(GateKind::X, 0.0)
            } else {
                vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]
            };
            // |0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ U_t
            let off = embed(n, |q| if q == ctrl { projector(0) } else { identity(2) });
            let on = embed(n, |q| {
                if q == ctrl {
                    projector(1)
                } else if q == tgt {
                    u.clone()
                } else {
                    identity(2)
                }
            });
            add(&off, &on)
        }
        _ => embed(n, |q| if q == targets[0] { one_qubit(kind, theta) } else { identity(2) }),
    }
}

pub fn apply(m: &Matrix, psi: &[C]) -> Vec<C> {
    m.iter()
        .map(|row| row.iter().zip(psi).map(|(a, b)| a * b).sum())
        .collect()
}

/// `|0…0⟩` evolved through `gates` by dense matrix products.
pub fn oracle_state(n: usize, gates: &[(GateKind, Vec<usize>, f64)]) -> Vec<C> {
    let dim = 1 << n;
    let mut psi = vec![c(0.0, 0.0); dim];
    psi[0] = c(1.0, 0.0);
    for (kind, targets, theta) in gates {
        psi = apply(&gate_matrix(n, *kind, targets, *theta), &psi);
    }
    psi
}

/// Dense diagonal of `Z^{⊗n}` expectation: Σ |ψ_i|² · (−1)^{popcount(i)}.
pub fn oracle_parity(psi: &[C]) -> f64 {
    psi.iter()
        .enumerate()
        .map(|(i, a)| if i.count_ones() % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

/// A random gate list over every kind.
pub fn random_circuit<R: Rng>(rng: &mut R, n: usize, depth: usize) -> Vec<(GateKind, Vec<usize>, f64)> {
    (0..depth)
        .map(|_| {
            let kind = if n < 2 {
                GateKind::ALL[rng.gen_range(0..6)]
            } else {
                GateKind::ALL[rng.gen_range(0..GateKind::ALL.len())]
            };
            let a = rng.gen_range(0..n);
            let targets = if kind.arity() == 2 {
                let mut b = rng.gen_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                vec![a, b]
            } else {
                vec![a]
            };
            let theta = if kind.is_parametric() { rng.gen_range(-7.0..7.0) } else { 0.0 };
            (kind, targets, theta)
        })
        .collect()
}

pub fn to_gates(spec: &[(GateKind, Vec<usize>, f64)]) -> Vec<Gate> {
    spec.iter()
        .map(|(kind, targets, theta)| {
            if kind.is_parametric() {
                Gate::rotation(*kind, targets[0], *theta)
            } else {
                Gate::new(*kind, targets.clone(), None)
            }
        })
        .collect()
}

pub fn max_abs_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Eigenvalues of a symmetric 3×3 matrix via the trigonometric cubic solution, descending.
pub fn eigenvalues_3x3(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| y.total_cmp(x));
        return d;
    }
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}
