//! Two-qubit gate library. Matrices use the basis order
//! `|00⟩, |01⟩, |10⟩, |11⟩` where the left bit is the first target.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Matrix4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Givens,
    Hop,
    ModHop,
    Onsite,
    Fswap,
    UNp,
}

impl GateKind {
    /// Number of variational angles the gate consumes.
    pub fn n_params(self) -> usize {
        match self {
            GateKind::Fswap => 0,
            GateKind::Givens | GateKind::Hop | GateKind::Onsite => 1,
            GateKind::ModHop | GateKind::UNp => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Givens => "givens",
            GateKind::Hop => "hop",
            GateKind::ModHop => "mod_hop",
            GateKind::Onsite => "onsite",
            GateKind::Fswap => "fswap",
            GateKind::UNp => "u_np",
        }
    }

    /// Builds the matrix from the first `n_params()` entries of `angles`.
    pub fn matrix(self, angles: &[f64]) -> Matrix4 {
        match self {
            GateKind::Givens => givens(angles[0]),
            GateKind::Hop => hop(angles[0]),
            GateKind::ModHop => mod_hop(angles[0], angles[1]),
            GateKind::Onsite => onsite(angles[0]),
            GateKind::Fswap => fswap(),
            GateKind::UNp => u_np(angles[0], angles[1]),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A 4x4 unitary bound to an ordered pair of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitGate {
    pub kind: GateKind,
    pub matrix: Matrix4,
    pub targets: (usize, usize),
}

impl TwoQubitGate {
    pub fn new(kind: GateKind, angles: &[f64]) -> Self {
        Self { kind, matrix: kind.matrix(angles), targets: (0, 1) }
    }

    pub fn on(mut self, a: usize, b: usize) -> Self {
        self.targets = (a, b);
        self
    }
}

pub fn gate_givens(theta: f64) -> TwoQubitGate {
    TwoQubitGate::new(GateKind::Givens, &[theta])
}

pub fn gate_hop(theta: f64) -> TwoQubitGate {
    TwoQubitGate::new(GateKind::Hop, &[theta])
}

pub fn gate_mod_hop(theta: f64, phi: f64) -> TwoQubitGate {
    TwoQubitGate::new(GateKind::ModHop, &[theta, phi])
}

pub fn gate_onsite(theta: f64) -> TwoQubitGate {
    TwoQubitGate::new(GateKind::Onsite, &[theta])
}

pub fn gate_fswap() -> TwoQubitGate {
    TwoQubitGate::new(GateKind::Fswap, &[])
}

pub fn gate_u_np(theta: f64, phi: f64) -> TwoQubitGate {
    TwoQubitGate::new(GateKind::UNp, &[theta, phi])
}

fn excitation_block(a: Complex64, b: Complex64, c: Complex64, d: Complex64, corner: Complex64) -> Matrix4 {
    [
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, a, b, ZERO],
        [ZERO, c, d, ZERO],
        [ZERO, ZERO, ZERO, corner],
    ]
}

/// Real rotation in the single-excitation block, half-angle.
fn givens(theta: f64) -> Matrix4 {
    let (s, c) = (theta / 2.0).sin_cos();
    excitation_block(c.into(), (-s).into(), s.into(), c.into(), ONE)
}

/// `exp(i (θ/2) (XX + YY)/2)`.
fn hop(theta: f64) -> Matrix4 {
    let (s, c) = (theta / 2.0).sin_cos();
    excitation_block(c.into(), I * s, I * s, c.into(), ONE)
}

/// Hopping block with opposite phases `e^{±iφ/2}` on the two rows.
fn mod_hop(theta: f64, phi: f64) -> Matrix4 {
    let (s, c) = (theta / 2.0).sin_cos();
    let plus = Complex64::from_polar(1.0, phi / 2.0);
    let minus = Complex64::from_polar(1.0, -phi / 2.0);
    excitation_block(plus * c, I * plus * s, I * minus * s, minus * c, ONE)
}

/// Phase on double occupancy.
fn onsite(theta: f64) -> Matrix4 {
    let mut m = identity();
    m[3][3] = Complex64::from_polar(1.0, theta);
    m
}

fn fswap() -> Matrix4 {
    excitation_block(ZERO, ONE, ONE, ZERO, -ONE)
}

/// Generalized number-preserving unitary, full angle.
fn u_np(theta: f64, phi: f64) -> Matrix4 {
    let (s, c) = theta.sin_cos();
    excitation_block(c.into(), I * s, I * s, c.into(), Complex64::from_polar(1.0, phi))
}

pub fn identity() -> Matrix4 {
    let mut m = [[ZERO; 4]; 4];
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = ONE;
    }
    m
}

pub fn matmul(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = (0..4).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

pub fn adjoint(a: &Matrix4) -> Matrix4 {
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = a[c][r].conj();
        }
    }
    out
}

/// Largest entrywise deviation `max |a - b|`.
pub fn max_abs_diff(a: &Matrix4, b: &Matrix4) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            worst = worst.max((a[r][c] - b[r][c]).norm());
        }
    }
    worst
}

/// Occupation number of each 4x4 basis state.
pub const OCCUPATION: [u32; 4] = [0, 1, 1, 2];

/// Largest matrix element connecting states of different occupation.
pub fn number_leakage(m: &Matrix4) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            if OCCUPATION[r] != OCCUPATION[c] {
                worst = worst.max(m[r][c].norm());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn col(m: &Matrix4, c: usize) -> [Complex64; 4] {
        [m[0][c], m[1][c], m[2][c], m[3][c]]
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn zero_angle_is_identity() {
        let id = identity();
        for g in [gate_givens(0.0), gate_hop(0.0), gate_mod_hop(0.0, 0.0), gate_onsite(0.0), gate_u_np(0.0, 0.0)] {
            assert!(max_abs_diff(&g.matrix, &id) < 1e-15, "{}", g.kind);
        }
    }

    #[test]
    fn givens_entries() {
        // |01⟩ is column 1, |10⟩ is column 2
        let m = gate_givens(PI).matrix;
        let c1 = col(&m, 1);
        assert!(close(c1[1], ZERO) && close(c1[2], ONE));
        let m = gate_givens(PI / 2.0).matrix;
        let c1 = col(&m, 1);
        assert!(close(c1[1], FRAC_1_SQRT_2.into()) && close(c1[2], FRAC_1_SQRT_2.into()));
        assert!(close(m[0][0], ONE) && close(m[3][3], ONE));
    }

    #[test]
    fn hop_entries() {
        let m = gate_hop(PI).matrix;
        assert!(close(col(&m, 1)[2], I));
        assert!(close(col(&m, 1)[1], ZERO));
        for theta in [0.3, 1.7, -2.2] {
            let m = gate_hop(theta).matrix;
            assert!(close(m[0][0], ONE) && close(m[3][3], ONE));
        }
    }

    #[test]
    fn mod_hop_entries() {
        let m = gate_mod_hop(0.0, 2.0 * PI).matrix;
        assert!(close(m[1][1], -ONE) && close(m[2][2], -ONE));
        assert!(close(m[0][0], ONE) && close(m[3][3], ONE));
        let m = gate_mod_hop(0.0, 4.0 * PI).matrix;
        assert!(max_abs_diff(&m, &identity()) < 1e-12);
        let m = gate_mod_hop(PI, 0.0).matrix;
        assert!(close(m[1][1], ZERO) && close(m[2][2], ZERO));
        assert!((m[2][1].norm() - 1.0).abs() < 1e-12 && (m[1][2].norm() - 1.0).abs() < 1e-12);
        for theta in [0.4, -1.3] {
            assert!(max_abs_diff(&gate_mod_hop(theta, 0.0).matrix, &gate_hop(theta).matrix) < 1e-15);
        }
    }

    #[test]
    fn onsite_entries() {
        let m = gate_onsite(PI).matrix;
        assert!(close(m[3][3], -ONE));
        for theta in [0.0, 0.8, 3.0] {
            let m = gate_onsite(theta).matrix;
            assert!(close(m[1][1], ONE) && close(m[2][1], ZERO));
        }
    }

    #[test]
    fn fswap_entries() {
        let m = gate_fswap().matrix;
        assert!(max_abs_diff(&matmul(&m, &m), &identity()) < 1e-15);
        assert!(close(m[3][3], -ONE));
        assert!(close(col(&m, 1)[2], ONE));
    }

    #[test]
    fn u_np_entries() {
        let m = gate_u_np(PI / 2.0, 0.0).matrix;
        assert!(close(col(&m, 1)[2], I));
        let m = gate_u_np(0.0, PI).matrix;
        assert!(close(m[3][3], -ONE));
    }

    #[test]
    fn matches_exponential_of_hopping_generator() {
        // (XX + YY)/2 acts as σx on the single-excitation block: series-sum the exponential
        fn expm_block(t: f64) -> [[Complex64; 2]; 2] {
            let mut term = [[ONE, ZERO], [ZERO, ONE]];
            let mut acc = term;
            let gen = [[ZERO, I * t], [I * t, ZERO]];
            for k in 1..60 {
                let mut next = [[ZERO; 2]; 2];
                for r in 0..2 {
                    for c in 0..2 {
                        next[r][c] = (term[r][0] * gen[0][c] + term[r][1] * gen[1][c]) / k as f64;
                    }
                }
                term = next;
                for r in 0..2 {
                    for c in 0..2 {
                        acc[r][c] += term[r][c];
                    }
                }
            }
            acc
        }
        for theta in [-2.0, 0.1, 1.0, 2.5, 5.9] {
            let m = gate_hop(theta).matrix;
            let e = expm_block(theta / 2.0);
            for r in 0..2 {
                for c in 0..2 {
                    assert!((m[r + 1][c + 1] - e[r][c]).norm() < 1e-10);
                }
            }
        }
    }
}
