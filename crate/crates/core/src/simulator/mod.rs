//! Ideal statevector simulator over the two-qubit gate library.

mod gates;

pub use gates::*;

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::PauliOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// Computational basis state with ones exactly at `occupied`.
    pub fn from_occupation(n_qubits: usize, occupied: &[usize]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut index = 0usize;
        for &q in occupied {
            if q >= n_qubits {
                return Err(Error::Index(format!("qubit {q} outside {n_qubits} qubits")));
            }
            if !seen.insert(q) {
                return Err(Error::Index(format!("qubit {q} listed twice")));
            }
            index |= 1 << q;
        }
        Ok(Self::basis(n_qubits, index))
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amplitudes }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(Error::DimensionMismatch { expected: len.next_power_of_two(), got: len });
        }
        Ok(Self { n_qubits: len.trailing_zeros() as usize, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies a 4x4 unitary to the gate's target pair (any two distinct qubits).
    pub fn apply(&mut self, gate: &TwoQubitGate) -> Result<()> {
        let (a, b) = gate.targets;
        self.apply_matrix(&gate.matrix, a, b)
    }

    pub fn apply_matrix(&mut self, m: &Matrix4, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::Index(format!("gate targets must differ, got ({a}, {b})")));
        }
        if a >= self.n_qubits || b >= self.n_qubits {
            return Err(Error::Index(format!("targets ({a}, {b}) outside {} qubits", self.n_qubits)));
        }
        let (ma, mb) = (1usize << a, 1usize << b);
        let (lo, hi) = (a.min(b), a.max(b));
        let amps = &mut self.amplitudes;
        for k in 0..(amps.len() >> 2) {
            let base = insert_zero_bit(insert_zero_bit(k, lo), hi);
            let idx = [base, base | mb, base | ma, base | ma | mb];
            let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
            for (r, &i) in idx.iter().enumerate() {
                amps[i] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &Statevector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, got: other.n_qubits });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn expectation(&self, op: &PauliOperator) -> Result<f64> {
        if op.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: op.n_qubits(), got: self.n_qubits });
        }
        Ok(op.expectation(&self.amplitudes).re)
    }

    pub fn expectation_dense(&self, h: &DMatrix<Complex64>) -> Result<f64> {
        let dim = self.amplitudes.len();
        if h.nrows() != dim || h.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: h.nrows() });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..dim {
            let amp = self.amplitudes[c];
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            for r in 0..dim {
                acc += self.amplitudes[r].conj() * h[(r, c)] * amp;
            }
        }
        Ok(acc.re)
    }

    /// Basis indices carrying weight above `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > tol)
            .map(|(i, _)| i)
            .collect()
    }

    /// `index re im` per nonzero amplitude.
    pub fn dump(&self) -> String {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(i, a)| format!("{i} {} {}\n", a.re, a.im))
            .collect()
    }
}

#[inline]
fn insert_zero_bit(k: usize, bit: usize) -> usize {
    let low = k & ((1 << bit) - 1);
    ((k >> bit) << (bit + 1)) | low
}
