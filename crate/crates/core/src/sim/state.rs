//! Dense state vectors. Qubit 0 is the least significant bit of the basis
//! index, and `|0⟩` is spin-down (the oscillator vacuum contribution).

use nalgebra::DMatrix;

use super::circuit::Circuit;
use super::gate::{Gate, Mat2, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Largest register held as a dense state vector.
pub const MAX_STATE_QUBITS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_STATE_QUBITS {
            return Err(Error::TooManyQubits {
                what: "state vector",
                n_qubits,
                cap: MAX_STATE_QUBITS,
            });
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if n_qubits > MAX_STATE_QUBITS {
            return Err(Error::TooManyQubits {
                what: "state vector",
                n_qubits,
                cap: MAX_STATE_QUBITS,
            });
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Returns a new state with `gate` applied.
    pub fn apply_gate(&self, gate: &Gate) -> Result<Self> {
        let mut out = self.clone();
        out.apply_gate_mut(gate)?;
        Ok(out)
    }

    pub fn apply_gate_mut(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        apply_gate_to_slice(&mut self.amplitudes, gate);
        Ok(())
    }

    /// Runs every gate of `circuit`, including its global phase.
    pub fn evolve(&self, circuit: &Circuit) -> Result<Self> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: circuit.n_qubits(),
                right: self.n_qubits,
            });
        }
        let mut out = self.clone();
        for g in circuit.gates() {
            apply_gate_to_slice(&mut out.amplitudes, g);
        }
        let phase = C64::from_polar(1.0, circuit.global_phase());
        out.amplitudes.iter_mut().for_each(|a| *a *= phase);
        Ok(out)
    }

    /// Renormalizes in place; used after non-unitary Kraus branches.
    pub(crate) fn renormalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
    }
}

/// Applies a validated gate to a raw amplitude slice.
pub(crate) fn apply_gate_to_slice(amps: &mut [C64], gate: &Gate) {
    if let Some(m) = gate.single_qubit_matrix() {
        let q = match gate.support() {
            super::gate::Support::One(q) => q,
            _ => unreachable!(),
        };
        apply_single(amps, q, &m);
        return;
    }
    match *gate {
        Gate::Cz { a, b } => {
            let mask = (1usize << a) | (1usize << b);
            for (i, amp) in amps.iter_mut().enumerate() {
                if i & mask == mask {
                    *amp = -*amp;
                }
            }
        }
        Gate::Rxx { a, b, .. } | Gate::Ryy { a, b, .. } => {
            apply_two(amps, a, b, &gate.matrix());
        }
        _ => unreachable!(),
    }
}

pub(crate) fn apply_single(amps: &mut [C64], q: usize, m: &Mat2) {
    let bit = 1usize << q;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let j = i | bit;
            let (x, y) = (amps[i], amps[j]);
            amps[i] = m[0][0] * x + m[0][1] * y;
            amps[j] = m[1][0] * x + m[1][1] * y;
        }
    }
}

/// `m` is 4×4 in the local basis `bit(a) + 2 bit(b)`.
pub(crate) fn apply_two(amps: &mut [C64], a: usize, b: usize, m: &DMatrix<C64>) {
    let (ba, bb) = (1usize << a, 1usize << b);
    for i in 0..amps.len() {
        if i & (ba | bb) == 0 {
            let idx = [i, i | ba, i | bb, i | ba | bb];
            let v = idx.map(|k| amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                amps[k] = (0..4).map(|c| m[(r, c)] * v[c]).sum();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn x_flips_zero_to_one() {
        let s = StateVector::zero(1).unwrap();
        let s = s.apply_gate(&Gate::X { qubit: 0 }).unwrap();
        assert!((s.amplitudes()[1] - ONE).norm() < 1e-15);
    }

    #[test]
    fn two_sx_make_x_up_to_phase() {
        let s = StateVector::zero(1).unwrap();
        let s = s.apply_gate(&Gate::Sx { qubit: 0 }).unwrap();
        let s = s.apply_gate(&Gate::Sx { qubit: 0 }).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cz_after_hadamard_like_on_q0_leaves_state_unchanged() {
        // Oracle: 4×4 product CZ · (I ⊗ H) applied to |00⟩.
        let h = Gate::U3 { qubit: 0, alpha: PI, beta: PI / 2.0, gamma: 0.0 };
        let s = StateVector::zero(2).unwrap().apply_gate(&h).unwrap();
        let before = s.amplitudes().to_vec();
        let after = s.apply_gate(&Gate::Cz { a: 0, b: 1 }).unwrap();

        let hm = h.matrix();
        let mut dense = DMatrix::<C64>::zeros(4, 4);
        for r in 0..4 {
            for c in 0..4 {
                if r >> 1 == c >> 1 {
                    dense[(r, c)] = hm[(r & 1, c & 1)];
                }
            }
        }
        let full = Gate::Cz { a: 0, b: 1 }.matrix() * dense;
        for r in 0..4 {
            assert!((after.amplitudes()[r] - full[(r, 0)]).norm() < 1e-14);
            assert!((after.amplitudes()[r] - before[r]).norm() < 1e-14);
        }
    }

    #[test]
    fn out_of_range_gate_is_rejected() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(
            s.apply_gate(&Gate::X { qubit: 2 }),
            Err(Error::QubitOutOfRange { index: 2, n_qubits: 2 })
        ));
        assert!(s.apply_gate(&Gate::Cz { a: 1, b: 1 }).is_err());
    }

    #[test]
    fn from_amplitudes_checks_norm_and_length() {
        assert!(StateVector::from_amplitudes(vec![ONE, ONE]).is_err());
        assert!(StateVector::from_amplitudes(vec![ONE, ZERO, ZERO]).is_err());
        assert!(StateVector::zero(25).is_err());
    }
}
