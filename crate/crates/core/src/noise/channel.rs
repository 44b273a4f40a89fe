//! Noise channels attached to native gates.
//!
//! Reported gate errors are read as average gate infidelities `r`. A Pauli
//! depolarizing channel that applies a uniformly random non-identity Pauli
//! with probability `p` has `r = p·d/(d+1)`, so `p = r·(d+1)/d` with `d = 2`
//! for one qubit and `d = 4` for two, clipped to `[0, 1]`. Relaxation and
//! pure dephasing act on every target for the gate's duration.

use nalgebra::DMatrix;

use super::calibration::CalibrationTable;
use crate::error::{Error, Result};
use crate::sim::gate::C64;
use crate::sim::linalg::pauli;
use crate::sim::Gate;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelKind {
    /// Classical bit flip at readout with probability `parameter`.
    ReadoutFlip,
    /// Random X/Y/Z with total probability `parameter`.
    Depolarizing1q,
    /// Random non-identity two-qubit Pauli with total probability `parameter`.
    Depolarizing2q,
    /// Decay `|1⟩ → |0⟩` with probability `parameter` (`γ = 1 − e^{−d/T1}`).
    AmplitudeDamping,
    /// Z with probability `parameter` (`(1 − e^{−Γφ d})/2`).
    Dephasing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseChannel {
    pub kind: ChannelKind,
    pub parameter: f64,
    pub targets: Vec<usize>,
}

impl NoiseChannel {
    /// Kraus operators in the local basis of `targets`.
    pub fn kraus(&self) -> Vec<DMatrix<C64>> {
        let p = self.parameter;
        let scale = |m: DMatrix<C64>, w: f64| m * C64::new(w.sqrt(), 0.0);
        match self.kind {
            ChannelKind::ReadoutFlip => vec![scale(pauli('I'), 1.0 - p), scale(pauli('X'), p)],
            ChannelKind::Dephasing => vec![scale(pauli('I'), 1.0 - p), scale(pauli('Z'), p)],
            ChannelKind::Depolarizing1q => {
                let mut ks = vec![scale(pauli('I'), 1.0 - p)];
                ks.extend(['X', 'Y', 'Z'].map(|k| scale(pauli(k), p / 3.0)));
                ks
            }
            ChannelKind::Depolarizing2q => {
                let mut ks = vec![scale(DMatrix::identity(4, 4), 1.0 - p)];
                for (hi, lo) in two_qubit_paulis() {
                    ks.push(scale(pauli(hi).kronecker(&pauli(lo)), p / 15.0));
                }
                ks
            }
            ChannelKind::AmplitudeDamping => {
                let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
                let k0 = DMatrix::from_row_slice(2, 2, &[o, z, z, C64::new((1.0 - p).sqrt(), 0.0)]);
                let k1 = DMatrix::from_row_slice(2, 2, &[z, C64::new(p.sqrt(), 0.0), z, z]);
                vec![k0, k1]
            }
        }
    }
}

/// The 15 non-identity Pauli pairs `(P_b, P_a)` as (more, less) significant
/// factors, in a fixed order.
pub(crate) fn two_qubit_paulis() -> impl Iterator<Item = (char, char)> {
    const P: [char; 4] = ['I', 'X', 'Y', 'Z'];
    (0..16)
        .skip(1)
        .map(|k| (P[k / 4], P[k % 4]))
}

/// Single-qubit depolarizing probability for average error `r`.
pub fn depolarizing_1q_probability(r: f64) -> f64 {
    (r * 3.0 / 2.0).clamp(0.0, 1.0)
}

/// Two-qubit depolarizing probability for average error `r`.
pub fn depolarizing_2q_probability(r: f64) -> f64 {
    (r * 5.0 / 4.0).clamp(0.0, 1.0)
}

/// Relaxation and dephasing channels on `qubit` over `duration_us`.
pub fn decoherence_channels(table: &CalibrationTable, qubit: usize, duration_us: f64) -> Result<Vec<NoiseChannel>> {
    let cal = table.qubit(qubit)?;
    let mut out = Vec::new();
    let gamma = 1.0 - (-duration_us / cal.t1_us).exp();
    if gamma > 0.0 {
        out.push(NoiseChannel {
            kind: ChannelKind::AmplitudeDamping,
            parameter: gamma,
            targets: vec![qubit],
        });
    }
    let rate = (1.0 / cal.t2_us - 1.0 / (2.0 * cal.t1_us)).max(0.0);
    let pz = (1.0 - (-rate * duration_us).exp()) / 2.0;
    if pz > 0.0 {
        out.push(NoiseChannel {
            kind: ChannelKind::Dephasing,
            parameter: pz,
            targets: vec![qubit],
        });
    }
    Ok(out)
}

/// Channels applied right after `gate`. RZ is virtual and noiseless.
pub fn gate_error_channels(gate: &Gate, table: &CalibrationTable) -> Result<Vec<NoiseChannel>> {
    let durations = table.durations();
    let mut out = Vec::new();
    match *gate {
        Gate::Rz { qubit, .. } => {
            table.qubit(qubit)?;
        }
        Gate::Sx { qubit } | Gate::X { qubit } => {
            let p = depolarizing_1q_probability(table.qubit(qubit)?.sx_error);
            if p > 0.0 {
                out.push(NoiseChannel {
                    kind: ChannelKind::Depolarizing1q,
                    parameter: p,
                    targets: vec![qubit],
                });
            }
            out.extend(decoherence_channels(table, qubit, durations.sx_us)?);
        }
        Gate::Cz { a, b } => {
            let p = depolarizing_2q_probability(table.cz_error(a, b)?);
            if p > 0.0 {
                out.push(NoiseChannel {
                    kind: ChannelKind::Depolarizing2q,
                    parameter: p,
                    targets: vec![a, b],
                });
            }
            out.extend(decoherence_channels(table, a, durations.cz_us)?);
            out.extend(decoherence_channels(table, b, durations.cz_us)?);
        }
        _ => return Err(Error::NonNativeGate(gate.name())),
    }
    Ok(out)
}

/// Readout flips for the first `n_qubits` rows of `table`.
pub fn readout_channels(table: &CalibrationTable, n_qubits: usize) -> Result<Vec<NoiseChannel>> {
    (0..n_qubits)
        .map(|q| {
            Ok(NoiseChannel {
                kind: ChannelKind::ReadoutFlip,
                parameter: table.qubit(q)?.readout_error,
                targets: vec![q],
            })
        })
        .collect()
}
