//! Monte-Carlo wavefunction execution of native circuits.
//!
//! Mixed-unitary channels (depolarizing, dephasing) are sampled as Pauli
//! insertions independent of the state; amplitude damping is sampled with
//! the state-dependent jump probability `γ·P(|1⟩)` and the branch is
//! renormalized. Measurement draws from `|ψ|²` and then flips each bit with
//! the qubit's readout error.

use rand::Rng;
use rayon::prelude::*;

use super::calibration::CalibrationTable;
use super::channel::{gate_error_channels, two_qubit_paulis, ChannelKind, NoiseChannel};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::sim::gate::{Mat2, C64, ONE, ZERO};
use crate::sim::sampling::{cumulative, draw_index, SHOT_CHUNK};
use crate::sim::state::{apply_gate_to_slice, apply_single};
use crate::sim::{Circuit, CountsHistogram, Gate, StateVector};

/// A native circuit with every gate's channels resolved against a table.
#[derive(Clone, Debug)]
pub struct NoisyProgram {
    n_qubits: usize,
    steps: Vec<(Gate, Vec<NoiseChannel>)>,
    readout: Vec<f64>,
    product: bool,
}

impl NoisyProgram {
    pub fn compile(circuit: &Circuit, table: &CalibrationTable) -> Result<Self> {
        let n = circuit.n_qubits();
        let steps = circuit
            .gates()
            .iter()
            .map(|g| Ok((*g, gate_error_channels(g, table)?)))
            .collect::<Result<Vec<_>>>()?;
        let readout = (0..n)
            .map(|q| Ok(table.qubit(q)?.readout_error))
            .collect::<Result<Vec<_>>>()?;
        let product = !circuit.gates().iter().any(Gate::is_two_qubit);
        Ok(Self {
            n_qubits: n,
            steps,
            readout,
            product,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn steps(&self) -> &[(Gate, Vec<NoiseChannel>)] {
        &self.steps
    }

    pub fn readout(&self) -> &[f64] {
        &self.readout
    }

    /// True when the circuit has no two-qubit gates, so every trajectory
    /// stays a product state.
    pub fn is_product(&self) -> bool {
        self.product
    }

    /// One trajectory; returns the measured basis index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let ideal = if self.product {
            self.sample_product(rng)
        } else {
            self.sample_dense(rng)
        };
        self.apply_readout(ideal, rng)
    }

    fn sample_dense<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut psi = StateVector::zero(self.n_qubits).expect("size checked by caller");
        for (gate, channels) in &self.steps {
            apply_gate_to_slice(psi.amplitudes_mut(), gate);
            for ch in channels {
                apply_sampled_channel(&mut psi, ch, rng);
            }
        }
        let cdf = cumulative(&psi.probabilities());
        draw_index(&cdf, rng.random())
    }

    fn sample_product<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut qubits: Vec<StateVector> = (0..self.n_qubits)
            .map(|_| StateVector::zero(1).expect("one qubit"))
            .collect();
        for (gate, channels) in &self.steps {
            let q = gate.support().to_vec()[0];
            let m = gate.single_qubit_matrix().expect("product circuit");
            apply_single(qubits[q].amplitudes_mut(), 0, &m);
            for ch in channels {
                let mut local = ch.clone();
                local.targets = vec![0];
                apply_sampled_channel(&mut qubits[q], &local, rng);
            }
        }
        let mut index = 0;
        for (q, psi) in qubits.iter().enumerate() {
            let p1 = psi.amplitudes()[1].norm_sqr();
            if rng.random::<f64>() < p1 {
                index |= 1 << q;
            }
        }
        index
    }

    fn apply_readout<R: Rng + ?Sized>(&self, mut index: usize, rng: &mut R) -> usize {
        for (q, &p) in self.readout.iter().enumerate() {
            if p > 0.0 && rng.random::<f64>() < p {
                index ^= 1 << q;
            }
        }
        index
    }
}

fn pauli_mat(kind: char) -> Mat2 {
    match kind {
        'X' => [[ZERO, ONE], [ONE, ZERO]],
        'Y' => [[ZERO, -C64::i()], [C64::i(), ZERO]],
        'Z' => [[ONE, ZERO], [ZERO, -ONE]],
        _ => [[ONE, ZERO], [ZERO, ONE]],
    }
}

fn apply_sampled_channel<R: Rng + ?Sized>(psi: &mut StateVector, ch: &NoiseChannel, rng: &mut R) {
    let p = ch.parameter;
    match ch.kind {
        ChannelKind::Depolarizing1q => {
            if rng.random::<f64>() < p {
                let k = rng.random_range(0..3);
                apply_single(psi.amplitudes_mut(), ch.targets[0], &pauli_mat(['X', 'Y', 'Z'][k]));
            }
        }
        ChannelKind::Depolarizing2q => {
            if rng.random::<f64>() < p {
                let k = rng.random_range(0..15);
                let (hi, lo) = two_qubit_paulis().nth(k).expect("15 Paulis");
                let (a, b) = (ch.targets[0], ch.targets[1]);
                if lo != 'I' {
                    apply_single(psi.amplitudes_mut(), a, &pauli_mat(lo));
                }
                if hi != 'I' {
                    apply_single(psi.amplitudes_mut(), b, &pauli_mat(hi));
                }
            }
        }
        ChannelKind::Dephasing | ChannelKind::ReadoutFlip => {
            if rng.random::<f64>() < p {
                let kind = if ch.kind == ChannelKind::Dephasing { 'Z' } else { 'X' };
                apply_single(psi.amplitudes_mut(), ch.targets[0], &pauli_mat(kind));
            }
        }
        ChannelKind::AmplitudeDamping => {
            let q = ch.targets[0];
            let bit = 1usize << q;
            let p_excited: f64 = psi
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(i, _)| i & bit != 0)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            let jump = p * p_excited;
            let amps = psi.amplitudes_mut();
            if rng.random::<f64>() < jump {
                // |1⟩ → |0⟩
                for i in 0..amps.len() {
                    if i & bit == 0 {
                        amps[i] = amps[i | bit];
                        amps[i | bit] = ZERO;
                    }
                }
            } else {
                let s = (1.0 - p).sqrt();
                for (i, a) in amps.iter_mut().enumerate() {
                    if i & bit != 0 {
                        *a *= s;
                    }
                }
            }
            psi.renormalize();
        }
    }
}

/// One noisy execution of a native circuit; returns the measured basis index
/// (qubit 0 = least significant bit).
pub fn sample_noisy_trajectory<R: Rng + ?Sized>(
    circuit: &Circuit,
    table: &CalibrationTable,
    rng: &mut R,
) -> Result<usize> {
    check_size(circuit)?;
    Ok(NoisyProgram::compile(circuit, table)?.sample(rng))
}

fn check_size(circuit: &Circuit) -> Result<()> {
    if circuit.n_qubits() > crate::sim::MAX_STATE_QUBITS {
        return Err(Error::TooManyQubits {
            what: "trajectory simulation",
            n_qubits: circuit.n_qubits(),
            cap: crate::sim::MAX_STATE_QUBITS,
        });
    }
    Ok(())
}

/// Aggregates `shots` trajectories; trajectory `k` uses stream `k` of `seed`.
pub fn run_noisy(circuit: &Circuit, table: &CalibrationTable, shots: u64, seed: u64) -> Result<CountsHistogram> {
    if shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    check_size(circuit)?;
    let program = NoisyProgram::compile(circuit, table)?;
    Ok(run_program(&program, shots, seed))
}

pub fn run_program(program: &NoisyProgram, shots: u64, seed: u64) -> CountsHistogram {
    let n = program.n_qubits();
    let chunks = shots.div_ceil(SHOT_CHUNK);
    let partials: Vec<CountsHistogram> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut h = CountsHistogram::new(n);
            let end = ((c + 1) * SHOT_CHUNK).min(shots);
            for shot in c * SHOT_CHUNK..end {
                let mut rng = stream_rng(seed, shot);
                h.record(program.sample(&mut rng), 1);
            }
            h
        })
        .collect();
    let mut out = CountsHistogram::new(n);
    for p in &partials {
        out.merge(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn non_native_gate_rejected() {
        let mut c = Circuit::new(1);
        c.push(Gate::U3 { qubit: 0, alpha: 0.0, beta: 1.0, gamma: 0.0 }).unwrap();
        let t = CalibrationTable::noiseless(1);
        assert!(matches!(
            sample_noisy_trajectory(&c, &t, &mut stream_rng(0, 0)),
            Err(Error::NonNativeGate("u3"))
        ));
    }

    #[test]
    fn zero_noise_matches_ideal_sampling() {
        let mut c = Circuit::new(2);
        c.extend([Gate::Sx { qubit: 0 }, Gate::Cz { a: 0, b: 1 }, Gate::Sx { qubit: 1 }])
            .unwrap();
        let t = CalibrationTable::noiseless(2);
        let noisy = run_noisy(&c, &t, 40_000, 5).unwrap();
        let psi = StateVector::zero(2).unwrap().evolve(&c).unwrap();
        let probs = psi.probabilities();
        for (k, p) in probs.iter().enumerate() {
            let sigma = (p * (1.0 - p) / 40_000.0).sqrt().max(1e-9);
            assert!((noisy.frequency(k) - p).abs() <= 5.0 * sigma + 1e-12);
        }
    }

    #[test]
    fn same_seed_same_histogram() {
        let mut c = Circuit::new(3);
        c.extend([Gate::X { qubit: 2 }, Gate::Cz { a: 0, b: 2 }, Gate::Cz { a: 0, b: 2 }])
            .unwrap();
        let t = CalibrationTable::parse(
            "qubit,readout_error,sx_error,cz_error,t1_us,t2_us\n\
             a,0.01,0.001,0.05,50,40\nb,0.02,0.001,0.05,60,50\nc,0.03,0.002,,70,60\n",
        )
        .unwrap();
        let a = run_noisy(&c, &t, 5000, 11).unwrap();
        let b = run_noisy(&c, &t, 5000, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shots(), 5000);
    }
}
