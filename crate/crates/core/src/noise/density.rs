//! Exact density-matrix evolution under the same channels the trajectory
//! sampler uses. Small registers only; used as a reference.

use nalgebra::DMatrix;

use super::calibration::CalibrationTable;
use super::channel::{gate_error_channels, NoiseChannel};
use crate::error::{Error, Result};
use crate::sim::gate::C64;
use crate::sim::state::{apply_gate_to_slice, apply_single, apply_two};
use crate::sim::{Circuit, Gate};

pub const MAX_DENSITY_QUBITS: usize = 6;

/// `K ρ K†` with `K` given as a slice kernel acting on column vectors.
fn conjugate_by(rho: &mut DMatrix<C64>, apply: impl Fn(&mut [C64])) {
    let dim = rho.nrows();
    let mut col = vec![C64::new(0.0, 0.0); dim];
    for pass in 0..2 {
        for j in 0..dim {
            col.copy_from_slice(rho.column(j).as_slice());
            apply(&mut col);
            rho.column_mut(j).copy_from_slice(&col);
        }
        if pass == 0 {
            rho.adjoint_mut();
        }
    }
    rho.adjoint_mut();
}

fn apply_channel(rho: &DMatrix<C64>, ch: &NoiseChannel) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
    for k in ch.kraus() {
        let mut term = rho.clone();
        match *ch.targets.as_slice() {
            [q] => {
                let m = [[k[(0, 0)], k[(0, 1)]], [k[(1, 0)], k[(1, 1)]]];
                conjugate_by(&mut term, |v| apply_single(v, q, &m));
            }
            [a, b] => conjugate_by(&mut term, |v| apply_two(v, a, b, &k)),
            _ => unreachable!("channels act on one or two qubits"),
        }
        out += term;
    }
    out
}

/// Applies symmetric readout flips to a probability vector.
pub fn apply_readout_confusion(probabilities: &[f64], readout: &[f64]) -> Vec<f64> {
    let mut p = probabilities.to_vec();
    for (q, &r) in readout.iter().enumerate() {
        let bit = 1usize << q;
        let prev = p.clone();
        for (i, v) in p.iter_mut().enumerate() {
            *v = (1.0 - r) * prev[i] + r * prev[i ^ bit];
        }
    }
    p
}

/// Final density matrix of a native circuit started from `|0…0⟩`, before
/// readout.
pub fn density_matrix_evolve(circuit: &Circuit, table: &CalibrationTable) -> Result<DMatrix<C64>> {
    let n = circuit.n_qubits();
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::TooManyQubits {
            what: "density-matrix reference",
            n_qubits: n,
            cap: MAX_DENSITY_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    rho[(0, 0)] = C64::new(1.0, 0.0);
    for gate in circuit.gates() {
        let channels = gate_error_channels(gate, table)?;
        conjugate_by(&mut rho, |v| apply_gate_to_slice(v, gate));
        for ch in &channels {
            rho = apply_channel(&rho, ch);
        }
    }
    Ok(rho)
}

/// Outcome distribution of a native circuit including readout error.
pub fn density_matrix_reference(circuit: &Circuit, table: &CalibrationTable) -> Result<Vec<f64>> {
    let rho = density_matrix_evolve(circuit, table)?;
    let diag: Vec<f64> = (0..rho.nrows()).map(|i| rho[(i, i)].re).collect();
    let readout = (0..circuit.n_qubits())
        .map(|q| Ok(table.qubit(q)?.readout_error))
        .collect::<Result<Vec<_>>>()?;
    Ok(apply_readout_confusion(&diag, &readout))
}

/// Per-qubit probability of reading `1` for a circuit without two-qubit
/// gates, exact in the channel model and including readout error.
pub fn product_state_reference(circuit: &Circuit, table: &CalibrationTable) -> Result<Vec<f64>> {
    let n = circuit.n_qubits();
    let mut rhos: Vec<DMatrix<C64>> = (0..n)
        .map(|_| {
            let mut r = DMatrix::zeros(2, 2);
            r[(0, 0)] = C64::new(1.0, 0.0);
            r
        })
        .collect();
    for gate in circuit.gates() {
        if gate.is_two_qubit() {
            return Err(Error::invalid("product-state reference needs a circuit without two-qubit gates"));
        }
        let q = gate.support().to_vec()[0];
        let channels = gate_error_channels(gate, table)?;
        let local = match *gate {
            Gate::Rz { theta, .. } => Gate::Rz { qubit: 0, theta },
            Gate::Sx { .. } => Gate::Sx { qubit: 0 },
            Gate::X { .. } => Gate::X { qubit: 0 },
            _ => return Err(Error::NonNativeGate(gate.name())),
        };
        conjugate_by(&mut rhos[q], |v| apply_gate_to_slice(v, &local));
        for ch in channels {
            let ch = NoiseChannel { targets: vec![0], ..ch };
            rhos[q] = apply_channel(&rhos[q], &ch);
        }
    }
    rhos.iter()
        .enumerate()
        .map(|(q, r)| {
            let p1 = r[(1, 1)].re;
            let e = table.qubit(q)?.readout_error;
            Ok(p1 * (1.0 - e) + (1.0 - p1) * e)
        })
        .collect()
}

/// Distribution of the number of successes among independent Bernoulli
/// trials with the given probabilities.
pub fn poisson_binomial(probabilities: &[f64]) -> Vec<f64> {
    let mut dist = vec![1.0];
    for &p in probabilities {
        let mut next = vec![0.0; dist.len() + 1];
        for (k, &d) in dist.iter().enumerate() {
            next[k] += d * (1.0 - p);
            next[k + 1] += d * p;
        }
        dist = next;
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::trajectory::run_noisy;
    use crate::sim::StateVector;

    fn table(n: usize) -> CalibrationTable {
        let mut text = String::from("qubit,readout_error,sx_error,cz_error,t1_us,t2_us\n");
        for q in 0..n {
            text.push_str(&format!("{q},0.0{},0.004,0.05,{},{}\n", q + 1, 3 + q, 2 + q));
        }
        CalibrationTable::parse(&text).unwrap()
    }

    fn sample_circuit() -> Circuit {
        let mut c = Circuit::new(3);
        c.extend([
            Gate::Sx { qubit: 0 },
            Gate::Rz { qubit: 0, theta: 0.4 },
            Gate::Sx { qubit: 0 },
            Gate::X { qubit: 2 },
            Gate::Cz { a: 0, b: 1 },
            Gate::Sx { qubit: 1 },
            Gate::Cz { a: 1, b: 2 },
            Gate::Sx { qubit: 2 },
        ])
        .unwrap();
        c
    }

    #[test]
    fn noiseless_reference_matches_statevector() {
        let c = sample_circuit();
        let p = density_matrix_reference(&c, &CalibrationTable::noiseless(3)).unwrap();
        let q = StateVector::zero(3).unwrap().evolve(&c).unwrap().probabilities();
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let rho = density_matrix_evolve(&sample_circuit(), &table(3)).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(crate::sim::linalg::max_abs_diff(&rho, &rho.adjoint()) < 1e-12);
    }

    #[test]
    fn trajectories_agree_with_density_matrix() {
        let c = sample_circuit();
        let t = table(3);
        let exact = density_matrix_reference(&c, &t).unwrap();
        let shots = 200_000u64;
        let h = run_noisy(&c, &t, shots, 77).unwrap();
        for (k, &p) in exact.iter().enumerate() {
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            assert!((h.frequency(k) - p).abs() < 5.0 * sigma + 1e-9, "{k}: {} vs {p}", h.frequency(k));
        }
    }

    #[test]
    fn amplitude_damping_of_excited_state() {
        // t2 = 2·t1: pure relaxation during one X pulse.
        let t = CalibrationTable::parse(
            "qubit,readout_error,sx_error,cz_error,t1_us,t2_us\n0,0,0,,0.1,0.2\n",
        )
        .unwrap();
        let mut c = Circuit::new(1);
        c.push(Gate::X { qubit: 0 }).unwrap();
        let p = density_matrix_reference(&c, &t).unwrap();
        let gamma = 1.0 - (-0.032f64 / 0.1).exp();
        assert!((p[1] - (1.0 - gamma)).abs() < 1e-12);
    }

    #[test]
    fn product_reference_agrees_with_full() {
        let mut c = Circuit::new(3);
        for q in 0..3 {
            c.extend([
                Gate::Sx { qubit: q },
                Gate::Rz { qubit: q, theta: 0.3 * q as f64 + 0.1 },
                Gate::Sx { qubit: q },
            ])
            .unwrap();
        }
        let t = table(3);
        let full = density_matrix_reference(&c, &t).unwrap();
        let per_qubit = product_state_reference(&c, &t).unwrap();
        for (q, p1) in per_qubit.iter().enumerate() {
            let marginal: f64 = full
                .iter()
                .enumerate()
                .filter(|(i, _)| i & (1 << q) != 0)
                .map(|(_, p)| p)
                .sum();
            assert!((marginal - p1).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_binomial_reduces_to_binomial() {
        let d = poisson_binomial(&[0.3; 4]);
        let binom = [0.2401, 0.4116, 0.2646, 0.0756, 0.0081];
        for (a, b) in d.iter().zip(binom) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn size_cap() {
        let c = Circuit::new(7);
        assert!(matches!(
            density_matrix_reference(&c, &CalibrationTable::noiseless(7)),
            Err(Error::TooManyQubits { .. })
        ));
    }
}
