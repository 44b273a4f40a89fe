//! Device noise: calibration tables, channel construction, and noisy
//! execution by quantum trajectories with a density-matrix reference.

pub mod calibration;
pub mod channel;
pub mod density;
pub mod trajectory;

pub use calibration::{CalibrationError, CalibrationTable, GateDurations, QubitCalibration};
pub use channel::{gate_error_channels, ChannelKind, NoiseChannel};
pub use density::{density_matrix_reference, poisson_binomial, product_state_reference};
pub use trajectory::{run_noisy, sample_noisy_trajectory, NoisyProgram};

use crate::sim::{Circuit, Gate};

/// Wall-clock estimate of one shot: gates scheduled as soon as their qubits
/// are free, then one measurement.
pub fn circuit_runtime_us(circuit: &Circuit, durations: &GateDurations) -> f64 {
    let mut busy = vec![0.0f64; circuit.n_qubits()];
    for gate in circuit.gates() {
        let d = match gate {
            Gate::Rz { .. } => 0.0,
            Gate::Cz { .. } | Gate::Rxx { .. } | Gate::Ryy { .. } => durations.cz_us,
            _ => durations.sx_us,
        };
        let qs = gate.support().to_vec();
        let start = qs.iter().map(|&q| busy[q]).fold(0.0, f64::max);
        for q in qs {
            busy[q] = start + d;
        }
    }
    busy.into_iter().fold(0.0, f64::max) + durations.measure_us
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runtime_schedules_in_parallel() {
        let mut c = Circuit::new(2);
        c.extend([
            Gate::Sx { qubit: 0 },
            Gate::Sx { qubit: 1 },
            Gate::Cz { a: 0, b: 1 },
            Gate::Rz { qubit: 0, theta: 1.0 },
        ])
        .unwrap();
        let d = GateDurations::default();
        let t = circuit_runtime_us(&c, &d);
        assert!((t - (d.sx_us + d.cz_us + d.measure_us)).abs() < 1e-12);
    }
}
