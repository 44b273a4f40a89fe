#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use hpsim::noise::CalibrationTable;
use hpsim::sim::{Circuit, Gate};
use rand::Rng;

pub fn data_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn table(name: &str) -> CalibrationTable {
    CalibrationTable::load(data_file(name)).expect("bundled calibration parses")
}

/// Random circuit over every gate kind.
pub fn random_circuit<R: Rng>(rng: &mut R, n_qubits: usize, n_gates: usize) -> Circuit {
    let mut c = Circuit::new(n_qubits);
    for _ in 0..n_gates {
        let q = rng.random_range(0..n_qubits);
        let angle = |rng: &mut R| rng.random_range(-PI..PI);
        let two = n_qubits > 1 && rng.random_bool(0.4);
        let g = if two {
            let mut b = rng.random_range(0..n_qubits - 1);
            if b >= q {
                b += 1;
            }
            match rng.random_range(0..3) {
                0 => Gate::Cz { a: q, b },
                1 => Gate::Rxx { a: q, b, theta: angle(rng) },
                _ => Gate::Ryy { a: q, b, theta: angle(rng) },
            }
        } else {
            match rng.random_range(0..4) {
                0 => Gate::Rz { qubit: q, theta: angle(rng) },
                1 => Gate::Sx { qubit: q },
                2 => Gate::X { qubit: q },
                _ => Gate::U3 { qubit: q, alpha: angle(rng), beta: angle(rng), gamma: angle(rng) },
            }
        };
        c.push(g).expect("valid gate");
    }
    c
}

/// Pearson correlation and least-squares slope of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (sxy / (sxx * syy).sqrt(), sxy / sxx)
}
