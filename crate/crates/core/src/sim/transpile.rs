//! Lowering to the native gate set {RZ, SX, X, CZ}.
//!
//! Two-qubit rotations go through `exp(-i(θx XX + θy YY)/2)
//!   = (W†⊗W†) · CNOT · (RX(θx) ⊗ RZ(θy)) · CNOT · (W⊗W)` with `W = RX(π/2)`
//! (maps Y to Z and fixes X) and `CNOT = (I⊗H) CZ (I⊗H)`. An adjacent
//! RXX/RYY pair on the same qubits therefore costs two CZ, and so does an
//! isolated one. Single-qubit runs that contain a non-native gate are merged
//! and resynthesized as `RZ · SX · RZ · SX · RZ`; runs that are already
//! native pass through untouched.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DMatrix;

use super::circuit::Circuit;
use super::gate::{
    hadamard, mat2_adjoint, mat2_mul, rx_matrix, rz_matrix, Gate, Mat2, C64, MAT2_IDENTITY,
};
use super::state::apply_gate_to_slice;

const ANGLE_EPS: f64 = 1e-12;

/// ZYZ Euler angles of a 2×2 unitary: `m = e^{iδ} RZ(φ) RY(θ) RZ(λ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

pub fn euler_zyz(m: &Mat2) -> EulerAngles {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let s = det.sqrt();
    let v = [[m[0][0] / s, m[0][1] / s], [m[1][0] / s, m[1][1] / s]];
    let theta = 2.0 * v[1][0].norm().atan2(v[0][0].norm());
    let (sum, diff) = if v[1][0].norm() < 1e-14 {
        (2.0 * v[1][1].arg(), 0.0)
    } else if v[0][0].norm() < 1e-14 {
        (0.0, 2.0 * v[1][0].arg())
    } else {
        (2.0 * v[1][1].arg(), 2.0 * v[1][0].arg())
    };
    EulerAngles {
        theta,
        phi: (sum + diff) / 2.0,
        lambda: (sum - diff) / 2.0,
    }
}

fn near(x: f64, target: f64) -> bool {
    (x - target).abs() < ANGLE_EPS
}

/// Native sequence (in time order) for a 2×2 unitary plus the global phase
/// `δ` such that `m = e^{iδ} · product(sequence)`.
///
/// With `force_two_sx` the generic `RZ SX RZ SX RZ` form is always used, so
/// the physical pulse count does not depend on the angles.
pub fn synthesize_single_qubit(qubit: usize, m: &Mat2, force_two_sx: bool) -> (Vec<Gate>, f64) {
    let EulerAngles { theta, phi, lambda } = euler_zyz(m);
    let rz = |theta: f64| Gate::Rz { qubit, theta };
    let seq: Vec<Gate> = if force_two_sx {
        vec![
            rz(lambda),
            Gate::Sx { qubit },
            rz(theta + PI),
            Gate::Sx { qubit },
            rz(phi + PI),
        ]
    } else if near(theta, 0.0) {
        vec![rz(phi + lambda)]
    } else if near(theta, FRAC_PI_2) {
        vec![rz(lambda - FRAC_PI_2), Gate::Sx { qubit }, rz(phi + FRAC_PI_2)]
    } else if near(theta, PI) {
        vec![rz(lambda + PI), Gate::X { qubit }, rz(phi)]
    } else {
        vec![
            rz(lambda),
            Gate::Sx { qubit },
            rz(theta + PI),
            Gate::Sx { qubit },
            rz(phi + PI),
        ]
    };
    // RZ(2πk) is ±I; fold it into the phase.
    let seq: Vec<Gate> = if force_two_sx {
        seq
    } else {
        seq.into_iter()
            .filter(|g| match *g {
                Gate::Rz { theta, .. } => {
                    let r = theta.rem_euclid(TAU);
                    !(r < ANGLE_EPS || TAU - r < ANGLE_EPS)
                }
                _ => true,
            })
            .collect()
    };
    let phase = residual_phase(m, &seq);
    (seq, phase)
}

fn sequence_matrix(seq: &[Gate]) -> Mat2 {
    seq.iter().fold(MAT2_IDENTITY, |acc, g| {
        mat2_mul(&g.single_qubit_matrix().expect("single-qubit gate"), &acc)
    })
}

fn residual_phase(m: &Mat2, seq: &[Gate]) -> f64 {
    let n = sequence_matrix(seq);
    let mut overlap = C64::new(0.0, 0.0);
    for r in 0..2 {
        for c in 0..2 {
            overlap += n[r][c].conj() * m[r][c];
        }
    }
    overlap.arg()
}

/// A U3 gate equal to `m` up to the returned phase.
fn u3_from_matrix(qubit: usize, m: &Mat2) -> Gate {
    let EulerAngles { theta, phi, lambda } = euler_zyz(m);
    Gate::U3 {
        qubit,
        alpha: phi,
        beta: theta,
        gamma: lambda,
    }
}

/// CZ-based lowering of `exp(-i(θx XX + θy YY)/2)` on `(a, b)`.
/// Returns the gate sequence and the global phase to add.
fn lower_xy(a: usize, b: usize, theta_xx: f64, theta_yy: f64) -> (Vec<Gate>, f64) {
    let w = rx_matrix(FRAC_PI_2);
    let w_dag = mat2_adjoint(&w);
    let h = hadamard();
    let pre_b = mat2_mul(&h, &w);
    let mid_a = rx_matrix(theta_xx);
    let mid_b = mat2_mul(&h, &mat2_mul(&rz_matrix(theta_yy), &h));
    let post_b = mat2_mul(&w_dag, &h);
    let seq = vec![
        u3_from_matrix(a, &w),
        u3_from_matrix(b, &pre_b),
        Gate::Cz { a, b },
        u3_from_matrix(a, &mid_a),
        u3_from_matrix(b, &mid_b),
        Gate::Cz { a, b },
        u3_from_matrix(a, &w_dag),
        u3_from_matrix(b, &post_b),
    ];

    // Phase against the exact target, on the two-qubit subspace.
    let mut target = DMatrix::<C64>::identity(4, 4);
    let ga = Gate::Rxx { a: 0, b: 1, theta: theta_xx }.matrix();
    let gb = Gate::Ryy { a: 0, b: 1, theta: theta_yy }.matrix();
    target = gb * ga * target;
    let local = |g: &Gate| -> Gate {
        let map = |q: usize| if q == a { 0 } else { 1 };
        match *g {
            Gate::U3 { qubit, alpha, beta, gamma } => Gate::U3 { qubit: map(qubit), alpha, beta, gamma },
            Gate::Cz { .. } => Gate::Cz { a: 0, b: 1 },
            other => other,
        }
    };
    let mut overlap = C64::new(0.0, 0.0);
    for col in 0..4 {
        let mut v = vec![C64::new(0.0, 0.0); 4];
        v[col] = C64::new(1.0, 0.0);
        for g in &seq {
            apply_gate_to_slice(&mut v, &local(g));
        }
        for row in 0..4 {
            overlap += v[row].conj() * target[(row, col)];
        }
    }
    (seq, overlap.arg())
}

/// Lowers every gate to {RZ, SX, X, CZ}. The result equals the input
/// unitary including global phase.
pub fn transpile_to_native(circuit: &Circuit) -> Circuit {
    let n = circuit.n_qubits();
    let mut phase = circuit.global_phase();

    // Pass 1: two-qubit rotations to CZ + U3.
    let mut lowered: Vec<Gate> = Vec::with_capacity(circuit.len());
    let gates = circuit.gates();
    let mut i = 0;
    while i < gates.len() {
        let g = gates[i];
        let (a, b, txx, tyy, used) = match g {
            Gate::Rxx { a, b, theta } => match gates.get(i + 1) {
                Some(&Gate::Ryy { a: c, b: d, theta: t2 }) if same_pair(a, b, c, d) => {
                    (a, b, theta, t2, 2)
                }
                _ => (a, b, theta, 0.0, 1),
            },
            Gate::Ryy { a, b, theta } => match gates.get(i + 1) {
                Some(&Gate::Rxx { a: c, b: d, theta: t2 }) if same_pair(a, b, c, d) => {
                    (a, b, t2, theta, 2)
                }
                _ => (a, b, 0.0, theta, 1),
            },
            other => {
                lowered.push(other);
                i += 1;
                continue;
            }
        };
        let (seq, ph) = lower_xy(a, b, txx, tyy);
        lowered.extend(seq);
        phase += ph;
        i += used;
    }

    // Pass 2: single-qubit runs.
    let mut out = Circuit::new(n);
    let mut runs: Vec<Vec<Gate>> = vec![Vec::new(); n];
    let flush = |q: usize, runs: &mut Vec<Vec<Gate>>, out: &mut Circuit, phase: &mut f64| {
        let run = std::mem::take(&mut runs[q]);
        if run.iter().all(Gate::is_native) {
            run.into_iter().for_each(|g| out.push_unchecked(g));
        } else {
            let m = sequence_matrix(&run);
            let (seq, ph) = synthesize_single_qubit(q, &m, false);
            seq.into_iter().for_each(|g| out.push_unchecked(g));
            *phase += ph;
        }
    };
    for g in lowered {
        match g {
            Gate::Cz { a, b } => {
                flush(a, &mut runs, &mut out, &mut phase);
                flush(b, &mut runs, &mut out, &mut phase);
                out.push_unchecked(g);
            }
            _ => {
                let q = g.support().to_vec()[0];
                runs[q].push(g);
            }
        }
    }
    for q in 0..n {
        flush(q, &mut runs, &mut out, &mut phase);
    }
    out.add_phase(phase);
    out
}

fn same_pair(a: usize, b: usize, c: usize, d: usize) -> bool {
    (a == c && b == d) || (a == d && b == c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::circuit::circuit_unitary;
    use crate::sim::gate::u3_matrix;
    use crate::sim::linalg::{max_abs_diff, phase_aligned_distance};

    fn mat2_dist(a: &Mat2, b: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((a[r][c] - b[r][c]).norm());
            }
        }
        d
    }

    fn check_single(m: &Mat2, force: bool) -> Vec<Gate> {
        let (seq, phase) = synthesize_single_qubit(0, m, force);
        let mut n = sequence_matrix(&seq);
        let p = C64::from_polar(1.0, phase);
        n.iter_mut().flatten().for_each(|z| *z *= p);
        assert!(mat2_dist(&n, m) < 1e-12, "{seq:?}");
        seq
    }

    #[test]
    fn generic_u3_uses_two_sx() {
        let seq = check_single(&u3_matrix(0.4, 1.1, -2.3), false);
        assert_eq!(seq.iter().filter(|g| matches!(g, Gate::Sx { .. })).count(), 2);
    }

    #[test]
    fn degenerate_forms() {
        assert!(check_single(&u3_matrix(0.0, 0.0, 0.0), false).is_empty());
        let rz_only = check_single(&u3_matrix(0.3, 0.0, 0.5), false);
        assert!(rz_only.iter().all(|g| matches!(g, Gate::Rz { .. })));
        let one_sx = check_single(&u3_matrix(0.3, FRAC_PI_2, 0.5), false);
        assert_eq!(one_sx.iter().filter(|g| matches!(g, Gate::Sx { .. })).count(), 1);
        let x = check_single(&u3_matrix(0.3, PI, 0.5), false);
        assert_eq!(x.iter().filter(|g| matches!(g, Gate::X { .. })).count(), 1);
    }

    #[test]
    fn forced_form_is_exact_even_for_identity() {
        let seq = check_single(&MAT2_IDENTITY, true);
        assert_eq!(seq.len(), 5);
    }

    #[test]
    fn xy_pair_compiles_to_two_cz() {
        let mut c = Circuit::new(2);
        c.push(Gate::Rxx { a: 0, b: 1, theta: 0.2 }).unwrap();
        c.push(Gate::Ryy { a: 0, b: 1, theta: 0.2 }).unwrap();
        let t = transpile_to_native(&c);
        assert!(t.is_native());
        assert_eq!(t.census().cz, 2);
        let (u, v) = (circuit_unitary(&c).unwrap(), circuit_unitary(&t).unwrap());
        assert!(max_abs_diff(u.matrix(), v.matrix()) < 1e-10);
    }

    #[test]
    fn isolated_rotations_compile() {
        for g in [
            Gate::Rxx { a: 1, b: 0, theta: -0.7 },
            Gate::Ryy { a: 0, b: 2, theta: 1.3 },
        ] {
            let mut c = Circuit::new(3);
            c.push(g).unwrap();
            let t = transpile_to_native(&c);
            assert_eq!(t.census().cz, 2);
            let d = phase_aligned_distance(
                circuit_unitary(&c).unwrap().matrix(),
                circuit_unitary(&t).unwrap().matrix(),
            );
            assert!(d < 1e-10);
        }
    }

    #[test]
    fn native_runs_pass_through() {
        let mut c = Circuit::new(1);
        c.extend([
            Gate::Rz { qubit: 0, theta: 0.0 },
            Gate::Sx { qubit: 0 },
            Gate::Rz { qubit: 0, theta: 1.0 },
            Gate::Sx { qubit: 0 },
        ])
        .unwrap();
        assert_eq!(transpile_to_native(&c), c);
    }
}
