//! Driven harmonic oscillator in the rotating frame and its qubit-ensemble
//! image.
//!
//! The boson side is `H = Δ a†a + (F/2)(a + a†)`, whose vacuum evolves into a
//! coherent state. Under the large-`N` mapping every qubit independently
//! feels `(Δ/2)σ_z + (F/(2√N))σ_x = Ω σ_n̂`, so the ensemble excitation count
//! (Hamming weight) is binomial.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::sim::gate::{Mat2, C64};
use crate::sim::{synthesize_single_qubit, Circuit, CountsHistogram, StateVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DhoParams {
    /// Detuning `Δ = ω0 − ωd`.
    pub delta: f64,
    /// Drive amplitude `F`.
    pub drive: f64,
    pub n_qubits: usize,
}

impl DhoParams {
    pub fn new(delta: f64, drive: f64, n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("the oscillator needs at least one qubit"));
        }
        if !delta.is_finite() || !drive.is_finite() {
            return Err(Error::invalid("detuning and drive must be finite"));
        }
        Ok(Self { delta, drive, n_qubits })
    }

    /// Origin shift `d0 = −F/(√2 Δ)`.
    pub fn d0(&self) -> Result<f64> {
        if self.delta == 0.0 {
            return Err(Error::invalid(
                "resonant drive (delta = 0) grows without bound; the coherent-state solution needs delta != 0",
            ));
        }
        Ok(-self.drive / (2f64.sqrt() * self.delta))
    }

    /// Transverse field per qubit, `F/(2√N)`.
    fn transverse(&self) -> f64 {
        self.drive / (2.0 * (self.n_qubits as f64).sqrt())
    }

    pub fn omega(&self) -> f64 {
        (self.delta / 2.0).hypot(self.transverse())
    }

    /// Polar angle of `n̂` measured from `+z`.
    pub fn axis_angle(&self) -> f64 {
        self.transverse().atan2(self.delta / 2.0)
    }

    /// `T0 = π/Ω`.
    pub fn period(&self) -> f64 {
        PI / self.omega()
    }
}

/// `α(t) = (d0/√2)[1 − cos Δt + i sin Δt]`.
pub fn coherent_alpha(p: &DhoParams, t: f64) -> Result<C64> {
    let d0 = p.d0()?;
    let phase = p.delta * t;
    Ok(C64::new(1.0 - phase.cos(), phase.sin()) * (d0 * FRAC_1_SQRT_2))
}

/// `|α(t)|² = 2 d0² sin²(Δt/2)`.
pub fn mean_excitation(p: &DhoParams, t: f64) -> Result<f64> {
    let d0 = p.d0()?;
    Ok(2.0 * d0 * d0 * (p.delta * t / 2.0).sin().powi(2))
}

/// Poisson weight `e^{−x} xⁿ/n!`, evaluated in log space.
pub fn poisson_weight(x: f64, n: usize) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    (-x + n as f64 * x.ln() - log_fact).exp()
}

/// Boson Fock-state occupation `P_b⁽ⁿ⁾(t)`.
pub fn fock_probability(p: &DhoParams, t: f64, n: usize) -> Result<f64> {
    Ok(poisson_weight(mean_excitation(p, t)?, n))
}

/// Spin-up probability of one ensemble qubit, `F²/(4NΩ²)·sin²(Ωt)`.
pub fn ensemble_up_probability(p: &DhoParams, t: f64) -> f64 {
    let omega = p.omega();
    if omega == 0.0 {
        return 0.0;
    }
    let amp = p.drive * p.drive / (4.0 * p.n_qubits as f64 * omega * omega);
    (amp * (omega * t).sin().powi(2)).clamp(0.0, 1.0)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Ensemble excitation distribution `P_c⁽ⁿ⁾(t)`, binomial in `P_up`.
pub fn binomial_fock_probability(p: &DhoParams, t: f64, n: usize) -> Result<f64> {
    if n > p.n_qubits {
        return Err(Error::invalid(format!(
            "excitation number {n} exceeds the ensemble size {}",
            p.n_qubits
        )));
    }
    let up = ensemble_up_probability(p, t);
    Ok(binomial(p.n_qubits, n) * up.powi(n as i32) * (1.0 - up).powi((p.n_qubits - n) as i32))
}

/// `e^{−iΩtσ_n̂}` in the computational basis, where `σ_z = −Z` (spin-down is
/// `|0⟩`) and `σ_x = X`.
pub fn single_qubit_propagator(p: &DhoParams, t: f64) -> Mat2 {
    let (s, c) = (p.omega() * t).sin_cos();
    let (sa, ca) = p.axis_angle().sin_cos();
    let i = C64::i();
    // n̂·σ = −cos(a) Z + sin(a) X
    [
        [C64::new(c, 0.0) + i * (s * ca), -i * (s * sa)],
        [-i * (s * sa), C64::new(c, 0.0) - i * (s * ca)],
    ]
}

/// Native-gate circuit for the ensemble evolution: each qubit gets
/// `RZ·SX·RZ·SX·RZ`, so the physical pulse count does not depend on `t`.
pub fn build_dho_circuit(p: &DhoParams, t: f64) -> Result<Circuit> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("evolution time must be finite and >= 0, got {t}")));
    }
    let m = single_qubit_propagator(p, t);
    let mut circuit = Circuit::new(p.n_qubits);
    for q in 0..p.n_qubits {
        let (gates, phase) = synthesize_single_qubit(q, &m, true);
        circuit.extend(gates)?;
        circuit.add_phase(phase);
    }
    Ok(circuit)
}

/// Groups outcomes by Hamming weight (excitation number).
pub fn excitation_histogram(counts: &CountsHistogram) -> BTreeMap<usize, f64> {
    let mut out = BTreeMap::new();
    if counts.shots() == 0 {
        return out;
    }
    for (index, c) in counts.iter() {
        *out.entry(index.count_ones() as usize).or_insert(0.0) += c as f64 / counts.shots() as f64;
    }
    out
}

/// Exact Hamming-weight distribution of a state, indexed by `n = 0..=N`.
pub fn excitation_distribution(state: &StateVector) -> Vec<f64> {
    let mut out = vec![0.0; state.n_qubits() + 1];
    for (index, a) in state.amplitudes().iter().enumerate() {
        out[index.count_ones() as usize] += a.norm_sqr();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::linalg::{matrix_exponential, HermitianMatrix};
    use crate::sim::{circuit_unitary, transpile_to_native};
    use nalgebra::DMatrix;

    fn p(delta: f64, drive: f64, n: usize) -> DhoParams {
        DhoParams::new(delta, drive, n).unwrap()
    }

    /// RK4 integration of `i dψ/dt = (Δ n + (F/2)(a + a†))ψ` in 30 Fock levels.
    fn truncated_fock_populations(delta: f64, drive: f64, t: f64) -> Vec<f64> {
        const LEVELS: usize = 30;
        let h = |psi: &[C64]| -> Vec<C64> {
            (0..LEVELS)
                .map(|n| {
                    let mut v = psi[n] * (delta * n as f64);
                    if n + 1 < LEVELS {
                        v += psi[n + 1] * (drive / 2.0 * ((n + 1) as f64).sqrt());
                    }
                    if n > 0 {
                        v += psi[n - 1] * (drive / 2.0 * (n as f64).sqrt());
                    }
                    v * -C64::i()
                })
                .collect()
        };
        let mut psi = vec![C64::new(0.0, 0.0); LEVELS];
        psi[0] = C64::new(1.0, 0.0);
        let steps = 20_000;
        let dt = t / steps as f64;
        let axpy = |x: &[C64], k: &[C64], s: f64| -> Vec<C64> {
            x.iter().zip(k).map(|(a, b)| a + b * s).collect()
        };
        for _ in 0..steps {
            let k1 = h(&psi);
            let k2 = h(&axpy(&psi, &k1, dt / 2.0));
            let k3 = h(&axpy(&psi, &k2, dt / 2.0));
            let k4 = h(&axpy(&psi, &k3, dt));
            for n in 0..LEVELS {
                psi[n] += (k1[n] + k2[n] * 2.0 + k3[n] * 2.0 + k4[n]) * (dt / 6.0);
            }
        }
        psi.iter().map(|a| a.norm_sqr()).collect()
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(coherent_alpha(&p(1.0, 0.75, 6), 0.0).unwrap(), C64::new(0.0, 0.0));
        let a = coherent_alpha(&p(1.0, 0.75, 6), PI).unwrap();
        assert!((a.norm_sqr() - 0.5625).abs() < 1e-14);
        assert!(coherent_alpha(&p(1.0, 0.3, 3), 2.0 * PI).unwrap().norm() < 1e-15);
        assert!(coherent_alpha(&p(0.0, 0.3, 3), 1.0).is_err());
    }

    #[test]
    fn fock_probability_matches_truncated_integration() {
        for (drive, t) in [(0.75, PI), (0.3, PI), (0.75, 2.3)] {
            let pops = truncated_fock_populations(1.0, drive, t);
            for (n, &pop) in pops.iter().enumerate().take(6) {
                let exact = fock_probability(&p(1.0, drive, 6), t, n).unwrap();
                assert!((exact - pop).abs() < 1e-9, "F={drive} n={n}: {exact} vs {pop}");
            }
        }
        assert!((fock_probability(&p(1.0, 0.75, 6), PI, 0).unwrap() - (-0.5625f64).exp()).abs() < 1e-15);
        let x: f64 = 0.09;
        assert!((fock_probability(&p(1.0, 0.3, 6), PI, 1).unwrap() - x * (-x).exp()).abs() < 1e-15);
    }

    #[test]
    fn fock_vacuum_and_normalization() {
        let q = p(1.0, 0.75, 6);
        assert_eq!(fock_probability(&q, 0.0, 0).unwrap(), 1.0);
        assert_eq!(fock_probability(&q, 0.0, 3).unwrap(), 0.0);
        let total: f64 = (0..=30).map(|n| fock_probability(&q, PI, n).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn up_probability_peak_matches_two_level_exponential() {
        let q = p(1.0, 0.75, 6);
        assert!((q.omega().powi(2) - 0.2734375).abs() < 1e-12);
        let t = PI / (2.0 * q.omega());
        assert!((ensemble_up_probability(&q, t) - 0.6 / 7.0).abs() < 1e-7);
        // Independent route: exponentiate −(Δ/2)Z + (F/(2√N))X.
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(-0.5, 0.0),
                C64::new(0.75 / (2.0 * 6f64.sqrt()), 0.0),
                C64::new(0.75 / (2.0 * 6f64.sqrt()), 0.0),
                C64::new(0.5, 0.0),
            ],
        );
        for t in [0.3, 1.0, t, 4.0] {
            let u = matrix_exponential(&HermitianMatrix::new(h.clone()).unwrap(), t).unwrap();
            assert!((u.matrix()[(1, 0)].norm_sqr() - ensemble_up_probability(&q, t)).abs() < 1e-12);
        }
        let q3 = p(1.0, 0.3, 3);
        assert!(ensemble_up_probability(&q3, PI / q3.omega()) < 1e-30);
    }

    #[test]
    fn binomial_examples() {
        let q = p(1.0, 0.75, 6);
        assert_eq!(binomial_fock_probability(&q, 0.0, 0).unwrap(), 1.0);
        let t = PI / (2.0 * q.omega());
        let p1 = binomial_fock_probability(&q, t, 1).unwrap();
        let up = 0.6 / 7.0;
        assert!((p1 - 6.0 * up * (1.0f64 - up).powi(5)).abs() < 1e-7);
        assert!((p1 - 0.32856).abs() < 1e-5);
        assert!(binomial_fock_probability(&q, t, 7).is_err());
        let total: f64 = (0..=6).map(|n| binomial_fock_probability(&q, 1.7, n).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_matches_product_enumeration() {
        let q = p(1.0, 0.75, 6);
        let up = ensemble_up_probability(&q, 2.2);
        let mut by_weight = [0.0; 7];
        for outcome in 0u32..64 {
            let w = outcome.count_ones() as usize;
            by_weight[w] += up.powi(w as i32) * (1.0 - up).powi(6 - w as i32);
        }
        for (n, v) in by_weight.iter().enumerate() {
            assert!((binomial_fock_probability(&q, 2.2, n).unwrap() - v).abs() < 1e-14);
        }
    }

    #[test]
    fn circuit_reproduces_binomial_and_propagator() {
        for (drive, n) in [(0.75, 6), (0.3, 3), (0.75, 11)] {
            let q = p(1.0, drive, n);
            for t in [0.0, 0.4, PI, 2.0 * q.period()] {
                let c = build_dho_circuit(&q, t).unwrap();
                assert_eq!(c.census().sx, 2 * n);
                assert_eq!(c.census().two_qubit(), 0);
                let psi = StateVector::zero(n).unwrap().evolve(&c).unwrap();
                let dist = excitation_distribution(&psi);
                for (k, v) in dist.iter().enumerate() {
                    assert!((binomial_fock_probability(&q, t, k).unwrap() - v).abs() < 1e-10);
                }
            }
        }
        let q = p(1.0, 0.75, 1);
        let c = build_dho_circuit(&q, 1.3).unwrap();
        let u = circuit_unitary(&c).unwrap();
        let m = single_qubit_propagator(&q, 1.3);
        for r in 0..2 {
            for col in 0..2 {
                assert!((u.matrix()[(r, col)] - m[r][col]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn transpile_keeps_two_sx_per_qubit() {
        let q = p(1.0, 0.75, 6);
        let c = transpile_to_native(&build_dho_circuit(&q, PI).unwrap());
        assert_eq!(c.census().sx, 12);
        assert!(c.pulses_per_qubit().iter().all(|&k| k == 2));
    }

    #[test]
    fn t_zero_is_identity() {
        let c = build_dho_circuit(&p(1.0, 0.75, 4), 0.0).unwrap();
        let psi = StateVector::zero(4).unwrap().evolve(&c).unwrap();
        assert!((psi.probabilities()[0] - 1.0).abs() < 1e-12);
        assert!(build_dho_circuit(&p(1.0, 0.75, 4), -1.0).is_err());
    }

    #[test]
    fn excitation_histogram_groups_by_weight() {
        let h = CountsHistogram::from_bitstrings(3, [("000", 10)]).unwrap();
        assert_eq!(excitation_histogram(&h), BTreeMap::from([(0, 1.0)]));
        let h = CountsHistogram::from_bitstrings(3, [("001", 50), ("010", 30), ("100", 20)]).unwrap();
        assert_eq!(excitation_histogram(&h), BTreeMap::from([(1, 1.0)]));
    }
}
