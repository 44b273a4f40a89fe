//! Jaynes-Cummings model with the cavity mode carried by `N` qubits.
//!
//! Qubit layout: cavity qubits `σ_1..σ_N` are circuit qubits `0..N`, the
//! two-level system `τ` is qubit `N`. Spin-up is `|1⟩`, so the initial state
//! `|0,↑_τ⟩` is the basis index `1 << N`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sim::gate::C64;
use crate::sim::linalg::{embed_product, matrix_exponential, pauli, HermitianMatrix, UnitaryMatrix};
use crate::sim::{Circuit, CountsHistogram, Gate, StateVector};

pub const MAX_JC_CAVITY_QUBITS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JcParams {
    pub omega0: f64,
    pub omegaz: f64,
    pub g: f64,
    pub n_qubits: usize,
}

impl JcParams {
    pub fn new(omega0: f64, omegaz: f64, g: f64, n_qubits: usize) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::invalid(format!("coupling g must be positive, got {g}")));
        }
        if !omega0.is_finite() || !omegaz.is_finite() {
            return Err(Error::invalid("frequencies must be finite"));
        }
        if n_qubits == 0 {
            return Err(Error::invalid("the cavity needs at least one qubit"));
        }
        Ok(Self { omega0, omegaz, g, n_qubits })
    }

    /// Resonant two-qubit cavity with `ω0 = ωz = 1`.
    pub fn resonant(g: f64) -> Result<Self> {
        Self::new(1.0, 1.0, g, 2)
    }

    /// `Ω_R = sqrt(g² + (ωz − ω0)²/4)`.
    pub fn rabi(&self) -> f64 {
        self.g.hypot((self.omegaz - self.omega0) / 2.0)
    }

    /// `T0 = π/Ω_R`.
    pub fn period(&self) -> f64 {
        PI / self.rabi()
    }

    pub fn tau(&self) -> usize {
        self.n_qubits
    }

    /// Basis index of `|0,↑_τ⟩`.
    pub fn initial_index(&self) -> usize {
        1 << self.n_qubits
    }
}

/// Probability of remaining in `|0,↑_τ⟩` for a single-photon cavity.
pub fn rabi_probability(p: &JcParams, t: f64) -> f64 {
    let r = p.rabi();
    let (s, c) = (r * t).sin_cos();
    let d = (p.omegaz - p.omega0) / (2.0 * r);
    c * c + s * s * d * d
}

/// Qubit-ensemble JC Hamiltonian on `N + 1` qubits. In the rotating frame
/// only the exchange term `(g/(2√N))Σ(σ_x τ_x + σ_y τ_y)` remains.
pub fn build_jc_hamiltonian(p: &JcParams, rotating_frame: bool) -> Result<HermitianMatrix> {
    if p.n_qubits > MAX_JC_CAVITY_QUBITS {
        return Err(Error::TooManyQubits {
            what: "JC Hamiltonian cavity",
            n_qubits: p.n_qubits,
            cap: MAX_JC_CAVITY_QUBITS,
        });
    }
    let n = p.n_qubits + 1;
    let tau = p.tau();
    let dim = 1usize << n;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    let coupling = p.g / (2.0 * (p.n_qubits as f64).sqrt());
    // σ_x = X and σ_y τ_y = (−Y)(−Y) = YY in the computational basis.
    for i in 0..p.n_qubits {
        for k in ['X', 'Y'] {
            h += embed_product(n, &[(i, pauli(k)), (tau, pauli(k))]) * C64::new(coupling, 0.0);
        }
    }
    if !rotating_frame {
        // σ_z = −Z.
        for i in 0..p.n_qubits {
            h -= embed_product(n, &[(i, pauli('Z'))]) * C64::new(p.omega0 / 2.0, 0.0);
        }
        h -= embed_product(n, &[(tau, pauli('Z'))]) * C64::new(p.omegaz / 2.0, 0.0);
    }
    HermitianMatrix::new(h)
}

/// `e^{−i t H_rot}`, the target of both the Trotter and synthesis routes.
pub fn exact_evolution(p: &JcParams, t: f64) -> Result<UnitaryMatrix> {
    matrix_exponential(&build_jc_hamiltonian(p, true)?, t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrotterPlan {
    pub steps: usize,
    /// Fuse the trailing outer half-step of one step with the leading one of
    /// the next.
    pub merge_half_steps: bool,
}

impl TrotterPlan {
    pub fn new(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::invalid("Trotter step count must be at least 1"));
        }
        Ok(Self { steps, merge_half_steps: true })
    }

    pub fn unmerged(steps: usize) -> Result<Self> {
        Ok(Self { merge_half_steps: false, ..Self::new(steps)? })
    }

    /// CZ gates after transpilation: two per exchange exponential.
    pub fn cz_count(&self) -> usize {
        if self.merge_half_steps {
            6 + 4 * (self.steps - 1)
        } else {
            6 * self.steps
        }
    }
}

/// Cavity qubit carrying the outer half-steps.
const OUTER: usize = 1;

fn push_exchange(c: &mut Circuit, cavity: usize, tau: usize, phi: f64) -> Result<()> {
    c.extend([
        Gate::Rxx { a: cavity, b: tau, theta: phi },
        Gate::Ryy { a: cavity, b: tau, theta: phi },
    ])?;
    Ok(())
}

/// Symmetrized product `(e^{−iH_o dt/2} e^{−iH_m dt} e^{−iH_o dt/2})^{K_T}`.
/// The outer half-steps `H_o` couple cavity qubit 1 (`σ2`) to `τ` and the
/// middle step `H_m` couples qubit 0, as in the executed circuit; the two
/// cavity qubits are interchangeable without noise. Each
/// `e^{−iH_k θ}` is `RXX(φ)·RYY(φ)` with `φ = gθ/√N`. The circuit holds the
/// evolution only; see [`initial_state_preparation`].
pub fn build_trotter_circuit(p: &JcParams, t: f64, plan: TrotterPlan) -> Result<Circuit> {
    if p.n_qubits != 2 {
        return Err(Error::invalid(format!(
            "Trotter circuits are built for 2 cavity qubits, got {}",
            p.n_qubits
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("evolution time must be finite and >= 0, got {t}")));
    }
    if plan.steps == 0 {
        return Err(Error::invalid("Trotter step count must be at least 1"));
    }
    let tau = p.tau();
    let dt = t / plan.steps as f64;
    let phi = |theta: f64| p.g * theta / (p.n_qubits as f64).sqrt();
    let mut c = Circuit::new(p.n_qubits + 1);
    for step in 0..plan.steps {
        let first = step == 0;
        if plan.merge_half_steps && !first {
            // Previous trailing half-step was deferred into this one.
            push_exchange(&mut c, OUTER, tau, phi(dt))?;
        } else {
            push_exchange(&mut c, OUTER, tau, phi(dt / 2.0))?;
        }
        push_exchange(&mut c, 1 - OUTER, tau, phi(dt))?;
        let last = step + 1 == plan.steps;
        if !plan.merge_half_steps || last {
            push_exchange(&mut c, OUTER, tau, phi(dt / 2.0))?;
        }
    }
    Ok(c)
}

/// Pair sequence of the six-CZ layout: `(σ2,τ)² (σ1,τ)² (σ2,τ)²`.
pub const SIX_CZ_PAIRS: [(usize, usize); 6] = [(1, 2), (1, 2), (0, 2), (0, 2), (1, 2), (1, 2)];

/// `repetitions` copies of `n_cz` bare CZ gates cycling through the six-CZ
/// placement. Consecutive gates repeat the same pair, so the ideal unitary
/// is the identity.
pub fn build_cz_benchmark_circuit(n_cz: usize, repetitions: usize) -> Result<Circuit> {
    if !n_cz.is_multiple_of(2) {
        return Err(Error::invalid(format!("n_cz must be even so CZ gates cancel, got {n_cz}")));
    }
    let mut c = Circuit::new(3);
    for _ in 0..repetitions {
        for k in 0..n_cz {
            let (a, b) = SIX_CZ_PAIRS[k % SIX_CZ_PAIRS.len()];
            c.push(Gate::Cz { a, b })?;
        }
    }
    Ok(c)
}

/// `X` on `τ`, taking `|0…0⟩` to `|0,↑_τ⟩`.
pub fn initial_state_preparation(p: &JcParams) -> Circuit {
    let mut c = Circuit::new(p.n_qubits + 1);
    c.push(Gate::X { qubit: p.tau() }).expect("tau is in range");
    c
}

/// Fraction of shots on `|0,↑_τ⟩` (cavity bits 00, `τ` bit 1).
pub fn survival_probability(counts: &CountsHistogram) -> Result<f64> {
    if counts.n_qubits() != 3 {
        return Err(Error::invalid(format!(
            "survival is read from 3 qubits (2 cavity + tau), got {}",
            counts.n_qubits()
        )));
    }
    Ok(counts.frequency(0b100))
}

/// Noiseless survival of `|0,↑_τ⟩` under an evolution circuit.
pub fn ideal_survival(p: &JcParams, evolution: &Circuit) -> Result<f64> {
    let start = StateVector::basis(p.n_qubits + 1, p.initial_index())?;
    Ok(start.evolve(evolution)?.probabilities()[p.initial_index()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{circuit_unitary, phase_aligned_distance, transpile_to_native};

    fn fig6() -> JcParams {
        JcParams::resonant(0.1).unwrap()
    }

    #[test]
    fn rabi_examples() {
        let p = fig6();
        assert_eq!(rabi_probability(&p, 0.0), 1.0);
        assert!(rabi_probability(&p, p.period() / 2.0).abs() < 1e-30);
        let q = JcParams::new(1.0, 1.1, 0.1, 2).unwrap();
        let r = (0.01f64 + 0.0025).sqrt();
        let t = PI / (2.0 * r);
        assert!((rabi_probability(&q, t) - (0.05 / r).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn detuned_rabi_matches_one_excitation_exponential() {
        let (w0, wz, g) = (1.0, 1.1, 0.1);
        let q = JcParams::new(w0, wz, g, 1).unwrap();
        // Basis {|0,↑⟩, |1,↓⟩} of the boson model.
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(wz / 2.0, 0.0), C64::new(g, 0.0), C64::new(g, 0.0), C64::new(w0 - wz / 2.0, 0.0)],
        );
        for t in [0.5, 7.0, 20.0] {
            let u = matrix_exponential(&HermitianMatrix::new(h.clone()).unwrap(), t).unwrap();
            assert!((u.matrix()[(0, 0)].norm_sqr() - rabi_probability(&q, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_coupling_rotating_frame_vanishes() {
        let mut p = fig6();
        p.g = 1e-300;
        let h = build_jc_hamiltonian(&p, true).unwrap();
        assert!(h.matrix().iter().all(|z| z.norm() < 1e-200));
    }

    #[test]
    fn rotating_hamiltonian_conserves_excitations() {
        let h = build_jc_hamiltonian(&fig6(), true).unwrap();
        assert_eq!(h.dim(), 8);
        let number = DMatrix::from_fn(8, 8, |r, c| {
            if r == c {
                C64::new((r as u32).count_ones() as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let comm = h.matrix() * &number - &number * h.matrix();
        assert!(comm.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn single_cavity_qubit_matches_truncated_boson_model() {
        let (w0, wz, g) = (1.3, 0.8, 0.2);
        let p = JcParams::new(w0, wz, g, 1).unwrap();
        let h = build_jc_hamiltonian(&p, false).unwrap();
        // Index = n + 2·[τ up]; boson H = ω0 n + (ωz/2)τ_z + g(aτ+ + a†τ−),
        // shifted by the dropped constant ω0/2.
        let mut boson = DMatrix::<C64>::zeros(4, 4);
        for idx in 0..4 {
            let n = (idx & 1) as f64;
            let tz = if idx & 2 != 0 { 1.0 } else { -1.0 };
            boson[(idx, idx)] = C64::new(w0 * n + wz / 2.0 * tz - w0 / 2.0, 0.0);
        }
        boson[(1, 2)] = C64::new(g, 0.0);
        boson[(2, 1)] = C64::new(g, 0.0);
        assert!((h.matrix() - boson).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn exact_evolution_gives_full_return_at_period() {
        let p = fig6();
        let u = exact_evolution(&p, p.period()).unwrap();
        assert!((u.matrix()[(4, 4)].norm_sqr() - 1.0).abs() < 1e-12);
        let half = exact_evolution(&p, p.period() / 2.0).unwrap();
        assert!(half.matrix()[(4, 4)].norm_sqr() < 1e-12);
    }

    #[test]
    fn oversize_cavity_rejected() {
        let p = JcParams::new(1.0, 1.0, 0.1, 11).unwrap();
        assert!(build_jc_hamiltonian(&p, true).is_err());
        assert!(build_trotter_circuit(&p, 1.0, TrotterPlan::new(1).unwrap()).is_err());
    }

    #[test]
    fn trotter_cz_counts() {
        let p = fig6();
        for k in 1..=7 {
            for plan in [TrotterPlan::new(k).unwrap(), TrotterPlan::unmerged(k).unwrap()] {
                let c = transpile_to_native(&build_trotter_circuit(&p, 3.0, plan).unwrap());
                assert_eq!(c.census().cz, plan.cz_count(), "{plan:?}");
            }
        }
        assert_eq!(TrotterPlan::new(4).unwrap().cz_count(), 18);
    }

    #[test]
    fn merged_and_unmerged_are_the_same_operator() {
        let p = fig6();
        let a = circuit_unitary(&build_trotter_circuit(&p, 9.0, TrotterPlan::new(3).unwrap()).unwrap()).unwrap();
        let b = circuit_unitary(&build_trotter_circuit(&p, 9.0, TrotterPlan::unmerged(3).unwrap()).unwrap()).unwrap();
        assert!(phase_aligned_distance(a.matrix(), b.matrix()) < 1e-12);
    }

    #[test]
    fn seven_steps_track_rabi_curve() {
        let p = fig6();
        let t = 2.0 * p.period();
        let c = build_trotter_circuit(&p, t, TrotterPlan::new(7).unwrap()).unwrap();
        let ps = ideal_survival(&p, &c).unwrap();
        let exact = exact_evolution(&p, t).unwrap().matrix()[(4, 4)].norm_sqr();
        assert!((ps - exact).abs() < 0.01);
        assert!((exact - rabi_probability(&p, t)).abs() < 1e-12);
    }

    #[test]
    fn trotter_stays_in_single_excitation_sector() {
        let p = fig6();
        let c = transpile_to_native(&build_trotter_circuit(&p, 17.0, TrotterPlan::new(2).unwrap()).unwrap());
        let psi = StateVector::basis(3, 4).unwrap().evolve(&c).unwrap();
        let leak: f64 = psi
            .probabilities()
            .iter()
            .enumerate()
            .filter(|(i, _)| i.count_ones() != 1)
            .map(|(_, p)| p)
            .sum();
        assert!(leak < 1e-10);
    }

    #[test]
    fn benchmark_is_identity() {
        for reps in 1..=4 {
            let c = build_cz_benchmark_circuit(6, reps).unwrap();
            assert_eq!(c.census().cz, 6 * reps);
            assert_eq!(c.len(), 6 * reps);
            let u = circuit_unitary(&c).unwrap();
            assert!(phase_aligned_distance(u.matrix(), &DMatrix::identity(8, 8)) < 1e-15);
        }
        assert!(build_cz_benchmark_circuit(5, 1).is_err());
    }

    #[test]
    fn survival_reads_cavity_vacuum_tau_up() {
        let h = CountsHistogram::from_bitstrings(3, [("100", 20)]).unwrap();
        assert_eq!(survival_probability(&h).unwrap(), 1.0);
        let h = CountsHistogram::from_bitstrings(3, [("001", 20)]).unwrap();
        assert_eq!(survival_probability(&h).unwrap(), 0.0);
        let h = CountsHistogram::from_bitstrings(2, [("01", 20)]).unwrap();
        assert!(survival_probability(&h).is_err());
    }
}
