use super::gate::{Gate, C64};
use super::linalg::UnitaryMatrix;
use super::state::apply_gate_to_slice;
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Largest circuit that [`circuit_unitary`] will densify.
pub const MAX_UNITARY_QUBITS: usize = 12;

/// Ordered gate list on a fixed register, with an explicit global phase.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    global_phase: f64,
}

/// Gate counts by kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GateCensus {
    pub rz: usize,
    pub sx: usize,
    pub x: usize,
    pub u3: usize,
    pub cz: usize,
    pub rxx: usize,
    pub ryy: usize,
}

impl GateCensus {
    pub fn two_qubit(&self) -> usize {
        self.cz + self.rxx + self.ryy
    }
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            global_phase: 0.0,
        }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>, global_phase: f64) -> Result<Self> {
        for g in &gates {
            g.validate(n_qubits)?;
        }
        Ok(Self {
            n_qubits,
            gates,
            global_phase,
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub(crate) fn push_unchecked(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<&mut Self> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    pub fn add_phase(&mut self, phase: f64) {
        self.global_phase += phase;
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn is_native(&self) -> bool {
        self.gates.iter().all(Gate::is_native)
    }

    pub fn census(&self) -> GateCensus {
        let mut c = GateCensus::default();
        for g in &self.gates {
            match g {
                Gate::Rz { .. } => c.rz += 1,
                Gate::Sx { .. } => c.sx += 1,
                Gate::X { .. } => c.x += 1,
                Gate::U3 { .. } => c.u3 += 1,
                Gate::Cz { .. } => c.cz += 1,
                Gate::Rxx { .. } => c.rxx += 1,
                Gate::Ryy { .. } => c.ryy += 1,
            }
        }
        c
    }

    /// Number of physical single-qubit pulses (SX or X) on each qubit.
    pub fn pulses_per_qubit(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_qubits];
        for g in &self.gates {
            if let Gate::Sx { qubit } | Gate::X { qubit } = *g {
                out[qubit] += 1;
            }
        }
        out
    }

    /// Concatenates `other` after `self`.
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        let mut out = self.clone();
        out.gates.extend_from_slice(&other.gates);
        out.global_phase += other.global_phase;
        Ok(out)
    }
}

/// Dense unitary of the whole circuit, global phase included.
pub fn circuit_unitary(circuit: &Circuit) -> Result<UnitaryMatrix> {
    let n = circuit.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::TooManyQubits {
            what: "circuit unitary",
            n_qubits: n,
            cap: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut m = DMatrix::<C64>::identity(dim, dim);
    let phase = C64::from_polar(1.0, circuit.global_phase());
    // Column-major storage: each column is a contiguous state.
    for col in m.as_mut_slice().chunks_mut(dim) {
        for g in circuit.gates() {
            apply_gate_to_slice(col, g);
        }
        col.iter_mut().for_each(|a| *a *= phase);
    }
    Ok(UnitaryMatrix::new_unchecked(m))
}
