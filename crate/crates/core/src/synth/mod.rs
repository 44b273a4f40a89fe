//! Fixed-layout synthesis of three-qubit JC evolution operators from CZ
//! gates and parameterized U3 rotations.

pub mod layout;
pub mod optimize;

pub use layout::{enumerate_four_cz_layouts, layout_circuit, six_cz_layout, SynthLayout, U3Slot};
pub use optimize::{
    best_layout_for_time, optimize_layout, optimize_layout_from, select_best, synthesis_fidelity, SynthOptions, SynthResult,
};
