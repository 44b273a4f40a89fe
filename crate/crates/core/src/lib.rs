//! Circuit-level simulation of bosonic modes mapped onto qubit ensembles.
//!
//! A bosonic mode is represented by `N` qubits whose Hamming weight plays the
//! role of the excitation number (qubit `|0⟩` is spin-down, the vacuum
//! contribution). The crate provides a dense state-vector engine with a
//! native-gate transpiler, a calibration-driven trajectory noise model, the
//! driven-oscillator and Jaynes-Cummings circuit builders with their
//! closed-form references, fixed-layout unitary synthesis, and an experiment
//! runner that writes CSV series and error metrics.

pub mod error;
pub mod experiment;
pub mod jc;
pub mod noise;
pub mod oscillator;
pub mod rng;
pub mod sim;
pub mod synth;

pub use error::{Error, Result};
