use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Shots per parallel work item. Fixed so that the reduction order, and
/// therefore the histogram, never depends on the thread count.
pub(crate) const SHOT_CHUNK: u64 = 2048;

/// Measurement outcome counts keyed by basis index (qubit 0 = LSB).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CountsHistogram {
    n_qubits: usize,
    counts: BTreeMap<usize, u64>,
    shots: u64,
}

impl CountsHistogram {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            counts: BTreeMap::new(),
            shots: 0,
        }
    }

    /// Builds a histogram from `(bitstring, count)` pairs. Bitstrings are
    /// written most-significant qubit first, so `"01"` means q1=0, q0=1.
    pub fn from_bitstrings<'a, I>(n_qubits: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, u64)>,
    {
        let mut h = Self::new(n_qubits);
        for (bits, count) in entries {
            if bits.len() != n_qubits || !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::invalid(format!(
                    "bitstring {bits:?} is not a {n_qubits}-qubit outcome"
                )));
            }
            let index = usize::from_str_radix(bits, 2).expect("validated binary");
            h.record(index, count);
        }
        Ok(h)
    }

    pub fn record(&mut self, index: usize, count: u64) {
        if count > 0 {
            *self.counts.entry(index).or_insert(0) += count;
            self.shots += count;
        }
    }

    pub fn merge(&mut self, other: &CountsHistogram) {
        for (&k, &v) in &other.counts {
            self.record(k, v);
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    pub fn count_bitstring(&self, bits: &str) -> u64 {
        usize::from_str_radix(bits, 2)
            .map(|i| self.count(i))
            .unwrap_or(0)
    }

    pub fn frequency(&self, index: usize) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.count(index) as f64 / self.shots as f64
        }
    }

    /// `(basis index, count)` in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn bitstring(&self, index: usize) -> String {
        format!("{:0width$b}", index, width = self.n_qubits)
    }

    /// `(bitstring, count)` pairs.
    pub fn bitstrings(&self) -> impl Iterator<Item = (String, u64)> + '_ {
        self.iter().map(|(k, v)| (self.bitstring(k), v))
    }
}

/// Inverse-CDF draw; `cdf` is non-decreasing with last entry ≈ 1.
pub(crate) fn draw_index(cdf: &[f64], u: f64) -> usize {
    let i = cdf.partition_point(|&c| c <= u);
    i.min(cdf.len() - 1)
}

pub(crate) fn cumulative(probabilities: &[f64]) -> Vec<f64> {
    let total: f64 = probabilities.iter().sum();
    let mut acc = 0.0;
    probabilities
        .iter()
        .map(|p| {
            acc += p / total;
            acc
        })
        .collect()
}

/// Samples `shots` projective measurements of `state` in the computational
/// basis. Shot `k` draws from stream `k` of `seed`.
pub fn sample_counts(state: &StateVector, shots: u64, seed: u64) -> Result<CountsHistogram> {
    if shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    let cdf = cumulative(&state.probabilities());
    Ok(sample_from_cdf(state.n_qubits(), &cdf, shots, seed))
}

pub(crate) fn sample_from_cdf(n_qubits: usize, cdf: &[f64], shots: u64, seed: u64) -> CountsHistogram {
    let chunks = shots.div_ceil(SHOT_CHUNK);
    let partials: Vec<CountsHistogram> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut h = CountsHistogram::new(n_qubits);
            let end = ((c + 1) * SHOT_CHUNK).min(shots);
            for shot in c * SHOT_CHUNK..end {
                let u: f64 = stream_rng(seed, shot).random();
                h.record(draw_index(cdf, u), 1);
            }
            h
        })
        .collect();
    let mut out = CountsHistogram::new(n_qubits);
    for p in &partials {
        out.merge(p);
    }
    out
}
