//! Fixed CZ layouts for three-qubit synthesis (two cavity qubits and `τ`).
//!
//! Every layout starts with a U3 on each qubit, and each CZ is followed by a
//! U3 on both qubits it touches.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::sim::{Circuit, Gate};

pub const TAU: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct U3Slot {
    pub qubit: usize,
    /// Index of the CZ this slot follows, `None` for the initial layer.
    pub after_cz: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthLayout {
    pub name: String,
    pub n_qubits: usize,
    pub cz_pairs: Vec<(usize, usize)>,
    pub u3_slots: Vec<U3Slot>,
}

impl SynthLayout {
    /// Layout whose `k`-th CZ couples cavity qubit `cavity[k]` with `τ`.
    pub fn from_cavity_sequence(name: impl Into<String>, cavity: &[usize]) -> Result<Self> {
        if let Some(&bad) = cavity.iter().find(|&&c| c >= TAU) {
            return Err(Error::invalid(format!("cavity qubit index {bad} is not 0 or 1")));
        }
        let cz_pairs: Vec<_> = cavity.iter().map(|&c| (c, TAU)).collect();
        let mut u3_slots: Vec<_> = (0..3).map(|qubit| U3Slot { qubit, after_cz: None }).collect();
        for (k, &(a, b)) in cz_pairs.iter().enumerate() {
            u3_slots.push(U3Slot { qubit: a, after_cz: Some(k) });
            u3_slots.push(U3Slot { qubit: b, after_cz: Some(k) });
        }
        Ok(Self {
            name: name.into(),
            n_qubits: 3,
            cz_pairs,
            u3_slots,
        })
    }

    pub fn cz_count(&self) -> usize {
        self.cz_pairs.len()
    }

    pub fn n_parameters(&self) -> usize {
        3 * self.u3_slots.len()
    }

    /// Cavity qubit of each CZ, in order.
    pub fn cavity_sequence(&self) -> Vec<usize> {
        self.cz_pairs
            .iter()
            .map(|&(a, b)| if a == TAU { b } else { a })
            .collect()
    }

    pub fn reversed(&self) -> Result<Self> {
        let mut seq = self.cavity_sequence();
        seq.reverse();
        Self::from_cavity_sequence(format!("{}-reversed", self.name), &seq)
    }

    pub fn cavity_swapped(&self) -> Result<Self> {
        let seq: Vec<_> = self.cavity_sequence().iter().map(|c| 1 - c).collect();
        Self::from_cavity_sequence(format!("{}-swapped", self.name), &seq)
    }

    /// Representative of the class under reversal and cavity exchange: the
    /// lexicographically largest cavity sequence.
    pub fn canonical_sequence(&self) -> Vec<usize> {
        let seq = self.cavity_sequence();
        let rev: Vec<_> = seq.iter().rev().copied().collect();
        let swap = |s: &[usize]| s.iter().map(|c| 1 - c).collect::<Vec<_>>();
        [swap(&seq), swap(&rev), rev, seq]
            .into_iter()
            .max()
            .expect("four candidates")
    }
}

/// Criterion: both cavity qubits take part in the same number of CZ gates.
pub fn equal_participation(layout: &SynthLayout) -> bool {
    let seq = layout.cavity_sequence();
    let ones = seq.iter().filter(|&&c| c == 1).count();
    2 * ones == seq.len()
}

/// Criterion: every CZ couples one cavity qubit with `τ`.
pub fn couples_cavity_to_tau(layout: &SynthLayout) -> bool {
    layout
        .cz_pairs
        .iter()
        .all(|&(a, b)| (a == TAU) != (b == TAU) && a < 3 && b < 3)
}

/// Criterion: no two layouts in the pool are related by reversal or cavity
/// exchange.
pub fn pairwise_inequivalent(pool: &[SynthLayout]) -> bool {
    let classes: BTreeSet<_> = pool.iter().map(SynthLayout::canonical_sequence).collect();
    classes.len() == pool.len()
}

/// All four-CZ layouts meeting the three criteria, one per class.
pub fn enumerate_four_cz_layouts() -> Vec<SynthLayout> {
    let mut classes = BTreeSet::new();
    for bits in 0u32..16 {
        let seq: Vec<usize> = (0..4).rev().map(|k| ((bits >> k) & 1) as usize).collect();
        let layout = SynthLayout::from_cavity_sequence("", &seq).expect("valid cavity indices");
        if equal_participation(&layout) && couples_cavity_to_tau(&layout) {
            classes.insert(std::cmp::Reverse(layout.canonical_sequence()));
        }
    }
    classes
        .into_iter()
        .map(|std::cmp::Reverse(seq)| {
            let name: String = seq.iter().map(|c| char::from(b'0' + *c as u8)).collect();
            SynthLayout::from_cavity_sequence(format!("four-cz-{name}"), &seq).expect("valid")
        })
        .collect()
}

/// The six-CZ layout, `(σ2,τ)² (σ1,τ)² (σ2,τ)²`.
pub fn six_cz_layout() -> SynthLayout {
    SynthLayout::from_cavity_sequence("six-cz", &[1, 1, 0, 0, 1, 1]).expect("valid")
}

/// Circuit realizing `layout` with one `(α, β, γ)` per slot, in slot order.
pub fn layout_circuit(layout: &SynthLayout, angles: &[[f64; 3]]) -> Result<Circuit> {
    if angles.len() != layout.u3_slots.len() {
        return Err(Error::invalid(format!(
            "layout {} has {} U3 slots, got {} angle triples",
            layout.name,
            layout.u3_slots.len(),
            angles.len()
        )));
    }
    let mut c = Circuit::new(layout.n_qubits);
    let u3 = |slot: &U3Slot, a: &[f64; 3]| Gate::U3 {
        qubit: slot.qubit,
        alpha: a[0],
        beta: a[1],
        gamma: a[2],
    };
    let mut slots = layout.u3_slots.iter().zip(angles).peekable();
    while let Some((slot, a)) = slots.next_if(|(s, _)| s.after_cz.is_none()) {
        c.push(u3(slot, a))?;
    }
    for (k, &(a, b)) in layout.cz_pairs.iter().enumerate() {
        c.push(Gate::Cz { a, b })?;
        while let Some((slot, ang)) = slots.next_if(|(s, _)| s.after_cz == Some(k)) {
            c.push(u3(slot, ang))?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{circuit_unitary, phase_aligned_distance};
    use nalgebra::DMatrix;

    #[test]
    fn three_four_cz_classes() {
        let pool = enumerate_four_cz_layouts();
        assert_eq!(pool.len(), 3);
        let seqs: Vec<_> = pool.iter().map(SynthLayout::cavity_sequence).collect();
        assert_eq!(seqs, vec![vec![1, 1, 0, 0], vec![1, 0, 1, 0], vec![1, 0, 0, 1]]);
        assert!(pairwise_inequivalent(&pool));
        for l in &pool {
            assert!(equal_participation(l) && couples_cavity_to_tau(l));
            let census = [0, 1].map(|c| l.cavity_sequence().iter().filter(|&&x| x == c).count());
            assert_eq!(census, [2, 2]);
        }
    }

    #[test]
    fn enumeration_is_closed_under_symmetries() {
        let pool = enumerate_four_cz_layouts();
        let canon: BTreeSet<_> = pool.iter().map(SynthLayout::canonical_sequence).collect();
        for l in &pool {
            for image in [l.reversed().unwrap(), l.cavity_swapped().unwrap(), l.reversed().unwrap().cavity_swapped().unwrap()] {
                assert!(canon.contains(&image.canonical_sequence()));
            }
        }
    }

    #[test]
    fn slot_census_matches_diagrams() {
        for l in enumerate_four_cz_layouts() {
            assert_eq!(l.u3_slots.len(), 11);
            assert_eq!(l.u3_slots.iter().filter(|s| s.qubit == TAU).count(), 5);
        }
        let six = six_cz_layout();
        assert_eq!(six.u3_slots.len(), 15);
        assert_eq!(six.n_parameters(), 45);
        let per_qubit = [0, 1, 2].map(|q| six.u3_slots.iter().filter(|s| s.qubit == q).count());
        assert_eq!(per_qubit, [3, 5, 7]);
    }

    #[test]
    fn zero_angles_leave_bare_cz_sequence() {
        for l in enumerate_four_cz_layouts().into_iter().chain([six_cz_layout()]) {
            let c = layout_circuit(&l, &vec![[0.0; 3]; l.u3_slots.len()]).unwrap();
            assert_eq!(c.census().cz, l.cz_count());
            // Each cavity qubit's CZs come in equal-pair counts, so the bare
            // sequence is the identity.
            let u = circuit_unitary(&c).unwrap();
            assert!(phase_aligned_distance(u.matrix(), &DMatrix::identity(8, 8)) < 1e-14);
        }
    }

    #[test]
    fn angle_count_checked() {
        assert!(layout_circuit(&six_cz_layout(), &[[0.0; 3]; 3]).is_err());
    }
}
