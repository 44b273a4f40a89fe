//! Time-averaged probability differences between series on a common grid.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SeriesLabel {
    /// Closed-form boson result `P_b`.
    BosonAnalytic,
    /// Noiseless qubit-ensemble result `P_c`.
    QubitIdeal,
    /// Noisy qubit-ensemble result `P_q`.
    QubitNoisy,
}

impl SeriesLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesLabel::BosonAnalytic => "boson-analytic",
            SeriesLabel::QubitIdeal => "qubit-ideal",
            SeriesLabel::QubitNoisy => "qubit-noisy",
        }
    }
}

/// Slack for probabilities that come out of floating-point evaluation.
const PROB_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilitySeries {
    label: SeriesLabel,
    points: Vec<(f64, f64)>,
}

impl ProbabilitySeries {
    pub fn new(label: SeriesLabel, points: Vec<(f64, f64)>) -> Result<Self> {
        for w in points.windows(2) {
            if w[1].0.is_nan() || w[1].0 <= w[0].0 {
                return Err(Error::invalid(format!(
                    "{} series times must be strictly increasing ({} then {})",
                    label.as_str(),
                    w[0].0,
                    w[1].0
                )));
            }
        }
        if let Some(&(t, v)) = points
            .iter()
            .find(|(_, v)| !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(v))
        {
            return Err(Error::invalid(format!(
                "{} series value {v} at t = {t} is not a probability",
                label.as_str()
            )));
        }
        Ok(Self { label, points })
    }

    /// Series on `times` with `f(t)` as values.
    pub fn from_fn(label: SeriesLabel, times: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(label, times.iter().map(|&t| (t, f(t))).collect())
    }

    pub fn label(&self) -> SeriesLabel {
        self.label
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `(1/M) Σ_j |a(t_j) − b(t_j)|`.
pub fn mean_abs_difference(a: &ProbabilitySeries, b: &ProbabilitySeries) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::invalid(format!(
            "time grids differ: {} vs {} points",
            a.len(),
            b.len()
        )));
    }
    let mut total = 0.0;
    for (j, (&(ta, va), &(tb, vb))) in a.points.iter().zip(&b.points).enumerate() {
        if (ta - tb).abs() > 1e-12 * ta.abs().max(tb.abs()).max(1.0) {
            return Err(Error::invalid(format!("time grids differ at point {j}: {ta} vs {tb}")));
        }
        total += (va - vb).abs();
    }
    Ok(total / a.len() as f64)
}

/// Hardware-induced error: ideal qubits vs noisy qubits.
pub fn delta_p_e(ideal: &ProbabilitySeries, noisy: &ProbabilitySeries) -> Result<f64> {
    mean_abs_difference(ideal, noisy)
}

/// Total error: exact boson result vs noisy qubits.
pub fn delta_p_tot(exact: &ProbabilitySeries, noisy: &ProbabilitySeries) -> Result<f64> {
    mean_abs_difference(exact, noisy)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorSummary {
    pub delta_p_e: f64,
    pub delta_p_tot: f64,
    /// `ΔP_tot − ΔP_e`; may be negative.
    pub delta_p_a: f64,
    /// `(1/M) Σ |P_b − P_c|`, the algorithmic error measured directly.
    pub delta_p_a_direct: f64,
    pub m: usize,
}

impl ErrorSummary {
    pub fn from_series(
        exact: &ProbabilitySeries,
        ideal: &ProbabilitySeries,
        noisy: &ProbabilitySeries,
    ) -> Result<Self> {
        let e = delta_p_e(ideal, noisy)?;
        let tot = delta_p_tot(exact, noisy)?;
        Ok(Self {
            delta_p_e: e,
            delta_p_tot: tot,
            delta_p_a: tot - e,
            delta_p_a_direct: mean_abs_difference(exact, ideal)?,
            m: exact.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(label: SeriesLabel, v: &[f64]) -> ProbabilitySeries {
        ProbabilitySeries::new(label, v.iter().enumerate().map(|(j, &x)| (j as f64, x)).collect()).unwrap()
    }

    #[test]
    fn identical_and_offset() {
        let a = series(SeriesLabel::QubitIdeal, &[0.1, 0.5, 0.9]);
        assert_eq!(delta_p_e(&a, &a).unwrap(), 0.0);
        let b = series(SeriesLabel::QubitNoisy, &[0.2, 0.6, 1.0]);
        assert!((delta_p_e(&a, &b).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn summary_identity() {
        let exact = series(SeriesLabel::BosonAnalytic, &[1.0, 0.4, 0.2]);
        let ideal = series(SeriesLabel::QubitIdeal, &[1.0, 0.5, 0.1]);
        let noisy = series(SeriesLabel::QubitNoisy, &[0.9, 0.5, 0.2]);
        let s = ErrorSummary::from_series(&exact, &ideal, &noisy).unwrap();
        assert!((s.delta_p_a - (s.delta_p_tot - s.delta_p_e)).abs() < 1e-15);
        assert_eq!(s.m, 3);
        // Noiseless: ΔP_tot equals the direct algorithmic error.
        let s0 = ErrorSummary::from_series(&exact, &ideal, &ideal).unwrap();
        assert_eq!(s0.delta_p_e, 0.0);
        assert!((s0.delta_p_tot - s0.delta_p_a_direct).abs() < 1e-15);
    }

    #[test]
    fn grid_mismatch_and_validation() {
        let a = series(SeriesLabel::QubitIdeal, &[0.1, 0.5]);
        let b = series(SeriesLabel::QubitNoisy, &[0.1, 0.5, 0.2]);
        assert!(delta_p_e(&a, &b).is_err());
        let c = ProbabilitySeries::new(SeriesLabel::QubitNoisy, vec![(0.0, 0.1), (0.5, 0.1)]).unwrap();
        let d = ProbabilitySeries::new(SeriesLabel::QubitNoisy, vec![(0.0, 0.1), (0.6, 0.1)]).unwrap();
        assert!(delta_p_e(&c, &d).is_err());
        assert!(ProbabilitySeries::new(SeriesLabel::QubitIdeal, vec![(1.0, 0.1), (1.0, 0.2)]).is_err());
        assert!(ProbabilitySeries::new(SeriesLabel::QubitIdeal, vec![(1.0, 1.2)]).is_err());
    }
}
