//! Device calibration tables.
//!
//! File format: a CSV block with header
//! `qubit,readout_error,sx_error,cz_error,t1_us,t2_us` (column order free,
//! `cz_error` may be empty), optionally followed by a `[durations]` section
//! of `key = value` lines setting `sx_duration_us`, `cz_duration_us` and
//! `measure_duration_us`. Lines starting with `#` are comments.
//!
//! Row `i` of the table backs circuit qubit `i`.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::error::{Error, Result};

const COLUMNS: [&str; 6] = ["qubit", "readout_error", "sx_error", "cz_error", "t1_us", "t2_us"];

#[derive(Clone, Debug, PartialEq)]
pub struct RowDiagnostic {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for RowDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("no qubit rows")]
    NoRows,
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("invalid calibration rows: {}", join(.0))]
    InvalidRows(Vec<RowDiagnostic>),
    #[error("durations section, {0}")]
    Durations(RowDiagnostic),
    #[error("malformed CSV: {0}")]
    Csv(String),
}

fn join(rows: &[RowDiagnostic]) -> String {
    rows.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Clone, Debug, PartialEq)]
pub struct QubitCalibration {
    /// Label as written in the file, e.g. `81` or `O: 7`.
    pub label: String,
    pub readout_error: f64,
    pub sx_error: f64,
    /// Two-qubit error of the CZ this qubit participates in, if any.
    pub cz_error: Option<f64>,
    pub t1_us: f64,
    pub t2_us: f64,
}

impl QubitCalibration {
    /// Noise-free qubit with infinite coherence.
    pub fn ideal(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            readout_error: 0.0,
            sx_error: 0.0,
            cz_error: None,
            t1_us: f64::INFINITY,
            t2_us: f64::INFINITY,
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        let prob = |name: &str, p: f64| {
            if (0.0..=0.5).contains(&p) {
                Ok(())
            } else {
                Err(format!("{name} = {p} is outside [0, 0.5]"))
            }
        };
        prob("readout_error", self.readout_error)?;
        prob("sx_error", self.sx_error)?;
        if let Some(cz) = self.cz_error {
            prob("cz_error", cz)?;
        }
        if self.t1_us.is_nan() || self.t1_us <= 0.0 || self.t2_us.is_nan() || self.t2_us <= 0.0 {
            return Err(format!(
                "t1_us = {} and t2_us = {} must be positive",
                self.t1_us, self.t2_us
            ));
        }
        if self.t2_us > 2.0 * self.t1_us {
            return Err(format!(
                "t2_us = {} exceeds 2·t1_us = {}",
                self.t2_us,
                2.0 * self.t1_us
            ));
        }
        Ok(())
    }
}

/// Gate and measurement durations in microseconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateDurations {
    pub sx_us: f64,
    pub cz_us: f64,
    pub measure_us: f64,
}

impl Default for GateDurations {
    fn default() -> Self {
        Self {
            sx_us: 0.032,
            cz_us: 0.1,
            measure_us: 1.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationTable {
    qubits: Vec<QubitCalibration>,
    durations: GateDurations,
}

impl CalibrationTable {
    pub fn new(qubits: Vec<QubitCalibration>, durations: GateDurations) -> Result<Self> {
        if qubits.is_empty() {
            return Err(CalibrationError::NoRows.into());
        }
        let bad: Vec<RowDiagnostic> = qubits
            .iter()
            .enumerate()
            .filter_map(|(i, q)| {
                q.check().err().map(|message| RowDiagnostic {
                    line: i + 1,
                    message: format!("qubit {}: {message}", q.label),
                })
            })
            .collect();
        if !bad.is_empty() {
            return Err(CalibrationError::InvalidRows(bad).into());
        }
        check_durations(&durations).map_err(|message| {
            CalibrationError::Durations(RowDiagnostic { line: 0, message })
        })?;
        Ok(Self { qubits, durations })
    }

    /// All-zero error rates and infinite coherence on `n` qubits.
    pub fn noiseless(n: usize) -> Self {
        Self {
            qubits: (0..n).map(|i| QubitCalibration::ideal(i.to_string())).collect(),
            durations: GateDurations::default(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(parse_table(text)?)
    }

    pub fn qubits(&self) -> &[QubitCalibration] {
        &self.qubits
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn durations(&self) -> GateDurations {
        self.durations
    }

    pub fn with_durations(mut self, durations: GateDurations) -> Result<Self> {
        check_durations(&durations).map_err(|message| {
            Error::from(CalibrationError::Durations(RowDiagnostic { line: 0, message }))
        })?;
        self.durations = durations;
        Ok(self)
    }

    /// Calibration of circuit qubit `q`.
    pub fn qubit(&self, q: usize) -> Result<&QubitCalibration> {
        self.qubits.get(q).ok_or(Error::UnknownQubit(q))
    }

    /// CZ error for the pair `(a, b)`: the value recorded on whichever row
    /// carries one, the larger if both do, zero if neither.
    pub fn cz_error(&self, a: usize, b: usize) -> Result<f64> {
        let (qa, qb) = (self.qubit(a)?, self.qubit(b)?);
        Ok(match (qa.cz_error, qb.cz_error) {
            (Some(x), Some(y)) => x.max(y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => 0.0,
        })
    }

    /// Sub-table with the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let qubits = rows
            .iter()
            .map(|&r| self.qubit(r).cloned())
            .collect::<Result<Vec<_>>>()?;
        Self::new(qubits, self.durations)
    }

    /// The `n` rows with the lowest readout error (stable for ties).
    pub fn best_by_readout(&self, n: usize) -> Result<Self> {
        if n > self.len() {
            return Err(Error::invalid(format!(
                "calibration table has {} qubits, {n} requested",
                self.len()
            )));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&i, &j| {
            self.qubits[i]
                .readout_error
                .total_cmp(&self.qubits[j].readout_error)
        });
        order.truncate(n);
        self.select(&order)
    }
}

fn check_durations(d: &GateDurations) -> std::result::Result<(), String> {
    for (name, v) in [
        ("sx_duration_us", d.sx_us),
        ("cz_duration_us", d.cz_us),
        ("measure_duration_us", d.measure_us),
    ] {
        if v <= 0.0 || !v.is_finite() {
            return Err(format!("{name} = {v} must be positive"));
        }
    }
    Ok(())
}

fn parse_table(text: &str) -> std::result::Result<CalibrationTable, CalibrationError> {
    // Split at the first `[section]` line.
    let mut table_end = text.len();
    let mut section_line = 0;
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if line.trim_start().starts_with('[') {
            table_end = offset;
            section_line = i + 1;
            break;
        }
        offset += line.len();
    }
    let (table_text, rest) = text.split_at(table_end);

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(table_text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CalibrationError::Csv(e.to_string()))?
        .clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(CalibrationError::NoRows);
    }
    let mut index = [0usize; 6];
    for (slot, col) in index.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == col)
            .ok_or(CalibrationError::MissingColumn(col))?;
    }

    let mut qubits = Vec::new();
    let mut bad = Vec::new();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                bad.push(RowDiagnostic {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        match parse_row(&record, &index).and_then(|q| q.check().map(|_| q)) {
            Ok(q) => qubits.push(q),
            Err(message) => bad.push(RowDiagnostic { line, message }),
        }
    }
    if !bad.is_empty() {
        return Err(CalibrationError::InvalidRows(bad));
    }
    if qubits.is_empty() {
        return Err(CalibrationError::NoRows);
    }

    let durations = parse_durations(rest, section_line)?;
    Ok(CalibrationTable { qubits, durations })
}

fn parse_row(record: &csv::StringRecord, index: &[usize; 6]) -> std::result::Result<QubitCalibration, String> {
    let field = |k: usize| record.get(index[k]).unwrap_or("");
    let num = |k: usize| -> std::result::Result<f64, String> {
        let raw = field(k);
        raw.parse::<f64>()
            .map_err(|_| format!("column `{}`: `{raw}` is not a number", COLUMNS[k]))
    };
    let label = field(0).to_string();
    if label.is_empty() {
        return Err("empty qubit label".into());
    }
    let cz_error = match field(3) {
        "" => None,
        _ => Some(num(3)?),
    };
    Ok(QubitCalibration {
        label,
        readout_error: num(1)?,
        sx_error: num(2)?,
        cz_error,
        t1_us: num(4)?,
        t2_us: num(5)?,
    })
}

fn parse_durations(text: &str, first_line: usize) -> std::result::Result<GateDurations, CalibrationError> {
    let mut d = GateDurations::default();
    let err = |line: usize, message: String| CalibrationError::Durations(RowDiagnostic { line, message });
    let mut in_durations = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = first_line + i;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            if line != "[durations]" {
                return Err(err(line_no, format!("unknown section {line}")));
            }
            in_durations = true;
            continue;
        }
        if !in_durations {
            return Err(err(line_no, "entry outside a section".into()));
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, got `{line}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| err(line_no, format!("`{}` is not a number", value.trim())))?;
        match key.trim() {
            "sx_duration_us" => d.sx_us = value,
            "cz_duration_us" => d.cz_us = value,
            "measure_duration_us" => d.measure_us = value,
            other => return Err(err(line_no, format!("unknown key `{other}`"))),
        }
    }
    check_durations(&d).map_err(|m| err(first_line, m))?;
    Ok(d)
}
