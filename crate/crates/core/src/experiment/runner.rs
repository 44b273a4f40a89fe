//! Experiment drivers. Each `run_*` function computes one data set in
//! memory; [`run_experiment`] wires them to a config and writes CSVs.
//!
//! Time points and sweep members run in parallel. Every noisy evaluation
//! draws from its own seed `derive_seed(seed, member << 20 | j)`, so output
//! does not depend on scheduling.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiment::config::{CalibrationSource, ExperimentConfig, LayoutPool, ModelParams, NoiseMethod, TimeGrid};
use crate::experiment::metrics::{ErrorSummary, ProbabilitySeries, SeriesLabel};
use crate::experiment::table::{Cell, CsvTable};
use crate::jc::{
    build_cz_benchmark_circuit, build_trotter_circuit, exact_evolution, ideal_survival, initial_state_preparation,
    survival_probability, JcParams, TrotterPlan,
};
use crate::noise::{density_matrix_reference, poisson_binomial, product_state_reference, run_noisy, CalibrationTable};
use crate::oscillator::{build_dho_circuit, excitation_histogram, fock_probability, DhoParams};
use crate::rng::derive_seed;
use crate::sim::{transpile_to_native, Circuit};
use crate::synth::{
    enumerate_four_cz_layouts, layout_circuit, optimize_layout, optimize_layout_from, select_best, six_cz_layout,
    SynthLayout, SynthOptions, SynthResult,
};

/// How the noisy column is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub method: NoiseMethod,
    pub shots: u64,
    pub seed: u64,
}

fn point_seed(seed: u64, member: usize, j: usize) -> u64 {
    derive_seed(seed, ((member as u64) << 20) | j as u64)
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DhoRow {
    pub t: f64,
    pub n: usize,
    pub p_b: f64,
    pub p_c: f64,
    pub p_q: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DhoRun {
    pub n_qubits: usize,
    pub times: Vec<f64>,
    /// Time-major, `n = 0..=max_excitation` within each time.
    pub rows: Vec<DhoRow>,
    /// One summary per excitation number.
    pub summaries: Vec<ErrorSummary>,
}

impl DhoRun {
    fn series(&self, n: usize) -> Result<[ProbabilitySeries; 3]> {
        let pick = |label, f: fn(&DhoRow) -> f64| {
            ProbabilitySeries::new(
                label,
                self.rows.iter().filter(|r| r.n == n).map(|r| (r.t, f(r))).collect(),
            )
        };
        Ok([
            pick(SeriesLabel::BosonAnalytic, |r| r.p_b)?,
            pick(SeriesLabel::QubitIdeal, |r| r.p_c)?,
            pick(SeriesLabel::QubitNoisy, |r| r.p_q)?,
        ])
    }
}

/// Excitation distribution read out from the ensemble circuit under `table`.
pub fn dho_noisy_distribution(circuit: &Circuit, table: &CalibrationTable, sampling: Sampling) -> Result<Vec<f64>> {
    let n = circuit.n_qubits();
    match sampling.method {
        NoiseMethod::Exact => Ok(poisson_binomial(&product_state_reference(circuit, table)?)),
        NoiseMethod::Sampled => {
            let counts = run_noisy(circuit, table, sampling.shots, sampling.seed)?;
            let hist = excitation_histogram(&counts);
            Ok((0..=n).map(|k| hist.get(&k).copied().unwrap_or(0.0)).collect())
        }
    }
}

/// `P_b`, `P_c`, `P_q` for `n ≤ max_excitation` on `times`. `table` must
/// have one row per qubit.
pub fn run_dho(
    p: &DhoParams,
    times: &[f64],
    max_excitation: usize,
    table: &CalibrationTable,
    sampling: Sampling,
) -> Result<DhoRun> {
    if table.len() != p.n_qubits {
        return Err(Error::invalid(format!(
            "calibration has {} rows for {} qubits",
            table.len(),
            p.n_qubits
        )));
    }
    if max_excitation > p.n_qubits {
        return Err(Error::invalid(format!(
            "max_excitation {max_excitation} exceeds the {} qubits of the ensemble",
            p.n_qubits
        )));
    }
    let noiseless = CalibrationTable::noiseless(p.n_qubits);
    let per_time: Vec<Vec<DhoRow>> = times
        .par_iter()
        .enumerate()
        .map(|(j, &t)| -> Result<Vec<DhoRow>> {
            let circuit = build_dho_circuit(p, t)?;
            let ideal = poisson_binomial(&product_state_reference(&circuit, &noiseless)?);
            let noisy = dho_noisy_distribution(
                &circuit,
                table,
                Sampling { seed: point_seed(sampling.seed, p.n_qubits, j), ..sampling },
            )?;
            (0..=max_excitation)
                .map(|n| {
                    Ok(DhoRow {
                        t,
                        n,
                        p_b: clamp_prob(fock_probability(p, t, n)?),
                        p_c: clamp_prob(ideal[n]),
                        p_q: clamp_prob(noisy[n]),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut run = DhoRun {
        n_qubits: p.n_qubits,
        times: times.to_vec(),
        rows: per_time.into_iter().flatten().collect(),
        summaries: Vec::new(),
    };
    run.summaries = (0..=max_excitation)
        .map(|n| {
            let [b, c, q] = run.series(n)?;
            ErrorSummary::from_series(&b, &c, &q)
        })
        .collect::<Result<_>>()?;
    Ok(run)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JcRow {
    pub t: f64,
    pub p_exact: f64,
    pub p_ideal: f64,
    pub p_noisy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JcRun {
    pub rows: Vec<JcRow>,
    pub summary: ErrorSummary,
}

impl JcRun {
    fn from_rows(rows: Vec<JcRow>) -> Result<Self> {
        let s = |label, f: fn(&JcRow) -> f64| ProbabilitySeries::new(label, rows.iter().map(|r| (r.t, f(r))).collect());
        let summary = ErrorSummary::from_series(
            &s(SeriesLabel::BosonAnalytic, |r| r.p_exact)?,
            &s(SeriesLabel::QubitIdeal, |r| r.p_ideal)?,
            &s(SeriesLabel::QubitNoisy, |r| r.p_noisy)?,
        )?;
        Ok(Self { rows, summary })
    }
}

/// Survival of `|0,↑_τ⟩` under the exact rotating-frame evolution.
pub fn jc_exact_survival(p: &JcParams, t: f64) -> Result<f64> {
    let u = exact_evolution(p, t)?;
    let i = p.initial_index();
    Ok(u.matrix()[(i, i)].norm_sqr())
}

/// Native circuit for preparation followed by `evolution`.
pub fn jc_native_program(p: &JcParams, evolution: &Circuit) -> Result<Circuit> {
    Ok(transpile_to_native(&initial_state_preparation(p).then(evolution)?))
}

/// Survival read out from the noisy device model.
pub fn jc_noisy_survival(p: &JcParams, evolution: &Circuit, table: &CalibrationTable, sampling: Sampling) -> Result<f64> {
    let program = jc_native_program(p, evolution)?;
    match sampling.method {
        NoiseMethod::Exact => Ok(density_matrix_reference(&program, table)?[p.initial_index()]),
        NoiseMethod::Sampled => survival_probability(&run_noisy(&program, table, sampling.shots, sampling.seed)?),
    }
}

fn jc_row(p: &JcParams, t: f64, evolution: &Circuit, table: &CalibrationTable, sampling: Sampling) -> Result<JcRow> {
    Ok(JcRow {
        t,
        p_exact: clamp_prob(jc_exact_survival(p, t)?),
        p_ideal: clamp_prob(ideal_survival(p, evolution)?),
        p_noisy: clamp_prob(jc_noisy_survival(p, evolution, table, sampling)?),
    })
}

fn check_jc_table(table: &CalibrationTable) -> Result<CalibrationTable> {
    if table.len() < 3 {
        return Err(Error::invalid(format!(
            "JC circuits need 3 calibration rows (two cavity qubits, then tau), got {}",
            table.len()
        )));
    }
    table.select(&[0, 1, 2])
}

/// Trotterized JC survival on `times`. `member` separates seed streams of
/// sweep members.
pub fn run_jc_trotter(
    p: &JcParams,
    plan: TrotterPlan,
    times: &[f64],
    table: &CalibrationTable,
    sampling: Sampling,
    member: usize,
) -> Result<JcRun> {
    let table = check_jc_table(table)?;
    let rows = times
        .par_iter()
        .enumerate()
        .map(|(j, &t)| {
            let evolution = build_trotter_circuit(p, t, plan)?;
            jc_row(p, t, &evolution, &table, Sampling { seed: point_seed(sampling.seed, member, j), ..sampling })
        })
        .collect::<Result<Vec<_>>>()?;
    JcRun::from_rows(rows)
}

pub fn layout_pool(pool: LayoutPool) -> Vec<SynthLayout> {
    match pool {
        LayoutPool::SixCz => vec![six_cz_layout()],
        LayoutPool::FourCz => enumerate_four_cz_layouts(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthRun {
    pub run: JcRun,
    /// Winning layout per time point.
    pub choices: Vec<SynthResult>,
}

/// Synthesized-unitary JC survival: at each time the best layout of `pool`
/// is used. With `warm_start`, each layout's search starts from its angles
/// at the previous time point and time points run in order.
#[allow(clippy::too_many_arguments)]
pub fn run_jc_synth(
    p: &JcParams,
    pool: &[SynthLayout],
    times: &[f64],
    opts: &SynthOptions,
    warm_start: bool,
    table: &CalibrationTable,
    sampling: Sampling,
    member: usize,
) -> Result<SynthRun> {
    if pool.is_empty() {
        return Err(Error::invalid("layout pool is empty"));
    }
    let table = check_jc_table(table)?;
    let opts_at = |j: usize| SynthOptions { seed: derive_seed(opts.seed, j as u64), ..*opts };
    let choices: Vec<SynthResult> = if warm_start {
        let mut prev: Vec<Option<Vec<[f64; 3]>>> = vec![None; pool.len()];
        let mut out = Vec::with_capacity(times.len());
        for (j, &t) in times.iter().enumerate() {
            let target = exact_evolution(p, t)?;
            let mut results = Vec::with_capacity(pool.len());
            for (k, layout) in pool.iter().enumerate() {
                let r = match &prev[k] {
                    Some(start) => optimize_layout_from(layout, &target, start, &opts_at(j))?,
                    None => optimize_layout(layout, &target, &opts_at(j))?,
                };
                prev[k] = Some(r.angles.clone());
                results.push(r);
            }
            out.push(select_best(results).expect("non-empty pool"));
        }
        out
    } else {
        times
            .par_iter()
            .enumerate()
            .map(|(j, &t)| {
                let target = exact_evolution(p, t)?;
                let results = pool
                    .iter()
                    .map(|l| optimize_layout(l, &target, &opts_at(j)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(select_best(results).expect("non-empty pool"))
            })
            .collect::<Result<_>>()?
    };
    let rows = times
        .par_iter()
        .zip(&choices)
        .enumerate()
        .map(|(j, (&t, choice))| {
            let evolution = layout_circuit(&choice.layout, &choice.angles)?;
            jc_row(p, t, &evolution, &table, Sampling { seed: point_seed(sampling.seed, member, j), ..sampling })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SynthRun { run: JcRun::from_rows(rows)?, choices })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CzRow {
    pub repetitions: usize,
    pub cz_total: usize,
    pub p_ideal: f64,
    pub p_noisy: f64,
    pub delta_p_e: f64,
}

/// Survival after `repetitions × n_cz` bare CZ gates, starting from
/// `|0,↑_τ⟩`.
pub fn run_cz_benchmark(
    n_cz: usize,
    repetitions: &[usize],
    table: &CalibrationTable,
    sampling: Sampling,
) -> Result<Vec<CzRow>> {
    let table = check_jc_table(table)?;
    let p = JcParams::resonant(0.1)?;
    repetitions
        .par_iter()
        .enumerate()
        .map(|(j, &k)| {
            let evolution = build_cz_benchmark_circuit(n_cz, k)?;
            let p_ideal = clamp_prob(ideal_survival(&p, &evolution)?);
            let p_noisy = clamp_prob(jc_noisy_survival(
                &p,
                &evolution,
                &table,
                Sampling { seed: point_seed(sampling.seed, 0, j), ..sampling },
            )?);
            Ok(CzRow {
                repetitions: k,
                cz_total: n_cz * k,
                p_ideal,
                p_noisy,
                delta_p_e: (p_ideal - p_noisy).abs(),
            })
        })
        .collect()
}

/// Files written by one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
}

struct LoadedCalibration {
    table: Option<CalibrationTable>,
    comment: String,
}

fn load_calibration(cfg: &ExperimentConfig) -> Result<LoadedCalibration> {
    match &cfg.calibration {
        CalibrationSource::None => Ok(LoadedCalibration { table: None, comment: "none".into() }),
        CalibrationSource::File(path) => {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|_| Error::invalid(format!("calibration file {} is not UTF-8", path.display())))?;
            let table = CalibrationTable::parse(&text)?;
            let table = table.clone().with_durations(cfg.durations(table.durations()))?;
            let name = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(LoadedCalibration {
                table: Some(table),
                comment: format!("{name} sha256:{}", hex::encode(Sha256::digest(&bytes))),
            })
        }
    }
}

fn header(cfg: &ExperimentConfig, cal: &LoadedCalibration, extra: &[String]) -> Vec<String> {
    let method = match cfg.noise_method {
        NoiseMethod::Sampled => "sampled",
        NoiseMethod::Exact => "exact",
    };
    let mut h = vec![
        format!("hpsim {}", cfg.kind.as_str()),
        format!("config_sha256: {}", cfg.digest()),
        format!("seed: {}", cfg.seed),
        format!("shots: {}", cfg.shots),
        format!("noise_method: {method}"),
        format!("calibration: {}", cal.comment),
    ];
    h.extend_from_slice(extra);
    h
}

fn summary_cells(s: &ErrorSummary) -> Vec<Cell> {
    vec![
        s.delta_p_e.into(),
        s.delta_p_tot.into(),
        s.delta_p_a.into(),
        s.delta_p_a_direct.into(),
        s.m.into(),
    ]
}

const SUMMARY_COLUMNS: [&str; 5] = ["delta_p_e", "delta_p_tot", "delta_p_a", "delta_p_a_direct", "M"];

fn with_summary_columns(lead: &[&'static str]) -> Vec<&'static str> {
    lead.iter().copied().chain(SUMMARY_COLUMNS).collect()
}

fn jc_table(comments: Vec<String>, rows: &[JcRow]) -> CsvTable {
    let mut t = CsvTable::new(comments, &["t", "P_exact", "P_ideal", "P_noisy"]);
    for r in rows {
        t.push(vec![r.t.into(), r.p_exact.into(), r.p_ideal.into(), r.p_noisy.into()]);
    }
    t
}

struct Writer<'a> {
    dir: &'a Path,
    report: RunReport,
}

impl Writer<'_> {
    fn emit(&mut self, name: &str, table: &CsvTable) -> Result<()> {
        let path = self.dir.join(name);
        table.write(&path)?;
        self.report.files.push(path);
        Ok(())
    }
}

/// Runs `cfg` and writes its CSVs into `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    let cal = load_calibration(cfg)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let mut w = Writer { dir: &cfg.out, report: RunReport::default() };
    let sampling = Sampling { method: cfg.noise_method, shots: cfg.shots, seed: cfg.seed };
    let grid: TimeGrid = cfg.grid;

    match &cfg.model {
        ModelParams::Dho { delta, drive, n_qubits, max_excitation } => {
            let runs = n_qubits
                .par_iter()
                .map(|&n| {
                    let p = DhoParams::new(*delta, *drive, n)?;
                    let table = match &cal.table {
                        None => CalibrationTable::noiseless(n),
                        Some(t) => t.best_by_readout(n)?,
                    };
                    let run = run_dho(&p, &grid.times(p.period()), *max_excitation, &table, sampling)?;
                    let labels: Vec<&str> = table.qubits().iter().map(|q| q.label.as_str()).collect();
                    Ok((run, labels.join(" ")))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut summary = CsvTable::new(
                header(cfg, &cal, &[format!("drive: {drive:?}"), format!("delta: {delta:?}")]),
                &with_summary_columns(&["N", "n"]),
            );
            for (run, labels) in &runs {
                let mut t = CsvTable::new(
                    header(cfg, &cal, &[format!("N: {}", run.n_qubits), format!("qubit_rows: {labels}")]),
                    &["t", "n", "P_b", "P_c", "P_q"],
                );
                for r in &run.rows {
                    t.push(vec![r.t.into(), r.n.into(), r.p_b.into(), r.p_c.into(), r.p_q.into()]);
                }
                w.emit(&format!("dho_N{}.csv", run.n_qubits), &t)?;
                for (n, s) in run.summaries.iter().enumerate() {
                    let mut row = vec![run.n_qubits.into(), n.into()];
                    row.extend(summary_cells(s));
                    summary.push(row);
                }
            }
            w.emit("dho_summary.csv", &summary)?;
        }
        ModelParams::JcTrotter { model, steps, merge_half_steps } => {
            let p = model.params()?;
            let table = cal.table.clone().unwrap_or_else(|| CalibrationTable::noiseless(3));
            let times = grid.times(p.period());
            let runs = steps
                .par_iter()
                .map(|&k| {
                    let plan = TrotterPlan { merge_half_steps: *merge_half_steps, ..TrotterPlan::new(k)? };
                    Ok((plan, run_jc_trotter(&p, plan, &times, &table, sampling, k)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut summary = CsvTable::new(header(cfg, &cal, &[]), &with_summary_columns(&["K_T", "cz_count"]));
            for (plan, run) in &runs {
                let t = jc_table(header(cfg, &cal, &[format!("K_T: {}", plan.steps)]), &run.rows);
                w.emit(&format!("jc_trotter_K{}.csv", plan.steps), &t)?;
                let mut row = vec![plan.steps.into(), plan.cz_count().into()];
                row.extend(summary_cells(&run.summary));
                summary.push(row);
            }
            w.emit("jc_trotter_summary.csv", &summary)?;
        }
        ModelParams::JcSynth { model, pools, synth, warm_start } => {
            let p = model.params()?;
            let table = cal.table.clone().unwrap_or_else(|| CalibrationTable::noiseless(3));
            let times = grid.times(p.period());
            let mut summary = CsvTable::new(header(cfg, &cal, &[]), &with_summary_columns(&["layouts", "max_infidelity"]));
            for (member, pool) in pools.iter().enumerate() {
                let r = run_jc_synth(&p, &layout_pool(*pool), &times, synth, *warm_start, &table, sampling, member)?;
                let mut t = CsvTable::new(
                    header(cfg, &cal, &[format!("layouts: {}", pool.as_str())]),
                    &["t", "P_exact", "P_ideal", "P_noisy", "infidelity", "layout"],
                );
                for (row, choice) in r.run.rows.iter().zip(&r.choices) {
                    t.push(vec![
                        row.t.into(),
                        row.p_exact.into(),
                        row.p_ideal.into(),
                        row.p_noisy.into(),
                        (1.0 - choice.fidelity).max(0.0).into(),
                        choice.layout.name.as_str().into(),
                    ]);
                }
                w.emit(&format!("jc_synth_{}.csv", pool.as_str()), &t)?;
                let worst = r.choices.iter().map(|c| (1.0 - c.fidelity).max(0.0)).fold(0.0, f64::max);
                let mut row = vec![pool.as_str().into(), worst.into()];
                row.extend(summary_cells(&r.run.summary));
                summary.push(row);
            }
            w.emit("jc_synth_summary.csv", &summary)?;
        }
        ModelParams::CzBenchmark { n_cz, repetitions } => {
            let table = cal.table.clone().unwrap_or_else(|| CalibrationTable::noiseless(3));
            let rows = run_cz_benchmark(*n_cz, repetitions, &table, sampling)?;
            let mut t = CsvTable::new(
                header(cfg, &cal, &[format!("n_cz: {n_cz}")]),
                &["K_T", "cz_count", "P_ideal", "P_noisy", "delta_p_e"],
            );
            for r in &rows {
                t.push(vec![r.repetitions.into(), r.cz_total.into(), r.p_ideal.into(), r.p_noisy.into(), r.delta_p_e.into()]);
            }
            w.emit("cz_benchmark.csv", &t)?;
        }
    }
    Ok(w.report)
}
