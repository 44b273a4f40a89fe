//! Multi-start L-BFGS over the U3 angles of a layout.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use super::layout::{layout_circuit, SynthLayout};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};
use crate::sim::gate::{u3_matrix, Mat2, C64};
use crate::sim::linalg::embed_product;
use crate::sim::{circuit_unitary, Gate, UnitaryMatrix};

/// `|Tr(U_f† U_T)/d|²`.
pub fn synthesis_fidelity(u_f: &UnitaryMatrix, u_t: &UnitaryMatrix) -> Result<f64> {
    if u_f.dim() != u_t.dim() {
        return Err(Error::DimensionMismatch {
            left: u_f.dim(),
            right: u_t.dim(),
        });
    }
    let tr = (u_f.matrix().adjoint() * u_t.matrix()).trace();
    Ok((tr / u_f.dim() as f64).norm_sqr().min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub cost_tolerance: f64,
    /// Restarts stop once a run reaches this cost.
    pub target_cost: f64,
    /// L-BFGS history length.
    pub memory: usize,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iterations: 2000,
            gradient_tolerance: 1e-10,
            cost_tolerance: 1e-14,
            target_cost: 1e-10,
            memory: 10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthResult {
    pub layout: SynthLayout,
    pub angles: Vec<[f64; 3]>,
    pub fidelity: f64,
    pub cost: f64,
    pub restarts_used: usize,
    /// Whether the best run reached `target_cost`.
    pub converged: bool,
}

impl SynthResult {
    pub fn recompute_fidelity(&self, u_t: &UnitaryMatrix) -> Result<f64> {
        let u_f = circuit_unitary(&layout_circuit(&self.layout, &self.angles)?)?;
        synthesis_fidelity(&u_f, u_t)
    }
}

enum Op {
    Slot(usize),
    Fixed(DMatrix<C64>),
}

/// `C = 1 − F` for a layout and its analytic gradient.
pub struct SynthCost {
    n_qubits: usize,
    dim: usize,
    slot_qubits: Vec<usize>,
    ops: Vec<Op>,
    target_adj: DMatrix<C64>,
}

fn u3_derivatives(a: f64, b: f64, g: f64) -> [Mat2; 3] {
    let (s, c) = (b / 2.0).sin_cos();
    let ea = C64::from_polar(1.0, a);
    let eg = C64::from_polar(1.0, g);
    let eag = C64::from_polar(1.0, a + g);
    let i = C64::i();
    let z = C64::new(0.0, 0.0);
    [
        [[z, z], [i * ea * s, i * eag * c]],
        [
            [C64::new(-s / 2.0, 0.0), -eg * (c / 2.0)],
            [ea * (c / 2.0), -eag * (s / 2.0)],
        ],
        [[z, -i * eg * s], [z, i * eag * c]],
    ]
}

fn mat2_to_dense(m: &Mat2) -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
}

impl SynthCost {
    pub fn new(layout: &SynthLayout, target: &UnitaryMatrix) -> Result<Self> {
        let n = layout.n_qubits;
        let dim = 1usize << n;
        if target.dim() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: target.dim() });
        }
        // Build the op list from a zero-angle circuit so slot order matches
        // `layout_circuit`.
        let skeleton = layout_circuit(layout, &vec![[0.0; 3]; layout.u3_slots.len()])?;
        let mut ops = Vec::new();
        let mut slot_qubits = Vec::new();
        for g in skeleton.gates() {
            match *g {
                Gate::U3 { qubit, .. } => {
                    ops.push(Op::Slot(slot_qubits.len()));
                    slot_qubits.push(qubit);
                }
                _ => ops.push(Op::Fixed(g.matrix_embedded(n))),
            }
        }
        Ok(Self {
            n_qubits: n,
            dim,
            slot_qubits,
            ops,
            target_adj: target.matrix().adjoint(),
        })
    }

    pub fn n_parameters(&self) -> usize {
        3 * self.slot_qubits.len()
    }

    fn op_matrix(&self, op: &Op, x: &[f64]) -> DMatrix<C64> {
        match op {
            Op::Fixed(m) => m.clone(),
            Op::Slot(k) => {
                let m = u3_matrix(x[3 * k], x[3 * k + 1], x[3 * k + 2]);
                embed_product(self.n_qubits, &[(self.slot_qubits[*k], mat2_to_dense(&m))])
            }
        }
    }

    /// Normalized overlap `Tr(U_T† U_f)/d`.
    fn overlap(&self, x: &[f64]) -> C64 {
        let u = self
            .ops
            .iter()
            .fold(DMatrix::identity(self.dim, self.dim), |acc, op| self.op_matrix(op, x) * acc);
        (&self.target_adj * u).trace() / self.dim as f64
    }

    pub fn cost(&self, x: &[f64]) -> f64 {
        (1.0 - self.overlap(x).norm_sqr()).max(0.0)
    }

    /// Cost and gradient. With `U_f = S·G_k·P`, the slot derivative of the
    /// overlap is `Tr(P U_T† S ∂G_k)/d`, evaluated through the partial trace
    /// of `P U_T† S` onto the slot's qubit.
    pub fn cost_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mats: Vec<_> = self.ops.iter().map(|op| self.op_matrix(op, x)).collect();
        let len = mats.len();
        let mut prefix = Vec::with_capacity(len + 1);
        prefix.push(DMatrix::<C64>::identity(self.dim, self.dim));
        for m in &mats {
            let next = m * prefix.last().expect("non-empty");
            prefix.push(next);
        }
        let mut suffix = vec![DMatrix::<C64>::identity(self.dim, self.dim); len + 1];
        for k in (0..len).rev() {
            suffix[k] = &suffix[k + 1] * &mats[k];
        }
        let z = (&self.target_adj * &prefix[len]).trace() / self.dim as f64;
        let mut grad = vec![0.0; x.len()];
        for (k, op) in self.ops.iter().enumerate() {
            let Op::Slot(s) = *op else { continue };
            let m = &prefix[k] * &self.target_adj * &suffix[k + 1];
            let q = self.slot_qubits[s];
            let bit = 1usize << q;
            // r[b][a] = Σ_rest M[(rest,b),(rest,a)]
            let mut r = [[C64::new(0.0, 0.0); 2]; 2];
            for i in 0..self.dim {
                if i & bit != 0 {
                    continue;
                }
                for b in 0..2 {
                    for a in 0..2 {
                        r[b][a] += m[(i | (b * bit), i | (a * bit))];
                    }
                }
            }
            let d = u3_derivatives(x[3 * s], x[3 * s + 1], x[3 * s + 2]);
            for (j, dm) in d.iter().enumerate() {
                let mut dz = C64::new(0.0, 0.0);
                for a in 0..2 {
                    for b in 0..2 {
                        dz += r[b][a] * dm[a][b];
                    }
                }
                dz /= self.dim as f64;
                grad[3 * s + j] = -2.0 * (z.conj() * dz).re;
            }
        }
        ((1.0 - z.norm_sqr()).max(0.0), grad)
    }
}

trait EmbeddedMatrix {
    fn matrix_embedded(&self, n: usize) -> DMatrix<C64>;
}

impl EmbeddedMatrix for Gate {
    fn matrix_embedded(&self, n: usize) -> DMatrix<C64> {
        let mut c = crate::sim::Circuit::new(n);
        c.push(*self).expect("gate from a valid layout");
        circuit_unitary(&c).expect("small register").into_inner()
    }
}

struct RunOutcome {
    x: Vec<f64>,
    cost: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Strong-Wolfe line search along `dir`; returns the accepted step.
fn line_search(
    f: &SynthCost,
    x: &[f64],
    fx: f64,
    gx: &[f64],
    dir: &[f64],
) -> Option<(f64, Vec<f64>, f64, Vec<f64>)> {
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    let dg0 = dot(gx, dir);
    if dg0 >= 0.0 {
        return None;
    }
    let eval = |alpha: f64| {
        let xn: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + alpha * d).collect();
        let (fnew, gnew) = f.cost_and_gradient(&xn);
        (xn, fnew, gnew)
    };
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    let mut f_lo = fx;
    let mut alpha = 1.0;
    for _ in 0..40 {
        let (xn, fnew, gnew) = eval(alpha);
        if fnew > fx + C1 * alpha * dg0 || fnew >= f_lo && lo > 0.0 {
            hi = alpha;
        } else {
            let dg = dot(&gnew, dir);
            if dg.abs() <= -C2 * dg0 {
                return Some((alpha, xn, fnew, gnew));
            }
            if dg * (hi - lo) >= 0.0 && hi.is_finite() {
                hi = lo;
            }
            lo = alpha;
            f_lo = fnew;
            if !hi.is_finite() {
                alpha *= 2.0;
                continue;
            }
        }
        alpha = 0.5 * (lo + hi);
    }
    // Fall back to the best sufficient-decrease point found, if any.
    if lo > 0.0 {
        let (xn, fnew, gnew) = eval(lo);
        return Some((lo, xn, fnew, gnew));
    }
    None
}

fn lbfgs(f: &SynthCost, x0: Vec<f64>, opts: &SynthOptions) -> RunOutcome {
    let mut x = x0;
    let (mut fx, mut g) = f.cost_and_gradient(&x);
    let mut hist: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)> = Default::default();
    for _ in 0..opts.max_iterations {
        if fx <= opts.target_cost || dot(&g, &g).sqrt() < opts.gradient_tolerance {
            break;
        }
        // Two-loop recursion.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let step = line_search(f, &x, fx, &g, &dir).or_else(|| {
            // Reset to steepest descent once before giving up.
            hist.clear();
            dir = g.iter().map(|v| -v).collect();
            line_search(f, &x, fx, &g, &dir)
        });
        let Some((_, xn, fnew, gnew)) = step else { break };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        let small_change = (fx - fnew).abs() < opts.cost_tolerance;
        x = xn;
        fx = fnew;
        g = gnew;
        if small_change {
            break;
        }
    }
    RunOutcome { x, cost: fx }
}

/// Restarts per parallel batch. Fixed so the result does not depend on the
/// thread count.
const RESTART_BATCH: usize = 4;

fn to_triples(x: &[f64]) -> Vec<[f64; 3]> {
    x.chunks(3).map(|c| [c[0], c[1], c[2]]).collect()
}

fn optimize_inner(
    layout: &SynthLayout,
    target: &UnitaryMatrix,
    start: Option<&[[f64; 3]]>,
    opts: &SynthOptions,
) -> Result<SynthResult> {
    if opts.restarts == 0 {
        return Err(Error::invalid("at least one restart is required"));
    }
    let f = SynthCost::new(layout, target)?;
    let n = f.n_parameters();
    if let Some(s) = start {
        if s.len() * 3 != n {
            return Err(Error::invalid(format!(
                "warm start has {} triples, layout {} needs {}",
                s.len(),
                layout.name,
                n / 3
            )));
        }
    }
    let seed = derive_seed(opts.seed, layout.cz_count() as u64 * 1000 + layout.u3_slots.len() as u64);
    let init = |r: usize| -> Vec<f64> {
        match (r, start) {
            (0, Some(s)) => s.iter().flatten().copied().collect(),
            _ => {
                let mut rng = stream_rng(seed, r as u64);
                (0..n).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
            }
        }
    };
    let mut best: Option<RunOutcome> = None;
    let mut used = 0;
    while used < opts.restarts {
        let batch: Vec<usize> = (used..(used + RESTART_BATCH).min(opts.restarts)).collect();
        let outcomes: Vec<RunOutcome> = batch.par_iter().map(|&r| lbfgs(&f, init(r), opts)).collect();
        for o in outcomes {
            used += 1;
            if best.as_ref().is_none_or(|b| o.cost < b.cost) {
                best = Some(o);
            }
            if best.as_ref().is_some_and(|b| b.cost <= opts.target_cost) {
                break;
            }
        }
        if best.as_ref().is_some_and(|b| b.cost <= opts.target_cost) {
            break;
        }
    }
    let best = best.expect("at least one restart ran");
    let angles = to_triples(&best.x);
    let u_f = circuit_unitary(&layout_circuit(layout, &angles)?)?;
    let fidelity = synthesis_fidelity(&u_f, target)?;
    Ok(SynthResult {
        layout: layout.clone(),
        angles,
        fidelity,
        cost: 1.0 - fidelity,
        restarts_used: used,
        converged: 1.0 - fidelity <= opts.target_cost,
    })
}

/// Minimizes `1 − F` over the layout's U3 angles from `opts.restarts`
/// uniform random starts in `[−π, π)`.
pub fn optimize_layout(layout: &SynthLayout, target: &UnitaryMatrix, opts: &SynthOptions) -> Result<SynthResult> {
    optimize_inner(layout, target, None, opts)
}

/// As [`optimize_layout`], with the first run started from `start`.
pub fn optimize_layout_from(
    layout: &SynthLayout,
    target: &UnitaryMatrix,
    start: &[[f64; 3]],
    opts: &SynthOptions,
) -> Result<SynthResult> {
    optimize_inner(layout, target, Some(start), opts)
}

/// Highest fidelity over `results`; fidelities within `1e-12` tie and are
/// resolved by fewer CZ gates, then by position.
pub fn select_best(results: Vec<SynthResult>) -> Option<SynthResult> {
    let mut best: Option<SynthResult> = None;
    for r in results {
        let better = match &best {
            None => true,
            Some(b) => {
                if (r.fidelity - b.fidelity).abs() <= 1e-12 {
                    r.layout.cz_count() < b.layout.cz_count()
                } else {
                    r.fidelity > b.fidelity
                }
            }
        };
        if better {
            best = Some(r);
        }
    }
    best
}

/// Optimizes every layout in `pool` against `e^{−i t H_rot}` and keeps the
/// best.
pub fn best_layout_for_time(
    p: &crate::jc::JcParams,
    t: f64,
    pool: &[SynthLayout],
    opts: &SynthOptions,
) -> Result<SynthResult> {
    if pool.is_empty() {
        return Err(Error::invalid("layout pool is empty"));
    }
    let target = crate::jc::exact_evolution(p, t)?;
    let results = pool
        .iter()
        .map(|l| optimize_layout(l, &target, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(select_best(results).expect("non-empty pool"))
}
