//! Dense Hermitian/unitary matrices and the eigendecomposition-based
//! matrix exponential.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::gate::C64;
use crate::error::{Error, Result};

/// Largest Hermitian matrix accepted by [`matrix_exponential`].
pub const MAX_EXP_DIM: usize = 1 << 12;

const HERMITIAN_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        let dev = max_abs_diff(&m, &m.adjoint());
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(DMatrix<C64>);

impl UnitaryMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        if !m.nrows().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(m.nrows()));
        }
        let dev = unitarity_error(&m);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn mul(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self(&self.0 * &other.0))
    }
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Entrywise max of `|U†U − I|`.
pub fn unitarity_error(m: &DMatrix<C64>) -> f64 {
    let p = m.adjoint() * m;
    max_abs_diff(&p, &DMatrix::identity(m.nrows(), m.ncols()))
}

/// Max entrywise deviation between `a` and `b` after removing the best
/// global phase, i.e. `min_φ max |e^{iφ} a − b|` with `φ = arg Tr(a† b)`.
pub fn phase_aligned_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max)
}

/// `e^{−iHt}` from the eigendecomposition `H = V diag(λ) V†`.
pub fn matrix_exponential(h: &HermitianMatrix, t: f64) -> Result<UnitaryMatrix> {
    let dim = h.dim();
    if dim > MAX_EXP_DIM {
        return Err(Error::TooManyQubits {
            what: "matrix exponential",
            n_qubits: dim.trailing_zeros() as usize,
            cap: MAX_EXP_DIM.trailing_zeros() as usize,
        });
    }
    let eig = h.0.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let f = C64::from_polar(1.0, -lambda * t);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= f);
    }
    let u = scaled * v.adjoint();
    if u.nrows().is_power_of_two() {
        UnitaryMatrix::new(u)
    } else {
        Err(Error::NotPowerOfTwo(u.nrows()))
    }
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the
/// diagonal-phase correction.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix {
    let g = DMatrix::<C64>::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|z| *z *= ph);
    }
    UnitaryMatrix(q)
}

/// Kronecker product `a ⊗ b` (b is the less significant factor).
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Embeds one single-qubit operator per qubit into an `n`-qubit operator.
/// Each `(q, m)` puts `m` on qubit `q` (qubit 0 least significant); unlisted
/// qubits get the identity.
pub fn embed_product(n_qubits: usize, ops: &[(usize, DMatrix<C64>)]) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::identity(1, 1);
    for q in (0..n_qubits).rev() {
        let factor = ops
            .iter()
            .find(|(k, _)| *k == q)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| DMatrix::identity(2, 2));
        out = out.kronecker(&factor);
    }
    out
}

pub(crate) fn pauli(kind: char) -> DMatrix<C64> {
    let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    match kind {
        'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("unknown Pauli {kind}"),
    }
}
