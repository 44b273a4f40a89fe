//! Gate set and dense gate matrices.
//!
//! Angles are in radians. Two-qubit matrices use the local index
//! `bit(first target) + 2 * bit(second target)`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense 2×2 matrix, row-major.
pub type Mat2 = [[C64; 2]; 2];

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    /// `exp(-i θ Z / 2)`; virtual on hardware.
    Rz { qubit: usize, theta: f64 },
    /// `√X = exp(-i π X / 4)`.
    Sx { qubit: usize },
    X { qubit: usize },
    /// General single-qubit unitary in the U3 convention
    /// `[[cos β/2, -e^{iγ} sin β/2], [e^{iα} sin β/2, e^{i(α+γ)} cos β/2]]`.
    U3 {
        qubit: usize,
        alpha: f64,
        beta: f64,
        gamma: f64,
    },
    Cz { a: usize, b: usize },
    /// `exp(-i θ X⊗X / 2)`.
    Rxx { a: usize, b: usize, theta: f64 },
    /// `exp(-i θ Y⊗Y / 2)`.
    Ryy { a: usize, b: usize, theta: f64 },
}

/// Qubits a gate acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Support {
    One(usize),
    Two(usize, usize),
}

impl Support {
    pub fn contains(self, q: usize) -> bool {
        match self {
            Support::One(a) => a == q,
            Support::Two(a, b) => a == q || b == q,
        }
    }

    pub fn to_vec(self) -> Vec<usize> {
        match self {
            Support::One(a) => vec![a],
            Support::Two(a, b) => vec![a, b],
        }
    }
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::Rz { .. } => "rz",
            Gate::Sx { .. } => "sx",
            Gate::X { .. } => "x",
            Gate::U3 { .. } => "u3",
            Gate::Cz { .. } => "cz",
            Gate::Rxx { .. } => "rxx",
            Gate::Ryy { .. } => "ryy",
        }
    }

    pub fn support(&self) -> Support {
        match *self {
            Gate::Rz { qubit, .. }
            | Gate::Sx { qubit }
            | Gate::X { qubit }
            | Gate::U3 { qubit, .. } => Support::One(qubit),
            Gate::Cz { a, b } | Gate::Rxx { a, b, .. } | Gate::Ryy { a, b, .. } => {
                Support::Two(a, b)
            }
        }
    }

    pub fn is_native(&self) -> bool {
        matches!(
            self,
            Gate::Rz { .. } | Gate::Sx { .. } | Gate::X { .. } | Gate::Cz { .. }
        )
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self.support(), Support::Two(..))
    }

    /// Checks target indices against a register size.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q < n_qubits {
                Ok(())
            } else {
                Err(Error::QubitOutOfRange { index: q, n_qubits })
            }
        };
        match self.support() {
            Support::One(q) => check(q),
            Support::Two(a, b) => {
                check(a)?;
                check(b)?;
                if a == b {
                    Err(Error::DuplicateTargets(a))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// The 2×2 matrix of a single-qubit gate, `None` for two-qubit gates.
    pub fn single_qubit_matrix(&self) -> Option<Mat2> {
        Some(match *self {
            Gate::Rz { theta, .. } => rz_matrix(theta),
            Gate::Sx { .. } => sx_matrix(),
            Gate::X { .. } => [[ZERO, ONE], [ONE, ZERO]],
            Gate::U3 {
                alpha, beta, gamma, ..
            } => u3_matrix(alpha, beta, gamma),
            _ => return None,
        })
    }

    /// Dense matrix in the gate's local basis (2×2 or 4×4).
    pub fn matrix(&self) -> DMatrix<C64> {
        if let Some(m) = self.single_qubit_matrix() {
            return DMatrix::from_fn(2, 2, |r, c| m[r][c]);
        }
        match *self {
            Gate::Cz { .. } => {
                let mut m = DMatrix::identity(4, 4);
                m[(3, 3)] = -ONE;
                m
            }
            Gate::Rxx { theta, .. } => pauli_pair_rotation(theta, false),
            Gate::Ryy { theta, .. } => pauli_pair_rotation(theta, true),
            _ => unreachable!(),
        }
    }
}

impl std::fmt::Display for Gate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Gate::Rz { qubit, theta } => write!(f, "rz({theta}) q{qubit}"),
            Gate::Sx { qubit } => write!(f, "sx q{qubit}"),
            Gate::X { qubit } => write!(f, "x q{qubit}"),
            Gate::U3 {
                qubit,
                alpha,
                beta,
                gamma,
            } => write!(f, "u3({alpha}, {beta}, {gamma}) q{qubit}"),
            Gate::Cz { a, b } => write!(f, "cz q{a}, q{b}"),
            Gate::Rxx { a, b, theta } => write!(f, "rxx({theta}) q{a}, q{b}"),
            Gate::Ryy { a, b, theta } => write!(f, "ryy({theta}) q{a}, q{b}"),
        }
    }
}

pub fn rz_matrix(theta: f64) -> Mat2 {
    [
        [C64::from_polar(1.0, -theta / 2.0), ZERO],
        [ZERO, C64::from_polar(1.0, theta / 2.0)],
    ]
}

pub fn sx_matrix() -> Mat2 {
    let p = C64::new(0.5, 0.5);
    let m = C64::new(0.5, -0.5);
    [[p, m], [m, p]]
}

/// U3 in the convention used for synthesis:
/// `[[cos β/2, -e^{iγ} sin β/2], [e^{iα} sin β/2, e^{i(α+γ)} cos β/2]]`.
pub fn u3_matrix(alpha: f64, beta: f64, gamma: f64) -> Mat2 {
    let (s, c) = (beta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), -C64::from_polar(s, gamma)],
        [C64::from_polar(s, alpha), C64::from_polar(c, alpha + gamma)],
    ]
}

fn pauli_pair_rotation(theta: f64, yy: bool) -> DMatrix<C64> {
    let (s, c) = (theta / 2.0).sin_cos();
    let mut m = DMatrix::from_diagonal_element(4, 4, C64::new(c, 0.0));
    // X⊗X has ones on the anti-diagonal; Y⊗Y has (-1, 1, 1, -1) there.
    let anti = if yy {
        [-1.0, 1.0, 1.0, -1.0]
    } else {
        [1.0; 4]
    };
    for (r, sign) in anti.iter().enumerate() {
        m[(r, 3 - r)] = C64::new(0.0, -s * sign);
    }
    m
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

pub const MAT2_IDENTITY: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

pub(crate) fn hadamard() -> Mat2 {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// `exp(-i θ X / 2)`.
pub(crate) fn rx_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
}
