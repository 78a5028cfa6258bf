//! Dense complex operators on one and two qubits, the Pauli matrices and the
//! initial-state families.
//!
//! Matrices are stored row-major in the computational basis; for two qubits the
//! order is `|00>, |01>, |10>, |11>` with the first factor belonging to Alice.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::witness::CorrelatorTriple;

/// Maximum absolute deviation from Hermiticity accepted for a density matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Maximum deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A square complex matrix of dimension 2 or 4.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "unsupported dimension {dim}");
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let mut m = Self::new(diag.len(), vec![ZERO; diag.len() * diag.len()])?;
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * m.dim + i] = Complex64::new(d, 0.0);
        }
        Ok(m)
    }

    /// Outer product `|v><v|`.
    pub fn projector(v: &[Complex64]) -> Result<Self> {
        let dim = v.len();
        let entries = v
            .iter()
            .flat_map(|a| v.iter().map(move |b| a * b.conj()))
            .collect();
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        let entries = (0..d * d)
            .map(|idx| self.entries[(idx % d) * d + idx / d].conj())
            .collect();
        Self { dim: d, entries }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    /// `Tr[self * other]` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let d = self.dim;
        let mut acc = ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += self.get(i, j) * other.get(j, i);
            }
        }
        acc
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += a * other.entries[k * d + j];
                }
            }
        }
        Ok(Self {
            dim: d,
            entries: out,
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            dim: self.dim,
            entries,
        })
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.entries);
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut values: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for row in self.entries.chunks(self.dim) {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix addition")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(&-rhs).expect("matrix subtraction")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|z| -z).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix multiplication")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
}

/// Sign convention for sigma_2.
///
/// `Standard` has `-i` in the upper-right corner. `Transposed` is the other
/// sign. Every quantity in this crate uses sigma_2 quadratically, so the two
/// agree on all results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YConvention {
    #[default]
    Standard,
    Transposed,
}

pub fn pauli(axis: PauliAxis) -> ComplexMatrix {
    pauli_with(axis, YConvention::Standard)
}

pub fn pauli_with(axis: PauliAxis, convention: YConvention) -> ComplexMatrix {
    let entries = match (axis, convention) {
        (PauliAxis::X, _) => vec![ZERO, ONE, ONE, ZERO],
        (PauliAxis::Y, YConvention::Standard) => vec![ZERO, -I, I, ZERO],
        (PauliAxis::Y, YConvention::Transposed) => vec![ZERO, I, -I, ZERO],
        (PauliAxis::Z, _) => vec![ONE, ZERO, ZERO, -ONE],
    };
    ComplexMatrix { dim: 2, entries }
}

/// Kronecker product of two single-qubit operators.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim,
            });
        }
    }
    let mut entries = vec![ZERO; 16];
    for (ar, ac) in (0..2).flat_map(|r| (0..2).map(move |c| (r, c))) {
        let x = a.get(ar, ac);
        for (br, bc) in (0..2).flat_map(|r| (0..2).map(move |c| (r, c))) {
            entries[(2 * ar + br) * 4 + 2 * ac + bc] = x * b.get(br, bc);
        }
    }
    Ok(ComplexMatrix { dim: 4, entries })
}

/// `sigma_i (x) sigma_i`.
pub fn pauli_pair(axis: PauliAxis) -> ComplexMatrix {
    let p = pauli(axis);
    kron(&p, &p).expect("2x2 factors")
}

/// A validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    matrix: ComplexMatrix,
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: matrix.dim,
            });
        }
        if matrix
            .entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let dev = matrix.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {dev:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min_eig = matrix.hermitian_eigenvalues()[0];
        if min_eig < PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix produced by a trace- and positivity-preserving map.
    pub(crate) fn from_channel_output(matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.dim, 4);
        Self { matrix }
    }

    pub fn from_pure(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState(
                "zero or non-finite state vector".into(),
            ));
        }
        let v: Vec<Complex64> = amplitudes.iter().map(|a| a / norm).collect();
        Ok(Self {
            matrix: ComplexMatrix::projector(&v)?,
        })
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: ComplexMatrix::identity(4).scale(0.25),
        }
    }

    /// A full-rank random state `G G^dag / Tr[G G^dag]` from a complex Gaussian `G`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let g = ComplexMatrix {
            dim: 4,
            entries: (0..16)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        };
        let m = &g * &g.dagger();
        let tr = m.trace().re;
        let mut rho = m.scale(1.0 / tr);
        // clean up rounding so the result is exactly Hermitian
        let herm = &rho + &rho.dagger();
        rho = herm.scale(0.5);
        Self { matrix: rho }
    }

    /// A Haar-random pure two-qubit state.
    pub fn random_pure<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let amps: [Complex64; 4] = std::array::from_fn(|_| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        Self::from_pure(amps).expect("gaussian vector is nonzero")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Tr[op * rho]` (real part; `op` is expected to be Hermitian).
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        op.trace_product(&self.matrix).re
    }
}

/// The two initial-state families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum InitialStateSpec {
    /// `(|01> + |10>)/sqrt(2)`.
    Bell,
    /// `p1 |psi_a><psi_a| + p2 |01><01| + p3 |10><10|` with
    /// `|psi_a> = sqrt(alpha)|01> + sqrt(1 - alpha)|10>`.
    MixedAlpha {
        alpha: f64,
        p1: f64,
        p2: f64,
        p3: f64,
    },
}

impl InitialStateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialStateSpec::Bell => Ok(()),
            InitialStateSpec::MixedAlpha { alpha, p1, p2, p3 } => {
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(Error::AlphaOutOfRange(alpha));
                }
                let sum = p1 + p2 + p3;
                if !(p1 > 0.0 && p2 >= 0.0 && p3 >= 0.0 && (sum - 1.0).abs() <= 1e-12) {
                    return Err(Error::InvalidProbabilities { p1, p2, p3 });
                }
                Ok(())
            }
        }
    }

    /// `T11 + T22` of the initial state: 2 for Bell, `4 p1 sqrt(alpha(1-alpha))`
    /// for the mixed family. This is the constant `L` of the theta strategy.
    pub fn coupling(&self) -> f64 {
        match *self {
            InitialStateSpec::Bell => 2.0,
            InitialStateSpec::MixedAlpha { alpha, p1, .. } => {
                4.0 * p1 * (alpha * (1.0 - alpha)).sqrt()
            }
        }
    }

    /// Exact correlators `(C/2, C/2, -1)` with `C = coupling()`. Every member of
    /// both families has `T33 = -1` exactly.
    pub fn correlators(&self) -> CorrelatorTriple {
        let half = self.coupling() / 2.0;
        CorrelatorTriple {
            t11: half,
            t22: half,
            t33: -1.0,
        }
    }
}

pub fn initial_state(spec: &InitialStateSpec) -> Result<TwoQubitState> {
    spec.validate()?;
    let matrix = match *spec {
        InitialStateSpec::Bell => {
            let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            ComplexMatrix::projector(&[ZERO, h, h, ZERO])?
        }
        InitialStateSpec::MixedAlpha { alpha, p1, p2, p3 } => {
            let psi = [
                ZERO,
                Complex64::new(alpha.sqrt(), 0.0),
                Complex64::new((1.0 - alpha).sqrt(), 0.0),
                ZERO,
            ];
            let pure = ComplexMatrix::projector(&psi)?.scale(p1);
            let flips = ComplexMatrix::from_real_diagonal(&[0.0, p2, p3, 0.0])?;
            &pure + &flips
        }
    };
    TwoQubitState::new(matrix)
}

/// `T_ii = Tr[(sigma_i (x) sigma_i) rho]`.
pub fn correlators(rho: &TwoQubitState) -> CorrelatorTriple {
    let t = |axis| rho.expectation(&pauli_pair(axis));
    CorrelatorTriple {
        t11: t(PauliAxis::X),
        t22: t(PauliAxis::Y),
        t33: t(PauliAxis::Z),
    }
}
