use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{site_mask, MAX_QUBITS};
use crate::error::{QrcError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense density matrix over `n` qubits (site 0 most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Array2<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(data: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = data.dim();
        if rows != cols || !rows.is_power_of_two() {
            return Err(QrcError::dim(format!(
                "density matrix must be square with power-of-two side, got {rows}x{cols}"
            )));
        }
        Ok(DensityMatrix {
            n_qubits: rows.trailing_zeros() as usize,
            data,
        })
    }

    /// `|0...0><0...0|`.
    pub fn zero_state(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        let mut data = Array2::zeros((dim, dim));
        data[[0, 0]] = ONE;
        DensityMatrix { n_qubits, data }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        let data = Array2::from_diag_elem(dim, Complex64::new(1.0 / dim as f64, 0.0));
        DensityMatrix { n_qubits, data }
    }

    /// `|psi><psi|` for a (not necessarily normalised) state vector.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let dim = psi.len();
        let data = Array2::from_shape_fn((dim, dim), |(a, b)| psi[a] * psi[b].conj());
        DensityMatrix::from_matrix(data)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.data
    }

    pub fn trace(&self) -> Complex64 {
        self.data.diag().iter().sum()
    }

    /// `max |rho - rho^dagger|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut err: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                err = err.max((self.data[[a, b]] - self.data[[b, a]].conj()).norm());
            }
        }
        err
    }

    pub fn hermitize(&mut self) {
        let n = self.dim();
        for a in 0..n {
            self.data[[a, a]].im = 0.0;
            for b in a + 1..n {
                let avg = (self.data[[a, b]] + self.data[[b, a]].conj()) * 0.5;
                self.data[[a, b]] = avg;
                self.data[[b, a]] = avg.conj();
            }
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let m = DMatrix::from_fn(n, n, |a, b| {
            // Symmetrise so the solver sees an exactly Hermitian input.
            (self.data[[a, b]] + self.data[[b, a]].conj()) * 0.5
        });
        SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Trace, Hermiticity and positivity check.
    pub fn check_physical(&self, trace_tol: f64, herm_tol: f64, pos_tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - ONE).norm() > trace_tol {
            return Err(QrcError::guard(format!("trace {tr} deviates from 1")));
        }
        let herm = self.hermiticity_error();
        if herm > herm_tol {
            return Err(QrcError::guard(format!("Hermiticity error {herm:e}")));
        }
        let min = self.min_eigenvalue();
        if min < -pos_tol {
            return Err(QrcError::guard(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

/// Map from a normalised value in `[0, 1]` to the `R_Y` rotation angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// `theta = pi x`.
    #[default]
    Linear,
    /// `theta = arccos(1 - 2x)`, so `<Z> = 1 - 2x` is affine in `x`.
    Arccos,
}

impl Encoding {
    pub fn angle(self, x: f64) -> f64 {
        match self {
            Encoding::Linear => std::f64::consts::PI * x,
            Encoding::Arccos => (1.0 - 2.0 * x).clamp(-1.0, 1.0).acos(),
        }
    }

    /// Amplitudes of `R_Y(theta)|0> = cos(theta/2)|0> + sin(theta/2)|1>`.
    pub fn amplitudes(self, x: f64) -> [f64; 2] {
        let half = 0.5 * self.angle(x);
        [half.cos(), half.sin()]
    }

    pub fn name(self) -> &'static str {
        match self {
            Encoding::Linear => "linear",
            Encoding::Arccos => "arccos",
        }
    }
}

pub(crate) fn check_unit(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(QrcError::invalid(format!("encoded value {x} outside [0, 1]")));
    }
    Ok(())
}

/// Single-qubit state `R_Y(theta)|0><0|R_Y(theta)^dagger`.
pub fn encode_qubit(x: f64, encoding: Encoding) -> Result<DensityMatrix> {
    check_unit(x)?;
    let [c, s] = encoding.amplitudes(x);
    DensityMatrix::from_pure(&[Complex64::new(c, 0.0), Complex64::new(s, 0.0)])
}

pub fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    Array2::from_shape_fn((ra * rb, ca * cb), |(i, j)| a[[i / rb, j / cb]] * b[[i % rb, j % cb]])
}

/// `input_1 ⊗ ... ⊗ input_k ⊗ hidden`; inputs occupy the leading sites.
pub fn inject(inputs: &[DensityMatrix], hidden: &DensityMatrix) -> Result<DensityMatrix> {
    let total = inputs.iter().map(DensityMatrix::n_qubits).sum::<usize>() + hidden.n_qubits();
    if total > MAX_QUBITS {
        return Err(QrcError::dim(format!(
            "injecting gives {total} qubits, limit is {MAX_QUBITS}"
        )));
    }
    let mut acc = Array2::from_elem((1, 1), ONE);
    for q in inputs {
        acc = kron(&acc, q.matrix());
    }
    DensityMatrix::from_matrix(kron(&acc, hidden.matrix()))
}

/// Trace out the first `n_inputs` sites.
pub fn partial_trace_inputs(rho: &DensityMatrix, n_inputs: usize) -> Result<DensityMatrix> {
    if n_inputs >= rho.n_qubits() {
        return Err(QrcError::dim(format!(
            "cannot trace {n_inputs} of {} qubits",
            rho.n_qubits()
        )));
    }
    let hidden_dim = 1 << (rho.n_qubits() - n_inputs);
    let m = rho.matrix();
    let mut out = Array2::from_elem((hidden_dim, hidden_dim), ZERO);
    for i in 0..(1usize << n_inputs) {
        let base = i * hidden_dim;
        for a in 0..hidden_dim {
            for b in 0..hidden_dim {
                out[[a, b]] += m[[base + a, base + b]];
            }
        }
    }
    DensityMatrix::from_matrix(out)
}

/// `[<X_1>, ..., <X_N>]`, exact expectations.
pub fn pauli_x_expectations(rho: &DensityMatrix) -> Vec<f64> {
    let n = rho.n_qubits();
    let m = rho.matrix();
    (0..n)
        .map(|site| {
            let mask = site_mask(n, site);
            // tr(rho X_j) = sum_a rho[a, a ^ mask]
            (0..rho.dim()).map(|a| m[[a, a ^ mask]].re).sum()
        })
        .collect()
}
