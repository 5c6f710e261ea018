//! Transverse XY chain `H = J Σ (X_j X_{j+1} + Y_j Y_{j+1}) + Σ h_j Z_j`.
//!
//! Site 0 (the first qubit) is the most significant tensor factor, i.e. it
//! owns bit `n - 1` of a computational-basis index. `Z|0> = |0>`.
//!
//! The hopping term only swaps neighbouring `01 <-> 10`, so H conserves the
//! number of excitations and is block diagonal over popcount sectors. All
//! matrix elements are real.

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::seeding::{rng_for, Stream};

/// Dense-kernel guard on the chain length.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XYChainSpec {
    pub n_qubits: usize,
    pub coupling: f64,
    pub fields: Vec<f64>,
    pub boundary: Boundary,
    /// Permit `h_j` outside `[0, 1]`.
    #[serde(default)]
    pub allow_strong_fields: bool,
}

impl XYChainSpec {
    pub fn new(fields: Vec<f64>, coupling: f64, boundary: Boundary) -> Result<Self> {
        let spec = XYChainSpec {
            n_qubits: fields.len(),
            coupling,
            fields,
            boundary,
            allow_strong_fields: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit coupling and fields drawn uniformly from `[0, 1)`.
    ///
    /// Draws are sequential from one stream, so chains of different length
    /// built from the same seed share their leading fields.
    pub fn random(n_qubits: usize, seed: u64, boundary: Boundary) -> Result<Self> {
        let mut rng = rng_for(seed, Stream::Fields, 0);
        let fields = (0..n_qubits).map(|_| rng.random_range(0.0..1.0)).collect();
        XYChainSpec::new(fields, 1.0, boundary)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(QrcError::invalid(format!(
                "chain length {} outside 1..={MAX_QUBITS}",
                self.n_qubits
            )));
        }
        if self.fields.len() != self.n_qubits {
            return Err(QrcError::dim(format!(
                "{} fields for {} qubits",
                self.fields.len(),
                self.n_qubits
            )));
        }
        if !self.coupling.is_finite() || self.fields.iter().any(|h| !h.is_finite()) {
            return Err(QrcError::invalid("non-finite Hamiltonian parameter"));
        }
        if !self.allow_strong_fields && self.fields.iter().any(|h| !(0.0..=1.0).contains(h)) {
            return Err(QrcError::invalid(
                "fields must lie in [0, 1] unless allow_strong_fields is set",
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Coupled site pairs. A periodic chain adds the wrap-around bond only
    /// for `n >= 3`; for two sites it would duplicate the single bond.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_qubits;
        let mut bonds: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|j| (j, j + 1)).collect();
        if self.boundary == Boundary::Periodic && n >= 3 {
            bonds.push((n - 1, 0));
        }
        bonds
    }
}

#[inline]
pub fn site_mask(n_qubits: usize, site: usize) -> usize {
    1 << (n_qubits - 1 - site)
}

/// Row-wise sparse real Hamiltonian: `rows[a]` lists `(b, H_ab)`.
pub(crate) fn sparse_rows(spec: &XYChainSpec) -> Vec<Vec<(usize, f64)>> {
    let n = spec.n_qubits;
    let bonds: Vec<(usize, usize)> = spec
        .bonds()
        .into_iter()
        .map(|(i, j)| (site_mask(n, i), site_mask(n, j)))
        .collect();
    (0..spec.dim())
        .map(|a| {
            let diag: f64 = spec
                .fields
                .iter()
                .enumerate()
                .map(|(j, h)| if a & site_mask(n, j) == 0 { *h } else { -*h })
                .sum();
            let mut row = vec![(a, diag)];
            for &(mi, mj) in &bonds {
                // XX + YY maps |01> <-> |10> with amplitude 2 and kills |00>, |11>.
                if (a & mi == 0) != (a & mj == 0) {
                    row.push((a ^ mi ^ mj, 2.0 * spec.coupling));
                }
            }
            row.sort_by_key(|&(b, _)| b);
            row
        })
        .collect()
}

pub fn build_hamiltonian(spec: &XYChainSpec) -> Result<Array2<Complex64>> {
    spec.validate()?;
    let dim = spec.dim();
    let mut h = Array2::zeros((dim, dim));
    for (a, row) in sparse_rows(spec).into_iter().enumerate() {
        for (b, v) in row {
            h[[a, b]] += Complex64::new(v, 0.0);
        }
    }
    Ok(h)
}

/// Basis states with a fixed number of excitations.
#[derive(Debug, Clone)]
pub(crate) struct Sector {
    pub states: Vec<usize>,
}

pub(crate) fn sectors(n_qubits: usize) -> Vec<Sector> {
    let mut out: Vec<Sector> = (0..=n_qubits).map(|_| Sector { states: Vec::new() }).collect();
    for a in 0..(1usize << n_qubits) {
        out[a.count_ones() as usize].states.push(a);
    }
    out
}

/// `local[a]` = position of basis state `a` inside its sector.
pub(crate) fn local_positions(n_qubits: usize, sectors: &[Sector]) -> Vec<usize> {
    let mut local = vec![0; 1 << n_qubits];
    for s in sectors {
        for (i, &a) in s.states.iter().enumerate() {
            local[a] = i;
        }
    }
    local
}

/// Dense real block of H restricted to one sector.
pub(crate) fn sector_block(rows: &[Vec<(usize, f64)>], sector: &Sector, local: &[usize]) -> DMatrix<f64> {
    let c = sector.states.len();
    let mut m = DMatrix::zeros(c, c);
    for (i, &a) in sector.states.iter().enumerate() {
        for &(b, v) in &rows[a] {
            m[(i, local[b])] += v;
        }
    }
    m
}
