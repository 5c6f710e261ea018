//! The layered reservoir protocol.
//!
//! For a window of `d` past states the hidden register starts in `|0...0>`.
//! Each layer encodes the layer's values (every variable repeated `n_rep`
//! times) on fresh input qubits at the leading sites, evolves the whole
//! chain once, and discards the inputs again, except after the last layer
//! where every qubit is measured along X.
//!
//! Two equivalent engines execute this. The density-matrix engine follows
//! the steps literally and is used for Lindblad propagators. Under unitary
//! evolution every input is pure, so the hidden state is kept as a short
//! list of unnormalised branch vectors `rho_H = sum_k |phi_k><phi_k|`
//! (at most `2^n_H` of them after compression) and only state vectors are
//! ever propagated.

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{MapKind, Window};
use crate::error::{QrcError, Result};
use crate::quantum::density::check_unit;
use crate::quantum::{
    encode_qubit, inject, make_propagator, partial_trace_inputs, pauli_x_expectations, site_mask, Boundary,
    DensityMatrix, Encoding, PropagationMode, Propagator, XYChainSpec, DEFAULT_SUBSTEPS, MAX_QUBITS,
};

/// Placement of the repeated input variables on the input sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputOrder {
    /// `x, x, ..., y, y, ...`
    #[default]
    Grouped,
    /// `x, y, x, y, ...`
    Interleaved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirConfig {
    pub layers: usize,
    pub n_rep: usize,
    pub n_vars: usize,
    pub n_hidden: usize,
    pub tau: f64,
    pub gamma: f64,
    pub n_substeps: usize,
    pub seed: u64,
    pub include_bias: bool,
    pub encoding: Encoding,
    pub input_order: InputOrder,
    pub chain: XYChainSpec,
}

/// Evolution time per layer.
pub const DEFAULT_TAU: f64 = 0.2;
/// Single-layer X features are odd under global parity and carry no intercept.
pub const DEFAULT_BIAS: bool = true;

impl ReservoirConfig {
    /// Unit coupling, open chain, `DEFAULT_TAU`, bias on, no dephasing, fields from `seed`.
    pub fn new(kind: MapKind, layers: usize, n_rep: usize, n_hidden: usize, seed: u64) -> Result<Self> {
        let n_vars = kind.dim();
        let n = n_vars * n_rep + n_hidden;
        if layers == 0 || n_rep == 0 {
            return Err(QrcError::invalid("layers and n_rep must be at least 1"));
        }
        if n > MAX_QUBITS {
            return Err(QrcError::invalid(format!(
                "{n} qubits requested, limit is {MAX_QUBITS}"
            )));
        }
        let cfg = ReservoirConfig {
            layers,
            n_rep,
            n_vars,
            n_hidden,
            tau: DEFAULT_TAU,
            gamma: 0.0,
            n_substeps: DEFAULT_SUBSTEPS,
            seed,
            include_bias: DEFAULT_BIAS,
            encoding: Encoding::default(),
            input_order: InputOrder::default(),
            chain: XYChainSpec::random(n, seed, Boundary::Open)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `d = 2, n_rep = 2, n_H = 4` (logistic) or `d = 1, n_rep = 2, n_H = 3` (Hénon).
    pub fn standard(kind: MapKind, seed: u64) -> Result<Self> {
        match kind {
            MapKind::Logistic => ReservoirConfig::new(kind, 2, 2, 4, seed),
            MapKind::Henon => ReservoirConfig::new(kind, 1, 2, 3, seed),
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_vars * self.n_rep
    }

    pub fn n_qubits(&self) -> usize {
        self.n_inputs() + self.n_hidden
    }

    pub fn n_features(&self) -> usize {
        self.n_qubits() + usize::from(self.include_bias)
    }

    pub fn mode(&self) -> PropagationMode {
        if self.gamma == 0.0 {
            PropagationMode::Unitary
        } else {
            PropagationMode::Lindblad {
                gamma: self.gamma,
                n_substeps: self.n_substeps,
            }
        }
    }

    pub fn propagator(&self) -> Result<Propagator> {
        self.validate()?;
        make_propagator(&self.chain, self.tau, self.mode())
    }

    /// Change the architecture; fields are regenerated from the seed.
    pub fn with_architecture(&self, layers: usize, n_rep: usize) -> Result<Self> {
        let mut next = ReservoirConfig::new(
            if self.n_vars == 1 { MapKind::Logistic } else { MapKind::Henon },
            layers,
            n_rep,
            self.n_hidden,
            self.seed,
        )?;
        next.copy_settings_from(self)?;
        Ok(next)
    }

    /// Same architecture with fields regenerated from `seed`.
    pub fn with_seed(&self, seed: u64) -> Result<Self> {
        let mut next = self.clone();
        next.seed = seed;
        next.chain = XYChainSpec::random(self.n_qubits(), seed, self.chain.boundary)?;
        next.chain.coupling = self.chain.coupling;
        Ok(next)
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        ReservoirConfig {
            gamma,
            ..self.clone()
        }
    }

    fn copy_settings_from(&mut self, other: &ReservoirConfig) -> Result<()> {
        self.tau = other.tau;
        self.gamma = other.gamma;
        self.n_substeps = other.n_substeps;
        self.include_bias = other.include_bias;
        self.encoding = other.encoding;
        self.input_order = other.input_order;
        self.chain.coupling = other.chain.coupling;
        self.chain.boundary = other.chain.boundary;
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.n_rep == 0 {
            return Err(QrcError::invalid("layers and n_rep must be at least 1"));
        }
        if self.n_qubits() > MAX_QUBITS {
            return Err(QrcError::invalid(format!(
                "{} qubits exceed the limit of {MAX_QUBITS}",
                self.n_qubits()
            )));
        }
        if self.chain.n_qubits != self.n_qubits() {
            return Err(QrcError::dim(format!(
                "chain has {} sites, configuration needs {}",
                self.chain.n_qubits,
                self.n_qubits()
            )));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(QrcError::invalid(format!("tau = {} must be positive", self.tau)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(QrcError::invalid(format!("gamma = {} must be >= 0", self.gamma)));
        }
        self.chain.validate()
    }

    /// Values written onto the input sites for one layer's state.
    pub fn layer_inputs(&self, state: &[f64]) -> Vec<f64> {
        match self.input_order {
            InputOrder::Grouped => state
                .iter()
                .flat_map(|&v| std::iter::repeat_n(v, self.n_rep))
                .collect(),
            InputOrder::Interleaved => (0..self.n_rep).flat_map(|_| state.iter().copied()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub window_id: usize,
}

fn check_window(cfg: &ReservoirConfig, prop: &Propagator, window: &[f64]) -> Result<()> {
    if window.len() != cfg.layers * cfg.n_vars {
        return Err(QrcError::dim(format!(
            "window has {} values, expected {} layers x {} variables",
            window.len(),
            cfg.layers,
            cfg.n_vars
        )));
    }
    if prop.n_qubits() != cfg.n_qubits() {
        return Err(QrcError::dim(format!(
            "propagator acts on {} qubits, configuration has {}",
            prop.n_qubits(),
            cfg.n_qubits()
        )));
    }
    window.iter().try_for_each(|&v| check_unit(v))
}

fn finish(cfg: &ReservoirConfig, mut values: Vec<f64>, window_id: usize) -> FeatureVector {
    if cfg.include_bias {
        values.push(1.0);
    }
    FeatureVector { values, window_id }
}

/// Feature vector of one window (`layers x n_vars`, oldest first).
pub fn run_window(cfg: &ReservoirConfig, prop: &Propagator, window: &[f64]) -> Result<FeatureVector> {
    check_window(cfg, prop, window)?;
    let values = if prop.is_unitary() {
        branch_features(cfg, prop, window)?
    } else {
        dense_features(cfg, prop, window)?
    };
    Ok(finish(cfg, values, 0))
}

/// The literal density-matrix protocol, for any propagator.
pub fn run_window_dense(cfg: &ReservoirConfig, prop: &Propagator, window: &[f64]) -> Result<FeatureVector> {
    check_window(cfg, prop, window)?;
    Ok(finish(cfg, dense_features(cfg, prop, window)?, 0))
}

fn dense_features(cfg: &ReservoirConfig, prop: &Propagator, window: &[f64]) -> Result<Vec<f64>> {
    let mut hidden = DensityMatrix::zero_state(cfg.n_hidden);
    for (layer, state) in window.chunks(cfg.n_vars).enumerate() {
        let inputs = cfg
            .layer_inputs(state)
            .into_iter()
            .map(|x| encode_qubit(x, cfg.encoding))
            .collect::<Result<Vec<_>>>()?;
        let rho = prop.apply(&inject(&inputs, &hidden)?)?;
        if layer + 1 == cfg.layers {
            return Ok(pauli_x_expectations(&rho));
        }
        hidden = partial_trace_inputs(&rho, cfg.n_inputs())?;
    }
    unreachable!("layers >= 1 is validated")
}

/// Product-state amplitudes of the encoded inputs, site 0 most significant.
fn input_amplitudes(values: &[f64], encoding: Encoding) -> Vec<f64> {
    let mut amps = vec![1.0];
    for &x in values {
        let [c, s] = encoding.amplitudes(x);
        amps = amps.iter().flat_map(|&a| [a * c, a * s]).collect();
    }
    amps
}

fn branch_features(cfg: &ReservoirConfig, prop: &Propagator, window: &[f64]) -> Result<Vec<f64>> {
    let n_in = cfg.n_inputs();
    let hidden_dim = 1usize << cfg.n_hidden;
    let input_dim = 1usize << n_in;
    let mut branches = Array2::<Complex64>::zeros((hidden_dim, 1));
    branches[[0, 0]] = Complex64::new(1.0, 0.0);

    for (layer, state) in window.chunks(cfg.n_vars).enumerate() {
        let amps = input_amplitudes(&cfg.layer_inputs(state), cfg.encoding);
        let m = branches.ncols();
        let mut joint = Array2::<Complex64>::zeros((input_dim * hidden_dim, m));
        for (i, &amp) in amps.iter().enumerate() {
            if amp == 0.0 {
                continue;
            }
            let mut rows = joint.slice_mut(ndarray::s![i * hidden_dim..(i + 1) * hidden_dim, ..]);
            rows.zip_mut_with(&branches, |j, b| *j = b * amp);
        }
        prop.evolve_states(&mut joint)?;

        if layer + 1 == cfg.layers {
            return Ok(x_expectations_of_branches(&joint, cfg.n_qubits()));
        }
        // Tracing out the inputs splits every branch by input basis state.
        let mut next = Array2::<Complex64>::zeros((hidden_dim, m * input_dim));
        for col in 0..m {
            for i in 0..input_dim {
                next.column_mut(col * input_dim + i)
                    .assign(&joint.slice(ndarray::s![i * hidden_dim..(i + 1) * hidden_dim, col]));
            }
        }
        branches = compress_branches(next);
    }
    unreachable!("layers >= 1 is validated")
}

/// Replace `B` by a square factor `F` with `F F^dagger = B B^dagger` when
/// there are more branches than the hidden dimension.
fn compress_branches(b: Array2<Complex64>) -> Array2<Complex64> {
    let (dim, m) = b.dim();
    if m <= dim {
        return b;
    }
    // B^dagger = Q R  =>  B B^dagger = R^dagger R.
    let bd = DMatrix::from_fn(m, dim, |i, j| b[[j, i]].conj());
    let r = bd.qr().r();
    Array2::from_shape_fn((dim, dim), |(i, j)| r[(j, i)].conj())
}

fn x_expectations_of_branches(states: &Array2<Complex64>, n_qubits: usize) -> Vec<f64> {
    (0..n_qubits)
        .map(|site| {
            let mask = site_mask(n_qubits, site);
            let mut total = 0.0;
            for col in states.columns() {
                for a in 0..col.len() {
                    if a & mask == 0 {
                        total += 2.0 * (col[a].conj() * col[a | mask]).re;
                    }
                }
            }
            total
        })
        .collect()
}

/// Feature matrix with one column per window, in input order.
pub fn batch_features(cfg: &ReservoirConfig, prop: &Propagator, windows: &[Window]) -> Result<DMatrix<f64>> {
    if windows.is_empty() {
        return Err(QrcError::invalid("no windows to featurise"));
    }
    let columns = windows
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let mut f = run_window(cfg, prop, &w.inputs)?;
            f.window_id = i;
            Ok(f)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = cfg.n_features();
    Ok(DMatrix::from_fn(rows, columns.len(), |r, c| columns[c].values[r]))
}
