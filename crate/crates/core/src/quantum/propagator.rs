//! Time evolution over one reservoir step of duration `tau`.
//!
//! Unitary mode diagonalises each excitation sector of H once and stores
//! `U_k = V_k exp(-i E_k tau) V_k^T`. Lindblad mode integrates
//!
//! ```text
//! d rho / d tau = -i [H, rho] + gamma * sum_k (Z_k rho Z_k - rho)
//! ```
//!
//! with fixed-step classical RK4. The dephasing term is diagonal in the
//! computational basis: it multiplies `rho_ab` by `-2 gamma hamming(a, b)`.
//! Because the generator maps each `(sector_k, sector_l)` block of rho onto
//! itself, one RK4 step is a fixed polynomial `P(dt L_kl)` per block, and
//! `n` steps are `P(dt L_kl)^n`. For short chains that power is formed once
//! (the cached strategy); longer chains step the dense matrix directly.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::SymmetricEigen;
use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use super::hamiltonian::{local_positions, sector_block, sectors, sparse_rows, Sector, XYChainSpec};
use crate::error::{QrcError, Result};

pub const DEFAULT_SUBSTEPS: usize = 200;
/// Largest chain for which the RK4 block transfer matrices are cached.
pub const CACHED_TRANSFER_MAX_QUBITS: usize = 7;
/// Allowed trace drift of one Lindblad application.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PropagationMode {
    Unitary,
    Lindblad { gamma: f64, n_substeps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LindbladStrategy {
    /// Cached for chains up to [`CACHED_TRANSFER_MAX_QUBITS`], stepped above.
    #[default]
    Auto,
    Stepped,
    Cached,
}

pub struct Propagator {
    spec: XYChainSpec,
    tau: f64,
    mode: PropagationMode,
    sectors: Vec<Sector>,
    kernel: Kernel,
    applications: AtomicUsize,
}

enum Kernel {
    Unitary(Vec<Array2<Complex64>>),
    Lindblad(LindbladPlan),
}

struct LindbladPlan {
    gamma: f64,
    n_substeps: usize,
    rows: Vec<Vec<(usize, f64)>>,
    transfer: Option<Vec<TransferBlock>>,
}

struct TransferBlock {
    row_sector: usize,
    col_sector: usize,
    matrix: Array2<Complex64>,
}

pub fn make_propagator(spec: &XYChainSpec, tau: f64, mode: PropagationMode) -> Result<Propagator> {
    Propagator::with_strategy(spec, tau, mode, LindbladStrategy::Auto)
}

impl Propagator {
    pub fn with_strategy(spec: &XYChainSpec, tau: f64, mode: PropagationMode, strategy: LindbladStrategy) -> Result<Self> {
        spec.validate()?;
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(QrcError::invalid(format!("evolution time tau = {tau} must be positive")));
        }
        let n = spec.n_qubits;
        let sectors = sectors(n);
        let local = local_positions(n, &sectors);
        let rows = sparse_rows(spec);
        let kernel = match mode {
            PropagationMode::Unitary => Kernel::Unitary(
                sectors
                    .iter()
                    .map(|s| sector_unitary(&sector_block(&rows, s, &local), tau))
                    .collect::<Result<_>>()?,
            ),
            PropagationMode::Lindblad { gamma, n_substeps } => {
                if !(gamma >= 0.0) || !gamma.is_finite() {
                    return Err(QrcError::invalid(format!("dephasing rate gamma = {gamma} must be >= 0")));
                }
                if n_substeps == 0 {
                    return Err(QrcError::invalid("n_substeps must be at least 1"));
                }
                let cache = match strategy {
                    LindbladStrategy::Auto => n <= CACHED_TRANSFER_MAX_QUBITS,
                    LindbladStrategy::Stepped => false,
                    LindbladStrategy::Cached => true,
                };
                let transfer = cache.then(|| transfer_blocks(&rows, &sectors, &local, gamma, tau / n_substeps as f64, n_substeps));
                Kernel::Lindblad(LindbladPlan {
                    gamma,
                    n_substeps,
                    rows,
                    transfer,
                })
            }
        };
        Ok(Propagator {
            spec: spec.clone(),
            tau,
            mode,
            sectors,
            kernel,
            applications: AtomicUsize::new(0),
        })
    }

    pub fn spec(&self) -> &XYChainSpec {
        &self.spec
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mode(&self) -> PropagationMode {
        self.mode
    }

    pub fn n_qubits(&self) -> usize {
        self.spec.n_qubits
    }

    pub fn is_unitary(&self) -> bool {
        matches!(self.kernel, Kernel::Unitary(_))
    }

    pub fn uses_cached_transfer(&self) -> bool {
        matches!(&self.kernel, Kernel::Lindblad(p) if p.transfer.is_some())
    }

    /// How many times `apply` or `evolve_states` has run.
    pub fn applications(&self) -> usize {
        self.applications.load(Ordering::Relaxed)
    }

    /// Dense `U`, unitary mode only.
    pub fn unitary_matrix(&self) -> Option<Array2<Complex64>> {
        let Kernel::Unitary(blocks) = &self.kernel else {
            return None;
        };
        let dim = self.spec.dim();
        let mut u = Array2::zeros((dim, dim));
        for (s, block) in self.sectors.iter().zip(blocks) {
            for (i, &a) in s.states.iter().enumerate() {
                for (j, &b) in s.states.iter().enumerate() {
                    u[[a, b]] = block[[i, j]];
                }
            }
        }
        Some(u)
    }

    /// Left-multiply every column of `states` by `U` (unitary mode only).
    pub fn evolve_states(&self, states: &mut Array2<Complex64>) -> Result<()> {
        let Kernel::Unitary(blocks) = &self.kernel else {
            return Err(QrcError::invalid("state-vector evolution needs a unitary propagator"));
        };
        if states.nrows() != self.spec.dim() {
            return Err(QrcError::dim(format!(
                "state has {} rows, propagator acts on {}",
                states.nrows(),
                self.spec.dim()
            )));
        }
        self.applications.fetch_add(1, Ordering::Relaxed);
        left_multiply(&self.sectors, blocks, states);
        Ok(())
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.spec.dim() {
            return Err(QrcError::dim(format!(
                "density matrix of dimension {} given to a {}-dimensional propagator",
                rho.dim(),
                self.spec.dim()
            )));
        }
        self.applications.fetch_add(1, Ordering::Relaxed);
        match &self.kernel {
            Kernel::Unitary(blocks) => {
                // U rho U^dagger = (U (U rho)^dagger)^dagger
                let mut w = rho.matrix().clone();
                left_multiply(&self.sectors, blocks, &mut w);
                let mut v = w.t().mapv(|z| z.conj());
                left_multiply(&self.sectors, blocks, &mut v);
                DensityMatrix::from_matrix(v.t().mapv(|z| z.conj()))
            }
            Kernel::Lindblad(plan) => {
                let out = match &plan.transfer {
                    Some(blocks) => apply_transfer(&self.sectors, blocks, rho.matrix()),
                    None => rk4_evolve(&plan.rows, plan.gamma, self.tau, plan.n_substeps, rho.matrix()),
                };
                let mut out = DensityMatrix::from_matrix(out)?;
                let drift = (out.trace() - rho.trace()).norm();
                if drift > TRACE_DRIFT_LIMIT || !drift.is_finite() {
                    return Err(QrcError::guard(format!(
                        "Lindblad trace drift {drift:e} exceeds {TRACE_DRIFT_LIMIT:e}; increase n_substeps"
                    )));
                }
                out.hermitize();
                Ok(out)
            }
        }
    }
}

fn sector_unitary(h: &nalgebra::DMatrix<f64>, tau: f64) -> Result<Array2<Complex64>> {
    let c = h.nrows();
    let eig = SymmetricEigen::new(h.clone());
    if eig.eigenvalues.iter().chain(eig.eigenvectors.iter()).any(|v| !v.is_finite()) {
        return Err(QrcError::guard("eigendecomposition produced non-finite entries"));
    }
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|e| Complex64::from_polar(1.0, -e * tau))
        .collect();
    let v = &eig.eigenvectors;
    let scaled = Array2::from_shape_fn((c, c), |(a, m)| phases[m] * v[(a, m)]);
    let vt = Array2::from_shape_fn((c, c), |(m, b)| Complex64::new(v[(b, m)], 0.0));
    Ok(scaled.dot(&vt))
}

fn left_multiply(sectors: &[Sector], blocks: &[Array2<Complex64>], states: &mut Array2<Complex64>) {
    for (s, u) in sectors.iter().zip(blocks) {
        let gathered = states.select(Axis(0), &s.states);
        let evolved = u.dot(&gathered);
        for (row, &a) in evolved.outer_iter().zip(&s.states) {
            states.row_mut(a).assign(&row);
        }
    }
}

/// `-i [H, rho] - 2 gamma hamming(a, b) rho_ab`, written into `out`.
fn lindblad_rhs(rows: &[Vec<(usize, f64)>], gamma: f64, rho: &[Complex64], out: &mut [Complex64]) {
    let n = rows.len();
    for a in 0..n {
        let out_row = &mut out[a * n..(a + 1) * n];
        out_row.fill(ZERO);
        for &(c, v) in &rows[a] {
            let src = &rho[c * n..(c + 1) * n];
            for (o, s) in out_row.iter_mut().zip(src) {
                *o += s * v;
            }
        }
        let rho_row = &rho[a * n..(a + 1) * n];
        for b in 0..n {
            let rh: Complex64 = rows[b].iter().map(|&(c, v)| rho_row[c] * v).sum();
            let hd = (a ^ b).count_ones() as f64;
            out_row[b] = MINUS_I * (out_row[b] - rh) - rho_row[b] * (2.0 * gamma * hd);
        }
    }
}

fn rk4_evolve(rows: &[Vec<(usize, f64)>], gamma: f64, tau: f64, n_substeps: usize, rho: &Array2<Complex64>) -> Array2<Complex64> {
    let dim = rho.nrows();
    let dt = tau / n_substeps as f64;
    let mut state: Vec<Complex64> = rho.iter().copied().collect();
    let len = state.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![ZERO; len],
        vec![ZERO; len],
        vec![ZERO; len],
        vec![ZERO; len],
        vec![ZERO; len],
    );
    let axpy = |dst: &mut [Complex64], base: &[Complex64], k: &[Complex64], h: f64| {
        for ((d, b), k) in dst.iter_mut().zip(base).zip(k) {
            *d = b + k * h;
        }
    };
    for _ in 0..n_substeps {
        lindblad_rhs(rows, gamma, &state, &mut k1);
        axpy(&mut tmp, &state, &k1, 0.5 * dt);
        lindblad_rhs(rows, gamma, &tmp, &mut k2);
        axpy(&mut tmp, &state, &k2, 0.5 * dt);
        lindblad_rhs(rows, gamma, &tmp, &mut k3);
        axpy(&mut tmp, &state, &k3, dt);
        lindblad_rhs(rows, gamma, &tmp, &mut k4);
        for i in 0..len {
            state[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
    Array2::from_shape_vec((dim, dim), state).expect("shape preserved")
}

/// Sector-local sparse rows of H.
fn local_rows(rows: &[Vec<(usize, f64)>], sector: &Sector, local: &[usize]) -> Vec<Vec<(usize, f64)>> {
    sector
        .states
        .iter()
        .map(|&a| rows[a].iter().map(|&(b, v)| (local[b], v)).collect())
        .collect()
}

fn transfer_blocks(
    rows: &[Vec<(usize, f64)>],
    sectors: &[Sector],
    local: &[usize],
    gamma: f64,
    dt: f64,
    n_substeps: usize,
) -> Vec<TransferBlock> {
    let loc: Vec<_> = sectors.iter().map(|s| local_rows(rows, s, local)).collect();
    let pairs: Vec<(usize, usize)> = (0..sectors.len())
        .flat_map(|k| (k..sectors.len()).map(move |l| (k, l)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(k, l)| {
            let step = rk4_step_matrix(&loc[k], &loc[l], &sectors[k].states, &sectors[l].states, gamma, dt);
            TransferBlock {
                row_sector: k,
                col_sector: l,
                matrix: matrix_power(step, n_substeps),
            }
        })
        .collect()
}

/// Matrix of one RK4 step `P(dt L)` on the row-major vectorised block.
fn rk4_step_matrix(
    hk: &[Vec<(usize, f64)>],
    hl: &[Vec<(usize, f64)>],
    states_k: &[usize],
    states_l: &[usize],
    gamma: f64,
    dt: f64,
) -> Array2<Complex64> {
    let (ck, cl) = (hk.len(), hl.len());
    let d = ck * cl;
    let deph: Vec<f64> = (0..d)
        .map(|i| -2.0 * gamma * (states_k[i / cl] ^ states_l[i % cl]).count_ones() as f64)
        .collect();
    let apply_l = |x: &[Complex64], y: &mut [Complex64]| {
        for a in 0..ck {
            for b in 0..cl {
                let mut hx = ZERO;
                for &(c, v) in &hk[a] {
                    hx += x[c * cl + b] * v;
                }
                let mut xh = ZERO;
                for &(c, v) in &hl[b] {
                    xh += x[a * cl + c] * v;
                }
                let i = a * cl + b;
                y[i] = MINUS_I * (hx - xh) + x[i] * deph[i];
            }
        }
    };
    let mut out = Array2::zeros((d, d));
    let mut y = vec![ZERO; d];
    let mut ly = vec![ZERO; d];
    for j in 0..d {
        // Horner form of 1 + z + z^2/2 + z^3/6 + z^4/24 applied to e_j.
        y.fill(ZERO);
        y[j] = ONE;
        for coef in [0.25, 1.0 / 3.0, 0.5, 1.0] {
            apply_l(&y, &mut ly);
            for (yi, li) in y.iter_mut().zip(&ly) {
                *yi = li * (dt * coef);
            }
            y[j] += ONE;
        }
        out.column_mut(j).assign(&Array1::from(y.clone()));
    }
    out
}

fn matrix_power(mut base: Array2<Complex64>, mut exp: usize) -> Array2<Complex64> {
    let mut acc: Option<Array2<Complex64>> = None;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = Some(match acc {
                Some(m) => m.dot(&base),
                None => base.clone(),
            });
        }
        exp >>= 1;
        if exp > 0 {
            base = base.dot(&base);
        }
    }
    acc.unwrap_or_else(|| Array2::eye(base.nrows()))
}

fn apply_transfer(sectors: &[Sector], blocks: &[TransferBlock], rho: &Array2<Complex64>) -> Array2<Complex64> {
    let dim = rho.nrows();
    let mut out = Array2::zeros((dim, dim));
    for blk in blocks {
        let sk = &sectors[blk.row_sector].states;
        let sl = &sectors[blk.col_sector].states;
        let x = Array1::from_iter(sk.iter().flat_map(|&a| sl.iter().map(move |&b| rho[[a, b]])));
        let y = blk.matrix.dot(&x);
        let cl = sl.len();
        for (i, &a) in sk.iter().enumerate() {
            for (j, &b) in sl.iter().enumerate() {
                let v = y[i * cl + j];
                out[[a, b]] = v;
                if blk.row_sector != blk.col_sector {
                    out[[b, a]] = v.conj();
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::density::{encode_qubit, inject, Encoding};
    use crate::quantum::hamiltonian::{build_hamiltonian, Boundary};

    fn max_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
        (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn dagger(m: &Array2<Complex64>) -> Array2<Complex64> {
        m.t().mapv(|z| z.conj())
    }

    fn test_state(n: usize) -> DensityMatrix {
        let inputs: Vec<_> = (0..n - 1)
            .map(|i| encode_qubit(0.15 + 0.2 * i as f64, Encoding::Linear).unwrap())
            .collect();
        let hidden = DensityMatrix::maximally_mixed(1);
        let mut m = inject(&inputs, &hidden).unwrap().into_matrix();
        // Add a coherent admixture so every sector block is populated.
        let psi: Vec<Complex64> = (0..1 << n)
            .map(|i| Complex64::new(((i + 1) as f64).sqrt(), (i as f64 * 0.3).sin()))
            .collect();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        for a in 0..1 << n {
            for b in 0..1 << n {
                m[[a, b]] = m[[a, b]] * 0.6 + psi[a] * psi[b].conj() * (0.4 / norm);
            }
        }
        DensityMatrix::from_matrix(m).unwrap()
    }

    fn spec3() -> XYChainSpec {
        XYChainSpec::new(vec![0.2, 0.8, 0.5], 1.0, Boundary::Open).unwrap()
    }

    #[test]
    fn unitary_is_unitary() {
        for spec in [spec3(), XYChainSpec::random(6, 4, Boundary::Periodic).unwrap()] {
            let p = make_propagator(&spec, 1.0, PropagationMode::Unitary).unwrap();
            let u = p.unitary_matrix().unwrap();
            let eye = Array2::<Complex64>::eye(spec.dim());
            assert!(max_diff(&dagger(&u).dot(&u), &eye) < 1e-10);
        }
    }

    #[test]
    fn unitary_matches_series_exponential() {
        // Oracle: Taylor series of exp(-i H tau) with many small steps.
        let spec = spec3();
        let h = build_hamiltonian(&spec).unwrap();
        let tau = 0.7;
        let steps = 64;
        let a = h.mapv(|z| z * MINUS_I * (tau / steps as f64));
        let mut step = Array2::<Complex64>::eye(8);
        let mut term = Array2::<Complex64>::eye(8);
        for k in 1..20 {
            term = term.dot(&a).mapv(|z| z / k as f64);
            step = step + &term;
        }
        let mut oracle = Array2::<Complex64>::eye(8);
        for _ in 0..steps {
            oracle = oracle.dot(&step);
        }
        let p = make_propagator(&spec, tau, PropagationMode::Unitary).unwrap();
        assert!(max_diff(&p.unitary_matrix().unwrap(), &oracle) < 1e-10);
    }

    #[test]
    fn tiny_tau_is_identity_and_zero_rejected() {
        let spec = spec3();
        assert!(make_propagator(&spec, 0.0, PropagationMode::Unitary).is_err());
        let p = make_propagator(&spec, 1e-9, PropagationMode::Unitary).unwrap();
        assert!(max_diff(&p.unitary_matrix().unwrap(), &Array2::eye(8)) < 1e-7);
    }

    #[test]
    fn decoupled_chain_is_diagonal_phases() {
        let spec = XYChainSpec::new(vec![0.3, 0.7], 0.0, Boundary::Open).unwrap();
        let tau = 1.3;
        let u = make_propagator(&spec, tau, PropagationMode::Unitary).unwrap().unitary_matrix().unwrap();
        for a in 0..4 {
            let energy: f64 = (0..2)
                .map(|j| if a & (1 << (1 - j)) == 0 { spec.fields[j] } else { -spec.fields[j] })
                .sum();
            assert!((u[[a, a]] - Complex64::from_polar(1.0, -energy * tau)).norm() < 1e-12);
            for b in 0..4 {
                if a != b {
                    assert!(u[[a, b]].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn unitary_apply_matches_dense_product() {
        let spec = spec3();
        let p = make_propagator(&spec, 1.0, PropagationMode::Unitary).unwrap();
        let rho = test_state(3);
        let u = p.unitary_matrix().unwrap();
        let dense = u.dot(rho.matrix()).dot(&dagger(&u));
        let out = p.apply(&rho).unwrap();
        assert!(max_diff(out.matrix(), &dense) < 1e-12);
        assert!((out.trace() - ONE).norm() < 1e-10);
        out.check_physical(1e-10, 1e-10, 1e-8).unwrap();
        assert_eq!(p.applications(), 1);
    }

    #[test]
    fn zero_gamma_lindblad_matches_unitary() {
        let spec = spec3();
        let rho = test_state(3);
        let unitary = make_propagator(&spec, 1.0, PropagationMode::Unitary).unwrap().apply(&rho).unwrap();
        for strategy in [LindbladStrategy::Stepped, LindbladStrategy::Cached] {
            let mode = PropagationMode::Lindblad { gamma: 0.0, n_substeps: DEFAULT_SUBSTEPS };
            let lind = Propagator::with_strategy(&spec, 1.0, mode, strategy).unwrap().apply(&rho).unwrap();
            assert!(max_diff(lind.matrix(), unitary.matrix()) < 1e-7, "{strategy:?}");
        }
    }

    #[test]
    fn cached_transfer_equals_stepping() {
        let spec = XYChainSpec::new(vec![0.1, 0.9, 0.4, 0.6], 1.0, Boundary::Open).unwrap();
        let rho = test_state(4);
        let mode = PropagationMode::Lindblad { gamma: 0.3, n_substeps: 50 };
        let stepped = Propagator::with_strategy(&spec, 0.8, mode, LindbladStrategy::Stepped).unwrap();
        let cached = Propagator::with_strategy(&spec, 0.8, mode, LindbladStrategy::Cached).unwrap();
        assert!(cached.uses_cached_transfer() && !stepped.uses_cached_transfer());
        let a = stepped.apply(&rho).unwrap();
        let b = cached.apply(&rho).unwrap();
        assert!(max_diff(a.matrix(), b.matrix()) < 1e-10);
    }

    #[test]
    fn single_qubit_dephasing_decay() {
        let h = 0.4;
        let gamma = 0.25;
        let tau = 1.0;
        let spec = XYChainSpec::new(vec![h], 1.0, Boundary::Open).unwrap();
        let rho = encode_qubit(0.3, Encoding::Linear).unwrap();
        let mode = PropagationMode::Lindblad { gamma, n_substeps: DEFAULT_SUBSTEPS };
        for strategy in [LindbladStrategy::Stepped, LindbladStrategy::Cached] {
            let out = Propagator::with_strategy(&spec, tau, mode, strategy).unwrap().apply(&rho).unwrap();
            let expected = rho.matrix()[[0, 1]] * Complex64::from_polar(1.0, -2.0 * h * tau) * (-2.0 * gamma * tau).exp();
            assert!((out.matrix()[[0, 1]] - expected).norm() < 1e-6);
            assert!((out.matrix()[[0, 0]] - rho.matrix()[[0, 0]]).norm() < 1e-12);
        }
    }

    #[test]
    fn maximally_mixed_is_fixed_point() {
        let spec = spec3();
        let mixed = DensityMatrix::maximally_mixed(3);
        for mode in [
            PropagationMode::Unitary,
            PropagationMode::Lindblad { gamma: 0.5, n_substeps: DEFAULT_SUBSTEPS },
        ] {
            let out = make_propagator(&spec, 1.0, mode).unwrap().apply(&mixed).unwrap();
            assert!(max_diff(out.matrix(), mixed.matrix()) < 1e-10);
        }
    }

    #[test]
    fn dephasing_fixes_diagonal_states() {
        let spec = XYChainSpec::new(vec![0.2, 0.6, 0.9], 0.0, Boundary::Open).unwrap();
        let mut m = Array2::zeros((8, 8));
        for (a, p) in [(0, 0.5), (3, 0.3), (6, 0.2)] {
            m[[a, a]] = Complex64::new(p, 0.0);
        }
        let rho = DensityMatrix::from_matrix(m).unwrap();
        let mode = PropagationMode::Lindblad { gamma: 0.7, n_substeps: DEFAULT_SUBSTEPS };
        let out = make_propagator(&spec, 1.0, mode).unwrap().apply(&rho).unwrap();
        assert!(max_diff(out.matrix(), rho.matrix()) < 1e-10);
    }

    #[test]
    fn lindblad_preserves_physicality_and_converges() {
        let spec = XYChainSpec::random(4, 9, Boundary::Open).unwrap();
        let rho = test_state(4);
        for gamma in [0.05, 0.5] {
            let coarse = make_propagator(&spec, 1.0, PropagationMode::Lindblad { gamma, n_substeps: 200 }).unwrap();
            let fine = make_propagator(&spec, 1.0, PropagationMode::Lindblad { gamma, n_substeps: 400 }).unwrap();
            let a = coarse.apply(&rho).unwrap();
            let b = fine.apply(&rho).unwrap();
            assert!((a.trace() - ONE).norm() < 1e-8);
            assert!(a.hermiticity_error() < 1e-8);
            assert!(a.min_eigenvalue() > -1e-8);
            assert!(max_diff(a.matrix(), b.matrix()) < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_modes() {
        let spec = spec3();
        assert!(make_propagator(&spec, 1.0, PropagationMode::Lindblad { gamma: -0.1, n_substeps: 10 }).is_err());
        assert!(make_propagator(&spec, 1.0, PropagationMode::Lindblad { gamma: 0.1, n_substeps: 0 }).is_err());
        let p = make_propagator(&spec, 1.0, PropagationMode::Unitary).unwrap();
        assert!(p.apply(&DensityMatrix::zero_state(2)).is_err());
    }

    #[test]
    fn non_finite_state_trips_trace_guard() {
        let spec = XYChainSpec::new(vec![0.5, 0.5], 1.0, Boundary::Open).unwrap();
        let mode = PropagationMode::Lindblad { gamma: 0.1, n_substeps: 10 };
        let mut m = DensityMatrix::zero_state(2).into_matrix();
        m[[1, 2]] = Complex64::new(f64::NAN, 0.0);
        let rho = DensityMatrix::from_matrix(m).unwrap();
        for strategy in [LindbladStrategy::Stepped, LindbladStrategy::Cached] {
            let p = Propagator::with_strategy(&spec, 1.0, mode, strategy).unwrap();
            assert!(matches!(p.apply(&rho), Err(QrcError::NumericalGuard(_))));
        }
    }
}
