//! Drivers for the bifurcation sweep, architecture grid, dephasing study
//! and random-Hamiltonian ensemble, plus the statistics they report.

pub mod ensemble;
pub mod grid;
pub mod noise;
pub mod stats;
pub mod sweep;

use serde::{Deserialize, Serialize};

use crate::chaos::{build_dataset, DatasetSpec, LyapunovConfig, MapParams, NormalizedDataset};
use crate::error::{QrcError, Result};
use crate::readout::{evaluate, train, EvalSpec, PredictionReport, ReadoutModel, DEFAULT_EPSILON};
use crate::reservoir::ReservoirConfig;

pub use ensemble::{hamiltonian_ensemble, EnsembleReport};
pub use grid::{hyperparameter_grid, GridResult};
pub use noise::{noise_robustness, NoisePoint, NoiseResult};
pub use stats::{count_clusters, fit_poisson, median, spearman, Histogram, PoissonFit};
pub use sweep::{bifurcation_sweep, lle_rmse_correlation, Region, SweepPoint, SweepResult};

/// Dataset, scoring and Lyapunov settings shared by every driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudySettings {
    pub dataset: DatasetSpec,
    pub eval: EvalSpec,
    pub epsilon: f64,
    pub lyapunov: LyapunovConfig,
}

impl Default for StudySettings {
    fn default() -> Self {
        StudySettings {
            dataset: DatasetSpec::default(),
            eval: EvalSpec::default(),
            epsilon: DEFAULT_EPSILON,
            lyapunov: LyapunovConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub dataset: NormalizedDataset,
    pub model: ReadoutModel,
    pub report: PredictionReport,
}

pub(crate) fn check_map(params: &MapParams, cfg: &ReservoirConfig) -> Result<()> {
    if params.dim() != cfg.n_vars {
        return Err(QrcError::dim(format!(
            "{} map has {} variables, reservoir encodes {}",
            params.kind().name(),
            params.dim(),
            cfg.n_vars
        )));
    }
    Ok(())
}

/// Build the dataset, fit the readout and score it on the test series.
pub fn run_once(params: &MapParams, cfg: &ReservoirConfig, settings: &StudySettings) -> Result<TrainedRun> {
    check_map(params, cfg)?;
    let dataset = build_dataset(params, &settings.dataset)?;
    run_on_dataset(dataset, cfg, settings)
}

pub fn run_on_dataset(dataset: NormalizedDataset, cfg: &ReservoirConfig, settings: &StudySettings) -> Result<TrainedRun> {
    let prop = cfg.propagator()?;
    let model = train(cfg, &prop, &dataset, settings.eval.gap, settings.epsilon)?;
    let report = evaluate(cfg, &prop, &model, &dataset.test, &settings.eval)?;
    Ok(TrainedRun { dataset, model, report })
}
