//! Dephasing study: a readout fit without noise versus one fit under the
//! same dephasing it is tested with.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::params_for;
use super::{check_map, StudySettings};
use crate::chaos::{build_dataset, build_windows, MapKind};
use crate::error::{QrcError, Result};
use crate::readout::{dataset_hash, evaluate, train_on_windows, windows_hash};
use crate::reservoir::ReservoirConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub gamma: f64,
    /// Readout fit at `gamma = 0`, scored on features at `gamma`.
    pub rmse_clean_trained: f64,
    /// Readout fit and scored at `gamma`.
    pub rmse_insitu: f64,
    /// Hash of the training windows each arm consumed.
    pub clean_windows_hash: String,
    pub insitu_windows_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseResult {
    pub kind: MapKind,
    pub control: f64,
    pub dataset_hash: String,
    pub points: Vec<NoisePoint>,
}

pub fn noise_robustness(
    kind: MapKind,
    control: f64,
    gammas: &[f64],
    template: &ReservoirConfig,
    settings: &StudySettings,
) -> Result<NoiseResult> {
    if gammas.is_empty() || gammas.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
        return Err(QrcError::invalid("gamma grid must be non-empty with finite values >= 0"));
    }
    let params = params_for(kind, control);
    check_map(&params, template)?;
    let dataset = build_dataset(&params, &settings.dataset)?;
    let windows = build_windows(&dataset, template.layers, settings.eval.gap)?;
    let shared_hash = windows_hash(&windows);

    let clean_cfg = template.with_gamma(0.0);
    let clean_prop = clean_cfg.propagator()?;
    let clean_model = train_on_windows(&clean_cfg, &clean_prop, &windows, settings.epsilon)?;

    let points = gammas
        .par_iter()
        .map(|&gamma| {
            let cfg = template.with_gamma(gamma);
            let prop = cfg.propagator()?;
            let clean = evaluate(&cfg, &prop, &clean_model, &dataset.test, &settings.eval)?;
            let insitu_model = train_on_windows(&cfg, &prop, &windows, settings.epsilon)?;
            let insitu = evaluate(&cfg, &prop, &insitu_model, &dataset.test, &settings.eval)?;
            Ok(NoisePoint {
                gamma,
                rmse_clean_trained: clean.aggregate_rmse,
                rmse_insitu: insitu.aggregate_rmse,
                clean_windows_hash: shared_hash.clone(),
                insitu_windows_hash: windows_hash(&windows),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseResult {
        kind,
        control,
        dataset_hash: dataset_hash(&dataset),
        points,
    })
}
