//! RMSE statistics over independently drawn random-field reservoirs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::params_for;
use super::{check_map, fit_poisson, median, run_on_dataset, Histogram, PoissonFit, StudySettings};
use crate::chaos::{build_dataset, MapKind};
use crate::error::{QrcError, Result};
use crate::reservoir::ReservoirConfig;
use crate::seeding::{derive_seed, Stream};

pub const DEFAULT_BINS: usize = 40;
pub const DEFAULT_SAMPLES: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFailure {
    pub index: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub kind: MapKind,
    pub control: f64,
    pub base_seed: u64,
    /// Field seed of every sample, by sample index.
    pub seeds: Vec<u64>,
    /// RMSE of every successful sample, by sample index.
    pub rmses: Vec<Option<f64>>,
    pub failures: Vec<EnsembleFailure>,
    pub histogram: Histogram,
    pub poisson: PoissonFit,
}

impl EnsembleReport {
    pub fn successful(&self) -> Vec<f64> {
        self.rmses.iter().flatten().copied().collect()
    }

    pub fn n_bins(&self) -> usize {
        self.histogram.n_bins()
    }

    /// Fraction of successful samples in the lower half of the RMSE range.
    pub fn lower_half_fraction(&self) -> f64 {
        let half = self.histogram.n_bins() / 2;
        self.histogram.counts[..half].iter().sum::<usize>() as f64 / self.histogram.total() as f64
    }

    /// Fraction of successful samples with RMSE at most `factor` times the median.
    pub fn within_median_multiple(&self, factor: f64) -> f64 {
        let ok = self.successful();
        let m = median(&ok).unwrap_or(0.0);
        ok.iter().filter(|&&v| v <= factor * m).count() as f64 / ok.len() as f64
    }
}

/// Field seed of ensemble sample `index`.
pub fn sample_seed(base_seed: u64, index: usize) -> u64 {
    derive_seed(base_seed, Stream::Ensemble, index as u64)
}

pub fn hamiltonian_ensemble(
    kind: MapKind,
    control: f64,
    n_samples: usize,
    n_bins: usize,
    template: &ReservoirConfig,
    base_seed: u64,
    settings: &StudySettings,
) -> Result<EnsembleReport> {
    if n_samples < 10 {
        return Err(QrcError::invalid(format!("ensemble needs at least 10 samples, got {n_samples}")));
    }
    let params = params_for(kind, control);
    check_map(&params, template)?;
    let dataset = build_dataset(&params, &settings.dataset)?;
    let seeds: Vec<u64> = (0..n_samples).map(|i| sample_seed(base_seed, i)).collect();
    let outcomes: Vec<std::result::Result<f64, String>> = seeds
        .par_iter()
        .map(|&seed| {
            let run = template
                .with_seed(seed)
                .and_then(|cfg| run_on_dataset(dataset.clone(), &cfg, settings));
            match run {
                Ok(r) if r.report.aggregate_rmse.is_finite() => Ok(r.report.aggregate_rmse),
                Ok(r) => Err(format!("non-finite RMSE {}", r.report.aggregate_rmse)),
                Err(e) => Err(e.to_string()),
            }
        })
        .collect();
    let mut rmses = Vec::with_capacity(n_samples);
    let mut failures = Vec::new();
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(v) => rmses.push(Some(v)),
            Err(message) => {
                rmses.push(None);
                failures.push(EnsembleFailure {
                    index,
                    seed: seeds[index],
                    message,
                });
            }
        }
    }
    let ok: Vec<f64> = rmses.iter().flatten().copied().collect();
    if ok.is_empty() {
        return Err(QrcError::guard("every ensemble sample failed"));
    }
    let histogram = Histogram::equal_width(&ok, n_bins)?;
    let poisson = fit_poisson(&histogram)?;
    Ok(EnsembleReport {
        kind,
        control,
        base_seed,
        seeds,
        rmses,
        failures,
        histogram,
        poisson,
    })
}
