//! Control-parameter sweep: predicted bifurcation diagram, RMSE and LLE.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_once, spearman, StudySettings};
use crate::chaos::{largest_lyapunov, MapKind, MapParams};
use crate::error::{QrcError, Result};
use crate::reservoir::ReservoirConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub control: f64,
    pub lle: f64,
    pub rmse: f64,
    /// First-variable values of test series 0 over the evaluation span, raw units.
    pub true_tail: Vec<f64>,
    pub predicted_tail: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: MapKind,
    pub points: Vec<SweepPoint>,
    pub cfg: ReservoirConfig,
    pub settings: StudySettings,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.control).collect()
    }

    pub fn point_at(&self, control: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| (p.control - control).abs() < 1e-12)
    }

    /// Mean RMSE over points with `LLE > 0` and over the rest.
    pub fn regime_means(&self) -> (Option<f64>, Option<f64>) {
        let mean = |chaotic: bool| {
            let v: Vec<f64> = self
                .points
                .iter()
                .filter(|p| (p.lle > 0.0) == chaotic)
                .map(|p| p.rmse)
                .collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        (mean(true), mean(false))
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub(crate) fn params_for(kind: MapKind, control: f64) -> MapParams {
    match kind {
        MapKind::Logistic => MapParams::logistic(control),
        MapKind::Henon => MapParams::henon(control),
    }
}

pub fn bifurcation_sweep(
    kind: MapKind,
    grid: &[f64],
    template: &ReservoirConfig,
    settings: &StudySettings,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(QrcError::invalid("sweep grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(QrcError::invalid("sweep grid must be strictly increasing"));
    }
    for &c in grid {
        let params = params_for(kind, c);
        params.validate()?;
        if params.outside_sweep_range() {
            return Err(QrcError::invalid(format!(
                "control value {c} outside the {} sweep range",
                kind.name()
            )));
        }
    }
    let points = grid
        .par_iter()
        .map(|&control| {
            let params = params_for(kind, control);
            let lle = largest_lyapunov(&params, &settings.lyapunov)?.lambda_star;
            let run = run_once(&params, template, settings)?;
            let series = &run.report.series[0];
            let raw = |states: &[Vec<f64>]| states.iter().map(|s| run.dataset.denormalize(0, s[0])).collect();
            Ok(SweepPoint {
                control,
                lle,
                rmse: run.report.aggregate_rmse,
                true_tail: raw(&series.truth),
                predicted_tail: raw(&series.predicted),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        kind,
        points,
        cfg: template.clone(),
        settings: *settings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    All,
    /// Points with `LLE > 0`.
    ChaoticOnly,
}

/// Spearman correlation between LLE and aggregate RMSE over a sweep.
pub fn lle_rmse_correlation(sweep: &SweepResult, region: Region) -> Result<f64> {
    if sweep.points.len() < 10 {
        return Err(QrcError::invalid(format!(
            "correlation needs a sweep of at least 10 points, got {}",
            sweep.points.len()
        )));
    }
    let (lle, rmse): (Vec<f64>, Vec<f64>) = sweep
        .points
        .iter()
        .filter(|p| region == Region::All || p.lle > 0.0)
        .map(|p| (p.lle, p.rmse))
        .unzip();
    if lle.len() < 2 {
        return Err(QrcError::invalid(format!("{} points left after filtering", lle.len())));
    }
    spearman(&lle, &rmse)
}
