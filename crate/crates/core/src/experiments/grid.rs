//! Aggregate RMSE over a (layers, repetitions) architecture grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::params_for;
use super::{check_map, run_on_dataset, StudySettings};
use crate::chaos::{build_dataset, MapKind};
use crate::error::{QrcError, Result};
use crate::quantum::MAX_QUBITS;
use crate::reservoir::ReservoirConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub kind: MapKind,
    pub control: f64,
    pub gap: usize,
    pub layers: Vec<usize>,
    pub reps: Vec<usize>,
    /// `rmse[i][j]` for `layers[i]`, `reps[j]`; `None` marks a skipped cell.
    pub rmse: Vec<Vec<Option<f64>>>,
}

impl GridResult {
    /// `(layers, reps, rmse)` of the best evaluated cell.
    pub fn argmin(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, row) in self.rmse.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                if let Some(v) = *cell {
                    if best.is_none_or(|b| v < b.2) {
                        best = Some((self.layers[i], self.reps[j], v));
                    }
                }
            }
        }
        best
    }

    pub fn skipped(&self) -> usize {
        self.rmse.iter().flatten().filter(|c| c.is_none()).count()
    }
}

/// One trained-and-scored reservoir per cell on a shared dataset; cells
/// needing more than the qubit limit are skipped.
pub fn hyperparameter_grid(
    kind: MapKind,
    control: f64,
    layers: &[usize],
    reps: &[usize],
    template: &ReservoirConfig,
    settings: &StudySettings,
) -> Result<GridResult> {
    if layers.is_empty() || reps.is_empty() || layers.contains(&0) || reps.contains(&0) {
        return Err(QrcError::invalid("layer and repetition ranges must be non-empty and start at 1"));
    }
    let params = params_for(kind, control);
    check_map(&params, template)?;
    let dataset = build_dataset(&params, &settings.dataset)?;
    let cells: Vec<(usize, usize)> = layers.iter().flat_map(|&d| reps.iter().map(move |&r| (d, r))).collect();
    let scores = cells
        .par_iter()
        .map(|&(d, r)| {
            if kind.dim() * r + template.n_hidden > MAX_QUBITS {
                return Ok(None);
            }
            let cfg = template.with_architecture(d, r)?;
            Ok(Some(run_on_dataset(dataset.clone(), &cfg, settings)?.report.aggregate_rmse))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridResult {
        kind,
        control,
        gap: settings.eval.gap,
        layers: layers.to_vec(),
        reps: reps.to_vec(),
        rmse: scores.chunks(reps.len()).map(<[_]>::to_vec).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_and_skips() {
        let cfg = ReservoirConfig::standard(MapKind::Henon, 0).unwrap();
        let mut s = StudySettings::default();
        s.dataset.n_train = 10;
        s.dataset.n_test = 2;
        let one = hyperparameter_grid(MapKind::Henon, 1.35, &[1], &[1], &cfg, &s).unwrap();
        assert_eq!(one.rmse.len(), 1);
        assert_eq!(one.rmse[0].len(), 1);
        assert!(one.argmin().is_some());
        let wide = hyperparameter_grid(MapKind::Henon, 1.35, &[1], &[5], &cfg, &s).unwrap();
        assert_eq!(wide.rmse, vec![vec![None]]);
        assert_eq!(wide.skipped(), 1);
        assert!(wide.argmin().is_none());
        assert!(hyperparameter_grid(MapKind::Henon, 1.35, &[0], &[1], &cfg, &s).is_err());
    }
}
