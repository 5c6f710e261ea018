//! Ridge readout `W = Y M^T (M M^T + eps I)^{-1}` and prediction scoring.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chaos::{build_windows, series_windows, NormalizedDataset, TimeSeries, Window};
use crate::error::{QrcError, Result};
use crate::quantum::Propagator;
use crate::reservoir::{batch_features, run_window, ReservoirConfig};

pub const DEFAULT_EPSILON: f64 = 1e-8;
/// 0-based index of the first scored target (t = 151 counted from 1).
pub const DEFAULT_EVAL_START: usize = 150;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub samples: usize,
    pub config_hash: String,
    pub dataset_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutModel {
    /// `targets x features`.
    pub weights: DMatrix<f64>,
    pub epsilon: f64,
    pub meta: TrainingMeta,
}

fn check_finite(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(QrcError::invalid(format!("{name} contains non-finite entries")))
    }
}

/// Solve `(M M^T + eps I) X = M Y^T` and return `W = X^T`.
pub fn ridge_fit(features: &DMatrix<f64>, targets: &DMatrix<f64>, epsilon: f64) -> Result<ReadoutModel> {
    if features.ncols() == 0 || features.ncols() != targets.ncols() {
        return Err(QrcError::dim(format!(
            "features have {} columns, targets {}",
            features.ncols(),
            targets.ncols()
        )));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(QrcError::invalid(format!("epsilon = {epsilon} must be positive")));
    }
    check_finite("feature matrix", features)?;
    check_finite("target matrix", targets)?;

    let f = features.nrows();
    let gram = features * features.transpose() + DMatrix::identity(f, f) * epsilon;
    let rhs = features * targets.transpose();
    let solution = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram
            .lu()
            .solve(&rhs)
            .ok_or_else(|| QrcError::guard("regularised Gram matrix is singular"))?,
    };
    let weights = solution.transpose();
    check_finite("readout weights", &weights)?;
    Ok(ReadoutModel {
        weights,
        epsilon,
        meta: TrainingMeta {
            samples: features.ncols(),
            ..TrainingMeta::default()
        },
    })
}

/// `(sum ||Y - W M||^2 + eps ||W||^2) / s`, the objective minimised by [`ridge_fit`].
pub fn regularized_loss(weights: &DMatrix<f64>, features: &DMatrix<f64>, targets: &DMatrix<f64>, epsilon: f64) -> f64 {
    let resid = targets - weights * features;
    (resid.norm_squared() + epsilon * weights.norm_squared()) / features.ncols() as f64
}

impl ReadoutModel {
    pub fn n_targets(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.weights.ncols()
    }

    /// Raw linear readout `W m`.
    pub fn predict(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.n_features() {
            return Err(QrcError::dim(format!(
                "feature vector has {} entries, model expects {}",
                features.len(),
                self.n_features()
            )));
        }
        Ok((0..self.n_targets())
            .map(|r| self.weights.row(r).iter().zip(features).map(|(w, m)| w * m).sum())
            .collect())
    }

    /// `W m` with every output clamped into `[0, 1]`.
    pub fn predict_clamped(&self, features: &[f64]) -> Result<Vec<f64>> {
        Ok(self.predict(features)?.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    /// Plain-text form: a header block, then one row of weights per line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# qrc readout model v1\n");
        let _ = writeln!(out, "dims {} {}", self.n_targets(), self.n_features());
        let _ = writeln!(out, "epsilon {:e}", self.epsilon);
        let _ = writeln!(out, "samples {}", self.meta.samples);
        let _ = writeln!(out, "config_hash {}", or_dash(&self.meta.config_hash));
        let _ = writeln!(out, "dataset_hash {}", or_dash(&self.meta.dataset_hash));
        for row in self.weights.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let mut header = |key: &str| -> Result<Vec<String>> {
            let line = lines
                .next()
                .ok_or_else(|| QrcError::invalid(format!("model file ends before `{key}`")))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(QrcError::invalid(format!("expected `{key}` line, found `{line}`")));
            }
            Ok(parts.map(str::to_owned).collect())
        };
        let parse_usize = |s: &str| s.parse::<usize>().map_err(|e| QrcError::invalid(format!("bad integer `{s}`: {e}")));
        let dims = header("dims")?;
        if dims.len() != 2 {
            return Err(QrcError::invalid("dims line needs two integers"));
        }
        let (rows, cols) = (parse_usize(&dims[0])?, parse_usize(&dims[1])?);
        let epsilon = parse_f64(header("epsilon")?.first().map(String::as_str).unwrap_or(""))?;
        let samples = parse_usize(header("samples")?.first().map(String::as_str).unwrap_or(""))?;
        let config_hash = from_dash(header("config_hash")?);
        let dataset_hash = from_dash(header("dataset_hash")?);
        let mut values = Vec::with_capacity(rows * cols);
        for line in lines {
            let row = line.split_whitespace().map(parse_f64).collect::<Result<Vec<_>>>()?;
            if row.len() != cols {
                return Err(QrcError::dim(format!("weight row has {} values, expected {cols}", row.len())));
            }
            values.extend(row);
        }
        if values.len() != rows * cols {
            return Err(QrcError::dim(format!("{} weights for a {rows}x{cols} model", values.len())));
        }
        let weights = DMatrix::from_row_slice(rows, cols, &values);
        check_finite("readout weights", &weights)?;
        Ok(ReadoutModel {
            weights,
            epsilon,
            meta: TrainingMeta {
                samples,
                config_hash,
                dataset_hash,
            },
        })
    }
}

fn or_dash(s: &str) -> &str {
    if s.is_empty() {
        "-"
    } else {
        s
    }
}

fn from_dash(parts: Vec<String>) -> String {
    match parts.first().map(String::as_str) {
        None | Some("-") => String::new(),
        Some(s) => s.to_owned(),
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| QrcError::invalid(format!("bad number `{s}`: {e}")))
}

/// Hex sha256 of a serialisable value's JSON form.
pub fn json_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("configuration types serialise");
    hex::encode(Sha256::digest(bytes))
}

/// Hex sha256 over the little-endian bytes of every normalised value.
pub fn dataset_hash(dataset: &NormalizedDataset) -> String {
    let mut h = Sha256::new();
    for s in dataset.train.iter().chain(&dataset.test) {
        for v in s.values() {
            h.update(v.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// Hex sha256 over window inputs and targets, in order.
pub fn windows_hash(windows: &[Window]) -> String {
    let mut h = Sha256::new();
    for w in windows {
        for v in w.inputs.iter().chain(&w.target) {
            h.update(v.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// Featurise every training window, fit the readout against all map variables.
pub fn train(
    cfg: &ReservoirConfig,
    prop: &Propagator,
    dataset: &NormalizedDataset,
    gap: usize,
    epsilon: f64,
) -> Result<ReadoutModel> {
    let windows = build_windows(dataset, cfg.layers, gap)?;
    let mut model = train_on_windows(cfg, prop, &windows, epsilon)?;
    model.meta.dataset_hash = dataset_hash(dataset);
    Ok(model)
}

pub fn train_on_windows(cfg: &ReservoirConfig, prop: &Propagator, windows: &[Window], epsilon: f64) -> Result<ReadoutModel> {
    let features = batch_features(cfg, prop, windows)?;
    let dim = windows[0].target.len();
    let targets = DMatrix::from_fn(dim, windows.len(), |r, c| windows[c].target[r]);
    let mut model = ridge_fit(&features, &targets, epsilon)?;
    model.meta.config_hash = json_hash(cfg);
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    #[default]
    TeacherForced,
    Autonomous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreVars {
    /// First map variable only.
    #[default]
    First,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSpec {
    pub gap: usize,
    pub mode: EvalMode,
    pub eval_start: usize,
    pub score: ScoreVars,
}

impl Default for EvalSpec {
    fn default() -> Self {
        EvalSpec {
            gap: 0,
            mode: EvalMode::TeacherForced,
            eval_start: DEFAULT_EVAL_START,
            score: ScoreVars::First,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPrediction {
    pub series: usize,
    pub target_indices: Vec<usize>,
    /// One state vector per target index, normalised units.
    pub predicted: Vec<Vec<f64>>,
    pub truth: Vec<Vec<f64>>,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionReport {
    pub mode: EvalMode,
    pub gap: usize,
    pub series: Vec<SeriesPrediction>,
    /// Arithmetic mean of per-series RMSE.
    pub aggregate_rmse: f64,
    /// Input values clamped into `[0, 1]` while building windows.
    pub clamped_inputs: usize,
}

fn clamp_count(values: &mut [f64]) -> usize {
    let mut n = 0;
    for v in values {
        if !(0.0..=1.0).contains(v) {
            *v = v.clamp(0.0, 1.0);
            n += 1;
        }
    }
    n
}

/// RMSE between aligned state sequences over the selected variables.
pub fn rmse(predicted: &[Vec<f64>], truth: &[Vec<f64>], score: ScoreVars) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p, t) in predicted.iter().zip(truth) {
        let vars = match score {
            ScoreVars::First => 1,
            ScoreVars::All => p.len(),
        };
        for k in 0..vars {
            sum += (p[k] - t[k]).powi(2);
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        (sum / count as f64).sqrt()
    }
}

fn evaluate_series(
    cfg: &ReservoirConfig,
    prop: &Propagator,
    model: &ReadoutModel,
    series: &TimeSeries,
    id: usize,
    spec: &EvalSpec,
) -> Result<(SeriesPrediction, usize)> {
    let d = cfg.layers;
    let len = series.len();
    if len <= d + spec.gap {
        return Err(QrcError::invalid(format!(
            "series of length {len} is too short for {d} layers and gap {}",
            spec.gap
        )));
    }
    if spec.eval_start >= len {
        return Err(QrcError::invalid(format!(
            "evaluation starts at {} but the series has {len} steps",
            spec.eval_start
        )));
    }
    let first = spec.eval_start.max(d + spec.gap);
    let mut clamped = 0;
    let (indices, predicted) = match spec.mode {
        EvalMode::TeacherForced => {
            let mut windows = series_windows(series, id, d, spec.gap, first)?;
            clamped += windows.iter_mut().map(|w| w.clamp_inputs()).sum::<usize>();
            let features = batch_features(cfg, prop, &windows)?;
            let preds = features
                .column_iter()
                .map(|col| model.predict(col.as_slice()))
                .collect::<Result<Vec<_>>>()?;
            (windows.iter().map(|w| w.target_index).collect::<Vec<_>>(), preds)
        }
        EvalMode::Autonomous => {
            let nv = series.dim();
            let mut working = series.values().to_vec();
            let mut indices = Vec::new();
            let mut preds = Vec::new();
            for t in first..len {
                let start = (t - spec.gap - d) * nv;
                let mut window = working[start..start + d * nv].to_vec();
                clamped += clamp_count(&mut window);
                let f = run_window(cfg, prop, &window)?;
                let p = model.predict(&f.values)?;
                for (k, v) in p.iter().enumerate() {
                    working[t * nv + k] = v.clamp(0.0, 1.0);
                }
                indices.push(t);
                preds.push(p);
            }
            (indices, preds)
        }
    };
    let truth: Vec<Vec<f64>> = indices.iter().map(|&t| series.step(t).to_vec()).collect();
    let predicted = if spec.mode == EvalMode::Autonomous {
        predicted
            .into_iter()
            .map(|p| p.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
            .collect()
    } else {
        predicted
    };
    let rmse = rmse(&predicted, &truth, spec.score);
    Ok((
        SeriesPrediction {
            series: id,
            target_indices: indices,
            predicted,
            truth,
            rmse,
        },
        clamped,
    ))
}

/// Score `model` on every test series over the evaluation span.
pub fn evaluate(
    cfg: &ReservoirConfig,
    prop: &Propagator,
    model: &ReadoutModel,
    test_series: &[TimeSeries],
    spec: &EvalSpec,
) -> Result<PredictionReport> {
    if test_series.is_empty() {
        return Err(QrcError::invalid("no test series"));
    }
    let mut series = Vec::with_capacity(test_series.len());
    let mut clamped_inputs = 0;
    for (id, s) in test_series.iter().enumerate() {
        let (p, c) = evaluate_series(cfg, prop, model, s, id, spec)?;
        series.push(p);
        clamped_inputs += c;
    }
    let aggregate_rmse = series.iter().map(|s| s.rmse).sum::<f64>() / series.len() as f64;
    Ok(PredictionReport {
        mode: spec.mode,
        gap: spec.gap,
        series,
        aggregate_rmse,
        clamped_inputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::{build_dataset, generate_series, DatasetSpec, MapKind, MapParams};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn identity_features() {
        let y = random_matrix(2, 5, 1);
        let model = ridge_fit(&DMatrix::identity(5, 5), &y, DEFAULT_EPSILON).unwrap();
        assert!((&model.weights - &y).amax() < 1e-7);
        let oracle = &y / (1.0 + DEFAULT_EPSILON);
        assert!((&model.weights - oracle).amax() < 1e-12);
    }

    #[test]
    fn planted_model_is_recovered() {
        let m = random_matrix(8, 60, 2);
        let w_true = random_matrix(2, 8, 3);
        let y = &w_true * &m;
        let model = ridge_fit(&m, &y, DEFAULT_EPSILON).unwrap();
        assert!((&model.weights - &w_true).amax() < 1e-6);
        let col: Vec<f64> = m.column(7).iter().copied().collect();
        let p = model.predict(&col).unwrap();
        let want = &w_true * m.column(7);
        for (a, b) in p.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn rank_one_closed_form() {
        let m = DMatrix::from_column_slice(3, 1, &[0.5, -1.0, 2.0]);
        let y = DMatrix::from_column_slice(1, 1, &[0.7]);
        let eps = 1e-3;
        let model = ridge_fit(&m, &y, eps).unwrap();
        let denom = m.norm_squared() + eps;
        for k in 0..3 {
            assert!((model.weights[(0, k)] - 0.7 * m[(k, 0)] / denom).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_shrinks_with_epsilon() {
        let m = random_matrix(6, 10, 4);
        let y = random_matrix(1, 10, 5);
        let norms: Vec<f64> = (1..=8)
            .rev()
            .map(|k| ridge_fit(&m, &y, 10f64.powi(-k)).unwrap().weights.norm())
            .collect();
        assert!(norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{norms:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = random_matrix(2, 3, 6);
        assert!(ridge_fit(&m, &random_matrix(1, 4, 7), 1e-8).is_err());
        assert!(ridge_fit(&m, &random_matrix(1, 3, 7), 0.0).is_err());
        let mut bad = m.clone();
        bad[(0, 0)] = f64::NAN;
        assert!(ridge_fit(&bad, &random_matrix(1, 3, 7), 1e-8).is_err());
    }

    #[test]
    fn simple_predictions() {
        let zero = ReadoutModel {
            weights: DMatrix::zeros(1, 3),
            epsilon: 1e-8,
            meta: TrainingMeta::default(),
        };
        assert_eq!(zero.predict(&[0.3, 0.2, 0.1]).unwrap(), vec![0.0]);
        let ones = ReadoutModel {
            weights: DMatrix::from_element(1, 3, 1.0),
            ..zero.clone()
        };
        assert_eq!(ones.predict(&[0.0, 1.0, 0.0]).unwrap(), vec![1.0]);
        assert!(ones.predict(&[1.0]).is_err());
        assert_eq!(ones.predict_clamped(&[1.0, 1.0, 0.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn text_format_round_trip() {
        let mut model = ridge_fit(&random_matrix(4, 9, 8), &random_matrix(2, 9, 9), 1e-8).unwrap();
        model.meta.config_hash = "abc".into();
        let back = ReadoutModel::from_text(&model.to_text()).unwrap();
        assert_eq!(back, model);
        assert!(ReadoutModel::from_text("dims 2 2\nepsilon 1e-8\n").is_err());
    }

    #[test]
    fn rmse_definitions() {
        let t = vec![vec![0.3], vec![0.4]];
        assert_eq!(rmse(&t, &t, ScoreVars::First), 0.0);
        let zeros = vec![vec![0.0], vec![0.0]];
        let want = ((0.09 + 0.16) / 2.0f64).sqrt();
        assert!((rmse(&zeros, &t, ScoreVars::First) - want).abs() < 1e-15);
        let both = vec![vec![0.0, 3.0]];
        assert_eq!(rmse(&both, &[vec![0.0, 0.0]], ScoreVars::First), 0.0);
        assert!((rmse(&both, &[vec![0.0, 0.0]], ScoreVars::All) - (4.5f64).sqrt()).abs() < 1e-15);
    }

    fn small_dataset(r: f64) -> NormalizedDataset {
        build_dataset(&MapParams::logistic(r), &DatasetSpec::default()).unwrap()
    }

    #[test]
    fn zero_model_scores_root_mean_square() {
        let cfg = ReservoirConfig::standard(MapKind::Logistic, 0).unwrap();
        let prop = cfg.propagator().unwrap();
        let data = small_dataset(3.9);
        let zero = ReadoutModel {
            weights: DMatrix::zeros(1, cfg.n_features()),
            epsilon: 1e-8,
            meta: TrainingMeta::default(),
        };
        let report = evaluate(&cfg, &prop, &zero, &data.test[..2], &EvalSpec::default()).unwrap();
        for (s, series) in report.series.iter().zip(&data.test) {
            let tail: Vec<f64> = series.values()[150..].to_vec();
            let want = (tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64).sqrt();
            assert!((s.rmse - want).abs() < 1e-12);
            assert_eq!(s.target_indices.first(), Some(&150));
            assert_eq!(s.target_indices.len(), 50);
        }
    }

    #[test]
    fn fixed_point_regime_is_learned() {
        let cfg = ReservoirConfig::standard(MapKind::Logistic, 0).unwrap();
        let prop = cfg.propagator().unwrap();
        let data = small_dataset(2.5);
        let model = train(&cfg, &prop, &data, 0, DEFAULT_EPSILON).unwrap();
        let report = evaluate(&cfg, &prop, &model, &data.test, &EvalSpec::default()).unwrap();
        assert!(report.aggregate_rmse < 1e-4, "{}", report.aggregate_rmse);
        assert_eq!(report.series.len(), 10);
        let mean = report.series.iter().map(|s| s.rmse).sum::<f64>() / 10.0;
        assert_eq!(report.aggregate_rmse, mean);
    }

    /// A readout that reproduces the exact map on raw normalised values.
    fn exact_rollout_rmse(r: f64) -> f64 {
        let params = MapParams::logistic(r);
        let start = [0.2];
        let truth = generate_series(&params, &start, 200).unwrap();
        let mut x = start[0] + 1e-10;
        let mut err = 0.0;
        let n = 50;
        for t in 1..200 {
            x = r * x * (1.0 - x);
            if t >= 150 {
                err += (x - truth.step(t)[0]).powi(2);
            }
        }
        (err / n as f64).sqrt()
    }

    #[test]
    fn autonomous_oracle_tracks_only_regular_orbits() {
        assert!(exact_rollout_rmse(2.5) < 1e-9);
        assert!(exact_rollout_rmse(4.0) > 1e-2);
    }

    #[test]
    fn autonomous_rollout_runs_and_is_clamped() {
        let cfg = ReservoirConfig::standard(MapKind::Logistic, 0).unwrap();
        let prop = cfg.propagator().unwrap();
        let data = small_dataset(2.5);
        let model = train(&cfg, &prop, &data, 0, DEFAULT_EPSILON).unwrap();
        let spec = EvalSpec {
            mode: EvalMode::Autonomous,
            ..EvalSpec::default()
        };
        let report = evaluate(&cfg, &prop, &model, &data.test[..2], &spec).unwrap();
        assert!(report.aggregate_rmse < 1e-4, "{}", report.aggregate_rmse);
        assert!(report.series[0].predicted.iter().all(|p| (0.0..=1.0).contains(&p[0])));
    }

    #[test]
    fn teacher_forced_is_order_invariant() {
        let cfg = ReservoirConfig::standard(MapKind::Logistic, 0).unwrap();
        let prop = cfg.propagator().unwrap();
        let data = small_dataset(3.7);
        let model = train(&cfg, &prop, &data, 0, DEFAULT_EPSILON).unwrap();
        let a = evaluate(&cfg, &prop, &model, &data.test[..3], &EvalSpec::default()).unwrap();
        let rev: Vec<TimeSeries> = data.test[..3].iter().rev().cloned().collect();
        let b = evaluate(&cfg, &prop, &model, &rev, &EvalSpec::default()).unwrap();
        assert!((a.aggregate_rmse - b.aggregate_rmse).abs() < 1e-15);
    }

    #[test]
    fn short_series_rejected() {
        let cfg = ReservoirConfig::standard(MapKind::Logistic, 0).unwrap();
        let prop = cfg.propagator().unwrap();
        let s = generate_series(&MapParams::logistic(3.0), &[0.3], 2).unwrap();
        let zero = ReadoutModel {
            weights: DMatrix::zeros(1, cfg.n_features()),
            epsilon: 1e-8,
            meta: TrainingMeta::default(),
        };
        let spec = EvalSpec { eval_start: 0, ..EvalSpec::default() };
        assert!(evaluate(&cfg, &prop, &zero, &[s], &spec).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn ridge_solution_is_a_local_minimum(seed in 0u64..1000, dir_seed in 0u64..1000) {
            let m = random_matrix(5, 12, seed);
            let y = random_matrix(2, 12, seed + 1);
            let eps = 1e-3;
            let model = ridge_fit(&m, &y, eps).unwrap();
            let base = regularized_loss(&model.weights, &m, &y, eps);
            let mut dw = random_matrix(2, 5, dir_seed + 7);
            dw *= 1e-3 / dw.norm();
            let moved = regularized_loss(&(&model.weights + dw), &m, &y, eps);
            prop_assert!(moved >= base - 1e-12);
        }
    }
}
