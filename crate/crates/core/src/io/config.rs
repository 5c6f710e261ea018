//! Flat TOML run configuration.
//!
//! Every key is optional. Unset keys resolve to defaults, some of which
//! depend on `map`; see the table in the README. Unknown keys are errors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chaos::{DatasetSpec, LyapunovConfig, MapKind, MapParams};
use crate::error::{QrcError, Result};
use crate::experiments::ensemble::{DEFAULT_BINS, DEFAULT_SAMPLES};
use crate::experiments::StudySettings;
use crate::quantum::{Boundary, Encoding, XYChainSpec, DEFAULT_SUBSTEPS};
use crate::readout::{EvalMode, EvalSpec, ScoreVars, DEFAULT_EPSILON, DEFAULT_EVAL_START};
use crate::reservoir::{InputOrder, ReservoirConfig};

pub use crate::reservoir::{DEFAULT_BIAS, DEFAULT_TAU};
pub const DEFAULT_GAMMAS: [f64; 6] = [0.0, 0.01, 0.05, 0.1, 0.5, 1.0];

/// As written in the file; `None` means "use the default".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub map: Option<MapKind>,
    pub control: Option<f64>,
    pub layers: Option<usize>,
    pub n_rep: Option<usize>,
    pub n_hidden: Option<usize>,
    pub tau: Option<f64>,
    pub gamma: Option<f64>,
    pub n_substeps: Option<usize>,
    pub seed: Option<u64>,
    pub include_bias: Option<bool>,
    pub encoding: Option<Encoding>,
    pub input_order: Option<InputOrder>,
    pub boundary: Option<Boundary>,
    pub coupling: Option<f64>,
    pub epsilon: Option<f64>,
    pub n_train: Option<usize>,
    pub train_len: Option<usize>,
    pub n_test: Option<usize>,
    pub test_len: Option<usize>,
    pub data_seed: Option<u64>,
    pub gap: Option<usize>,
    pub eval_mode: Option<EvalMode>,
    pub eval_start: Option<usize>,
    pub score: Option<ScoreVars>,
    pub lle_transient: Option<usize>,
    pub lle_iter: Option<usize>,
    pub lle_seed: Option<u64>,
    pub sweep_min: Option<f64>,
    pub sweep_max: Option<f64>,
    pub sweep_points: Option<usize>,
    pub grid_layers: Option<Vec<usize>>,
    pub grid_reps: Option<Vec<usize>>,
    pub gammas: Option<Vec<f64>>,
    pub ensemble_samples: Option<usize>,
    pub ensemble_bins: Option<usize>,
    pub ensemble_seed: Option<u64>,
}

/// Every setting with its default materialised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedConfig {
    pub map: MapKind,
    pub control: f64,
    pub layers: usize,
    pub n_rep: usize,
    pub n_hidden: usize,
    pub tau: f64,
    pub gamma: f64,
    pub n_substeps: usize,
    pub seed: u64,
    pub include_bias: bool,
    pub encoding: Encoding,
    pub input_order: InputOrder,
    pub boundary: Boundary,
    pub coupling: f64,
    pub epsilon: f64,
    pub n_train: usize,
    pub train_len: usize,
    pub n_test: usize,
    pub test_len: usize,
    pub data_seed: u64,
    pub gap: usize,
    pub eval_mode: EvalMode,
    pub eval_start: usize,
    pub score: ScoreVars,
    pub lle_transient: usize,
    pub lle_iter: usize,
    pub lle_seed: u64,
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_points: usize,
    pub grid_layers: Vec<usize>,
    pub grid_reps: Vec<usize>,
    pub gammas: Vec<f64>,
    pub ensemble_samples: usize,
    pub ensemble_bins: usize,
    pub ensemble_seed: u64,
}

struct MapDefaults {
    control: f64,
    layers: usize,
    n_rep: usize,
    n_hidden: usize,
    sweep: (f64, f64),
}

fn map_defaults(kind: MapKind) -> MapDefaults {
    match kind {
        MapKind::Logistic => MapDefaults {
            control: 3.75,
            layers: 2,
            n_rep: 2,
            n_hidden: 4,
            sweep: (2.5, 4.0),
        },
        MapKind::Henon => MapDefaults {
            control: 1.35,
            layers: 1,
            n_rep: 2,
            n_hidden: 3,
            sweep: (1.0, 1.4),
        },
    }
}

fn range_error(field: &str, msg: impl std::fmt::Display) -> QrcError {
    QrcError::Config(format!("`{field}` {msg}"))
}

impl RawConfig {
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let map = self.map.unwrap_or(MapKind::Logistic);
        let md = map_defaults(map);
        let lle = LyapunovConfig::default();
        let data = DatasetSpec::default();
        let cfg = ResolvedConfig {
            map,
            control: self.control.unwrap_or(md.control),
            layers: self.layers.unwrap_or(md.layers),
            n_rep: self.n_rep.unwrap_or(md.n_rep),
            n_hidden: self.n_hidden.unwrap_or(md.n_hidden),
            tau: self.tau.unwrap_or(DEFAULT_TAU),
            gamma: self.gamma.unwrap_or(0.0),
            n_substeps: self.n_substeps.unwrap_or(DEFAULT_SUBSTEPS),
            seed: self.seed.unwrap_or(0),
            include_bias: self.include_bias.unwrap_or(DEFAULT_BIAS),
            encoding: self.encoding.unwrap_or_default(),
            input_order: self.input_order.unwrap_or_default(),
            boundary: self.boundary.unwrap_or_default(),
            coupling: self.coupling.unwrap_or(1.0),
            epsilon: self.epsilon.unwrap_or(DEFAULT_EPSILON),
            n_train: self.n_train.unwrap_or(data.n_train),
            train_len: self.train_len.unwrap_or(data.train_len),
            n_test: self.n_test.unwrap_or(data.n_test),
            test_len: self.test_len.unwrap_or(data.test_len),
            data_seed: self.data_seed.unwrap_or(data.seed),
            gap: self.gap.unwrap_or(0),
            eval_mode: self.eval_mode.unwrap_or_default(),
            eval_start: self.eval_start.unwrap_or(DEFAULT_EVAL_START),
            score: self.score.unwrap_or_default(),
            lle_transient: self.lle_transient.unwrap_or(lle.transient),
            lle_iter: self.lle_iter.unwrap_or(lle.n_iter),
            lle_seed: self.lle_seed.unwrap_or(lle.seed),
            sweep_min: self.sweep_min.unwrap_or(md.sweep.0),
            sweep_max: self.sweep_max.unwrap_or(md.sweep.1),
            sweep_points: self.sweep_points.unwrap_or(100),
            grid_layers: self.grid_layers.clone().unwrap_or_else(|| vec![1, 2, 3]),
            grid_reps: self.grid_reps.clone().unwrap_or_else(|| vec![1, 2, 3, 4]),
            gammas: self.gammas.clone().unwrap_or_else(|| DEFAULT_GAMMAS.to_vec()),
            ensemble_samples: self.ensemble_samples.unwrap_or(DEFAULT_SAMPLES),
            ensemble_bins: self.ensemble_bins.unwrap_or(DEFAULT_BINS),
            ensemble_seed: self.ensemble_seed.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ResolvedConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(range_error(field, format!("must be positive, got {v}")))
            }
        };
        let at_least_one = |field: &str, v: usize| {
            if v >= 1 {
                Ok(())
            } else {
                Err(range_error(field, "must be at least 1"))
            }
        };
        positive("tau", self.tau)?;
        positive("epsilon", self.epsilon)?;
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(range_error("gamma", format!("must be >= 0, got {}", self.gamma)));
        }
        if !self.coupling.is_finite() {
            return Err(range_error("coupling", "must be finite"));
        }
        for (field, v) in [
            ("layers", self.layers),
            ("n_rep", self.n_rep),
            ("n_substeps", self.n_substeps),
            ("n_train", self.n_train),
            ("train_len", self.train_len),
            ("n_test", self.n_test),
            ("test_len", self.test_len),
            ("sweep_points", self.sweep_points),
            ("ensemble_bins", self.ensemble_bins),
        ] {
            at_least_one(field, v)?;
        }
        let qubits = self.map.dim() * self.n_rep + self.n_hidden;
        if qubits > crate::quantum::MAX_QUBITS {
            return Err(range_error(
                "n_hidden",
                format!("gives {qubits} qubits with n_rep = {}, limit is 12", self.n_rep),
            ));
        }
        self.params()
            .validate()
            .map_err(|e| range_error("control", e))?;
        if self.lle_iter < 1000 {
            return Err(range_error("lle_iter", "must be at least 1000"));
        }
        if self.lle_transient < 100 {
            return Err(range_error("lle_transient", "must be at least 100"));
        }
        if !(self.sweep_min < self.sweep_max) && self.sweep_points > 1 {
            return Err(range_error("sweep_min", "must be below sweep_max"));
        }
        if self.grid_layers.is_empty() || self.grid_layers.contains(&0) {
            return Err(range_error("grid_layers", "must be non-empty with entries >= 1"));
        }
        if self.grid_reps.is_empty() || self.grid_reps.contains(&0) {
            return Err(range_error("grid_reps", "must be non-empty with entries >= 1"));
        }
        if self.gammas.is_empty() || self.gammas.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(range_error("gammas", "must be non-empty with finite entries >= 0"));
        }
        if self.ensemble_samples < 10 {
            return Err(range_error("ensemble_samples", "must be at least 10"));
        }
        if self.eval_start >= self.test_len {
            return Err(range_error("eval_start", "must be below test_len"));
        }
        if self.test_len <= self.layers + self.gap {
            return Err(range_error("test_len", "must exceed layers + gap"));
        }
        if self.train_len <= self.layers + self.gap {
            return Err(range_error("train_len", "must exceed layers + gap"));
        }
        Ok(())
    }

    pub fn params(&self) -> MapParams {
        match self.map {
            MapKind::Logistic => MapParams::logistic(self.control),
            MapKind::Henon => MapParams::henon(self.control),
        }
    }

    pub fn params_at(&self, control: f64) -> MapParams {
        self.params().with_control(control)
    }

    pub fn reservoir(&self) -> Result<ReservoirConfig> {
        let mut cfg = ReservoirConfig::new(self.map, self.layers, self.n_rep, self.n_hidden, self.seed)?;
        cfg.tau = self.tau;
        cfg.gamma = self.gamma;
        cfg.n_substeps = self.n_substeps;
        cfg.include_bias = self.include_bias;
        cfg.encoding = self.encoding;
        cfg.input_order = self.input_order;
        let mut chain = XYChainSpec::random(cfg.n_qubits(), self.seed, self.boundary)?;
        chain.coupling = self.coupling;
        cfg.chain = chain;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn settings(&self) -> StudySettings {
        StudySettings {
            dataset: DatasetSpec {
                n_train: self.n_train,
                train_len: self.train_len,
                n_test: self.n_test,
                test_len: self.test_len,
                seed: self.data_seed,
            },
            eval: EvalSpec {
                gap: self.gap,
                mode: self.eval_mode,
                eval_start: self.eval_start,
                score: self.score,
            },
            epsilon: self.epsilon,
            lyapunov: LyapunovConfig {
                transient: self.lle_transient,
                n_iter: self.lle_iter,
                seed: self.lle_seed,
            },
        }
    }

    pub fn sweep_grid(&self) -> Vec<f64> {
        crate::experiments::sweep::linspace(self.sweep_min, self.sweep_max, self.sweep_points)
    }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

pub fn parse_config_str(text: &str, origin: &str) -> Result<RawConfig> {
    toml::from_str::<RawConfig>(text).map_err(|e| {
        let (line, col) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        QrcError::Config(format!("{origin}:{line}:{col}: {}", e.message()))
    })
}

/// Read and resolve a configuration file.
pub fn parse_config(path: &Path) -> Result<ResolvedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| QrcError::io(path, e))?;
    parse_config_str(&text, &path.display().to_string())?.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config_str("", "t").unwrap().resolve().unwrap();
        assert_eq!(c.map, MapKind::Logistic);
        assert_eq!((c.layers, c.n_rep, c.n_hidden), (2, 2, 4));
        assert_eq!(c.epsilon, 1e-8);
        assert_eq!((c.n_train, c.train_len, c.n_test, c.test_len), (100, 20, 10, 200));
        let h = parse_config_str("map = \"henon\"", "t").unwrap().resolve().unwrap();
        assert_eq!((h.layers, h.n_rep, h.n_hidden), (1, 2, 3));
        assert_eq!(h.reservoir().unwrap().n_qubits(), 7);
    }

    #[test]
    fn overrides_apply() {
        let c = parse_config_str("tau = 0.5\nboundary = \"periodic\"", "t").unwrap().resolve().unwrap();
        assert_eq!(c.tau, 0.5);
        let r = c.reservoir().unwrap();
        assert_eq!(r.tau, 0.5);
        assert_eq!(r.chain.boundary, Boundary::Periodic);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config_str("tau = 1.0\nfoo = 3", "cfg.toml").unwrap_err().to_string();
        assert!(err.contains("foo"), "{err}");
        assert!(err.contains("cfg.toml:2:1"), "{err}");
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_config_str("tau = 1.0\nlayers = = 2", "c").unwrap_err().to_string();
        assert!(err.contains("c:2:"), "{err}");
    }

    #[test]
    fn range_violations_name_the_field() {
        for (text, field) in [
            ("tau = -1.0", "tau"),
            ("n_rep = 0", "n_rep"),
            ("n_hidden = 11", "n_hidden"),
            ("control = 5.0", "control"),
            ("gammas = []", "gammas"),
            ("ensemble_samples = 3", "ensemble_samples"),
        ] {
            let err = parse_config_str(text, "c").unwrap().resolve().unwrap_err().to_string();
            assert!(err.contains(field), "{text}: {err}");
        }
    }

    #[test]
    fn resolved_form_round_trips_through_toml() {
        let c = parse_config_str("map = \"henon\"\nseed = 7", "t").unwrap().resolve().unwrap();
        let text = toml::to_string(&c).unwrap();
        let raw = parse_config_str(&text, "t").unwrap();
        assert_eq!(raw.resolve().unwrap(), c);
    }
}
