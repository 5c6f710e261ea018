//! `qrc` command-line front end.
//!
//! Settings are layered: a manifest's resolved configuration (for reruns)
//! or a TOML config file, then command-line flags, then defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::chaos::{build_dataset, build_windows, largest_lyapunov, MapKind, NormalizedDataset};
use crate::error::{QrcError, Result};
use crate::experiments::{
    bifurcation_sweep, hamiltonian_ensemble, hyperparameter_grid, lle_rmse_correlation, median, noise_robustness,
    Region,
};
use crate::io::svg::{self, Chart, Series, Style};
use crate::io::{fmt_f64, output_dir, sha256_file, ArtifactWriter, RawConfig, ResolvedConfig, RunManifest};
use crate::readout::{evaluate, train, PredictionReport, ReadoutModel};
use crate::reservoir::batch_features;

#[derive(Debug, Parser)]
#[command(name = "qrc", version, about = "Quantum reservoir computing for chaotic maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the normalised training and test series.
    Generate(CommonArgs),
    /// Estimate the largest Lyapunov exponent.
    Lle(CommonArgs),
    /// Fit a readout and save it.
    Train(TrainArgs),
    /// Score a saved readout on the test series.
    Predict(PredictArgs),
    /// Sweep the control parameter and compare RMSE with the LLE.
    SweepBifurcation(CommonArgs),
    /// RMSE over a (layers, repetitions) grid.
    SweepGrid(CommonArgs),
    /// Noise-free versus in-situ readouts under dephasing.
    SweepNoise(CommonArgs),
    /// RMSE histogram over random-field reservoirs.
    SweepEnsemble(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Rerun from a manifest written by an earlier run.
    #[arg(long, conflicts_with = "config")]
    pub manifest: Option<PathBuf>,
    /// Output directory (default: $QRC_OUT_DIR/<command> or qrc_out/<command>).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,

    #[arg(long, value_parser = parse_enum::<MapKind>)]
    pub map: Option<MapKind>,
    /// Logistic control parameter.
    #[arg(long = "r", conflicts_with = "a")]
    pub r: Option<f64>,
    /// Hénon control parameter.
    #[arg(long = "a")]
    pub a: Option<f64>,
    /// Layer count, or an inclusive range `lo..hi` for sweep-grid.
    #[arg(long)]
    pub layers: Option<String>,
    /// Repetitions per variable, or an inclusive range `lo..hi` for sweep-grid.
    #[arg(long)]
    pub reps: Option<String>,
    #[arg(long)]
    pub n_hidden: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Seed of the random fields.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub data_seed: Option<u64>,
    #[arg(long, value_parser = parse_enum::<crate::quantum::Encoding>)]
    pub encoding: Option<crate::quantum::Encoding>,
    #[arg(long, value_parser = parse_enum::<crate::quantum::Boundary>)]
    pub boundary: Option<crate::quantum::Boundary>,
    #[arg(long)]
    pub gap: Option<usize>,
    #[arg(long, value_parser = parse_enum::<crate::readout::EvalMode>)]
    pub eval_mode: Option<crate::readout::EvalMode>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Append a constant feature (`--bias false` to drop it).
    #[arg(long)]
    pub bias: Option<bool>,
    /// Sweep grid bounds and size.
    #[arg(long)]
    pub sweep_min: Option<f64>,
    #[arg(long)]
    pub sweep_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Comma-separated dephasing rates.
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub ensemble_seed: Option<u64>,
    #[arg(long)]
    pub lle_iter: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also write the training feature matrix.
    #[arg(long)]
    pub features: bool,
}

#[derive(Debug, Args, Clone)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Readout written by `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

fn parse_enum<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase().replace('-', "_")))
        .map_err(|_| format!("unrecognised value `{s}`"))
}

/// `"3"` or `"1..4"` (inclusive).
fn parse_range(field: &str, s: &str) -> Result<Vec<usize>> {
    let bad = || QrcError::Config(format!("`--{field}` expects N or LO..HI, got `{s}`"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    match s.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('=')).map_err(|_| bad())?);
            if lo == 0 || hi < lo {
                return Err(bad());
            }
            Ok((lo..=hi).collect())
        }
        None => Ok(vec![num(s)?]),
    }
}

fn single(field: &str, values: Vec<usize>) -> Result<usize> {
    match values.as_slice() {
        [v] => Ok(*v),
        _ => Err(QrcError::Config(format!("`--{field}` takes a single value for this command"))),
    }
}

impl CommonArgs {
    fn base(&self) -> Result<(RawConfig, BTreeMap<String, String>)> {
        if let Some(m) = &self.manifest {
            let manifest = RunManifest::load(m)?;
            let raw = serde_json::from_value(serde_json::to_value(&manifest.config).expect("config serialises"))
                .map_err(|e| QrcError::Config(format!("manifest config: {e}")))?;
            return Ok((raw, manifest.arguments));
        }
        if let Some(c) = &self.config {
            let text = std::fs::read_to_string(c).map_err(|e| QrcError::io(c, e))?;
            return Ok((crate::io::parse_config_str(&text, &c.display().to_string())?, BTreeMap::new()));
        }
        Ok((RawConfig::default(), BTreeMap::new()))
    }

    /// Resolved configuration; ranges are accepted for `layers`/`reps` only when `grid` is set.
    fn resolve(&self, grid: bool) -> Result<(ResolvedConfig, BTreeMap<String, String>)> {
        let (mut raw, args) = self.base()?;
        macro_rules! over {
            ($($field:ident <- $value:expr),* $(,)?) => { $( if let Some(v) = $value { raw.$field = Some(v); } )* };
        }
        over!(
            map <- self.map,
            control <- self.r.or(self.a),
            n_hidden <- self.n_hidden,
            tau <- self.tau,
            gamma <- self.gamma,
            seed <- self.seed,
            data_seed <- self.data_seed,
            encoding <- self.encoding,
            boundary <- self.boundary,
            gap <- self.gap,
            eval_mode <- self.eval_mode,
            epsilon <- self.epsilon,
            sweep_min <- self.sweep_min,
            sweep_max <- self.sweep_max,
            sweep_points <- self.points,
            gammas <- self.gammas.clone(),
            ensemble_samples <- self.samples,
            ensemble_bins <- self.bins,
            ensemble_seed <- self.ensemble_seed,
            lle_iter <- self.lle_iter,
            include_bias <- self.bias,
        );
        if let Some(s) = &self.layers {
            let v = parse_range("layers", s)?;
            if grid {
                raw.grid_layers = Some(v);
            } else {
                raw.layers = Some(single("layers", v)?);
            }
        }
        if let Some(s) = &self.reps {
            let v = parse_range("reps", s)?;
            if grid {
                raw.grid_reps = Some(v);
            } else {
                raw.n_rep = Some(single("reps", v)?);
            }
        }
        Ok((raw.resolve()?, args))
    }
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub summary: Vec<String>,
}

fn writer(common: &CommonArgs, name: &str, cfg: &ResolvedConfig) -> Result<ArtifactWriter> {
    ArtifactWriter::create(output_dir(common.out.as_deref(), name), RunManifest::new(name, cfg))
}

fn series_rows(dataset: &NormalizedDataset, split: &str) -> Vec<Vec<String>> {
    let pool = if split == "train" { &dataset.train } else { &dataset.test };
    let mut rows = Vec::new();
    for (id, s) in pool.iter().enumerate() {
        for t in 0..s.len() {
            let mut row = vec![id.to_string(), t.to_string()];
            row.extend(s.step(t).iter().map(|&v| fmt_f64(v)));
            rows.push(row);
        }
    }
    rows
}

fn var_names(kind: MapKind) -> &'static [&'static str] {
    match kind {
        MapKind::Logistic => &["x"],
        MapKind::Henon => &["x", "y"],
    }
}

fn cmd_generate(common: &CommonArgs) -> Result<Outcome> {
    let (cfg, _) = common.resolve(false)?;
    let dataset = build_dataset(&cfg.params(), &cfg.settings().dataset)?;
    let mut w = writer(common, "generate", &cfg)?;
    let mut header = vec!["series", "t"];
    header.extend(var_names(cfg.map));
    w.write_csv("train.csv", &header, series_rows(&dataset, "train"))?;
    w.write_csv("test.csv", &header, series_rows(&dataset, "test"))?;
    let scale_rows = dataset
        .scale
        .iter()
        .zip(&dataset.raw_bounds)
        .enumerate()
        .map(|(k, (a, (lo, hi)))| {
            vec![var_names(cfg.map)[k].to_string(), fmt_f64(a.offset), fmt_f64(a.span), fmt_f64(*lo), fmt_f64(*hi)]
        });
    w.write_csv("scale.csv", &["var", "offset", "span", "raw_min", "raw_max"], scale_rows)?;
    let chart = Chart {
        title: format!("{} test series 0 (normalised)", cfg.map.name()),
        x_label: "t".into(),
        y_label: "x".into(),
        log_y: false,
        series: vec![Series {
            label: "x".into(),
            points: dataset.test[0].component(0).enumerate().map(|(t, v)| (t as f64, v)).collect(),
            style: Style::Line,
        }],
    };
    w.write("test_series.svg", chart.to_svg().as_bytes())?;
    let summary = vec![
        format!("train series: {} x {}", dataset.train.len(), cfg.train_len),
        format!("test series: {} x {}", dataset.test.len(), cfg.test_len),
        format!("test values outside [0, 1]: {}", dataset.test_clamp_count()),
    ];
    finish(w, summary)
}

fn finish(w: ArtifactWriter, summary: Vec<String>) -> Result<Outcome> {
    let out_dir = w.dir().to_path_buf();
    w.finish()?;
    Ok(Outcome { out_dir, summary })
}

fn cmd_lle(common: &CommonArgs) -> Result<Outcome> {
    let (cfg, _) = common.resolve(false)?;
    let est = largest_lyapunov(&cfg.params(), &cfg.settings().lyapunov)?;
    let mut w = writer(common, "lle", &cfg)?;
    w.write_csv(
        "lle.csv",
        &["map", "control", "lambda", "n_iter", "transient"],
        [vec![
            cfg.map.name().to_string(),
            fmt_f64(cfg.control),
            fmt_f64(est.lambda_star),
            est.n_iter.to_string(),
            est.transient.to_string(),
        ]],
    )?;
    finish(w, vec![format!("lambda* = {:.6}", est.lambda_star)])
}

fn cmd_train(args: &TrainArgs) -> Result<Outcome> {
    let common = &args.common;
    let (cfg, recorded) = common.resolve(false)?;
    let with_features = args.features || recorded.get("features").is_some_and(|v| v == "true");
    let settings = cfg.settings();
    let reservoir = cfg.reservoir()?;
    let prop = reservoir.propagator()?;
    let dataset = build_dataset(&cfg.params(), &settings.dataset)?;
    let model = train(&reservoir, &prop, &dataset, cfg.gap, cfg.epsilon)?;
    let mut w = writer(common, "train", &cfg)?;
    w.write("model.txt", model.to_text().as_bytes())?;
    if with_features {
        w.manifest.arguments.insert("features".into(), "true".into());
        let windows = build_windows(&dataset, reservoir.layers, cfg.gap)?;
        let m = batch_features(&reservoir, &prop, &windows)?;
        let header: Vec<String> = std::iter::once("feature".to_string())
            .chain((0..m.ncols()).map(|c| format!("w{c}")))
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = m
            .row_iter()
            .enumerate()
            .map(|(r, row)| std::iter::once(r.to_string()).chain(row.iter().map(|&v| fmt_f64(v))).collect());
        w.write_csv("features.csv", &header, rows)?;
    }
    let summary = vec![
        format!("trained on {} windows, {} features", model.meta.samples, model.n_features()),
        format!("model written to {}", w.dir().join("model.txt").display()),
    ];
    finish(w, summary)
}

fn prediction_rows(report: &PredictionReport, dataset: &NormalizedDataset) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for s in &report.series {
        for ((t, p), y) in s.target_indices.iter().zip(&s.predicted).zip(&s.truth) {
            for k in 0..p.len() {
                rows.push(vec![
                    s.series.to_string(),
                    t.to_string(),
                    k.to_string(),
                    fmt_f64(y[k]),
                    fmt_f64(p[k]),
                    fmt_f64(dataset.denormalize(k, y[k])),
                    fmt_f64(dataset.denormalize(k, p[k])),
                ]);
            }
        }
    }
    rows
}

fn cmd_predict(args: &PredictArgs) -> Result<Outcome> {
    let common = &args.common;
    let (cfg, recorded) = common.resolve(false)?;
    let model_path = args
        .model
        .clone()
        .or_else(|| recorded.get("model").map(PathBuf::from))
        .ok_or_else(|| QrcError::invalid("predict needs --model"))?;
    let text = std::fs::read_to_string(&model_path).map_err(|e| QrcError::io(&model_path, e))?;
    let model = ReadoutModel::from_text(&text)?;
    let reservoir = cfg.reservoir()?;
    if model.n_features() != reservoir.n_features() || model.n_targets() != cfg.map.dim() {
        return Err(QrcError::dim(format!(
            "model is {}x{}, configuration needs {}x{}",
            model.n_targets(),
            model.n_features(),
            cfg.map.dim(),
            reservoir.n_features()
        )));
    }
    let prop = reservoir.propagator()?;
    let settings = cfg.settings();
    let dataset = build_dataset(&cfg.params(), &settings.dataset)?;
    let report = evaluate(&reservoir, &prop, &model, &dataset.test, &settings.eval)?;

    let mut w = writer(common, "predict", &cfg)?;
    w.manifest.arguments.insert("model".into(), model_path.display().to_string());
    w.manifest.inputs.insert(model_path.display().to_string(), sha256_file(&model_path)?);
    w.write_csv(
        "predictions.csv",
        &["series", "t", "var", "true", "predicted", "true_raw", "predicted_raw"],
        prediction_rows(&report, &dataset),
    )?;
    let rmse_rows = report
        .series
        .iter()
        .map(|s| vec![s.series.to_string(), fmt_f64(s.rmse)])
        .chain(std::iter::once(vec!["mean".to_string(), fmt_f64(report.aggregate_rmse)]));
    w.write_csv("rmse.csv", &["series", "rmse"], rmse_rows)?;
    let s0 = &report.series[0];
    let chart = Chart {
        title: format!("{} test series 0", cfg.map.name()),
        x_label: "t".into(),
        y_label: "x (normalised)".into(),
        log_y: false,
        series: vec![
            Series {
                label: "true".into(),
                points: s0.target_indices.iter().zip(&s0.truth).map(|(&t, v)| (t as f64, v[0])).collect(),
                style: Style::Line,
            },
            Series {
                label: "predicted".into(),
                points: s0.target_indices.iter().zip(&s0.predicted).map(|(&t, v)| (t as f64, v[0])).collect(),
                style: Style::Points,
            },
        ],
    };
    w.write("predictions.svg", chart.to_svg().as_bytes())?;
    let summary = vec![
        format!("aggregate RMSE = {:e} ({:?})", report.aggregate_rmse, report.mode),
        format!("clamped inputs: {}", report.clamped_inputs),
    ];
    finish(w, summary)
}

fn cmd_sweep_bifurcation(common: &CommonArgs) -> Result<Outcome> {
    let (cfg, _) = common.resolve(false)?;
    let reservoir = cfg.reservoir()?;
    let sweep = bifurcation_sweep(cfg.map, &cfg.sweep_grid(), &reservoir, &cfg.settings())?;
    let mut w = writer(common, "sweep-bifurcation", &cfg)?;
    w.write_csv(
        "sweep.csv",
        &["control", "lle", "rmse"],
        sweep.points.iter().map(|p| vec![fmt_f64(p.control), fmt_f64(p.lle), fmt_f64(p.rmse)]),
    )?;
    let mut tail_rows = Vec::new();
    for p in &sweep.points {
        for (i, (t, q)) in p.true_tail.iter().zip(&p.predicted_tail).enumerate() {
            tail_rows.push(vec![fmt_f64(p.control), (cfg.eval_start + i).to_string(), fmt_f64(*t), fmt_f64(*q)]);
        }
    }
    w.write_csv("bifurcation.csv", &["control", "t", "true", "predicted"], tail_rows)?;

    let corr = |region| match lle_rmse_correlation(&sweep, region) {
        Ok(v) => fmt_f64(v),
        Err(_) => "NA".to_string(),
    };
    let (chaotic, regular) = sweep.regime_means();
    let opt = |v: Option<f64>| v.map_or("NA".to_string(), fmt_f64);
    let summary_rows = vec![
        vec!["spearman_all".to_string(), corr(Region::All)],
        vec!["spearman_chaotic".to_string(), corr(Region::ChaoticOnly)],
        vec!["mean_rmse_chaotic".to_string(), opt(chaotic)],
        vec!["mean_rmse_regular".to_string(), opt(regular)],
    ];
    w.write_csv("summary.csv", &["metric", "value"], summary_rows.clone())?;

    let scatter = |tail: fn(&crate::experiments::SweepPoint) -> &Vec<f64>| {
        sweep
            .points
            .iter()
            .flat_map(|p| tail(p).iter().map(move |&v| (p.control, v)))
            .collect::<Vec<_>>()
    };
    let bif = Chart {
        title: format!("{} bifurcation diagram", cfg.map.name()),
        x_label: "control".into(),
        y_label: "x (raw)".into(),
        log_y: false,
        series: vec![
            Series { label: "true".into(), points: scatter(|p| &p.true_tail), style: Style::Points },
            Series { label: "predicted".into(), points: scatter(|p| &p.predicted_tail), style: Style::Points },
        ],
    };
    w.write("bifurcation.svg", bif.to_svg().as_bytes())?;
    let rmse_chart = Chart {
        title: "aggregate RMSE".into(),
        x_label: "control".into(),
        y_label: "RMSE".into(),
        log_y: true,
        series: vec![Series {
            label: "RMSE".into(),
            points: sweep.points.iter().map(|p| (p.control, p.rmse)).collect(),
            style: Style::Line,
        }],
    };
    w.write("rmse.svg", rmse_chart.to_svg().as_bytes())?;
    let lle_chart = Chart {
        title: "largest Lyapunov exponent".into(),
        x_label: "control".into(),
        y_label: "LLE".into(),
        log_y: false,
        series: vec![Series {
            label: "LLE".into(),
            points: sweep.points.iter().map(|p| (p.control, p.lle)).collect(),
            style: Style::Line,
        }],
    };
    w.write("lle.svg", lle_chart.to_svg().as_bytes())?;
    let summary = summary_rows.iter().map(|r| format!("{} = {}", r[0], r[1])).collect();
    finish(w, summary)
}

fn cmd_sweep_grid(common: &CommonArgs) -> Result<Outcome> {
    let (cfg, _) = common.resolve(true)?;
    let reservoir = cfg.reservoir()?;
    let grid = hyperparameter_grid(cfg.map, cfg.control, &cfg.grid_layers, &cfg.grid_reps, &reservoir, &cfg.settings())?;
    let mut w = writer(common, "sweep-grid", &cfg)?;
    let mut rows = Vec::new();
    for (i, &d) in grid.layers.iter().enumerate() {
        for (j, &r) in grid.reps.iter().enumerate() {
            let qubits = cfg.map.dim() * r + cfg.n_hidden;
            let (value, status) = match grid.rmse[i][j] {
                Some(v) => (fmt_f64(v), "ok"),
                None => ("NA".to_string(), "skipped"),
            };
            rows.push(vec![d.to_string(), r.to_string(), qubits.to_string(), value, status.to_string()]);
        }
    }
    w.write_csv("grid.csv", &["layers", "reps", "qubits", "rmse", "status"], rows)?;
    let heat = svg::heatmap(
        &format!("{} RMSE, gap {}", cfg.map.name(), cfg.gap),
        "repetitions",
        "layers",
        &grid.reps,
        &grid.layers,
        &grid.rmse,
    );
    w.write("grid.svg", heat.as_bytes())?;
    let summary = match grid.argmin() {
        Some((d, r, v)) => vec![format!("argmin: layers = {d}, reps = {r}, RMSE = {v:e}")],
        None => vec!["every cell was skipped".to_string()],
    };
    finish(w, summary)
}

fn cmd_sweep_noise(common: &CommonArgs) -> Result<Outcome> {
    let (cfg, _) = common.resolve(false)?;
    let reservoir = cfg.reservoir()?;
    let result = noise_robustness(cfg.map, cfg.control, &cfg.gammas, &reservoir, &cfg.settings())?;
    if let Some(p) = result.points.iter().find(|p| p.clean_windows_hash != p.insitu_windows_hash) {
        return Err(QrcError::guard(format!("noise arms consumed different windows at gamma = {}", p.gamma)));
    }
    let mut w = writer(common, "sweep-noise", &cfg)?;
    w.write_csv(
        "noise.csv",
        &["gamma", "rmse_clean_trained", "rmse_insitu", "windows_hash"],
        result.points.iter().map(|p| {
            vec![fmt_f64(p.gamma), fmt_f64(p.rmse_clean_trained), fmt_f64(p.rmse_insitu), p.clean_windows_hash.clone()]
        }),
    )?;
    let line = |label: &str, f: fn(&crate::experiments::NoisePoint) -> f64| Series {
        label: label.into(),
        points: result.points.iter().map(|p| (p.gamma, f(p))).collect(),
        style: Style::Line,
    };
    let chart = Chart {
        title: format!("{} under dephasing", cfg.map.name()),
        x_label: "gamma".into(),
        y_label: "RMSE".into(),
        log_y: true,
        series: vec![line("trained without noise", |p| p.rmse_clean_trained), line("trained in situ", |p| p.rmse_insitu)],
    };
    w.write("noise.svg", chart.to_svg().as_bytes())?;
    let summary = result
        .points
        .iter()
        .map(|p| format!("gamma = {}: clean-trained {:e}, in-situ {:e}", p.gamma, p.rmse_clean_trained, p.rmse_insitu))
        .collect();
    finish(w, summary)
}

fn cmd_sweep_ensemble(common: &CommonArgs) -> Result<Outcome> {
    let (cfg, _) = common.resolve(false)?;
    let reservoir = cfg.reservoir()?;
    let report = hamiltonian_ensemble(
        cfg.map,
        cfg.control,
        cfg.ensemble_samples,
        cfg.ensemble_bins,
        &reservoir,
        cfg.ensemble_seed,
        &cfg.settings(),
    )?;
    let mut w = writer(common, "sweep-ensemble", &cfg)?;
    let failed: BTreeMap<usize, &str> = report.failures.iter().map(|f| (f.index, f.message.as_str())).collect();
    w.write_csv(
        "samples.csv",
        &["index", "seed", "rmse", "status"],
        report.rmses.iter().enumerate().map(|(i, v)| {
            vec![
                i.to_string(),
                report.seeds[i].to_string(),
                v.map_or("NA".to_string(), fmt_f64),
                failed.get(&i).map_or("ok".to_string(), |m| format!("failed: {m}")),
            ]
        }),
    )?;
    let h = &report.histogram;
    w.write_csv(
        "histogram.csv",
        &["bin", "lower", "upper", "count"],
        h.counts.iter().enumerate().map(|(i, c)| {
            let (lo, hi) = h.edges(i);
            vec![i.to_string(), fmt_f64(lo), fmt_f64(hi), c.to_string()]
        }),
    )?;
    let ok = report.successful();
    let summary_rows = vec![
        vec!["samples".to_string(), cfg.ensemble_samples.to_string()],
        vec!["failures".to_string(), report.failures.len().to_string()],
        vec!["median_rmse".to_string(), median(&ok).map_or("NA".into(), fmt_f64)],
        vec!["poisson_rate".to_string(), fmt_f64(report.poisson.rate)],
        vec!["poisson_log_likelihood".to_string(), fmt_f64(report.poisson.log_likelihood)],
        vec!["lower_half_fraction".to_string(), fmt_f64(report.lower_half_fraction())],
        vec!["within_2x_median_fraction".to_string(), fmt_f64(report.within_median_multiple(2.0))],
    ];
    w.write_csv("summary.csv", &["metric", "value"], summary_rows.clone())?;
    w.write(
        "histogram.svg",
        svg::histogram(&format!("{} RMSE over random reservoirs", cfg.map.name()), "RMSE", h.min, h.max, &h.counts)
            .as_bytes(),
    )?;
    let summary = summary_rows.iter().map(|r| format!("{} = {}", r[0], r[1])).collect();
    finish(w, summary)
}

fn common_of(command: &Command) -> &CommonArgs {
    match command {
        Command::Generate(c)
        | Command::Lle(c)
        | Command::SweepBifurcation(c)
        | Command::SweepGrid(c)
        | Command::SweepNoise(c)
        | Command::SweepEnsemble(c) => c,
        Command::Train(t) => &t.common,
        Command::Predict(p) => &p.common,
    }
}

fn dispatch(command: &Command) -> Result<Outcome> {
    match command {
        Command::Generate(c) => cmd_generate(c),
        Command::Lle(c) => cmd_lle(c),
        Command::Train(t) => cmd_train(t),
        Command::Predict(p) => cmd_predict(p),
        Command::SweepBifurcation(c) => cmd_sweep_bifurcation(c),
        Command::SweepGrid(c) => cmd_sweep_grid(c),
        Command::SweepNoise(c) => cmd_sweep_noise(c),
        Command::SweepEnsemble(c) => cmd_sweep_ensemble(c),
    }
}

/// Run a parsed command on a pool of the requested size.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let threads = common_of(&cli.command).threads;
    if threads == Some(0) {
        return Err(QrcError::Config("`--threads` must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| QrcError::Config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cli.command))
}

/// Parse `argv` (including the program name), run, print, return the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            for line in &outcome.summary {
                let _ = writeln!(out, "{line}");
            }
            let _ = writeln!(out, "outputs: {}", outcome.out_dir.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Hash every output listed in the manifest at `path` against the files beside it.
pub fn verify_manifest(path: &Path) -> Result<Vec<String>> {
    let manifest = RunManifest::load(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    manifest.verify_outputs(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("layers", "1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_range("layers", "2").unwrap(), vec![2]);
        assert!(parse_range("layers", "3..1").is_err());
        assert!(parse_range("layers", "0..2").is_err());
        assert!(parse_range("layers", "x").is_err());
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from(["qrc", "train", "--map", "henon", "--a", "1.2", "--tau", "0.5", "--reps", "1"]).unwrap();
        let Command::Train(t) = &cli.command else { panic!() };
        let (cfg, _) = t.common.resolve(false).unwrap();
        assert_eq!(cfg.map, MapKind::Henon);
        assert_eq!((cfg.control, cfg.tau, cfg.n_rep, cfg.layers), (1.2, 0.5, 1, 1));
        let grid = Cli::try_parse_from(["qrc", "sweep-grid", "--layers", "1..2"]).unwrap();
        let Command::SweepGrid(g) = &grid.command else { panic!() };
        assert_eq!(g.resolve(true).unwrap().0.grid_layers, vec![1, 2]);
        assert!(g.resolve(false).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_command(["qrc", "frobnicate"]), 1);
        assert_eq!(run_command(["qrc", "lle", "--map", "nope"]), 1);
        assert_eq!(run_command(["qrc", "lle", "--r", "7"]), 1);
        assert_eq!(run_command(["qrc", "--help"]), 0);
    }
}
