//! Command-line surface tying the modules into reproducible experiments.
//! Every command is deterministic given its flags; randomness flows only
//! from explicit `--seed` values.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{
    ablation_matrix, diagnostics, evaluate, metric_comparison, run_strategy, threshold_sweep,
    StrategyKind, StrategySpec,
};
use crate::dataset::{validate_dataset, Dataset, SelectionResult};
use crate::discriminator::{train_supervised_with_pool, transfer_finetune, DiscriminatorModel};
use crate::error::{Error, Result};
use crate::io::{
    fmt_f64, load_model, load_results, parse_dataset, save_model, save_results,
    serialize_dataset, write_csv,
};
use crate::learning::SgdConfig;
use crate::selection::{
    calibrate_entropy_threshold, run_pipeline, DiscriminatorMode, DivergenceKind, EntropyScale,
    LogitSource, PipelineConfig, ENTROPY_RETAIN_DEFAULT, SCAN_THRESHOLD_DEFAULT,
};
use crate::synthgen::{generate_preset, presets};

#[derive(Parser)]
#[command(
    name = "skimscan",
    about = "Adaptive clip selection for untrimmed video recognition",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Js,
    Kl,
    W1,
}

impl From<MetricArg> for DivergenceKind {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Js => DivergenceKind::Js,
            MetricArg::Kl => DivergenceKind::Kl,
            MetricArg::W1 => DivergenceKind::Wasserstein1,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Conditional,
    Plain,
    Oracle,
    None,
}

impl From<ModeArg> for DiscriminatorMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Conditional => DiscriminatorMode::Conditional,
            ModeArg::Plain => DiscriminatorMode::Plain,
            ModeArg::Oracle => DiscriminatorMode::Oracle,
            ModeArg::None => DiscriminatorMode::None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SourceArg {
    Light,
    Heavy,
    Slim,
}

impl From<SourceArg> for LogitSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Light => LogitSource::Light,
            SourceArg::Heavy => LogitSource::Heavy,
            SourceArg::Slim => LogitSource::SlimScan,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ScaleArg {
    Normalized,
    Raw,
}

impl From<ScaleArg> for EntropyScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Normalized => EntropyScale::Normalized,
            ScaleArg::Raw => EntropyScale::RawNats,
        }
    }
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a named synthetic dataset preset.
    Synthgen {
        #[arg(long)]
        preset: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check dataset invariants and list violations.
    Validate {
        #[arg(long)]
        data: PathBuf,
    },
    /// Print the entropy threshold retaining the given fraction of clips.
    Calibrate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = ENTROPY_RETAIN_DEFAULT)]
        retain: f64,
        #[arg(long, value_enum, default_value_t = ScaleArg::Normalized)]
        scale: ScaleArg,
        #[arg(long, value_enum, default_value_t = SourceArg::Light)]
        source: SourceArg,
    },
    /// Train the class discriminator on annotated clips.
    TrainCd {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.005)]
        lr: f64,
        #[arg(long, default_value_t = 4)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pooled width; defaults to the full input length.
        #[arg(long)]
        pool: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Finetune a pretrained discriminator on a label-only dataset.
    FinetuneCd {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0.001)]
        lr: f64,
        #[arg(long, default_value_t = 80)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the selection pipeline over every video.
    Select {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Fraction of clips the entropy skim retains.
        #[arg(long = "entropy-q", default_value_t = ENTROPY_RETAIN_DEFAULT)]
        entropy_q: f64,
        /// Scan stop threshold.
        #[arg(long, default_value_t = SCAN_THRESHOLD_DEFAULT)]
        js: f64,
        #[arg(long, value_enum, default_value_t = MetricArg::Js)]
        metric: MetricArg,
        #[arg(long)]
        budget: Option<usize>,
        /// Defaults to conditional when a model is given, otherwise none.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, value_enum, default_value_t = SourceArg::Light)]
        source: SourceArg,
        #[arg(long = "entropy-scale", value_enum, default_value_t = ScaleArg::Normalized)]
        entropy_scale: ScaleArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a results file against its dataset.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        results: PathBuf,
        /// Also write per-class rows to a CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare baselines and the pipeline on one dataset.
    Compare {
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated list, e.g. dense,random_10,uniform_10,top_confidence_10,skim_scan.
        #[arg(long)]
        strategies: String,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long = "entropy-q", default_value_t = ENTROPY_RETAIN_DEFAULT)]
        entropy_q: f64,
        #[arg(long, default_value_t = SCAN_THRESHOLD_DEFAULT)]
        js: f64,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run all eight stage-toggle combinations.
    Ablate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "entropy-q", default_value_t = ENTROPY_RETAIN_DEFAULT)]
        entropy_q: f64,
        #[arg(long, default_value_t = SCAN_THRESHOLD_DEFAULT)]
        js: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cartesian sweep over entropy quantiles and scan thresholds.
    Sweep {
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "entropy-grid", value_delimiter = ',')]
        entropy_grid: Vec<f64>,
        #[arg(long = "js-grid", value_delimiter = ',')]
        js_grid: Vec<f64>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Swap the scan divergence and time each variant.
    Metrics {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long = "entropy-q", default_value_t = ENTROPY_RETAIN_DEFAULT)]
        entropy_q: f64,
        #[arg(long, default_value_t = SCAN_THRESHOLD_DEFAULT)]
        js: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write entropy-histogram, per-class, and correlation diagnostics.
    Diagnose {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        results: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
}

fn load_data(path: &Path) -> Result<Dataset> {
    parse_dataset(path)
}

fn build_pipeline(
    ds: &Dataset,
    entropy_q: f64,
    scan_stop: f64,
    metric: DivergenceKind,
    budget: Option<usize>,
    mode: DiscriminatorMode,
    source: LogitSource,
    scale: EntropyScale,
) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    cfg.skim.entropy_scale = scale;
    cfg.skim.entropy_threshold = calibrate_entropy_threshold(ds, entropy_q, scale, source)?;
    cfg.skim.calibration_quantile = Some(entropy_q);
    cfg.scan.divergence = metric;
    cfg.scan.stop_threshold = scan_stop;
    cfg.scan.budget_cap = budget;
    cfg.discriminator_mode = mode;
    cfg.use_discriminator = !matches!(mode, DiscriminatorMode::None);
    cfg.logit_source = source;
    Ok(cfg)
}

fn run_all_videos(
    ds: &Dataset,
    cfg: &PipelineConfig,
    disc: Option<&DiscriminatorModel>,
) -> Result<Vec<SelectionResult>> {
    ds.videos
        .iter()
        .map(|v| run_pipeline(v, cfg, disc, &ds.meta))
        .collect()
}

fn parse_strategy(text: &str, seed: u64) -> Result<StrategySpec> {
    let parse_n = |suffix: &str| -> Result<usize> {
        suffix.parse().map_err(|_| {
            Error::Config(format!("bad strategy budget in {text:?}, expected an integer"))
        })
    };
    if text == "dense" {
        return Ok(StrategySpec::baseline(StrategyKind::Dense, None, seed));
    }
    if text == "skim_scan" {
        return Ok(StrategySpec {
            kind: StrategyKind::SkimScan,
            n: None,
            pipeline: None,
            seed,
        });
    }
    for (prefix, kind) in [
        ("random_", StrategyKind::RandomN),
        ("uniform_", StrategyKind::UniformN),
        ("top_confidence_", StrategyKind::TopConfidenceN),
    ] {
        if let Some(suffix) = text.strip_prefix(prefix) {
            return Ok(StrategySpec::baseline(kind, Some(parse_n(suffix)?), seed));
        }
    }
    Err(Error::Config(format!(
        "unknown strategy {text:?}; expected dense, random_N, uniform_N, top_confidence_N, or skim_scan"
    )))
}

fn print_report(label: &str, report: &crate::bench::EvalReport) {
    println!(
        "{label:<18} accuracy {:>7.4}  mAP {:>7.4}  mean clips {:>8.3}  backbone GFLOPs {:>12.3}  selection GFLOPs {:>8.4}",
        report.accuracy,
        report.map,
        report.mean_clips,
        report.mean_backbone_gflops,
        report.mean_selection_gflops
    );
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synthgen { preset, seed, out } => {
            let ds = generate_preset(&preset, seed)?;
            serialize_dataset(&ds, &out)?;
            println!(
                "wrote {} ({} videos, {} clips)",
                out.display(),
                ds.videos.len(),
                ds.total_clips()
            );
            Ok(())
        }
        Command::Validate { data } => {
            let ds = load_data(&data)?;
            let violations = validate_dataset(&ds);
            if violations.is_empty() {
                println!("ok: {} videos, {} clips", ds.videos.len(), ds.total_clips());
                Ok(())
            } else {
                for v in &violations {
                    println!("violation: {v}");
                }
                Err(Error::InvalidInput(format!(
                    "{} invariant violation(s)",
                    violations.len()
                )))
            }
        }
        Command::Calibrate {
            data,
            retain,
            scale,
            source,
        } => {
            let ds = load_data(&data)?;
            let threshold =
                calibrate_entropy_threshold(&ds, retain, scale.into(), source.into())?;
            println!("{}", fmt_f64(threshold));
            Ok(())
        }
        Command::TrainCd {
            data,
            lr,
            epochs,
            batch,
            seed,
            pool,
            out,
        } => {
            let ds = load_data(&data)?;
            let cfg = SgdConfig {
                learning_rate: lr,
                epochs,
                batch_size: batch,
                seed,
            };
            let pool = pool
                .unwrap_or_else(|| DiscriminatorModel::default_pool_width(&ds.meta));
            let (model, report) = train_supervised_with_pool(&ds, &cfg, pool)?;
            save_model(&model, &out)?;
            println!(
                "binary accuracy {:.4}  positive drop rate {:.4}  negative drop rate {:.4}",
                report.binary_accuracy, report.positive_drop_rate, report.negative_drop_rate
            );
            Ok(())
        }
        Command::FinetuneCd {
            data,
            model,
            lr,
            epochs,
            seed,
            out,
        } => {
            let ds = load_data(&data)?;
            let head = ds.head.clone().ok_or_else(|| {
                Error::UnsupportedDataset(
                    "transfer finetuning needs a linear head in the dataset".into(),
                )
            })?;
            let pretrained = load_model(&model)?;
            let cfg = SgdConfig {
                learning_rate: lr,
                epochs,
                batch_size: 1,
                seed,
            };
            let (finetuned, trace) = transfer_finetune(pretrained, &ds, &head, &cfg)?;
            save_model(&finetuned, &out)?;
            println!(
                "transfer loss {:.6} -> {:.6} over {} epochs",
                trace.first().unwrap(),
                trace.last().unwrap(),
                trace.len()
            );
            Ok(())
        }
        Command::Select {
            data,
            model,
            entropy_q,
            js,
            metric,
            budget,
            mode,
            source,
            entropy_scale,
            out,
        } => {
            let ds = load_data(&data)?;
            let disc = model.as_deref().map(load_model).transpose()?;
            let mode = mode.map(DiscriminatorMode::from).unwrap_or(if disc.is_some() {
                DiscriminatorMode::Conditional
            } else {
                DiscriminatorMode::None
            });
            if matches!(mode, DiscriminatorMode::Conditional | DiscriminatorMode::Plain)
                && disc.is_none()
            {
                return Err(Error::Config(
                    "conditional/plain discriminator modes need --model".into(),
                ));
            }
            let cfg = build_pipeline(
                &ds,
                entropy_q,
                js,
                metric.into(),
                budget,
                mode,
                source.into(),
                entropy_scale.into(),
            )?;
            let results = run_all_videos(&ds, &cfg, disc.as_ref())?;
            save_results(&results, &out)?;
            let report = evaluate(&ds, &results)?;
            print_report("skim_scan", &report);
            Ok(())
        }
        Command::Evaluate { data, results, csv } => {
            let ds = load_data(&data)?;
            let results = load_results(&results)?;
            if results.is_empty() {
                return Err(Error::IncompleteResults("results file is empty".into()));
            }
            let report = evaluate(&ds, &results)?;
            print_report("results", &report);
            if let Some(csv_path) = csv {
                let rows: Vec<Vec<String>> = (0..ds.meta.num_classes)
                    .map(|k| {
                        vec![
                            k.to_string(),
                            class_name(&ds, k),
                            fmt_f64(report.per_class_accuracy[k]),
                            fmt_f64(report.per_class_mean_clips[k]),
                        ]
                    })
                    .collect();
                write_csv(
                    &csv_path,
                    &["class", "name", "accuracy", "mean_clips"],
                    &rows,
                )?;
            }
            Ok(())
        }
        Command::Compare {
            data,
            strategies,
            model,
            entropy_q,
            js,
            budget,
            seed,
            out,
        } => {
            let ds = load_data(&data)?;
            let disc = model.as_deref().map(load_model).transpose()?;
            let mode = if disc.is_some() {
                DiscriminatorMode::Conditional
            } else {
                DiscriminatorMode::None
            };
            let pipeline = build_pipeline(
                &ds,
                entropy_q,
                js,
                DivergenceKind::Js,
                budget,
                mode,
                LogitSource::Light,
                EntropyScale::Normalized,
            )?;
            let mut rows = Vec::new();
            for name in strategies.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let mut spec = parse_strategy(name, seed)?;
                if matches!(spec.kind, StrategyKind::SkimScan) {
                    spec.pipeline = Some(pipeline);
                }
                let results = run_strategy(&ds, &spec, disc.as_ref())?;
                let report = evaluate(&ds, &results)?;
                print_report(name, &report);
                rows.push(vec![
                    name.to_string(),
                    fmt_f64(report.accuracy),
                    fmt_f64(report.map),
                    fmt_f64(report.mean_clips),
                    fmt_f64(report.mean_backbone_gflops),
                    fmt_f64(report.mean_selection_gflops),
                ]);
            }
            write_csv(
                &out,
                &[
                    "strategy",
                    "accuracy",
                    "map",
                    "mean_clips",
                    "mean_backbone_gflops",
                    "mean_selection_gflops",
                ],
                &rows,
            )
        }
        Command::Ablate {
            data,
            model,
            entropy_q,
            js,
            out,
        } => {
            let ds = load_data(&data)?;
            let disc = load_model(&model)?;
            let base = build_pipeline(
                &ds,
                entropy_q,
                js,
                DivergenceKind::Js,
                None,
                DiscriminatorMode::Conditional,
                LogitSource::Light,
                EntropyScale::Normalized,
            )?;
            let rows = ablation_matrix(&ds, &base, Some(&disc))?;
            let csv_rows: Vec<Vec<String>> = rows
                .iter()
                .map(|(name, report)| {
                    print_report(name, report);
                    vec![
                        name.clone(),
                        fmt_f64(report.accuracy),
                        fmt_f64(report.map),
                        fmt_f64(report.mean_clips),
                        fmt_f64(report.mean_backbone_gflops),
                        fmt_f64(report.mean_selection_gflops),
                    ]
                })
                .collect();
            write_csv(
                &out,
                &[
                    "stages",
                    "accuracy",
                    "map",
                    "mean_clips",
                    "mean_backbone_gflops",
                    "mean_selection_gflops",
                ],
                &csv_rows,
            )
        }
        Command::Sweep {
            data,
            entropy_grid,
            js_grid,
            model,
            out,
        } => {
            let ds = load_data(&data)?;
            let disc = model.as_deref().map(load_model).transpose()?;
            let mut base = PipelineConfig::default();
            base.discriminator_mode = if disc.is_some() {
                DiscriminatorMode::Conditional
            } else {
                DiscriminatorMode::None
            };
            base.use_discriminator = disc.is_some();
            let cells = threshold_sweep(&ds, &entropy_grid, &js_grid, &base, disc.as_ref())?;
            let rows: Vec<Vec<String>> = cells
                .iter()
                .map(|c| {
                    vec![
                        fmt_f64(c.entropy_quantile),
                        fmt_f64(c.scan_threshold),
                        fmt_f64(c.accuracy),
                        fmt_f64(c.mean_clips),
                    ]
                })
                .collect();
            write_csv(
                &out,
                &["entropy_quantile", "scan_threshold", "accuracy", "mean_clips"],
                &rows,
            )
        }
        Command::Metrics {
            data,
            model,
            entropy_q,
            js,
            out,
        } => {
            let ds = load_data(&data)?;
            let disc = model.as_deref().map(load_model).transpose()?;
            let mode = if disc.is_some() {
                DiscriminatorMode::Conditional
            } else {
                DiscriminatorMode::None
            };
            let cfg = build_pipeline(
                &ds,
                entropy_q,
                js,
                DivergenceKind::Js,
                None,
                mode,
                LogitSource::Light,
                EntropyScale::Normalized,
            )?;
            let table = metric_comparison(&ds, &cfg, disc.as_ref())?;
            let rows: Vec<Vec<String>> = table
                .iter()
                .map(|row| {
                    let name = match row.divergence {
                        DivergenceKind::Js => "js",
                        DivergenceKind::Kl => "kl",
                        DivergenceKind::Wasserstein1 => "wasserstein1",
                    };
                    print_report(name, &row.report);
                    vec![
                        name.to_string(),
                        fmt_f64(row.report.accuracy),
                        fmt_f64(row.report.map),
                        fmt_f64(row.report.mean_clips),
                        fmt_f64(row.wall_time_s),
                    ]
                })
                .collect();
            write_csv(
                &out,
                &["metric", "accuracy", "map", "mean_clips", "wall_time_s"],
                &rows,
            )
        }
        Command::Diagnose {
            data,
            results,
            out_dir,
        } => {
            let ds = load_data(&data)?;
            let results = load_results(&results)?;
            let report = diagnostics(&ds, &results)?;
            std::fs::create_dir_all(&out_dir)?;
            write_csv(
                &out_dir.join("entropy_histogram.csv"),
                &["bin_lo", "bin_hi", "positive_clips", "negative_clips"],
                &report
                    .entropy_histogram
                    .iter()
                    .map(|b| {
                        vec![
                            fmt_f64(b.lo),
                            fmt_f64(b.hi),
                            b.positive.to_string(),
                            b.negative.to_string(),
                        ]
                    })
                    .collect::<Vec<_>>(),
            )?;
            write_csv(
                &out_dir.join("per_class_selected.csv"),
                &["class", "name", "mean_selected_clips"],
                &report
                    .per_class_mean_selected
                    .iter()
                    .map(|&(k, mean)| vec![k.to_string(), class_name(&ds, k), fmt_f64(mean)])
                    .collect::<Vec<_>>(),
            )?;
            write_csv(
                &out_dir.join("positive_fraction_correlation.csv"),
                &["bin_lo", "bin_hi", "videos", "correct_rate"],
                &report
                    .positive_fraction_bins
                    .iter()
                    .map(|b| {
                        vec![
                            fmt_f64(b.lo),
                            fmt_f64(b.hi),
                            b.videos.to_string(),
                            fmt_f64(b.correct_rate),
                        ]
                    })
                    .collect::<Vec<_>>(),
            )?;
            println!("pearson {}", fmt_f64(report.pearson));
            Ok(())
        }
    }
}

fn class_name(ds: &Dataset, k: usize) -> String {
    ds.meta
        .class_names
        .as_ref()
        .and_then(|names| names.get(k).cloned())
        .unwrap_or_else(|| format!("class_{k}"))
}

/// Preset names accepted by `synthgen --preset`.
pub fn preset_names() -> Vec<&'static str> {
    presets().iter().map(|(n, _)| *n).collect()
}
