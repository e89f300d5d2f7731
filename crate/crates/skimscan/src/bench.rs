//! Baseline strategies, evaluation metrics (accuracy, mAP), the GFLOPs cost
//! model, ablation matrices, threshold sweeps, and diagnostics.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{CostParams, Dataset, SelectionResult, VideoRecord};
use crate::discriminator::DiscriminatorModel;
use crate::error::{Error, Result};
use crate::infotheory::{argmax, normalized_entropy, Distribution};
use crate::selection::{
    calibrate_entropy_threshold, clip_distributions, mean_distribution, run_pipeline,
    DivergenceKind, LogitSource, PipelineConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Dense,
    RandomN,
    UniformN,
    TopConfidenceN,
    SkimScan,
}

#[derive(Debug, Clone)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    /// Budget for the fixed-budget baselines.
    pub n: Option<usize>,
    pub pipeline: Option<PipelineConfig>,
    pub seed: u64,
}

impl StrategySpec {
    pub fn baseline(kind: StrategyKind, n: Option<usize>, seed: u64) -> Self {
        Self {
            kind,
            n,
            pipeline: None,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub map: f64,
    pub mean_clips: f64,
    pub mean_backbone_gflops: f64,
    pub mean_selection_gflops: f64,
    pub per_class_accuracy: Vec<f64>,
    pub per_class_mean_clips: Vec<f64>,
}

fn fnv1a(text: &str) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for byte in text.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Distributions from the classifier that scores baseline clips: the heavy
/// one when every clip carries heavy logits, otherwise the light one.
fn backbone_dists(video: &VideoRecord) -> Result<(Vec<Distribution>, bool)> {
    let has_heavy = video.clips.iter().all(|c| c.heavy_logits.is_some());
    let source = if has_heavy {
        LogitSource::Heavy
    } else {
        LogitSource::Light
    };
    Ok((clip_distributions(video, source)?, has_heavy))
}

/// Clip indices a baseline strategy picks for one video.
pub fn select_baseline(video: &VideoRecord, spec: &StrategySpec) -> Result<Vec<usize>> {
    let total = video.clips.len();
    let indices: Vec<usize> = video.clips.iter().map(|c| c.index).collect();
    match spec.kind {
        StrategyKind::Dense => Ok(indices),
        StrategyKind::SkimScan => Err(Error::Config(
            "skim_scan is not a baseline; run it through the pipeline".into(),
        )),
        StrategyKind::RandomN => {
            let n = required_n(spec)?;
            if n >= total {
                return Ok(indices);
            }
            let mut rng =
                ChaCha8Rng::seed_from_u64(spec.seed ^ fnv1a(&video.video_id));
            let mut picked: Vec<usize> = sample(&mut rng, total, n)
                .into_iter()
                .map(|p| indices[p])
                .collect();
            picked.sort_unstable();
            Ok(picked)
        }
        StrategyKind::UniformN => {
            let n = required_n(spec)?;
            if n >= total {
                return Ok(indices);
            }
            if n == 1 {
                return Ok(vec![indices[0]]);
            }
            Ok((0..n)
                .map(|k| {
                    let pos =
                        ((k * (total - 1)) as f64 / (n - 1) as f64).round() as usize;
                    indices[pos]
                })
                .collect())
        }
        StrategyKind::TopConfidenceN => {
            let n = required_n(spec)?;
            let (dists, _) = backbone_dists(video)?;
            let confidences: Vec<f64> = dists
                .iter()
                .map(|d| d.probs().iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                .collect();
            let mut order: Vec<usize> = (0..total).collect();
            // Descending confidence, ties toward the lowest position.
            order.sort_by(|&a, &b| {
                confidences[b]
                    .partial_cmp(&confidences[a])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let mut picked: Vec<usize> =
                order.into_iter().take(n).map(|p| indices[p]).collect();
            picked.sort_unstable();
            Ok(picked)
        }
    }
}

fn required_n(spec: &StrategySpec) -> Result<usize> {
    match spec.n {
        Some(n) if n >= 1 => Ok(n),
        _ => Err(Error::Config(format!(
            "strategy {:?} requires a positive clip budget n",
            spec.kind
        ))),
    }
}

/// How the backbone was spent on one video.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackboneUsage {
    /// Heavy classifier over every clip (dense, top-confidence, skim-scan on
    /// heavy logits).
    HeavyAllClips,
    /// Heavy classifier over the selected clips only (random / uniform).
    HeavySelected { selected: f64 },
    /// Light classifier over every clip.
    LightAllClips,
    /// Light over everything plus heavy over the selected clips.
    SlimScan { selected: f64 },
}

/// Backbone and selection GFLOPs for one video. `total_clips` is a real so
/// dataset-mean footprints can be priced directly.
pub fn cost(usage: BackboneUsage, params: &CostParams, total_clips: f64) -> (f64, f64) {
    let backbone = match usage {
        BackboneUsage::HeavyAllClips => params.heavy_gflops_per_clip * total_clips,
        BackboneUsage::HeavySelected { selected } => params.heavy_gflops_per_clip * selected,
        BackboneUsage::LightAllClips => params.light_gflops_per_clip * total_clips,
        BackboneUsage::SlimScan { selected } => {
            params.light_gflops_per_clip * total_clips
                + params.heavy_gflops_per_clip * selected
        }
    };
    (backbone, params.selection_gflops_per_video)
}

/// Runs a strategy over the whole dataset, producing one result per video.
pub fn run_strategy(
    ds: &Dataset,
    spec: &StrategySpec,
    disc: Option<&DiscriminatorModel>,
) -> Result<Vec<SelectionResult>> {
    if matches!(spec.kind, StrategyKind::SkimScan) {
        let cfg = spec.pipeline.as_ref().ok_or_else(|| {
            Error::Config("skim_scan strategy needs a pipeline config".into())
        })?;
        return ds
            .videos
            .iter()
            .map(|v| run_pipeline(v, cfg, disc, &ds.meta))
            .collect();
    }

    ds.videos
        .iter()
        .map(|video| {
            let selected = select_baseline(video, spec)?;
            let (dists, has_heavy) = backbone_dists(video)?;
            let position_of: BTreeMap<usize, usize> = video
                .clips
                .iter()
                .enumerate()
                .map(|(p, c)| (c.index, p))
                .collect();
            let picked_dists: Vec<Distribution> = selected
                .iter()
                .map(|idx| dists[position_of[idx]].clone())
                .collect();
            let video_distribution = mean_distribution(&picked_dists);
            let predicted_label = argmax(video_distribution.probs());

            let total = video.clips.len();
            let usage = match (spec.kind, has_heavy) {
                (StrategyKind::Dense | StrategyKind::TopConfidenceN, true) => {
                    BackboneUsage::HeavyAllClips
                }
                (StrategyKind::RandomN | StrategyKind::UniformN, true) => {
                    BackboneUsage::HeavySelected {
                        selected: selected.len() as f64,
                    }
                }
                (_, false) => BackboneUsage::LightAllClips,
                (StrategyKind::SkimScan, _) => unreachable!(),
            };
            let (backbone, selection) = cost(usage, &ds.meta.cost, total as f64);
            let scored = match usage {
                BackboneUsage::HeavyAllClips => total,
                BackboneUsage::HeavySelected { .. } => selected.len(),
                _ => 0,
            };
            let all_indices: Vec<usize> = video.clips.iter().map(|c| c.index).collect();
            Ok(SelectionResult {
                video_id: video.video_id.clone(),
                survivors_after_entropy: all_indices.clone(),
                survivors_after_discriminator: all_indices,
                selected,
                video_distribution,
                predicted_label,
                clips_evaluated_heavy: scored,
                gflops_backbone: backbone,
                gflops_selection: selection,
            })
        })
        .collect()
}

/// Scores per-video results against the dataset: accuracy, macro mAP over
/// per-class video rankings, mean clip counts, and mean GFLOPs.
pub fn evaluate(ds: &Dataset, results: &[SelectionResult]) -> Result<EvalReport> {
    let by_id: BTreeMap<&str, &SelectionResult> =
        results.iter().map(|r| (r.video_id.as_str(), r)).collect();
    if by_id.len() != results.len() {
        return Err(Error::IncompleteResults("duplicate video_id in results".into()));
    }
    let mut missing = Vec::new();
    for video in &ds.videos {
        if !by_id.contains_key(video.video_id.as_str()) {
            missing.push(video.video_id.clone());
        }
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteResults(format!(
            "no result for video(s) {}",
            missing.join(", ")
        )));
    }
    if results.len() != ds.videos.len() {
        return Err(Error::IncompleteResults(format!(
            "{} results for {} videos",
            results.len(),
            ds.videos.len()
        )));
    }

    let c = ds.meta.num_classes;
    let n = ds.videos.len() as f64;
    let mut correct = 0usize;
    let mut clips_sum = 0.0;
    let mut backbone_sum = 0.0;
    let mut selection_sum = 0.0;
    let mut class_correct = vec![0usize; c];
    let mut class_count = vec![0usize; c];
    let mut class_clips = vec![0.0; c];
    for video in &ds.videos {
        let r = by_id[video.video_id.as_str()];
        if r.predicted_label == video.label {
            correct += 1;
            class_correct[video.label] += 1;
        }
        class_count[video.label] += 1;
        class_clips[video.label] += r.selected.len() as f64;
        clips_sum += r.selected.len() as f64;
        backbone_sum += r.gflops_backbone;
        selection_sum += r.gflops_selection;
    }

    Ok(EvalReport {
        accuracy: correct as f64 / n,
        map: mean_average_precision(ds, &by_id),
        mean_clips: clips_sum / n,
        mean_backbone_gflops: backbone_sum / n,
        mean_selection_gflops: selection_sum / n,
        per_class_accuracy: (0..c)
            .map(|k| {
                if class_count[k] == 0 {
                    0.0
                } else {
                    class_correct[k] as f64 / class_count[k] as f64
                }
            })
            .collect(),
        per_class_mean_clips: (0..c)
            .map(|k| {
                if class_count[k] == 0 {
                    0.0
                } else {
                    class_clips[k] / class_count[k] as f64
                }
            })
            .collect(),
    })
}

/// Macro average precision: per class, videos are ranked by their score for
/// that class (ties by video id) and AP is the mean of precision-at-rank
/// over ranks holding a video of that class. Classes with no positive video
/// are excluded.
fn mean_average_precision(ds: &Dataset, by_id: &BTreeMap<&str, &SelectionResult>) -> f64 {
    let c = ds.meta.num_classes;
    let mut ap_sum = 0.0;
    let mut classes_counted = 0usize;
    for k in 0..c {
        let mut scored: Vec<(&str, f64, bool)> = ds
            .videos
            .iter()
            .map(|v| {
                let r = by_id[v.video_id.as_str()];
                (
                    v.video_id.as_str(),
                    r.video_distribution.probs()[k],
                    v.label == k,
                )
            })
            .collect();
        let positives = scored.iter().filter(|(_, _, pos)| *pos).count();
        if positives == 0 {
            continue;
        }
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
        let mut hits = 0usize;
        let mut precision_sum = 0.0;
        for (rank, (_, _, positive)) in scored.iter().enumerate() {
            if *positive {
                hits += 1;
                precision_sum += hits as f64 / (rank + 1) as f64;
            }
        }
        ap_sum += precision_sum / positives as f64;
        classes_counted += 1;
    }
    if classes_counted == 0 {
        0.0
    } else {
        ap_sum / classes_counted as f64
    }
}

/// Runs all eight stage-toggle combinations of the base pipeline, from
/// everything off (dense) to the full pipeline.
pub fn ablation_matrix(
    ds: &Dataset,
    base: &PipelineConfig,
    disc: Option<&DiscriminatorModel>,
) -> Result<Vec<(String, EvalReport)>> {
    let mut rows = Vec::with_capacity(8);
    for bits in 0..8u8 {
        let use_entropy = bits & 1 != 0;
        let use_discriminator = bits & 2 != 0;
        let use_scan = bits & 4 != 0;
        let name = match (use_entropy, use_discriminator, use_scan) {
            (false, false, false) => "dense",
            (true, false, false) => "entropy_only",
            (false, true, false) => "cd_only",
            (false, false, true) => "scan_only",
            (true, true, false) => "entropy_cd",
            (true, false, true) => "entropy_scan",
            (false, true, true) => "cd_scan",
            (true, true, true) => "full",
        };
        let cfg = PipelineConfig {
            use_entropy,
            use_discriminator,
            use_scan,
            ..*base
        };
        let results: Vec<SelectionResult> = ds
            .videos
            .iter()
            .map(|v| run_pipeline(v, &cfg, disc, &ds.meta))
            .collect::<Result<_>>()?;
        rows.push((name.to_string(), evaluate(ds, &results)?));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub entropy_quantile: f64,
    pub scan_threshold: f64,
    pub accuracy: f64,
    pub mean_clips: f64,
}

/// Full Cartesian sweep over entropy retention quantiles and scan stop
/// thresholds.
pub fn threshold_sweep(
    ds: &Dataset,
    entropy_quantiles: &[f64],
    scan_thresholds: &[f64],
    rest: &PipelineConfig,
    disc: Option<&DiscriminatorModel>,
) -> Result<Vec<SweepCell>> {
    if entropy_quantiles.is_empty() || scan_thresholds.is_empty() {
        return Err(Error::Config("sweep grids must be nonempty".into()));
    }
    let mut cells = Vec::with_capacity(entropy_quantiles.len() * scan_thresholds.len());
    for &q in entropy_quantiles {
        let threshold =
            calibrate_entropy_threshold(ds, q, rest.skim.entropy_scale, rest.logit_source)?;
        for &stop in scan_thresholds {
            let mut cfg = *rest;
            cfg.skim.entropy_threshold = threshold;
            cfg.skim.calibration_quantile = Some(q);
            cfg.scan.stop_threshold = stop;
            let results: Vec<SelectionResult> = ds
                .videos
                .iter()
                .map(|v| run_pipeline(v, &cfg, disc, &ds.meta))
                .collect::<Result<_>>()?;
            let report = evaluate(ds, &results)?;
            cells.push(SweepCell {
                entropy_quantile: q,
                scan_threshold: stop,
                accuracy: report.accuracy,
                mean_clips: report.mean_clips,
            });
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub divergence: DivergenceKind,
    pub report: EvalReport,
    pub wall_time_s: f64,
}

/// The identical pipeline with only the scan divergence swapped, timed per
/// metric.
pub fn metric_comparison(
    ds: &Dataset,
    cfg: &PipelineConfig,
    disc: Option<&DiscriminatorModel>,
) -> Result<Vec<MetricRow>> {
    [
        DivergenceKind::Js,
        DivergenceKind::Kl,
        DivergenceKind::Wasserstein1,
    ]
    .into_iter()
    .map(|divergence| {
        let mut swapped = *cfg;
        swapped.scan.divergence = divergence;
        let start = Instant::now();
        let results: Vec<SelectionResult> = ds
            .videos
            .iter()
            .map(|v| run_pipeline(v, &swapped, disc, &ds.meta))
            .collect::<Result<_>>()?;
        let wall_time_s = start.elapsed().as_secs_f64();
        Ok(MetricRow {
            divergence,
            report: evaluate(ds, &results)?,
            wall_time_s,
        })
    })
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyHistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub positive: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionBin {
    pub lo: f64,
    pub hi: f64,
    pub videos: usize,
    pub correct_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    /// Normalized-entropy histogram (20 bins over `[0, 1]`) split by
    /// positive/negative clips.
    pub entropy_histogram: Vec<EntropyHistogramBin>,
    /// Mean selected clips per class, most demanding first. Classes without
    /// videos are omitted.
    pub per_class_mean_selected: Vec<(usize, f64)>,
    /// Video-correct rate binned by the video's fraction of positive clips
    /// (10 bins).
    pub positive_fraction_bins: Vec<FractionBin>,
    /// Pearson correlation between per-video positive-clip fraction and
    /// correctness.
    pub pearson: f64,
}

const HISTOGRAM_BINS: usize = 20;
const FRACTION_BINS: usize = 10;

/// Reproduces the analysis tables: the entropy split of positive vs negative
/// clips, per-class selection demand, and the correlation between positive
/// clip share and prediction correctness. A clip is positive when its own
/// predicted class matches the video label (heavy logits when present).
pub fn diagnostics(ds: &Dataset, results: &[SelectionResult]) -> Result<DiagnosticsReport> {
    let by_id: BTreeMap<&str, &SelectionResult> =
        results.iter().map(|r| (r.video_id.as_str(), r)).collect();

    let mut histogram: Vec<EntropyHistogramBin> = (0..HISTOGRAM_BINS)
        .map(|b| EntropyHistogramBin {
            lo: b as f64 / HISTOGRAM_BINS as f64,
            hi: (b + 1) as f64 / HISTOGRAM_BINS as f64,
            positive: 0,
            negative: 0,
        })
        .collect();
    let mut class_selected: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    let mut fraction_pairs: Vec<(f64, f64)> = Vec::new();

    for video in &ds.videos {
        let (dists, _) = backbone_dists(video)?;
        let mut positives = 0usize;
        for dist in &dists {
            let positive = argmax(dist.probs()) == video.label;
            if positive {
                positives += 1;
            }
            let bin = ((normalized_entropy(dist) * HISTOGRAM_BINS as f64) as usize)
                .min(HISTOGRAM_BINS - 1);
            if positive {
                histogram[bin].positive += 1;
            } else {
                histogram[bin].negative += 1;
            }
        }
        let result = by_id.get(video.video_id.as_str()).ok_or_else(|| {
            Error::IncompleteResults(format!("no result for video {}", video.video_id))
        })?;
        let entry = class_selected.entry(video.label).or_insert((0.0, 0));
        entry.0 += result.selected.len() as f64;
        entry.1 += 1;
        fraction_pairs.push((
            positives as f64 / video.clips.len() as f64,
            (result.predicted_label == video.label) as u8 as f64,
        ));
    }

    let mut per_class_mean_selected: Vec<(usize, f64)> = class_selected
        .into_iter()
        .map(|(k, (sum, count))| (k, sum / count as f64))
        .collect();
    per_class_mean_selected
        .sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));

    let mut bins: Vec<(usize, f64)> = vec![(0, 0.0); FRACTION_BINS];
    for &(frac, correct) in &fraction_pairs {
        let b = ((frac * FRACTION_BINS as f64) as usize).min(FRACTION_BINS - 1);
        bins[b].0 += 1;
        bins[b].1 += correct;
    }
    let positive_fraction_bins = bins
        .into_iter()
        .enumerate()
        .map(|(b, (count, correct))| FractionBin {
            lo: b as f64 / FRACTION_BINS as f64,
            hi: (b + 1) as f64 / FRACTION_BINS as f64,
            videos: count,
            correct_rate: if count == 0 { 0.0 } else { correct / count as f64 },
        })
        .collect();

    Ok(DiagnosticsReport {
        entropy_histogram: histogram,
        per_class_mean_selected,
        positive_fraction_bins,
        pearson: pearson(&fraction_pairs),
    })
}

fn pearson(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    if pairs.is_empty() {
        return 0.0;
    }
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for &(x, y) in pairs {
        cov += (x - mean_x) * (y - mean_y);
        var_x += (x - mean_x).powi(2);
        var_y += (y - mean_y).powi(2);
    }
    if var_x == 0.0 || var_y == 0.0 {
        0.0
    } else {
        cov / (var_x * var_y).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ClipRecord, DatasetMeta};

    fn clip(index: usize, heavy: Vec<f64>) -> ClipRecord {
        ClipRecord {
            index,
            feature: None,
            light_logits: heavy.clone(),
            heavy_logits: Some(heavy),
            annotated: None,
        }
    }

    fn video(id: &str, label: usize, logit_rows: Vec<Vec<f64>>) -> VideoRecord {
        VideoRecord {
            video_id: id.into(),
            label,
            clips: logit_rows
                .into_iter()
                .enumerate()
                .map(|(i, l)| clip(i, l))
                .collect(),
        }
    }

    fn tiny_ds(videos: Vec<VideoRecord>, c: usize) -> Dataset {
        Dataset {
            meta: DatasetMeta {
                num_classes: c,
                feature_dim: 1,
                class_names: None,
                cost: CostParams {
                    light_gflops_per_clip: 0.36,
                    heavy_gflops_per_clip: 19.1,
                    selection_gflops_per_video: 0.012,
                },
            },
            videos,
            head: None,
        }
    }

    fn seven_clip_video() -> VideoRecord {
        video(
            "v",
            0,
            (0..7).map(|i| vec![i as f64 * 0.2, 0.0]).collect(),
        )
    }

    #[test]
    fn dense_selects_everything() {
        let spec = StrategySpec::baseline(StrategyKind::Dense, None, 0);
        assert_eq!(
            select_baseline(&seven_clip_video(), &spec).unwrap(),
            vec![0, 1, 2, 3, 4, 5, 6]
        );
    }

    #[test]
    fn uniform_three_of_seven_is_evenly_spaced() {
        let spec = StrategySpec::baseline(StrategyKind::UniformN, Some(3), 0);
        assert_eq!(
            select_baseline(&seven_clip_video(), &spec).unwrap(),
            vec![0, 3, 6]
        );
    }

    #[test]
    fn top_confidence_prefers_peaked_distribution() {
        let v = video("v", 0, vec![vec![0.9_f64.ln(), 0.1_f64.ln()], vec![0.6_f64.ln(), 0.4_f64.ln()]]);
        let spec = StrategySpec::baseline(StrategyKind::TopConfidenceN, Some(1), 0);
        assert_eq!(select_baseline(&v, &spec).unwrap(), vec![0]);
    }

    #[test]
    fn random_is_seeded_and_seed_sensitive() {
        let v = video("v", 0, (0..40).map(|_| vec![0.0, 0.0]).collect());
        let pick = |seed| {
            select_baseline(
                &v,
                &StrategySpec::baseline(StrategyKind::RandomN, Some(10), seed),
            )
            .unwrap()
        };
        assert_eq!(pick(5), pick(5));
        assert_ne!(pick(5), pick(6));
    }

    #[test]
    fn cost_reproduces_reference_expressions() {
        let params = CostParams {
            light_gflops_per_clip: 0.36,
            heavy_gflops_per_clip: 19.1,
            selection_gflops_per_video: 0.012,
        };
        let (dense, _) = cost(BackboneUsage::HeavyAllClips, &params, 205.6);
        assert!((dense - 19.1 * 205.6).abs() < 1e-9);
        let (uniform, _) = cost(BackboneUsage::HeavySelected { selected: 10.0 }, &params, 205.6);
        assert!((uniform - 191.0).abs() < 1e-9);
        let slim_params = CostParams {
            heavy_gflops_per_clip: 10.6,
            ..params
        };
        let (slim, _) = cost(
            BackboneUsage::SlimScan { selected: 6.9 },
            &slim_params,
            205.6,
        );
        assert!((slim - 147.156).abs() < 1e-9);
    }

    #[test]
    fn evaluate_all_correct_has_unit_accuracy() {
        let ds = tiny_ds(
            vec![
                video("a", 0, vec![vec![3.0, 0.0]]),
                video("b", 1, vec![vec![0.0, 3.0]]),
            ],
            2,
        );
        let results =
            run_strategy(&ds, &StrategySpec::baseline(StrategyKind::Dense, None, 0), None)
                .unwrap();
        let report = evaluate(&ds, &results).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.map, 1.0);
        assert_eq!(report.per_class_accuracy, vec![1.0, 1.0]);
    }

    #[test]
    fn map_matches_brute_force_on_inverted_ranking() {
        // Three videos, two classes, one ranking inversion for class 0:
        // scores 0.9 (true), 0.8 (false), 0.3 (true).
        let ds = tiny_ds(
            vec![
                video("a", 0, vec![vec![0.9_f64.ln(), 0.1_f64.ln()]]),
                video("b", 1, vec![vec![0.8_f64.ln(), 0.2_f64.ln()]]),
                video("c", 0, vec![vec![0.3_f64.ln(), 0.7_f64.ln()]]),
            ],
            2,
        );
        let results =
            run_strategy(&ds, &StrategySpec::baseline(StrategyKind::Dense, None, 0), None)
                .unwrap();
        let report = evaluate(&ds, &results).unwrap();
        // Class 0: positives at ranks 1 and 3 -> AP = (1/1 + 2/3) / 2.
        // Class 1: ranking c (0.7, neg), b (0.2, pos), a -> AP = 1/2.
        let expected = ((1.0 + 2.0 / 3.0) / 2.0 + 0.5) / 2.0;
        assert!((report.map - expected).abs() < 1e-12);
    }

    #[test]
    fn evaluate_missing_result_errors() {
        let ds = tiny_ds(vec![video("a", 0, vec![vec![1.0, 0.0]])], 2);
        match evaluate(&ds, &[]) {
            Err(Error::IncompleteResults(msg)) => assert!(msg.contains('a')),
            other => panic!("expected incomplete-results, got {other:?}"),
        }
    }

    #[test]
    fn dense_evaluation_invariant_to_clip_order() {
        let base = video(
            "v",
            1,
            vec![vec![0.2, 1.0], vec![1.5, 0.3], vec![0.1, 0.8]],
        );
        let mut reversed = base.clone();
        reversed.clips.reverse();
        for (i, clip) in reversed.clips.iter_mut().enumerate() {
            clip.index = i;
        }
        let spec = StrategySpec::baseline(StrategyKind::Dense, None, 0);
        let ds1 = tiny_ds(vec![base], 2);
        let ds2 = tiny_ds(vec![reversed], 2);
        let r1 = evaluate(&ds1, &run_strategy(&ds1, &spec, None).unwrap()).unwrap();
        let r2 = evaluate(&ds2, &run_strategy(&ds2, &spec, None).unwrap()).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn pearson_of_perfect_line_is_one() {
        let pairs: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, i as f64 * 2.0)).collect();
        assert!((pearson(&pairs) - 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[(1.0, 1.0), (1.0, 0.0)]), 0.0);
    }
}
