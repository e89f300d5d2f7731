//! The Skim-Scan pipeline: entropy skimming, class-discriminator filtering,
//! greedy divergence scanning, aggregation, and the two-classifier
//! light/heavy orchestration.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::dataset::{Dataset, DatasetMeta, SelectionResult, VideoRecord};
use crate::discriminator::{concat_input, DiscriminatorModel};
use crate::error::{Error, Result};
use crate::infotheory::{
    argmax, argmin, entropy, js_divergence, kl_divergence, normalized_entropy, softmax,
    wasserstein1, Distribution,
};

/// Scan stop threshold used throughout the experiments.
pub const SCAN_THRESHOLD_DEFAULT: f64 = 0.5;
/// Alternative preset from the framework description.
pub const SCAN_THRESHOLD_ALTERNATE: f64 = 0.4;
/// Fraction of clips the entropy skim is calibrated to retain by default.
pub const ENTROPY_RETAIN_DEFAULT: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyScale {
    /// Entropy divided by `ln C`, in `[0, 1]`.
    Normalized,
    RawNats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkimConfig {
    pub entropy_threshold: f64,
    pub entropy_scale: EntropyScale,
    /// When set, the threshold was (or should be) calibrated to retain this
    /// fraction of clips dataset-wide.
    pub calibration_quantile: Option<f64>,
}

impl Default for SkimConfig {
    fn default() -> Self {
        Self {
            entropy_threshold: 0.7,
            entropy_scale: EntropyScale::Normalized,
            calibration_quantile: Some(ENTROPY_RETAIN_DEFAULT),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    Js,
    Kl,
    Wasserstein1,
}

impl DivergenceKind {
    /// Divergence from the selected aggregate to a candidate. The KL
    /// direction is `D(aggregate || candidate)`, mirroring the JS argument
    /// order.
    pub fn eval(self, aggregate: &Distribution, candidate: &Distribution) -> f64 {
        match self {
            DivergenceKind::Js => js_divergence(aggregate, candidate),
            DivergenceKind::Kl => kl_divergence(aggregate, candidate),
            DivergenceKind::Wasserstein1 => wasserstein1(aggregate, candidate),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub divergence: DivergenceKind,
    pub stop_threshold: f64,
    pub budget_cap: Option<usize>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            divergence: DivergenceKind::Js,
            stop_threshold: SCAN_THRESHOLD_DEFAULT,
            budget_cap: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscriminatorMode {
    /// One-hot conditioning on the dense-aggregate predicted class.
    Conditional,
    /// All-zero one-hot segment.
    Plain,
    /// Ground-truth annotation flags instead of a model.
    Oracle,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogitSource {
    Light,
    Heavy,
    /// Selection statistics from light logits, final prediction from the
    /// heavy logits of the selected clips only.
    SlimScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub skim: SkimConfig,
    pub scan: ScanConfig,
    pub use_entropy: bool,
    pub use_discriminator: bool,
    pub use_scan: bool,
    pub discriminator_mode: DiscriminatorMode,
    pub logit_source: LogitSource,
    /// Stage order: entropy skim before the discriminator (the default) or
    /// after it.
    pub entropy_first: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            skim: SkimConfig::default(),
            scan: ScanConfig::default(),
            use_entropy: true,
            use_discriminator: true,
            use_scan: true,
            discriminator_mode: DiscriminatorMode::Conditional,
            logit_source: LogitSource::Light,
            entropy_first: true,
        }
    }
}

/// Per-clip probability distributions from the chosen logit source, in clip
/// order. `SlimScan` draws selection statistics from the light logits.
pub fn clip_distributions(video: &VideoRecord, source: LogitSource) -> Result<Vec<Distribution>> {
    video
        .clips
        .iter()
        .map(|clip| {
            let logits = match source {
                LogitSource::Light | LogitSource::SlimScan => &clip.light_logits,
                LogitSource::Heavy => clip.heavy_logits.as_ref().ok_or_else(|| {
                    Error::MissingLogits(format!(
                        "video {} clip {} has no heavy logits",
                        video.video_id, clip.index
                    ))
                })?,
            };
            softmax(logits)
        })
        .collect()
}

fn scaled_entropy(dist: &Distribution, scale: EntropyScale) -> f64 {
    match scale {
        EntropyScale::Normalized => normalized_entropy(dist),
        EntropyScale::RawNats => entropy(dist),
    }
}

/// Survivors of the entropy skim over the listed candidate positions: a clip
/// is dropped iff its entropy is `>=` the threshold. If everything would be
/// dropped, the single minimum-entropy candidate survives.
fn skim_entropy_subset(
    dists: &[Distribution],
    candidates: &[usize],
    cfg: &SkimConfig,
) -> Vec<usize> {
    let survivors: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&i| scaled_entropy(&dists[i], cfg.entropy_scale) < cfg.entropy_threshold)
        .collect();
    if survivors.is_empty() {
        let entropies: Vec<f64> = candidates
            .iter()
            .map(|&i| scaled_entropy(&dists[i], cfg.entropy_scale))
            .collect();
        vec![candidates[argmin(&entropies)]]
    } else {
        survivors
    }
}

/// Entropy skim over all positions of `dists`.
pub fn skim_entropy(dists: &[Distribution], cfg: &SkimConfig) -> Vec<usize> {
    assert!(!dists.is_empty(), "skim over empty distribution list");
    let all: Vec<usize> = (0..dists.len()).collect();
    skim_entropy_subset(dists, &all, cfg)
}

/// Linear-interpolation quantile of pooled clip entropies such that skimming
/// at the returned threshold retains roughly `retain_fraction` of all clips
/// (within one-clip granularity).
pub fn calibrate_entropy_threshold(
    ds: &Dataset,
    retain_fraction: f64,
    scale: EntropyScale,
    source: LogitSource,
) -> Result<f64> {
    if !(0.0 < retain_fraction && retain_fraction < 1.0) {
        return Err(Error::Config(format!(
            "retain fraction {retain_fraction} outside (0, 1)"
        )));
    }
    let mut entropies = Vec::new();
    for video in &ds.videos {
        for dist in clip_distributions(video, source)? {
            entropies.push(scaled_entropy(&dist, scale));
        }
    }
    if entropies.is_empty() {
        return Err(Error::InvalidInput("dataset has no clips".into()));
    }
    entropies.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(interpolated_quantile(&entropies, retain_fraction))
}

fn interpolated_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Softmax of the elementwise mean of the selected clips' logits.
pub fn scan_aggregate(selected_logits: &[&[f64]]) -> Distribution {
    assert!(!selected_logits.is_empty(), "aggregate of empty selection");
    let c = selected_logits[0].len();
    let mut mean = vec![0.0; c];
    for logits in selected_logits {
        for (m, &x) in mean.iter_mut().zip(*logits) {
            *m += x;
        }
    }
    let n = selected_logits.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    softmax(&mean).expect("finite logit means")
}

/// Greedy divergence scan. Seeds with the minimum-entropy candidate, then
/// repeatedly adds the candidate with the largest divergence from the
/// aggregate of everything selected so far, stopping once that divergence
/// falls below the threshold, the candidates run out, or the budget cap is
/// hit. Ties break toward the lowest position. Returns positions in
/// selection order.
pub fn scan(
    candidates: &[usize],
    logits: &[Vec<f64>],
    dists: &[Distribution],
    cfg: &ScanConfig,
) -> Vec<usize> {
    assert!(!candidates.is_empty(), "scan over empty candidate set");
    let entropies: Vec<f64> = candidates.iter().map(|&i| entropy(&dists[i])).collect();
    let seed = candidates[argmin(&entropies)];

    let mut selected = vec![seed];
    let mut remaining: Vec<usize> = candidates.iter().copied().filter(|&i| i != seed).collect();
    let budget = cfg.budget_cap.unwrap_or(usize::MAX);

    while selected.len() < budget && !remaining.is_empty() {
        let aggregate =
            scan_aggregate(&selected.iter().map(|&i| logits[i].as_slice()).collect::<Vec<_>>());
        let gains: Vec<f64> = remaining
            .iter()
            .map(|&j| cfg.divergence.eval(&aggregate, &dists[j]))
            .collect();
        let best = argmax(&gains);
        if gains[best] < cfg.stop_threshold {
            break;
        }
        selected.push(remaining.remove(best));
    }
    selected
}

/// Runs the configured pipeline on one video.
///
/// Stage order is entropy skim, discriminator filter, scan (the two skims
/// swap when `entropy_first` is false); each stage can be toggled off. The
/// final video distribution is the mean of the selected clips' probability
/// distributions, while the scan-internal aggregate uses
/// softmax-of-mean-logits.
pub fn run_pipeline(
    video: &VideoRecord,
    cfg: &PipelineConfig,
    disc: Option<&DiscriminatorModel>,
    meta: &DatasetMeta,
) -> Result<SelectionResult> {
    assert!(!video.clips.is_empty(), "video without clips");
    let stats_dists = clip_distributions(video, cfg.logit_source.stats_source())?;
    let stats_logits: Vec<Vec<f64>> = video
        .clips
        .iter()
        .map(|c| match cfg.logit_source.stats_source() {
            LogitSource::Heavy => c.heavy_logits.clone().expect("checked above"),
            _ => c.light_logits.clone(),
        })
        .collect();

    let positions: Vec<usize> = (0..video.clips.len()).collect();
    let run_discriminator = cfg.use_discriminator
        && !matches!(cfg.discriminator_mode, DiscriminatorMode::None);

    let apply_entropy =
        |candidates: &[usize]| skim_entropy_subset(&stats_dists, candidates, &cfg.skim);
    let apply_discriminator = |candidates: &[usize]| -> Result<Vec<usize>> {
        match cfg.discriminator_mode {
            DiscriminatorMode::Oracle => oracle_filter(video, candidates),
            DiscriminatorMode::Plain | DiscriminatorMode::Conditional => {
                let model = disc.ok_or_else(|| {
                    Error::Config("discriminator model required for this mode".into())
                })?;
                let conditioning = match cfg.discriminator_mode {
                    DiscriminatorMode::Conditional => {
                        Some(dense_predicted_label(&stats_dists))
                    }
                    _ => None,
                };
                filter_positions(model, video, conditioning, candidates, meta)
            }
            DiscriminatorMode::None => Ok(candidates.to_vec()),
        }
    };

    // Survivor sets after the first and second skim stage in execution order.
    let (after_first, after_second) = match (cfg.use_entropy, run_discriminator) {
        (false, false) => (positions.clone(), positions.clone()),
        (true, false) => {
            let s = apply_entropy(&positions);
            (s.clone(), s)
        }
        (false, true) => {
            let s = apply_discriminator(&positions)?;
            (s.clone(), s)
        }
        (true, true) => {
            if cfg.entropy_first {
                let first = apply_entropy(&positions);
                let second = apply_discriminator(&first)?;
                (first, second)
            } else {
                let first = apply_discriminator(&positions)?;
                let second = apply_entropy(&first);
                (first, second)
            }
        }
    };

    let selected_positions = if cfg.use_scan {
        scan(&after_second, &stats_logits, &stats_dists, &cfg.scan)
    } else {
        after_second.clone()
    };

    // Final prediction: mean of the selected clips' probability
    // distributions from the prediction source.
    let prediction_dists: Vec<Distribution> = match cfg.logit_source {
        LogitSource::Light => selected_positions
            .iter()
            .map(|&i| stats_dists[i].clone())
            .collect(),
        LogitSource::Heavy => selected_positions
            .iter()
            .map(|&i| stats_dists[i].clone())
            .collect(),
        LogitSource::SlimScan => selected_positions
            .iter()
            .map(|&i| {
                let clip = &video.clips[i];
                let heavy = clip.heavy_logits.as_ref().ok_or_else(|| {
                    Error::MissingLogits(format!(
                        "video {} clip {} has no heavy logits for the slim-scan rescore",
                        video.video_id, clip.index
                    ))
                })?;
                softmax(heavy)
            })
            .collect::<Result<_>>()?,
    };
    let video_distribution = mean_distribution(&prediction_dists);
    let predicted_label = argmax(video_distribution.probs());

    let total = video.clips.len();
    let (clips_evaluated_heavy, gflops_backbone) = match cfg.logit_source {
        LogitSource::Light => (0, meta.cost.light_gflops_per_clip * total as f64),
        LogitSource::Heavy => (total, meta.cost.heavy_gflops_per_clip * total as f64),
        LogitSource::SlimScan => (
            selected_positions.len(),
            meta.cost.light_gflops_per_clip * total as f64
                + meta.cost.heavy_gflops_per_clip * selected_positions.len() as f64,
        ),
    };

    let to_indices = |positions: &[usize]| -> Vec<usize> {
        positions.iter().map(|&i| video.clips[i].index).collect()
    };
    let sorted_indices = |positions: &[usize]| -> Vec<usize> {
        let set: BTreeSet<usize> = to_indices(positions).into_iter().collect();
        set.into_iter().collect()
    };

    let result = SelectionResult {
        video_id: video.video_id.clone(),
        survivors_after_entropy: sorted_indices(&after_first),
        survivors_after_discriminator: sorted_indices(&after_second),
        selected: to_indices(&selected_positions),
        video_distribution,
        predicted_label,
        clips_evaluated_heavy,
        gflops_backbone,
        gflops_selection: meta.cost.selection_gflops_per_video,
    };
    assert_stage_monotonicity(&result, video);
    Ok(result)
}

impl LogitSource {
    /// The source feeding skim/scan statistics.
    fn stats_source(self) -> LogitSource {
        match self {
            LogitSource::Heavy => LogitSource::Heavy,
            _ => LogitSource::Light,
        }
    }
}

/// Predicted class of the dense aggregate: argmax of the mean of all clip
/// distributions.
pub fn dense_predicted_label(dists: &[Distribution]) -> usize {
    argmax(mean_distribution(dists).probs())
}

/// Mean of probability distributions (a convex combination, so itself a
/// valid distribution).
pub fn mean_distribution(dists: &[Distribution]) -> Distribution {
    assert!(!dists.is_empty(), "mean of empty distribution list");
    let c = dists[0].len();
    let mut mean = vec![0.0; c];
    for d in dists {
        for (m, &p) in mean.iter_mut().zip(d.probs()) {
            *m += p;
        }
    }
    let n = dists.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    Distribution::new(mean).expect("convex combination of distributions")
}

fn oracle_filter(video: &VideoRecord, candidates: &[usize]) -> Result<Vec<usize>> {
    let mut survivors = Vec::new();
    for &i in candidates {
        let annotated = video.clips[i].annotated.ok_or_else(|| {
            Error::UnsupportedDataset(format!(
                "oracle discriminator needs annotated flags (video {} clip {})",
                video.video_id, video.clips[i].index
            ))
        })?;
        if annotated {
            survivors.push(i);
        }
    }
    if survivors.is_empty() {
        // No annotated candidate; keep the lowest position.
        survivors.push(candidates[0]);
    }
    Ok(survivors)
}

/// `filter_clips` over positions instead of clip indices.
fn filter_positions(
    model: &DiscriminatorModel,
    video: &VideoRecord,
    conditioning: Option<usize>,
    candidates: &[usize],
    meta: &DatasetMeta,
) -> Result<Vec<usize>> {
    use crate::learning::GradModel;
    let mut survivors = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for &i in candidates {
        let clip = &video.clips[i];
        let feature = clip.feature.as_ref().ok_or_else(|| {
            Error::FeatureRequired(format!(
                "video {} clip {} has no feature vector",
                video.video_id, clip.index
            ))
        })?;
        let input = concat_input(feature, conditioning, meta.num_classes);
        let logits = model.forward(&input);
        if argmax(&logits) == 1 {
            survivors.push(i);
        }
        if best.map_or(true, |(_, l)| logits[1] > l) {
            best = Some((i, logits[1]));
        }
    }
    if survivors.is_empty() {
        survivors.push(best.expect("nonempty candidates").0);
    }
    Ok(survivors)
}

fn assert_stage_monotonicity(result: &SelectionResult, video: &VideoRecord) {
    let all: BTreeSet<usize> = video.clips.iter().map(|c| c.index).collect();
    let entropy_set: BTreeSet<usize> = result.survivors_after_entropy.iter().copied().collect();
    let disc_set: BTreeSet<usize> = result
        .survivors_after_discriminator
        .iter()
        .copied()
        .collect();
    let selected_set: BTreeSet<usize> = result.selected.iter().copied().collect();
    assert!(
        entropy_set.is_subset(&all)
            && disc_set.is_subset(&entropy_set)
            && selected_set.is_subset(&disc_set),
        "stage monotonicity violated for video {}",
        result.video_id
    );
    assert!(!result.selected.is_empty(), "empty selection");
}
