//! Domain data model: datasets of untrimmed videos split into clips, each
//! clip carrying precomputed classifier logits and optional features and
//! temporal-boundary annotations.
//!
//! Records are immutable after load and safe to share across threads.

use serde::{Deserialize, Serialize};

use crate::infotheory::Distribution;

/// Per-clip and per-video compute costs in GFLOPs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub light_gflops_per_clip: f64,
    pub heavy_gflops_per_clip: f64,
    pub selection_gflops_per_video: f64,
}

impl CostParams {
    pub fn is_valid(&self) -> bool {
        [
            self.light_gflops_per_clip,
            self.heavy_gflops_per_clip,
            self.selection_gflops_per_video,
        ]
        .iter()
        .all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// Dataset-wide shape information: `C` classes, `D` feature dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub num_classes: usize,
    pub feature_dim: usize,
    pub class_names: Option<Vec<String>>,
    pub cost: CostParams,
}

/// One clip: its position in the video, optional feature vector, light
/// (mandatory) and heavy (optional) classifier logits, and an optional flag
/// marking whether it falls inside the annotated temporal boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<Vec<f64>>,
    pub light_logits: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heavy_logits: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotated: Option<bool>,
}

/// An untrimmed video: ordered clips plus the ground-truth class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub video_id: String,
    pub label: usize,
    pub clips: Vec<ClipRecord>,
}

/// An affine map from `D`-dimensional features to `C` class logits. Stands in
/// for the clip-level classifier when logits must be recomputed from
/// features (transfer finetuning).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearHead {
    /// `C` rows of `D` weights.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LinearHead {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub videos: Vec<VideoRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<LinearHead>,
}

impl Dataset {
    pub fn total_clips(&self) -> usize {
        self.videos.iter().map(|v| v.clips.len()).sum()
    }
}

/// Outcome of running the selection pipeline on one video.
///
/// The two survivor fields record the sets remaining after the first and
/// second skimming stage in execution order; under the default order these
/// are literally "after entropy" and "after discriminator". The subset chain
/// `selected ⊆ survivors_after_discriminator ⊆ survivors_after_entropy` holds
/// either way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub video_id: String,
    pub survivors_after_entropy: Vec<usize>,
    pub survivors_after_discriminator: Vec<usize>,
    /// Clip indices in selection order.
    pub selected: Vec<usize>,
    pub video_distribution: Distribution,
    pub predicted_label: usize,
    pub clips_evaluated_heavy: usize,
    pub gflops_backbone: f64,
    pub gflops_selection: f64,
}

fn all_finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

/// Checks every structural invariant and returns one description per
/// violation. Violations are data, not failures: an empty list means the
/// dataset is well formed.
pub fn validate_dataset(ds: &Dataset) -> Vec<String> {
    let mut violations = Vec::new();
    let c = ds.meta.num_classes;
    let d = ds.meta.feature_dim;

    if c < 2 {
        violations.push(format!("meta: num_classes = {c}, expected >= 2"));
    }
    if d < 1 {
        violations.push("meta: feature_dim = 0, expected >= 1".to_string());
    }
    if !ds.meta.cost.is_valid() {
        violations.push("meta: cost params must be finite and >= 0".to_string());
    }
    if let Some(names) = &ds.meta.class_names {
        if names.len() != c {
            violations.push(format!(
                "meta: {} class names for {c} classes",
                names.len()
            ));
        }
    }
    if let Some(head) = &ds.head {
        if head.weights.len() != c
            || head.bias.len() != c
            || head.weights.iter().any(|row| row.len() != d)
        {
            violations.push("head: weight matrix is not C x D with C biases".to_string());
        } else if head.weights.iter().any(|row| !all_finite(row)) || !all_finite(&head.bias) {
            violations.push("head: non-finite parameter".to_string());
        }
    }

    for video in &ds.videos {
        let id = &video.video_id;
        if video.label >= c {
            violations.push(format!("video {id}: label {} >= num_classes {c}", video.label));
        }
        if video.clips.is_empty() {
            violations.push(format!("video {id}: no clips"));
            continue;
        }
        let mut prev_index: Option<usize> = None;
        for clip in &video.clips {
            let at = format!("video {id} clip {}", clip.index);
            if let Some(prev) = prev_index {
                if clip.index <= prev {
                    violations.push(format!("{at}: index not strictly increasing after {prev}"));
                }
            }
            prev_index = Some(clip.index);

            if clip.light_logits.len() != c {
                violations.push(format!(
                    "{at}: light_logits length {} != num_classes {c}",
                    clip.light_logits.len()
                ));
            } else if !all_finite(&clip.light_logits) {
                violations.push(format!("{at}: non-finite light logit"));
            }
            if let Some(heavy) = &clip.heavy_logits {
                if heavy.len() != c {
                    violations.push(format!(
                        "{at}: heavy_logits length {} != num_classes {c}",
                        heavy.len()
                    ));
                } else if !all_finite(heavy) {
                    violations.push(format!("{at}: non-finite heavy logit"));
                }
            }
            if let Some(feature) = &clip.feature {
                if feature.len() != d {
                    violations.push(format!(
                        "{at}: feature length {} != feature_dim {d}",
                        feature.len()
                    ));
                } else if !all_finite(feature) {
                    violations.push(format!("{at}: non-finite feature entry"));
                }
            }
        }
    }
    violations
}
