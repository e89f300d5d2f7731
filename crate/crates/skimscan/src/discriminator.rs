//! The class discriminator: a tiny binary classifier over the concatenation
//! of a clip's feature vector and a one-hot class label, used to drop clips
//! that fall outside the annotated temporal boundaries.
//!
//! Architecture: per-element affine map with shared scalar weight and bias
//! (a width-1, kernel-1 convolution), adaptive average pooling down to
//! `pool_width` values, then an affine head to two logits.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClipRecord, Dataset, DatasetMeta, LinearHead, VideoRecord};
use crate::error::{Error, Result};
use crate::infotheory::{argmax, softmax};
use crate::learning::{sgd_train, GradModel, Loss, Sample, SgdConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorModel {
    pub scale: f64,
    pub shift: f64,
    pub pool_width: usize,
    /// 2 x pool_width, row-major.
    pub head_weights: Vec<f64>,
    pub head_bias: [f64; 2],
}

/// Held-out quality measures of a trained discriminator. "Drop" means
/// predicted class 0, i.e. the clip would be filtered out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorReport {
    pub binary_accuracy: f64,
    pub positive_drop_rate: f64,
    pub negative_drop_rate: f64,
}

impl DiscriminatorModel {
    /// Fresh model with unit scale, zero shift, and a small seeded random
    /// head.
    pub fn init(pool_width: usize, seed: u64) -> Self {
        assert!(pool_width >= 1, "pool_width must be >= 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            scale: 1.0,
            shift: 0.0,
            pool_width,
            head_weights: (0..2 * pool_width)
                .map(|_| rng.random_range(-0.01..0.01))
                .collect(),
            head_bias: [0.0, 0.0],
        }
    }

    /// Default pooled width: the full input length, so nothing is merged.
    /// Narrower widths (the 2000-for-2048 / 500-for-512 channel sizes used
    /// with real backbones) are available through
    /// [`train_supervised_with_pool`].
    pub fn default_pool_width(meta: &DatasetMeta) -> usize {
        (meta.feature_dim + meta.num_classes).max(1)
    }

    /// Segment means of `input`: boundaries at `round(i * len / pool_width)`.
    fn pool_raw(&self, input: &[f64]) -> Vec<f64> {
        let len = input.len();
        let w = self.pool_width;
        assert!(w <= len, "pool_width {w} exceeds input length {len}");
        let mut pooled = Vec::with_capacity(w);
        let mut start = 0usize;
        for i in 1..=w {
            let end = ((i * len) as f64 / w as f64).round() as usize;
            let seg = &input[start..end];
            pooled.push(seg.iter().sum::<f64>() / seg.len() as f64);
            start = end;
        }
        pooled
    }
}

impl GradModel for DiscriminatorModel {
    fn forward(&self, input: &[f64]) -> Vec<f64> {
        // Pooling commutes with the elementwise affine map.
        let pooled: Vec<f64> = self
            .pool_raw(input)
            .into_iter()
            .map(|m| self.scale * m + self.shift)
            .collect();
        let w = self.pool_width;
        (0..2)
            .map(|k| {
                self.head_bias[k]
                    + self.head_weights[k * w..(k + 1) * w]
                        .iter()
                        .zip(&pooled)
                        .map(|(hw, p)| hw * p)
                        .sum::<f64>()
            })
            .collect()
    }

    fn params(&self) -> Vec<f64> {
        let mut p = vec![self.scale, self.shift];
        p.extend_from_slice(&self.head_weights);
        p.extend_from_slice(&self.head_bias);
        p
    }

    fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), 4 + 2 * self.pool_width);
        self.scale = params[0];
        self.shift = params[1];
        self.head_weights
            .copy_from_slice(&params[2..2 + 2 * self.pool_width]);
        self.head_bias[0] = params[2 + 2 * self.pool_width];
        self.head_bias[1] = params[3 + 2 * self.pool_width];
    }

    fn backward(&self, input: &[f64], grad_logits: &[f64]) -> Vec<f64> {
        let raw = self.pool_raw(input);
        let pooled: Vec<f64> = raw.iter().map(|&m| self.scale * m + self.shift).collect();
        let w = self.pool_width;
        let mut grad = vec![0.0; 4 + 2 * w];
        for (k, &g) in grad_logits.iter().enumerate() {
            let row = &self.head_weights[k * w..(k + 1) * w];
            grad[0] += g * row.iter().zip(&raw).map(|(hw, m)| hw * m).sum::<f64>();
            grad[1] += g * row.iter().sum::<f64>();
            for (s, &p) in pooled.iter().enumerate() {
                grad[2 + k * w + s] = g * p;
            }
            grad[2 + 2 * w + k] = g;
        }
        grad
    }
}

/// Concatenates `[feature; one_hot(class_label)]` in that fixed order.
pub fn build_input(clip: &ClipRecord, class_label: usize, meta: &DatasetMeta) -> Result<Vec<f64>> {
    let feature = clip.feature.as_ref().ok_or_else(|| {
        Error::FeatureRequired(format!("clip {} has no feature vector", clip.index))
    })?;
    assert!(class_label < meta.num_classes, "class label out of range");
    Ok(concat_input(feature, Some(class_label), meta.num_classes))
}

/// `label = None` leaves the one-hot segment all zeros (the "plain",
/// unconditioned variant).
pub(crate) fn concat_input(feature: &[f64], label: Option<usize>, num_classes: usize) -> Vec<f64> {
    let mut input = Vec::with_capacity(feature.len() + num_classes);
    input.extend_from_slice(feature);
    let start = input.len();
    input.resize(start + num_classes, 0.0);
    if let Some(c) = label {
        input[start + c] = 1.0;
    }
    input
}

fn predicted_keep(model: &DiscriminatorModel, input: &[f64]) -> bool {
    let logits = model.forward(input);
    argmax(&logits) == 1
}

/// Trains the discriminator with BCE over all annotated/unannotated clips
/// (class 1 = annotated), conditioning on the ground-truth video label, and
/// reports held-out accuracy and drop rates from a deterministic 80/20 video
/// split.
pub fn train_supervised(
    ds: &Dataset,
    cfg: &SgdConfig,
) -> Result<(DiscriminatorModel, DiscriminatorReport)> {
    train_supervised_with_pool(ds, cfg, DiscriminatorModel::default_pool_width(&ds.meta))
}

pub fn train_supervised_with_pool(
    ds: &Dataset,
    cfg: &SgdConfig,
    pool_width: usize,
) -> Result<(DiscriminatorModel, DiscriminatorReport)> {
    cfg.validate()?;
    if ds.videos.is_empty() {
        return Err(Error::UnsupportedDataset("no videos to train on".into()));
    }
    let input_len = ds.meta.feature_dim + ds.meta.num_classes;
    if pool_width == 0 || pool_width > input_len {
        return Err(Error::Config(format!(
            "pool_width {pool_width} outside [1, {input_len}]"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..ds.videos.len()).collect();
    order.shuffle(&mut rng);
    let train_count = ((order.len() * 4) / 5).max(1);
    let (train_vids, held_out_vids) = order.split_at(train_count);

    let collect = |vids: &[usize]| -> Result<Vec<Sample>> {
        let mut samples = Vec::new();
        for &v in vids {
            let video = &ds.videos[v];
            for clip in &video.clips {
                let annotated = clip.annotated.ok_or_else(|| {
                    Error::UnsupportedDataset(format!(
                        "video {} clip {} lacks the annotated flag",
                        video.video_id, clip.index
                    ))
                })?;
                samples.push(Sample::new(
                    build_input(clip, video.label, &ds.meta)?,
                    annotated as usize,
                ));
            }
        }
        Ok(samples)
    };
    let train_set = collect(train_vids)?;
    let held_out = collect(held_out_vids)?;

    let classes_seen: Vec<bool> = train_set.iter().fold(vec![false, false], |mut seen, s| {
        seen[s.target] = true;
        seen
    });
    if !(classes_seen[0] && classes_seen[1]) {
        log::warn!("discriminator training data is single-class; the model will degenerate");
    }

    let model = DiscriminatorModel::init(pool_width, cfg.seed);
    let (model, _) = sgd_train(model, &train_set, &Loss::BinaryCrossEntropy, cfg)?;

    let eval_set = if held_out.is_empty() { &train_set } else { &held_out };
    let mut correct = 0usize;
    let mut pos = (0usize, 0usize); // (dropped, total) over annotated clips
    let mut neg = (0usize, 0usize);
    for sample in eval_set {
        let keep = predicted_keep(&model, &sample.input);
        if keep == (sample.target == 1) {
            correct += 1;
        }
        let bucket = if sample.target == 1 { &mut pos } else { &mut neg };
        bucket.1 += 1;
        if !keep {
            bucket.0 += 1;
        }
    }
    let rate = |(dropped, total): (usize, usize)| {
        if total == 0 {
            0.0
        } else {
            dropped as f64 / total as f64
        }
    };
    let report = DiscriminatorReport {
        binary_accuracy: correct as f64 / eval_set.len() as f64,
        positive_drop_rate: rate(pos),
        negative_drop_rate: rate(neg),
    };
    Ok((model, report))
}

/// Keeps the candidates the model classifies as annotated (class 1),
/// conditioning each input on `conditioning_label`; `None` runs the plain
/// variant with an all-zero one-hot segment. If everything would be dropped,
/// the single candidate with the highest class-1 logit survives.
pub fn filter_clips(
    model: &DiscriminatorModel,
    video: &VideoRecord,
    conditioning_label: Option<usize>,
    candidates: &[usize],
    meta: &DatasetMeta,
) -> Result<Vec<usize>> {
    let mut survivors = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for &idx in candidates {
        let clip = video
            .clips
            .iter()
            .find(|c| c.index == idx)
            .unwrap_or_else(|| panic!("candidate index {idx} not in video"));
        let feature = clip.feature.as_ref().ok_or_else(|| {
            Error::FeatureRequired(format!(
                "video {} clip {} has no feature vector",
                video.video_id, clip.index
            ))
        })?;
        let input = concat_input(feature, conditioning_label, meta.num_classes);
        let logits = model.forward(&input);
        if argmax(&logits) == 1 {
            survivors.push(idx);
        }
        if best.map_or(true, |(_, l)| logits[1] > l) {
            best = Some((idx, logits[1]));
        }
    }
    if survivors.is_empty() {
        if let Some((idx, _)) = best {
            survivors.push(idx);
        }
    }
    Ok(survivors)
}

/// Label-free transfer finetuning. Per video, a soft gate
/// `g_i = softmax(discriminator(clip_i))[1]` weights the clip features into a
/// normalized video feature; the frozen `head` maps it to class logits and
/// cross-entropy against the video label backpropagates into the
/// discriminator only. Returns the finetuned model and the per-epoch mean
/// loss trace.
pub fn transfer_finetune(
    model: DiscriminatorModel,
    ds: &Dataset,
    head: &LinearHead,
    cfg: &SgdConfig,
) -> Result<(DiscriminatorModel, Vec<f64>)> {
    cfg.validate()?;
    if head.weights.len() != ds.meta.num_classes
        || head.weights[0].len() != ds.meta.feature_dim
    {
        return Err(Error::UnsupportedDataset(
            "linear head dimensions do not match the dataset".into(),
        ));
    }
    if ds.videos.is_empty() {
        return Err(Error::UnsupportedDataset("no videos to finetune on".into()));
    }

    let mut model = model;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..ds.videos.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for (batch_no, &v) in order.iter().enumerate() {
            let video = &ds.videos[v];
            let (loss, grad) = transfer_video_loss_grad(&model, video, head, &ds.meta)?;
            if !loss.is_finite() {
                return Err(Error::DivergedTraining {
                    epoch,
                    batch: batch_no,
                    loss,
                });
            }
            epoch_loss += loss;
            let mut params = model.params();
            for (p, g) in params.iter_mut().zip(&grad) {
                *p -= cfg.learning_rate * g;
            }
            model.set_params(&params);
        }
        trace.push(epoch_loss / ds.videos.len() as f64);
    }
    Ok((model, trace))
}

/// Loss and discriminator-parameter gradient of the soft-gated video
/// prediction for one video.
fn transfer_video_loss_grad(
    model: &DiscriminatorModel,
    video: &VideoRecord,
    head: &LinearHead,
    meta: &DatasetMeta,
) -> Result<(f64, Vec<f64>)> {
    let d = meta.feature_dim;
    let n = video.clips.len();
    let mut inputs = Vec::with_capacity(n);
    let mut gates = Vec::with_capacity(n);
    for clip in &video.clips {
        let input = build_input(clip, video.label, meta)?;
        let gate = softmax(&model.forward(&input))
            .map_err(|_| Error::DivergedTraining {
                epoch: 0,
                batch: 0,
                loss: f64::NAN,
            })?
            .probs()[1];
        inputs.push(input);
        gates.push(gate);
    }

    let gate_sum: f64 = gates.iter().sum();
    let mut video_feature = vec![0.0; d];
    for (clip, &g) in video.clips.iter().zip(&gates) {
        let feature = clip.feature.as_ref().expect("checked by build_input");
        for (vf, &x) in video_feature.iter_mut().zip(feature) {
            *vf += g * x;
        }
    }
    for vf in &mut video_feature {
        *vf /= gate_sum;
    }

    let logits = head.apply(&video_feature);
    let loss = crate::learning::cross_entropy(&logits, video.label);

    // d loss / d video_feature = head^T (softmax - onehot)
    let probs = softmax(&logits).expect("finite logits");
    let mut grad_logits: Vec<f64> = probs.probs().to_vec();
    grad_logits[video.label] -= 1.0;
    let mut grad_vfeat = vec![0.0; d];
    for (row, &g) in head.weights.iter().zip(&grad_logits) {
        for (gv, &w) in grad_vfeat.iter_mut().zip(row) {
            *gv += g * w;
        }
    }

    // d video_feature / d gate_i = (feature_i - video_feature) / gate_sum,
    // and d gate_i / d disc_logits_i = gate_i (1 - gate_i) * [-1, +1].
    let mut grad_params = vec![0.0; model.params().len()];
    for ((clip, &g), input) in video.clips.iter().zip(&gates).zip(&inputs) {
        let feature = clip.feature.as_ref().expect("checked by build_input");
        let dl_dgate: f64 = grad_vfeat
            .iter()
            .zip(feature)
            .zip(&video_feature)
            .map(|((gv, &x), &vf)| gv * (x - vf))
            .sum::<f64>()
            / gate_sum;
        let sensitivity = dl_dgate * g * (1.0 - g);
        let contribution = model.backward(input, &[-sensitivity, sensitivity]);
        for (acc, c) in grad_params.iter_mut().zip(&contribution) {
            *acc += c;
        }
    }
    Ok((loss, grad_params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::CostParams;
    use crate::learning::grad_check;

    fn meta(c: usize, d: usize) -> DatasetMeta {
        DatasetMeta {
            num_classes: c,
            feature_dim: d,
            class_names: None,
            cost: CostParams {
                light_gflops_per_clip: 1.0,
                heavy_gflops_per_clip: 1.0,
                selection_gflops_per_video: 0.0,
            },
        }
    }

    fn clip_with_feature(index: usize, feature: Vec<f64>, c: usize) -> ClipRecord {
        ClipRecord {
            index,
            feature: Some(feature),
            light_logits: vec![0.0; c],
            heavy_logits: None,
            annotated: None,
        }
    }

    #[test]
    fn build_input_concatenates_feature_and_one_hot() {
        let m = meta(2, 3);
        let clip = clip_with_feature(0, vec![1.0, 2.0, 3.0], 2);
        assert_eq!(
            build_input(&clip, 1, &m).unwrap(),
            vec![1.0, 2.0, 3.0, 0.0, 1.0]
        );
        assert_eq!(
            build_input(&clip, 0, &m).unwrap(),
            vec![1.0, 2.0, 3.0, 1.0, 0.0]
        );
    }

    #[test]
    fn build_input_length_is_d_plus_c() {
        let m = meta(200, 512);
        let clip = clip_with_feature(0, vec![0.0; 512], 200);
        assert_eq!(build_input(&clip, 7, &m).unwrap().len(), 712);
    }

    #[test]
    fn build_input_without_feature_fails() {
        let m = meta(2, 3);
        let clip = ClipRecord {
            index: 4,
            feature: None,
            light_logits: vec![0.0, 0.0],
            heavy_logits: None,
            annotated: None,
        };
        assert!(matches!(
            build_input(&clip, 0, &m),
            Err(Error::FeatureRequired(_))
        ));
    }

    #[test]
    fn zero_head_forwards_zero_logits() {
        let mut model = DiscriminatorModel::init(4, 0);
        model.head_weights = vec![0.0; 8];
        assert_eq!(model.forward(&[3.0, -1.0, 2.0, 0.5]), vec![0.0, 0.0]);
    }

    #[test]
    fn full_width_pooling_is_identity() {
        let model = DiscriminatorModel::init(5, 1);
        let input = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(model.pool_raw(&input), input.to_vec());
    }

    #[test]
    fn pool_width_one_is_the_mean() {
        let mut model = DiscriminatorModel::init(1, 2);
        model.scale = 2.0;
        model.shift = 0.5;
        model.head_weights = vec![1.0, 0.0];
        model.head_bias = [0.0, 0.0];
        let input = [1.0, 2.0, 3.0, 4.0];
        // pooled value = mean(scale * x + shift) = 2 * 2.5 + 0.5
        let logits = model.forward(&input);
        assert!((logits[0] - 5.5).abs() < 1e-12);
        assert_eq!(logits[1], 0.0);
    }

    #[test]
    fn grad_check_discriminator_bce() {
        let model = DiscriminatorModel::init(6, 3);
        let sample = Sample::new(vec![0.3, -0.7, 1.2, 0.4, -0.2, 0.9, 1.5, -1.1], 1);
        let err = grad_check(&model, &sample, &Loss::BinaryCrossEntropy, 1e-5);
        assert!(err <= 1e-5, "relative error {err}");
    }

    #[test]
    fn grad_check_discriminator_downpooled() {
        let mut model = DiscriminatorModel::init(3, 4);
        model.scale = 0.8;
        model.shift = -0.1;
        let sample = Sample::new(vec![0.5, 1.0, -0.5, 0.25, 2.0, -1.5, 0.75], 0);
        let err = grad_check(&model, &sample, &Loss::BinaryCrossEntropy, 1e-5);
        assert!(err <= 1e-5, "relative error {err}");
    }

    #[test]
    fn plain_and_conditional_inputs_differ_when_one_hot_weighted() {
        let mut model = DiscriminatorModel::init(5, 7);
        // Head weight over the pooled one-hot segment is nonzero.
        model.head_weights = vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let feature = [0.2, 0.4, 0.6];
        let plain = concat_input(&feature, None, 2);
        let conditional = concat_input(&feature, Some(1), 2);
        assert_ne!(model.forward(&plain), model.forward(&conditional));
    }

    fn filter_video(c: usize) -> (VideoRecord, DatasetMeta) {
        let video = VideoRecord {
            video_id: "v".into(),
            label: 0,
            clips: (0..4)
                .map(|i| clip_with_feature(i, vec![i as f64, 1.0, -(i as f64)], c))
                .collect(),
        };
        (video, meta(c, 3))
    }

    #[test]
    fn always_keep_model_keeps_all_candidates() {
        let (video, m) = filter_video(2);
        let mut model = DiscriminatorModel::init(5, 0);
        model.head_bias = [0.0, 10.0];
        model.head_weights = vec![0.0; 10];
        let survivors = filter_clips(&model, &video, Some(0), &[0, 1, 2, 3], &m).unwrap();
        assert_eq!(survivors, vec![0, 1, 2, 3]);
    }

    #[test]
    fn always_drop_model_falls_back_to_best_class1_logit() {
        let (video, m) = filter_video(2);
        let mut model = DiscriminatorModel::init(5, 0);
        model.head_bias = [10.0, 0.0];
        // Class-1 logit grows with the first feature entry, so clip 3 wins.
        model.head_weights = vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let survivors = filter_clips(&model, &video, Some(0), &[0, 1, 2, 3], &m).unwrap();
        assert_eq!(survivors, vec![3]);
    }

    #[test]
    fn transfer_gradient_matches_finite_differences() {
        let m = meta(3, 4);
        let head = LinearHead {
            weights: vec![
                vec![0.5, -0.2, 0.1, 0.3],
                vec![-0.4, 0.6, 0.2, -0.1],
                vec![0.1, 0.1, -0.5, 0.4],
            ],
            bias: vec![0.05, -0.02, 0.1],
        };
        let video = VideoRecord {
            video_id: "t".into(),
            label: 1,
            clips: vec![
                clip_with_feature(0, vec![0.4, -0.8, 1.2, 0.3], 3),
                clip_with_feature(1, vec![-0.5, 0.9, 0.2, -1.0], 3),
                clip_with_feature(2, vec![1.1, 0.0, -0.3, 0.6], 3),
            ],
        };
        let model = DiscriminatorModel::init(5, 9);
        let (_, analytic) = transfer_video_loss_grad(&model, &video, &head, &m).unwrap();

        let base = model.params();
        let eps = 1e-5;
        for i in 0..base.len() {
            let mut probe = model.clone();
            let mut p = base.clone();
            p[i] += eps;
            probe.set_params(&p);
            let (plus, _) = transfer_video_loss_grad(&probe, &video, &head, &m).unwrap();
            p[i] = base[i] - eps;
            probe.set_params(&p);
            let (minus, _) = transfer_video_loss_grad(&probe, &video, &head, &m).unwrap();
            let numeric = (plus - minus) / (2.0 * eps);
            let denom = analytic[i].abs().max(numeric.abs()).max(1e-8);
            assert!(
                (analytic[i] - numeric).abs() / denom <= 1e-5,
                "param {i}: analytic {} vs numeric {numeric}",
                analytic[i]
            );
        }
    }
}
