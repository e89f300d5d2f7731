//! Minimal differentiable machinery: cross-entropy / distillation losses,
//! plain SGD over affine pipelines, and finite-difference gradient checking.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::LinearHead;
use crate::error::{Error, Result};
use crate::infotheory::{kl_divergence, softmax};

/// Weights of the distillation objective: `CE + alpha * T^2 * KL`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistillConfig {
    pub alpha: f64,
    pub temperature: f64,
}

impl DistillConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) || self.alpha < 0.0 {
            return Err(Error::Config(format!(
                "distillation needs temperature > 0 and alpha >= 0, got T={}, alpha={}",
                self.temperature, self.alpha
            )));
        }
        Ok(())
    }
}

/// Plain SGD hyperparameters. The seed fixes the shuffling order, making
/// training a pure function of (model, data, config).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "SGD needs learning_rate >= 0, epochs >= 1, batch_size >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A model with a flat parameter vector, a forward map to logits, and an
/// analytic pullback from logit gradients to parameter gradients.
pub trait GradModel {
    fn forward(&self, input: &[f64]) -> Vec<f64>;
    fn params(&self) -> Vec<f64>;
    fn set_params(&mut self, params: &[f64]);
    /// `d loss / d params` at `input`, given `d loss / d logits`.
    fn backward(&self, input: &[f64], grad_logits: &[f64]) -> Vec<f64>;
}

impl GradModel for LinearHead {
    fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.apply(input)
    }

    fn params(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.weights.iter().flatten().copied().collect();
        p.extend_from_slice(&self.bias);
        p
    }

    fn set_params(&mut self, params: &[f64]) {
        let d = self.weights[0].len();
        let c = self.bias.len();
        assert_eq!(params.len(), c * d + c, "parameter count mismatch");
        for (k, row) in self.weights.iter_mut().enumerate() {
            row.copy_from_slice(&params[k * d..(k + 1) * d]);
        }
        self.bias.copy_from_slice(&params[c * d..]);
    }

    fn backward(&self, input: &[f64], grad_logits: &[f64]) -> Vec<f64> {
        let d = self.weights[0].len();
        let c = self.bias.len();
        let mut grad = vec![0.0; c * d + c];
        for (k, &g) in grad_logits.iter().enumerate() {
            for (j, &x) in input.iter().enumerate() {
                grad[k * d + j] = g * x;
            }
            grad[c * d + k] = g;
        }
        grad
    }
}

/// One training example: input vector, target class, and the teacher's
/// logits when the distillation loss is in use.
#[derive(Debug, Clone)]
pub struct Sample {
    pub input: Vec<f64>,
    pub target: usize,
    pub teacher_logits: Option<Vec<f64>>,
}

impl Sample {
    pub fn new(input: Vec<f64>, target: usize) -> Self {
        Self {
            input,
            target,
            teacher_logits: None,
        }
    }
}

/// Which loss the trainer applies to each example's logits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss {
    CrossEntropy,
    BinaryCrossEntropy,
    Distill(DistillConfig),
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + logits.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// `-ln softmax(logits)[target]`, computed in log space.
pub fn cross_entropy(logits: &[f64], target: usize) -> f64 {
    assert!(target < logits.len(), "target class out of range");
    log_sum_exp(logits) - logits[target]
}

/// Cross-entropy over exactly two classes.
pub fn binary_cross_entropy(logits: &[f64], target: usize) -> f64 {
    assert_eq!(logits.len(), 2, "binary cross-entropy expects 2 logits");
    assert!(target <= 1, "binary target must be 0 or 1");
    cross_entropy(logits, target)
}

/// Distillation loss: cross-entropy on the hard target plus
/// `alpha * T^2 * KL(softmax(teacher / T) || softmax(student / T))`.
///
/// With `alpha = 0` this returns the cross-entropy term bitwise, without
/// evaluating the KL term.
pub fn distill_loss(
    student_logits: &[f64],
    teacher_logits: &[f64],
    target: usize,
    cfg: &DistillConfig,
) -> f64 {
    let ce = cross_entropy(student_logits, target);
    if cfg.alpha == 0.0 {
        return ce;
    }
    let t = cfg.temperature;
    let teacher: Vec<f64> = teacher_logits.iter().map(|&x| x / t).collect();
    let student: Vec<f64> = student_logits.iter().map(|&x| x / t).collect();
    let kl = kl_divergence(
        &softmax(&teacher).expect("finite teacher logits"),
        &softmax(&student).expect("finite student logits"),
    );
    ce + cfg.alpha * t * t * kl
}

/// Loss value and its gradient with respect to the logits.
///
/// Non-finite logits yield a NaN loss and zero gradient so that the training
/// loop can surface a diverged-training error instead of panicking.
pub fn loss_and_grad(loss: &Loss, logits: &[f64], sample: &Sample) -> (f64, Vec<f64>) {
    if logits.iter().any(|v| !v.is_finite()) {
        return (f64::NAN, vec![0.0; logits.len()]);
    }
    match loss {
        Loss::CrossEntropy | Loss::BinaryCrossEntropy => {
            if matches!(loss, Loss::BinaryCrossEntropy) {
                assert_eq!(logits.len(), 2, "binary cross-entropy expects 2 logits");
            }
            let value = cross_entropy(logits, sample.target);
            let probs = softmax(logits).expect("finite logits");
            let mut grad: Vec<f64> = probs.probs().to_vec();
            grad[sample.target] -= 1.0;
            (value, grad)
        }
        Loss::Distill(cfg) => {
            let teacher = sample
                .teacher_logits
                .as_deref()
                .expect("distillation sample needs teacher logits");
            let value = distill_loss(logits, teacher, sample.target, cfg);
            let probs = softmax(logits).expect("finite logits");
            let mut grad: Vec<f64> = probs.probs().to_vec();
            grad[sample.target] -= 1.0;
            if cfg.alpha > 0.0 {
                let t = cfg.temperature;
                let teacher_t: Vec<f64> = teacher.iter().map(|&x| x / t).collect();
                let student_t: Vec<f64> = logits.iter().map(|&x| x / t).collect();
                let pt = softmax(&teacher_t).expect("finite teacher logits");
                let ps = softmax(&student_t).expect("finite logits");
                for ((g, &ptk), &psk) in grad.iter_mut().zip(pt.probs()).zip(ps.probs()) {
                    *g += cfg.alpha * t * (psk - ptk);
                }
            }
            (value, grad)
        }
    }
}

/// Trains the model with plain SGD (no momentum, no weight decay) and returns
/// it along with the per-epoch mean loss trace.
///
/// Batch gradients are means over the batch; the last partial batch is kept.
/// A non-finite loss aborts with a diverged-training error naming the epoch
/// and batch.
pub fn sgd_train<M: GradModel>(
    mut model: M,
    data: &[Sample],
    loss: &Loss,
    cfg: &SgdConfig,
) -> Result<(M, Vec<f64>)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidInput("sgd_train requires nonempty data".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for (batch_no, batch) in order.chunks(cfg.batch_size).enumerate() {
            let mut params = model.params();
            let mut grad_acc = vec![0.0; params.len()];
            let mut batch_loss = 0.0;
            for &i in batch {
                let sample = &data[i];
                let logits = model.forward(&sample.input);
                let (value, grad_logits) = loss_and_grad(loss, &logits, sample);
                batch_loss += value;
                let grad = model.backward(&sample.input, &grad_logits);
                for (acc, g) in grad_acc.iter_mut().zip(&grad) {
                    *acc += g;
                }
            }
            if !batch_loss.is_finite() {
                return Err(Error::DivergedTraining {
                    epoch,
                    batch: batch_no,
                    loss: batch_loss,
                });
            }
            epoch_loss += batch_loss;
            let scale = cfg.learning_rate / batch.len() as f64;
            for (p, g) in params.iter_mut().zip(&grad_acc) {
                *p -= scale * g;
            }
            model.set_params(&params);
        }
        trace.push(epoch_loss / data.len() as f64);
    }
    Ok((model, trace))
}

/// Compares analytic parameter gradients against central finite differences
/// and returns the maximum relative error, with denominator
/// `max(|analytic|, |numeric|, 1e-8)`.
pub fn grad_check<M: GradModel + Clone>(
    model: &M,
    sample: &Sample,
    loss: &Loss,
    epsilon: f64,
) -> f64 {
    assert!(
        (1e-7..=1e-3).contains(&epsilon),
        "epsilon must lie in [1e-7, 1e-3]"
    );
    let logits = model.forward(&sample.input);
    let (_, grad_logits) = loss_and_grad(loss, &logits, sample);
    let analytic = model.backward(&sample.input, &grad_logits);

    let base = model.params();
    let mut probe = model.clone();
    let mut worst = 0.0_f64;
    for i in 0..base.len() {
        let mut params = base.clone();
        params[i] = base[i] + epsilon;
        probe.set_params(&params);
        let (plus, _) = loss_and_grad(loss, &probe.forward(&sample.input), sample);
        params[i] = base[i] - epsilon;
        probe.set_params(&params);
        let (minus, _) = loss_and_grad(loss, &probe.forward(&sample.input), sample);
        let numeric = (plus - minus) / (2.0 * epsilon);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}
