//! Numeric kernels over categorical distributions: softmax, entropy, KL, JS,
//! and 1-D Wasserstein distance.
//!
//! All logarithms are natural, so entropy is bounded by `ln C` and the JS
//! divergence by `ln 2`. The `0 * ln 0 = 0` convention applies throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sum-to-one invariant of a [`Distribution`].
pub const PROB_SUM_TOL: f64 = 1e-9;

/// A probability vector over `C` classes.
///
/// Entries lie in `[0, 1]` and sum to one within [`PROB_SUM_TOL`]. The only
/// way to obtain one is through [`Distribution::new`] (or deserialization,
/// which routes through it), so every value in circulation is valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidInput("empty probability vector".into()));
        }
        let mut sum = 0.0;
        for (k, &p) in probs.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInput(format!(
                    "probability {p} at index {k} outside [0, 1]"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Uniform distribution over `num_classes`.
    pub fn uniform(num_classes: usize) -> Self {
        Self {
            probs: vec![1.0 / num_classes as f64; num_classes],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

/// Index of the largest value, ties broken toward the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    assert!(!values.is_empty(), "argmax of empty slice");
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Index of the smallest value, ties broken toward the lowest index.
pub fn argmin(values: &[f64]) -> usize {
    assert!(!values.is_empty(), "argmin of empty slice");
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Max-shifted softmax. Stable for logits of any finite magnitude.
pub fn softmax(logits: &[f64]) -> Result<Distribution> {
    if logits.is_empty() {
        return Err(Error::InvalidInput("softmax of empty logit vector".into()));
    }
    if let Some(&bad) = logits.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "softmax requires finite logits, got {bad}"
        )));
    }
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    Ok(Distribution {
        probs: exps.iter().map(|&e| e / z).collect(),
    })
}

/// Shannon entropy in nats. Zero-probability terms contribute zero.
pub fn entropy(p: &Distribution) -> f64 {
    p.probs
        .iter()
        .map(|&x| if x > 0.0 { -x * x.ln() } else { 0.0 })
        .sum()
}

/// Entropy divided by its maximum `ln C`, mapping to `[0, 1]`.
pub fn normalized_entropy(p: &Distribution) -> f64 {
    if p.len() < 2 {
        return 0.0;
    }
    entropy(p) / (p.len() as f64).ln()
}

/// `KL(p || q) = sum_k p_k ln(p_k / q_k)`.
///
/// Terms with `p_k = 0` contribute zero; `q_k = 0` with `p_k > 0` yields
/// `+inf`. Softmax outputs never contain exact zeros, so the infinity arises
/// only from hand-constructed inputs.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> f64 {
    assert_eq!(p.len(), q.len(), "KL requires equal support sizes");
    let mut acc = 0.0;
    for (&pk, &qk) in p.probs.iter().zip(&q.probs) {
        if pk == 0.0 {
            continue;
        }
        if qk == 0.0 {
            return f64::INFINITY;
        }
        acc += pk * (pk / qk).ln();
    }
    acc
}

/// Jensen-Shannon divergence, `0.5 KL(p||m) + 0.5 KL(q||m)` with
/// `m = (p + q) / 2`. Always finite and exactly symmetric: the mixture and
/// the two half-terms are commutative floating-point sums, so swapping the
/// arguments reproduces the same bit pattern.
pub fn js_divergence(p: &Distribution, q: &Distribution) -> f64 {
    assert_eq!(p.len(), q.len(), "JS requires equal support sizes");
    let mut half_p = 0.0;
    let mut half_q = 0.0;
    for (&pk, &qk) in p.probs.iter().zip(&q.probs) {
        let mk = (pk + qk) / 2.0;
        if pk > 0.0 {
            half_p += pk * (pk / mk).ln();
        }
        if qk > 0.0 {
            half_q += qk * (qk / mk).ln();
        }
    }
    0.5 * half_p + 0.5 * half_q
}

/// 1-D Wasserstein distance with ground metric `|i - j|` over class indices:
/// the sum of absolute CDF differences.
pub fn wasserstein1(p: &Distribution, q: &Distribution) -> f64 {
    assert_eq!(p.len(), q.len(), "Wasserstein requires equal support sizes");
    let cdf = |d: &Distribution| -> Vec<f64> {
        d.probs
            .iter()
            .scan(0.0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    };
    let cdf_p = cdf(p);
    let cdf_q = cdf(q);
    // The last index is skipped: both CDFs reach 1 there.
    cdf_p
        .iter()
        .zip(&cdf_q)
        .take(p.len() - 1)
        .map(|(a, b)| (a - b).abs())
        .sum()
}
