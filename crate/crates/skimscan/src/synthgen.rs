//! Seeded generator of synthetic untrimmed-video datasets with controllable
//! clip archetypes, so that every selection behavior is testable at desk
//! scale.
//!
//! Each clip belongs to one of four archetypes: confidently correct,
//! weakly-tilted uninformative, confidently misleading (toward a small
//! per-video palette of wrong classes), and pure noise. Features come from
//! per-(class, annotated) Gaussian clusters whose separation is explicit, so
//! learnability guarantees are constructive.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as RandDistribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{ClipRecord, CostParams, Dataset, DatasetMeta, LinearHead, VideoRecord};
use crate::error::{Error, Result};

/// Inclusive range of clips per video.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipRange {
    pub min: usize,
    pub max: usize,
}

/// Archetype mix; must sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchetypeMix {
    pub positive_confident: f64,
    pub positive_uninformative: f64,
    pub negative_misleading: f64,
    pub noise_uninformative: f64,
}

impl ArchetypeMix {
    fn as_array(&self) -> [f64; 4] {
        [
            self.positive_confident,
            self.positive_uninformative,
            self.negative_misleading,
            self.noise_uninformative,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Archetype {
    PositiveConfident,
    PositiveUninformative,
    NegativeMisleading,
    NoiseUninformative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub num_videos: usize,
    pub num_classes: usize,
    pub feature_dim: usize,
    pub clips_per_video: ClipRange,
    pub fractions: ArchetypeMix,
    /// Logit gap between the intended class and the runner-up for confident
    /// archetypes.
    pub confident_margin: f64,
    /// Stddev of the perturbation producing light logits from heavy ones.
    pub light_noise_sigma: f64,
    /// Gap between annotated and unannotated feature-cluster means, in units
    /// of the per-coordinate noise stddev.
    pub cluster_separation: f64,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::Config("need at least 2 classes".into()));
        }
        if self.feature_dim < 1 {
            return Err(Error::Config("need feature_dim >= 1".into()));
        }
        if self.num_videos == 0 {
            return Err(Error::Config("need at least one video".into()));
        }
        if self.clips_per_video.min < 1 || self.clips_per_video.min > self.clips_per_video.max {
            return Err(Error::Config("invalid clips-per-video range".into()));
        }
        let f = self.fractions.as_array();
        if f.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::Config("archetype fractions outside [0, 1]".into()));
        }
        if (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("archetype fractions must sum to 1".into()));
        }
        if !(self.confident_margin > 0.0)
            || self.light_noise_sigma < 0.0
            || !(self.cluster_separation > 0.0)
        {
            return Err(Error::Config(
                "margins and separations must be positive, noise nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Spread of per-class feature-cluster centers, per coordinate.
const CLASS_SPREAD: f64 = 1.2;
/// Per-class offsets of the UNANNOTATED cluster along the annotation
/// direction, spanning `+-` this fraction of the cluster separation.
/// Annotated clips sit at a class-independent position, so a label-blind
/// filter can find them, while rejecting the unannotated content of
/// high-offset classes requires the class conditioning.
const CLASS_OFFSET_SPAN: f64 = 0.5;
/// Misleading clips are confident toward the wrong class, but less so than
/// genuinely positive clips.
const MISLEADING_MARGIN_FACTOR: f64 = 0.6;
/// Annotated clips cluster tightly; unannotated content is more diffuse.
const ANNOTATED_SIGMA: f64 = 0.8;
const UNANNOTATED_SIGMA: f64 = 1.4;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

fn draw_archetype(rng: &mut ChaCha8Rng, fractions: &[f64; 4]) -> Archetype {
    let roll: f64 = rng.random_range(0.0..1.0);
    let mut acc = 0.0;
    for (i, &f) in fractions.iter().enumerate() {
        acc += f;
        if roll < acc {
            return match i {
                0 => Archetype::PositiveConfident,
                1 => Archetype::PositiveUninformative,
                2 => Archetype::NegativeMisleading,
                _ => Archetype::NoiseUninformative,
            };
        }
    }
    Archetype::NoiseUninformative
}

struct ClassStructure {
    /// Per-class feature-cluster centers.
    centers: Vec<Vec<f64>>,
    /// Per-class offsets of the annotated/unannotated boundary along the
    /// annotation direction.
    offsets: Vec<f64>,
    /// Unit annotation direction (constant across classes and seeds).
    direction: Vec<f64>,
}

fn class_structure(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> ClassStructure {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let c = cfg.num_classes;
    let d = cfg.feature_dim;
    let direction = vec![1.0 / (d as f64).sqrt(); d];
    // Centers are projected orthogonal to the annotation direction so class
    // identity and annotation status occupy independent subspaces.
    let centers: Vec<Vec<f64>> = (0..c)
        .map(|_| {
            let raw: Vec<f64> = (0..d).map(|_| CLASS_SPREAD * normal.sample(rng)).collect();
            let along: f64 = raw.iter().zip(&direction).map(|(x, u)| x * u).sum();
            raw.iter()
                .zip(&direction)
                .map(|(x, u)| x - along * u)
                .collect()
        })
        .collect();
    let span = CLASS_OFFSET_SPAN * cfg.cluster_separation;
    let mut offsets: Vec<f64> = (0..c)
        .map(|k| {
            if c == 1 {
                0.0
            } else {
                -span + 2.0 * span * k as f64 / (c - 1) as f64
            }
        })
        .collect();
    // Shuffle so class index and offset are uncorrelated.
    for i in (1..offsets.len()).rev() {
        offsets.swap(i, rng.random_range(0..=i));
    }
    ClassStructure {
        centers,
        offsets,
        direction,
    }
}

fn confident_logits(
    rng: &mut ChaCha8Rng,
    num_classes: usize,
    winner: usize,
    margin: f64,
) -> Vec<f64> {
    let normal = Normal::new(0.0, 0.5).unwrap();
    let mut logits: Vec<f64> = (0..num_classes).map(|_| normal.sample(rng)).collect();
    let runner_up = logits
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != winner)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    logits[winner] = runner_up + margin * (1.0 + 0.5 * rng.random_range(0.0..1.0));
    logits
}

fn flat_logits(rng: &mut ChaCha8Rng, num_classes: usize, sigma: f64, tilt: Option<usize>) -> Vec<f64> {
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut logits: Vec<f64> = (0..num_classes).map(|_| normal.sample(rng)).collect();
    if let Some(c) = tilt {
        // Weak enough that the argmax lands elsewhere most of the time.
        logits[c] += 1.2 * sigma;
    }
    logits
}

/// Generates a dataset from the config. Deterministic: the same config
/// always yields the same dataset, and videos draw from per-video derived
/// seeds so generation order is immaterial.
pub fn generate(cfg: &GeneratorConfig) -> Result<Dataset> {
    cfg.validate()?;
    let c = cfg.num_classes;
    let d = cfg.feature_dim;
    let mut master = ChaCha8Rng::seed_from_u64(splitmix64(cfg.seed));
    let structure = class_structure(cfg, &mut master);
    let fractions = cfg.fractions.as_array();
    let normal = Normal::new(0.0, 1.0).unwrap();

    let mut videos = Vec::with_capacity(cfg.num_videos);
    for v in 0..cfg.num_videos {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(cfg.seed ^ splitmix64(v as u64 + 1)));
        let label = rng.random_range(0..c);
        let clip_count = rng.random_range(cfg.clips_per_video.min..=cfg.clips_per_video.max);

        // Misleading clips concentrate on a small per-video palette of wrong
        // classes.
        let palette_size = rng.random_range(2..=3).min(c - 1);
        let palette: Vec<usize> = sample(&mut rng, c - 1, palette_size)
            .into_iter()
            .map(|k| if k >= label { k + 1 } else { k })
            .collect();

        let mut clips = Vec::with_capacity(clip_count);
        for index in 0..clip_count {
            let archetype = draw_archetype(&mut rng, &fractions);
            let annotated = matches!(
                archetype,
                Archetype::PositiveConfident | Archetype::PositiveUninformative
            );
            // Features come from the cluster of the clip's CONTENT class:
            // misleading clips genuinely look like the wrong class.
            let mut content_class = label;
            let heavy = match archetype {
                Archetype::PositiveConfident => {
                    confident_logits(&mut rng, c, label, cfg.confident_margin)
                }
                Archetype::PositiveUninformative => {
                    flat_logits(&mut rng, c, 0.1, Some(label))
                }
                Archetype::NegativeMisleading => {
                    content_class = palette[rng.random_range(0..palette.len())];
                    confident_logits(
                        &mut rng,
                        c,
                        content_class,
                        MISLEADING_MARGIN_FACTOR * cfg.confident_margin,
                    )
                }
                Archetype::NoiseUninformative => flat_logits(&mut rng, c, 0.2, None),
            };
            let light: Vec<f64> = heavy
                .iter()
                .map(|&x| x + cfg.light_noise_sigma * normal.sample(&mut rng))
                .collect();

            let (sigma, along) = if annotated {
                (ANNOTATED_SIGMA, 0.5 * cfg.cluster_separation)
            } else {
                (
                    UNANNOTATED_SIGMA,
                    structure.offsets[content_class] - 0.5 * cfg.cluster_separation,
                )
            };
            let feature: Vec<f64> = (0..d)
                .map(|j| {
                    structure.centers[content_class][j]
                        + along * structure.direction[j]
                        + sigma * normal.sample(&mut rng)
                })
                .collect();

            clips.push(ClipRecord {
                index,
                feature: Some(feature),
                light_logits: light,
                heavy_logits: Some(heavy),
                annotated: Some(annotated),
            });
        }
        videos.push(VideoRecord {
            video_id: format!("v{v:04}"),
            label,
            clips,
        });
    }

    // Gaussian Bayes classifier over the annotated clusters: with identity
    // covariance the optimal affine head is w_k = m_k, b_k = -|m_k|^2 / 2.
    let head = {
        let mut weights = Vec::with_capacity(c);
        let mut bias = Vec::with_capacity(c);
        let along = 0.5 * cfg.cluster_separation;
        for k in 0..c {
            let mean: Vec<f64> = (0..d)
                .map(|j| structure.centers[k][j] + along * structure.direction[j])
                .collect();
            bias.push(-0.5 * mean.iter().map(|m| m * m).sum::<f64>());
            weights.push(mean);
        }
        LinearHead { weights, bias }
    };

    Ok(Dataset {
        meta: DatasetMeta {
            num_classes: c,
            feature_dim: d,
            class_names: Some((0..c).map(|k| format!("class_{k:02}")).collect()),
            cost: CostParams {
                light_gflops_per_clip: 0.36,
                heavy_gflops_per_clip: 19.1,
                selection_gflops_per_video: 0.012,
            },
        },
        videos,
        head: Some(head),
    })
}

/// Named generator presets. Seeds default to zero; override through
/// [`generate_preset`].
pub fn presets() -> Vec<(&'static str, GeneratorConfig)> {
    let base = GeneratorConfig {
        seed: 0,
        num_videos: 40,
        num_classes: 10,
        feature_dim: 16,
        clips_per_video: ClipRange { min: 30, max: 80 },
        fractions: ArchetypeMix {
            positive_confident: 0.3,
            positive_uninformative: 0.3,
            negative_misleading: 0.25,
            noise_uninformative: 0.15,
        },
        confident_margin: 4.0,
        light_noise_sigma: 0.5,
        cluster_separation: 2.0,
    };
    vec![
        ("adversarial", base),
        (
            "separable",
            GeneratorConfig {
                num_videos: 60,
                clips_per_video: ClipRange { min: 20, max: 40 },
                fractions: ArchetypeMix {
                    positive_confident: 0.35,
                    positive_uninformative: 0.25,
                    negative_misleading: 0.25,
                    noise_uninformative: 0.15,
                },
                light_noise_sigma: 0.25,
                cluster_separation: 4.5,
                ..base
            },
        ),
        (
            "uniform_content",
            GeneratorConfig {
                num_videos: 30,
                clips_per_video: ClipRange { min: 20, max: 50 },
                fractions: ArchetypeMix {
                    positive_confident: 0.9,
                    positive_uninformative: 0.1,
                    negative_misleading: 0.0,
                    noise_uninformative: 0.0,
                },
                light_noise_sigma: 0.3,
                ..base
            },
        ),
        (
            "diverse_content",
            GeneratorConfig {
                num_videos: 30,
                clips_per_video: ClipRange { min: 20, max: 50 },
                fractions: ArchetypeMix {
                    positive_confident: 0.3,
                    positive_uninformative: 0.2,
                    negative_misleading: 0.35,
                    noise_uninformative: 0.15,
                },
                light_noise_sigma: 0.3,
                ..base
            },
        ),
        (
            "transfer",
            GeneratorConfig {
                clips_per_video: ClipRange { min: 20, max: 50 },
                fractions: ArchetypeMix {
                    positive_confident: 0.25,
                    positive_uninformative: 0.2,
                    negative_misleading: 0.4,
                    noise_uninformative: 0.15,
                },
                light_noise_sigma: 0.3,
                cluster_separation: 1.0,
                ..base
            },
        ),
    ]
}

/// Generates a named preset at the given seed. The `transfer` preset strips
/// annotation flags (its point is label-free finetuning) while keeping the
/// fitted linear head.
pub fn generate_preset(name: &str, seed: u64) -> Result<Dataset> {
    let mut cfg = presets()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, cfg)| cfg)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown preset {name:?}; available: {}",
                presets().iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
            ))
        })?;
    cfg.seed = seed;
    let mut ds = generate(&cfg)?;
    if name == "transfer" {
        for video in &mut ds.videos {
            for clip in &mut video.clips {
                clip.annotated = None;
            }
        }
    }
    Ok(ds)
}
