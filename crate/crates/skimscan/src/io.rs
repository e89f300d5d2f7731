//! Line-oriented text serialization for datasets, discriminator models, and
//! selection results, plus CSV report writing.
//!
//! A dataset file is UTF-8 JSON lines: the first line holds the meta header
//! (`num_classes`, `feature_dim`, `cost{light,heavy,selection}`, optional
//! `class_names`, optional `head{weights,bias}` with row-major weights), and
//! each following line holds one video. Floats use the shortest decimal text
//! that round-trips exactly, so parse(serialize(ds)) reproduces the dataset
//! bit for bit. The full grammar lives in FORMATS.md.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{CostParams, Dataset, DatasetMeta, LinearHead, SelectionResult, VideoRecord};
use crate::discriminator::DiscriminatorModel;
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct CostLine {
    light: f64,
    heavy: f64,
    selection: f64,
}

#[derive(Serialize, Deserialize)]
struct HeadLine {
    /// C x D, row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    num_classes: usize,
    feature_dim: usize,
    cost: CostLine,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    head: Option<HeadLine>,
}

pub fn serialize_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    let header = HeaderLine {
        num_classes: ds.meta.num_classes,
        feature_dim: ds.meta.feature_dim,
        cost: CostLine {
            light: ds.meta.cost.light_gflops_per_clip,
            heavy: ds.meta.cost.heavy_gflops_per_clip,
            selection: ds.meta.cost.selection_gflops_per_video,
        },
        class_names: ds.meta.class_names.clone(),
        head: ds.head.as_ref().map(|h| HeadLine {
            weights: h.weights.iter().flatten().copied().collect(),
            bias: h.bias.clone(),
        }),
    };
    writeln!(out, "{}", serde_json::to_string(&header).expect("serializable header"))?;
    for video in &ds.videos {
        writeln!(out, "{}", serde_json::to_string(video).expect("serializable video"))?;
    }
    out.flush()?;
    Ok(())
}

pub fn parse_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let (_, header_line) = lines.next().ok_or(Error::Parse {
        line: 1,
        reason: "empty file, expected a meta header".into(),
    })?;
    let header_line = header_line?;
    let header: HeaderLine = serde_json::from_str(&header_line).map_err(|e| Error::Parse {
        line: 1,
        reason: format!("bad meta header: {e}"),
    })?;

    let c = header.num_classes;
    let d = header.feature_dim;
    if c < 2 || d < 1 {
        return Err(Error::Schema(format!(
            "header: num_classes {c} and feature_dim {d} must be >= 2 and >= 1"
        )));
    }
    if let Some(names) = &header.class_names {
        if names.len() != c {
            return Err(Error::Schema(format!(
                "header: {} class names for {c} classes",
                names.len()
            )));
        }
    }
    let head = match header.head {
        None => None,
        Some(h) => {
            if h.weights.len() != c * d || h.bias.len() != c {
                return Err(Error::Schema(format!(
                    "header: head has {} weights and {} biases, expected {} and {c}",
                    h.weights.len(),
                    h.bias.len(),
                    c * d
                )));
            }
            Some(LinearHead {
                weights: h.weights.chunks(d).map(|row| row.to_vec()).collect(),
                bias: h.bias,
            })
        }
    };

    let mut videos = Vec::new();
    let mut last_complete = 1usize;
    for (zero_based, line) in lines {
        let line_no = zero_based + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let video: VideoRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            reason: format!("{e} (last complete line: {last_complete})"),
        })?;
        for clip in &video.clips {
            let at = format!("video {} clip {}", video.video_id, clip.index);
            if clip.light_logits.len() != c {
                return Err(Error::Schema(format!(
                    "{at}: light_logits length {} != num_classes {c}",
                    clip.light_logits.len()
                )));
            }
            if let Some(heavy) = &clip.heavy_logits {
                if heavy.len() != c {
                    return Err(Error::Schema(format!(
                        "{at}: heavy_logits length {} != num_classes {c}",
                        heavy.len()
                    )));
                }
            }
            if let Some(feature) = &clip.feature {
                if feature.len() != d {
                    return Err(Error::Schema(format!(
                        "{at}: feature length {} != feature_dim {d}",
                        feature.len()
                    )));
                }
            }
        }
        videos.push(video);
        last_complete = line_no;
    }

    Ok(Dataset {
        meta: DatasetMeta {
            num_classes: c,
            feature_dim: d,
            class_names: header.class_names,
            cost: CostParams {
                light_gflops_per_clip: header.cost.light,
                heavy_gflops_per_clip: header.cost.heavy,
                selection_gflops_per_video: header.cost.selection,
            },
        },
        videos,
        head,
    })
}

/// Model file: one JSON array of reals in the order
/// `[scale, shift, pool_width, head row-major (2 x pool_width), bias0, bias1]`.
pub fn save_model(model: &DiscriminatorModel, path: &Path) -> Result<()> {
    let mut flat = vec![model.scale, model.shift, model.pool_width as f64];
    flat.extend_from_slice(&model.head_weights);
    flat.extend_from_slice(&model.head_bias);
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", serde_json::to_string(&flat).expect("serializable model"))?;
    out.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<DiscriminatorModel> {
    let text = std::fs::read_to_string(path)?;
    let flat: Vec<f64> = serde_json::from_str(text.trim()).map_err(|e| Error::Parse {
        line: 1,
        reason: format!("bad model file: {e}"),
    })?;
    if flat.len() < 7 || (flat.len() - 5) % 2 != 0 {
        return Err(Error::Schema(format!(
            "model file holds {} values, expected 5 + 2 * pool_width",
            flat.len()
        )));
    }
    let pool_width = (flat.len() - 5) / 2;
    if flat[2] != pool_width as f64 {
        return Err(Error::Schema(format!(
            "model file declares pool_width {} but holds {pool_width} head columns",
            flat[2]
        )));
    }
    Ok(DiscriminatorModel {
        scale: flat[0],
        shift: flat[1],
        pool_width,
        head_weights: flat[3..3 + 2 * pool_width].to_vec(),
        head_bias: [flat[3 + 2 * pool_width], flat[4 + 2 * pool_width]],
    })
}

/// Results file: one JSON object per line, one line per video.
pub fn save_results(results: &[SelectionResult], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for r in results {
        writeln!(out, "{}", serde_json::to_string(r).expect("serializable result"))?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_results(path: &Path) -> Result<Vec<SelectionResult>> {
    let reader = BufReader::new(File::open(path)?);
    let mut results = Vec::new();
    for (zero_based, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        results.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: zero_based + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(results)
}

/// Shortest exact decimal text for a float; locale-independent.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes a CSV with the given header row. Fields are written verbatim, so
/// callers must not embed commas.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}
