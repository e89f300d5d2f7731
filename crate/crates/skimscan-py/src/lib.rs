//! Python bindings: datasets, the class discriminator, the selection
//! pipeline, evaluation, and the divergence kernels, driven in-process.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use skimscan::bench;
use skimscan::dataset;
use skimscan::discriminator;
use skimscan::infotheory;
use skimscan::learning::SgdConfig;
use skimscan::selection::{
    self, DiscriminatorMode, DivergenceKind, EntropyScale, LogitSource, PipelineConfig,
};
use skimscan::synthgen;

fn err<T>(result: skimscan::Result<T>) -> PyResult<T> {
    result.map_err(|e| PyValueError::new_err(e.to_string()))
}

fn dist(probs: Vec<f64>) -> PyResult<infotheory::Distribution> {
    err(infotheory::Distribution::new(probs))
}

fn parse_metric(name: &str) -> PyResult<DivergenceKind> {
    match name {
        "js" => Ok(DivergenceKind::Js),
        "kl" => Ok(DivergenceKind::Kl),
        "w1" | "wasserstein1" => Ok(DivergenceKind::Wasserstein1),
        _ => Err(PyValueError::new_err(format!(
            "unknown metric {name:?}; expected js, kl, or w1"
        ))),
    }
}

fn parse_mode(name: &str) -> PyResult<DiscriminatorMode> {
    match name {
        "conditional" => Ok(DiscriminatorMode::Conditional),
        "plain" => Ok(DiscriminatorMode::Plain),
        "oracle" => Ok(DiscriminatorMode::Oracle),
        "none" => Ok(DiscriminatorMode::None),
        _ => Err(PyValueError::new_err(format!(
            "unknown discriminator mode {name:?}"
        ))),
    }
}

fn parse_source(name: &str) -> PyResult<LogitSource> {
    match name {
        "light" => Ok(LogitSource::Light),
        "heavy" => Ok(LogitSource::Heavy),
        "slim" | "slim_scan" => Ok(LogitSource::SlimScan),
        _ => Err(PyValueError::new_err(format!("unknown logit source {name:?}"))),
    }
}

/// A loaded or generated dataset of untrimmed videos.
#[pyclass]
struct Dataset {
    inner: dataset::Dataset,
}

#[pymethods]
impl Dataset {
    /// Generate a named synthetic preset ("adversarial", "separable",
    /// "uniform_content", "diverse_content", "transfer").
    #[staticmethod]
    #[pyo3(signature = (name, seed=0))]
    fn generate_preset(name: &str, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: err(synthgen::generate_preset(name, seed))?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: err(skimscan::io::parse_dataset(&path))?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        err(skimscan::io::serialize_dataset(&self.inner, &path))
    }

    /// Invariant violations, one description per problem; empty when clean.
    fn validate(&self) -> Vec<String> {
        dataset::validate_dataset(&self.inner)
    }

    #[getter]
    fn num_videos(&self) -> usize {
        self.inner.videos.len()
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.inner.meta.num_classes
    }

    #[getter]
    fn feature_dim(&self) -> usize {
        self.inner.meta.feature_dim
    }

    #[getter]
    fn total_clips(&self) -> usize {
        self.inner.total_clips()
    }

    fn labels(&self) -> Vec<usize> {
        self.inner.videos.iter().map(|v| v.label).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(videos={}, classes={}, clips={})",
            self.inner.videos.len(),
            self.inner.meta.num_classes,
            self.inner.total_clips()
        )
    }
}

/// The trained class discriminator.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Discriminator {
    inner: discriminator::DiscriminatorModel,
}

#[pymethods]
impl Discriminator {
    /// Train on annotated clips; returns the model and a report dict with
    /// binary_accuracy / positive_drop_rate / negative_drop_rate.
    #[staticmethod]
    #[pyo3(signature = (ds, lr=0.005, epochs=4, batch_size=8, seed=0, pool_width=None))]
    fn train(
        py: Python<'_>,
        ds: &Dataset,
        lr: f64,
        epochs: usize,
        batch_size: usize,
        seed: u64,
        pool_width: Option<usize>,
    ) -> PyResult<(Self, Py<PyDict>)> {
        let cfg = SgdConfig {
            learning_rate: lr,
            epochs,
            batch_size,
            seed,
        };
        let pool = pool_width.unwrap_or_else(|| {
            discriminator::DiscriminatorModel::default_pool_width(&ds.inner.meta)
        });
        let (model, report) = err(discriminator::train_supervised_with_pool(
            &ds.inner, &cfg, pool,
        ))?;
        let dict = PyDict::new(py);
        dict.set_item("binary_accuracy", report.binary_accuracy)?;
        dict.set_item("positive_drop_rate", report.positive_drop_rate)?;
        dict.set_item("negative_drop_rate", report.negative_drop_rate)?;
        Ok((Self { inner: model }, dict.into()))
    }

    /// Label-free transfer finetuning against the dataset's linear head;
    /// returns the finetuned model and the per-epoch loss trace.
    #[pyo3(signature = (ds, lr=0.001, epochs=80, seed=0))]
    fn finetune(
        &self,
        ds: &Dataset,
        lr: f64,
        epochs: usize,
        seed: u64,
    ) -> PyResult<(Self, Vec<f64>)> {
        let head = ds.inner.head.clone().ok_or_else(|| {
            PyValueError::new_err("transfer finetuning needs a linear head in the dataset")
        })?;
        let cfg = SgdConfig {
            learning_rate: lr,
            epochs,
            batch_size: 1,
            seed,
        };
        let (model, trace) = err(discriminator::transfer_finetune(
            self.inner.clone(),
            &ds.inner,
            &head,
            &cfg,
        ))?;
        Ok((Self { inner: model }, trace))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: err(skimscan::io::load_model(&path))?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        err(skimscan::io::save_model(&self.inner, &path))
    }

    #[getter]
    fn pool_width(&self) -> usize {
        self.inner.pool_width
    }
}

/// Per-video selection outcomes from one pipeline run.
#[pyclass]
struct SelectionRun {
    results: Vec<dataset::SelectionResult>,
}

#[pymethods]
impl SelectionRun {
    fn __len__(&self) -> usize {
        self.results.len()
    }

    fn video_ids(&self) -> Vec<String> {
        self.results.iter().map(|r| r.video_id.clone()).collect()
    }

    fn selected(&self, index: usize) -> PyResult<Vec<usize>> {
        self.results
            .get(index)
            .map(|r| r.selected.clone())
            .ok_or_else(|| PyValueError::new_err("result index out of range"))
    }

    fn predicted_labels(&self) -> Vec<usize> {
        self.results.iter().map(|r| r.predicted_label).collect()
    }

    fn mean_selected(&self) -> f64 {
        self.results.iter().map(|r| r.selected.len() as f64).sum::<f64>()
            / self.results.len().max(1) as f64
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        err(skimscan::io::save_results(&self.results, &path))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            results: err(skimscan::io::load_results(&path))?,
        })
    }
}

/// Run the skim-scan pipeline over every video.
#[pyfunction]
#[pyo3(signature = (
    ds,
    model=None,
    entropy_q=0.6,
    scan_threshold=0.5,
    metric="js",
    budget=None,
    mode=None,
    source="light",
    use_entropy=true,
    use_scan=true,
))]
#[allow(clippy::too_many_arguments)]
fn select(
    ds: &Dataset,
    model: Option<&Discriminator>,
    entropy_q: f64,
    scan_threshold: f64,
    metric: &str,
    budget: Option<usize>,
    mode: Option<&str>,
    source: &str,
    use_entropy: bool,
    use_scan: bool,
) -> PyResult<SelectionRun> {
    let source = parse_source(source)?;
    let mode = match mode {
        Some(m) => parse_mode(m)?,
        None if model.is_some() => DiscriminatorMode::Conditional,
        None => DiscriminatorMode::None,
    };
    let mut cfg = PipelineConfig::default();
    cfg.skim.entropy_threshold = err(selection::calibrate_entropy_threshold(
        &ds.inner,
        entropy_q,
        EntropyScale::Normalized,
        source,
    ))?;
    cfg.skim.calibration_quantile = Some(entropy_q);
    cfg.scan.divergence = parse_metric(metric)?;
    cfg.scan.stop_threshold = scan_threshold;
    cfg.scan.budget_cap = budget;
    cfg.use_entropy = use_entropy;
    cfg.use_scan = use_scan;
    cfg.discriminator_mode = mode;
    cfg.use_discriminator = !matches!(mode, DiscriminatorMode::None);
    cfg.logit_source = source;

    let results = ds
        .inner
        .videos
        .iter()
        .map(|v| selection::run_pipeline(v, &cfg, model.map(|m| &m.inner), &ds.inner.meta))
        .collect::<skimscan::Result<Vec<_>>>();
    Ok(SelectionRun {
        results: err(results)?,
    })
}

/// Run a baseline strategy ("dense", "random", "uniform", "top_confidence").
#[pyfunction]
#[pyo3(signature = (ds, strategy, n=None, seed=0))]
fn run_baseline(ds: &Dataset, strategy: &str, n: Option<usize>, seed: u64) -> PyResult<SelectionRun> {
    let kind = match strategy {
        "dense" => bench::StrategyKind::Dense,
        "random" => bench::StrategyKind::RandomN,
        "uniform" => bench::StrategyKind::UniformN,
        "top_confidence" => bench::StrategyKind::TopConfidenceN,
        _ => {
            return Err(PyValueError::new_err(format!(
                "unknown baseline {strategy:?}"
            )))
        }
    };
    let spec = bench::StrategySpec::baseline(kind, n, seed);
    Ok(SelectionRun {
        results: err(bench::run_strategy(&ds.inner, &spec, None))?,
    })
}

/// Score a selection run: accuracy, mAP, mean clips, mean GFLOPs.
#[pyfunction]
fn evaluate(py: Python<'_>, ds: &Dataset, run: &SelectionRun) -> PyResult<Py<PyDict>> {
    let report = err(bench::evaluate(&ds.inner, &run.results))?;
    let dict = PyDict::new(py);
    dict.set_item("accuracy", report.accuracy)?;
    dict.set_item("map", report.map)?;
    dict.set_item("mean_clips", report.mean_clips)?;
    dict.set_item("mean_backbone_gflops", report.mean_backbone_gflops)?;
    dict.set_item("mean_selection_gflops", report.mean_selection_gflops)?;
    dict.set_item("per_class_accuracy", report.per_class_accuracy)?;
    dict.set_item("per_class_mean_clips", report.per_class_mean_clips)?;
    Ok(dict.into())
}

#[pyfunction]
fn softmax(logits: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(err(infotheory::softmax(&logits))?.probs().to_vec())
}

#[pyfunction]
fn entropy(probs: Vec<f64>) -> PyResult<f64> {
    Ok(infotheory::entropy(&dist(probs)?))
}

#[pyfunction]
fn normalized_entropy(probs: Vec<f64>) -> PyResult<f64> {
    Ok(infotheory::normalized_entropy(&dist(probs)?))
}

#[pyfunction]
fn kl_divergence(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    Ok(infotheory::kl_divergence(&dist(p)?, &dist(q)?))
}

#[pyfunction]
fn js_divergence(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    Ok(infotheory::js_divergence(&dist(p)?, &dist(q)?))
}

#[pyfunction]
fn wasserstein1(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    Ok(infotheory::wasserstein1(&dist(p)?, &dist(q)?))
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    synthgen::presets().into_iter().map(|(n, _)| n).collect()
}

#[pymodule]
fn skimscan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<Discriminator>()?;
    m.add_class::<SelectionRun>()?;
    m.add_function(wrap_pyfunction!(select, m)?)?;
    m.add_function(wrap_pyfunction!(run_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(softmax, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(kl_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(js_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(wasserstein1, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    Ok(())
}
