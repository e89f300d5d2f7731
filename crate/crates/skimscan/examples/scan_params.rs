// Scratch parameter scan; not part of the deliverable surface.
use skimscan::bench::{evaluate, run_strategy, StrategyKind, StrategySpec};
use skimscan::dataset::Dataset;
use skimscan::discriminator::train_supervised;
use skimscan::learning::SgdConfig;
use skimscan::selection::{
    calibrate_entropy_threshold, run_pipeline, DiscriminatorMode, EntropyScale, LogitSource,
    PipelineConfig,
};
use skimscan::synthgen::{generate, presets, GeneratorConfig};

fn dense_cd(ds: &Dataset, mode: DiscriminatorMode, model: &skimscan::discriminator::DiscriminatorModel) -> (f64, f64) {
    let mut cfg = PipelineConfig::default();
    cfg.skim.entropy_threshold =
        calibrate_entropy_threshold(ds, 0.6, EntropyScale::Normalized, LogitSource::Light).unwrap();
    cfg.use_entropy = false;
    cfg.use_scan = false;
    cfg.discriminator_mode = mode;
    cfg.use_discriminator = !matches!(mode, DiscriminatorMode::None);
    let results: Vec<_> = ds
        .videos
        .iter()
        .map(|v| run_pipeline(v, &cfg, Some(model), &ds.meta).unwrap())
        .collect();
    let r = evaluate(ds, &results).unwrap();
    (r.accuracy, r.mean_clips)
}

fn full_and_stages(ds: &Dataset, model: &skimscan::discriminator::DiscriminatorModel) -> Vec<(String, f64, f64)> {
    let mut base = PipelineConfig::default();
    base.skim.entropy_threshold =
        calibrate_entropy_threshold(ds, 0.6, EntropyScale::Normalized, LogitSource::Light).unwrap();
    skimscan::bench::ablation_matrix(ds, &base, Some(model))
        .unwrap()
        .into_iter()
        .map(|(n, r)| (n, r.accuracy, r.mean_clips))
        .collect()
}

fn main() {
    let base_cfg = presets()[0].1;
    for seed in [5u64, 6, 7, 8] {
        for sep in [1.5, 2.0, 2.5, 3.0] {
            let cfg = GeneratorConfig {
                seed,
                cluster_separation: sep,
                ..base_cfg
            };
            let ds = generate(&cfg).unwrap();
            let sgd = SgdConfig {
                learning_rate: 0.005,
                epochs: 16,
                batch_size: 4,
                seed: 0,
            };
            let (model, rep) = train_supervised(&ds, &sgd).unwrap();
            let (acc_d, clips_d) = {
                let spec = StrategySpec::baseline(StrategyKind::Dense, None, 0);
                let r = evaluate(&ds, &run_strategy(&ds, &spec, None).unwrap()).unwrap();
                (r.accuracy, r.mean_clips)
            };
            let (acc_p, clips_p) = dense_cd(&ds, DiscriminatorMode::Plain, &model);
            let (acc_c, clips_c) = dense_cd(&ds, DiscriminatorMode::Conditional, &model);
            let (acc_o, clips_o) = dense_cd(&ds, DiscriminatorMode::Oracle, &model);
            let acc_ok = acc_o >= acc_c && acc_c >= acc_p && acc_p >= acc_d;
            let clips_ok = clips_o <= clips_c && clips_c <= clips_p && clips_p <= clips_d;
            println!(
                "seed {seed} sep {sep}: cd_acc {:.3} pos_drop {:.3} neg_drop {:.3} | dense {:.3}/{:.1} plain {:.3}/{:.1} cond {:.3}/{:.1} oracle {:.3}/{:.1} | acc_ok {acc_ok} clips_ok {clips_ok}",
                rep.binary_accuracy, rep.positive_drop_rate, rep.negative_drop_rate,
                acc_d, clips_d, acc_p, clips_p, acc_c, clips_c, acc_o, clips_o
            );
            if seed == 7 {
                for (n, a, c) in full_and_stages(&ds, &model) {
                    println!("    {n:<14} acc {a:.3} clips {c:.2}");
                }
            }
        }
    }
}
