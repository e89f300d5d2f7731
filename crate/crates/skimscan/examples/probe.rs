// Scratch probe for preset behavior; not part of the deliverable surface.
use skimscan::bench::{
    ablation_matrix, evaluate, metric_comparison, run_strategy, StrategyKind, StrategySpec,
};
use skimscan::dataset::Dataset;
use skimscan::discriminator::{train_supervised, transfer_finetune};
use skimscan::learning::SgdConfig;
use skimscan::selection::{
    calibrate_entropy_threshold, run_pipeline, DiscriminatorMode, EntropyScale, LogitSource,
    PipelineConfig,
};
use skimscan::synthgen::generate_preset;

fn pipeline_for(ds: &Dataset, mode: DiscriminatorMode, q: f64, js: f64) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.skim.entropy_threshold =
        calibrate_entropy_threshold(ds, q, EntropyScale::Normalized, LogitSource::Light).unwrap();
    cfg.scan.stop_threshold = js;
    cfg.discriminator_mode = mode;
    cfg.use_discriminator = !matches!(mode, DiscriminatorMode::None);
    cfg
}

fn main() {
    // --- criterion 5: separable training ---
    let sep = generate_preset("separable", 7).unwrap();
    let cfg = SgdConfig {
        learning_rate: 0.005,
        epochs: 4,
        batch_size: 8,
        seed: 0,
    };
    let (model, report) = train_supervised(&sep, &cfg).unwrap();
    println!(
        "separable: acc {:.4} pos_drop {:.4} neg_drop {:.4}",
        report.binary_accuracy, report.positive_drop_rate, report.negative_drop_rate
    );

    // --- adversarial preset ---
    let adv = generate_preset("adversarial", 7).unwrap();
    let adv_cfg = SgdConfig {
        learning_rate: 0.005,
        epochs: 16,
        batch_size: 4,
        seed: 0,
    };
    let (adv_model, adv_report) = train_supervised(&adv, &adv_cfg).unwrap();
    println!(
        "adversarial cd: acc {:.4} pos_drop {:.4} neg_drop {:.4}",
        adv_report.binary_accuracy, adv_report.positive_drop_rate, adv_report.negative_drop_rate
    );

    // criterion 9: dense with discriminator variants
    for (name, mode) in [
        ("dense        ", DiscriminatorMode::None),
        ("dense+plain  ", DiscriminatorMode::Plain),
        ("dense+cond   ", DiscriminatorMode::Conditional),
        ("dense+oracle ", DiscriminatorMode::Oracle),
    ] {
        let mut cfg = pipeline_for(&adv, mode, 0.6, 0.5);
        cfg.use_entropy = false;
        cfg.use_scan = false;
        let results: Vec<_> = adv
            .videos
            .iter()
            .map(|v| run_pipeline(v, &cfg, Some(&adv_model), &adv.meta).unwrap())
            .collect();
        let r = evaluate(&adv, &results).unwrap();
        println!("{name} acc {:.4} clips {:.2}", r.accuracy, r.mean_clips);
    }

    // criterion 6: ablation matrix
    let base = pipeline_for(&adv, DiscriminatorMode::Conditional, 0.6, 0.5);
    for (name, r) in ablation_matrix(&adv, &base, Some(&adv_model)).unwrap() {
        println!("ablate {name:<14} acc {:.4} clips {:.2}", r.accuracy, r.mean_clips);
    }

    // criterion 7: budget comparison
    let mut budget_cfg = base;
    budget_cfg.scan.budget_cap = Some(10);
    let skim10: Vec<_> = adv
        .videos
        .iter()
        .map(|v| run_pipeline(v, &budget_cfg, Some(&adv_model), &adv.meta).unwrap())
        .collect();
    let skim10 = evaluate(&adv, &skim10).unwrap();
    for (name, kind) in [
        ("random_10", StrategyKind::RandomN),
        ("uniform_10", StrategyKind::UniformN),
        ("top_conf_10", StrategyKind::TopConfidenceN),
    ] {
        let spec = StrategySpec::baseline(kind, Some(10), 7);
        let r = evaluate(&adv, &run_strategy(&adv, &spec, None).unwrap()).unwrap();
        println!("{name:<12} acc {:.4} vs skim10 {:.4}", r.accuracy, skim10.accuracy);
    }
    println!("skim10 clips {:.2}", skim10.mean_clips);

    // criterion 8: metric comparison
    for row in metric_comparison(&adv, &base, Some(&adv_model)).unwrap() {
        println!(
            "metric {:?}: acc {:.4} clips {:.2} wall {:.6}s",
            row.divergence, row.report.accuracy, row.report.mean_clips, row.wall_time_s
        );
    }

    // criterion 12: adaptive selection
    for preset in ["uniform_content", "diverse_content"] {
        let ds = generate_preset(preset, 7).unwrap();
        let cfg = pipeline_for(&ds, DiscriminatorMode::None, 0.6, 0.5);
        let results: Vec<_> = ds
            .videos
            .iter()
            .map(|v| run_pipeline(v, &cfg, None, &ds.meta).unwrap())
            .collect();
        let r = evaluate(&ds, &results).unwrap();
        println!("{preset}: clips {:.2} acc {:.4}", r.mean_clips, r.accuracy);
    }

    // calibration retain fraction check
    let thr =
        calibrate_entropy_threshold(&adv, 0.6, EntropyScale::Normalized, LogitSource::Light)
            .unwrap();
    let mut kept = 0usize;
    let mut total = 0usize;
    for v in &adv.videos {
        let dists = skimscan::selection::clip_distributions(v, LogitSource::Light).unwrap();
        for d in &dists {
            total += 1;
            if skimscan::infotheory::normalized_entropy(d) < thr {
                kept += 1;
            }
        }
    }
    println!("calibrate 0.6 -> thr {thr:.4}, retained {:.4}", kept as f64 / total as f64);

    // transfer finetune
    let tr = generate_preset("transfer", 11).unwrap();
    let head = tr.head.clone().unwrap();
    let ft_cfg = SgdConfig {
        learning_rate: 0.001,
        epochs: 80,
        batch_size: 1,
        seed: 0,
    };
    let (finetuned, trace) = transfer_finetune(model.clone(), &tr, &head, &ft_cfg).unwrap();
    println!("transfer loss first {:.5} last {:.5}", trace[0], trace[79]);
    let ma: Vec<f64> = trace.windows(5).map(|w| w.iter().sum::<f64>() / 5.0).collect();
    let monotone = ma.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    println!("5-epoch moving average monotone non-increasing: {monotone}");
    for (name, m) in [("frozen", &model), ("finetuned", &finetuned)] {
        let mut cfg = pipeline_for(&tr, DiscriminatorMode::Conditional, 0.6, 0.5);
        cfg.use_entropy = false;
        cfg.use_scan = false;
        let results: Vec<_> = tr
            .videos
            .iter()
            .map(|v| run_pipeline(v, &cfg, Some(m), &tr.meta).unwrap())
            .collect();
        let r = evaluate(&tr, &results).unwrap();
        println!("transfer dense+cd {name}: acc {:.4} clips {:.2}", r.accuracy, r.mean_clips);
    }

    // dense baseline on adversarial for reference
    let dense = evaluate(
        &adv,
        &run_strategy(&adv, &StrategySpec::baseline(StrategyKind::Dense, None, 0), None).unwrap(),
    )
    .unwrap();
    println!("dense(heavy) acc {:.4} map {:.4}", dense.accuracy, dense.map);
}
