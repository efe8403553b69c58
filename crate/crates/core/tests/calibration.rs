// Scratch calibration probe (removed before release).
use grafair_core::config::TrainConfig;
use grafair_core::data::{synth_with_spec, SynthSpec};
use grafair_core::experiment::{run_experiment_on, DatasetInfo};
use grafair_core::model::Variant;

fn info(g: &grafair_core::Graph64, tag: &str) -> DatasetInfo {
    DatasetInfo {
        source: tag.into(),
        nodes: g.node_count(),
        features: g.feature_dim(),
        edges: g.edges().edge_count(),
        train_nodes: g.train_mask().iter().filter(|&&b| b).count(),
        val_nodes: g.val_mask().iter().filter(|&&b| b).count(),
        test_nodes: g.test_mask().iter().filter(|&&b| b).count(),
        warnings: vec![],
    }
}

fn run(g: &grafair_core::Graph64, cfg: &TrainConfig, tag: &str) -> (f64, f64) {
    let (report, _) = run_experiment_on(g, info(g, tag), cfg).unwrap();
    let a = &report.aggregate;
    let last = report.per_seed[0].trace.last();
    let (kl, nll) = last.map(|b| (b.kl_term, b.nll_term)).unwrap_or((0.0, 0.0));
    println!(
        "{tag:20} {:13} ep={:3} | F1 {:6.2}±{:4.2} SP {:6.2}±{:5.2} EO {:6.2} CF {:5.2} RS {:5.2} | kl {:8.2} nll {:.3}",
        cfg.variant.name(), cfg.epochs,
        a.mean.f1, a.std.f1, a.mean.delta_sp, a.std.delta_sp,
        a.mean.delta_eo, a.mean.delta_cf, a.mean.delta_rs, kl, nll,
    );
    (a.mean.f1, a.mean.delta_sp)
}

#[test]
#[ignore]
fn communities_synth500() {
    for fs in [0.25f64, 0.5, 1.0] {
        let mut spec = SynthSpec::basic(500, 0.9, 0.8, 1);
        spec.signal_gain = 0.0;
        spec.feature_scale = fs;
        let g = synth_with_spec::<f64>(spec).unwrap();
        let pos = g.labels().iter().map(|&y| y as f64).sum::<f64>() / 500.0;
        println!("s500 fs={fs}: {} edges, pos {:.3}", g.edges().edge_count(), pos);
        let mut cfg = TrainConfig::default();
        cfg.dataset = "synth".into();
        cfg.epochs = 100;
        let mut res = Vec::new();
        for variant in [Variant::Full, Variant::Vanilla] {
            cfg.variant = variant;
            res.push(run(&g, &cfg, "s500"));
        }
        println!(
            "  -> ratio {:.2} (<=0.5), f1 drop {:.1} (<=10)\n",
            res[0].1 / res[1].1,
            res[1].0 - res[0].0
        );
    }
}

#[test]
#[ignore]
fn communities_german() {
    for fs in [0.25f64, 0.5, 1.0] {
        let mut spec = SynthSpec::german_like(7);
        spec.signal_gain = 0.0;
        spec.feature_scale = fs;
        let g = synth_with_spec::<f64>(spec).unwrap();
        let pos = g.labels().iter().map(|&y| y as f64).sum::<f64>() / 1000.0;
        println!("german fs={fs}: {} edges, pos {:.3}", g.edges().edge_count(), pos);
        let mut cfg = TrainConfig::default();
        cfg.dataset = "synth-german".into();
        cfg.epochs = 100;
        for variant in [Variant::Full, Variant::Vanilla, Variant::NoKl] {
            cfg.variant = variant;
            run(&g, &cfg, "german");
        }
        println!();
    }
}
