// Scratch calibration runs; not part of the deliverable test suite.
use regionlab_core::field::{GridSpec, Labeling};
use regionlab_core::partialbp::{reach_statistics, BoundKind, CutoffPolicy};
use regionlab_core::presets::xor_demo_network;
use regionlab_core::trainer::{run_experiment, PresetConfig};
const AREA_ZERO_TOL: f64 = 0.048;

fn main() {
    let t0 = std::time::Instant::now();

    // Reach fractions for the three weight scalings.
    for kind in [BoundKind::Frobenius, BoundKind::Elementwise] {
        for scale in [1.0, 2.0, 3.0] {
            let net = xor_demo_network(scale);
            let spec = GridSpec::square(3.0, 201);
            let policy = CutoffPolicy::standard(3, kind);
            let f = reach_statistics(&net, &spec, &Labeling::XorQuadrant, &policy).unwrap();
            println!(
                "reach {:?} scale {}: layer2 {:.1}%, layer1 {:.1}%  [{:?}]",
                kind,
                scale,
                f[1] * 100.0,
                f[0] * 100.0,
                t0.elapsed()
            );
        }
    }

    // Width study: iterations to zero area for init norms 1, 10, 25.
    for norm in [1.0, 10.0, 25.0] {
        let mut cfg = PresetConfig::named("width");
        cfg.seed = 1;
        cfg.init_norm = Some(norm);
        cfg.early_stop_zero_area = true;
        cfg.record_every = Some(20);
        let report = run_experiment(&cfg).unwrap();
        let area = report.series("area").unwrap();
        let it = area.first_at_or_below(AREA_ZERO_TOL);
        println!(
            "width norm {}: zero-area at {:?} (last area {:.5}, {} records) [{:?}]",
            norm,
            it,
            area.values.last().unwrap(),
            area.values.len(),
            t0.elapsed()
        );
    }

    // Density: n = 3200 with the norm-25 init.
    let mut cfg = PresetConfig::named("density");
    cfg.seed = 1;
    cfg.n = Some(3200);
    cfg.early_stop_zero_area = true;
    cfg.record_every = Some(100);
    let report = run_experiment(&cfg).unwrap();
    let area = report.series("area").unwrap();
    println!(
        "density n=3200: zero-area at {:?} (last area {:.5}) [{:?}]",
        area.first_at_or_below(AREA_ZERO_TOL),
        area.values.last().unwrap(),
        t0.elapsed()
    );

    // Regularization comparison with the default lambda/kappa.
    let mut cfg = PresetConfig::named("regularization-compare");
    cfg.seed = 1;
    cfg.record_every = Some(500);
    let report = run_experiment(&cfg).unwrap();
    for mode in ["standard", "l2", "norm_ball"] {
        let area = report.series(&format!("area_{mode}")).unwrap();
        let norm = report.series(&format!("norm_a1_{mode}")).unwrap();
        let loss = report.series(&format!("loss_{mode}")).unwrap();
        println!(
            "reg {mode}: zero-area at {:?}, final norm {:.3}, final loss {:.6} [{:?}]",
            area.first_at_or_below(AREA_ZERO_TOL),
            norm.values.last().unwrap(),
            loss.values.last().unwrap(),
            t0.elapsed()
        );
    }
}
