// Scratch: split-domain training milestones for tolerance calibration.
use regionlab_core::trainer::{run_experiment, PresetConfig};

fn main() {
    // Width study at several tolerances, seeds 1..3.
    for seed in [1u64, 2, 3] {
        for norm in [1.0, 10.0, 25.0] {
            let mut cfg = PresetConfig::named("width");
            cfg.seed = seed;
            cfg.init_norm = Some(norm);
            cfg.record_every = Some(20);
            let report = run_experiment(&cfg).unwrap();
            let area = report.series("area").unwrap();
            print!("width seed {seed} norm {norm}:");
            for tol in [0.01, 0.024, 0.048, 0.1, 0.24] {
                print!(" tol{tol}->{:?}", area.first_at_or_below(tol));
            }
            println!("  final {:.4}", area.values.last().unwrap());
        }
    }

    // Density n=50: longest stretch of <1%-of-domain progress over 10k windows.
    let mut cfg = PresetConfig::named("density");
    cfg.seed = 1;
    cfg.n = Some(50);
    cfg.record_every = Some(100);
    let report = run_experiment(&cfg).unwrap();
    let area = report.series("area").unwrap();
    let window = 100; // 10_000 iterations at record_every = 100
    let mut max_stall = 0usize;
    let mut i = 0;
    while i + window < area.values.len() {
        let drop = area.values[i] - area.values[i + window];
        if drop < 0.01 * 24.0 {
            max_stall += 1;
        }
        i += 1;
    }
    println!(
        "density n=50: windows with <1% domain progress: {max_stall} of {}; final area {:.4}",
        area.values.len() - window,
        area.values.last().unwrap()
    );

    // Extended-domain comparison at a 1M-iteration horizon.
    let mut cfg = PresetConfig::named("regularization-compare");
    cfg.seed = 1;
    cfg.iterations = Some(1_000_000);
    cfg.record_every = Some(1000);
    let report = run_experiment(&cfg).unwrap();
    for mode in ["standard", "l2", "norm_ball"] {
        let area = report.series(&format!("area_{mode}")).unwrap();
        let norm = report.series(&format!("norm_a1_{mode}")).unwrap();
        let loss = report.series(&format!("loss_{mode}")).unwrap();
        let at = |it: f64| -> usize {
            area.index.iter().position(|&i| i >= it).unwrap_or(area.index.len() - 1)
        };
        for milestone in [100_000.0, 200_000.0, 300_000.0, 500_000.0, 1_000_000.0] {
            let k = at(milestone);
            println!(
                "reg {mode} @{milestone}: area {:.4}, norm {:.3}, loss {:.6}",
                area.values[k], norm.values[k], loss.values[k]
            );
        }
        println!(
            "reg {mode}: first area<=0.24 at {:?}, <=0.048 at {:?}",
            area.first_at_or_below(0.24),
            area.first_at_or_below(0.048)
        );
    }
}
