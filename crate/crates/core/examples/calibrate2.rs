// Scratch: probe cutoff-procedure variants against the expected reach
// fractions (frob: 100/51, 28/16, 9/7; elem: 100/40, 28/14, 9/6).
use regionlab_core::field::{GridSpec, Labeling};
use regionlab_core::network::{BackwardTrace, ForwardTrace, GradientSet};
use regionlab_core::partialbp::BoundEngine;
use regionlab_core::presets::xor_demo_network;

#[derive(Clone, Copy, Debug)]
enum BiasCheck {
    AllStages,
    FirstStageOnly,
    Never,
    YNormOnly,
    PerLayer,
    ExactGate,
    ExactGateX,
}

fn norm2(s: &[f64]) -> f64 {
    s.iter().map(|v| v * v).sum::<f64>().sqrt()
}
fn norminf(s: &[f64]) -> f64 {
    s.iter().fold(0.0_f64, |a, &v| a.max(v.abs()))
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    engine: &BoundEngine<f64>,
    trace: &ForwardTrace<f64>,
    bwd: &BackwardTrace<f64>,
    elementwise: bool,
    bias_check: BiasCheck,
    w_thresh: f64,
    b_thresh: f64,
    swap: bool,
) -> usize {
    let _ = swap;
    // Stage j = 3: exact ||y_3||, bounds for layers 2 and 1.
    let y3 = norm2(bwd.adjoint_y(3).as_slice());
    let (w2, b2, w1, b1);
    if elementwise {
        let binf2 = engine.bound_y_linf(trace, 3, y3, false).unwrap();
        let b2n = engine.bound_y_l2(trace, 3, y3).unwrap();
        let binf1 = engine.bound_y_linf(trace, 2, b2n, false).unwrap();
        w2 = norminf(trace.layer_input(2)) * binf2;
        b2 = binf2;
        w1 = norminf(trace.layer_input(1)) * binf1;
        b1 = binf1;
    } else {
        let b2n = engine.bound_y_l2(trace, 3, y3).unwrap();
        let b1n = engine.bound_y_l2(trace, 2, b2n).unwrap();
        w2 = norm2(trace.layer_input(2)) * b2n;
        b2 = b2n;
        w1 = norm2(trace.layer_input(1)) * b1n;
        b1 = b1n;
    }
    let exact2 = if elementwise {
        norminf(bwd.adjoint_y(2).as_slice())
    } else {
        norm2(bwd.adjoint_y(2).as_slice())
    };
    let exact1 = if elementwise {
        norminf(bwd.adjoint_y(1).as_slice())
    } else {
        norm2(bwd.adjoint_y(1).as_slice())
    };
    let (x1n, x0n) = if elementwise {
        (norminf(trace.layer_input(2)), norminf(trace.layer_input(1)))
    } else {
        (norm2(trace.layer_input(2)), norm2(trace.layer_input(1)))
    };
    let stop1 = match bias_check {
        BiasCheck::AllStages => w2 < w_thresh && w1 < w_thresh && b2 < b_thresh && b1 < b_thresh,
        BiasCheck::FirstStageOnly => w2 < w_thresh && w1 < w_thresh && b2 < b_thresh && b1 < b_thresh,
        BiasCheck::Never => w2 < w_thresh && w1 < w_thresh,
        BiasCheck::YNormOnly => b2 < w_thresh && b1 < w_thresh,
        BiasCheck::PerLayer => w1 < w_thresh && w2 < b_thresh,
        BiasCheck::ExactGate => exact2 < w_thresh && exact1 < w_thresh,
        BiasCheck::ExactGateX => x1n * exact2 < w_thresh && x0n * exact1 < w_thresh,
    };
    if stop1 {
        return 3;
    }
    // Stage j = 2: exact ||y_2||, bound for layer 1.
    let y2 = norm2(bwd.adjoint_y(2).as_slice());
    let (w1b, b1b);
    if elementwise {
        let binf1 = engine.bound_y_linf(trace, 2, y2, false).unwrap();
        w1b = norminf(trace.layer_input(1)) * binf1;
        b1b = binf1;
    } else {
        let b1n = engine.bound_y_l2(trace, 2, y2).unwrap();
        w1b = norm2(trace.layer_input(1)) * b1n;
        b1b = b1n;
    }
    let stop2 = match bias_check {
        BiasCheck::AllStages => w1b < w_thresh && b1b < b_thresh,
        BiasCheck::FirstStageOnly | BiasCheck::Never | BiasCheck::PerLayer => w1b < w_thresh,
        BiasCheck::YNormOnly => b1b < w_thresh,
        BiasCheck::ExactGate => exact1 < w_thresh,
        BiasCheck::ExactGateX => x0n * exact1 < w_thresh,
    };
    if stop2 {
        return 2;
    }
    1
}

fn main() {
    let spec = GridSpec::square(3.0, 201);
    for swap_labels in [false, true] {
        for bias_check in [BiasCheck::AllStages, BiasCheck::YNormOnly, BiasCheck::ExactGate] {
            for elementwise in [false, true] {
                print!(
                    "swap={} bias={:?} elem={}:",
                    swap_labels, bias_check, elementwise
                );
                for scale in [1.0, 2.0, 3.0] {
                    let net = xor_demo_network(scale);
                    let engine = BoundEngine::new(&net);
                    let mut c2 = 0usize;
                    let mut c1 = 0usize;
                    let mut trace = ForwardTrace::for_network(&net);
                    let mut bwd = BackwardTrace::for_network(&net);
                    let mut grads = GradientSet::zeros_for(&net);
                    for j in 0..spec.ny {
                        let y = spec.y_at(j);
                        for i in 0..spec.nx {
                            let x = spec.x_at(i);
                            net.forward_into(&[x, y], &mut trace);
                            let class = if swap_labels {
                                // Quadrants of the demo's own (unscaled) hyperplanes.
                                let v1 = 1.0 * x + 0.3 * y + 1.0;
                                let v2 = 0.4 * x - 1.0 * y - 0.5;
                                if (v1 >= 0.0) == (v2 >= 0.0) { 0 } else { 1 }
                            } else {
                                Labeling::XorQuadrant.class_at(x, y)
                            };
                            net.backward_into(&trace, class, &mut bwd, &mut grads, false)
                                .unwrap();
                            let reached =
                                simulate(&engine, &trace, &bwd, elementwise, bias_check, 0.05, 0.01, swap_labels);
                            if reached <= 2 {
                                c2 += 1;
                            }
                            if reached == 1 {
                                c1 += 1;
                            }
                        }
                    }
                    let total = spec.n_nodes() as f64;
                    print!(
                        "  s{}: ({:.0}%, {:.0}%)",
                        scale,
                        100.0 * c2 as f64 / total,
                        100.0 * c1 as f64 / total
                    );
                }
                println!();
            }
        }
    }
}
