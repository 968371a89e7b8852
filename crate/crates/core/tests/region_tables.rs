//! Boolean-operator truth tables against exhaustive enumeration, the
//! arrangement region count against a brute-force cell census, and the
//! transition analytics against numeric root-finding.

use regionlab_core::activation::{sigma, sigma_inverse};
use regionlab_core::dense::{Matrix, Vector};
use regionlab_core::region::{
    amplification_for_range, count_regions, kofn_layer, op_to_layer, transition_shift,
    transition_width, RegionOp,
};
use regionlab_core::Rng;
use std::collections::HashSet;

fn step_inputs(n: usize) -> impl Iterator<Item = Vec<f64>> {
    (0..1u32 << n).map(move |bits| {
        (0..n)
            .map(|i| if bits & (1 << i) != 0 { 1.0 } else { -1.0 })
            .collect()
    })
}

fn layer_sign(a: &Matrix<f64>, b: &Vector<f64>, inputs: &[f64]) -> bool {
    let v = a.matvec(&Vector::from_slice(inputs)).unwrap()[0] - b[0];
    v > 0.0
}

#[test]
fn operator_truth_tables_exhaustive() {
    for n in 1..=6usize {
        for inputs in step_inputs(n) {
            let pos: Vec<bool> = inputs.iter().map(|&v| v > 0.0).collect();
            if n == 1 {
                let (a, b) = op_to_layer(&RegionOp::<f64>::Identity).unwrap();
                assert_eq!(layer_sign(&a, &b, &inputs[..1]), pos[0]);
                let (a, b) = op_to_layer(&RegionOp::<f64>::Complement).unwrap();
                assert_eq!(layer_sign(&a, &b, &inputs[..1]), !pos[0]);
                let (a, b) = op_to_layer(&RegionOp::<f64>::Constant(true)).unwrap();
                assert!(layer_sign(&a, &b, &inputs[..1]));
                let (a, b) = op_to_layer(&RegionOp::<f64>::Constant(false)).unwrap();
                assert!(!layer_sign(&a, &b, &inputs[..1]));
            }
            if n >= 2 {
                let (a, b) = op_to_layer(&RegionOp::<f64>::Intersection(n)).unwrap();
                assert_eq!(layer_sign(&a, &b, &inputs), pos.iter().all(|&p| p), "n = {n}");
                let (a, b) = op_to_layer(&RegionOp::<f64>::Union(n)).unwrap();
                assert_eq!(layer_sign(&a, &b, &inputs), pos.iter().any(|&p| p), "n = {n}");
            }
            // k-of-n for every k, unit weights.
            for k in 1..=n {
                let (a, b) = kofn_layer(&Vector::from_vec(vec![1.0; n]), k).unwrap();
                let count = pos.iter().filter(|&&p| p).count();
                assert_eq!(layer_sign(&a, &b, &inputs), count >= k, "n = {n}, k = {k}");
            }
        }
    }
}

#[test]
fn weighted_kofn_counts_multiplicity() {
    // Weight 2 on the first region: it counts twice.
    let w = Vector::from_slice(&[2.0, 1.0, 1.0]);
    for k in 1..=4usize {
        let (a, b) = kofn_layer(&w, k).unwrap();
        for inputs in step_inputs(3) {
            let effective: f64 = inputs
                .iter()
                .zip(w.iter())
                .filter(|(&v, _)| v > 0.0)
                .map(|(_, &wi)| wi)
                .sum();
            assert_eq!(layer_sign(&a, &b, &inputs), effective >= k as f64);
        }
    }
}

#[test]
fn de_morgan_composition_matches_direct_union() {
    // complement each input, intersect, complement the result; signs must
    // match the direct union on every step-input pattern.
    for n in 2..=6usize {
        let (a_union, b_union) = op_to_layer(&RegionOp::<f64>::Union(n)).unwrap();
        let (a_inter, b_inter) = op_to_layer(&RegionOp::<f64>::Intersection(n)).unwrap();
        let (a_comp, b_comp) = op_to_layer(&RegionOp::<f64>::Complement).unwrap();
        for inputs in step_inputs(n) {
            // Stage 1: elementwise complement through a step nonlinearity.
            let stage1: Vec<f64> = inputs
                .iter()
                .map(|&v| {
                    let u = a_comp.get(0, 0) * v - b_comp[0];
                    if u >= 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect();
            let stage2 = {
                let v = a_inter.matvec(&Vector::from_slice(&stage1)).unwrap()[0] - b_inter[0];
                if v >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            };
            let composed = a_comp.get(0, 0) * stage2 - b_comp[0] > 0.0;
            let direct = layer_sign(&a_union, &b_union, &inputs);
            assert_eq!(composed, direct, "n = {n}, inputs = {inputs:?}");
        }
    }
}

/// Brute-force census of the cells cut by `lines` (pairs `(a, beta)` with
/// the line `<a, x> = beta`): distinct sign vectors over a dense grid plus
/// probes around every pairwise intersection. Oracle-only machinery; every
/// cell of a generic arrangement touches a vertex (or the grid for n <= 1).
fn brute_force_cell_count(lines: &[([f64; 2], f64)]) -> usize {
    let mut vertices: Vec<[f64; 2]> = Vec::new();
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            let (a, s) = lines[i];
            let (b, t) = lines[j];
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() > 1e-12 {
                vertices.push([(s * b[1] - t * a[1]) / det, (a[0] * t - b[0] * s) / det]);
            }
        }
    }
    let mut center = [0.0, 0.0];
    let mut radius = 1.0_f64;
    if !vertices.is_empty() {
        for v in &vertices {
            center[0] += v[0];
            center[1] += v[1];
        }
        center[0] /= vertices.len() as f64;
        center[1] /= vertices.len() as f64;
        for v in &vertices {
            let d = ((v[0] - center[0]).powi(2) + (v[1] - center[1]).powi(2)).sqrt();
            radius = radius.max(d);
        }
    }
    let half = 3.0 * radius + 1.0;

    let sign_vector = |p: [f64; 2]| -> Vec<bool> {
        lines.iter().map(|&(a, b)| a[0] * p[0] + a[1] * p[1] - b > 0.0).collect()
    };

    let mut cells: HashSet<Vec<bool>> = HashSet::new();
    let n_grid = 2001;
    for i in 0..n_grid {
        for j in 0..n_grid {
            let x = center[0] - half + (2.0 * half) * (i as f64 + 0.5) / n_grid as f64;
            let y = center[1] - half + (2.0 * half) * (j as f64 + 0.5) / n_grid as f64;
            cells.insert(sign_vector([x, y]));
        }
    }
    for v in &vertices {
        for r in [1e-6 * half, 1e-9 * half] {
            for k in 0..8 {
                let th = std::f64::consts::PI * (2.0 * k as f64 + 1.0) / 8.0;
                cells.insert(sign_vector([v[0] + r * th.cos(), v[1] + r * th.sin()]));
            }
        }
    }
    cells.len()
}

#[test]
fn region_count_matches_cell_census() {
    assert_eq!(count_regions(3, 2).to_string(), "7");
    assert_eq!(count_regions(0, 7).to_string(), "1");
    for n in 1..=6usize {
        for seed in 0..10u64 {
            let mut rng = Rng::new(1000 * n as u64 + seed);
            let lines: Vec<([f64; 2], f64)> = (0..n)
                .map(|_| {
                    let a = rng.gauss::<f64>(2);
                    let beta = rng.gauss::<f64>(1)[0];
                    ([a[0], a[1]], beta)
                })
                .collect();
            let cells = brute_force_cell_count(&lines);
            let expect = count_regions(n, 2);
            assert_eq!(
                expect.to_string(),
                cells.to_string(),
                "n = {n}, seed = {seed}"
            );
        }
    }
}

#[test]
fn shift_matches_zero_crossing_at_large_x() {
    // Bisection on sigma(x0) + sigma(y) = beta at x0 = 30.
    let x0 = 30.0;
    for beta in [0.6, 1.0, 1.8] {
        let f = |y: f64| sigma(1.0, x0) + sigma(1.0, y) - beta;
        let (mut lo, mut hi) = (-50.0, 50.0);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let numeric = 0.5 * (lo + hi);
        let analytic = transition_shift(beta).unwrap();
        assert!(
            (numeric - analytic).abs() < 1e-6,
            "beta {beta}: {numeric} vs {analytic}"
        );
    }
}

#[test]
fn width_matches_contour_extraction() {
    // Level contours of sigma_g(sigma(x) + sigma(y) - beta) at x = 50.
    let x0 = 50.0;
    let level = 0.95;
    for beta in [0.8, 1.0, 1.3] {
        let gamma = amplification_for_range(beta, 0.995).unwrap();
        let out = |y: f64| sigma(gamma, sigma(1.0, x0) + sigma(1.0, y) - beta);
        let solve = |target: f64| -> f64 {
            let (mut lo, mut hi) = (-60.0, 60.0);
            assert!(out(lo) < target && out(hi) > target);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if out(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let numeric = solve(level) - solve(-level);
        let analytic = transition_width(beta, gamma, level).unwrap();
        assert!(
            (numeric - analytic).abs() < 1e-6,
            "beta {beta}: {numeric} vs {analytic}"
        );
    }

    // Past the critical offset the lower contour never appears: the output
    // at x -> inf stays above -0.95 for every y, and the analytic width is
    // infinite.
    let gamma = amplification_for_range(1.0, 0.995).unwrap();
    let critical = sigma_inverse(1.0, 0.95).unwrap() / gamma;
    let beta = critical * 0.9;
    let w: f64 = transition_width(beta, gamma, 0.95).unwrap();
    assert!(w.is_infinite());
    let min_out = sigma(gamma, sigma(1.0, 50.0) - 1.0 - beta);
    assert!(min_out > -0.95, "lower contour should be unreachable");
}
