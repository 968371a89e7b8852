//! Cross-module invariants: adjointness, norm estimates, activation
//! identities, training-loop sanity.

use proptest::prelude::*;
use regionlab_core::activation::{logistic, sigma, sigma_prime, softmax};
use regionlab_core::dense::{spectral_norm, Matrix};
use regionlab_core::field::{eval_field, fraction_above, FieldQuantity, GridSpec, Labeling};
use regionlab_core::network::Network as GenericNetwork;
use regionlab_core::Network;
use regionlab_core::presets::xor_demo_network;
use regionlab_core::trainer::{self, gd_step, Regularizer, TrainerConfig};
use regionlab_core::{Activation, Rng};

fn gauss_matrix(rng: &mut Rng, r: usize, c: usize) -> Matrix<f64> {
    rng.gauss_matrix::<f64>(r, c)
}

proptest! {
    #[test]
    fn matvec_adjointness(seed in 0u64..5000, rows in 1usize..32, cols in 1usize..32) {
        let mut rng = Rng::new(seed);
        let a = gauss_matrix(&mut rng, rows, cols);
        let x = rng.gauss::<f64>(cols);
        let y = rng.gauss::<f64>(rows);
        let lhs = a.matvec(&x).unwrap().dot(&y);
        let rhs = x.dot(&a.transpose_matvec(&y).unwrap());
        let scale = lhs.abs().max(rhs.abs()).max(1e-30);
        prop_assert!((lhs - rhs).abs() / scale < 1e-12);
    }

    #[test]
    fn sigma_is_tanh_and_twice_logistic(gamma in 0.1f64..50.0, x in -100.0f64..100.0) {
        let s = sigma(gamma, x);
        prop_assert!((s - (gamma * x / 2.0).tanh()).abs() < 1e-14);
        prop_assert!((s - (2.0 * logistic(gamma, x) - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn softmax_shift_invariant(seed in 0u64..5000, n in 2usize..10, c in -50.0f64..50.0) {
        let mut rng = Rng::new(seed);
        let v = rng.gauss::<f64>(n);
        let mut shifted = v.clone();
        for i in 0..n {
            shifted[i] += c;
        }
        let a = softmax(&v).unwrap();
        let b = softmax(&shifted).unwrap();
        let sum: f64 = a.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        for i in 0..n {
            prop_assert!(a[i] > 0.0 && a[i] < 1.0);
            prop_assert!((a[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn flatten_unflatten_round_trip(seed in 0u64..5000) {
        let mut rng = Rng::new(seed);
        let dims = [1 + (rng.next_u64() % 4) as usize, 2];
        let net = GenericNetwork::random(
            2,
            &dims,
            &[Activation::sigmoid(2.0), Activation::Softmax],
            &mut rng,
        ).unwrap();
        let rebuilt = GenericNetwork::unflatten(&net.shape(), &net.flatten()).unwrap();
        prop_assert_eq!(net, rebuilt);
    }
}

#[test]
fn rng_streams_are_reproducible() {
    let mut a = Rng::new(987_654_321);
    let mut b = Rng::new(987_654_321);
    let xs: Vec<u64> = (0..10_000).map(|_| a.next_u64()).collect();
    let ys: Vec<u64> = (0..10_000).map(|_| b.next_u64()).collect();
    assert_eq!(xs, ys);
}

#[test]
fn spectral_norm_dominates_random_directions() {
    let mut rng = Rng::new(404);
    for _ in 0..20 {
        let rows = 1 + (rng.next_u64() % 8) as usize;
        let cols = 1 + (rng.next_u64() % 8) as usize;
        let a = gauss_matrix(&mut rng, rows, cols);
        let tol = 1e-10;
        let sigma_max = spectral_norm(&a, tol);
        for _ in 0..100 {
            let mut u = rng.gauss::<f64>(cols);
            let n = u.norm2();
            if n == 0.0 {
                continue;
            }
            u.scale(1.0 / n);
            let au = a.matvec(&u).unwrap().norm2();
            assert!(
                sigma_max >= au - tol * sigma_max - 1e-12,
                "sigma {sigma_max} < ||Au|| {au}"
            );
        }
    }
}

#[test]
fn sigma_prime_matches_central_differences_on_grid() {
    let h = 1e-6;
    for gamma in [1.0, 3.0] {
        let mut x = -10.0;
        while x <= 10.0 {
            let fd: f64 = (sigma(gamma, x + h) - sigma(gamma, x - h)) / (2.0 * h);
            assert!(
                (sigma_prime(gamma, x) - fd).abs() < 1e-8,
                "gamma {gamma}, x {x}"
            );
            x += 0.125;
        }
    }
}

#[test]
fn scaling_localizes_first_layer_gradients() {
    // Tripling all weights and biases strictly shrinks the set of grid
    // points with a significant first-layer gradient component.
    let spec = GridSpec::square(3.0, 101);
    let labels = Labeling::XorQuadrant;
    let count_above = |scale: f64| {
        let net = xor_demo_network(scale);
        let map = eval_field(&net, &spec, FieldQuantity::MaxGradWeight { layer: 1 }, Some(&labels)).unwrap();
        map.values.iter().filter(|&&v| v > 0.05).count()
    };
    let c1 = count_above(1.0);
    let c3 = count_above(3.0);
    assert!(c3 < c1, "gamma=3 count {c3} vs gamma=1 count {c1}");
}

#[test]
fn localization_is_monotone_over_scales() {
    let spec = GridSpec::square(3.0, 201);
    let labels = Labeling::XorQuadrant;
    let mut prev = f64::INFINITY;
    for scale in [1.0, 2.0, 3.0] {
        let net = xor_demo_network(scale);
        let map = eval_field(&net, &spec, FieldQuantity::MaxGradWeight { layer: 1 }, Some(&labels)).unwrap();
        let frac = fraction_above(&map, 0.05);
        assert!(frac < prev, "scale {scale}: {frac} vs {prev}");
        prev = frac;
    }
}

#[test]
fn fraction_above_stable_under_grid_refinement() {
    let labels = Labeling::XorQuadrant;
    for scale in [1.0, 2.0, 3.0] {
        let net = xor_demo_network(scale);
        let coarse = GridSpec::square(3.0, 201);
        let fine = GridSpec::square(3.0, 402);
        let f_coarse = fraction_above(
            &eval_field(&net, &coarse, FieldQuantity::MaxGradWeight { layer: 1 }, Some(&labels)).unwrap(),
            0.05,
        );
        let f_fine = fraction_above(
            &eval_field(&net, &fine, FieldQuantity::MaxGradWeight { layer: 1 }, Some(&labels)).unwrap(),
            0.05,
        );
        assert!(
            (f_coarse - f_fine).abs() < 0.02,
            "scale {scale}: {f_coarse} vs {f_fine}"
        );
    }
}

#[test]
fn tiny_step_descent_is_monotone() {
    // Full-batch descent at a tiny step decreases the loss on every preset
    // configuration for the first hundred iterations.
    let seed = 11;
    let cases: Vec<(Network, Vec<regionlab_core::TrainingSample>, TrainerConfig)> = vec![
        (
            regionlab_core::presets::split_domain_network(25.0, 2.0),
            trainer::make_simple_domain(50, 6.0, seed).unwrap(),
            {
                let mut c = TrainerConfig::new(1e-4, 100);
                c.frozen_layers = [2].into();
                c
            },
        ),
        (
            regionlab_core::presets::split_domain_network(1.0, 2.0),
            trainer::make_simple_domain(200, 6.0, seed).unwrap(),
            {
                let mut c = TrainerConfig::new(1e-4, 100);
                c.frozen_layers = [2].into();
                c
            },
        ),
        (
            regionlab_core::presets::extended_domain_network(),
            trainer::make_uniform_split_domain(250, 30.0, seed).unwrap(),
            TrainerConfig::new(1e-4, 100),
        ),
        (
            regionlab_core::presets::split_domain_network(1.0, 25.0),
            trainer::make_uniform_split_domain(250, 30.0, seed).unwrap(),
            {
                let mut c = TrainerConfig::new(1e-4, 100);
                c.frozen_layers = [2].into();
                c.reg = Regularizer::L2 {
                    lambda: trainer::DEFAULT_LAMBDA,
                    layers: [1].into(),
                };
                c
            },
        ),
    ];
    for (mut net, samples, cfg) in cases {
        let mut prev = net.batch_loss(&samples).unwrap();
        for _ in 0..100 {
            gd_step(&mut net, &samples, &cfg).unwrap();
            let cur = net.batch_loss(&samples).unwrap();
            assert!(cur <= prev + 1e-9, "loss rose from {prev} to {cur}");
            prev = cur;
        }
    }
}

#[test]
fn norm_ball_feasible_after_every_iteration() {
    let kappa = 2.0;
    let mut net = regionlab_core::presets::split_domain_network(1.0, 25.0);
    let samples = trainer::make_uniform_split_domain(100, 30.0, 3).unwrap();
    let mut cfg = TrainerConfig::new(0.01, 1);
    cfg.frozen_layers = [2].into();
    cfg.reg = Regularizer::NormBall {
        kappa,
        layers: [1].into(),
    };
    for _ in 0..500 {
        gd_step(&mut net, &samples, &cfg).unwrap();
        let norm = net.layer(1).weights.row_norm2(0);
        assert!(norm <= kappa + 1e-12, "row norm {norm} escaped the ball");
    }
}
