//! Backward-pass validation against central finite differences, plus the
//! closed-form partials of the one-dimensional logistic-head model.

use regionlab_core::activation::{logistic, sigma, sigma_prime};
use regionlab_core::network::{GradientSet, Network, TrainingSample};
use regionlab_core::scalar::Real;
use regionlab_core::{Activation, Rng, Vector};

fn flatten_grads<T: Real>(g: &GradientSet<T>) -> Vec<T> {
    let mut out = Vec::new();
    for (w, b) in g.weights.iter().zip(&g.bias) {
        out.extend_from_slice(w.as_slice());
        out.extend_from_slice(b.as_slice());
    }
    out
}

fn numerical_gradient<T: Real>(
    net: &regionlab_core::network::Network<T>,
    sample: &TrainingSample<T>,
    h: T,
) -> Vec<T> {
    let shape = net.shape();
    let s = net.flatten();
    (0..s.len())
        .map(|i| {
            let mut plus = s.clone();
            plus[i] = plus[i] + h;
            let mut minus = s.clone();
            minus[i] = minus[i] - h;
            let fp = regionlab_core::network::Network::unflatten(&shape, &plus)
                .unwrap()
                .loss(sample)
                .unwrap();
            let fm = regionlab_core::network::Network::unflatten(&shape, &minus)
                .unwrap()
                .loss(sample)
                .unwrap();
            (fp - fm) / (T::two() * h)
        })
        .collect()
}

fn check_net(net: &Network<f64>, sample: &TrainingSample<f64>) {
    let trace = net.forward(&sample.x).unwrap();
    let (_, grads) = net.backward(&trace, sample.class).unwrap();
    let analytic = flatten_grads(&grads);
    let numeric = numerical_gradient(net, sample, 1e-5);
    for (i, (&a, &n)) in analytic.iter().zip(&numeric).enumerate() {
        let diff = (a - n).abs();
        let scale = a.abs().max(n.abs());
        assert!(
            diff < 1e-9 || diff / scale < 1e-6,
            "param {i}: analytic {a} vs numeric {n}"
        );
    }
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = Rng::new(2024);
    for trial in 0..20 {
        let n_layers = 2 + (rng.next_u64() % 3) as usize;
        let gamma = if trial % 2 == 0 { 1.0 } else { 3.0 };
        let input_dim = 2 + (rng.next_u64() % 5) as usize;
        let mut dims = Vec::new();
        let mut acts = Vec::new();
        for _ in 0..n_layers - 1 {
            dims.push(2 + (rng.next_u64() % 5) as usize);
            acts.push(Activation::sigmoid(gamma));
        }
        dims.push(2 + (rng.next_u64() % 3) as usize);
        acts.push(Activation::Softmax);
        let net = Network::random(input_dim, &dims, &acts, &mut rng).unwrap();
        let x = rng.gauss::<f64>(input_dim);
        let class = (rng.next_u64() % *dims.last().unwrap() as u64) as usize;
        check_net(&net, &TrainingSample::new(x, class));
    }
}

#[test]
fn gradients_match_for_logistic_head() {
    // Mixed hidden gains with the logistic final activation.
    let mut rng = Rng::new(77);
    for _ in 0..10 {
        let net = Network::random(
            2,
            &[3, 2],
            &[Activation::sigmoid(1.0), Activation::logistic(5.0)],
            &mut rng,
        )
        .unwrap();
        let x = rng.gauss::<f64>(2);
        let class = (rng.next_u64() % 2) as usize;
        check_net(&net, &TrainingSample::new(x, class));
    }
}

#[test]
fn one_dimensional_closed_forms() {
    // d f / d alpha = g [l_g(sigma(a x - b)) - 1] sigma'(a x - b) x and the
    // bias partial is the same expression negated and without the x factor,
    // with g = 5 on the outer logistic.
    let net = regionlab_core::presets::motivational_1d_network(1.0, 0.0);
    let g = 5.0;
    let mut x = -12.0;
    while x <= 12.0 {
        let trace = net.forward(&Vector::from_slice(&[x])).unwrap();
        let (_, grads) = net.backward(&trace, 0).unwrap();
        let v = x; // alpha = 1, beta = 0
        let factor = g * (logistic(g, sigma(1.0, v)) - 1.0) * sigma_prime(1.0, v);
        let d_alpha = factor * x;
        let d_beta = -factor;
        assert!(
            (grads.weight(1).get(0, 0) - d_alpha).abs() < 1e-12,
            "x = {x}: {} vs {d_alpha}",
            grads.weight(1).get(0, 0)
        );
        assert!(
            (grads.bias(1)[0] - d_beta).abs() < 1e-12,
            "x = {x}: {} vs {d_beta}",
            grads.bias(1)[0]
        );
        x += 0.1;
    }
}

#[test]
fn gradient_derivatives_vanish_far_from_boundary() {
    // Both partials drop below one percent of their peak beyond the
    // saturation zone.
    let net = regionlab_core::presets::motivational_1d_network(1.0, 0.0);
    let grad_at = |x: f64| {
        let trace = net.forward(&Vector::from_slice(&[x])).unwrap();
        let (_, grads) = net.backward(&trace, 0).unwrap();
        (grads.weight(1).get(0, 0).abs(), grads.bias(1)[0].abs())
    };
    let peak = grad_at(-1.0).1.max(grad_at(0.0).1).max(grad_at(1.0).1);
    for x in [-12.0, -10.0, 10.0, 12.0] {
        let (da, db) = grad_at(x);
        assert!(da < 0.01 * peak * x.abs().max(1.0));
        assert!(db < 0.01 * peak);
    }
}

#[test]
fn f32_instantiation_gradient_check() {
    // The generic kernels work at single precision; tolerances widen with
    // the coarser arithmetic and finite-difference step.
    let mut rng = Rng::new(5);
    use regionlab_core::activation::Activation as Act;
    let net = Network::<f32>::random(
        2,
        &[3, 2],
        &[Act::sigmoid(1.0_f32), Act::Softmax],
        &mut rng,
    )
    .unwrap();
    let sample = TrainingSample::new(rng.gauss::<f32>(2), 0);
    let trace = net.forward(&sample.x).unwrap();
    let (_, grads) = net.backward(&trace, 0).unwrap();
    let analytic = flatten_grads(&grads);
    let numeric = numerical_gradient(&net, &sample, 1e-2_f32);
    for (&a, &n) in analytic.iter().zip(&numeric) {
        let diff = (a - n).abs();
        assert!(diff < 2e-3 || diff / a.abs().max(n.abs()) < 2e-2, "{a} vs {n}");
    }
}

#[test]
fn far_away_samples_dilute_the_batch_gradient() {
    // Doubling the training set with near-zero-gradient points roughly
    // halves the mean gradient norm.
    let net = regionlab_core::presets::motivational_1d_network(1.0, 0.0);
    let near = vec![
        TrainingSample::new(Vector::from_slice(&[0.5]), 0),
        TrainingSample::new(Vector::from_slice(&[-0.3]), 0),
    ];
    // Far points whose first-layer gradient magnitude stays below 1e-4
    // (the head is held fixed in this scenario).
    let mut far = near.clone();
    far.push(TrainingSample::new(Vector::from_slice(&[11.0]), 0));
    far.push(TrainingSample::new(Vector::from_slice(&[12.0]), 0));
    for s in &far[2..] {
        let trace = net.forward(&s.x).unwrap();
        let (_, g) = net.backward(&trace, 0).unwrap();
        let layer1 = g.weight(1).max_abs().max(g.bias(1).norm_inf());
        assert!(layer1 < 1e-4, "layer-1 gradient {layer1}");
    }
    let (_, g_near) = net.batch_gradient(&near).unwrap();
    let (_, g_far) = net.batch_gradient(&far).unwrap();
    let ratio = g_far.weight(1).get(0, 0) / g_near.weight(1).get(0, 0);
    assert!((ratio - 0.5).abs() < 0.01 * 0.5, "ratio = {ratio}");
}
