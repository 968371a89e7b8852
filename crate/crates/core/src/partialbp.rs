//! Bound-gated early stopping of backpropagation.
//!
//! Walking the backward pass from the output layer, the adjoint norms of all
//! deeper-toward-input layers can be bounded before they are computed. Once
//! every remaining layer's weight- and bias-gradient bound falls strictly
//! below its threshold, the pass stops. Blocks that are computed are
//! identical to the full backward pass; the cutoff only truncates.

use crate::dense::spectral_norm_with_status;
use crate::error::{Error, Result};
use crate::field::{GridSpec, Labeling};
use crate::network::{BackwardTrace, ForwardTrace, GradientSet, Network};
use crate::scalar::Real;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which norm the gradient bounds control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Bound the Frobenius norms of the gradient blocks via the spectral
    /// norms of the weight matrices.
    Frobenius,
    /// Bound the largest gradient entries via per-column norms, evaluating
    /// the derivative mask at every entry.
    Elementwise,
    /// Elementwise with the mask replaced by its maximum; never tighter than
    /// [`BoundKind::Elementwise`].
    ElementwiseLoose,
}

/// Per-layer stopping thresholds on the max-gradient-magnitude bound
/// (1-based layer `k` at index `k - 1`; the output layer's entry is never
/// consulted since its gradients are always computed).
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffPolicy<T> {
    pub thresholds: Vec<T>,
    pub kind: BoundKind,
}

impl<T: Real> CutoffPolicy<T> {
    /// The same threshold for every layer.
    pub fn uniform(n_layers: usize, threshold: T, kind: BoundKind) -> Self {
        CutoffPolicy {
            thresholds: vec![threshold; n_layers],
            kind,
        }
    }

    /// Explicit per-layer thresholds, layer 1 first.
    pub fn for_layers(thresholds: Vec<T>, kind: BoundKind) -> Self {
        CutoffPolicy { thresholds, kind }
    }

    /// The default scheme: 0.05 on the first layer, 0.01 on every deeper
    /// hidden layer.
    pub fn standard(n_layers: usize, kind: BoundKind) -> Self {
        let mut thresholds = vec![T::from_f64(0.01); n_layers];
        thresholds[0] = T::from_f64(0.05);
        CutoffPolicy { thresholds, kind }
    }

    fn validate(&self, n_layers: usize) -> Result<()> {
        if self.thresholds.len() != n_layers {
            return Err(Error::Config(
                "cutoff policy needs one threshold per layer".into(),
            ));
        }
        if self.thresholds.iter().any(|t| t.is_nan() || *t < T::zero()) {
            return Err(Error::Config("cutoff thresholds must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Safety factor applied to the power-iteration estimate: the Rayleigh
/// quotient approaches the spectral norm from below, so the bound inflates
/// it to stay an upper bound.
const SPECTRAL_INFLATION: f64 = 1.01;
const SPECTRAL_TOL: f64 = 1e-10;

/// Precomputed per-layer matrix norms for one network; built once and reused
/// across every sample in a batch or grid sweep.
#[derive(Debug, Clone)]
pub struct BoundEngine<'a, T> {
    net: &'a Network<T>,
    sigma_max: Vec<T>,
    col_norms: Vec<Vec<T>>,
    max_col_norm: Vec<T>,
}

impl<'a, T: Real> BoundEngine<'a, T> {
    pub fn new(net: &'a Network<T>) -> Self {
        let mut sigma_max = Vec::with_capacity(net.n_layers());
        let mut col_norms = Vec::with_capacity(net.n_layers());
        let mut max_col_norm = Vec::with_capacity(net.n_layers());
        for layer in net.layers() {
            let est = spectral_norm_with_status(&layer.weights, T::from_f64(SPECTRAL_TOL));
            sigma_max.push(est.value * T::from_f64(SPECTRAL_INFLATION));
            let cols: Vec<T> = (0..layer.weights.cols())
                .map(|j| layer.weights.col_norm2(j))
                .collect();
            let m = cols.iter().fold(T::zero(), |a, &b| a.max(b));
            col_norms.push(cols);
            max_col_norm.push(m);
        }
        BoundEngine {
            net,
            sigma_max,
            col_norms,
            max_col_norm,
        }
    }

    pub fn network(&self) -> &Network<T> {
        self.net
    }

    /// Upper bound on `||y_{k-1}||_2` given `||y_k||_2`, for `k >= 2`:
    /// the largest derivative-mask entry times the spectral norm of `A_k`.
    pub fn bound_y_l2(&self, trace: &ForwardTrace<T>, k: usize, y_k_norm2: T) -> Result<T> {
        debug_assert!(k >= 2);
        let mask = self
            .net
            .layer(k - 1)
            .activation
            .max_derivative_at_min_abs(trace.pre_activation(k - 1).min_abs())?;
        Ok(mask * self.sigma_max[k - 1] * y_k_norm2)
    }

    /// Upper bound on `||y_{k-1}||_inf` given `||y_k||_2`, for `k >= 2`.
    ///
    /// Entry `i` of `z_k = A_k^T y_k` is the inner product of column `i`
    /// of `A_k` with `y_k`, so the tight variant takes the max over entries
    /// of mask times column norm. The loose variant factors the max mask out.
    pub fn bound_y_linf(&self, trace: &ForwardTrace<T>, k: usize, y_k_norm2: T, loose: bool) -> Result<T> {
        debug_assert!(k >= 2);
        let act = self.net.layer(k - 1).activation;
        let v_prev = trace.pre_activation(k - 1);
        let cols = &self.col_norms[k - 1];
        if loose {
            let mask = act.max_derivative_at_min_abs(v_prev.min_abs())?;
            Ok(mask * self.max_col_norm[k - 1] * y_k_norm2)
        } else {
            let mut best = T::zero();
            for i in 0..v_prev.len() {
                let mask = act.max_derivative_at_min_abs(v_prev[i].abs())?;
                best = best.max(mask * cols[i]);
            }
            Ok(best * y_k_norm2)
        }
    }

    /// Bounds on the weight- and bias-gradient magnitudes of every layer
    /// `1..j`, given that `y_j` is known exactly. Returns
    /// `(weight_bound, bias_bound)` pairs indexed by `k - 1`.
    pub fn gradient_bounds_below(
        &self,
        trace: &ForwardTrace<T>,
        j: usize,
        kind: BoundKind,
        y_j: &crate::dense::Vector<T>,
    ) -> Result<Vec<(T, T)>> {
        let mut out = vec![(T::zero(), T::zero()); j - 1];
        match kind {
            BoundKind::Frobenius => {
                // ||dA_k||_F = ||x_{k-1}||_2 ||y_k||_2 exactly, so bounding
                // the adjoint norm bounds the block norm.
                let mut bound = self.bound_y_l2(trace, j, y_j.norm2())?;
                for k in (1..j).rev() {
                    let x_norm = norm2_slice(trace.layer_input(k));
                    out[k - 1] = (x_norm * bound, bound);
                    if k >= 2 {
                        bound = self.bound_y_l2(trace, k, bound)?;
                    }
                }
            }
            BoundKind::Elementwise | BoundKind::ElementwiseLoose => {
                let loose = matches!(kind, BoundKind::ElementwiseLoose);
                // The 2-norm chain carries the adjoint down; each layer takes
                // a single inf-norm hop off it for the entry bounds.
                let mut bound2_next = y_j.norm2();
                for k in (1..j).rev() {
                    let bound_inf = self.bound_y_linf(trace, k + 1, bound2_next, loose)?;
                    let x_inf = norm_inf_slice(trace.layer_input(k));
                    out[k - 1] = (x_inf * bound_inf, bound_inf);
                    if k >= 2 {
                        bound2_next = self.bound_y_l2(trace, k + 1, bound2_next)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Backward pass that stops as soon as the gradient bounds of every
    /// remaining layer fall strictly below their thresholds.
    ///
    /// Returns the gradient set (uncomputed blocks stay zero) and the
    /// deepest layer whose gradients were exactly computed (1 means a full
    /// pass). Computed blocks match [`Network::backward`] bit for bit.
    pub fn backward_with_cutoff(
        &self,
        trace: &ForwardTrace<T>,
        class: usize,
        policy: &CutoffPolicy<T>,
    ) -> Result<(GradientSet<T>, usize)> {
        let n = self.net.n_layers();
        policy.validate(n)?;
        let mut bwd = BackwardTrace::for_network(self.net);
        let mut grads = GradientSet::zeros_for(self.net);
        let reached = self.backward_with_cutoff_into(trace, class, policy, &mut bwd, &mut grads)?;
        Ok((grads, reached))
    }

    pub fn backward_with_cutoff_into(
        &self,
        trace: &ForwardTrace<T>,
        class: usize,
        policy: &CutoffPolicy<T>,
        bwd: &mut BackwardTrace<T>,
        grads: &mut GradientSet<T>,
    ) -> Result<usize> {
        let n = self.net.n_layers();
        policy.validate(n)?;
        let seed_len = bwd.y[n - 1].len();
        debug_assert_eq!(seed_len, self.net.output_dim());
        self.net
            .seed_output_adjoint(trace, class, bwd.y[n - 1].as_mut_slice())?;

        let mut j = n;
        loop {
            self.net.accumulate_layer_gradient(trace, bwd, grads, j, false);
            if j == 1 {
                return Ok(1);
            }
            let bounds = self.gradient_bounds_below(trace, j, policy.kind, bwd.adjoint_y(j))?;
            let all_below = bounds
                .iter()
                .enumerate()
                .all(|(idx, &(w, b))| w.max(b) < policy.thresholds[idx]);
            if all_below {
                return Ok(j);
            }
            self.net.step_adjoint_down(trace, bwd, j);
            j -= 1;
        }
    }
}

fn norm2_slice<T: Real>(s: &[T]) -> T {
    s.iter().fold(T::zero(), |a, &v| a + v * v).sqrt()
}

fn norm_inf_slice<T: Real>(s: &[T]) -> T {
    s.iter().fold(T::zero(), |a, &v| a.max(v.abs()))
}

/// Fraction of grid nodes whose cutoff backward pass reaches each layer
/// (index `k - 1` holds layer `k`; the output layer is always 1.0).
pub fn reach_statistics(
    net: &Network<f64>,
    spec: &GridSpec,
    truth: &Labeling,
    policy: &CutoffPolicy<f64>,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if net.input_dim() != 2 {
        return Err(Error::Config("reach statistics need a 2-D input network".into()));
    }
    policy.validate(net.n_layers())?;
    let engine = BoundEngine::new(net);
    let n = net.n_layers();

    let rows: Vec<Result<Vec<usize>>> = (0..spec.ny)
        .into_par_iter()
        .map(|j| {
            let mut counts = vec![0usize; n];
            let mut trace = ForwardTrace::for_network(net);
            let mut bwd = BackwardTrace::for_network(net);
            let mut grads = GradientSet::zeros_for(net);
            let y = spec.y_at(j);
            for i in 0..spec.nx {
                let x = spec.x_at(i);
                net.forward_into(&[x, y], &mut trace);
                let reached =
                    engine.backward_with_cutoff_into(&trace, truth.class_at(x, y), policy, &mut bwd, &mut grads)?;
                for k in reached..=n {
                    counts[k - 1] += 1;
                }
            }
            Ok(counts)
        })
        .collect();

    let mut totals = vec![0usize; n];
    for row in rows {
        for (t, c) in totals.iter_mut().zip(row?) {
            *t += c;
        }
    }
    let nodes = spec.n_nodes() as f64;
    Ok(totals.into_iter().map(|c| c as f64 / nodes).collect())
}

/// Map of the deepest layer reached by the cutoff pass at each grid node.
pub fn reach_map(
    net: &Network<f64>,
    spec: &GridSpec,
    truth: &Labeling,
    policy: &CutoffPolicy<f64>,
) -> Result<crate::field::FieldMap> {
    spec.validate()?;
    if net.input_dim() != 2 {
        return Err(Error::Config("reach map needs a 2-D input network".into()));
    }
    policy.validate(net.n_layers())?;
    let engine = BoundEngine::new(net);
    let mut values = vec![0.0; spec.n_nodes()];
    let failed = std::sync::atomic::AtomicBool::new(false);
    values.par_chunks_mut(spec.nx).enumerate().for_each(|(j, row)| {
        let mut trace = ForwardTrace::for_network(net);
        let mut bwd = BackwardTrace::for_network(net);
        let mut grads = GradientSet::zeros_for(net);
        let y = spec.y_at(j);
        for (i, out) in row.iter_mut().enumerate() {
            let x = spec.x_at(i);
            net.forward_into(&[x, y], &mut trace);
            match engine.backward_with_cutoff_into(&trace, truth.class_at(x, y), policy, &mut bwd, &mut grads) {
                Ok(reached) => *out = reached as f64,
                Err(_) => failed.store(true, std::sync::atomic::Ordering::Relaxed),
            }
        }
    });
    if failed.load(std::sync::atomic::Ordering::Relaxed) {
        return Err(Error::Config("reach map evaluation failed".into()));
    }
    Ok(crate::field::FieldMap {
        spec: *spec,
        values,
        name: "reach_layer".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::sigma_prime;
    use crate::dense::{Matrix, Vector};
    use crate::network::TrainingSample;
    use crate::presets::xor_demo_network;
    use crate::rng::Rng;

    #[test]
    fn l2_bound_identity_matrix_case() {
        use crate::activation::Activation;
        use crate::network::Layer;
        // Hidden sigma_1 layer into identity weights: mask max is 1/2 when
        // some |v| entry is ~0, sigma_max(I) = 1 (inflated by 1.01).
        let net = crate::network::Network::new(
            2,
            vec![
                Layer::new(Matrix::identity(2), Vector::zeros(2), Activation::sigmoid(1.0)).unwrap(),
                Layer::new(Matrix::identity(2), Vector::zeros(2), Activation::Softmax).unwrap(),
            ],
        )
        .unwrap();
        let engine = BoundEngine::new(&net);
        let trace = net.forward(&Vector::from_slice(&[0.0, 0.7])).unwrap();
        let bound: f64 = engine.bound_y_l2(&trace, 2, 1.0).unwrap();
        assert!((bound - 0.5 * 1.01).abs() < 1e-6, "bound = {bound}");
    }

    #[test]
    fn saturated_masks_squash_bound() {
        let v = 20.0_f64;
        assert!(sigma_prime(3.0_f64, v) < 1e-10);
        let net = xor_demo_network(1.0);
        let engine = BoundEngine::new(&net);
        let trace = net.forward(&Vector::from_slice(&[50.0, 50.0])).unwrap();
        // Far from every boundary the layer-1 pre-activations saturate.
        let bound = engine.bound_y_l2(&trace, 2, 1.0).unwrap();
        assert!(bound < 1e-10, "bound = {bound}");
    }

    #[test]
    fn tight_never_exceeds_loose() {
        let mut rng = Rng::new(91);
        for _ in 0..200 {
            let net = crate::network::Network::<f64>::random(
                3,
                &[4, 3, 2],
                &[
                    crate::activation::Activation::sigmoid(1.0),
                    crate::activation::Activation::sigmoid(2.0),
                    crate::activation::Activation::Softmax,
                ],
                &mut rng,
            )
            .unwrap();
            let engine = BoundEngine::new(&net);
            let x = rng.gauss::<f64>(3);
            let trace = net.forward(&x).unwrap();
            for k in 2..=3 {
                let tight = engine.bound_y_linf(&trace, k, 1.0, false).unwrap();
                let loose = engine.bound_y_linf(&trace, k, 1.0, true).unwrap();
                assert!(tight <= loose * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn bounds_dominate_exact_adjoints() {
        let mut rng = Rng::new(17);
        for _ in 0..200 {
            let net = crate::network::Network::<f64>::random(
                2,
                &[3, 3, 2],
                &[
                    crate::activation::Activation::sigmoid(1.0),
                    crate::activation::Activation::sigmoid(3.0),
                    crate::activation::Activation::Softmax,
                ],
                &mut rng,
            )
            .unwrap();
            let engine = BoundEngine::new(&net);
            let x = rng.gauss::<f64>(2);
            let trace = net.forward(&x).unwrap();
            let (bwd, _) = net.backward(&trace, 0).unwrap();
            for k in (2..=3).rev() {
                let y_k = bwd.adjoint_y(k);
                let true_prev2 = bwd.adjoint_y(k - 1).norm2();
                let true_prev_inf = bwd.adjoint_y(k - 1).norm_inf();
                assert!(engine.bound_y_l2(&trace, k, y_k.norm2()).unwrap() >= true_prev2);
                assert!(engine.bound_y_linf(&trace, k, y_k.norm2(), false).unwrap() >= true_prev_inf);
                assert!(engine.bound_y_linf(&trace, k, y_k.norm2(), true).unwrap() >= true_prev_inf);
            }
        }
    }

    #[test]
    fn infinite_thresholds_stop_at_output_layer() {
        let net = xor_demo_network(1.0);
        let engine = BoundEngine::new(&net);
        let trace = net.forward(&Vector::from_slice(&[0.3, -0.4])).unwrap();
        let policy = CutoffPolicy::uniform(3, f64::INFINITY, BoundKind::Frobenius);
        let (grads, reached) = engine.backward_with_cutoff(&trace, 0, &policy).unwrap();
        assert_eq!(reached, 3);
        assert_eq!(grads.weight(1).max_abs(), 0.0);
        assert_eq!(grads.weight(2).max_abs(), 0.0);
        assert!(grads.weight(3).max_abs() > 0.0);
    }

    #[test]
    fn zero_thresholds_reproduce_full_backward() {
        let net = xor_demo_network(1.0);
        let engine = BoundEngine::new(&net);
        for kind in [BoundKind::Frobenius, BoundKind::Elementwise, BoundKind::ElementwiseLoose] {
            let policy = CutoffPolicy::uniform(3, 0.0, kind);
            let sample = TrainingSample::new(Vector::from_slice(&[0.8, -1.3]), 1);
            let trace = net.forward(&sample.x).unwrap();
            let (_, full) = net.backward(&trace, 1).unwrap();
            let (cut, reached) = engine.backward_with_cutoff(&trace, 1, &policy).unwrap();
            assert_eq!(reached, 1);
            assert_eq!(full, cut);
        }
    }

    #[test]
    fn reach_fractions_nested() {
        let net = xor_demo_network(1.0);
        let spec = GridSpec::square(3.0, 51);
        let policy = CutoffPolicy::standard(3, BoundKind::Frobenius);
        let f = reach_statistics(&net, &spec, &Labeling::XorQuadrant, &policy).unwrap();
        assert_eq!(f.len(), 3);
        assert!((f[2] - 1.0).abs() < 1e-12, "output layer reach is total");
        assert!(f[0] <= f[1] && f[1] <= f[2]);
    }

    #[test]
    fn raising_thresholds_never_raises_reach() {
        let net = xor_demo_network(1.0);
        let spec = GridSpec::square(3.0, 41);
        let lo = CutoffPolicy::standard(3, BoundKind::Frobenius);
        let mut hi = lo.clone();
        hi.thresholds = vec![0.5; 3];
        let f_lo = reach_statistics(&net, &spec, &Labeling::XorQuadrant, &lo).unwrap();
        let f_hi = reach_statistics(&net, &spec, &Labeling::XorQuadrant, &hi).unwrap();
        for (a, b) in f_hi.iter().zip(&f_lo) {
            assert!(a <= b);
        }
    }
}
