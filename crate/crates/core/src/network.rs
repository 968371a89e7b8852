//! Feedforward model, cross-entropy losses, and the exact per-sample
//! forward/backward pipeline.
//!
//! Layer `k` maps `x_{k-1}` to `x_k = act_k(A_k x_{k-1} - b_k)`; note the
//! minus sign on the bias, which propagates into `d f / d b_k = -y_k`. All
//! public layer indices are 1-based (`1..=n`), matching the report files.

use crate::activation::{log_sum_exp, neg_log_logistic, Activation};
use crate::dense::{Matrix, Vector};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    pub weights: Matrix<T>,
    pub bias: Vector<T>,
    pub activation: Activation<T>,
}

impl<T: Real> Layer<T> {
    pub fn new(weights: Matrix<T>, bias: Vector<T>, activation: Activation<T>) -> Result<Self> {
        if weights.rows() != bias.len() {
            return Err(Error::dim(
                "Layer::new",
                format!("{} weight rows vs bias length {}", weights.rows(), bias.len()),
            ));
        }
        activation.validate()?;
        Ok(Layer {
            weights,
            bias,
            activation,
        })
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }
}

/// A labeled feature point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample<T> {
    pub x: Vector<T>,
    pub class: usize,
}

impl<T: Real> TrainingSample<T> {
    pub fn new(x: Vector<T>, class: usize) -> Self {
        TrainingSample { x, class }
    }
}

/// Shape signature of a network; enough to rebuild one from a flat
/// parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkShape<T> {
    pub input_dim: usize,
    pub layers: Vec<(usize, usize, Activation<T>)>,
}

impl<T: Real> NetworkShape<T> {
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|&(r, c, _)| r * c + r).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    input_dim: usize,
    layers: Vec<Layer<T>>,
}

impl<T: Real> Network<T> {
    pub fn new(input_dim: usize, layers: Vec<Layer<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        let mut prev = input_dim;
        for (idx, layer) in layers.iter().enumerate() {
            if layer.in_dim() != prev {
                return Err(Error::dim(
                    "Network::new",
                    format!(
                        "layer {} expects input dim {}, previous produces {}",
                        idx + 1,
                        layer.in_dim(),
                        prev
                    ),
                ));
            }
            if matches!(layer.activation, Activation::Softmax) && idx + 1 != layers.len() {
                return Err(Error::Config(
                    "softmax is only supported as the final activation".into(),
                ));
            }
            prev = layer.out_dim();
        }
        Ok(Network { input_dim, layers })
    }

    /// Convenience constructor from per-layer weights, biases and
    /// activations.
    pub fn from_parts(input_dim: usize, parts: Vec<(Matrix<T>, Vector<T>, Activation<T>)>) -> Result<Self> {
        let mut layers = Vec::with_capacity(parts.len());
        for (weights, bias, act) in parts {
            layers.push(Layer::new(weights, bias, act)?);
        }
        Network::new(input_dim, layers)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// Layer `k`, 1-based.
    pub fn layer(&self, k: usize) -> &Layer<T> {
        &self.layers[k - 1]
    }

    pub fn layer_mut(&mut self, k: usize) -> &mut Layer<T> {
        &mut self.layers[k - 1]
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn shape(&self) -> NetworkShape<T> {
        NetworkShape {
            input_dim: self.input_dim,
            layers: self
                .layers
                .iter()
                .map(|l| (l.out_dim(), l.in_dim(), l.activation))
                .collect(),
        }
    }

    /// All weights and biases multiplied by `factor`; the amplification
    /// experiments sweep this.
    pub fn scaled_parameters(&self, factor: T) -> Network<T> {
        let layers = self
            .layers
            .iter()
            .map(|l| Layer {
                weights: l.weights.scaled(factor),
                bias: l.bias.scaled(factor),
                activation: l.activation,
            })
            .collect();
        Network {
            input_dim: self.input_dim,
            layers,
        }
    }

    pub fn param_count(&self) -> usize {
        self.shape().param_count()
    }

    /// Parameters as a flat vector: layer-major, weights row-major, then bias.
    pub fn flatten(&self) -> Vector<T> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(l.bias.as_slice());
        }
        Vector::from_vec(out)
    }

    /// Inverse of [`flatten`](Network::flatten) for a given shape.
    pub fn unflatten(shape: &NetworkShape<T>, s: &Vector<T>) -> Result<Network<T>> {
        if s.len() != shape.param_count() {
            return Err(Error::dim(
                "unflatten",
                format!("{} parameters for shape needing {}", s.len(), shape.param_count()),
            ));
        }
        let mut layers = Vec::with_capacity(shape.layers.len());
        let mut offset = 0;
        for &(rows, cols, act) in &shape.layers {
            let w = s.as_slice()[offset..offset + rows * cols].to_vec();
            offset += rows * cols;
            let b = s.as_slice()[offset..offset + rows].to_vec();
            offset += rows;
            layers.push(Layer::new(
                Matrix::from_vec(rows, cols, w)?,
                Vector::from_vec(b),
                act,
            )?);
        }
        Network::new(shape.input_dim, layers)
    }

    pub fn forward(&self, x0: &Vector<T>) -> Result<ForwardTrace<T>> {
        if x0.len() != self.input_dim {
            return Err(Error::dim(
                "forward",
                format!("input length {} vs input_dim {}", x0.len(), self.input_dim),
            ));
        }
        let mut trace = ForwardTrace::for_network(self);
        self.forward_into(x0.as_slice(), &mut trace);
        Ok(trace)
    }

    /// Forward pass into a reusable trace (shapes must match this network).
    pub fn forward_into(&self, x0: &[T], trace: &mut ForwardTrace<T>) {
        debug_assert_eq!(x0.len(), self.input_dim);
        trace.input.as_mut_slice().copy_from_slice(x0);
        for (k, layer) in self.layers.iter().enumerate() {
            let (before, tail) = trace.out.split_at_mut(k);
            let input = if k == 0 {
                trace.input.as_slice()
            } else {
                before[k - 1].as_slice()
            };
            let pre = trace.pre[k].as_mut_slice();
            layer.weights.matvec_into(input, pre);
            for (p, &b) in pre.iter_mut().zip(layer.bias.iter()) {
                *p = *p - b;
            }
            layer.activation.apply_into(pre, tail[0].as_mut_slice());
        }
    }

    /// Output of the final layer for a single input.
    pub fn posterior(&self, x0: &Vector<T>) -> Result<Vector<T>> {
        let trace = self.forward(x0)?;
        Ok(trace.out.last().unwrap().clone())
    }

    /// Argmax class of the posterior; ties resolve to the lowest index.
    pub fn predicted_class(&self, x0: &Vector<T>) -> Result<usize> {
        let p = self.posterior(x0)?;
        let mut best = 0;
        for i in 1..p.len() {
            if p[i] > p[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Cross-entropy loss `-log p(class | x)` for softmax heads, or the
    /// negative log of the logistic output for logistic heads.
    pub fn loss(&self, sample: &TrainingSample<T>) -> Result<T> {
        let trace = self.forward(&sample.x)?;
        self.loss_from_trace(&trace, sample.class)
    }

    pub fn loss_from_trace(&self, trace: &ForwardTrace<T>, class: usize) -> Result<T> {
        let v_n = trace.pre.last().unwrap();
        if class >= v_n.len() {
            return Err(Error::Config(format!(
                "class {} out of range for output dim {}",
                class,
                v_n.len()
            )));
        }
        match self.layers.last().unwrap().activation {
            Activation::Softmax => Ok(log_sum_exp(v_n.as_slice()) - v_n[class]),
            Activation::Logistic { gamma } => Ok(neg_log_logistic(gamma, v_n[class])),
            _ => Err(Error::Config(
                "loss needs a softmax or logistic final activation".into(),
            )),
        }
    }

    /// Full backward pass from a forward trace; returns the adjoints and the
    /// per-parameter gradients of the loss at `class`.
    pub fn backward(&self, trace: &ForwardTrace<T>, class: usize) -> Result<(BackwardTrace<T>, GradientSet<T>)> {
        let mut bwd = BackwardTrace::for_network(self);
        let mut grads = GradientSet::zeros_for(self);
        self.backward_into(trace, class, &mut bwd, &mut grads, false)?;
        Ok((bwd, grads))
    }

    /// Backward pass into reusable buffers. With `accumulate` the gradient
    /// blocks are added to rather than overwritten (batch averaging).
    pub fn backward_into(
        &self,
        trace: &ForwardTrace<T>,
        class: usize,
        bwd: &mut BackwardTrace<T>,
        grads: &mut GradientSet<T>,
        accumulate: bool,
    ) -> Result<()> {
        let n = self.layers.len();
        self.seed_output_adjoint(trace, class, bwd.y[n - 1].as_mut_slice())?;
        for k in (1..=n).rev() {
            self.accumulate_layer_gradient(trace, bwd, grads, k, accumulate);
            if k > 1 {
                self.step_adjoint_down(trace, bwd, k);
            }
        }
        Ok(())
    }

    /// `y_n = grad of the loss with respect to the final pre-activation`.
    pub(crate) fn seed_output_adjoint(&self, trace: &ForwardTrace<T>, class: usize, y_n: &mut [T]) -> Result<()> {
        let v_n = trace.pre.last().unwrap();
        if class >= v_n.len() {
            return Err(Error::Config(format!(
                "class {} out of range for output dim {}",
                class,
                v_n.len()
            )));
        }
        match self.layers.last().unwrap().activation {
            Activation::Softmax => {
                // softmax(v) - onehot(class); validated against finite
                // differences before being relied on.
                Activation::Softmax.apply_into(v_n.as_slice(), y_n);
                y_n[class] = y_n[class] - T::one();
            }
            Activation::Logistic { gamma } => {
                for y in y_n.iter_mut() {
                    *y = T::zero();
                }
                y_n[class] = crate::activation::neg_log_logistic_prime(gamma, v_n[class]);
            }
            _ => {
                return Err(Error::Config(
                    "backward needs a softmax or logistic final activation".into(),
                ))
            }
        }
        Ok(())
    }

    /// Gradient blocks for layer `k`: `dA_k[i][j] = x_{k-1}[j] y_k[i]`,
    /// `db_k = -y_k`.
    pub(crate) fn accumulate_layer_gradient(
        &self,
        trace: &ForwardTrace<T>,
        bwd: &BackwardTrace<T>,
        grads: &mut GradientSet<T>,
        k: usize,
        accumulate: bool,
    ) {
        let x_prev = trace.layer_input(k);
        let y_k = bwd.y[k - 1].as_slice();
        let dw = &mut grads.weights[k - 1];
        let db = &mut grads.bias[k - 1];
        for (i, &yi) in y_k.iter().enumerate() {
            let row = dw.row_mut(i);
            if accumulate {
                for (d, &xj) in row.iter_mut().zip(x_prev) {
                    *d = *d + xj * yi;
                }
                db[i] = db[i] - yi;
            } else {
                for (d, &xj) in row.iter_mut().zip(x_prev) {
                    *d = xj * yi;
                }
                db[i] = -yi;
            }
        }
    }

    /// `z_k = A_k^T y_k`, then `y_{k-1} = act'_{k-1}(v_{k-1}) .* z_k`.
    pub(crate) fn step_adjoint_down(&self, trace: &ForwardTrace<T>, bwd: &mut BackwardTrace<T>, k: usize) {
        let layer = &self.layers[k - 1];
        let (ys, zs) = (&mut bwd.y, &mut bwd.z);
        let z_k = zs[k - 2].as_mut_slice();
        layer.weights.transpose_matvec_into(ys[k - 1].as_slice(), z_k);
        let v_prev = trace.pre[k - 2].as_slice();
        let y_prev = ys[k - 2].as_mut_slice();
        self.layers[k - 2].activation.derivative_into(v_prev, y_prev);
        for (y, &z) in y_prev.iter_mut().zip(z_k.iter()) {
            *y = *y * z;
        }
    }

    /// Mean loss and mean gradient over a nonempty sample set.
    ///
    /// Samples are processed in fixed-size chunks whose partial sums are
    /// combined in chunk order, so the result does not depend on how many
    /// worker threads are available.
    pub fn batch_gradient(&self, samples: &[TrainingSample<T>]) -> Result<(T, GradientSet<T>)> {
        use rayon::prelude::*;

        if samples.is_empty() {
            return Err(Error::Config("batch_gradient: empty training set".into()));
        }
        for s in samples {
            if s.x.len() != self.input_dim {
                return Err(Error::dim("batch_gradient", "sample dimension mismatch"));
            }
            if s.class >= self.output_dim() {
                return Err(Error::Config(format!("class {} out of range", s.class)));
            }
        }

        const CHUNK: usize = 256;
        let partials: Vec<Result<(T, GradientSet<T>)>> = samples
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut trace = ForwardTrace::for_network(self);
                let mut bwd = BackwardTrace::for_network(self);
                let mut grads = GradientSet::zeros_for(self);
                let mut loss_sum = T::zero();
                for s in chunk {
                    self.forward_into(s.x.as_slice(), &mut trace);
                    loss_sum = loss_sum + self.loss_from_trace(&trace, s.class)?;
                    self.backward_into(&trace, s.class, &mut bwd, &mut grads, true)?;
                }
                Ok((loss_sum, grads))
            })
            .collect();

        let mut total = GradientSet::zeros_for(self);
        let mut loss_sum = T::zero();
        for p in partials {
            let (l, g) = p?;
            loss_sum = loss_sum + l;
            total.add_scaled(T::one(), &g);
        }
        let inv = T::one() / T::from_usize(samples.len());
        total.scale(inv);
        Ok((loss_sum * inv, total))
    }

    /// Mean loss over a nonempty sample set (forward passes only), chunked
    /// like [`batch_gradient`](Network::batch_gradient).
    pub fn batch_loss(&self, samples: &[TrainingSample<T>]) -> Result<T> {
        use rayon::prelude::*;

        if samples.is_empty() {
            return Err(Error::Config("batch_loss: empty training set".into()));
        }
        const CHUNK: usize = 256;
        let partials: Vec<Result<T>> = samples
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut trace = ForwardTrace::for_network(self);
                let mut sum = T::zero();
                for s in chunk {
                    self.forward_into(s.x.as_slice(), &mut trace);
                    sum = sum + self.loss_from_trace(&trace, s.class)?;
                }
                Ok(sum)
            })
            .collect();
        let mut total = T::zero();
        for p in partials {
            total = total + p?;
        }
        Ok(total / T::from_usize(samples.len()))
    }

    /// Fresh network with i.i.d. standard normal weights and biases.
    pub fn random(input_dim: usize, layer_dims: &[usize], acts: &[Activation<T>], rng: &mut Rng) -> Result<Network<T>> {
        assert_eq!(layer_dims.len(), acts.len());
        let mut layers = Vec::new();
        let mut prev = input_dim;
        for (&dim, &act) in layer_dims.iter().zip(acts) {
            layers.push(Layer::new(
                rng.gauss_matrix::<T>(dim, prev),
                rng.gauss::<T>(dim),
                act,
            )?);
            prev = dim;
        }
        Network::new(input_dim, layers)
    }
}

/// Per-layer pre-activations `v_k` and outputs `x_k`, plus the input `x_0`.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    pub input: Vector<T>,
    pub pre: Vec<Vector<T>>,
    pub out: Vec<Vector<T>>,
}

impl<T: Real> ForwardTrace<T> {
    pub fn for_network(net: &Network<T>) -> Self {
        ForwardTrace {
            input: Vector::zeros(net.input_dim()),
            pre: net.layers().iter().map(|l| Vector::zeros(l.out_dim())).collect(),
            out: net.layers().iter().map(|l| Vector::zeros(l.out_dim())).collect(),
        }
    }

    /// `v_k`, 1-based.
    pub fn pre_activation(&self, k: usize) -> &Vector<T> {
        &self.pre[k - 1]
    }

    /// `x_k`, 1-based; `k = 0` is the input.
    pub fn output(&self, k: usize) -> &Vector<T> {
        if k == 0 {
            &self.input
        } else {
            &self.out[k - 1]
        }
    }

    /// `x_{k-1}` as a slice: the input feeding layer `k`.
    pub fn layer_input(&self, k: usize) -> &[T] {
        if k == 1 {
            self.input.as_slice()
        } else {
            self.out[k - 2].as_slice()
        }
    }
}

/// Adjoints of the backward pass: `y_k` for `k = 1..=n` and `z_k = A_k^T y_k`
/// for `k = 2..=n`.
#[derive(Debug, Clone)]
pub struct BackwardTrace<T> {
    pub y: Vec<Vector<T>>,
    pub z: Vec<Vector<T>>,
}

impl<T: Real> BackwardTrace<T> {
    pub fn for_network(net: &Network<T>) -> Self {
        let y = net.layers().iter().map(|l| Vector::zeros(l.out_dim())).collect();
        let z = net
            .layers()
            .iter()
            .skip(1)
            .map(|l| Vector::zeros(l.in_dim()))
            .collect();
        BackwardTrace { y, z }
    }

    /// `y_k`, 1-based.
    pub fn adjoint_y(&self, k: usize) -> &Vector<T> {
        &self.y[k - 1]
    }

    /// `z_k`, defined for `k >= 2`.
    pub fn adjoint_z(&self, k: usize) -> &Vector<T> {
        assert!(k >= 2, "z is defined for layers 2..=n");
        &self.z[k - 2]
    }
}

/// Per-layer loss gradients with respect to weights and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet<T> {
    pub weights: Vec<Matrix<T>>,
    pub bias: Vec<Vector<T>>,
}

impl<T: Real> GradientSet<T> {
    pub fn zeros_for(net: &Network<T>) -> Self {
        GradientSet {
            weights: net
                .layers()
                .iter()
                .map(|l| Matrix::zeros(l.out_dim(), l.in_dim()))
                .collect(),
            bias: net.layers().iter().map(|l| Vector::zeros(l.out_dim())).collect(),
        }
    }

    /// `dA_k`, 1-based.
    pub fn weight(&self, k: usize) -> &Matrix<T> {
        &self.weights[k - 1]
    }

    /// `db_k`, 1-based.
    pub fn bias(&self, k: usize) -> &Vector<T> {
        &self.bias[k - 1]
    }

    pub fn scale(&mut self, c: T) {
        for w in &mut self.weights {
            w.scale(c);
        }
        for b in &mut self.bias {
            b.scale(c);
        }
    }

    pub fn add_scaled(&mut self, c: T, other: &GradientSet<T>) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            a.add_scaled(c, b);
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            a.add_scaled(c, b);
        }
    }

    /// Largest absolute entry over all blocks; zero-gradient detection.
    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for w in &self.weights {
            m = m.max(w.max_abs());
        }
        for b in &self.bias {
            m = m.max(b.norm_inf());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::{logistic, sigma};

    fn demo_net() -> Network<f64> {
        crate::presets::xor_demo_network(1.0)
    }

    #[test]
    fn forward_demo_at_origin() {
        let net = demo_net();
        let trace = net.forward(&Vector::from_slice(&[0.0, 0.0])).unwrap();
        let v1 = trace.pre_activation(1);
        assert!((v1[0] - 1.0).abs() < 1e-15);
        assert!((v1[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn forward_zero_weight_layer() {
        let net = Network::from_parts(
            2,
            vec![(
                Matrix::from_rows(&[[0.0, 0.0], [0.0, 0.0]]),
                Vector::from_slice(&[0.0, 0.0]),
                Activation::sigmoid(1.0),
            )],
        )
        .unwrap();
        let trace = net.forward(&Vector::from_slice(&[3.0, -4.0])).unwrap();
        assert_eq!(trace.output(1).as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn forward_single_unit_profile() {
        // One unit sigma(<a, x> - 0) along the x-axis.
        let net = Network::from_parts(
            2,
            vec![(
                Matrix::from_rows(&[[1.5, 0.5]]),
                Vector::from_slice(&[0.0]),
                Activation::sigmoid(1.0),
            )],
        )
        .unwrap();
        for &x in &[-2.0, -0.5, 0.0, 0.7, 2.0] {
            let t = net.forward(&Vector::from_slice(&[x, 0.0])).unwrap();
            assert!((t.output(1)[0] - sigma(1.0_f64, 1.5 * x)).abs() < 1e-15);
        }
    }

    #[test]
    fn loss_uniform_posterior() {
        let net = Network::from_parts(
            2,
            vec![(
                Matrix::identity(2),
                Vector::from_slice(&[0.0, 0.0]),
                Activation::Softmax,
            )],
        )
        .unwrap();
        let s = TrainingSample::new(Vector::from_slice(&[0.0, 0.0]), 0);
        let f = net.loss(&s).unwrap();
        assert!((f - 2.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn loss_monotone_in_own_logit() {
        let net = Network::from_parts(
            2,
            vec![(
                Matrix::identity(2),
                Vector::from_slice(&[0.0, 0.0]),
                Activation::Softmax,
            )],
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for &v in &[0.0, 0.5, 1.0, 2.0, 4.0] {
            let s = TrainingSample::new(Vector::from_slice(&[v, 0.0]), 0);
            let f = net.loss(&s).unwrap();
            assert!(f < prev);
            prev = f;
        }
    }

    #[test]
    fn motivational_net_at_origin() {
        let net = crate::presets::motivational_1d_network(1.0, 0.0);
        let s = TrainingSample::new(Vector::from_slice(&[0.0]), 0);
        let trace = net.forward(&s.x).unwrap();
        let p = trace.output(2)[0];
        assert!((p - logistic(5.0, sigma(1.0, 0.0))).abs() < 1e-15);
        assert!((p - 0.5).abs() < 1e-15);
        assert!((net.loss(&s).unwrap() - 2.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn bias_gradient_is_negated_adjoint() {
        let net = demo_net();
        let trace = net.forward(&Vector::from_slice(&[0.4, -0.9])).unwrap();
        let (bwd, grads) = net.backward(&trace, 0).unwrap();
        for k in 1..=3 {
            let y = bwd.adjoint_y(k);
            let db = grads.bias(k);
            for i in 0..y.len() {
                assert_eq!(db[i], -y[i]);
            }
        }
    }

    #[test]
    fn softmax_adjoint_sums_to_zero() {
        let net = demo_net();
        for &p in &[[0.3, 0.7], [-1.2, 2.0], [2.5, -2.5]] {
            let trace = net.forward(&Vector::from_slice(&p)).unwrap();
            let (bwd, _) = net.backward(&trace, 1).unwrap();
            let y3: f64 = bwd.adjoint_y(3).iter().sum();
            assert!(y3.abs() < 1e-12);
        }
    }

    #[test]
    fn batch_of_one_matches_backward() {
        let net = demo_net();
        let s = TrainingSample::new(Vector::from_slice(&[0.7, 0.2]), 1);
        let trace = net.forward(&s.x).unwrap();
        let (_, single) = net.backward(&trace, 1).unwrap();
        let (loss, batch) = net.batch_gradient(std::slice::from_ref(&s)).unwrap();
        assert_eq!(single, batch);
        assert!((loss - net.loss(&s).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn duplicated_batch_is_mean_invariant() {
        let net = demo_net();
        let s = TrainingSample::new(Vector::from_slice(&[-0.3, 1.1]), 0);
        let (l1, g1) = net.batch_gradient(&[s.clone()]).unwrap();
        let (l2, g2) = net.batch_gradient(&[s.clone(), s]).unwrap();
        assert!((l1 - l2).abs() < 1e-15);
        for k in 1..=3 {
            let a = g1.weight(k);
            let b = g2.weight(k);
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    assert!((a.get(i, j) - b.get(i, j)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn empty_batch_rejected() {
        let net = demo_net();
        assert!(net.batch_gradient(&[]).is_err());
    }

    #[test]
    fn flatten_round_trip_bit_exact() {
        let mut rng = Rng::new(5);
        let net = Network::<f64>::random(
            3,
            &[4, 2],
            &[Activation::sigmoid(2.0), Activation::Softmax],
            &mut rng,
        )
        .unwrap();
        let s = net.flatten();
        assert_eq!(s.len(), 3 * 4 + 4 + 4 * 2 + 2);
        let rebuilt = Network::unflatten(&net.shape(), &s).unwrap();
        assert_eq!(net, rebuilt);

        // Perturbing one coordinate changes exactly one parameter.
        let mut s2 = s.clone();
        s2[5] += 0.25;
        let bumped = Network::unflatten(&net.shape(), &s2).unwrap();
        let delta: Vec<f64> = bumped
            .flatten()
            .iter()
            .zip(s.iter())
            .map(|(a, b)| a - b)
            .collect();
        assert_eq!(delta.iter().filter(|d| **d != 0.0).count(), 1);

        let short = Vector::zeros(3);
        assert!(Network::unflatten(&net.shape(), &short).is_err());
    }

    #[test]
    fn hidden_softmax_rejected() {
        let bad = Network::from_parts(
            2,
            vec![
                (
                    Matrix::identity(2),
                    Vector::from_slice(&[0.0, 0.0]),
                    Activation::Softmax,
                ),
                (
                    Matrix::from_rows(&[[1.0, 1.0]]),
                    Vector::from_slice(&[0.0]),
                    Activation::sigmoid(1.0),
                ),
            ],
        );
        assert!(bad.is_err());
    }
}
