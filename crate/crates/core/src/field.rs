//! Sampling of per-point quantities over a rectangular grid in 2-D feature
//! space: layer outputs, derivative masks, adjoints, gradient components,
//! losses, posteriors, region indicators.
//!
//! Grid nodes sit at cell centers so symmetric configurations never evaluate
//! exactly on a zero level set. Rows are evaluated in parallel; the values at
//! each node depend only on that node, so the result is identical regardless
//! of scheduling.

use crate::error::{Error, Result};
use crate::network::{BackwardTrace, ForwardTrace, GradientSet, Network};
use crate::presets::xor_quadrant_class;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Rectangular grid over `[xmin, xmax] x [ymin, ymax]` with `nx * ny` nodes
/// at cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64, nx: usize, ny: usize) -> Result<Self> {
        let spec = GridSpec {
            xmin,
            xmax,
            ymin,
            ymax,
            nx,
            ny,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Square grid centered like the demo figures: `[-half, half]^2`.
    pub fn square(half: f64, n: usize) -> Self {
        GridSpec::new(-half, half, -half, half, n, n).expect("square grid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xmax > self.xmin && self.ymax > self.ymin) {
            return Err(Error::Config("grid extents must be increasing".into()));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::Config("grid needs nx, ny >= 2".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn x_at(&self, i: usize) -> f64 {
        self.xmin + (i as f64 + 0.5) * (self.xmax - self.xmin) / self.nx as f64
    }

    #[inline]
    pub fn y_at(&self, j: usize) -> f64 {
        self.ymin + (j as f64 + 0.5) * (self.ymax - self.ymin) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        (self.xmax - self.xmin) / self.nx as f64 * (self.ymax - self.ymin) / self.ny as f64
    }

    pub fn domain_area(&self) -> f64 {
        (self.xmax - self.xmin) * (self.ymax - self.ymin)
    }

    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }
}

/// Ground-truth class assignment over the feature plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Labeling {
    /// The same class everywhere.
    Fixed { class: usize },
    /// `left_class` where x < 0, `right_class` where x > 0.
    VerticalSplit { left_class: usize, right_class: usize },
    /// Checkerboard quadrants: class 0 where x and y have opposite signs.
    XorQuadrant,
}

impl Labeling {
    pub fn class_at(&self, x: f64, y: f64) -> usize {
        match *self {
            Labeling::Fixed { class } => class,
            Labeling::VerticalSplit {
                left_class,
                right_class,
            } => {
                if x < 0.0 {
                    left_class
                } else {
                    right_class
                }
            }
            Labeling::XorQuadrant => xor_quadrant_class(x, y),
        }
    }

    pub fn split() -> Self {
        Labeling::VerticalSplit {
            left_class: 0,
            right_class: 1,
        }
    }
}

/// What to sample at each grid node. Layer indices are 1-based; unit, row and
/// column indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldQuantity {
    /// `x_k[unit]`.
    LayerOutput { layer: usize, unit: usize },
    /// `v_k[unit]`.
    PreActivation { layer: usize, unit: usize },
    /// Derivative mask `act_k'(v_k[unit])`.
    Mask { layer: usize, unit: usize },
    /// `|y_k[unit]|`.
    AdjointY { layer: usize, unit: usize },
    /// `|z_k[unit]|`, defined for `layer >= 2`.
    AdjointZ { layer: usize, unit: usize },
    /// `|d f / d A_k[row, col]|`.
    GradWeight { layer: usize, row: usize, col: usize },
    /// `|d f / d b_k[row]|`.
    GradBias { layer: usize, row: usize },
    /// `max_{i,j} |d f / d A_k[i, j]|`.
    MaxGradWeight { layer: usize },
    /// Loss at the ground-truth class.
    Loss,
    /// Posterior probability of `class`.
    Posterior { class: usize },
    /// 1 where the posterior of `class` is at least `tau`, else 0.
    RegionIndicator { class: usize, tau: f64 },
}

impl FieldQuantity {
    pub fn needs_backward(&self) -> bool {
        matches!(
            self,
            FieldQuantity::AdjointY { .. }
                | FieldQuantity::AdjointZ { .. }
                | FieldQuantity::GradWeight { .. }
                | FieldQuantity::GradBias { .. }
                | FieldQuantity::MaxGradWeight { .. }
        )
    }

    pub fn needs_labels(&self) -> bool {
        self.needs_backward() || matches!(self, FieldQuantity::Loss)
    }

    /// Stable lowercase identifier for file names.
    pub fn slug(&self) -> String {
        match *self {
            FieldQuantity::LayerOutput { layer, unit } => format!("layer_output_{layer}_{unit}"),
            FieldQuantity::PreActivation { layer, unit } => format!("pre_activation_{layer}_{unit}"),
            FieldQuantity::Mask { layer, unit } => format!("mask_{layer}_{unit}"),
            FieldQuantity::AdjointY { layer, unit } => format!("adjoint_y_{layer}_{unit}"),
            FieldQuantity::AdjointZ { layer, unit } => format!("adjoint_z_{layer}_{unit}"),
            FieldQuantity::GradWeight { layer, row, col } => format!("grad_weight_{layer}_{row}_{col}"),
            FieldQuantity::GradBias { layer, row } => format!("grad_bias_{layer}_{row}"),
            FieldQuantity::MaxGradWeight { layer } => format!("max_grad_weight_{layer}"),
            FieldQuantity::Loss => "loss".into(),
            FieldQuantity::Posterior { class } => format!("posterior_{class}"),
            FieldQuantity::RegionIndicator { class, .. } => format!("region_indicator_{class}"),
        }
    }

    fn validate(&self, net: &Network<f64>) -> Result<()> {
        let n = net.n_layers();
        let check_layer_unit = |layer: usize, unit: usize| -> Result<()> {
            if layer < 1 || layer > n {
                return Err(Error::Config(format!("layer {layer} out of range 1..={n}")));
            }
            if unit >= net.layer(layer).out_dim() {
                return Err(Error::Config(format!(
                    "unit {unit} out of range for layer {layer}"
                )));
            }
            Ok(())
        };
        match *self {
            FieldQuantity::LayerOutput { layer, unit }
            | FieldQuantity::PreActivation { layer, unit }
            | FieldQuantity::Mask { layer, unit }
            | FieldQuantity::AdjointY { layer, unit } => check_layer_unit(layer, unit),
            FieldQuantity::AdjointZ { layer, unit } => {
                if layer < 2 {
                    return Err(Error::Config("adjoint z is defined for layers >= 2".into()));
                }
                check_layer_unit(layer, 0)?;
                if unit >= net.layer(layer).in_dim() {
                    return Err(Error::Config(format!(
                        "unit {unit} out of range for z at layer {layer}"
                    )));
                }
                Ok(())
            }
            FieldQuantity::GradWeight { layer, row, col } => {
                check_layer_unit(layer, row)?;
                if col >= net.layer(layer).in_dim() {
                    return Err(Error::Config(format!(
                        "column {col} out of range for layer {layer}"
                    )));
                }
                Ok(())
            }
            FieldQuantity::GradBias { layer, row } => check_layer_unit(layer, row),
            FieldQuantity::MaxGradWeight { layer } => check_layer_unit(layer, 0),
            FieldQuantity::Posterior { class } | FieldQuantity::RegionIndicator { class, .. } => {
                if class >= net.output_dim() {
                    return Err(Error::Config(format!("class {class} out of range")));
                }
                Ok(())
            }
            FieldQuantity::Loss => Ok(()),
        }
    }
}

/// A quantity sampled on a grid; `values[j * nx + i]` holds the node at
/// `(x_at(i), y_at(j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub name: String,
}

impl FieldMap {
    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.nx + i]
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// Evaluate an arbitrary function of the plane on a grid.
pub fn eval_fn_field(spec: &GridSpec, name: &str, f: impl Fn(f64, f64) -> f64 + Sync) -> FieldMap {
    let mut values = vec![0.0; spec.n_nodes()];
    values
        .par_chunks_mut(spec.nx)
        .enumerate()
        .for_each(|(j, row)| {
            let y = spec.y_at(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v = f(spec.x_at(i), y);
            }
        });
    FieldMap {
        spec: *spec,
        values,
        name: name.into(),
    }
}

/// Sample `quantity` for `net` over `spec`. Gradient, adjoint and loss
/// quantities need a ground-truth `labels` assignment and report absolute
/// values; outputs and pre-activations keep their sign.
pub fn eval_field(
    net: &Network<f64>,
    spec: &GridSpec,
    quantity: FieldQuantity,
    labels: Option<&Labeling>,
) -> Result<FieldMap> {
    spec.validate()?;
    if net.input_dim() != 2 {
        return Err(Error::Config("field evaluation needs a 2-D input network".into()));
    }
    quantity.validate(net)?;
    if quantity.needs_labels() && labels.is_none() {
        return Err(Error::Config(format!(
            "quantity {:?} needs a ground-truth labeling",
            quantity
        )));
    }

    let mut values = vec![0.0; spec.n_nodes()];
    let failed = std::sync::atomic::AtomicBool::new(false);
    values
        .par_chunks_mut(spec.nx)
        .enumerate()
        .for_each(|(j, row)| {
            let y = spec.y_at(j);
            let mut trace = ForwardTrace::for_network(net);
            let mut bwd = BackwardTrace::for_network(net);
            let mut grads = GradientSet::zeros_for(net);
            for (i, out) in row.iter_mut().enumerate() {
                let x = spec.x_at(i);
                net.forward_into(&[x, y], &mut trace);
                let r = eval_node(net, &trace, &mut bwd, &mut grads, quantity, labels, x, y);
                match r {
                    Ok(v) => *out = v,
                    Err(_) => failed.store(true, std::sync::atomic::Ordering::Relaxed),
                }
            }
        });
    if failed.load(std::sync::atomic::Ordering::Relaxed) {
        return Err(Error::Config("field evaluation failed at a grid node".into()));
    }
    Ok(FieldMap {
        spec: *spec,
        values,
        name: quantity.slug(),
    })
}

#[allow(clippy::too_many_arguments)]
fn eval_node(
    net: &Network<f64>,
    trace: &ForwardTrace<f64>,
    bwd: &mut BackwardTrace<f64>,
    grads: &mut GradientSet<f64>,
    quantity: FieldQuantity,
    labels: Option<&Labeling>,
    x: f64,
    y: f64,
) -> Result<f64> {
    if quantity.needs_backward() {
        let class = labels.unwrap().class_at(x, y);
        net.backward_into(trace, class, bwd, grads, false)?;
    }
    Ok(match quantity {
        FieldQuantity::LayerOutput { layer, unit } => trace.output(layer)[unit],
        FieldQuantity::PreActivation { layer, unit } => trace.pre_activation(layer)[unit],
        FieldQuantity::Mask { layer, unit } => {
            let v = trace.pre_activation(layer)[unit];
            let mut out = [0.0];
            net.layer(layer).activation.derivative_into(&[v], &mut out);
            out[0]
        }
        FieldQuantity::AdjointY { layer, unit } => bwd.adjoint_y(layer)[unit].abs(),
        FieldQuantity::AdjointZ { layer, unit } => bwd.adjoint_z(layer)[unit].abs(),
        FieldQuantity::GradWeight { layer, row, col } => grads.weight(layer).get(row, col).abs(),
        FieldQuantity::GradBias { layer, row } => grads.bias(layer)[row].abs(),
        FieldQuantity::MaxGradWeight { layer } => grads.weight(layer).max_abs(),
        FieldQuantity::Loss => {
            let class = labels.unwrap().class_at(x, y);
            net.loss_from_trace(trace, class)?
        }
        FieldQuantity::Posterior { class } => trace.output(net.n_layers())[class],
        FieldQuantity::RegionIndicator { class, tau } => {
            if trace.output(net.n_layers())[class] >= tau {
                1.0
            } else {
                0.0
            }
        }
    })
}

/// Fraction of grid nodes whose value exceeds `threshold`.
pub fn fraction_above(map: &FieldMap, threshold: f64) -> f64 {
    let hits = map.values.iter().filter(|&&v| v > threshold).count();
    hits as f64 / map.values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::{sigma, sigma_prime, Activation};

    fn single_unit_net() -> Network<f64> {
        Network::from_parts(
            2,
            vec![(
                crate::Matrix::from_rows(&[[1.5, 0.5]]),
                crate::Vector::from_slice(&[0.0]),
                Activation::sigmoid(1.0),
            )],
        )
        .unwrap()
    }

    #[test]
    fn layer_output_antisymmetric_about_hyperplane() {
        let net = single_unit_net();
        let spec = GridSpec::square(3.0, 41);
        let map = eval_field(&net, &spec, FieldQuantity::LayerOutput { layer: 1, unit: 0 }, None).unwrap();
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                let (x, y) = (spec.x_at(i), spec.y_at(j));
                let expect = sigma(1.0, 1.5 * x + 0.5 * y);
                assert!((map.value(i, j) - expect).abs() < 1e-14);
                // Mirror node value is the negative.
                let mi = spec.nx - 1 - i;
                let mj = spec.ny - 1 - j;
                assert!((map.value(i, j) + map.value(mi, mj)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mask_peaks_on_hyperplane() {
        let net = single_unit_net();
        let spec = GridSpec::square(3.0, 101);
        let map = eval_field(&net, &spec, FieldQuantity::Mask { layer: 1, unit: 0 }, None).unwrap();
        let mut best = (0, 0);
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                if map.value(i, j) > map.value(best.0, best.1) {
                    best = (i, j);
                }
            }
        }
        let (x, y) = (spec.x_at(best.0), spec.y_at(best.1));
        // Max of sigma' sits on <a, x> = 0.
        assert!((1.5 * x + 0.5 * y).abs() < 0.1, "peak at ({x}, {y})");
        assert!(map.value(best.0, best.1) <= sigma_prime(1.0, 0.0));
    }

    #[test]
    fn grad_bias_field_matches_adjoint_field() {
        let net = crate::presets::xor_demo_network(1.0);
        let spec = GridSpec::square(3.0, 31);
        let labels = Labeling::XorQuadrant;
        for unit in 0..2 {
            let g = eval_field(
                &net,
                &spec,
                FieldQuantity::GradBias { layer: 3, row: unit },
                Some(&labels),
            )
            .unwrap();
            let y = eval_field(
                &net,
                &spec,
                FieldQuantity::AdjointY { layer: 3, unit },
                Some(&labels),
            )
            .unwrap();
            for (a, b) in g.values.iter().zip(&y.values) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn max_grad_weight_is_pointwise_max() {
        let net = crate::presets::xor_demo_network(1.0);
        let spec = GridSpec::square(3.0, 21);
        let labels = Labeling::XorQuadrant;
        let maxmap = eval_field(&net, &spec, FieldQuantity::MaxGradWeight { layer: 2 }, Some(&labels)).unwrap();
        let mut from_parts = vec![0.0_f64; spec.n_nodes()];
        for row in 0..4 {
            for col in 0..2 {
                let part = eval_field(
                    &net,
                    &spec,
                    FieldQuantity::GradWeight { layer: 2, row, col },
                    Some(&labels),
                )
                .unwrap();
                for (m, &v) in from_parts.iter_mut().zip(&part.values) {
                    *m = m.max(v);
                }
            }
        }
        for (a, b) in maxmap.values.iter().zip(&from_parts) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn fraction_above_edge_cases() {
        let spec = GridSpec::square(1.0, 5);
        let zero = FieldMap {
            spec,
            values: vec![0.0; spec.n_nodes()],
            name: "zero".into(),
        };
        assert_eq!(fraction_above(&zero, 0.0), 0.0);
        let mut shifted = zero.clone();
        for v in &mut shifted.values {
            *v = 3.0;
        }
        assert_eq!(fraction_above(&shifted, 1.0), 1.0);
    }

    #[test]
    fn labels_required_for_gradient_quantities() {
        let net = crate::presets::xor_demo_network(1.0);
        let spec = GridSpec::square(3.0, 11);
        assert!(eval_field(&net, &spec, FieldQuantity::Loss, None).is_err());
        assert!(eval_field(&net, &spec, FieldQuantity::MaxGradWeight { layer: 1 }, None).is_err());
        // Out-of-range indices are rejected.
        assert!(eval_field(&net, &spec, FieldQuantity::LayerOutput { layer: 4, unit: 0 }, None).is_err());
        assert!(eval_field(&net, &spec, FieldQuantity::LayerOutput { layer: 1, unit: 5 }, None).is_err());
    }
}
