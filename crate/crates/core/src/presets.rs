//! Fixture networks used by the experiment presets and the test suite.
//!
//! Class conventions for the split-domain trainers: samples left of the
//! y-axis carry class 0 and samples to the right carry class 1, and the fixed
//! output layers are oriented so that the initial misclassified region is the
//! band between the y-axis and the first-layer hyperplane.

use crate::activation::Activation;
use crate::dense::{Matrix, Vector};
use crate::network::Network;

/// Three-layer two-class demo: two tilted halfspaces, their four pairwise
/// intersection cells, and a checkerboard readout. `scale` multiplies every
/// weight and bias (the amplification sweep).
pub fn xor_demo_network(scale: f64) -> Network<f64> {
    let net = Network::from_parts(
        2,
        vec![
            (
                Matrix::from_rows(&[[1.0, 0.3], [0.4, -1.0]]),
                Vector::from_slice(&[-1.0, 0.5]),
                Activation::sigmoid(3.0),
            ),
            (
                Matrix::from_rows(&[[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]),
                Vector::from_slice(&[1.0, 1.0, 1.0, 1.0]),
                Activation::sigmoid(3.0),
            ),
            (
                Matrix::from_rows(&[[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]]),
                Vector::from_slice(&[-1.1, -1.1]),
                Activation::Softmax,
            ),
        ],
    )
    .expect("fixture network");
    net.scaled_parameters(scale)
}

/// Ground truth for [`xor_demo_network`]: class 0 on the off-diagonal
/// quadrants (x*y < 0), class 1 on the diagonal ones.
pub fn xor_quadrant_class(x: f64, y: f64) -> usize {
    if (x > 0.0) != (y > 0.0) {
        0
    } else {
        1
    }
}

/// One-dimensional two-layer net: a single hyperplane `alpha*x = beta`
/// followed by an identity-weight logistic head with gain 5.
pub fn motivational_1d_network(alpha: f64, beta: f64) -> Network<f64> {
    Network::from_parts(
        1,
        vec![
            (
                Matrix::from_rows(&[[alpha]]),
                Vector::from_slice(&[beta]),
                Activation::sigmoid(1.0),
            ),
            (
                Matrix::from_rows(&[[1.0]]),
                Vector::from_slice(&[0.0]),
                Activation::logistic(5.0),
            ),
        ],
    )
    .expect("fixture network")
}

/// First layer for the Boolean set-operation demos: two sharp halfspaces.
pub fn boolean_demo_first_layer() -> (Vec<Vec<f64>>, Vec<f64>, f64) {
    (vec![vec![9.0, 1.0], vec![-2.0, 6.0]], vec![-2.0, -1.0], 3.0)
}

/// Split-domain trainer net: one first-layer unit with row norm `init_norm`,
/// normal direction `[1, 0.3]`, hyperplane through `(through_x, 0)`, and a
/// frozen two-class readout.
pub fn split_domain_network(init_norm: f64, through_x: f64) -> Network<f64> {
    let unit = [1.0 / 1.09_f64.sqrt(), 0.3 / 1.09_f64.sqrt()];
    let a = [unit[0] * init_norm, unit[1] * init_norm];
    let b = a[0] * through_x;
    Network::from_parts(
        2,
        vec![
            (
                Matrix::from_rows(&[a]),
                Vector::from_slice(&[b]),
                Activation::sigmoid(1.0),
            ),
            (
                Matrix::from_rows(&[[-3.0], [3.0]]),
                Vector::from_slice(&[0.0, 0.0]),
                Activation::Softmax,
            ),
        ],
    )
    .expect("fixture network")
}

/// Three-layer variant for the wide-domain norm-growth run: the split-domain
/// net with an extra scalar middle layer.
pub fn extended_domain_network() -> Network<f64> {
    let unit = [1.0 / 1.09_f64.sqrt(), 0.3 / 1.09_f64.sqrt()];
    let b = unit[0] * 25.0;
    Network::from_parts(
        2,
        vec![
            (
                Matrix::from_rows(&[unit]),
                Vector::from_slice(&[b]),
                Activation::sigmoid(1.0),
            ),
            (
                Matrix::from_rows(&[[3.0]]),
                Vector::from_slice(&[0.0]),
                Activation::sigmoid(1.0),
            ),
            (
                Matrix::from_rows(&[[-3.0], [3.0]]),
                Vector::from_slice(&[0.0, 0.0]),
                Activation::Softmax,
            ),
        ],
    )
    .expect("fixture network")
}

/// Two-layer net whose first layer holds two weak diagonal units; the second
/// layer recombines them into a hyperplane at `angle_deg` degrees.
/// `first_layer_scale` sharpens the first layer, which distorts the
/// recombined boundary.
pub fn rotated_boundary_network(angle_deg: f64, first_layer_scale: f64) -> Network<f64> {
    let s = first_layer_scale;
    let phi = (angle_deg + 45.0).to_radians();
    Network::from_parts(
        2,
        vec![
            (
                Matrix::from_rows(&[[0.1 * s, -0.1 * s], [0.1 * s, 0.1 * s]]),
                Vector::from_slice(&[0.0, 0.0]),
                Activation::sigmoid(1.0),
            ),
            (
                Matrix::from_rows(&[[phi.cos(), phi.sin()]]),
                Vector::from_slice(&[0.0]),
                Activation::sigmoid(1.0),
            ),
        ],
    )
    .expect("fixture network")
}
