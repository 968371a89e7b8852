//! A feature-space laboratory for sigmoidal feedforward networks.
//!
//! The crate builds networks as explicit weight/bias layers, evaluates exact
//! forward/backward passes, constructs decision regions from Boolean layer
//! parameters, samples any per-point quantity over 2-D grids, runs
//! deterministic full-batch training experiments, and certifies partial
//! backpropagation through adjoint-norm bounds.
//!
//! Numeric kernels are generic over the scalar type through [`scalar::Real`]
//! (`f32` or `f64`); the aliases at the crate root pin the `f64`
//! instantiation that the experiment and export layers use.

pub mod activation;
pub mod dense;
pub mod error;
pub mod field;
pub mod geometry;
pub mod io;
pub mod network;
pub mod partialbp;
pub mod presets;
pub mod region;
pub mod rng;
pub mod scalar;
pub mod trainer;

pub use error::{Error, Result};
pub use rng::Rng;
pub use scalar::Real;

/// `f64` vector, the default scalar for experiments.
pub type Vector = dense::Vector<f64>;
pub type Matrix = dense::Matrix<f64>;
pub type Activation = activation::Activation<f64>;
pub type Layer = network::Layer<f64>;
pub type Network = network::Network<f64>;
pub type NetworkShape = network::NetworkShape<f64>;
pub type ForwardTrace = network::ForwardTrace<f64>;
pub type BackwardTrace = network::BackwardTrace<f64>;
pub type GradientSet = network::GradientSet<f64>;
pub type TrainingSample = network::TrainingSample<f64>;
pub type RegionOp = region::RegionOp<f64>;
pub type Primitive = region::Primitive<f64>;
pub type SubspaceFamily = geometry::SubspaceFamily<f64>;
pub type CutoffPolicy = partialbp::CutoffPolicy<f64>;
