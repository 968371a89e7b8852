//! Declarative run configurations, one schema per subcommand.
//!
//! Configs are JSON with unknown keys rejected; the `--seed` and `--out`
//! flags override the corresponding file values.

use regionlab_core::field::{FieldQuantity, GridSpec, Labeling};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    /// Named artifact preset (`fig2`, `fig5`, `fig6`, `fig7`, `fig8`,
    /// `fig10`, `fig11`); mutually exclusive with the custom fields below.
    pub preset: Option<String>,
    pub network: Option<PathBuf>,
    pub grid: Option<GridSpec>,
    pub quantities: Vec<FieldQuantity>,
    pub labeling: Option<Labeling>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Experiment preset: `density`, `width`, `norms-growth`,
    /// `regularization-compare`, `rotate-boundary`, `motivational-1d`.
    pub preset: String,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub iterations: Option<usize>,
    pub learning_rate: Option<f64>,
    pub record_every: Option<usize>,
    pub extent: Option<f64>,
    pub init_norm: Option<f64>,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub angle_deg: Option<f64>,
    pub early_stop_zero_area: Option<bool>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RegionsConfig {
    /// Named artifact preset (`fig3`, `fig4`, `fig9`); mutually exclusive
    /// with `pipeline` and `count_regions`.
    pub preset: Option<String>,
    pub pipeline: Option<PipelineConfig>,
    pub count_regions: Option<CountRegionsConfig>,
    pub grid: Option<GridSpec>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountRegionsConfig {
    pub n: usize,
    pub d: usize,
}

/// Operator pipeline: a first layer of hyperplanes, then one layer per entry
/// of `layers`, each unit realizing one Boolean operation over selected
/// previous-layer units.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub first_layer: FirstLayerConfig,
    #[serde(default)]
    pub layers: Vec<OpLayerConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstLayerConfig {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// Gain of the symmetric sigmoid.
    pub gamma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpLayerConfig {
    pub gamma: f64,
    pub ops: Vec<OpConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpConfig {
    /// `identity`, `complement`, `intersection`, `union`, `kofn`,
    /// `constant_true`, `constant_false`.
    pub op: String,
    /// Indices of the previous layer's units this operation consumes.
    #[serde(default)]
    pub inputs: Vec<usize>,
    pub k: Option<usize>,
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PartialBpConfig {
    /// `fig12` runs the demo network at scales 1, 2, 3.
    pub preset: Option<String>,
    pub network: Option<PathBuf>,
    pub scales: Option<Vec<f64>>,
    pub grid: Option<GridSpec>,
    /// Per-layer cutoff thresholds (layer 1 first); defaults to 0.05 on the
    /// first layer and 0.01 on the deeper hidden layers.
    pub thresholds: Option<Vec<f64>>,
    /// Bound variants to run: `frobenius`, `elementwise`, `elementwise_loose`.
    pub variants: Option<Vec<String>>,
    pub labeling: Option<Labeling>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TverbergConfig {
    pub d: usize,
    pub n: usize,
    #[serde(default)]
    pub lift: bool,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}
