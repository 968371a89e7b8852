//! Full-batch gradient descent with optional l2 regularization or per-row
//! norm constraints, split-domain experiment presets, and progress metrics.

use crate::error::{Error, Result};
use crate::field::{FieldMap, FieldQuantity, GridSpec, Labeling};
use crate::network::{Network, TrainingSample};
use crate::presets;
use crate::rng::Rng;
use crate::Vector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Penalty or constraint applied to the weight rows of selected layers
/// (1-based indices). Biases are never penalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer {
    None,
    /// Adds `lambda/2 * ||row||_2^2` per row: gradient `lambda * row`.
    L2 { lambda: f64, layers: BTreeSet<usize> },
    /// Adds `lambda * ||row||_1` per row (subgradient `lambda * sign`).
    /// Exposed for intermediate layers; no preset uses it.
    L1 { lambda: f64, layers: BTreeSet<usize> },
    /// Euclidean projection of each row onto `||row||_2 <= kappa` after
    /// every step.
    NormBall { kappa: f64, layers: BTreeSet<usize> },
}

impl Regularizer {
    fn validate(&self) -> Result<()> {
        match self {
            Regularizer::None => Ok(()),
            Regularizer::L2 { lambda, .. } | Regularizer::L1 { lambda, .. } => {
                if *lambda > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config("regularization weight must be > 0".into()))
                }
            }
            Regularizer::NormBall { kappa, .. } => {
                if *kappa > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config("norm-ball radius must be > 0".into()))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub frozen_layers: BTreeSet<usize>,
    pub reg: Regularizer,
    pub record_every: usize,
    pub seed: u64,
}

impl TrainerConfig {
    pub fn new(learning_rate: f64, iterations: usize) -> Self {
        TrainerConfig {
            learning_rate,
            iterations,
            frozen_layers: BTreeSet::new(),
            reg: Regularizer::None,
            record_every: 100,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be > 0".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be >= 1".into()));
        }
        self.reg.validate()
    }
}

/// One full-batch descent step `s <- s - alpha (grad phi + grad r)`, with
/// frozen layers' blocks zeroed and constrained rows projected back onto
/// their norm ball. Returns the (unpenalized) batch loss at the pre-step
/// parameters.
pub fn gd_step(net: &mut Network<f64>, samples: &[TrainingSample<f64>], cfg: &TrainerConfig) -> Result<f64> {
    cfg.validate()?;
    let (loss, mut grads) = net.batch_gradient(samples)?;

    match &cfg.reg {
        Regularizer::None => {}
        Regularizer::L2 { lambda, layers } => {
            for &k in layers {
                grads.weights[k - 1].add_scaled(*lambda, &net.layer(k).weights);
            }
        }
        Regularizer::L1 { lambda, layers } => {
            for &k in layers {
                let w = &net.layer(k).weights;
                let g = &mut grads.weights[k - 1];
                for i in 0..w.rows() {
                    for j in 0..w.cols() {
                        g.set(i, j, g.get(i, j) + lambda * w.get(i, j).signum());
                    }
                }
            }
        }
        Regularizer::NormBall { .. } => {}
    }

    let alpha = cfg.learning_rate;
    for k in 1..=net.n_layers() {
        if cfg.frozen_layers.contains(&k) {
            continue;
        }
        let layer = net.layer_mut(k);
        layer.weights.add_scaled(-alpha, &grads.weights[k - 1]);
        layer.bias.add_scaled(-alpha, &grads.bias[k - 1]);
    }

    if let Regularizer::NormBall { kappa, layers } = &cfg.reg {
        for &k in layers {
            let w = &mut net.layer_mut(k).weights;
            for i in 0..w.rows() {
                let norm = w.row_norm2(i);
                if norm > *kappa {
                    let f = *kappa / norm;
                    for v in w.row_mut(i) {
                        *v *= f;
                    }
                }
            }
        }
    }
    Ok(loss)
}

/// Area (domain units squared) where the argmax class disagrees with the
/// ground truth, over the rectangle of `spec`. Split-domain configurations
/// with a single first-layer unit take an exact geometric path; everything
/// else is estimated on the grid.
pub fn misclassified_area(net: &Network<f64>, truth: &Labeling, spec: &GridSpec) -> Result<f64> {
    if net.input_dim() != 2 {
        return Err(Error::Config("misclassified area needs a 2-D input network".into()));
    }
    if let Labeling::VerticalSplit {
        left_class,
        right_class,
    } = *truth
    {
        if let Some(area) = analytic_split_area(net, left_class, right_class, spec) {
            return Ok(area);
        }
    }
    misclassified_area_grid(net, truth, spec)
}

/// Grid estimate of the misclassified area: misclassified node count times
/// cell area.
pub fn misclassified_area_grid(net: &Network<f64>, truth: &Labeling, spec: &GridSpec) -> Result<f64> {
    spec.validate()?;
    let counts: Vec<Result<usize>> = (0..spec.ny)
        .into_par_iter()
        .map(|j| {
            let mut trace = crate::network::ForwardTrace::for_network(net);
            let y = spec.y_at(j);
            let mut count = 0;
            for i in 0..spec.nx {
                let x = spec.x_at(i);
                net.forward_into(&[x, y], &mut trace);
                let out = trace.output(net.n_layers());
                let mut best = 0;
                for c in 1..out.len() {
                    if out[c] > out[best] {
                        best = c;
                    }
                }
                if best != truth.class_at(x, y) {
                    count += 1;
                }
            }
            Ok(count)
        })
        .collect();
    let mut total = 0usize;
    for c in counts {
        total += c?;
    }
    Ok(total as f64 * spec.cell_area())
}

/// Exact misclassified area for a vertical-split truth against a network
/// whose decision reduces to a single first-layer hyperplane: one first-layer
/// unit, scalar intermediate layers, and a two-class softmax readout.
///
/// The scalar chain after layer one is monotone, so the decision boundary in
/// feature space is the shifted hyperplane `<a, x> = beta + t*`, and the
/// misclassified region is the symmetric difference of two halfplane
/// labelings clipped to the rectangle, integrated in closed form.
pub fn analytic_split_area(
    net: &Network<f64>,
    left_class: usize,
    right_class: usize,
    rect: &GridSpec,
) -> Option<f64> {
    let n = net.n_layers();
    if net.input_dim() != 2 || net.layer(1).out_dim() != 1 || left_class == right_class {
        return None;
    }
    for k in 2..n {
        let l = net.layer(k);
        if l.out_dim() != 1 || l.in_dim() != 1 || !l.activation.is_elementwise() {
            return None;
        }
    }
    let last = net.layer(n);
    if n < 2 || last.in_dim() != 1 || last.out_dim() != 2 || !matches!(last.activation, crate::activation::Activation::Softmax) {
        return None;
    }

    // Argmax class as a function of the first-layer pre-activation.
    let classify = |v1: f64| -> usize {
        let mut u = [0.0_f64];
        net.layer(1).activation.apply_into(&[v1], &mut u);
        for k in 2..n {
            let l = net.layer(k);
            let pre = l.weights.get(0, 0) * u[0] - l.bias[0];
            l.activation.apply_into(&[pre], &mut u);
        }
        let v0 = last.weights.get(0, 0) * u[0] - last.bias[0];
        let v1out = last.weights.get(1, 0) * u[0] - last.bias[1];
        if v1out > v0 {
            1
        } else {
            0
        }
    };

    let a = [net.layer(1).weights.get(0, 0), net.layer(1).weights.get(0, 1)];
    let beta = net.layer(1).bias[0];
    let reach = (a[0] * a[0] + a[1] * a[1]).sqrt()
        * (rect.xmax.abs().max(rect.xmin.abs()) + rect.ymax.abs().max(rect.ymin.abs()))
        + beta.abs()
        + 1.0;

    let c_neg = classify(-reach);
    let c_pos = classify(reach);
    let truth_at = |x: f64| if x < 0.0 { left_class } else { right_class };

    if c_neg == c_pos {
        // Constant prediction over the whole domain.
        let height = rect.ymax - rect.ymin;
        let mut area = 0.0;
        if c_neg != left_class {
            area += (0.0_f64.min(rect.xmax).max(rect.xmin) - rect.xmin) * height;
        }
        if c_neg != right_class {
            area += (rect.xmax - 0.0_f64.max(rect.xmin).min(rect.xmax)) * height;
        }
        return Some(area);
    }

    // Single flip of the monotone scalar chain; bisect it.
    let (mut lo, mut hi) = (-reach, reach);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if classify(mid) == c_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_star = 0.5 * (lo + hi);
    // Predicted boundary: <a, x> - beta = t*.
    let threshold = beta + t_star;

    let pred_at = |x: f64, y: f64| -> usize {
        if a[0] * x + a[1] * y > threshold {
            c_pos
        } else {
            c_neg
        }
    };

    // Mismatch length along one horizontal slice.
    let mismatch_len = |y: f64| -> f64 {
        let mut cuts = vec![rect.xmin, rect.xmax];
        if rect.xmin < 0.0 && 0.0 < rect.xmax {
            cuts.push(0.0);
        }
        if a[0] != 0.0 {
            let xc = (threshold - a[1] * y) / a[0];
            if rect.xmin < xc && xc < rect.xmax {
                cuts.push(xc);
            }
        }
        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let mut len = 0.0;
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if pred_at(mid, y) != truth_at(mid) {
                len += w[1] - w[0];
            }
        }
        len
    };

    // Slice length is piecewise linear in y; break where the predicted
    // boundary crosses x = xmin, 0, xmax, and where a horizontal boundary
    // flips sides.
    let mut ys = vec![rect.ymin, rect.ymax];
    if a[0] != 0.0 && a[1] != 0.0 {
        for xr in [rect.xmin, 0.0, rect.xmax] {
            let yb = (threshold - a[0] * xr) / a[1];
            if rect.ymin < yb && yb < rect.ymax {
                ys.push(yb);
            }
        }
    }
    if a[0] == 0.0 && a[1] != 0.0 {
        let yb = threshold / a[1];
        if rect.ymin < yb && yb < rect.ymax {
            // The prediction is constant on either side of this line; nudge
            // the breakpoint into both pieces for exact trapezoids.
            ys.push(yb);
        }
    }
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut area = 0.0;
    for w in ys.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        if a[0] == 0.0 {
            // Constant in y on this piece; evaluate at the midpoint.
            area += mismatch_len(0.5 * (w[0] + w[1])) * (w[1] - w[0]);
        } else {
            area += 0.5 * (mismatch_len(w[0]) + mismatch_len(w[1])) * (w[1] - w[0]);
        }
    }
    Some(area)
}

/// Distance from the first-layer hyperplane to the nearest sample:
/// `min |<a, x> - b| / ||a||`. Only defined for single-unit first layers.
pub fn nearest_sample_distance(net: &Network<f64>, samples: &[TrainingSample<f64>]) -> Option<f64> {
    if net.layer(1).out_dim() != 1 {
        return None;
    }
    let w = &net.layer(1).weights;
    let norm = w.row_norm2(0);
    if norm == 0.0 {
        return None;
    }
    let b = net.layer(1).bias[0];
    samples
        .iter()
        .map(|s| {
            let mut dot = 0.0;
            for (j, &xj) in s.x.iter().enumerate() {
                dot += w.get(0, j) * xj;
            }
            (dot - b).abs() / norm
        })
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))))
}

/// Horizontal offset of the interface anchor points.
pub const ANCHOR_OFFSET: f64 = 0.05;

/// Split-domain training set: four anchor points at `(+-0.05, +-0.5)` pin the
/// interface, the rest fall uniformly on the left and right blocks of
/// `[-extent, extent] x [-1, 1]` with class counts differing by at most one.
/// Left samples carry class 0, right samples class 1.
pub fn make_simple_domain(n: usize, extent: f64, seed: u64) -> Result<Vec<TrainingSample<f64>>> {
    if n < 4 {
        return Err(Error::Config("split domain needs at least the 4 anchor samples".into()));
    }
    if !(extent > ANCHOR_OFFSET) {
        return Err(Error::Config("extent must exceed the anchor offset".into()));
    }
    let mut rng = Rng::new(seed);
    let mut samples = Vec::with_capacity(n);
    let d = ANCHOR_OFFSET;
    samples.push(TrainingSample::new(Vector::from_slice(&[-d, -0.5]), 0));
    samples.push(TrainingSample::new(Vector::from_slice(&[-d, 0.5]), 0));
    samples.push(TrainingSample::new(Vector::from_slice(&[d, -0.5]), 1));
    samples.push(TrainingSample::new(Vector::from_slice(&[d, 0.5]), 1));
    let rem = n - 4;
    let left_extra = rem.div_ceil(2);
    for _ in 0..left_extra {
        let x = rng.uniform(-extent, -d);
        let y = rng.uniform(-1.0, 1.0);
        samples.push(TrainingSample::new(Vector::from_slice(&[x, y]), 0));
    }
    for _ in 0..(rem - left_extra) {
        let x = rng.uniform(d, extent);
        let y = rng.uniform(-1.0, 1.0);
        samples.push(TrainingSample::new(Vector::from_slice(&[x, y]), 1));
    }
    Ok(samples)
}

/// Wide-domain training set: `n_per_class` points drawn uniformly from each
/// half of `[-extent, extent] x [-1, 1]`, no anchors.
pub fn make_uniform_split_domain(n_per_class: usize, extent: f64, seed: u64) -> Result<Vec<TrainingSample<f64>>> {
    if n_per_class == 0 {
        return Err(Error::Config("need at least one sample per class".into()));
    }
    let mut rng = Rng::new(seed);
    let mut samples = Vec::with_capacity(2 * n_per_class);
    for _ in 0..n_per_class {
        let x = rng.uniform(-extent, 0.0);
        let y = rng.uniform(-1.0, 1.0);
        samples.push(TrainingSample::new(Vector::from_slice(&[x, y]), 0));
    }
    for _ in 0..n_per_class {
        let x = rng.uniform(0.0, extent);
        let y = rng.uniform(-1.0, 1.0);
        samples.push(TrainingSample::new(Vector::from_slice(&[x, y]), 1));
    }
    Ok(samples)
}

/// Fraction of the domain area at or below which a recorded misclassified
/// area counts as "reached zero". On the split domain this corresponds to a
/// boundary sitting within half the anchor gap of the class interface, i.e.
/// strictly inside the sample-free band, so every training point is
/// correctly classified.
pub const ZERO_AREA_FRACTION: f64 = 0.002;

/// Absolute zero-area tolerance for a given domain.
pub fn zero_area_tol(domain: &GridSpec) -> f64 {
    ZERO_AREA_FRACTION * domain.domain_area()
}

/// Default penalty weight and norm-ball radius for the comparison preset.
pub const DEFAULT_LAMBDA: f64 = 1e-3;
pub const DEFAULT_KAPPA: f64 = 4.0;

/// One named time (or abscissa) series of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub index_label: String,
    pub index: Vec<f64>,
    pub values: Vec<f64>,
}

impl Series {
    /// First index value at which the series drops to `tol` or below.
    pub fn first_at_or_below(&self, tol: f64) -> Option<f64> {
        self.index
            .iter()
            .zip(&self.values)
            .find(|(_, &v)| v <= tol)
            .map(|(&i, _)| i)
    }
}

/// Everything an experiment run produces: config echo, series, final
/// networks, and any field maps the preset renders.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub preset: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub series: Vec<Series>,
    pub networks: Vec<(String, Network<f64>)>,
    pub fields: Vec<FieldMap>,
}

impl ExperimentReport {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }
}

/// Declarative description of an experiment run; unset fields take the
/// preset's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PresetConfig {
    pub preset: String,
    pub seed: u64,
    pub n: Option<usize>,
    pub iterations: Option<usize>,
    pub learning_rate: Option<f64>,
    pub record_every: Option<usize>,
    pub extent: Option<f64>,
    pub init_norm: Option<f64>,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub angle_deg: Option<f64>,
    /// Stop a run once the recorded area falls to [`zero_area_tol`].
    pub early_stop_zero_area: bool,
}

impl PresetConfig {
    pub fn named(preset: &str) -> Self {
        PresetConfig {
            preset: preset.into(),
            ..Default::default()
        }
    }
}

struct SeriesRecorder {
    index_label: String,
    index: Vec<f64>,
    columns: Vec<(String, Vec<f64>)>,
}

impl SeriesRecorder {
    fn new(index_label: &str, names: &[String]) -> Self {
        SeriesRecorder {
            index_label: index_label.into(),
            index: Vec::new(),
            columns: names.iter().map(|n| (n.clone(), Vec::new())).collect(),
        }
    }

    fn push(&mut self, index: f64, values: &[f64]) {
        assert_eq!(values.len(), self.columns.len());
        self.index.push(index);
        for (col, &v) in self.columns.iter_mut().zip(values) {
            col.1.push(v);
        }
    }

    fn into_series(self) -> Vec<Series> {
        self.columns
            .into_iter()
            .map(|(name, values)| Series {
                name,
                index_label: self.index_label.clone(),
                index: self.index.clone(),
                values,
            })
            .collect()
    }
}

struct TrainingRun<'a> {
    net: Network<f64>,
    samples: &'a [TrainingSample<f64>],
    cfg: TrainerConfig,
    truth: Labeling,
    domain: GridSpec,
    early_stop_zero_area: bool,
    suffix: String,
}

fn run_training(run: TrainingRun<'_>) -> Result<(Vec<Series>, Network<f64>)> {
    let TrainingRun {
        mut net,
        samples,
        cfg,
        truth,
        domain,
        early_stop_zero_area,
        suffix,
    } = run;
    cfg.validate()?;

    let tag = |base: &str| {
        if suffix.is_empty() {
            base.to_string()
        } else {
            format!("{base}_{suffix}")
        }
    };
    let mut names = vec![tag("loss"), tag("area")];
    for k in 1..=net.n_layers() {
        names.push(tag(&format!("norm_a{k}")));
        names.push(tag(&format!("abs_b{k}")));
    }
    let track_distance = net.layer(1).out_dim() == 1;
    if track_distance {
        names.push(tag("nearest_sample_distance"));
    }
    let mut rec = SeriesRecorder::new("iteration", &names);

    let mut record = |net: &Network<f64>, iter: usize| -> Result<f64> {
        let loss = net.batch_loss(samples)?;
        let area = misclassified_area(net, &truth, &domain)?;
        let mut row = vec![loss, area];
        for k in 1..=net.n_layers() {
            row.push(net.layer(k).weights.frobenius_norm());
            row.push(net.layer(k).bias.norm2());
        }
        if track_distance {
            row.push(nearest_sample_distance(net, samples).unwrap_or(f64::NAN));
        }
        rec.push(iter as f64, &row);
        Ok(area)
    };

    let mut iter = 0;
    loop {
        let at_record = iter % cfg.record_every == 0 || iter == cfg.iterations;
        if at_record {
            let area = record(&net, iter)?;
            if iter == cfg.iterations || (early_stop_zero_area && area <= zero_area_tol(&domain)) {
                break;
            }
        }
        gd_step(&mut net, samples, &cfg)?;
        iter += 1;
    }
    Ok((rec.into_series(), net))
}

/// Runs a named experiment preset and returns its report. Everything is
/// deterministic given the seed in `cfg`.
pub fn run_experiment(cfg: &PresetConfig) -> Result<ExperimentReport> {
    let echo = serde_json::to_value(cfg)?;
    match cfg.preset.as_str() {
        "density" => run_density(cfg, echo),
        "width" => run_width(cfg, echo),
        "norms-growth" => run_norms_growth(cfg, echo),
        "regularization-compare" => run_regularization_compare(cfg, echo),
        "rotate-boundary" => run_rotate_boundary(cfg, echo),
        "motivational-1d" => run_motivational_1d(cfg, echo),
        other => Err(Error::Config(format!("unknown preset '{other}'"))),
    }
}

fn split_domain_grid(extent: f64) -> GridSpec {
    GridSpec::new(-extent, extent, -1.0, 1.0, 801, 135).expect("domain grid")
}

fn base_trainer(cfg: &PresetConfig) -> TrainerConfig {
    TrainerConfig {
        learning_rate: cfg.learning_rate.unwrap_or(0.01),
        iterations: cfg.iterations.unwrap_or(300_000),
        frozen_layers: BTreeSet::new(),
        reg: Regularizer::None,
        record_every: cfg.record_every.unwrap_or(100),
        seed: cfg.seed,
    }
}

fn run_density(cfg: &PresetConfig, echo: serde_json::Value) -> Result<ExperimentReport> {
    let n = cfg.n.unwrap_or(50);
    let extent = cfg.extent.unwrap_or(6.0);
    let init_norm = cfg.init_norm.unwrap_or(25.0);
    let samples = make_simple_domain(n, extent, cfg.seed)?;
    let net = presets::split_domain_network(init_norm, 2.0);
    let mut tc = base_trainer(cfg);
    tc.frozen_layers.insert(2);
    let (series, final_net) = run_training(TrainingRun {
        net,
        samples: &samples,
        cfg: tc,
        truth: Labeling::split(),
        domain: split_domain_grid(extent),
        early_stop_zero_area: cfg.early_stop_zero_area,
        suffix: String::new(),
    })?;
    Ok(ExperimentReport {
        preset: cfg.preset.clone(),
        seed: cfg.seed,
        config: echo,
        series,
        networks: vec![("final".into(), final_net)],
        fields: Vec::new(),
    })
}

fn run_width(cfg: &PresetConfig, echo: serde_json::Value) -> Result<ExperimentReport> {
    let n = cfg.n.unwrap_or(3200);
    let extent = cfg.extent.unwrap_or(6.0);
    let init_norm = cfg.init_norm.unwrap_or(1.0);
    let samples = make_simple_domain(n, extent, cfg.seed)?;
    let net = presets::split_domain_network(init_norm, 2.0);
    let mut tc = base_trainer(cfg);
    tc.frozen_layers.insert(2);
    let (series, final_net) = run_training(TrainingRun {
        net,
        samples: &samples,
        cfg: tc,
        truth: Labeling::split(),
        domain: split_domain_grid(extent),
        early_stop_zero_area: cfg.early_stop_zero_area,
        suffix: String::new(),
    })?;
    Ok(ExperimentReport {
        preset: cfg.preset.clone(),
        seed: cfg.seed,
        config: echo,
        series,
        networks: vec![("final".into(), final_net)],
        fields: Vec::new(),
    })
}

fn run_norms_growth(cfg: &PresetConfig, echo: serde_json::Value) -> Result<ExperimentReport> {
    let extent = cfg.extent.unwrap_or(30.0);
    let per_class = cfg.n.unwrap_or(500) / 2;
    let samples = make_uniform_split_domain(per_class, extent, cfg.seed)?;
    let net = presets::extended_domain_network();
    let tc = base_trainer(cfg);
    let (series, final_net) = run_training(TrainingRun {
        net,
        samples: &samples,
        cfg: tc,
        truth: Labeling::split(),
        domain: split_domain_grid(extent),
        early_stop_zero_area: cfg.early_stop_zero_area,
        suffix: String::new(),
    })?;
    Ok(ExperimentReport {
        preset: cfg.preset.clone(),
        seed: cfg.seed,
        config: echo,
        series,
        networks: vec![("final".into(), final_net)],
        fields: Vec::new(),
    })
}

fn run_regularization_compare(cfg: &PresetConfig, echo: serde_json::Value) -> Result<ExperimentReport> {
    let extent = cfg.extent.unwrap_or(30.0);
    let per_class = cfg.n.unwrap_or(500) / 2;
    let lambda = cfg.lambda.unwrap_or(DEFAULT_LAMBDA);
    let kappa = cfg.kappa.unwrap_or(DEFAULT_KAPPA);
    let samples = make_uniform_split_domain(per_class, extent, cfg.seed)?;

    let first_layer: BTreeSet<usize> = [1].into();
    let modes: Vec<(&str, Regularizer)> = vec![
        ("standard", Regularizer::None),
        (
            "l2",
            Regularizer::L2 {
                lambda,
                layers: first_layer.clone(),
            },
        ),
        (
            "norm_ball",
            Regularizer::NormBall {
                kappa,
                layers: first_layer,
            },
        ),
    ];

    let mut series = Vec::new();
    let mut networks = Vec::new();
    for (name, reg) in modes {
        let net = presets::split_domain_network(1.0, 25.0);
        let mut tc = base_trainer(cfg);
        tc.frozen_layers.insert(2);
        tc.reg = reg;
        let (s, final_net) = run_training(TrainingRun {
            net,
            samples: &samples,
            cfg: tc,
            truth: Labeling::split(),
            domain: split_domain_grid(extent),
            early_stop_zero_area: cfg.early_stop_zero_area,
            suffix: name.into(),
        })?;
        series.extend(s);
        networks.push((name.to_string(), final_net));
    }
    Ok(ExperimentReport {
        preset: cfg.preset.clone(),
        seed: cfg.seed,
        config: echo,
        series,
        networks,
        fields: Vec::new(),
    })
}

fn run_rotate_boundary(cfg: &PresetConfig, echo: serde_json::Value) -> Result<ExperimentReport> {
    let angle = cfg.angle_deg.unwrap_or(70.0);
    let grid = GridSpec::square(3.0, 201);
    let mut fields = Vec::new();
    let mut networks = Vec::new();

    let base = presets::rotated_boundary_network(angle, 1.0);
    for (unit, name) in [(0usize, "first_unit"), (1, "second_unit")] {
        let mut f = crate::field::eval_field(&base, &grid, FieldQuantity::LayerOutput { layer: 1, unit }, None)?;
        f.name = name.into();
        fields.push(f);
    }
    let mut cases = vec![("recombined_90_scale1".to_string(), 90.0, 1.0)];
    for scale in [1.0, 10.0, 20.0] {
        cases.push((format!("recombined_{}_scale{}", angle.round() as i64, scale as i64), angle, scale));
    }
    for (name, ang, scale) in cases {
        let net = presets::rotated_boundary_network(ang, scale);
        let mut f = crate::field::eval_field(&net, &grid, FieldQuantity::LayerOutput { layer: 2, unit: 0 }, None)?;
        f.name = name.clone();
        fields.push(f);
        networks.push((name, net));
    }
    Ok(ExperimentReport {
        preset: cfg.preset.clone(),
        seed: cfg.seed,
        config: echo,
        series: Vec::new(),
        networks,
        fields,
    })
}

fn run_motivational_1d(cfg: &PresetConfig, echo: serde_json::Value) -> Result<ExperimentReport> {
    let net = presets::motivational_1d_network(1.0, 0.0);
    let n_points = 481;
    let mut rec = SeriesRecorder::new(
        "x",
        &["posterior".into(), "loss".into(), "dalpha".into(), "dbeta".into()],
    );
    for i in 0..n_points {
        let x = -12.0 + 24.0 * i as f64 / (n_points - 1) as f64;
        let trace = net.forward(&Vector::from_slice(&[x]))?;
        let (_, grads) = net.backward(&trace, 0)?;
        let posterior = trace.output(2)[0];
        let loss = net.loss_from_trace(&trace, 0)?;
        rec.push(x, &[posterior, loss, grads.weight(1).get(0, 0), grads.bias(1)[0]]);
    }
    Ok(ExperimentReport {
        preset: cfg.preset.clone(),
        seed: cfg.seed,
        config: echo,
        series: rec.into_series(),
        networks: vec![("model".into(), net)],
        fields: Vec::new(),
    })
}
