//! Subcommand implementations: resolve a config, run it, write the output
//! files plus a manifest listing every artifact with its content hash.

use crate::config::*;
use crate::figures::{self, Artifact};
use crate::{CliError, CliResult};
use regionlab_core::field::{eval_field, FieldMap, GridSpec, Labeling};
use regionlab_core::io;
use regionlab_core::partialbp::{reach_map, reach_statistics, BoundKind, CutoffPolicy};
use regionlab_core::region::{count_regions, op_to_layer};
use regionlab_core::trainer::{run_experiment, PresetConfig, Series};
use regionlab_core::{geometry, presets, Activation, Layer, Matrix, Network, RegionOp, Rng, Vector};
use std::path::{Path, PathBuf};

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

pub fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

/// Collects written files and finishes with the manifest.
struct OutputWriter {
    dir: PathBuf,
    manifest: io::ManifestBuilder,
}

impl OutputWriter {
    fn new(command: &str, dir: PathBuf, seed: Option<u64>, config: serde_json::Value) -> Self {
        OutputWriter {
            dir,
            manifest: io::ManifestBuilder::new(command, seed, config),
        }
    }

    fn field(&mut self, map: &FieldMap) -> CliResult<()> {
        let csv = format!("{}.csv", map.name);
        let pgm = format!("{}.pgm", map.name);
        let h = io::write_field_csv(&self.dir.join(&csv), map).map_err(runtime_err)?;
        self.manifest.record(&csv, h);
        let h = io::write_field_pgm(&self.dir.join(&pgm), map).map_err(runtime_err)?;
        self.manifest.record(&pgm, h);
        Ok(())
    }

    fn series(&mut self, s: &Series) -> CliResult<()> {
        let name = format!("{}.csv", s.name);
        let h = io::write_series_csv(&self.dir.join(&name), s).map_err(runtime_err)?;
        self.manifest.record(&name, h);
        Ok(())
    }

    fn network(&mut self, name: &str, net: &Network) -> CliResult<()> {
        let file = format!("{name}.json");
        let h = io::write_network(&self.dir.join(&file), net).map_err(runtime_err)?;
        self.manifest.record(&file, h);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &serde_json::Value) -> CliResult<()> {
        let file = format!("{name}.json");
        let mut text = serde_json::to_string_pretty(value).map_err(runtime_err)?;
        text.push('\n');
        let h = io::write_file_atomic(&self.dir.join(&file), text.as_bytes()).map_err(runtime_err)?;
        self.manifest.record(&file, h);
        Ok(())
    }

    fn text(&mut self, name: &str, content: &str) -> CliResult<()> {
        let h = io::write_file_atomic(&self.dir.join(name), content.as_bytes()).map_err(runtime_err)?;
        self.manifest.record(name, h);
        Ok(())
    }

    fn extra(&mut self, key: &str, value: serde_json::Value) {
        self.manifest.insert_extra(key, value);
    }

    fn finish(self) -> CliResult<PathBuf> {
        self.manifest.write(&self.dir).map_err(runtime_err)
    }
}

fn write_artifacts(out: &mut OutputWriter, artifacts: &[Artifact]) -> CliResult<()> {
    for a in artifacts {
        match a {
            Artifact::Field(map) => out.field(map)?,
            Artifact::Series(s) => out.series(s)?,
            Artifact::Network { name, net } => out.network(name, net)?,
        }
    }
    Ok(())
}

fn resolve_out(flag: Option<PathBuf>, cfg: &Option<PathBuf>, command: &str) -> PathBuf {
    flag.or_else(|| cfg.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(command))
}

pub fn cmd_field(path: &Path, seed_flag: Option<u64>, out_flag: Option<PathBuf>) -> CliResult<PathBuf> {
    let cfg: FieldConfig = load_config(path)?;
    let echo = serde_json::json!({
        "config_file": path.display().to_string(),
        "preset": cfg.preset,
        "grid": cfg.grid,
        "quantities": cfg.quantities,
        "labeling": cfg.labeling,
    });
    let seed = seed_flag.or(cfg.seed);
    let dir = resolve_out(out_flag, &cfg.out_dir, "field");
    let mut out = OutputWriter::new("field", dir, seed, echo);

    if let Some(preset) = &cfg.preset {
        if cfg.network.is_some() || !cfg.quantities.is_empty() {
            return Err(CliError::Config(
                "a preset cannot be combined with a custom network or quantities".into(),
            ));
        }
        let artifacts = match preset.as_str() {
            "fig2" => figures::fig2(),
            "fig5" => figures::fig5(),
            "fig6" => figures::fig6(),
            "fig7" => figures::fig7(),
            "fig8" => figures::fig8(),
            "fig10" => figures::fig10(),
            "fig11" => figures::fig11(),
            other => return Err(CliError::Config(format!("unknown field preset '{other}'"))),
        }
        .map_err(runtime_err)?;
        write_artifacts(&mut out, &artifacts)?;
        return out.finish();
    }

    let net_path = cfg
        .network
        .as_ref()
        .ok_or_else(|| CliError::Config("field config needs `preset` or `network`".into()))?;
    let net = io::read_network(net_path).map_err(config_err)?;
    let grid = cfg
        .grid
        .ok_or_else(|| CliError::Config("field config needs a `grid`".into()))?;
    grid.validate().map_err(config_err)?;
    for q in &cfg.quantities {
        let map = eval_field(&net, &grid, *q, cfg.labeling.as_ref()).map_err(config_err)?;
        out.field(&map)?;
    }
    out.finish()
}

pub fn cmd_train(path: &Path, seed_flag: Option<u64>, out_flag: Option<PathBuf>) -> CliResult<PathBuf> {
    let cfg: TrainConfig = load_config(path)?;
    if cfg.preset.is_empty() {
        return Err(CliError::Config("train config needs a `preset`".into()));
    }
    let preset = PresetConfig {
        preset: cfg.preset.clone(),
        seed: seed_flag.or(cfg.seed).unwrap_or(0),
        n: cfg.n,
        iterations: cfg.iterations,
        learning_rate: cfg.learning_rate,
        record_every: cfg.record_every,
        extent: cfg.extent,
        init_norm: cfg.init_norm,
        lambda: cfg.lambda,
        kappa: cfg.kappa,
        angle_deg: cfg.angle_deg,
        early_stop_zero_area: cfg.early_stop_zero_area.unwrap_or(false),
    };
    let report = match run_experiment(&preset) {
        Ok(r) => r,
        Err(e @ regionlab_core::Error::Config(_)) => return Err(config_err(e)),
        Err(e) => return Err(runtime_err(e)),
    };
    let echo = serde_json::to_value(&preset).map_err(runtime_err)?;
    let dir = resolve_out(out_flag, &cfg.out_dir, "train");
    let mut out = OutputWriter::new("train", dir, Some(report.seed), echo);
    for s in &report.series {
        out.series(s)?;
    }
    for (name, net) in &report.networks {
        out.network(&format!("network_{name}"), net)?;
    }
    for f in &report.fields {
        out.field(f)?;
    }
    out.finish()
}

fn pipeline_network(p: &PipelineConfig) -> CliResult<Network> {
    if p.first_layer.weights.is_empty() {
        return Err(CliError::Config("pipeline first layer needs at least one unit".into()));
    }
    let mut layers = vec![Layer::new(
        Matrix::from_rows(&p.first_layer.weights),
        Vector::from_slice(&p.first_layer.bias),
        Activation::sigmoid(p.first_layer.gamma),
    )
    .map_err(config_err)?];
    let input_dim = p.first_layer.weights[0].len();

    let mut prev_width = p.first_layer.weights.len();
    for layer_cfg in &p.layers {
        let mut rows = Vec::with_capacity(layer_cfg.ops.len());
        let mut bias = Vec::with_capacity(layer_cfg.ops.len());
        for op_cfg in &layer_cfg.ops {
            for &i in &op_cfg.inputs {
                if i >= prev_width {
                    return Err(CliError::Config(format!(
                        "op input {i} out of range for layer of width {prev_width}"
                    )));
                }
            }
            let op: RegionOp = match op_cfg.op.as_str() {
                "identity" => RegionOp::Identity,
                "complement" => RegionOp::Complement,
                "intersection" => RegionOp::Intersection(op_cfg.inputs.len()),
                "union" => RegionOp::Union(op_cfg.inputs.len()),
                "kofn" => {
                    let k = op_cfg
                        .k
                        .ok_or_else(|| CliError::Config("kofn needs `k`".into()))?;
                    let weights = op_cfg
                        .weights
                        .clone()
                        .unwrap_or_else(|| vec![1.0; op_cfg.inputs.len()]);
                    if weights.len() != op_cfg.inputs.len() {
                        return Err(CliError::Config("kofn weights must match inputs".into()));
                    }
                    RegionOp::KofN {
                        weights: Vector::from_vec(weights),
                        k,
                    }
                }
                "constant_true" => RegionOp::Constant(true),
                "constant_false" => RegionOp::Constant(false),
                other => return Err(CliError::Config(format!("unknown op '{other}'"))),
            };
            let needed = match op {
                RegionOp::Constant(_) => 0,
                RegionOp::Identity | RegionOp::Complement => 1,
                RegionOp::Intersection(n) | RegionOp::Union(n) => n,
                RegionOp::KofN { ref weights, .. } => weights.len(),
            };
            if !matches!(op, RegionOp::Constant(_)) && op_cfg.inputs.len() != needed {
                return Err(CliError::Config(format!(
                    "op '{}' takes {needed} inputs, got {}",
                    op_cfg.op,
                    op_cfg.inputs.len()
                )));
            }
            let (a, b) = op_to_layer(&op).map_err(config_err)?;
            let mut row = vec![0.0; prev_width];
            if matches!(op, RegionOp::Constant(_)) {
                // Zero row; only the offset matters.
            } else {
                for (slot, &i) in op_cfg.inputs.iter().enumerate() {
                    row[i] = a.get(0, slot);
                }
            }
            rows.push(row);
            bias.push(b[0]);
        }
        layers.push(
            Layer::new(
                Matrix::from_rows(&rows),
                Vector::from_slice(&bias),
                Activation::sigmoid(layer_cfg.gamma),
            )
            .map_err(config_err)?,
        );
        prev_width = layer_cfg.ops.len();
    }
    Network::new(input_dim, layers).map_err(config_err)
}

pub fn cmd_regions(path: &Path, seed_flag: Option<u64>, out_flag: Option<PathBuf>) -> CliResult<PathBuf> {
    let cfg: RegionsConfig = load_config(path)?;
    let modes = cfg.preset.is_some() as u8 + cfg.pipeline.is_some() as u8 + cfg.count_regions.is_some() as u8;
    if modes != 1 {
        return Err(CliError::Config(
            "regions config needs exactly one of `preset`, `pipeline`, `count_regions`".into(),
        ));
    }
    let echo = serde_json::json!({
        "config_file": path.display().to_string(),
        "preset": cfg.preset,
        "grid": cfg.grid,
    });
    let seed = seed_flag.or(cfg.seed);
    let dir = resolve_out(out_flag, &cfg.out_dir, "regions");
    let mut out = OutputWriter::new("regions", dir, seed, echo);

    if let Some(cr) = &cfg.count_regions {
        if cr.d < 1 {
            return Err(CliError::Config("count_regions needs d >= 1".into()));
        }
        let count = count_regions(cr.n, cr.d);
        out.extra(
            "count_regions",
            serde_json::json!({"n": cr.n, "d": cr.d, "count": count.to_string()}),
        );
        out.text("count.txt", &format!("{count}\n"))?;
        return out.finish();
    }

    if let Some(preset) = &cfg.preset {
        let artifacts = match preset.as_str() {
            "fig3" => figures::fig3(),
            "fig4" => figures::fig4(),
            "fig9" => figures::fig9(),
            other => return Err(CliError::Config(format!("unknown regions preset '{other}'"))),
        }
        .map_err(runtime_err)?;
        write_artifacts(&mut out, &artifacts)?;
        return out.finish();
    }

    let pipeline = cfg.pipeline.as_ref().expect("mode checked");
    let net = pipeline_network(pipeline)?;
    out.network("pipeline_network", &net)?;
    if let Some(grid) = cfg.grid {
        grid.validate().map_err(config_err)?;
        if net.input_dim() == 2 {
            for unit in 0..net.layer(net.n_layers()).out_dim() {
                let map = eval_field(
                    &net,
                    &grid,
                    regionlab_core::field::FieldQuantity::LayerOutput {
                        layer: net.n_layers(),
                        unit,
                    },
                    None,
                )
                .map_err(runtime_err)?;
                out.field(&map)?;
            }
        }
    }
    out.finish()
}

fn parse_variant(s: &str) -> CliResult<BoundKind> {
    match s {
        "frobenius" => Ok(BoundKind::Frobenius),
        "elementwise" => Ok(BoundKind::Elementwise),
        "elementwise_loose" => Ok(BoundKind::ElementwiseLoose),
        other => Err(CliError::Config(format!("unknown bound variant '{other}'"))),
    }
}

fn variant_tag(kind: BoundKind) -> &'static str {
    match kind {
        BoundKind::Frobenius => "frobenius",
        BoundKind::Elementwise => "elementwise",
        BoundKind::ElementwiseLoose => "elementwise_loose",
    }
}

pub fn cmd_partialbp(path: &Path, seed_flag: Option<u64>, out_flag: Option<PathBuf>) -> CliResult<PathBuf> {
    let cfg: PartialBpConfig = load_config(path)?;
    let variants: Vec<BoundKind> = cfg
        .variants
        .clone()
        .unwrap_or_else(|| vec!["frobenius".into(), "elementwise".into()])
        .iter()
        .map(|s| parse_variant(s))
        .collect::<CliResult<_>>()?;
    let grid = cfg.grid.unwrap_or_else(|| GridSpec::square(3.0, 201));
    grid.validate().map_err(config_err)?;
    let labeling = cfg.labeling.unwrap_or(Labeling::XorQuadrant);

    // (tag, network) pairs to sweep.
    let runs: Vec<(String, Network)> = if let Some(preset) = &cfg.preset {
        if preset != "fig12" {
            return Err(CliError::Config(format!("unknown partialbp preset '{preset}'")));
        }
        let scales = cfg.scales.clone().unwrap_or_else(|| vec![1.0, 2.0, 3.0]);
        scales
            .iter()
            .map(|&s| (format!("scale{}", fmt_scale(s)), presets::xor_demo_network(s)))
            .collect()
    } else {
        let net_path = cfg
            .network
            .as_ref()
            .ok_or_else(|| CliError::Config("partialbp config needs `preset` or `network`".into()))?;
        let base = io::read_network(net_path).map_err(config_err)?;
        let scales = cfg.scales.clone().unwrap_or_else(|| vec![1.0]);
        scales
            .iter()
            .map(|&s| (format!("scale{}", fmt_scale(s)), base.scaled_parameters(s)))
            .collect()
    };

    let echo = serde_json::json!({
        "config_file": path.display().to_string(),
        "preset": cfg.preset,
        "thresholds": cfg.thresholds,
        "grid": grid,
        "labeling": labeling,
    });
    let seed = seed_flag.or(cfg.seed);
    let dir = resolve_out(out_flag, &cfg.out_dir, "partialbp");
    let mut out = OutputWriter::new("partialbp", dir, seed, echo);

    let mut fractions_csv = String::from("variant,scale,layer,fraction\n");
    let mut fraction_rows = Vec::new();
    for kind in &variants {
        for (tag, net) in &runs {
            let policy = match &cfg.thresholds {
                Some(t) => {
                    if t.len() != net.n_layers() {
                        return Err(CliError::Config(format!(
                            "thresholds needs {} entries, one per layer",
                            net.n_layers()
                        )));
                    }
                    CutoffPolicy::for_layers(t.clone(), *kind)
                }
                None => CutoffPolicy::standard(net.n_layers(), *kind),
            };
            let fractions = reach_statistics(net, &grid, &labeling, &policy).map_err(runtime_err)?;
            let mut map = reach_map(net, &grid, &labeling, &policy).map_err(runtime_err)?;
            map.name = format!("reach_{}_{}", variant_tag(*kind), tag);
            out.field(&map)?;
            for (idx, frac) in fractions.iter().enumerate() {
                fractions_csv.push_str(&format!(
                    "{},{},{},{}\n",
                    variant_tag(*kind),
                    tag,
                    idx + 1,
                    io::format_float(*frac)
                ));
                fraction_rows.push(serde_json::json!({
                    "variant": variant_tag(*kind),
                    "scale": tag,
                    "layer": idx + 1,
                    "fraction": frac,
                }));
            }
        }
    }
    out.text("fractions.csv", &fractions_csv)?;
    out.extra("fractions", serde_json::Value::Array(fraction_rows));
    out.finish()
}

fn fmt_scale(s: f64) -> String {
    if s.fract() == 0.0 {
        format!("{}", s as i64)
    } else {
        format!("{s}").replace('.', "_")
    }
}

pub fn cmd_tverberg(path: &Path, seed_flag: Option<u64>, out_flag: Option<PathBuf>) -> CliResult<PathBuf> {
    let cfg: TverbergConfig = load_config(path)?;
    let seed = seed_flag.or(cfg.seed).unwrap_or(0);
    let mut rng = Rng::new(seed);
    let fam = geometry::random_family::<f64>(cfg.d, cfg.n, &mut rng).map_err(config_err)?;
    let report = geometry::verify_family(&fam).map_err(runtime_err)?;

    let echo = serde_json::json!({
        "config_file": path.display().to_string(),
        "d": cfg.d,
        "n": cfg.n,
        "lift": cfg.lift,
    });
    let dir = resolve_out(out_flag, &cfg.out_dir, "tverberg");
    let mut out = OutputWriter::new("tverberg", dir, Some(seed), echo);
    out.json("family", &io::family_to_json(&fam))?;
    out.json("verification", &io::family_report_to_json(&report))?;
    out.extra("all_ok", serde_json::json!(report.all_ok()));

    if cfg.lift {
        let lifted = geometry::lift_family(&fam).map_err(runtime_err)?;
        let lifted_report = geometry::verify_family(&lifted).map_err(runtime_err)?;
        out.json("lifted_family", &io::family_to_json(&lifted))?;
        out.json("lifted_verification", &io::family_report_to_json(&lifted_report))?;
        out.extra("lifted_all_ok", serde_json::json!(lifted_report.all_ok()));
    }
    out.finish()
}
