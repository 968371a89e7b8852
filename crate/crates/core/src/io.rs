//! File formats: versioned network JSON, CSV series and field dumps, binary
//! PGM renderings, and run manifests with content hashes.
//!
//! All writers are byte-deterministic: floats carry 17 significant digits
//! (`{:.16e}`), lines end in LF, and files land via a temp-file rename so a
//! crashed run never leaves a truncated artifact.

use crate::activation::Activation;
use crate::dense::{Matrix, Vector};
use crate::error::{Error, Result};
use crate::field::FieldMap;
use crate::geometry::{FamilyReport, SubspaceFamily};
use crate::network::{Layer, Network};
use crate::trainer::Series;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

pub const NETWORK_FORMAT: &str = "regionlab-network";
pub const NETWORK_VERSION: u32 = 1;

/// Seventeen significant digits; round-trips any f64 exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes bytes to `path` via a sibling temp file and rename; returns the
/// SHA-256 hex of the content.
pub fn write_file_atomic(path: &Path, bytes: &[u8]) -> Result<String> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    Ok(hex_digest(hasher))
}

fn hex_digest(hasher: Sha256) -> String {
    let digest = hasher.finalize();
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    rows: usize,
    cols: usize,
    /// Row-major weight entries.
    weights: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    format: String,
    version: u32,
    input_dim: usize,
    layers: Vec<LayerFile>,
}

pub fn network_to_json(net: &Network<f64>) -> Result<String> {
    let file = NetworkFile {
        format: NETWORK_FORMAT.into(),
        version: NETWORK_VERSION,
        input_dim: net.input_dim(),
        layers: net
            .layers()
            .iter()
            .map(|l| LayerFile {
                rows: l.weights.rows(),
                cols: l.weights.cols(),
                weights: l.weights.as_slice().to_vec(),
                bias: l.bias.as_slice().to_vec(),
                activation: l.activation,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

pub fn network_from_json(text: &str) -> Result<Network<f64>> {
    let file: NetworkFile = serde_json::from_str(text)?;
    if file.format != NETWORK_FORMAT {
        return Err(Error::Config(format!("unknown network format '{}'", file.format)));
    }
    if file.version != NETWORK_VERSION {
        return Err(Error::Config(format!(
            "unsupported network format version {}",
            file.version
        )));
    }
    let mut layers = Vec::with_capacity(file.layers.len());
    for lf in file.layers {
        if lf.bias.len() != lf.rows {
            return Err(Error::dim("network_from_json", "bias length vs rows"));
        }
        layers.push(Layer::new(
            Matrix::from_vec(lf.rows, lf.cols, lf.weights)?,
            Vector::from_vec(lf.bias),
            lf.activation,
        )?);
    }
    Network::new(file.input_dim, layers)
}

pub fn write_network(path: &Path, net: &Network<f64>) -> Result<String> {
    write_file_atomic(path, network_to_json(net)?.as_bytes())
}

pub fn read_network(path: &Path) -> Result<Network<f64>> {
    network_from_json(&fs::read_to_string(path)?)
}

/// CSV of one series: `index_label,name` header, one row per record.
pub fn series_csv(series: &Series) -> String {
    let mut s = String::new();
    s.push_str(&series.index_label);
    s.push(',');
    s.push_str(&series.name);
    s.push('\n');
    for (i, v) in series.index.iter().zip(&series.values) {
        s.push_str(&format_float(*i));
        s.push(',');
        s.push_str(&format_float(*v));
        s.push('\n');
    }
    s
}

pub fn write_series_csv(path: &Path, series: &Series) -> Result<String> {
    write_file_atomic(path, series_csv(series).as_bytes())
}

/// CSV of a field map: `x,y,value`, x fastest, y slowest.
pub fn field_csv(map: &FieldMap) -> String {
    let mut s = String::from("x,y,value\n");
    for j in 0..map.spec.ny {
        let y = map.spec.y_at(j);
        for i in 0..map.spec.nx {
            s.push_str(&format_float(map.spec.x_at(i)));
            s.push(',');
            s.push_str(&format_float(y));
            s.push(',');
            s.push_str(&format_float(map.value(i, j)));
            s.push('\n');
        }
    }
    s
}

pub fn write_field_csv(path: &Path, map: &FieldMap) -> Result<String> {
    write_file_atomic(path, field_csv(map).as_bytes())
}

/// Binary 8-bit PGM (P5) of a field map, min-max normalized; constant maps
/// render black. Row 0 of the image is the top of the plot (largest y), so
/// the picture reads like the usual axes.
pub fn field_pgm(map: &FieldMap) -> Vec<u8> {
    let (lo, hi) = map.min_max();
    let span = hi - lo;
    let mut bytes = Vec::with_capacity(32 + map.values.len());
    bytes.extend_from_slice(format!("P5\n{} {}\n255\n", map.spec.nx, map.spec.ny).as_bytes());
    for j in (0..map.spec.ny).rev() {
        for i in 0..map.spec.nx {
            let v = map.value(i, j);
            let g = if span > 0.0 {
                ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            bytes.push(g);
        }
    }
    bytes
}

pub fn write_field_pgm(path: &Path, map: &FieldMap) -> Result<String> {
    write_file_atomic(path, &field_pgm(map))
}

pub fn family_to_json(fam: &SubspaceFamily<f64>) -> serde_json::Value {
    serde_json::json!({
        "format": "regionlab-subspace-family",
        "version": 1,
        "dim": fam.dim,
        "subspace_dim": fam.subspace_dim(),
        "blocks": fam.blocks.iter().map(|b| serde_json::json!({
            "rows": b.rows(),
            "cols": b.cols(),
            "entries": b.as_slice(),
        })).collect::<Vec<_>>(),
        "offsets": fam.offsets.iter().map(|o| o.as_slice()).collect::<Vec<_>>(),
    })
}

pub fn family_report_to_json(report: &FamilyReport<f64>) -> serde_json::Value {
    serde_json::json!({
        "all_ok": report.all_ok(),
        "pairs": report.pairs.iter().map(|p| serde_json::json!({
            "i": p.i,
            "j": p.j,
            "disjoint": p.disjoint,
            "normal": p.normal.as_ref().map(|n| n.as_slice().to_vec()),
            "normal_orthogonal": p.normal_orthogonal,
            "offsets_separated": p.offsets_separated,
            "intersects_all_others": p.intersects_all_others(),
            "intersects_others": p.intersects_others.iter().map(|&(k, ok)| serde_json::json!({
                "k": k, "intersects": ok,
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

/// Accumulates output files and writes the final `manifest.json` listing
/// every artifact with its SHA-256.
pub struct ManifestBuilder {
    command: String,
    seed: Option<u64>,
    config: serde_json::Value,
    outputs: Vec<(String, String)>,
    extra: serde_json::Map<String, serde_json::Value>,
}

impl ManifestBuilder {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        ManifestBuilder {
            command: command.into(),
            seed,
            config,
            outputs: Vec::new(),
            extra: serde_json::Map::new(),
        }
    }

    /// Record an already-written file (relative name + content hash).
    pub fn record(&mut self, name: &str, sha256: String) {
        self.outputs.push((name.to_string(), sha256));
    }

    /// Attach an extra top-level entry (e.g. reach fractions, region counts).
    pub fn insert_extra(&mut self, key: &str, value: serde_json::Value) {
        self.extra.insert(key.into(), value);
    }

    pub fn write(mut self, dir: &Path) -> Result<PathBuf> {
        self.outputs.sort();
        let mut doc = serde_json::Map::new();
        doc.insert("command".into(), self.command.into());
        if let Some(seed) = self.seed {
            doc.insert("seed".into(), seed.into());
        }
        doc.insert("config".into(), self.config);
        doc.insert(
            "outputs".into(),
            serde_json::Value::Array(
                self.outputs
                    .into_iter()
                    .map(|(p, h)| serde_json::json!({"path": p, "sha256": h}))
                    .collect(),
            ),
        );
        for (k, v) in self.extra {
            doc.insert(k, v);
        }
        let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(doc))?;
        text.push('\n');
        let path = dir.join("manifest.json");
        write_file_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    #[test]
    fn float_formatting_is_17_digits() {
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(-0.5), "-5.0000000000000000e-1");
        // Round trip.
        for &v in &[std::f64::consts::PI, 1e-300, -2.2250738585072014e-308, 12345.6789] {
            let parsed: f64 = format_float(v).parse().unwrap();
            assert_eq!(parsed, v);
        }
    }

    #[test]
    fn network_json_round_trip() {
        let net = crate::presets::xor_demo_network(2.0);
        let text = network_to_json(&net).unwrap();
        let back = network_from_json(&text).unwrap();
        assert_eq!(net, back);
        assert!(text.contains("\"format\": \"regionlab-network\""));
        assert!(text.contains("\"gamma\": 3.0"));
    }

    #[test]
    fn network_json_rejects_bad_documents() {
        assert!(network_from_json("{}").is_err());
        let net = crate::presets::xor_demo_network(1.0);
        let wrong_version = network_to_json(&net).unwrap().replace("\"version\": 1", "\"version\": 9");
        assert!(network_from_json(&wrong_version).is_err());
        let unknown_key = network_to_json(&net)
            .unwrap()
            .replace("\"input_dim\"", "\"mystery\": 3, \"input_dim\"");
        assert!(network_from_json(&unknown_key).is_err());
    }

    #[test]
    fn pgm_layout() {
        let spec = GridSpec::new(0.0, 2.0, 0.0, 1.0, 2, 2).unwrap();
        let map = FieldMap {
            spec,
            values: vec![0.0, 1.0, 2.0, 4.0],
            name: "t".into(),
        };
        let bytes = field_pgm(&map);
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        // Top row of the image is the j = 1 (high y) row: values 2, 4.
        let pix = &bytes[header.len()..];
        assert_eq!(pix, &[128, 255, 0, 64]);
    }

    #[test]
    fn series_csv_shape() {
        let s = Series {
            name: "area".into(),
            index_label: "iteration".into(),
            index: vec![0.0, 100.0],
            values: vec![4.0, 3.5],
        };
        let text = series_csv(&s);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iteration,area");
        assert_eq!(lines.len(), 3);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn atomic_write_and_hash() {
        let dir = std::env::temp_dir().join(format!("regionlab-io-test-{}", std::process::id()));
        let path = dir.join("x/y.txt");
        let h1 = write_file_atomic(&path, b"hello\n").unwrap();
        let h2 = write_file_atomic(&path, b"hello\n").unwrap();
        assert_eq!(h1, h2);
        assert_eq!(h1.len(), 64);
        assert_eq!(fs::read(&path).unwrap(), b"hello\n");
        fs::remove_dir_all(&dir).unwrap();
    }
}
