//! Binary weight files plus a JSON sidecar for everything the binary omits.
//!
//! Layout, all little-endian: magic `FXW1`, u32 layer count, then per layer
//! u32 in_dim, u32 out_dim, `out*in` f32 weights row-major, `out` f32 biases.
//! The sidecar records activation kinds and, once quantized, the calibrated
//! scales and requantization factors.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::net::{Activation, LayerSpec, LayerWeights, NetworkSpec, WeightSet};
use crate::qnet::QuantizedNetwork;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"FXW1";

/// Sidecar contents: what the binary format does not carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetManifest {
    pub schema_version: u32,
    pub activations: Vec<Activation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantization: Option<QuantManifest>,
}

/// Calibrated quantization parameters, one entry per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantManifest {
    pub bits: u8,
    pub input_scale: f64,
    pub layers: Vec<QuantLayerManifest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantLayerManifest {
    pub weight_scale: f64,
    pub output_scale: f64,
    pub multiplier: u32,
    pub shift: u8,
}

impl NetManifest {
    pub fn new(spec: &NetworkSpec) -> Self {
        Self {
            schema_version: 1,
            activations: spec.layers.iter().map(|l| l.activation).collect(),
            quantization: None,
        }
    }

    pub fn with_quantization(mut self, q: &QuantizedNetwork) -> Self {
        self.quantization = Some(QuantManifest {
            bits: q.bits,
            input_scale: q.input_scale,
            layers: q
                .layers
                .iter()
                .map(|l| QuantLayerManifest {
                    weight_scale: l.weight_scale,
                    output_scale: l.output_scale,
                    multiplier: l.requant.multiplier,
                    shift: l.requant.shift,
                })
                .collect(),
        });
        self
    }
}

/// Conventional sidecar location: the weight path with `.json` appended.
pub fn sidecar_path(weights: &Path) -> PathBuf {
    let mut p = weights.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Writes the binary weight file.
pub fn write_weights(path: &Path, spec: &NetworkSpec, w: &WeightSet) -> Result<()> {
    spec.validate()?;
    w.validate_against(spec)?;
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&(spec.layers.len() as u32).to_le_bytes())?;
    for (spec_l, w_l) in spec.layers.iter().zip(&w.layers) {
        out.write_all(&(spec_l.in_dim as u32).to_le_bytes())?;
        out.write_all(&(spec_l.out_dim as u32).to_le_bytes())?;
        for v in w_l.weights.iter().chain(&w_l.bias) {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Reads the binary weight file back: per-layer `(in_dim, out_dim)` plus values.
pub fn read_weights(path: &Path) -> Result<(Vec<(u32, u32)>, WeightSet)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let count = read_u32(&mut r)? as usize;
    if count == 0 || count > 1024 {
        return Err(Error::Format(format!("implausible layer count {count}")));
    }
    let mut dims = Vec::with_capacity(count);
    let mut layers = Vec::with_capacity(count);
    for _ in 0..count {
        let in_dim = read_u32(&mut r)?;
        let out_dim = read_u32(&mut r)?;
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::Format("zero layer dimension".into()));
        }
        let n = in_dim as usize * out_dim as usize;
        let mut buf = vec![0u8; (n + out_dim as usize) * 4];
        r.read_exact(&mut buf)?;
        let vals: Vec<f32> = buf.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
        dims.push((in_dim, out_dim));
        layers.push(LayerWeights {
            weights: vals[..n].to_vec(),
            bias: vals[n..].to_vec(),
        });
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after last layer".into()));
    }
    Ok((dims, WeightSet { layers }))
}

pub fn write_manifest(path: &Path, m: &NetManifest) -> Result<()> {
    let json = serde_json::to_string_pretty(m)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<NetManifest> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Writes weights plus sidecar in one step.
pub fn save_network(
    weights_path: &Path,
    spec: &NetworkSpec,
    w: &WeightSet,
    quantized: Option<&QuantizedNetwork>,
) -> Result<()> {
    write_weights(weights_path, spec, w)?;
    let mut manifest = NetManifest::new(spec);
    if let Some(q) = quantized {
        manifest = manifest.with_quantization(q);
    }
    write_manifest(&sidecar_path(weights_path), &manifest)
}

/// Loads weights plus sidecar and reassembles the architecture.
pub fn load_network(weights_path: &Path) -> Result<(NetworkSpec, WeightSet, NetManifest)> {
    let (dims, w) = read_weights(weights_path)?;
    let manifest = read_manifest(&sidecar_path(weights_path))?;
    if manifest.activations.len() != dims.len() {
        return Err(Error::Format(format!(
            "sidecar lists {} activations for {} layers",
            manifest.activations.len(),
            dims.len()
        )));
    }
    let spec = NetworkSpec {
        layers: dims
            .iter()
            .zip(&manifest.activations)
            .map(|(&(i, o), &activation)| LayerSpec {
                in_dim: i as usize,
                out_dim: o as usize,
                activation,
            })
            .collect(),
    };
    spec.validate()?;
    w.validate_against(&spec)?;
    Ok((spec, w, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::random_weights;

    #[test]
    fn weights_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.fxw");
        let spec = NetworkSpec::mlp(&[7, 5, 3]).unwrap();
        let w = random_weights(&spec, 99, 1.0);
        write_weights(&path, &spec, &w).unwrap();
        let (dims, back) = read_weights(&path).unwrap();
        assert_eq!(dims, vec![(7, 5), (5, 3)]);
        assert_eq!(back, w);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bogus.fxw");
        std::fs::write(&path, b"NOPE\x01\x00\x00\x00").unwrap();
        assert!(matches!(read_weights(&path), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.fxw");
        let spec = NetworkSpec::mlp(&[4, 2]).unwrap();
        let w = random_weights(&spec, 1, 1.0);
        write_weights(&path, &spec, &w).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(read_weights(&path).is_err());
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trail.fxw");
        let spec = NetworkSpec::mlp(&[4, 2]).unwrap();
        let w = random_weights(&spec, 1, 1.0);
        write_weights(&path, &spec, &w).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.push(0);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_weights(&path), Err(Error::Format(_))));
    }

    #[test]
    fn sidecar_restores_architecture_and_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.fxw");
        let spec = NetworkSpec::mlp(&[6, 4, 2]).unwrap();
        let w = random_weights(&spec, 5, 0.5);
        let cal: Vec<Vec<f32>> = (0..4).map(|i| vec![0.1 * (i as f32 + 1.0); 6]).collect();
        let q = crate::quantize_network(&spec, &w, &cal, 8).unwrap();
        save_network(&path, &spec, &w, Some(&q)).unwrap();

        let (spec2, w2, manifest) = load_network(&path).unwrap();
        assert_eq!(spec2, spec);
        assert_eq!(w2, w);
        let qm = manifest.quantization.unwrap();
        assert_eq!(qm.bits, 8);
        assert_eq!(qm.input_scale, q.input_scale);
        assert_eq!(qm.layers[1].multiplier, q.layers[1].requant.multiplier);
    }
}
