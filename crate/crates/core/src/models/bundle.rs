//! Trained models persisted together with their data contract.
//!
//! Layout (little-endian): `b"PRSGMB"`, `u16` version, `N J Z` as `u32`,
//! normalizer means and stds (`J` × `f64` each) and `rul_scale`, a
//! length-prefixed JSON metadata block, then the PM, NF and XYZ networks.
//! Each network is a `u32` size count, the sizes as `u32`, then per layer
//! the `out × in` weights followed by the biases.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Mlp, Predictor, TrainReport};
use crate::dataset::{IngestConfig, Normalizer, WindowGeometry};
use crate::error::{Error, Result};

pub const BUNDLE_MAGIC: &[u8; 6] = b"PRSGMB";
pub const BUNDLE_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFingerprint {
    pub epochs: usize,
    pub final_loss: f64,
}

impl From<&TrainReport> for ModelFingerprint {
    fn from(r: &TrainReport) -> Self {
        ModelFingerprint {
            epochs: r.epochs_run,
            final_loss: r.final_loss,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprints {
    pub seed: u64,
    pub pm: ModelFingerprint,
    pub nf: ModelFingerprint,
    pub xyz: ModelFingerprint,
}

/// Metadata carried in the bundle's JSON block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub sensor_names: Vec<String>,
    pub retained: Vec<usize>,
    pub ingest: IngestConfig,
    pub fingerprints: Fingerprints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub pm: Mlp,
    pub nf: Mlp,
    pub xyz: Mlp,
    pub normalizer: Normalizer,
    pub geometry: WindowGeometry,
    pub meta: BundleMeta,
}

impl ModelBundle {
    pub fn new(
        pm: Mlp,
        nf: Mlp,
        xyz: Mlp,
        normalizer: Normalizer,
        geometry: WindowGeometry,
        meta: BundleMeta,
    ) -> Result<Self> {
        let b = ModelBundle {
            pm,
            nf,
            xyz,
            normalizer,
            geometry,
            meta,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        g.validate()?;
        let expect = |name: &str, net: &Mlp, input: usize, output: usize| {
            if net.input_dim() != input || net.output_dim() != output {
                Err(Error::GeometryMismatch(format!(
                    "{name} maps {} → {}, geometry requires {input} → {output}",
                    net.input_dim(),
                    net.output_dim()
                )))
            } else {
                Ok(())
            }
        };
        expect("PM", &self.pm, g.j * g.n, 1)?;
        expect("NF", &self.nf, g.j * g.n, g.j * g.z)?;
        expect("XYZ", &self.xyz, g.j * g.x() + 1, g.j * g.z)?;
        if self.normalizer.features() != g.j || self.normalizer.std.len() != g.j {
            return Err(Error::GeometryMismatch(format!(
                "normalizer has {} features, geometry {}",
                self.normalizer.features(),
                g.j
            )));
        }
        if !(self.normalizer.rul_scale > 0.0) {
            return Err(Error::Format("rul_scale must be positive".into()));
        }
        Ok(())
    }

    pub fn predictor(&self) -> Predictor<'_> {
        Predictor {
            net: &self.pm,
            rul_scale: self.normalizer.rul_scale,
        }
    }

    pub fn rul_scale(&self) -> f64 {
        self.normalizer.rul_scale
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(BUNDLE_MAGIC);
        out.extend_from_slice(&BUNDLE_VERSION.to_le_bytes());
        for v in [self.geometry.n, self.geometry.j, self.geometry.z] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for v in self.normalizer.mean.iter().chain(&self.normalizer.std) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.normalizer.rul_scale.to_le_bytes());
        let meta = serde_json::to_vec(&self.meta)?;
        out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
        out.extend_from_slice(&meta);
        for net in [&self.pm, &self.nf, &self.xyz] {
            let sizes = net.sizes();
            out.extend_from_slice(&(sizes.len() as u32).to_le_bytes());
            for s in &sizes {
                out.extend_from_slice(&(*s as u32).to_le_bytes());
            }
            for layer in net.layers() {
                for v in layer.weights().iter().chain(layer.bias()) {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes };
        if r.take(6)? != BUNDLE_MAGIC {
            return Err(Error::Format("not a model bundle (bad magic)".into()));
        }
        let version = u16::from_le_bytes(r.array()?);
        if version != BUNDLE_VERSION {
            return Err(Error::Version {
                found: version,
                expected: BUNDLE_VERSION,
            });
        }
        let n = r.u32()? as usize;
        let j = r.u32()? as usize;
        let z = r.u32()? as usize;
        let geometry = WindowGeometry::new(n, j, z).map_err(|e| Error::Format(e.to_string()))?;
        let mean = r.f64s(j)?;
        let std = r.f64s(j)?;
        let rul_scale = r.f64()?;
        let meta_len = r.u32()? as usize;
        let meta: BundleMeta = serde_json::from_slice(r.take(meta_len)?)
            .map_err(|e| Error::Format(format!("metadata: {e}")))?;
        let mut nets = Vec::with_capacity(3);
        for _ in 0..3 {
            let count = r.u32()? as usize;
            if !(2..=64).contains(&count) {
                return Err(Error::Format(format!("implausible layer count {count}")));
            }
            let sizes = (0..count).map(|_| r.u32().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
            let mut weights = Vec::with_capacity(count - 1);
            let mut biases = Vec::with_capacity(count - 1);
            for w in sizes.windows(2) {
                weights.push(r.f64s(w[0] * w[1])?);
                biases.push(r.f64s(w[1])?);
            }
            nets.push(Mlp::from_parts(&sizes, weights, biases).map_err(|e| Error::Format(e.to_string()))?);
        }
        if !r.buf.is_empty() {
            return Err(Error::Format(format!("{} trailing bytes", r.buf.len())));
        }
        let xyz = nets.pop().expect("three networks");
        let nf = nets.pop().expect("three networks");
        let pm = nets.pop().expect("three networks");
        ModelBundle::new(pm, nf, xyz, Normalizer { mean, std, rul_scale }, geometry, meta)
            .map_err(|e| Error::Format(e.to_string()))
    }

    /// Human-readable summary (no parameters).
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "format": { "magic": "PRSGMB", "version": BUNDLE_VERSION },
            "geometry": {
                "n": self.geometry.n,
                "j": self.geometry.j,
                "z": self.geometry.z,
                "x": self.geometry.x(),
            },
            "normalizer": self.normalizer,
            "layers": {
                "pm": self.pm.sizes(),
                "nf": self.nf.sizes(),
                "xyz": self.xyz.sizes(),
            },
            "sensor_names": self.meta.sensor_names,
            "retained": self.meta.retained,
            "ingest": self.meta.ingest,
            "fingerprints": self.meta.fingerprints,
        })
    }
}

pub fn save_bundle(bundle: &ModelBundle, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, bundle.to_bytes()?).map_err(|e| Error::io(path, e))
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<ModelBundle> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    ModelBundle::from_bytes(&bytes)
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.buf.len() < len {
            return Err(Error::Format("truncated bundle".into()));
        }
        let (head, tail) = self.buf.split_at(len);
        self.buf = tail;
        Ok(head)
    }

    fn array<const K: usize>(&mut self) -> Result<[u8; K]> {
        Ok(self.take(K)?.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        let bytes = self.take(count.checked_mul(8).ok_or_else(|| Error::Format("size overflow".into()))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }
}
