//! Binary instance records and the data-directory layout.
//!
//! A record file starts with `b"PRSG"`, a little-endian `u16` version, then
//! `J`, `N` and the record count as `u32`. Each record is `unit_id: u32`,
//! `end_cycle: u32`, `has_target: u8`, `rul_target: f64`, then `J·N`
//! values as `f64`, row-major by feature. Values are stored in sensor units.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{IngestConfig, Instance, Normalizer, PreparedData, WindowGeometry};
use crate::error::{Error, Result};
use crate::math::Matrix;

pub const RECORD_MAGIC: &[u8; 4] = b"PRSG";
pub const RECORD_VERSION: u16 = 1;

pub const TRAIN_FILE: &str = "train.prsg";
pub const TEST_FILE: &str = "test.prsg";
pub const META_FILE: &str = "meta.json";

pub fn encode_instances(instances: &[Instance], features: usize, steps: usize) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(18 + instances.len() * (17 + 8 * features * steps));
    out.extend_from_slice(RECORD_MAGIC);
    out.extend_from_slice(&RECORD_VERSION.to_le_bytes());
    out.extend_from_slice(&(features as u32).to_le_bytes());
    out.extend_from_slice(&(steps as u32).to_le_bytes());
    out.extend_from_slice(&(instances.len() as u32).to_le_bytes());
    for inst in instances {
        if inst.values.shape() != (features, steps) {
            return Err(Error::dims(format!("{features}x{steps}"), format!("{:?}", inst.values.shape())));
        }
        out.extend_from_slice(&inst.unit_id.to_le_bytes());
        out.extend_from_slice(&inst.end_cycle.to_le_bytes());
        out.push(u8::from(inst.rul_target.is_some()));
        out.extend_from_slice(&inst.rul_target.unwrap_or(0.0).to_le_bytes());
        for v in inst.values.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_instances(bytes: &[u8]) -> Result<(usize, usize, Vec<Instance>)> {
    let mut r = bytes;
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != RECORD_MAGIC {
        return Err(Error::Format("bad instance record magic".into()));
    }
    let version = u16::from_le_bytes(take(&mut r)?);
    if version != RECORD_VERSION {
        return Err(Error::Version {
            found: version,
            expected: RECORD_VERSION,
        });
    }
    let j = u32::from_le_bytes(take(&mut r)?) as usize;
    let n = u32::from_le_bytes(take(&mut r)?) as usize;
    let count = u32::from_le_bytes(take(&mut r)?) as usize;
    if j == 0 || n == 0 {
        return Err(Error::Format(format!("invalid record shape {j}x{n}")));
    }
    let record = 17 + 8 * j * n;
    if r.len() != count * record {
        return Err(Error::Format(format!(
            "expected {} payload bytes for {count} records, found {}",
            count * record,
            r.len()
        )));
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let unit_id = u32::from_le_bytes(take(&mut r)?);
        let end_cycle = u32::from_le_bytes(take(&mut r)?);
        let has_target: [u8; 1] = take(&mut r)?;
        let rul = f64::from_le_bytes(take(&mut r)?);
        let mut values = Vec::with_capacity(j * n);
        for _ in 0..j * n {
            values.push(f64::from_le_bytes(take(&mut r)?));
        }
        out.push(Instance {
            values: Matrix::new(j, n, values).map_err(|e| Error::Format(e.to_string()))?,
            rul_target: (has_target[0] != 0).then_some(rul),
            unit_id,
            end_cycle,
        });
    }
    Ok((j, n, out))
}

fn take<const K: usize>(r: &mut &[u8]) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    read_exact(r, &mut buf)?;
    Ok(buf)
}

fn read_exact(r: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Format("unexpected end of data".into()))
}

/// Sidecar describing a prepared data directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMeta {
    pub geometry: WindowGeometry,
    pub sensor_names: Vec<String>,
    pub retained: Vec<usize>,
    pub normalizer: Normalizer,
    pub config: IngestConfig,
}

pub fn save_prepared(dir: impl AsRef<Path>, data: &PreparedData) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (j, n) = (data.geometry.j, data.geometry.n);
    for (name, set) in [(TRAIN_FILE, &data.train), (TEST_FILE, &data.test)] {
        let raw = set
            .iter()
            .map(|i| data.normalizer.invert(i))
            .collect::<Result<Vec<_>>>()?;
        write_file(&dir.join(name), &encode_instances(&raw, j, n)?)?;
    }
    let meta = DataMeta {
        geometry: data.geometry,
        sensor_names: data.sensor_names.clone(),
        retained: data.retained.clone(),
        normalizer: data.normalizer.clone(),
        config: data.config.clone(),
    };
    write_file(&dir.join(META_FILE), serde_json::to_string_pretty(&meta)?.as_bytes())
}

/// Reads a data directory; instances come back normalized.
pub fn load_prepared(dir: impl AsRef<Path>) -> Result<PreparedData> {
    let dir = dir.as_ref();
    let meta_path = dir.join(META_FILE);
    let meta: DataMeta = serde_json::from_slice(&std::fs::read(&meta_path).map_err(|e| Error::io(&meta_path, e))?)?;
    let mut sets = Vec::new();
    for name in [TRAIN_FILE, TEST_FILE] {
        let path = dir.join(name);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let (j, n, raw) = decode_instances(&bytes)?;
        if (j, n) != (meta.geometry.j, meta.geometry.n) {
            return Err(Error::GeometryMismatch(format!("{name} holds {j}x{n} windows")));
        }
        sets.push(raw.iter().map(|i| meta.normalizer.apply(i)).collect::<Result<Vec<_>>>()?);
    }
    let test = sets.pop().unwrap_or_default();
    let train = sets.pop().unwrap_or_default();
    Ok(PreparedData {
        geometry: meta.geometry,
        sensor_names: meta.sensor_names,
        retained: meta.retained,
        normalizer: meta.normalizer,
        config: meta.config,
        train,
        test,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}
