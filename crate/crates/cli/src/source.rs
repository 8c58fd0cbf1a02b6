//! Loading bundles and the windows they are applied to.

use std::path::Path;

use prognos_core::dataset::store::load_prepared;
use prognos_core::dataset::{load_units, IngestConfig, Schema};
use prognos_core::models::load_bundle;
use prognos_core::{Error, Instance, ModelBundle, PreparedData};

use crate::error::{CliError, CliResult};

pub fn open_bundle(path: &Path) -> CliResult<ModelBundle> {
    load_bundle(path).map_err(CliError::Bundle)
}

/// A prepared data directory as written by `ingest`, or a unit/cycle CSV
/// ingested with `config`.
pub fn prepare(path: &Path, config: &IngestConfig) -> CliResult<PreparedData> {
    if path.is_dir() {
        return load_prepared(path).map_err(CliError::Data);
    }
    let table = load_units(path, &Schema::default()).map_err(CliError::Data)?;
    PreparedData::from_table(&table, config).map_err(CliError::Data)
}

/// Windows for `bundle`: a CSV is re-ingested with the bundle's frozen
/// feature selection and normalizer; a data directory must match both.
pub fn data_for_bundle(path: &Path, bundle: &ModelBundle) -> CliResult<PreparedData> {
    if path.is_dir() {
        let data = load_prepared(path).map_err(CliError::Data)?;
        if data.geometry != bundle.geometry || data.normalizer != bundle.normalizer {
            return Err(CliError::Data(Error::GeometryMismatch(format!(
                "{} was prepared with different windows or statistics than the bundle",
                path.display()
            ))));
        }
        return Ok(data);
    }
    let table = load_units(path, &Schema::default()).map_err(CliError::Data)?;
    PreparedData::with_frozen(&table, &bundle.meta.ingest, &bundle.meta.retained, &bundle.normalizer)
        .map_err(CliError::Data)
}

/// The `index`-th held-out window.
pub fn held_out(data: &PreparedData, index: usize) -> CliResult<&Instance> {
    data.test.get(index).ok_or_else(|| {
        CliError::Usage(format!(
            "instance {index} out of range ({} held-out windows)",
            data.test.len()
        ))
    })
}
