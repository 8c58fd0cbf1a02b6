use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::UnitSeries;
use crate::error::{Error, Result};

/// A column reference: by header name or zero-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl std::fmt::Display for Column {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Column::Index(i) => write!(f, "#{i}"),
            Column::Name(n) => f.write_str(n),
        }
    }
}

/// Which columns hold the unit id, the cycle counter and the sensors.
///
/// `sensors: None` takes every column other than unit and cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub unit: Column,
    pub cycle: Column,
    pub sensors: Option<Vec<Column>>,
}

impl Default for Schema {
    /// CMAPSS layout: unit, cycle, then sensors.
    fn default() -> Self {
        Schema {
            unit: Column::Index(0),
            cycle: Column::Index(1),
            sensors: None,
        }
    }
}

/// Units parsed from one file, with the sensor column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitTable {
    pub sensor_names: Vec<String>,
    pub units: Vec<UnitSeries>,
}

impl UnitTable {
    pub fn features(&self) -> usize {
        self.sensor_names.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Delimiter {
    Comma,
    Whitespace,
}

impl Delimiter {
    fn detect(line: &str) -> Self {
        if line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }

    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self {
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        }
    }
}

pub fn load_units(path: impl AsRef<Path>, schema: &Schema) -> Result<UnitTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_units(&text, schema)
}

/// Parses delimited text (comma or whitespace, detected from the first
/// line; a header is detected by a non-numeric first field).
pub fn parse_units(text: &str, schema: &Schema) -> Result<UnitTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (first_no, first) = lines.next().ok_or_else(|| Error::Empty("no rows in file".into()))?;
    let delim = Delimiter::detect(first);
    let first_fields = delim.split(first);
    let has_header = first_fields
        .first()
        .is_some_and(|f| f.parse::<f64>().is_err());
    let width = first_fields.len();
    let header: Option<Vec<String>> = has_header.then(|| first_fields.iter().map(|s| s.to_string()).collect());

    let resolve = |col: &Column| -> Result<usize> {
        match col {
            Column::Index(i) if *i < width => Ok(*i),
            Column::Index(_) => Err(Error::MissingColumn(col.to_string())),
            Column::Name(name) => header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == name))
                .ok_or_else(|| Error::MissingColumn(name.clone())),
        }
    };
    let unit_col = resolve(&schema.unit)?;
    let cycle_col = resolve(&schema.cycle)?;
    let sensor_cols: Vec<usize> = match &schema.sensors {
        Some(cols) => cols.iter().map(resolve).collect::<Result<_>>()?,
        None => (0..width).filter(|&c| c != unit_col && c != cycle_col).collect(),
    };
    if sensor_cols.is_empty() {
        return Err(Error::MissingColumn("sensor columns".into()));
    }
    let sensor_names = sensor_cols
        .iter()
        .enumerate()
        .map(|(k, &c)| match &header {
            Some(h) => h[c].clone(),
            None => format!("s{}", k + 1),
        })
        .collect();

    let data_rows: Box<dyn Iterator<Item = (usize, &str)>> = if has_header {
        Box::new(lines)
    } else {
        Box::new(std::iter::once((first_no, first)).chain(lines))
    };

    let mut grouped: BTreeMap<u32, Vec<(u32, usize, Vec<f64>)>> = BTreeMap::new();
    for (line, row) in data_rows {
        let fields = delim.split(row);
        if fields.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        let unit = parse_index(fields[unit_col], line, "unit id")?;
        let cycle = parse_index(fields[cycle_col], line, "cycle")?;
        let readings = sensor_cols
            .iter()
            .map(|&c| {
                fields[c]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: format!("non-numeric sensor value {:?} in column {}", fields[c], c),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        grouped.entry(unit).or_default().push((cycle, line, readings));
    }
    if grouped.is_empty() {
        return Err(Error::Empty("no data rows in file".into()));
    }

    let mut units = Vec::with_capacity(grouped.len());
    for (unit_id, mut rows) in grouped {
        rows.sort_by_key(|r| r.0);
        for (expected, (cycle, line, _)) in (1u32..).zip(&rows) {
            if *cycle != expected {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("unit {unit_id}: expected cycle {expected}, found {cycle}"),
                });
            }
        }
        units.push(UnitSeries {
            unit_id,
            cycles: rows.iter().map(|r| r.0).collect(),
            readings: rows.into_iter().map(|r| r.2).collect(),
        });
    }
    Ok(UnitTable { sensor_names, units })
}

fn parse_index(field: &str, line: usize, what: &str) -> Result<u32> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.fract() == 0.0 && *v >= 0.0 && *v <= u32::MAX as f64)
        .map(|v| v as u32)
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("invalid {what} {field:?}"),
        })
}
