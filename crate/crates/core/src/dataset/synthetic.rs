//! Synthetic run-to-failure fleet with planted structure, used for the
//! benchmark and tests.
//!
//! Each unit degrades along a health index `h` rising from 0 to 1 at failure.
//! By default `h` is the deterministic ramp `cycle / length`; with a shape
//! parameter it is a gamma process (independent, positive increments) whose
//! expected life is drawn per unit. Informative sensors follow monotone
//! curves in `h` plus noise; the remaining sensors are pure noise, and a block
//! of constant columns is interleaved so feature selection has something to
//! remove.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{UnitSeries, UnitTable};
use crate::math::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub units: usize,
    pub informative: usize,
    pub noise_features: usize,
    pub constant_columns: usize,
    pub min_length: usize,
    pub max_length: usize,
    /// Gamma shape of the per-cycle health increments. Smaller is more
    /// erratic; `None` gives a linear ramp.
    pub degradation_shape: Option<f64>,
    /// Measurement noise relative to the degradation amplitude.
    pub noise_ratio: f64,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            units: 80,
            informative: 6,
            noise_features: 8,
            constant_columns: 18,
            min_length: 110,
            max_length: 200,
            degradation_shape: None,
            noise_ratio: 0.25,
            seed: 2021,
        }
    }
}

/// Generated fleet plus the ground truth about its columns.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub table: UnitTable,
    /// Sensor positions (in `table`) of the informative signals.
    pub informative_columns: Vec<usize>,
    pub constant_columns: Vec<usize>,
}

impl BenchmarkConfig {
    pub fn columns(&self) -> usize {
        self.informative + self.noise_features + self.constant_columns
    }
}

#[derive(Debug, Clone, Copy)]
enum ColumnKind {
    Informative { base: f64, amplitude: f64, exponent: f64, noise: f64 },
    Noise { base: f64, noise: f64 },
    Constant(f64),
}

pub fn generate(config: &BenchmarkConfig) -> Benchmark {
    let mut rng = Rng::new(config.seed);
    let mut kinds = Vec::with_capacity(config.columns());
    for k in 0..config.informative {
        let magnitude = rng.uniform_range(2.0, 8.0);
        let amplitude = if k % 2 == 0 { magnitude } else { -magnitude };
        kinds.push(ColumnKind::Informative {
            base: rng.uniform_range(20.0, 600.0),
            amplitude,
            exponent: [1.0, 1.5, 2.0][k % 3],
            noise: magnitude * config.noise_ratio,
        });
    }
    for _ in 0..config.noise_features {
        kinds.push(ColumnKind::Noise {
            base: rng.uniform_range(1.0, 100.0),
            noise: rng.uniform_range(0.5, 2.0),
        });
    }
    for _ in 0..config.constant_columns {
        kinds.push(ColumnKind::Constant((rng.uniform_range(0.0, 1000.0) * 100.0).round() / 100.0));
    }
    rng.shuffle(&mut kinds);

    let mut units = Vec::with_capacity(config.units);
    for u in 0..config.units {
        let life = config.min_length + rng.below(config.max_length - config.min_length + 1);
        let health = health_path(life, config.degradation_shape, &mut rng);
        let len = health.len();
        let offsets: Vec<f64> = kinds.iter().map(|_| rng.normal()).collect();
        let readings = health
            .iter()
            .map(|&h| {
                kinds
                    .iter()
                    .zip(&offsets)
                    .map(|(kind, off)| match *kind {
                        ColumnKind::Informative { base, amplitude, exponent, noise } => {
                            base + 0.1 * amplitude.abs() * off + amplitude * h.powf(exponent) + noise * rng.normal()
                        }
                        ColumnKind::Noise { base, noise } => base + 0.2 * noise * off + noise * rng.normal(),
                        ColumnKind::Constant(c) => c,
                    })
                    .collect()
            })
            .collect();
        units.push(UnitSeries {
            unit_id: u as u32 + 1,
            cycles: (1..=len as u32).collect(),
            readings,
        });
    }

    let pick = |pred: fn(&ColumnKind) -> bool| -> Vec<usize> {
        kinds.iter().enumerate().filter(|(_, k)| pred(k)).map(|(i, _)| i).collect()
    };
    Benchmark {
        informative_columns: pick(|k| matches!(k, ColumnKind::Informative { .. })),
        constant_columns: pick(|k| matches!(k, ColumnKind::Constant(_))),
        table: UnitTable {
            sensor_names: (1..=kinds.len()).map(|i| format!("sensor_{i:02}")).collect(),
            units,
        },
    }
}

/// Health index per cycle, ending at exactly 1 on the failure cycle.
fn health_path(life: usize, shape: Option<f64>, rng: &mut Rng) -> Vec<f64> {
    let Some(shape) = shape else {
        return (1..=life).map(|c| c as f64 / life as f64).collect();
    };
    let scale = 1.0 / (shape * life as f64);
    let mut path = Vec::with_capacity(life + life / 2);
    let mut h = 0.0;
    loop {
        h += rng.gamma(shape, scale);
        if h >= 1.0 {
            path.push(1.0);
            return path;
        }
        path.push(h);
    }
}

/// Comma-separated text with a `unit,cycle,<sensors…>` header.
pub fn to_csv(table: &UnitTable) -> String {
    let mut out = String::from("unit,cycle");
    for name in &table.sensor_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for unit in &table.units {
        for (cycle, row) in unit.cycles.iter().zip(&unit.readings) {
            let _ = write!(out, "{},{}", unit.unit_id, cycle);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
    out
}
