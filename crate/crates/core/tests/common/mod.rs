#![allow(dead_code)]

use prognos_core::dataset::synthetic::{generate, BenchmarkConfig};
use prognos_core::dataset::{IngestConfig, UnitSeries};
use prognos_core::{train_bundle, Instance, Matrix, ModelBundle, PreparedData, Rng, TrainPlan};

/// A small fleet cut into 20-step windows with a 3-step horizon.
pub fn small_data() -> PreparedData {
    let bench = generate(&BenchmarkConfig {
        units: 8,
        min_length: 40,
        max_length: 60,
        ..Default::default()
    });
    let config = IngestConfig {
        window: 20,
        horizon: 3,
        train_stride: 2,
        eval_stride: 4,
        ..Default::default()
    };
    PreparedData::from_table(&bench.table, &config).unwrap()
}

pub fn small_plan(seed: u64) -> TrainPlan {
    TrainPlan::with_seed(seed).map(|c| {
        c.epochs = 3;
        c.hidden = vec![8, 4];
        c.learning_rate = 1e-2;
    })
}

pub fn small_bundle() -> (PreparedData, ModelBundle) {
    let data = small_data();
    let bundle = train_bundle(&data, &small_plan(5)).unwrap();
    (data, bundle)
}

pub fn random_instance(rng: &mut Rng, j: usize, n: usize) -> Instance {
    Instance {
        values: Matrix::from_fn(j, n, |_, _| rng.normal()).unwrap(),
        rul_target: None,
        unit_id: 1,
        end_cycle: n as u32,
    }
}

/// A unit whose readings are given per cycle.
pub fn unit(id: u32, readings: Vec<Vec<f64>>) -> UnitSeries {
    UnitSeries {
        unit_id: id,
        cycles: (1..=readings.len() as u32).collect(),
        readings,
    }
}
