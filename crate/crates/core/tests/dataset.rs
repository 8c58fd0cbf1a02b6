mod common;

use prognos_core::dataset::store::{decode_instances, encode_instances, load_prepared, save_prepared};
use prognos_core::dataset::synthetic::{generate, to_csv, BenchmarkConfig};
use prognos_core::dataset::{
    fit_normalizer, make_windows, parse_units, select_features, IngestConfig, Schema, UnitSeries, WindowGeometry,
};
use prognos_core::{Error, PreparedData, Rng};
use proptest::prelude::*;

fn ramp(id: u32, len: usize, j: usize) -> UnitSeries {
    common::unit(id, (0..len).map(|c| (0..j).map(|f| (100 * f + c) as f64).collect()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn window_count_and_targets(len in 1usize..120, n in 1usize..40, stride in 1usize..7) {
        let geometry = WindowGeometry::new(n.max(2), 2, 1).unwrap();
        let n = geometry.n;
        let unit = ramp(4, len, 2);
        let windows = make_windows(&unit, &geometry, stride, None).unwrap();
        let expected = if len < n { 0 } else { (len - n) / stride + 1 };
        prop_assert_eq!(windows.len(), expected);
        for (i, w) in windows.iter().enumerate() {
            let end = n + i * stride;
            prop_assert_eq!(w.end_cycle as usize, end);
            prop_assert_eq!(w.rul_target, Some((len - end) as f64));
            prop_assert_eq!(w.values.get(1, 0), (100 + end - n) as f64);
            prop_assert_eq!(w.values.get(0, n - 1), (end - 1) as f64);
        }
        if stride == 1 && len >= n {
            prop_assert_eq!(windows.last().unwrap().rul_target, Some(0.0));
        }
    }
}

#[test]
fn rul_cap_clips_targets() {
    let geometry = WindowGeometry::new(5, 1, 1).unwrap();
    let windows = make_windows(&ramp(1, 30, 1), &geometry, 1, Some(10.0)).unwrap();
    let targets: Vec<f64> = windows.iter().map(|w| w.rul_target.unwrap()).collect();
    assert!(targets.iter().all(|&t| t <= 10.0));
    assert_eq!(targets[0], 10.0);
    assert_eq!(*targets.last().unwrap(), 0.0);
    assert!(make_windows(&ramp(1, 30, 1), &geometry, 0, None).is_err());
    assert!(make_windows(&ramp(1, 30, 2), &geometry, 1, None).is_err());
}

#[test]
fn two_unit_toy_table() {
    let csv = "unit,cycle,s1,s2\n1,1,1.0,5\n1,2,2.0,6\n1,3,3.0,7\n2,1,4.0,8\n2,2,5.0,9\n2,3,6.0,10\n";
    let t = parse_units(csv, &Schema::default()).unwrap();
    assert_eq!(t.sensor_names, vec!["s1", "s2"]);
    assert_eq!(t.units.len(), 2);
    assert_eq!(t.units[0].cycles, vec![1, 2, 3]);
    assert_eq!(t.units[1].readings, vec![vec![4.0, 8.0], vec![5.0, 9.0], vec![6.0, 10.0]]);
    let headerless = "1 1 1.0 5\n1 2 2.0 6\n1 3 3.0 7\n2 1 4.0 8\n2 2 5.0 9\n2 3 6.0 10\n";
    let h = parse_units(headerless, &Schema::default()).unwrap();
    assert_eq!(h.units, t.units);
}

#[test]
fn malformed_tables_are_rejected() {
    let duplicate = "1,1,0.1\n1,1,0.2\n";
    assert!(matches!(parse_units(duplicate, &Schema::default()), Err(Error::Parse { .. })));
    let starts_late = "1,2,0.1\n1,3,0.2\n";
    assert!(matches!(parse_units(starts_late, &Schema::default()), Err(Error::Parse { .. })));
    let ragged = "1,1,0.1\n1,2\n";
    assert!(matches!(parse_units(ragged, &Schema::default()), Err(Error::Parse { line: 2, .. })));
    let fractional = "1,1.5,0.1\n";
    assert!(matches!(parse_units(fractional, &Schema::default()), Err(Error::Parse { .. })));
    assert!(matches!(parse_units("1,1\n", &Schema::default()), Err(Error::MissingColumn(_))));
}

#[test]
fn benchmark_selection_keeps_fourteen_of_thirty_two() {
    let bench = generate(&BenchmarkConfig {
        units: 10,
        ..Default::default()
    });
    let (units, kept) = select_features(&bench.table.units, 1e-8).unwrap();
    assert_eq!(bench.table.features(), 32);
    assert_eq!(kept.len(), 14);
    assert!(units.iter().all(|u| u.features() == 14));
    for c in &bench.informative_columns {
        assert!(kept.contains(c));
    }
    let constant = common::unit(1, vec![vec![1.0, 2.0]; 5]);
    assert!(matches!(
        select_features(&[constant], 1e-8),
        Err(Error::AllFeaturesDropped { .. })
    ));
}

#[test]
fn csv_export_parses_back_exactly() {
    let bench = generate(&BenchmarkConfig {
        units: 4,
        degradation_shape: Some(8.0),
        ..Default::default()
    });
    let back = parse_units(&to_csv(&bench.table), &Schema::default()).unwrap();
    assert_eq!(back, bench.table);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn normalizer_round_trips_and_centres(seed in 0u64..10_000, count in 1usize..8) {
        let mut rng = Rng::new(seed);
        let train: Vec<_> = (0..count)
            .map(|i| {
                let mut inst = common::random_instance(&mut rng, 3, 6);
                inst.values = prognos_core::Matrix::from_fn(3, 6, |f, t| inst.values.get(f, t) * 40.0 + 500.0).unwrap();
                inst.rul_target = Some(i as f64 * 3.0 + 1.0);
                inst
            })
            .collect();
        let norm = fit_normalizer(&train).unwrap();
        prop_assert_eq!(norm.rul_scale, (count - 1) as f64 * 3.0 + 1.0);
        for f in 0..3 {
            let cells: Vec<f64> = train
                .iter()
                .flat_map(|i| norm.apply(i).unwrap().values.row(f).to_vec())
                .collect();
            let m = cells.iter().sum::<f64>() / cells.len() as f64;
            let v = cells.iter().map(|x| (x - m).powi(2)).sum::<f64>() / cells.len() as f64;
            prop_assert!(m.abs() < 1e-9);
            prop_assert!((v - 1.0).abs() < 1e-9);
        }
        for inst in &train {
            let back = norm.invert(&norm.apply(inst).unwrap()).unwrap();
            for (a, b) in back.values.as_slice().iter().zip(inst.values.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs());
            }
        }
    }
}

#[test]
fn split_is_by_unit_and_reproducible() {
    let bench = generate(&BenchmarkConfig {
        units: 12,
        min_length: 40,
        max_length: 60,
        ..Default::default()
    });
    let config = IngestConfig {
        window: 20,
        horizon: 3,
        ..Default::default()
    };
    let a = PreparedData::from_table(&bench.table, &config).unwrap();
    let b = PreparedData::from_table(&bench.table, &config).unwrap();
    assert_eq!(a, b);
    let train_units: std::collections::BTreeSet<u32> = a.train.iter().map(|i| i.unit_id).collect();
    let test_units: std::collections::BTreeSet<u32> = a.test.iter().map(|i| i.unit_id).collect();
    assert_eq!(test_units.len(), 3);
    assert!(train_units.is_disjoint(&test_units));
    assert_eq!(a.normalizer.rul_scale, a.train.iter().map(|i| i.rul_target.unwrap()).fold(0.0, f64::max));

    // Re-ingesting with the frozen selection and statistics is the identity.
    let frozen = PreparedData::with_frozen(&bench.table, &config, &a.retained, &a.normalizer).unwrap();
    assert_eq!(frozen, a);
    assert!(PreparedData::with_frozen(&bench.table, &config, &[99], &a.normalizer).is_err());
}

#[test]
fn prepared_directory_round_trip() {
    let data = common::small_data();
    let dir = tempfile::tempdir().unwrap();
    save_prepared(dir.path(), &data).unwrap();
    let back = load_prepared(dir.path()).unwrap();
    assert_eq!(back.geometry, data.geometry);
    assert_eq!(back.normalizer, data.normalizer);
    assert_eq!(back.retained, data.retained);
    assert_eq!(back.train.len(), data.train.len());
    assert_eq!(back.test.len(), data.test.len());
    for (a, b) in back.train.iter().chain(&back.test).zip(data.train.iter().chain(&data.test)) {
        assert_eq!((a.unit_id, a.end_cycle, a.rul_target), (b.unit_id, b.end_cycle, b.rul_target));
        for (x, y) in a.values.as_slice().iter().zip(b.values.as_slice()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn instance_records_reject_damage() {
    let data = common::small_data();
    let g = data.geometry;
    let bytes = encode_instances(&data.test, g.j, g.n).unwrap();
    let (j, n, back) = decode_instances(&bytes).unwrap();
    assert_eq!((j, n), (g.j, g.n));
    assert_eq!(back, data.test);
    assert!(matches!(decode_instances(&bytes[..bytes.len() - 1]), Err(Error::Format(_))));
    let mut longer = bytes.clone();
    longer.push(0);
    assert!(matches!(decode_instances(&longer), Err(Error::Format(_))));
    let mut version = bytes.clone();
    version[4] = 9;
    assert!(matches!(decode_instances(&version), Err(Error::Version { found: 9, .. })));
    assert!(encode_instances(&data.test, g.j + 1, g.n).is_err());
}
