//! End-to-end acceptance run on the synthetic benchmark. Prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use clap::Parser;
use http_body_util::BodyExt;
use prognos_cli::commands::load_bundles;
use prognos_cli::server::{router, AppState};
use prognos_cli::{run, Cli};
use prognos_core::dataset::synthetic::{generate, to_csv, BenchmarkConfig};
use prognos_core::dataset::IngestConfig;
use prognos_core::explain::{
    evaluate_truthfulness, explain_ipca, explain_mean, generate_neighbors, Neighborhood, NeighborhoodConfig,
    ProbeConfig,
};
use prognos_core::forecast::static_forecast;
use prognos_core::math::{derive_seed, first_principal_component, weighted_ridge_fit, LinearFit};
use prognos_core::models::{
    load_bundle, nf_train, pm_train, save_bundle, xyz_train, BundleMeta, Fingerprints, Gradients, Mlp,
    ModelFingerprint, Scratch,
};
use prognos_core::prescribe::{apply_modification, recommend};
use prognos_core::{
    evaluate, Engine, ExplainMethod, ForecasterChoice, Instance, Matrix, Modification, ModificationKind, ModelBundle,
    PrescribeMode, PreparedData, Rng, StaticMode, TrainPlan,
};
use serde_json::{json, Value};
use tower::ServiceExt;

const SEED: u64 = 7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Board {
    failures: usize,
}

impl Board {
    fn record(&mut self, name: &str, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            self.failures += 1;
        }
        println!(
            "{} {name}: {} [{:.1}s]",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
}

// ---------------------------------------------------------------- numerics

fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / m).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for k in 0..d {
                cov[i][k] += (r[i] - mean[i]) * (r[k] - mean[k]);
            }
        }
    }
    cov.iter_mut().flatten().for_each(|v| *v /= m - 1.0);
    cov
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Descending eigenvalues and the dominant unit eigenvector of a symmetric
/// 2×2 (quadratic formula) or 3×3 (trigonometric cubic) matrix.
fn analytic_eigen(c: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    if c.len() == 2 {
        let (a, b, d) = (c[0][0], c[0][1], c[1][1]);
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        let l1 = mid + rad;
        let v = if (l1 - a).abs() > (l1 - d).abs() { [b, l1 - a] } else { [l1 - d, b] };
        let n = v[0].hypot(v[1]);
        return (vec![l1, mid - rad], vec![v[0] / n, v[1] / n]);
    }
    let q = (c[0][0] + c[1][1] + c[2][2]) / 3.0;
    let p1 = c[0][1].powi(2) + c[0][2].powi(2) + c[1][2].powi(2);
    let p = (((c[0][0] - q).powi(2) + (c[1][1] - q).powi(2) + (c[2][2] - q).powi(2) + 2.0 * p1) / 6.0).sqrt();
    let b = |i: usize, k: usize| (c[i][k] - if i == k { q } else { 0.0 }) / p;
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let row = |i: usize| [0, 1, 2].map(|k| c[i][k] - if i == k { l1 } else { 0.0 });
    let best = [cross(row(0), row(1)), cross(row(0), row(2)), cross(row(1), row(2))]
        .into_iter()
        .max_by(|a, b| a.iter().map(|v| v * v).sum::<f64>().total_cmp(&b.iter().map(|v| v * v).sum::<f64>()))
        .unwrap();
    let n = best.iter().map(|v| v * v).sum::<f64>().sqrt();
    (vec![l1, 3.0 * q - l1 - l3, l3], best.iter().map(|v| v / n).collect())
}

fn random_rows(rng: &mut Rng, m: usize, d: usize) -> Vec<Vec<f64>> {
    let scales: Vec<f64> = (0..d).map(|_| rng.uniform_range(0.2, 3.0)).collect();
    let mix: Vec<f64> = (0..d * d).map(|_| rng.normal()).collect();
    (0..m)
        .map(|_| {
            let z: Vec<f64> = (0..d).map(|k| scales[k] * rng.normal()).collect();
            (0..d).map(|i| (0..d).map(|k| mix[i * d + k] * z[k]).sum::<f64>() + 5.0).collect()
        })
        .collect()
}

fn pca_worst_cosine() -> f64 {
    let mut rng = Rng::new(99);
    let (mut checked, mut worst) = (0u64, 1.0f64);
    while checked < 500 {
        let d = 2 + rng.below(2);
        let m = 6 + rng.below(40);
        let rows = random_rows(&mut rng, m, d);
        let (values, vector) = analytic_eigen(&covariance(&rows));
        // Near-equal leading eigenvalues leave the eigenvector undetermined.
        if values[1] / values[0] > 0.95 {
            continue;
        }
        let pca = first_principal_component(&Matrix::from_rows(&rows).unwrap(), &mut Rng::new(checked)).unwrap();
        let cos: f64 = pca.loadings.iter().zip(&vector).map(|(a, b)| a * b).sum();
        worst = worst.min(cos.abs());
        checked += 1;
    }
    worst
}

fn ridge_worst_gradient() -> f64 {
    let mut rng = Rng::new(17);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let (m, d) = (8 + rng.below(40), 1 + rng.below(6));
        let x = Matrix::from_fn(m, d, |_, _| rng.normal()).unwrap();
        let y: Vec<f64> = (0..m).map(|_| rng.normal() * 2.0 + 1.0).collect();
        let w: Vec<f64> = (0..m).map(|_| rng.uniform_range(0.05, 1.0)).collect();
        let lambda = [0.0, 1e-3, 0.5, 3.0][case % 4];
        let LinearFit { coefficients, intercept } = weighted_ridge_fit(&x, &y, &w, lambda).unwrap();
        let mut theta = coefficients;
        theta.push(intercept);
        let objective = |t: &[f64]| {
            (0..m)
                .map(|r| {
                    let pred = t[d] + x.row(r).iter().zip(&t[..d]).map(|(v, c)| v * c).sum::<f64>();
                    w[r] * (y[r] - pred).powi(2)
                })
                .sum::<f64>()
                + lambda * t[..d].iter().map(|c| c * c).sum::<f64>()
        };
        let h = 1e-3;
        for k in 0..theta.len() {
            let (mut up, mut down) = (theta.clone(), theta.clone());
            up[k] += h;
            down[k] -= h;
            worst = worst.max(((objective(&up) - objective(&down)) / (2.0 * h)).abs());
        }
    }
    worst
}

fn backprop_worst_relative_error() -> f64 {
    let mut rng = Rng::new(11);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for case in 0..12u64 {
        let mut sizes = vec![2 + rng.below(5)];
        for _ in 0..1 + case % 3 {
            sizes.push(1 + rng.below(6));
        }
        let net = Mlp::new(&sizes, &mut rng.fork(case)).unwrap();
        let input: Vec<f64> = (0..sizes[0]).map(|_| rng.normal()).collect();
        let target: Vec<f64> = (0..*sizes.last().unwrap()).map(|_| rng.normal()).collect();
        let mut grads = Gradients::zeros_like(&net);
        net.accumulate_gradient(&input, &target, &mut grads, &mut Scratch::new(&net));
        for l in 0..net.layers().len() {
            for (bias, count) in [(false, net.layers()[l].weights().len()), (true, net.layers()[l].bias().len())] {
                for p in 0..count {
                    let loss = |delta: f64| {
                        let mut n = net.clone();
                        let layer = &mut n.layers_mut()[l];
                        if bias {
                            layer.bias_mut()[p] += delta;
                        } else {
                            layer.weights_mut()[p] += delta;
                        }
                        n.loss(&input, &target).unwrap()
                    };
                    let numeric = (loss(h) - loss(-h)) / (2.0 * h);
                    let analytic = if bias { grads.biases[l][p] } else { grads.weights[l][p] };
                    let scale = analytic.abs().max(numeric.abs());
                    if scale >= 1e-8 {
                        worst = worst.max((analytic - numeric).abs() / scale);
                    }
                }
            }
        }
    }
    worst
}

fn numerics() -> Outcome {
    let start = Instant::now();
    let cos = pca_worst_cosine();
    let grad = ridge_worst_gradient();
    let rel = backprop_worst_relative_error();
    let elapsed = start.elapsed();
    outcome(
        1.0 - cos <= 1e-7 && grad <= 1e-7 && rel <= 1e-4 && elapsed < Duration::from_secs(30),
        format!(
            "PCA worst 1-|cos| {:.1e} (<= 1e-7, 500 cases); ridge worst |grad| {grad:.1e} (<= 1e-7); backprop worst rel err {rel:.1e} (<= 1e-4); {:.2}s (< 30s)",
            1.0 - cos,
            elapsed.as_secs_f64()
        ),
    )
}

// ------------------------------------------------------- static forecaster

fn static_forecaster() -> Outcome {
    let mut rng = Rng::new(5);
    let mut affine_err: f64 = 0.0;
    for _ in 0..500 {
        let (j, n) = (1 + rng.below(14), 2 + rng.below(60));
        let z = 1 + rng.below(n - 1);
        let coef: Vec<(f64, f64)> = (0..j).map(|_| (rng.uniform_range(-5.0, 5.0), rng.uniform_range(-2.0, 2.0))).collect();
        let w = Matrix::from_fn(j, n, |f, t| coef[f].0 + coef[f].1 * t as f64).unwrap();
        let out = static_forecast(&w, z, StaticMode::Reflect).unwrap();
        for k in 0..z {
            for f in 0..j {
                affine_err = affine_err.max((out.values.get(k, f) - (coef[f].0 + coef[f].1 * (n + k) as f64)).abs());
            }
        }
    }
    let mut mismatches = 0;
    for _ in 0..1000 {
        let (j, n) = (1 + rng.below(14), 2 + rng.below(70));
        let z = 1 + rng.below(n - 1);
        let w = Matrix::from_fn(j, n, |_, _| rng.uniform_range(-100.0, 100.0)).unwrap();
        let out = static_forecast(&w, z, StaticMode::Reflect).unwrap();
        for k in 1..=z {
            for f in 0..j {
                if out.values.get(k - 1, f) != 2.0 * w.get(f, n - 1) - w.get(f, n - 1 - k) {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(
        affine_err <= 1e-9 && mismatches == 0,
        format!("affine max error {affine_err:.1e} (<= 1e-9, 500 windows); hand-formula mismatches {mismatches}/1000 windows"),
    )
}

// ------------------------------------------------------------- benchmark

struct Trained {
    data: PreparedData,
    bundle: ModelBundle,
    csv: String,
    pm_seconds: f64,
}

fn train_benchmark() -> Trained {
    let bench = generate(&BenchmarkConfig::default());
    let data = PreparedData::from_table(&bench.table, &IngestConfig::default()).unwrap();
    let plan = TrainPlan::tuned(SEED);
    let g = data.geometry;
    let scale = data.normalizer.rul_scale;
    let start = Instant::now();
    let pm = pm_train(&data.train, &g, scale, &plan.pm).unwrap();
    let pm_seconds = start.elapsed().as_secs_f64();
    let nf = nf_train(&data.train, &g, &plan.nf).unwrap();
    let xyz = xyz_train(&data.train, &pm.model, &g, scale, &plan.xyz).unwrap();
    let meta = BundleMeta {
        sensor_names: data.sensor_names.clone(),
        retained: data.retained.clone(),
        ingest: data.config.clone(),
        fingerprints: Fingerprints {
            seed: plan.pm.seed,
            pm: ModelFingerprint::from(&pm.report),
            nf: ModelFingerprint::from(&nf.report),
            xyz: ModelFingerprint::from(&xyz.report),
        },
    };
    let bundle = ModelBundle::new(pm.model, nf.model, xyz.model, data.normalizer.clone(), g, meta).unwrap();
    Trained {
        data,
        bundle,
        csv: to_csv(&bench.table),
        pm_seconds,
    }
}

fn pm_quality(t: &Trained) -> Outcome {
    let e = evaluate(&t.bundle, &t.data).unwrap();
    outcome(
        e.pm_ratio <= 0.6 && t.pm_seconds < 120.0,
        format!(
            "held-out MAE {:.2} vs mean-baseline {:.2}, ratio {:.3} (<= 0.6) on {} windows; training {:.1}s (< 120s)",
            e.pm_mae, e.baseline_mae, e.pm_ratio, e.test_windows, t.pm_seconds
        ),
    )
}

fn spread(len: usize, count: usize) -> Vec<usize> {
    (0..count).map(|k| k * len / count).collect()
}

fn identities(t: &Trained) -> Outcome {
    let pm = t.bundle.predictor();
    let mut mean_gap: f64 = 0.0;
    let mut norm_gap: f64 = 0.0;
    let mut perm_gap: f64 = 0.0;
    for (k, &i) in spread(t.data.test.len(), 5).iter().enumerate() {
        let inst = &t.data.test[i];
        let mut rng = Rng::new(100 + k as u64);
        let nbhd = generate_neighbors(inst, 300, &mut rng, &NeighborhoodConfig::default()).unwrap();
        let mut shuffled = nbhd.neighbors.clone();
        rng.shuffle(&mut shuffled);
        let permuted = Neighborhood::from_neighbors(inst.clone(), shuffled).unwrap();

        let a = explain_mean(&pm, &nbhd, 1e-3).unwrap();
        let b = explain_mean(&pm, &permuted, 1e-3).unwrap();
        for j in 0..a.s.len() {
            let row_mean = a.ts.row(j).iter().sum::<f64>() / a.ts.cols() as f64;
            mean_gap = mean_gap.max((a.s[j] - row_mean).abs());
        }
        for (x, y) in a.ts.as_slice().iter().zip(b.ts.as_slice()).chain(a.s.iter().zip(&b.s)) {
            perm_gap = perm_gap.max((x - y).abs());
        }

        let a = explain_ipca(&pm, &nbhd, 1e-3, &mut Rng::new(1)).unwrap();
        let b = explain_ipca(&pm, &permuted, 1e-3, &mut Rng::new(1)).unwrap();
        for l in a.loadings.as_ref().unwrap() {
            norm_gap = norm_gap.max((l.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs());
        }
        for (x, y) in a.ts.as_slice().iter().zip(b.ts.as_slice()).chain(a.s.iter().zip(&b.s)) {
            perm_gap = perm_gap.max((x - y).abs());
        }
    }
    outcome(
        mean_gap <= 1e-12 && norm_gap <= 1e-9 && perm_gap <= 1e-9,
        format!(
            "|s - mean(ts)| {mean_gap:.1e}; | |loading| - 1 | {norm_gap:.1e} (<= 1e-9); neighbor permutation {perm_gap:.1e} (<= 1e-9); 5 windows, both methods"
        ),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn ipca_claim(t: &Trained) -> Outcome {
    let engine = Engine::new(&t.bundle);
    let (mut mean_mae, mut ipca_mae, mut truth) = (Vec::new(), Vec::new(), Vec::new());
    for (k, &i) in spread(t.data.test.len(), 20).iter().enumerate() {
        let [m, p] = engine.explain_both(&t.data.test[i], k as u64).unwrap();
        mean_mae.push(m.metrics.fidelity_mae);
        ipca_mae.push(p.metrics.fidelity_mae);
        truth.extend(p.metrics.truthfulness);
    }
    let (mm, mi) = (median(mean_mae), median(ipca_mae));
    let truth_mean = truth.iter().sum::<f64>() / truth.len().max(1) as f64;

    // Linear oracle: RUL is a weighted sum of feature means.
    let inst = &t.data.test[0];
    let j = inst.features();
    let coef: Vec<f64> = (0..j).map(|f| if f % 2 == 0 { 1.0 + f as f64 } else { -2.0 - f as f64 }).collect();
    let linear = |w: &Matrix| {
        100.0 + (0..w.rows()).map(|f| coef[f] * w.row(f).iter().sum::<f64>() / w.cols() as f64).sum::<f64>()
    };
    let nbhd = generate_neighbors(inst, 300, &mut Rng::new(3), &NeighborhoodConfig::default()).unwrap();
    let mut e = explain_ipca(&linear, &nbhd, 1e-3, &mut Rng::new(4)).unwrap();
    let oracle = evaluate_truthfulness(&linear, inst, &e, &ProbeConfig::default()).unwrap().score;
    e.s.iter_mut().for_each(|s| *s = -*s);
    let flipped = evaluate_truthfulness(&linear, inst, &e, &ProbeConfig::default()).unwrap().score;

    outcome(
        mi <= 1.1 * mm && truth_mean >= 0.6 && oracle == Some(1.0) && flipped == Some(0.0),
        format!(
            "median fidelity MAE iPCA {mi:.4} vs mean-agg {mm:.4}, ratio {:.3} (<= 1.1); iPCA truthfulness mean {truth_mean:.3} (>= 0.6, {} windows); linear oracle {oracle:?} (= 1.0), sign-flipped {flipped:?} (= 0.0)",
            mi / mm,
            truth.len()
        ),
    )
}

/// Exhaustive search over the four kinds for the top two positive and top
/// two negative features, built without the library's recommender.
fn oracle_recommendations(pm: &dyn Fn(&Matrix) -> f64, inst: &Instance, s: &[f64], seed: u64) -> Vec<(usize, ModificationKind, f64)> {
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    let pos: Vec<usize> = idx.iter().copied().filter(|&f| s[f] > 0.0).take(2).collect();
    idx.sort_by(|&a, &b| s[a].total_cmp(&s[b]).then(a.cmp(&b)));
    let neg: Vec<usize> = idx.iter().copied().filter(|&f| s[f] < 0.0).take(2).collect();
    let kinds = [
        ModificationKind::UniformNoise,
        ModificationKind::GaussianNoise,
        ModificationKind::ReplaceMean,
        ModificationKind::ReplaceZeros,
    ];
    let mut out = Vec::new();
    for (feature, up) in pos.iter().map(|&f| (f, true)).chain(neg.iter().map(|&f| (f, false))) {
        let mut best: Option<(ModificationKind, f64)> = None;
        for (k, &kind) in kinds.iter().enumerate() {
            let m = Modification {
                feature,
                start: 0,
                end: inst.steps(),
                kind,
                amplitude: if k < 2 { 0.5 } else { 0.0 },
                seed: derive_seed(seed, ((feature as u64) << 8) | k as u64),
            };
            let rul = pm(&apply_modification(inst, &m).unwrap().values);
            let better = match best {
                None => true,
                Some((_, b)) => (up && rul > b) || (!up && rul < b),
            };
            if better {
                best = Some((kind, rul));
            }
        }
        let (kind, rul) = best.unwrap();
        out.push((feature, kind, rul));
    }
    out
}

fn recommendations(t: &Trained) -> Outcome {
    let engine = Engine::new(&t.bundle);
    let net = |w: &Matrix| engine.pm().predict_rul(w).unwrap();
    let (mut mismatches, mut compared) = (0, 0);
    for (k, &i) in spread(t.data.test.len(), 50).iter().enumerate() {
        let inst = &t.data.test[i];
        let seed = 1000 + k as u64;
        let e = engine.explain(inst, ExplainMethod::Ipca, seed).unwrap().explanation;
        let got = recommend(&t.bundle.predictor(), inst, &e, seed).unwrap();
        let expected = oracle_recommendations(&net, inst, &e.s, seed);
        compared += expected.len();
        if got.recommendations.len() != expected.len() {
            mismatches += expected.len().max(got.recommendations.len());
            continue;
        }
        for (r, (f, kind, rul)) in got.recommendations.iter().zip(&expected) {
            if r.modification.feature != *f || r.modification.kind != *kind || r.predicted_rul_after != *rul {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatches against the exhaustive 4x4 search over {compared} selections on 50 windows"),
    )
}

use prognos_core::RulModel;

fn prescriptive_gain(t: &Trained) -> Outcome {
    let engine = Engine::new(&t.bundle);
    let target = t.bundle.rul_scale();
    let mut wins = 0;
    let mut gains = Vec::new();
    for &i in &spread(t.data.test.len(), 50) {
        let r = engine
            .prescribe(&t.data.test[i], target, PrescribeMode::Future, ForecasterChoice::Neural)
            .unwrap();
        if r.mod_rul > r.future_rul {
            wins += 1;
        }
        gains.push(r.gain);
    }
    outcome(
        wins * 100 >= 60 * 50,
        format!(
            "MOD > future on {wins}/50 windows (>= 30) with desired target {target}; median gain {:.2} cycles",
            median(gains)
        ),
    )
}

// ----------------------------------------------------------- round trips

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn cli_json(args: &[&str]) -> Value {
    let cli = Cli::try_parse_from(std::iter::once("prognos").chain(args.iter().copied())).unwrap();
    let mut out = Vec::new();
    run(cli, &mut out).unwrap();
    serde_json::from_slice(&out).unwrap()
}

fn round_trips(t: &Trained) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // Bundle bytes and file.
    let bytes = t.bundle.to_bytes().unwrap();
    let back = ModelBundle::from_bytes(&bytes).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bundle_path = dir.path().join("benchmark.bin");
    save_bundle(&t.bundle, &bundle_path).unwrap();
    let loaded = load_bundle(&bundle_path).unwrap();
    let bundle_ok = back == t.bundle && back.to_bytes().unwrap() == bytes && loaded == t.bundle;
    ok &= bundle_ok;
    notes.push(format!("bundle {}", if bundle_ok { "bit-exact" } else { "DIFFERS" }));

    let csv_path = dir.path().join("benchmark.csv");
    std::fs::write(&csv_path, &t.csv).unwrap();
    let bundles = load_bundles(&[bundle_path.to_str().unwrap().to_string()], &csv_path).unwrap();
    let app = router(Arc::new(AppState::new(bundles, Duration::from_secs(600))), None);
    let rt = tokio::runtime::Runtime::new().unwrap();

    // Session replay.
    let replay_ok = rt.block_on(async {
        let open = |seed: u64| {
            let app = app.clone();
            async move {
                let body = json!({"bundle": "benchmark", "instance_index": 12, "seed": seed});
                let (_, v) = call(&app, Method::POST, "/sessions", Some(body)).await;
                v["id"].as_str().unwrap().to_string()
            }
        };
        let id = open(3).await;
        let edits = [
            json!({"feature": 1, "start": 0, "end": 50, "kind": "gaussian_noise", "amplitude": 0.8, "seed": 21}),
            json!({"feature": 4, "start": 10, "end": 30, "kind": "replace_mean"}),
            json!({"feature": 6, "start": 3, "end": 44, "kind": "uniform_noise", "amplitude": 1.1, "seed": 8}),
            json!({"feature": 9, "start": 40, "end": 50, "kind": "replace_zeros"}),
            json!({"feature": 1, "start": 5, "end": 25, "kind": "gaussian_noise", "amplitude": 0.3, "seed": 22}),
        ];
        for e in &edits {
            call(&app, Method::POST, &format!("/sessions/{id}/modify"), Some(e.clone())).await;
        }
        let (_, first) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
        call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
        let fresh = open(3).await;
        for m in first["modifications"].as_array().unwrap() {
            call(&app, Method::POST, &format!("/sessions/{fresh}/modify"), Some(m.clone())).await;
        }
        let (_, second) = call(&app, Method::GET, &format!("/sessions/{fresh}"), None).await;
        let a: Matrix = serde_json::from_value(first["values"].clone()).unwrap();
        let b: Matrix = serde_json::from_value(second["values"].clone()).unwrap();
        first["modifications"].as_array().unwrap().len() == 5
            && a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits())
            && first["current_rul"] == second["current_rul"]
    });
    ok &= replay_ok;
    notes.push(format!("session replay {}", if replay_ok { "bit-exact" } else { "DIFFERS" }));

    // CLI and HTTP on identical seeds.
    let (bundle_arg, csv_arg) = (bundle_path.to_str().unwrap(), csv_path.to_str().unwrap());
    let mut compared = 0;
    let mut differing = Vec::new();
    for (instance, seed) in [(0usize, 7u64), (37, 123)] {
        let inst = instance.to_string();
        let seed_arg = seed.to_string();
        let src = ["--bundle", bundle_arg, "--data", csv_arg, "--instance", &inst];
        let explained = cli_json(&[&["explain", "--seed", &seed_arg], &src[..]].concat());
        let recommended = cli_json(&[&["recommend", "--seed", &seed_arg], &src[..]].concat());
        let prescribed = cli_json(&[&["prescribe", "--target", "312"], &src[..]].concat());
        rt.block_on(async {
            let body = json!({"bundle": "benchmark", "instance_index": instance, "seed": seed});
            let (_, v) = call(&app, Method::POST, "/sessions", Some(body)).await;
            let id = v["id"].as_str().unwrap().to_string();
            let (_, p) = call(&app, Method::GET, &format!("/sessions/{id}/prediction"), None).await;
            let mut pairs = vec![("prediction", p["original_rul"].clone(), explained["prediction"].clone())];
            for (k, method) in ["mean_agg", "ipca"].iter().enumerate() {
                let (_, e) =
                    call(&app, Method::POST, &format!("/sessions/{id}/explain"), Some(json!({"method": method}))).await;
                pairs.push(("explanation", e["explanation"].clone(), explained["explanations"][k]["explanation"].clone()));
                pairs.push(("metrics", e["metrics"].clone(), explained["explanations"][k]["metrics"].clone()));
            }
            let (_, r) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations?method=ipca"), None).await;
            pairs.push(("recommendations", r["recommendations"].clone(), recommended["recommendations"].clone()));
            let (_, q) = call(
                &app,
                Method::POST,
                &format!("/sessions/{id}/prescribe"),
                Some(json!({"desired_target": 312, "mode": "future"})),
            )
            .await;
            for key in ["original_rul", "future_rul", "mod_rul", "prescribed", "forecast"] {
                pairs.push(("prescription", q[key].clone(), prescribed[key].clone()));
            }
            for (what, a, b) in pairs {
                compared += 1;
                if a != b || a.is_null() {
                    differing.push(format!("{what}@{instance}"));
                }
            }
        });
    }
    let cross_ok = differing.is_empty();
    ok &= cross_ok;
    notes.push(if cross_ok {
        format!("CLI = HTTP on {compared} payloads")
    } else {
        format!("CLI != HTTP: {}", differing.join(", "))
    });
    outcome(ok, notes.join("; "))
}

fn main() {
    let start = Instant::now();
    let mut board = Board { failures: 0 };
    board.record("numerics", numerics);
    board.record("static forecaster", static_forecaster);
    let train_start = Instant::now();
    let trained = train_benchmark();
    println!(
        "     benchmark: {} train / {} held-out windows, J = {}, N = {}, Z = {}, trained in {:.1}s",
        trained.data.train.len(),
        trained.data.test.len(),
        trained.data.geometry.j,
        trained.data.geometry.n,
        trained.data.geometry.z,
        train_start.elapsed().as_secs_f64()
    );
    board.record("PM quality", || pm_quality(&trained));
    board.record("explanation identities", || identities(&trained));
    board.record("iPCA fidelity and truthfulness", || ipca_claim(&trained));
    board.record("recommendations", || recommendations(&trained));
    board.record("prescriptive gain", || prescriptive_gain(&trained));
    board.record("round trips", || round_trips(&trained));
    let total = start.elapsed();
    board.record("total runtime", || {
        outcome(total < Duration::from_secs(300), format!("{:.1}s (< 300s)", total.as_secs_f64()))
    });
    println!("acceptance: {} criteria failed", board.failures);
    if board.failures > 0 {
        std::process::exit(1);
    }
}
