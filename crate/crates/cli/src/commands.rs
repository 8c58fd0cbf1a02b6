use std::collections::BTreeMap;
use std::io::Write;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use prognos_core::dataset::store::save_prepared;
use prognos_core::dataset::synthetic::{generate, to_csv, BenchmarkConfig};
use prognos_core::models::save_bundle;
use prognos_core::prescribe::Recommendations;
use prognos_core::{evaluate, train_bundle, Engine, ExplainMethod, ExplainOutcome, PrescriptionReport, TrainPlan};
use serde::Serialize;

use crate::args::{
    Cli, Command, EvaluateArgs, ExplainArgs, Format, IngestArgs, Preset, PrescribeArgs, RecommendArgs, ServeArgs,
    SynthArgs, TrainArgs,
};
use crate::error::{CliError, CliResult};
use crate::server::{self, AppState, LoadedBundle};
use crate::source::{data_for_bundle, held_out, open_bundle, prepare};

/// Runs one command, writing its report to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Synth(a) => synth(a, out),
        Command::Ingest(a) => ingest(a, out),
        Command::Train(a) => train(a, out),
        Command::Evaluate(a) => evaluate_cmd(a, out),
        Command::Explain(a) => explain(a, out),
        Command::Recommend(a) => recommend(a, out),
        Command::Prescribe(a) => prescribe(a, out),
        Command::Serve(a) => serve(a, out),
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Engine(e.into()))?;
    writeln!(out, "{text}").map_err(|e| CliError::io("writing output", e))
}

fn say(out: &mut dyn Write, line: std::fmt::Arguments<'_>) -> CliResult<()> {
    writeln!(out, "{line}").map_err(|e| CliError::io("writing output", e))
}

fn synth(a: SynthArgs, out: &mut dyn Write) -> CliResult<()> {
    let bench = generate(&BenchmarkConfig {
        units: a.units,
        seed: a.seed,
        ..Default::default()
    });
    std::fs::write(&a.out, to_csv(&bench.table)).map_err(|e| CliError::io(a.out.display().to_string(), e))?;
    say(
        out,
        format_args!("wrote {} units x {} sensors to {}", a.units, bench.table.features(), a.out.display()),
    )
}

fn ingest(a: IngestArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.data.is_dir() {
        return Err(CliError::Usage("ingest expects a CSV table, not a directory".into()));
    }
    let data = prepare(&a.data, &a.ingest.config())?;
    save_prepared(&a.out, &data).map_err(CliError::Data)?;
    say(
        out,
        format_args!(
            "kept {} of the sensors; {} training and {} held-out windows of {}x{} in {}",
            data.geometry.j,
            data.train.len(),
            data.test.len(),
            data.geometry.j,
            data.geometry.n,
            a.out.display()
        ),
    )
}

pub fn plan_for(preset: Preset, seed: u64, epochs: Option<usize>, learning_rate: Option<f64>) -> TrainPlan {
    let plan = match preset {
        Preset::Tuned => TrainPlan::tuned(seed),
        Preset::Reference => TrainPlan::with_seed(seed),
    };
    plan.map(|c| {
        if let Some(e) = epochs {
            c.epochs = e;
        }
        if let Some(lr) = learning_rate {
            c.learning_rate = lr;
        }
    })
}

fn train(a: TrainArgs, out: &mut dyn Write) -> CliResult<()> {
    let data = prepare(&a.data, &a.ingest.config())?;
    let plan = plan_for(a.preset, a.seed, a.epochs, a.learning_rate);
    for config in [&plan.pm, &plan.nf, &plan.xyz] {
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let bundle = train_bundle(&data, &plan).map_err(CliError::training)?;
    save_bundle(&bundle, &a.out).map_err(CliError::Bundle)?;
    let f = &bundle.meta.fingerprints;
    say(
        out,
        format_args!(
            "wrote {} (seed {}, final losses pm {:.5} nf {:.5} xyz {:.5})",
            a.out.display(),
            f.seed,
            f.pm.final_loss,
            f.nf.final_loss,
            f.xyz.final_loss
        ),
    )
}

fn evaluate_cmd(a: EvaluateArgs, out: &mut dyn Write) -> CliResult<()> {
    let bundle = open_bundle(&a.source.bundle)?;
    let data = data_for_bundle(&a.source.data, &bundle)?;
    let report = evaluate(&bundle, &data).map_err(CliError::Data)?;
    emit(out, &report)
}

#[derive(Debug, Serialize)]
pub struct ExplainReport {
    pub instance: usize,
    pub unit_id: u32,
    pub end_cycle: u32,
    pub seed: u64,
    pub prediction: f64,
    pub sensor_names: Vec<String>,
    pub explanations: Vec<ExplainOutcome>,
}

fn explain(a: ExplainArgs, out: &mut dyn Write) -> CliResult<()> {
    let bundle = open_bundle(&a.source.bundle)?;
    let data = data_for_bundle(&a.source.data, &bundle)?;
    let inst = held_out(&data, a.instance)?;
    let engine = Engine::new(&bundle);
    let explanations = match a.method.methods().as_slice() {
        [single] => vec![engine.explain(inst, *single, a.seed).map_err(CliError::Engine)?],
        _ => engine.explain_both(inst, a.seed).map_err(CliError::Engine)?.to_vec(),
    };
    let report = ExplainReport {
        instance: a.instance,
        unit_id: inst.unit_id,
        end_cycle: inst.end_cycle,
        seed: a.seed,
        prediction: explanations[0].prediction,
        sensor_names: bundle.meta.sensor_names.clone(),
        explanations,
    };
    match a.format {
        Format::Json => emit(out, &report),
        Format::Table => explain_table(&report, out),
    }
}

fn method_name(m: ExplainMethod) -> &'static str {
    match m {
        ExplainMethod::MeanAgg => "mean_agg",
        ExplainMethod::Ipca => "ipca",
    }
}

fn explain_table(r: &ExplainReport, out: &mut dyn Write) -> CliResult<()> {
    let mut text = format!(
        "window {} (unit {}, cycle {}), seed {}, predicted RUL {:.2}\n\n{:>7}  {:<12}",
        r.instance, r.unit_id, r.end_cycle, r.seed, r.prediction, "feature", "sensor"
    );
    for e in &r.explanations {
        text += &format!("{:>12}", method_name(e.explanation.method));
    }
    text.push('\n');
    for (j, name) in r.sensor_names.iter().enumerate() {
        text += &format!("{j:>7}  {name:<12}");
        for e in &r.explanations {
            text += &format!("{:>12.6}", e.explanation.s[j]);
        }
        text.push('\n');
    }
    text += &format!("\n{:<10}{:>14}{:>14}{:>14}\n", "method", "fidelity_mae", "fidelity_r2", "truthfulness");
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
    for e in &r.explanations {
        text += &format!(
            "{:<10}{:>14.4}{:>14}{:>14}\n",
            method_name(e.explanation.method),
            e.metrics.fidelity_mae,
            opt(e.metrics.fidelity_r2),
            opt(e.metrics.truthfulness)
        );
    }
    write!(out, "{text}").map_err(|e| CliError::io("writing output", e))
}

#[derive(Debug, Serialize)]
pub struct RecommendReport {
    pub instance: usize,
    pub seed: u64,
    pub method: ExplainMethod,
    pub importances: Vec<f64>,
    #[serde(flatten)]
    pub recommendations: Recommendations,
}

fn recommend(a: RecommendArgs, out: &mut dyn Write) -> CliResult<()> {
    let bundle = open_bundle(&a.source.bundle)?;
    let data = data_for_bundle(&a.source.data, &bundle)?;
    let inst = held_out(&data, a.instance)?;
    let engine = Engine::new(&bundle);
    let method = ExplainMethod::from(a.method);
    let outcome = engine.explain(inst, method, a.seed).map_err(CliError::Engine)?;
    let recommendations = engine
        .recommend(inst, &outcome.explanation, a.seed)
        .map_err(CliError::Engine)?;
    emit(
        out,
        &RecommendReport {
            instance: a.instance,
            seed: a.seed,
            method,
            importances: outcome.explanation.s,
            recommendations,
        },
    )
}

#[derive(Debug, Serialize)]
pub struct PrescribeReport {
    pub instance: usize,
    #[serde(flatten)]
    pub report: PrescriptionReport,
}

fn prescribe(a: PrescribeArgs, out: &mut dyn Write) -> CliResult<()> {
    let bundle = open_bundle(&a.source.bundle)?;
    let data = data_for_bundle(&a.source.data, &bundle)?;
    let inst = held_out(&data, a.instance)?;
    let target = a.target.unwrap_or(bundle.rul_scale());
    let report = Engine::new(&bundle)
        .prescribe(inst, target, a.mode.into(), a.forecaster.into())
        .map_err(|e| match e {
            prognos_core::Error::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Engine(other),
        })?;
    emit(
        out,
        &PrescribeReport {
            instance: a.instance,
            report,
        },
    )
}

/// `NAME=PATH`, or a path whose stem is the name.
fn bundle_spec(spec: &str) -> CliResult<(String, &Path)> {
    match spec.split_once('=') {
        Some((name, path)) if !name.is_empty() => Ok((name.to_string(), Path::new(path))),
        Some(_) => Err(CliError::Usage(format!("empty bundle name in {spec:?}"))),
        None => {
            let path = Path::new(spec);
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| CliError::Usage(format!("cannot name bundle {spec:?}")))?;
            Ok((name.to_string(), path))
        }
    }
}

/// Loads every `--bundle` with its held-out windows from `data`.
pub fn load_bundles(specs: &[String], data: &Path) -> CliResult<BTreeMap<String, LoadedBundle>> {
    let mut bundles = BTreeMap::new();
    for spec in specs {
        let (name, path) = bundle_spec(spec)?;
        let bundle = open_bundle(path)?;
        let prepared = data_for_bundle(data, &bundle)?;
        if bundles.contains_key(&name) {
            return Err(CliError::Usage(format!("bundle name {name:?} given twice")));
        }
        bundles.insert(name.clone(), LoadedBundle::new(name, bundle, prepared.test));
    }
    Ok(bundles)
}

fn serve(a: ServeArgs, out: &mut dyn Write) -> CliResult<()> {
    let bundles = load_bundles(&a.bundles, &a.data)?;
    if let Some(dir) = &a.ui_dir {
        if !dir.is_dir() {
            return Err(CliError::Usage(format!("UI directory {} does not exist", dir.display())));
        }
    }
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| CliError::Usage(format!("bad listen address: {e}")))?;
    let state = Arc::new(AppState::new(bundles, Duration::from_secs(a.session_ttl)));
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::io("starting runtime", e))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::io(format!("binding {addr}"), e))?;
        say(out, format_args!("listening on http://{}", listener.local_addr().unwrap_or(addr)))?;
        out.flush().map_err(|e| CliError::io("writing output", e))?;
        let app = server::router(state, a.ui_dir.as_deref());
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::io("serving", e))
    })
}
