use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::Json;
use prognos_core::prescribe::Recommendations;
use prognos_core::{
    Engine, ExplainMethod, ExplainOutcome, ForecasterChoice, Matrix, Modification, PrescribeMode, PrescriptionReport,
    WindowGeometry,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::error::{ApiError, ApiResult};
use super::session::Session;
use super::{with_session, AppState, LoadedBundle};
use crate::args::DEFAULT_SEED;

type Shared = State<Arc<AppState>>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::invalid("malformed JSON body").with_detail(e.to_string()))
}

/// Like [`parse`], with an empty body meaning all defaults.
fn parse_or_default<T: DeserializeOwned + Default>(body: &Bytes) -> ApiResult<T> {
    if body.iter().all(u8::is_ascii_whitespace) {
        Ok(T::default())
    } else {
        parse(body)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleSummary {
    pub name: String,
    pub geometry: WindowGeometry,
    pub sensor_names: Vec<String>,
    pub rul_scale: f64,
    pub instances: usize,
}

pub async fn list_bundles(State(state): Shared) -> Json<Vec<BundleSummary>> {
    Json(
        state
            .bundles()
            .map(|b| BundleSummary {
                name: b.name.clone(),
                geometry: b.bundle.geometry,
                sensor_names: b.bundle.meta.sensor_names.clone(),
                rul_scale: b.bundle.rul_scale(),
                instances: b.instances.len(),
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub index: usize,
    pub unit_id: u32,
    pub end_cycle: u32,
    pub rul_target: Option<f64>,
}

pub async fn list_instances(State(state): Shared, Path(name): Path<String>) -> ApiResult<Json<Vec<InstanceSummary>>> {
    let b = state.bundle(&name)?;
    Ok(Json(
        b.instances
            .iter()
            .enumerate()
            .map(|(index, i)| InstanceSummary {
                index,
                unit_id: i.unit_id,
                end_cycle: i.end_cycle,
                rul_target: i.rul_target,
            })
            .collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    pub bundle: String,
    pub instance_index: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A session's state. `values` are normalized (`J × N`), `sensor_values` the
/// same window in sensor units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub bundle: String,
    pub instance_index: usize,
    pub seed: u64,
    pub unit_id: u32,
    pub end_cycle: u32,
    pub rul_target: Option<f64>,
    pub geometry: WindowGeometry,
    pub sensor_names: Vec<String>,
    pub values: Matrix,
    pub sensor_values: Matrix,
    pub modifications: Vec<Modification>,
    pub original_rul: f64,
    pub current_rul: f64,
    pub explanation: Option<ExplainMethod>,
}

fn view(session: &Session, b: &LoadedBundle) -> ApiResult<SessionView> {
    let engine = Engine::new(&b.bundle);
    Ok(SessionView {
        id: session.id.clone(),
        bundle: session.bundle.clone(),
        instance_index: session.instance_index,
        seed: session.seed,
        unit_id: session.base.unit_id,
        end_cycle: session.base.end_cycle,
        rul_target: session.base.rul_target,
        geometry: b.bundle.geometry,
        sensor_names: b.bundle.meta.sensor_names.clone(),
        values: session.current.values.clone(),
        sensor_values: b.bundle.normalizer.denormalize_window(&session.current.values)?,
        modifications: session.modifications.clone(),
        original_rul: engine.predict(&session.base)?,
        current_rul: engine.predict(&session.current)?,
        explanation: session.explanation.as_ref().map(|e| e.explanation.method),
    })
}

pub async fn create_session(State(state): Shared, body: Bytes) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let req: CreateSession = parse(&body)?;
    let b = state.bundle(&req.bundle)?;
    let base = b.instances.get(req.instance_index).cloned().ok_or_else(|| {
        ApiError::not_found(
            "instance_not_found",
            format!("bundle {:?} has {} instances", req.bundle, b.instances.len()),
        )
    })?;
    let session = Session::new(
        uuid::Uuid::new_v4().simple().to_string(),
        req.bundle,
        req.instance_index,
        base,
        req.seed.unwrap_or(DEFAULT_SEED),
    );
    let out = view(&session, &b)?;
    state.insert(session);
    Ok((StatusCode::CREATED, Json(out)))
}

pub async fn get_session(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    with_session(&state, &id, |s, b, _| view(s, b)).await.map(Json)
}

pub async fn delete_session(State(state): Shared, Path(id): Path<String>) -> ApiResult<StatusCode> {
    if state.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found("session_not_found", format!("no session {id:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionResponse {
    pub seed: u64,
    /// Prediction for the unmodified window.
    pub original_rul: f64,
    /// Prediction after the session's modifications.
    pub current_rul: f64,
    /// The surrogate's value at the current window, once explained.
    pub local_prediction: Option<f64>,
    pub method: Option<ExplainMethod>,
    pub rul_target: Option<f64>,
}

pub async fn prediction(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<PredictionResponse>> {
    with_session(&state, &id, |s, b, settings| {
        let engine = Engine::with_settings(&b.bundle, settings.clone());
        Ok(PredictionResponse {
            seed: s.seed,
            original_rul: engine.predict(&s.base)?,
            current_rul: engine.predict(&s.current)?,
            local_prediction: s.explanation.as_ref().map(|e| e.explanation.local_prediction),
            method: s.explanation.as_ref().map(|e| e.explanation.method),
            rul_target: s.base.rul_target,
        })
    })
    .await
    .map(Json)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExplainRequest {
    #[serde(default)]
    pub method: ExplainMethod,
    /// Defaults to the session seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

pub async fn explain(State(state): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<ExplainOutcome>> {
    let req: ExplainRequest = parse_or_default(&body)?;
    with_session(&state, &id, move |s, b, settings| {
        let engine = Engine::with_settings(&b.bundle, settings.clone());
        let outcome = engine.explain(&s.current, req.method, req.seed.unwrap_or(s.seed))?;
        s.explanation = Some(outcome.clone());
        Ok(outcome)
    })
    .await
    .map(Json)
}

pub async fn modify(State(state): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<SessionView>> {
    let m: Modification = parse(&body)?;
    with_session(&state, &id, move |s, b, _| {
        s.apply(m)?;
        view(s, b)
    })
    .await
    .map(Json)
}

pub async fn undo(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    with_session(&state, &id, |s, b, _| {
        if s.undo()?.is_none() {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "nothing_to_undo",
                "the session has no modifications",
            ));
        }
        view(s, b)
    })
    .await
    .map(Json)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecommendQuery {
    pub seed: Option<u64>,
    pub method: Option<ExplainMethod>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendationsResponse {
    pub seed: u64,
    pub method: ExplainMethod,
    pub explanation_seed: u64,
    pub importances: Vec<f64>,
    #[serde(flatten)]
    pub recommendations: Recommendations,
}

/// Uses the session's explanation of the current window, computing one
/// (iPCA unless `method` says otherwise) when there is none or the method
/// differs.
pub async fn recommendations(
    State(state): Shared,
    Path(id): Path<String>,
    query: Result<Query<RecommendQuery>, QueryRejection>,
) -> ApiResult<Json<RecommendationsResponse>> {
    let Query(q) = query.map_err(|e| ApiError::invalid("malformed query").with_detail(e.body_text()))?;
    with_session(&state, &id, move |s, b, settings| {
        let engine = Engine::with_settings(&b.bundle, settings.clone());
        let seed = q.seed.unwrap_or(s.seed);
        let reusable = s
            .explanation
            .as_ref()
            .filter(|e| q.method.is_none_or(|m| m == e.explanation.method))
            .cloned();
        let outcome = match reusable {
            Some(e) => e,
            None => {
                let e = engine.explain(&s.current, q.method.unwrap_or_default(), seed)?;
                s.explanation = Some(e.clone());
                e
            }
        };
        let recommendations = engine.recommend(&s.current, &outcome.explanation, seed)?;
        Ok(RecommendationsResponse {
            seed,
            method: outcome.explanation.method,
            explanation_seed: outcome.seed,
            importances: outcome.explanation.s.clone(),
            recommendations,
        })
    })
    .await
    .map(Json)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForecastRequest {
    #[serde(default)]
    pub forecaster: ForecasterChoice,
    /// Must match the bundle's horizon when given.
    #[serde(default, alias = "Z")]
    pub z: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResponse {
    pub forecaster: ForecasterChoice,
    pub z: usize,
    /// `Z × J`, sensor units.
    pub values: Matrix,
    /// `Z × J`, normalized.
    pub normalized: Matrix,
    /// Prediction after sliding the window by the forecast.
    pub future_rul: f64,
}

pub async fn forecast(State(state): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<ForecastResponse>> {
    let req: ForecastRequest = parse_or_default(&body)?;
    with_session(&state, &id, move |s, b, settings| {
        let g = b.bundle.geometry;
        if let Some(z) = req.z.filter(|&z| z != g.z) {
            return Err(ApiError::conflict(
                "horizon_mismatch",
                format!("bundle forecasts Z = {} steps, request asked for {z}", g.z),
            ));
        }
        let engine = Engine::with_settings(&b.bundle, settings.clone());
        let f = engine.forecast(&s.current, req.forecaster)?;
        let slid = prognos_core::forecast::slide_window(&s.current, &f.values)?;
        Ok(ForecastResponse {
            forecaster: req.forecaster,
            z: g.z,
            values: b.bundle.normalizer.denormalize_steps(&f.values)?,
            future_rul: engine.predict(&slid)?,
            normalized: f.values,
        })
    })
    .await
    .map(Json)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PrescribeRequest {
    /// Defaults to the bundle's RUL scale.
    #[serde(default)]
    pub desired_target: Option<f64>,
    #[serde(default)]
    pub mode: PrescribeMode,
    #[serde(default)]
    pub forecaster: ForecasterChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrescribeResponse {
    pub mode: PrescribeMode,
    #[serde(flatten)]
    pub report: PrescriptionReport,
}

pub async fn prescribe(State(state): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<PrescribeResponse>> {
    let req: PrescribeRequest = parse_or_default(&body)?;
    with_session(&state, &id, move |s, b, settings| {
        let engine = Engine::with_settings(&b.bundle, settings.clone());
        let target = req.desired_target.unwrap_or(b.bundle.rul_scale());
        let report = engine.prescribe(&s.current, target, req.mode, req.forecaster)?;
        Ok(PrescribeResponse { mode: req.mode, report })
    })
    .await
    .map(Json)
}

pub async fn not_found() -> ApiError {
    ApiError::not_found("not_found", "no such endpoint")
}
