//! HTTP/JSON service over loaded bundles with in-memory sessions.
//!
//! Bundles are immutable and shared. Each session sits behind its own async
//! mutex, so requests against one session are serialized while different
//! sessions proceed in parallel. Engine work runs on the blocking pool.

mod api;
mod error;
mod session;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::routing::{delete, get, post};
use axum::Router;
use prognos_core::{EngineSettings, Instance, ModelBundle};
use tower_http::services::ServeDir;

pub use api::{
    BundleSummary, CreateSession, ExplainRequest, ForecastRequest, ForecastResponse, InstanceSummary,
    PredictionResponse, PrescribeRequest, PrescribeResponse, RecommendationsResponse, SessionView,
};
pub use error::{ApiError, ApiResult};
pub use session::{replay, Session};

/// A bundle with the held-out windows sessions are opened on.
#[derive(Debug)]
pub struct LoadedBundle {
    pub name: String,
    pub bundle: ModelBundle,
    pub instances: Vec<Instance>,
}

impl LoadedBundle {
    pub fn new(name: String, bundle: ModelBundle, instances: Vec<Instance>) -> Self {
        LoadedBundle {
            name,
            bundle,
            instances,
        }
    }
}

struct Slot {
    session: Arc<tokio::sync::Mutex<Session>>,
    last_used: Instant,
}

pub struct AppState {
    bundles: BTreeMap<String, Arc<LoadedBundle>>,
    sessions: Mutex<HashMap<String, Slot>>,
    ttl: Duration,
    pub settings: EngineSettings,
}

impl AppState {
    pub fn new(bundles: BTreeMap<String, LoadedBundle>, ttl: Duration) -> Self {
        AppState {
            bundles: bundles.into_iter().map(|(k, v)| (k, Arc::new(v))).collect(),
            sessions: Mutex::new(HashMap::new()),
            ttl,
            settings: EngineSettings::default(),
        }
    }

    pub fn bundle(&self, name: &str) -> ApiResult<Arc<LoadedBundle>> {
        self.bundles
            .get(name)
            .cloned()
            .ok_or_else(|| ApiError::not_found("bundle_not_found", format!("no bundle named {name:?}")))
    }

    pub fn bundles(&self) -> impl Iterator<Item = &Arc<LoadedBundle>> {
        self.bundles.values()
    }

    fn sessions(&self) -> std::sync::MutexGuard<'_, HashMap<String, Slot>> {
        self.sessions.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    fn insert(&self, session: Session) {
        let now = Instant::now();
        let mut map = self.sessions();
        map.retain(|_, slot| now.duration_since(slot.last_used) < self.ttl);
        map.insert(
            session.id.clone(),
            Slot {
                session: Arc::new(tokio::sync::Mutex::new(session)),
                last_used: now,
            },
        );
    }

    /// The live session `id`, refreshing its idle timer.
    fn session(&self, id: &str) -> ApiResult<Arc<tokio::sync::Mutex<Session>>> {
        let now = Instant::now();
        let mut map = self.sessions();
        let missing = || ApiError::not_found("session_not_found", format!("no session {id:?}"));
        let slot = map.get_mut(id).ok_or_else(missing)?;
        if now.duration_since(slot.last_used) >= self.ttl {
            map.remove(id);
            return Err(missing());
        }
        slot.last_used = now;
        Ok(slot.session.clone())
    }

    fn remove(&self, id: &str) -> bool {
        self.sessions().remove(id).is_some()
    }

    pub fn session_count(&self) -> usize {
        self.sessions().len()
    }
}

/// Runs `f` on the session under its lock, on the blocking pool.
async fn with_session<T, F>(state: &Arc<AppState>, id: &str, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&mut Session, &LoadedBundle, &EngineSettings) -> ApiResult<T> + Send + 'static,
{
    let session = state.session(id)?;
    let mut guard = session.lock_owned().await;
    let bundle = state.bundle(&guard.bundle)?;
    let state = state.clone();
    tokio::task::spawn_blocking(move || f(&mut guard, &bundle, &state.settings))
        .await
        .map_err(|e| ApiError::internal("request handler failed").with_detail(e.to_string()))?
}

pub fn router(state: Arc<AppState>, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/bundles", get(api::list_bundles))
        .route("/bundles/{name}/instances", get(api::list_instances))
        .route("/sessions", post(api::create_session))
        .route("/sessions/{id}", get(api::get_session).delete(api::delete_session))
        .route("/sessions/{id}/prediction", get(api::prediction))
        .route("/sessions/{id}/explain", post(api::explain))
        .route("/sessions/{id}/modify", post(api::modify))
        .route("/sessions/{id}/modify/last", delete(api::undo))
        .route("/sessions/{id}/recommendations", get(api::recommendations))
        .route("/sessions/{id}/forecast", post(api::forecast))
        .route("/sessions/{id}/prescribe", post(api::prescribe))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(api::not_found),
    }
}
