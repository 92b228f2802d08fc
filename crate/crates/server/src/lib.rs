//! HTTP API over the narrative engine.
//!
//! Each session holds a baseline model (set on creation, by `PUT /model` and
//! by fits), the current model as advanced by `/step`, and the records
//! stepped so far. Reads work on an immutable snapshot. Mutations take the
//! session's writer lock without waiting; a second concurrent mutation is
//! answered with 409.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tension_core::authoring::{apply_action_sketch, apply_worldview_sketch, movements_at};
use tension_core::io::{
    accept_model, FitResultDocument, ModelDocument, MovementDocument, ShapeDocument, SketchDocument, StepDocument,
    TensionSpaceDocument, TraceDocument, ViolationDocument,
};
use tension_core::{
    classify_shape, space_for_axes, step, Axes, AxisRef, Error, NarrativeSystem, SimulationConfig, SpaceMethod,
    StepRecord, Trace,
};
use tokio::sync::{Mutex, MutexGuard};
use tower_http::cors::{Any, CorsLayer};

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub baseline: NarrativeSystem,
    pub current: NarrativeSystem,
    pub steps: Vec<StepRecord>,
    /// Number of `/step` calls since the baseline was set.
    pub rounds: usize,
    pub config: SimulationConfig,
}

impl Snapshot {
    fn fresh(system: NarrativeSystem, config: SimulationConfig) -> Self {
        Snapshot {
            baseline: system.clone(),
            current: system,
            steps: Vec::new(),
            rounds: 0,
            config,
        }
    }

    pub fn trace(&self) -> Trace {
        Trace {
            config: SimulationConfig {
                max_steps: self.rounds,
                ..self.config
            },
            steps: self.steps.clone(),
        }
    }
}

pub struct Session {
    writer: Mutex<()>,
    state: RwLock<Arc<Snapshot>>,
}

impl Session {
    fn new(snapshot: Snapshot) -> Self {
        Session {
            writer: Mutex::new(()),
            state: RwLock::new(Arc::new(snapshot)),
        }
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.state.read().expect("session lock poisoned").clone()
    }

    /// Claims the writer slot, or fails if another mutation holds it.
    pub fn begin_mutation(&self) -> Option<MutexGuard<'_, ()>> {
        self.writer.try_lock().ok()
    }

    fn publish(&self, snapshot: Snapshot) {
        *self.state.write().expect("session lock poisoned") = Arc::new(snapshot);
    }
}

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
}

impl AppState {
    pub fn create_session(&self, system: NarrativeSystem, config: SimulationConfig) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Arc::new(Session::new(Snapshot::fresh(system, config)));
        self.sessions
            .write()
            .expect("session table poisoned")
            .insert(id.clone(), session);
        id
    }

    pub fn session(&self, id: &str) -> Option<Arc<Session>> {
        self.sessions.read().expect("session table poisoned").get(id).cloned()
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<ViolationDocument>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error: error.into(),
                violations: Vec::new(),
            },
        }
    }

    fn bad_request(error: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, error)
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let violations = match &err {
            Error::InvalidModel(v) => v.iter().map(ViolationDocument::from).collect(),
            _ => Vec::new(),
        };
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                error: err.to_string(),
                violations,
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::from(Error::from(e)))
}

fn lookup(state: &AppState, id: &str) -> ApiResult<Arc<Session>> {
    state
        .session(id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown session `{id}`")))
}

fn busy() -> ApiError {
    ApiError::new(StatusCode::CONFLICT, "another change to this session is in progress")
}

/// The API with CORS for `ui_origin`, or for any origin when `None`.
pub fn app(state: Arc<AppState>, ui_origin: Option<HeaderValue>) -> Router {
    let cors = match ui_origin {
        Some(origin) => CorsLayer::new().allow_origin(origin),
        None => CorsLayer::new().allow_origin(Any),
    }
    .allow_methods(Any)
    .allow_headers(Any);
    router(state).layer(cors)
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/session", post(create_session))
        .route("/api/session/{id}/model", get(get_model).put(put_model))
        .route("/api/session/{id}/tension-space", get(tension_space))
        .route("/api/session/{id}/movements", get(movements))
        .route("/api/session/{id}/shape", get(shape))
        .route("/api/session/{id}/step", post(step_session))
        .route("/api/session/{id}/reset", post(reset))
        .route("/api/session/{id}/fit/worldviews", post(fit_worldviews))
        .route("/api/session/{id}/fit/actions", post(fit_actions))
        .route("/api/session/{id}/trace", get(trace))
        .with_state(state)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    model: ModelDocument,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    strict_improvement: bool,
}

#[derive(Serialize)]
struct Created {
    session_id: String,
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let request: CreateRequest = parse_body(&body)?;
    let system = accept_model(request.model)?;
    let config = SimulationConfig {
        strict_improvement: request.strict_improvement,
        seed: request.seed,
        ..SimulationConfig::default()
    };
    let session_id = state.create_session(system, config);
    Ok((StatusCode::CREATED, Json(Created { session_id })))
}

async fn get_model(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<ModelDocument>> {
    let snapshot = lookup(&state, &id)?.snapshot();
    Ok(Json(ModelDocument::from_system(&snapshot.current)))
}

async fn put_model(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<ModelDocument>> {
    let session = lookup(&state, &id)?;
    let _guard = session.begin_mutation().ok_or_else(busy)?;
    let system = accept_model(parse_body(&body)?)?;
    let config = session.snapshot().config;
    let doc = ModelDocument::from_system(&system);
    session.publish(Snapshot::fresh(system, config));
    Ok(Json(doc))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AxesQuery {
    x_char: String,
    x_theme: String,
    y_char: String,
    y_theme: String,
    method: Option<String>,
    world: Option<String>,
}

impl AxesQuery {
    fn axes(&self, system: &NarrativeSystem) -> ApiResult<Axes> {
        let axes = Axes {
            x: AxisRef::new(&self.x_char, &self.x_theme),
            y: AxisRef::new(&self.y_char, &self.y_theme),
        };
        axes.x.resolve(system)?;
        axes.y.resolve(system)?;
        Ok(axes)
    }

    fn method(&self) -> ApiResult<SpaceMethod> {
        match self.method.as_deref() {
            None | Some("conv") => Ok(SpaceMethod::Convolution),
            Some("brute") => Ok(SpaceMethod::BruteForce),
            Some(other) => Err(ApiError::bad_request(format!(
                "unknown method `{other}` (expected conv or brute)"
            ))),
        }
    }
}

fn query(raw: Result<Query<AxesQuery>, axum::extract::rejection::QueryRejection>) -> ApiResult<AxesQuery> {
    raw.map(|Query(q)| q).map_err(|e| ApiError::bad_request(e.body_text()))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

async fn tension_space(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    raw: Result<Query<AxesQuery>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<Json<TensionSpaceDocument>> {
    let q = query(raw)?;
    let snapshot = lookup(&state, &id)?.snapshot();
    let axes = q.axes(&snapshot.current)?;
    let method = q.method()?;
    let space = blocking(move || Ok(space_for_axes(&snapshot.current, &axes, method)?)).await?;
    Ok(Json(TensionSpaceDocument::from_space(&space)))
}

async fn shape(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    raw: Result<Query<AxesQuery>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<Json<ShapeDocument>> {
    let q = query(raw)?;
    let snapshot = lookup(&state, &id)?.snapshot();
    let axes = q.axes(&snapshot.current)?;
    let space = blocking(move || Ok(space_for_axes(&snapshot.current, &axes, SpaceMethod::Convolution)?)).await?;
    Ok(Json(ShapeDocument::from(&classify_shape(&space))))
}

async fn movements(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    raw: Result<Query<AxesQuery>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<Json<Vec<MovementDocument>>> {
    let q = query(raw)?;
    let snapshot = lookup(&state, &id)?.snapshot();
    let system = &snapshot.current;
    let axes = q.axes(system)?;
    let world = match q.world.as_deref() {
        None | Some("current") => &system.actual,
        Some("start") => &snapshot.baseline.actual,
        Some(other) => {
            return Err(ApiError::bad_request(format!(
                "unknown world `{other}` (expected start or current)"
            )))
        }
    };
    let arrows = movements_at(system, &axes, world)?;
    Ok(Json(
        arrows
            .iter()
            .map(|(name, m)| MovementDocument::new(name.clone(), m))
            .collect(),
    ))
}

async fn step_session(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Json<Vec<StepDocument>>> {
    let session = lookup(&state, &id)?;
    let _guard = session.begin_mutation().ok_or_else(busy)?;
    let mut next = (*session.snapshot()).clone();
    let records = step(&mut next.current, &next.config);
    let docs = records.iter().map(StepDocument::from).collect();
    next.steps.extend(records);
    next.rounds += 1;
    session.publish(next);
    Ok(Json(docs))
}

async fn reset(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<ModelDocument>> {
    let session = lookup(&state, &id)?;
    let _guard = session.begin_mutation().ok_or_else(busy)?;
    let snapshot = session.snapshot();
    let doc = ModelDocument::from_system(&snapshot.baseline);
    session.publish(Snapshot::fresh(snapshot.baseline.clone(), snapshot.config));
    Ok(Json(doc))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FitRequest {
    sketch: SketchDocument,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct FitResponse {
    result: FitResultDocument,
    model: ModelDocument,
}

/// Fits run against the baseline and become the new baseline; any stepped
/// progress is discarded.
async fn fit_worldviews(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<FitResponse>> {
    let session = lookup(&state, &id)?;
    let _guard = session.begin_mutation().ok_or_else(busy)?;
    let request: FitRequest = parse_body(&body)?;
    let sketch = request.sketch.into_sketch()?;
    let snapshot = session.snapshot();
    let seed = request.seed.unwrap_or(snapshot.config.seed);
    let outcome = apply_worldview_sketch(&snapshot.baseline, &sketch, seed)?;
    let response = FitResponse {
        result: FitResultDocument::from_worldviews(&outcome.fit),
        model: ModelDocument::from_system(&outcome.system),
    };
    session.publish(Snapshot::fresh(outcome.system, snapshot.config));
    Ok(Json(response))
}

async fn fit_actions(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<FitResponse>> {
    let session = lookup(&state, &id)?;
    let _guard = session.begin_mutation().ok_or_else(busy)?;
    let request: FitRequest = parse_body(&body)?;
    if request.seed.is_some() {
        return Err(ApiError::bad_request("action fitting takes no seed"));
    }
    let sketch = request.sketch.into_sketch()?;
    let snapshot = session.snapshot();
    let outcome = apply_action_sketch(&snapshot.baseline, &sketch)?;
    let response = FitResponse {
        result: FitResultDocument::from_actions(&outcome.fit, &outcome.names),
        model: ModelDocument::from_system(&outcome.system),
    };
    session.publish(Snapshot::fresh(outcome.system, snapshot.config));
    Ok(Json(response))
}

async fn trace(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<TraceDocument>> {
    let snapshot = lookup(&state, &id)?.snapshot();
    Ok(Json(TraceDocument::from_trace(&snapshot.trace())))
}
