//! In-memory session service for interactive annotation.
//!
//! Each session holds one normalized image, its markers and parameters,
//! the distance bundle last built for them and the last segmentation.
//! Session state sits behind a per-session mutex; solver runs happen on the
//! blocking pool with the lock released, and a second run on the same
//! session is refused with 409 until the first one finishes.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use geoseg::io::{self, grid_to_gray8, mask_to_gray8, png_bytes};
use geoseg::{
    normalize, segment, tanimoto, DistanceBundle, DistanceConfig, MarkerSet, Mask, PipelineConfig,
    ScalarGrid, SegmentationResult,
};
use serde::Serialize;
use serde_json::json;
use uuid::Uuid;

use crate::params::Params;

pub const DEFAULT_TTL: Duration = Duration::from_secs(3600);

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }
}

impl From<geoseg::Error> for ApiError {
    fn from(e: geoseg::Error) -> Self {
        let status = match e {
            geoseg::Error::Io(_) | geoseg::Error::ImageEncode(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone)]
struct CachedBundle {
    markers: MarkerSet,
    config: DistanceConfig,
    bundle: Arc<DistanceBundle>,
}

#[derive(Debug)]
struct SessionState {
    image: Arc<ScalarGrid>,
    ground_truth: Option<Mask>,
    markers: Option<MarkerSet>,
    params: Params,
    config: PipelineConfig,
    bundle: Option<CachedBundle>,
    result: Option<Arc<SegmentationResult>>,
}

impl SessionState {
    fn cached_bundle(&self, markers: &MarkerSet) -> Option<Arc<DistanceBundle>> {
        self.bundle
            .as_ref()
            .filter(|c| &c.markers == markers && c.config == self.config.distance)
            .map(|c| c.bundle.clone())
    }
}

#[derive(Debug)]
struct Session {
    state: Mutex<SessionState>,
    running: AtomicBool,
    last_access: Mutex<Instant>,
}

impl Session {
    fn lock(&self) -> MutexGuard<'_, SessionState> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }
}

/// Clears the session's running flag when the run ends, however it ends.
struct RunGuard(Arc<Session>);

impl Drop for RunGuard {
    fn drop(&mut self) {
        self.0.running.store(false, Ordering::Release);
    }
}

#[derive(Debug)]
pub struct AppState {
    sessions: Mutex<HashMap<Uuid, Arc<Session>>>,
    ttl: Duration,
}

impl AppState {
    pub fn new(ttl: Duration) -> Arc<Self> {
        Arc::new(Self {
            sessions: Mutex::new(HashMap::new()),
            ttl,
        })
    }

    fn table(&self) -> MutexGuard<'_, HashMap<Uuid, Arc<Session>>> {
        self.sessions.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn get(&self, id: &str) -> ApiResult<Arc<Session>> {
        let missing = || ApiError::not_found(format!("unknown session `{id}`"));
        let key = Uuid::parse_str(id).map_err(|_| missing())?;
        let mut table = self.table();
        let session = table.get(&key).cloned().ok_or_else(missing)?;
        let mut seen = session
            .last_access
            .lock()
            .unwrap_or_else(|p| p.into_inner());
        if seen.elapsed() > self.ttl {
            drop(seen);
            table.remove(&key);
            return Err(missing());
        }
        *seen = Instant::now();
        drop(seen);
        Ok(session)
    }

    /// Drops sessions idle for longer than the TTL; returns how many.
    pub fn purge_expired(&self) -> usize {
        let mut table = self.table();
        let before = table.len();
        table.retain(|_, s| {
            s.last_access
                .lock()
                .unwrap_or_else(|p| p.into_inner())
                .elapsed()
                <= self.ttl
        });
        before - table.len()
    }

    pub fn session_count(&self) -> usize {
        self.table().len()
    }
}

#[derive(Debug, Serialize)]
pub struct SegmentReply {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tc: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub c1: f64,
    pub c2: f64,
    pub bundle_rebuilt: bool,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route(
            "/sessions/{id}",
            get(describe_session).delete(delete_session),
        )
        .route("/sessions/{id}/markers", put(put_markers))
        .route("/sessions/{id}/params", put(put_params))
        .route("/sessions/{id}/segment", post(run_segment))
        .route("/sessions/{id}/mask.png", get(get_mask))
        .route("/sessions/{id}/u.csv", get(get_u))
        .route("/sessions/{id}/residuals.csv", get(get_residuals))
        .route("/sessions/{id}/distance/{kind}", get(get_distance))
        .fallback(|| async { ApiError::not_found("no such route") })
        .layer(DefaultBodyLimit::max(64 * 1024 * 1024))
        .with_state(state)
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    mut form: Multipart,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let bad = |e: axum::extract::multipart::MultipartError| {
        ApiError::new(StatusCode::BAD_REQUEST, e.body_text())
    };
    let (mut image, mut truth, mut markers, mut params) = (None, None, None, Params::default());
    while let Some(field) = form.next_field().await.map_err(bad)? {
        let name = field.name().unwrap_or_default().to_string();
        let data = field.bytes().await.map_err(bad)?;
        match name.as_str() {
            "image" => image = Some(io::decode_image(&data)?),
            "ground_truth" => truth = Some(io::decode_mask(&data)?),
            "markers" => markers = Some(parse_markers(&data)?),
            "params" => params = parse_params(&data)?,
            other => {
                return Err(ApiError::unprocessable(format!(
                    "unexpected field `{other}`"
                )))
            }
        }
    }
    let raw = image.ok_or_else(|| ApiError::unprocessable("missing `image` field"))?;
    if let Some(m) = &truth {
        if (m.width(), m.height()) != (raw.width(), raw.height()) {
            return Err(ApiError::unprocessable(
                "ground truth size differs from image",
            ));
        }
    }
    if let Some(m) = &markers {
        m.validate(raw.width(), raw.height())?;
    }
    let config = params.config()?;
    let session = Session {
        state: Mutex::new(SessionState {
            image: Arc::new(normalize(&raw)),
            ground_truth: truth,
            markers,
            params,
            config,
            bundle: None,
            result: None,
        }),
        running: AtomicBool::new(false),
        last_access: Mutex::new(Instant::now()),
    };
    let id = Uuid::new_v4();
    app.table().insert(id, Arc::new(session));
    Ok((
        StatusCode::CREATED,
        Json(json!({ "session_id": id.to_string() })),
    ))
}

fn parse_markers(body: &[u8]) -> ApiResult<MarkerSet> {
    let text =
        std::str::from_utf8(body).map_err(|_| ApiError::unprocessable("body is not UTF-8"))?;
    Ok(MarkerSet::from_json(text)?)
}

fn parse_params(body: &[u8]) -> ApiResult<Params> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::unprocessable(format!("invalid params: {e}")))
}

async fn describe_session(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Json<serde_json::Value>> {
    let session = app.get(&id)?;
    let st = session.lock();
    Ok(Json(json!({
        "session_id": id,
        "width": st.image.width(),
        "height": st.image.height(),
        "markers": st.markers,
        "params": st.params,
        "has_ground_truth": st.ground_truth.is_some(),
        "has_result": st.result.is_some(),
        "running": session.running.load(Ordering::Acquire),
    })))
}

async fn delete_session(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<StatusCode> {
    app.get(&id)?;
    let key = Uuid::parse_str(&id).expect("validated by get");
    app.table().remove(&key);
    Ok(StatusCode::NO_CONTENT)
}

async fn put_markers(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<serde_json::Value>> {
    let session = app.get(&id)?;
    let markers = parse_markers(&body)?;
    let mut st = session.lock();
    markers.validate(st.image.width(), st.image.height())?;
    let reply = json!({
        "markers": markers.markers.len(),
        "anti_markers": markers.anti_markers.len(),
    });
    st.markers = Some(markers);
    Ok(Json(reply))
}

async fn put_params(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<PipelineConfig>> {
    let session = app.get(&id)?;
    let params = parse_params(&body)?;
    let config = params.config()?;
    let mut st = session.lock();
    st.params = params;
    st.config = config;
    Ok(Json(config))
}

/// Returns the bundle for the current markers and distance settings,
/// building and caching it when the cache is stale. The flag reports
/// whether a build happened.
async fn current_bundle(session: &Arc<Session>) -> ApiResult<(Arc<DistanceBundle>, bool)> {
    let (image, markers, config, cached) = {
        let st = session.lock();
        let markers = st
            .markers
            .clone()
            .ok_or_else(|| ApiError::unprocessable("no markers set"))?;
        let cached = st.cached_bundle(&markers);
        (st.image.clone(), markers, st.config.distance, cached)
    };
    if let Some(b) = cached {
        return Ok((b, false));
    }
    let m = markers.clone();
    let bundle = tokio::task::spawn_blocking(move || DistanceBundle::build(&image, &m, &config))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let bundle = Arc::new(bundle);
    session.lock().bundle = Some(CachedBundle {
        markers,
        config,
        bundle: bundle.clone(),
    });
    Ok((bundle, true))
}

async fn run_segment(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Json<SegmentReply>> {
    let session = app.get(&id)?;
    if session.running.swap(true, Ordering::AcqRel) {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "a segmentation is already running",
        ));
    }
    let _guard = RunGuard(session.clone());
    let (bundle, bundle_rebuilt) = current_bundle(&session).await?;
    let (image, solver, truth) = {
        let st = session.lock();
        (st.image.clone(), st.config.solver, st.ground_truth.clone())
    };
    let result = tokio::task::spawn_blocking(move || segment(&image, &bundle, &solver, &image))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let tc = truth.map(|t| tanimoto(&result.mask, &t)).transpose()?;
    let reply = SegmentReply {
        tc,
        iterations: result.iterations,
        converged: result.converged,
        c1: result.c1,
        c2: result.c2,
        bundle_rebuilt,
    };
    session.lock().result = Some(Arc::new(result));
    Ok(Json(reply))
}

fn last_result(session: &Session) -> ApiResult<Arc<SegmentationResult>> {
    session
        .lock()
        .result
        .clone()
        .ok_or_else(|| ApiError::not_found("no segmentation has been run"))
}

fn png_response(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes).into_response()
}

fn csv_response(text: String) -> Response {
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], text).into_response()
}

async fn get_mask(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let r = last_result(&*app.get(&id)?)?;
    Ok(png_response(png_bytes(&mask_to_gray8(&r.mask))?))
}

async fn get_u(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let r = last_result(&*app.get(&id)?)?;
    Ok(csv_response(io::grid_csv_string(&r.u)))
}

async fn get_residuals(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    let r = last_result(&*app.get(&id)?)?;
    Ok(csv_response(io::residual_csv_string(&r)?))
}

async fn get_distance(
    State(app): State<Arc<AppState>>,
    Path((id, kind)): Path<(String, String)>,
) -> ApiResult<Response> {
    let session = app.get(&id)?;
    let kind = kind
        .strip_suffix(".png")
        .ok_or_else(|| ApiError::not_found(format!("unknown distance map `{kind}`")))?
        .to_string();
    if !["euclidean", "geodesic", "anti", "combined"].contains(&kind.as_str()) {
        return Err(ApiError::not_found(format!(
            "unknown distance map `{kind}`"
        )));
    }
    let (bundle, _) = current_bundle(&session).await?;
    let grid = match kind.as_str() {
        "euclidean" => &bundle.euclidean,
        "geodesic" => &bundle.marker_geodesic,
        "combined" => &bundle.combined,
        _ if bundle.has_anti_markers => &bundle.anti_marker,
        _ => return Err(ApiError::not_found("session has no anti-markers")),
    };
    Ok(png_response(png_bytes(&grid_to_gray8(grid))?))
}

/// Port from GEOSEG_PORT when set, else `flag`.
pub fn resolve_port(flag: u16) -> anyhow::Result<u16> {
    match std::env::var("GEOSEG_PORT") {
        Ok(v) => v
            .parse()
            .map_err(|_| anyhow::anyhow!("GEOSEG_PORT is not a port number: `{v}`")),
        Err(_) => Ok(flag),
    }
}

/// Session TTL from GEOSEG_SESSION_TTL_SECONDS, else one hour.
pub fn resolve_ttl() -> anyhow::Result<Duration> {
    match std::env::var("GEOSEG_SESSION_TTL_SECONDS") {
        Ok(v) => v
            .parse()
            .map(Duration::from_secs)
            .map_err(|_| anyhow::anyhow!("GEOSEG_SESSION_TTL_SECONDS is not a number: `{v}`")),
        Err(_) => Ok(DEFAULT_TTL),
    }
}

pub async fn serve(host: &str, port: u16) -> anyhow::Result<()> {
    let state = AppState::new(resolve_ttl()?);
    let reaper = state.clone();
    let period = (reaper.ttl / 2).clamp(Duration::from_secs(1), Duration::from_secs(60));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            reaper.purge_expired();
        }
    });
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}
