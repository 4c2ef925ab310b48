use std::future::Future;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::context::{AppContext, StartupError};
use super::sessions::{PresentedTrial, ResponseAck, SessionError, SessionInfo, SessionResults};
use crate::embedding::MatchResult;
use crate::haptics::{HapticError, PatternId, PlaybackCommand};
use crate::image::ImageRef;
use crate::recognition::MaskSpec;
use crate::study::PatternCondition;
use crate::thermal::{map_estimate_to_mode, ThermalMode, ThermalState};
use crate::vlm::{estimate_temperature, TemperatureEstimate, TemperatureQuery, VlmError};

type AppState = Arc<AppContext>;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            kind,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "error": self.kind, "message": self.message })),
        )
            .into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let (status, kind) = match &e {
            SessionError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            SessionError::Complete => (StatusCode::CONFLICT, "session_complete"),
            SessionError::Protocol(_) => (StatusCode::CONFLICT, "protocol_error"),
            SessionError::Invalid(_) => (StatusCode::BAD_REQUEST, "invalid_request"),
            SessionError::Study(_) => (StatusCode::INTERNAL_SERVER_ERROR, "study_error"),
        };
        ApiError::new(status, kind, e.to_string())
    }
}

impl From<HapticError> for ApiError {
    fn from(e: HapticError) -> Self {
        match e {
            HapticError::UnknownPattern(_) => ApiError::new(StatusCode::NOT_FOUND, "unknown_pattern", e.to_string()),
            HapticError::Gain(_) | HapticError::InvalidParameter { .. } => {
                ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", e.to_string())
            }
            other => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "haptic_error", other.to_string()),
        }
    }
}

impl From<VlmError> for ApiError {
    fn from(e: VlmError) -> Self {
        let (status, kind) = match &e {
            VlmError::BackendTimeout { .. } => (StatusCode::GATEWAY_TIMEOUT, "backend_timeout"),
            VlmError::Backend(_) => (StatusCode::BAD_GATEWAY, "backend_error"),
            VlmError::Parse { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "parse_error"),
            _ => (StatusCode::BAD_REQUEST, "invalid_request"),
        };
        ApiError::new(status, kind, e.to_string())
    }
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

fn now_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSession {
    pub participant_id: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialResponse {
    pub trial_index: usize,
    pub perceived: PatternCondition,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlayRequest {
    pub pattern: String,
    #[serde(default = "unit_gain")]
    pub gain: f64,
    #[serde(default, rename = "loop")]
    pub looping: bool,
}

fn unit_gain() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlayResponse {
    pub audio_key: String,
    pub duration_s: f64,
    pub looping: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ThermalRequest {
    #[serde(default)]
    pub mode: Option<ThermalMode>,
    /// Steps the simulation immediately by this many seconds.
    #[serde(default)]
    pub advance_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImageRequest {
    pub image_ref: ImageRef,
    #[serde(default)]
    pub mask: Option<MaskSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecognizeResponse {
    pub matched: bool,
    #[serde(flatten)]
    pub result: Option<MatchResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateResponse {
    #[serde(flatten)]
    pub estimate: TemperatureEstimate,
    pub suggested_mode: ThermalMode,
}

async fn health(State(ctx): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({
        "status": "ready",
        "sessions": ctx.sessions.len(),
        "materials": ctx.db.len(),
        "patterns": ctx.registry.keys().collect::<Vec<_>>(),
        "vlm": ctx.vlm.is_some(),
        "encoder": ctx.encoder.is_some(),
    }))
}

async fn create_session(
    State(ctx): State<AppState>,
    Json(req): Json<CreateSession>,
) -> Result<Json<SessionInfo>, ApiError> {
    blocking(move || Ok(Json(ctx.sessions.create(&req.participant_id, req.seed)?))).await
}

/// Presents the next trial: vibration on the playback engine, thermal mode on the device.
async fn next_trial(State(ctx): State<AppState>, Path(id): Path<String>) -> Result<Json<PresentedTrial>, ApiError> {
    blocking(move || {
        let trial = ctx.sessions.next(&id)?;
        let cmd = PlaybackCommand::new(trial.presented.vibration.code(), 1.0, false, now_ms())?;
        ctx.playback.schedule(cmd)?;
        ctx.thermal.request_mode(trial.presented.thermal.mode());
        Ok(Json(trial))
    })
    .await
}

async fn record_response(
    State(ctx): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<TrialResponse>,
) -> Result<Json<ResponseAck>, ApiError> {
    blocking(move || {
        let ack = ctx.sessions.respond(&id, req.trial_index, req.perceived)?;
        if ack.ack == "appended" {
            ctx.playback.stop();
            ctx.thermal.request_mode(ThermalMode::Idle);
        }
        Ok(Json(ack))
    })
    .await
}

async fn results(State(ctx): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionResults>, ApiError> {
    blocking(move || Ok(Json(ctx.sessions.results(&id)?))).await
}

async fn play(State(ctx): State<AppState>, Json(req): Json<PlayRequest>) -> Result<Json<PlayResponse>, ApiError> {
    blocking(move || {
        // accept registry keys verbatim, and pattern codes case-insensitively
        let key = if ctx.registry.contains(&req.pattern) {
            req.pattern.clone()
        } else {
            req.pattern.parse::<PatternId>()?.code().to_string()
        };
        let duration_s = ctx.registry.pattern(&key)?.duration_s;
        ctx.playback
            .schedule(PlaybackCommand::new(key.clone(), req.gain, req.looping, now_ms())?)?;
        Ok(Json(PlayResponse {
            audio_key: key,
            duration_s,
            looping: req.looping,
        }))
    })
    .await
}

async fn thermal_get(State(ctx): State<AppState>) -> Json<ThermalState> {
    Json(ctx.thermal.snapshot())
}

async fn thermal_post(
    State(ctx): State<AppState>,
    Json(req): Json<ThermalRequest>,
) -> Result<Json<ThermalState>, ApiError> {
    if let Some(mode) = req.mode {
        ctx.thermal.request_mode(mode);
    }
    let state = match req.advance_s {
        Some(dt) => ctx
            .thermal
            .advance(dt)
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", e.to_string()))?,
        None => ctx.thermal.snapshot(),
    };
    Ok(Json(state))
}

async fn recognize(
    State(ctx): State<AppState>,
    Json(req): Json<ImageRequest>,
) -> Result<Json<RecognizeResponse>, ApiError> {
    let encoder = ctx.encoder.clone().ok_or_else(|| {
        ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "no_backend",
            "no encoder backend configured",
        )
    })?;
    blocking(move || {
        let mask = req.mask.unwrap_or_default();
        mask.validate(None)
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", e.to_string()))?;
        let v = encoder
            .encode(&req.image_ref, &mask)
            .map_err(|e| ApiError::new(StatusCode::BAD_GATEWAY, "encoder_error", e.to_string()))?;
        let result = ctx
            .db
            .match_material(&v, ctx.config.recognition_threshold)
            .map_err(|e| ApiError::new(StatusCode::BAD_GATEWAY, "encoder_error", e.to_string()))?;
        Ok(Json(RecognizeResponse {
            matched: result.is_some(),
            result,
        }))
    })
    .await
}

async fn estimate(
    State(ctx): State<AppState>,
    Json(req): Json<ImageRequest>,
) -> Result<Json<EstimateResponse>, ApiError> {
    let vlm = ctx.vlm.clone().ok_or_else(|| {
        ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "no_backend",
            "no VLM backend configured",
        )
    })?;
    blocking(move || {
        let query = TemperatureQuery::standard(req.image_ref, ctx.config.vlm_timeout_ms)?;
        let estimate = estimate_temperature(vlm.as_ref(), &query)?;
        let suggested_mode = map_estimate_to_mode(estimate.celsius, ctx.config.thresholds)
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "config_error", e.to_string()))?;
        Ok(Json(EstimateResponse {
            estimate,
            suggested_mode,
        }))
    })
    .await
}

pub fn router(ctx: Arc<AppContext>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}/next", get(next_trial))
        .route("/api/session/{id}/response", post(record_response))
        .route("/api/session/{id}/results", get(results))
        .route("/api/haptic/play", post(play))
        .route("/api/thermal", get(thermal_get).post(thermal_post))
        .route("/api/recognize", post(recognize))
        .route("/api/temperature/estimate", post(estimate))
        .with_state(ctx)
}

/// Serves on `listener` until `shutdown` resolves, ticking the thermal simulation in the background.
pub async fn serve(
    ctx: Arc<AppContext>,
    listener: tokio::net::TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let tick_s = ctx.config.thermal_tick_s;
    let device = Arc::clone(&ctx.thermal);
    let ticker = tokio::spawn(async move {
        let mut interval = tokio::time::interval(Duration::from_secs_f64(tick_s));
        loop {
            interval.tick().await;
            if let Err(e) = device.advance(tick_s) {
                warn!("thermal step failed: {e}");
            }
        }
    });
    let result = axum::serve(listener, router(ctx))
        .with_graceful_shutdown(shutdown)
        .await;
    ticker.abort();
    result
}

/// Binds the configured address, prints `listening on <addr>` and serves until Ctrl-C.
pub fn run(ctx: AppContext) -> Result<(), StartupError> {
    let addr = format!("{}:{}", ctx.config.bind, ctx.config.port);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|source| StartupError::Bind {
            addr: addr.clone(),
            source,
        })?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|source| StartupError::Bind {
                addr: addr.clone(),
                source,
            })?;
        let local = listener.local_addr().map_err(|source| StartupError::Bind {
            addr: addr.clone(),
            source,
        })?;
        println!("listening on {local}");
        info!("serving on {local}");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        serve(Arc::new(ctx), listener, shutdown)
            .await
            .map_err(|source| StartupError::Bind { addr, source })
    })
}
