//! HTTP JSON service over a [`Session`].
//!
//! Routes:
//!
//! * `GET /api/summary`
//! * `POST /api/diagram` with a [`DiagramRequest`] body
//! * `GET /api/transient/temperature?names=A,B[&temperature=C]`
//! * `GET /api/transient/flow?from=A&to=B`
//! * `POST /api/export[?width=&height=]` with a [`DiagramRequest`] body,
//!   answering `image/svg+xml`
//!
//! Failures answer `{"code": ..., "message": ...}`; request errors are 400.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hfv_core::units::{DisplayUnits, TemperatureUnit};
use hfv_core::Error;
use serde::Serialize;

use crate::pipeline::DiagramRequest;
use crate::session::{Session, DEFAULT_EXPORT_HEIGHT, DEFAULT_EXPORT_WIDTH};

#[derive(Debug, Serialize)]
pub struct ApiError {
    pub code: &'static str,
    pub message: String,
    #[serde(skip)]
    status: StatusCode,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            code: "invalid_request",
            message: message.into(),
            status: StatusCode::BAD_REQUEST,
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Validation(_)
            | Error::UnknownSubmodel(_)
            | Error::OverlappingGroups(_)
            | Error::Bounds { .. } => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError {
            code: e.code(),
            message: e.to_string(),
            status,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(session: Arc<Session>) -> Router {
    Router::new()
        .route("/api/summary", get(summary))
        .route("/api/diagram", post(diagram))
        .route("/api/transient/temperature", get(temperature))
        .route("/api/transient/flow", get(flow))
        .route("/api/export", post(export))
        .with_state(session)
}

/// Serves until Ctrl-C.
pub async fn serve(session: Arc<Session>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(session))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn parse_request(body: &[u8]) -> ApiResult<DiagramRequest> {
    let value: serde_json::Value = serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))?;
    if !value.is_object() {
        return Err(ApiError::bad_request("request body must be a JSON object"));
    }
    let req: DiagramRequest = serde_json::from_value(value).map_err(|e| ApiError::bad_request(e.to_string()))?;
    if !(req.radiant_threshold.is_finite() && req.radiant_threshold >= 0.0) {
        return Err(ApiError::bad_request("radiant_threshold must be a finite number >= 0"));
    }
    Ok(req)
}

fn units_from(params: &HashMap<String, String>) -> ApiResult<DisplayUnits> {
    let temperature = match params.get("temperature").map(String::as_str) {
        None | Some("K") => TemperatureUnit::Kelvin,
        Some("C") => TemperatureUnit::Celsius,
        Some(other) => return Err(ApiError::bad_request(format!("unknown temperature unit `{other}`"))),
    };
    match params.get("power").map(String::as_str) {
        None | Some("W") => {}
        Some(other) => return Err(ApiError::bad_request(format!("unknown power unit `{other}`"))),
    }
    Ok(DisplayUnits {
        temperature,
        ..Default::default()
    })
}

fn required<'a>(params: &'a HashMap<String, String>, key: &str) -> ApiResult<&'a str> {
    params
        .get(key)
        .map(String::as_str)
        .filter(|v| !v.is_empty())
        .ok_or_else(|| ApiError::bad_request(format!("missing query parameter `{key}`")))
}

async fn summary(State(s): State<Arc<Session>>) -> impl IntoResponse {
    Json(s.summary())
}

async fn diagram(State(s): State<Arc<Session>>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let req = parse_request(&body)?;
    Ok(Json(s.diagram(&req)?))
}

async fn export(
    State(s): State<Arc<Session>>,
    Query(params): Query<HashMap<String, String>>,
    body: Bytes,
) -> ApiResult<impl IntoResponse> {
    let dim = |key: &str, default: u32| -> ApiResult<u32> {
        match params.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<u32>()
                .ok()
                .filter(|&n| (1..=20_000).contains(&n))
                .ok_or_else(|| ApiError::bad_request(format!("{key} must be an integer in 1..=20000"))),
        }
    };
    let (w, h) = (dim("width", DEFAULT_EXPORT_WIDTH)?, dim("height", DEFAULT_EXPORT_HEIGHT)?);
    let req = parse_request(&body)?;
    let svg = s.export_svg(&req, w, h)?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg))
}

async fn temperature(
    State(s): State<Arc<Session>>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<impl IntoResponse> {
    let names: Vec<String> = required(&params, "names")?
        .split(',')
        .map(str::trim)
        .filter(|n| !n.is_empty())
        .map(str::to_owned)
        .collect();
    Ok(Json(s.temperature_plot(&names, units_from(&params)?)?))
}

async fn flow(
    State(s): State<Arc<Session>>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<impl IntoResponse> {
    let from = required(&params, "from")?;
    let to = required(&params, "to")?;
    Ok(Json(s.flow_plot(from, to, units_from(&params)?)?))
}
