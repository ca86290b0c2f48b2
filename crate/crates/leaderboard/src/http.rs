//! HTTP/JSON surface over the service.
//!
//! ```text
//! POST /teams                        {"name": "..."} → TeamCreated
//! POST /tracks/{track}/submissions   X-Auth-Token header, score-file body → SubmissionResponse
//! GET  /tracks/{track}/leaderboard   → [RankRow]
//! ```
//!
//! Errors carry a machine-readable `code` (AUTH, QUOTA, ID_MISMATCH,
//! MALFORMED, ...) alongside a human-readable message.

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use super::service::{Leaderboard, Track};
use super::{ErrorCode, LeaderboardError};

pub const TOKEN_HEADER: &str = "x-auth-token";

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

struct ApiError(LeaderboardError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let code = self.0.code();
        let status = match code {
            ErrorCode::Auth => StatusCode::UNAUTHORIZED,
            ErrorCode::Quota => StatusCode::TOO_MANY_REQUESTS,
            ErrorCode::IdMismatch => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::Malformed => StatusCode::BAD_REQUEST,
            ErrorCode::DuplicateName => StatusCode::CONFLICT,
            ErrorCode::UnknownTrack => StatusCode::NOT_FOUND,
            ErrorCode::CorruptJournal | ErrorCode::Internal => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        let body = ErrorBody {
            code: code.as_str().to_string(),
            message: self.0.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, Deserialize)]
struct RegisterRequest {
    name: String,
}

async fn register(
    State(service): State<Arc<Leaderboard>>,
    Json(req): Json<RegisterRequest>,
) -> Result<Response, ApiError> {
    let created = service.register_team(&req.name).map_err(ApiError)?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn submit(
    State(service): State<Arc<Leaderboard>>,
    Path(track): Path<String>,
    headers: HeaderMap,
    body: String,
) -> Result<Response, ApiError> {
    let track = Track::parse(&track).map_err(ApiError)?;
    let token = headers
        .get(TOKEN_HEADER)
        .and_then(|v| v.to_str().ok())
        .ok_or(ApiError(LeaderboardError::Auth))?;
    let response = service.submit(token, track, &body).map_err(ApiError)?;
    Ok(Json(response).into_response())
}

async fn board(
    State(service): State<Arc<Leaderboard>>,
    Path(track): Path<String>,
) -> Result<Response, ApiError> {
    let track = Track::parse(&track).map_err(ApiError)?;
    Ok(Json(service.rankings(track)).into_response())
}

/// Builds the service router.
pub fn router(service: Arc<Leaderboard>) -> Router {
    Router::new()
        .route("/teams", post(register))
        .route("/tracks/{track}/submissions", post(submit))
        .route("/tracks/{track}/leaderboard", get(board))
        .with_state(service)
}

/// Serves until the listener fails; callers own the runtime.
pub async fn serve(
    service: Arc<Leaderboard>,
    listener: tokio::net::TcpListener,
) -> std::io::Result<()> {
    axum::serve(listener, router(service)).await
}
