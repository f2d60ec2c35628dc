//! HTTP JSON adapter over resolution sessions.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use witness_resolve::{parse_model, ConstraintState, Error, Presentation, Session};

use crate::report::fingerprint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHandle {
    pub id: String,
    pub created_at_ms: u64,
    pub fingerprint: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Created {
    pub session: SessionHandle,
    pub state: ConstraintState,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decision {
    pub option: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApiError {
    pub error: String,
    pub message: String,
}

struct Entry {
    handle: SessionHandle,
    session: Arc<Mutex<Session>>,
}

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Entry>>>,
    counter: Arc<AtomicU64>,
}

pub struct Failure(StatusCode, ApiError);

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn fail(status: StatusCode, error: &str, message: impl Into<String>) -> Failure {
    Failure(
        status,
        ApiError {
            error: error.into(),
            message: message.into(),
        },
    )
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (status, code) = match &e {
            Error::UnknownOption(_) | Error::UnknownConstraint(_) | Error::UnknownEntity(_) => {
                (StatusCode::NOT_FOUND, "unknown")
            }
            Error::StaleOption(_) => (StatusCode::CONFLICT, "stale_option"),
            Error::ForcedRemoval(_) => (StatusCode::CONFLICT, "forced_removal"),
            Error::EmptyUndo => (StatusCode::CONFLICT, "empty_undo"),
            Error::AlreadyWell => (StatusCode::CONFLICT, "already_well"),
            Error::NoValidOptions(_) => (StatusCode::CONFLICT, "no_valid_options"),
            Error::Schema(_)
            | Error::DuplicateId(_)
            | Error::DanglingReference { .. }
            | Error::InvalidEntity { .. }
            | Error::Inadmissible { .. }
            | Error::NotParameterized(_)
            | Error::Degenerate(_)
            | Error::WitnessInvalid { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_model"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        fail(status, code, e.to_string())
    }
}

pub fn router() -> Router {
    Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(presentation))
        .route("/sessions/{id}/accept", post(accept))
        .route("/sessions/{id}/reject", post(reject))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/model", get(model))
        .route("/sessions/{id}/journal", get(journal))
        .with_state(AppState::default())
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

fn lookup(state: &AppState, id: &str) -> Result<Arc<Mutex<Session>>, Failure> {
    let sessions = state.sessions.lock().expect("session table");
    sessions.get(id).map(|e| e.session.clone()).ok_or_else(|| {
        fail(
            StatusCode::NOT_FOUND,
            "unknown_session",
            format!("no session `{id}`"),
        )
    })
}

/// Runs `f` on the session off the async workers; requests on one session
/// are serialised by its lock.
async fn with_session<T: Send + 'static>(
    state: &AppState,
    id: &str,
    f: impl FnOnce(&mut Session) -> Result<T, Error> + Send + 'static,
) -> Result<T, Failure> {
    let session = lookup(state, id)?;
    tokio::task::spawn_blocking(move || f(&mut session.lock().expect("session lock")))
        .await
        .map_err(|e| fail(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(Failure::from)
}

async fn create(
    State(state): State<AppState>,
    body: String,
) -> Result<(StatusCode, Json<Created>), Failure> {
    let print = fingerprint(&body);
    let session = tokio::task::spawn_blocking(move || parse_model(&body).and_then(Session::start))
        .await
        .map_err(|e| fail(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    let n = state.counter.fetch_add(1, Ordering::Relaxed) + 1;
    let handle = SessionHandle {
        id: format!("s{n}-{}", &print[..8]),
        created_at_ms: now_ms(),
        fingerprint: print,
    };
    let created = Created {
        session: handle.clone(),
        state: session.presentation().state,
    };
    state.sessions.lock().expect("session table").insert(
        handle.id.clone(),
        Entry {
            handle,
            session: Arc::new(Mutex::new(session)),
        },
    );
    Ok((StatusCode::CREATED, Json(created)))
}

async fn list(State(state): State<AppState>) -> Json<Vec<SessionHandle>> {
    let sessions = state.sessions.lock().expect("session table");
    let mut out: Vec<SessionHandle> = sessions.values().map(|e| e.handle.clone()).collect();
    out.sort_by_key(|h| h.created_at_ms);
    Json(out)
}

async fn presentation(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Presentation>, Failure> {
    Ok(Json(
        with_session(&state, &id, |s| Ok(s.presentation().clone())).await?,
    ))
}

async fn accept(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(d): Json<Decision>,
) -> Result<Json<Presentation>, Failure> {
    Ok(Json(
        with_session(&state, &id, move |s| s.accept(&d.option).cloned()).await?,
    ))
}

async fn reject(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(d): Json<Decision>,
) -> Result<Json<Presentation>, Failure> {
    Ok(Json(
        with_session(&state, &id, move |s| s.reject(&d.option).cloned()).await?,
    ))
}

async fn undo(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Presentation>, Failure> {
    Ok(Json(
        with_session(&state, &id, |s| s.undo().cloned()).await?,
    ))
}

async fn model(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, Failure> {
    let doc = with_session(&state, &id, |s| Ok(s.current_document())).await?;
    Ok(([(header::CONTENT_TYPE, "application/json")], doc).into_response())
}

async fn journal(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, Failure> {
    let entries = with_session(&state, &id, |s| Ok(s.journal().to_vec())).await?;
    Ok(Json(entries).into_response())
}

/// Serves until the process is stopped.
pub async fn serve(port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router()).await
}
