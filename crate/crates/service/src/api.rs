//! The HTTP+JSON API.
//!
//! Authenticated routes expect `Authorization: Bearer <token>`. Errors are
//! returned as `{"error": code, "message": text}` with a matching status.
//! `POST /api/run` is open to anonymous callers; with a valid token the
//! caller's files are available to `#include` by their path, e.g.
//! `#include "hw1/lib.sp".`

use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, FromRequestParts, Path, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sparc_core::preprocess::MapResolver;
use tokio::sync::Semaphore;

use crate::config::{LimitError, ServiceConfig};
use crate::run::{run, RunRequest, RunRequestError, RunResponse};
use crate::store::{FileId, FileInfo, FolderId, FolderInfo, Store, StoreError, TreeNode, UserId};

pub struct AppState {
    pub config: ServiceConfig,
    pub store: Store,
    solves: Semaphore,
}

impl AppState {
    pub fn new(config: ServiceConfig, store: Store) -> Self {
        AppState {
            solves: Semaphore::new(config.max_concurrent_solves.max(1)),
            config,
            store,
        }
    }
}

type Shared = Arc<AppState>;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Limits(#[from] LimitError),
    #[error(transparent)]
    Request(#[from] RunRequestError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    fn status_and_code(&self) -> (StatusCode, &'static str) {
        match self {
            ApiError::Store(e) => match e {
                StoreError::DuplicateUser(_) => (StatusCode::CONFLICT, "DuplicateUser"),
                StoreError::BadCredentials => (StatusCode::UNAUTHORIZED, "BadCredentials"),
                StoreError::InvalidSession => (StatusCode::UNAUTHORIZED, "InvalidSession"),
                StoreError::NotFound(_) => (StatusCode::NOT_FOUND, "NotFound"),
                StoreError::NameCollision(_) => (StatusCode::CONFLICT, "NameCollision"),
                StoreError::NotAuthorized => (StatusCode::FORBIDDEN, "NotAuthorized"),
                StoreError::InvalidName(_) => (StatusCode::BAD_REQUEST, "InvalidName"),
                StoreError::Database(_) | StoreError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "Internal"),
            },
            ApiError::Limits(_) => (StatusCode::BAD_REQUEST, "InvalidLimits"),
            ApiError::Request(RunRequestError::MissingQuery) => (StatusCode::BAD_REQUEST, "MissingQuery"),
            ApiError::Request(RunRequestError::ProgramTooLarge { .. }) => (StatusCode::PAYLOAD_TOO_LARGE, "ProgramTooLarge"),
            ApiError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "Internal"),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = self.status_and_code();
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!("{self}");
        }
        (status, Json(json!({ "error": code, "message": self.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs a store operation off the async workers.
async fn blocking<T: Send + 'static>(
    state: &Shared,
    f: impl FnOnce(&Store) -> Result<T, StoreError> + Send + 'static,
) -> ApiResult<T> {
    let state = state.clone();
    tokio::task::spawn_blocking(move || f(&state.store))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(ApiError::from)
}

fn bearer(parts: &Parts) -> Option<String> {
    let value = parts.headers.get(header::AUTHORIZATION)?.to_str().ok()?;
    value.strip_prefix("Bearer ").map(|t| t.trim().to_string())
}

/// The caller of an authenticated route.
pub struct Session {
    pub user: UserId,
    pub token: String,
}

impl FromRequestParts<Shared> for Session {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> Result<Self, Self::Rejection> {
        let token = bearer(parts).ok_or(StoreError::InvalidSession)?;
        let t = token.clone();
        let user = blocking(state, move |s| s.session_user(&t)).await?;
        Ok(Session { user, token })
    }
}

/// The caller of a route open to anonymous use.
pub struct MaybeSession(pub Option<Session>);

impl FromRequestParts<Shared> for MaybeSession {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> Result<Self, Self::Rejection> {
        if parts.headers.contains_key(header::AUTHORIZATION) {
            Session::from_request_parts(parts, state).await.map(|s| MaybeSession(Some(s)))
        } else {
            Ok(MaybeSession(None))
        }
    }
}

#[derive(Deserialize)]
pub struct Credentials {
    pub username: String,
    pub password: String,
}

#[derive(Deserialize)]
pub struct NewFolder {
    pub parent: Option<FolderId>,
    pub name: String,
}

#[derive(Deserialize)]
pub struct NewFile {
    pub folder: Option<FolderId>,
    pub name: String,
    #[serde(default)]
    pub content: String,
}

#[derive(Deserialize)]
pub struct FileUpdate {
    pub name: Option<String>,
    pub content: Option<String>,
}

#[derive(Deserialize)]
pub struct FolderUpdate {
    pub name: String,
}

#[derive(Serialize)]
pub struct FileWithContent {
    #[serde(flatten)]
    pub info: FileInfo,
    pub content: String,
}

async fn register(State(st): State<Shared>, Json(c): Json<Credentials>) -> ApiResult<impl IntoResponse> {
    let id = blocking(&st, move |s| s.register(&c.username, &c.password)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "userId": id }))))
}

async fn login(State(st): State<Shared>, Json(c): Json<Credentials>) -> ApiResult<Json<serde_json::Value>> {
    let token = blocking(&st, move |s| s.login(&c.username, &c.password)).await?;
    Ok(Json(json!({ "token": token })))
}

async fn logout(State(st): State<Shared>, session: Session) -> ApiResult<StatusCode> {
    blocking(&st, move |s| s.logout(&session.token)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn tree(State(st): State<Shared>, session: Session) -> ApiResult<Json<TreeNode>> {
    Ok(Json(blocking(&st, move |s| s.tree(session.user)).await?))
}

async fn create_folder(State(st): State<Shared>, session: Session, Json(f): Json<NewFolder>) -> ApiResult<impl IntoResponse> {
    let info = blocking(&st, move |s| s.create_folder(session.user, f.parent, &f.name)).await?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn rename_folder(
    State(st): State<Shared>,
    session: Session,
    Path(id): Path<FolderId>,
    Json(f): Json<FolderUpdate>,
) -> ApiResult<Json<FolderInfo>> {
    Ok(Json(blocking(&st, move |s| s.rename_folder(session.user, id, &f.name)).await?))
}

async fn delete_folder(State(st): State<Shared>, session: Session, Path(id): Path<FolderId>) -> ApiResult<StatusCode> {
    blocking(&st, move |s| s.delete_folder(session.user, id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn create_file(State(st): State<Shared>, session: Session, Json(f): Json<NewFile>) -> ApiResult<impl IntoResponse> {
    let info = blocking(&st, move |s| s.create_file(session.user, f.folder, &f.name, &f.content)).await?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn read_file(State(st): State<Shared>, session: Session, Path(id): Path<FileId>) -> ApiResult<Json<FileWithContent>> {
    let (info, content) = blocking(&st, move |s| s.read_file(session.user, id)).await?;
    Ok(Json(FileWithContent { info, content }))
}

/// Saves new content, renames, or both.
async fn update_file(
    State(st): State<Shared>,
    session: Session,
    Path(id): Path<FileId>,
    Json(u): Json<FileUpdate>,
) -> ApiResult<Json<FileInfo>> {
    let info = blocking(&st, move |s| {
        let mut info = None;
        if let Some(content) = &u.content {
            info = Some(s.save_file(session.user, id, content)?);
        }
        if let Some(name) = &u.name {
            info = Some(s.rename_file(session.user, id, name)?);
        }
        match info {
            Some(i) => Ok(i),
            None => s.read_file(session.user, id).map(|(i, _)| i),
        }
    })
    .await?;
    Ok(Json(info))
}

async fn delete_file(State(st): State<Shared>, session: Session, Path(id): Path<FileId>) -> ApiResult<StatusCode> {
    blocking(&st, move |s| s.delete_file(session.user, id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn share_file(State(st): State<Shared>, session: Session, Path(id): Path<FileId>) -> ApiResult<Json<serde_json::Value>> {
    let token = blocking(&st, move |s| s.share_file(session.user, id)).await?;
    Ok(Json(json!({ "shareUrl": format!("/api/shared/{token}") })))
}

async fn read_shared(State(st): State<Shared>, Path(token): Path<String>) -> ApiResult<Json<FileWithContent>> {
    let (info, content) = blocking(&st, move |s| s.read_shared(&token)).await?;
    Ok(Json(FileWithContent { info, content }))
}

async fn run_program(State(st): State<Shared>, MaybeSession(session): MaybeSession, Json(req): Json<RunRequest>) -> ApiResult<Json<RunResponse>> {
    req.validate(st.config.max_program_bytes)?;
    let limits = st.config.limits_for(req.timeout_sec, req.max_models)?;
    let resolver = match session {
        Some(s) => MapResolver::new(blocking(&st, move |store| store.workspace_files(s.user)).await?),
        None => MapResolver::default(),
    };
    let _permit = st.solves.acquire().await.map_err(|e| ApiError::Internal(e.to_string()))?;
    let response = tokio::task::spawn_blocking(move || run(&req, &resolver, None, limits))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(Json(response))
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

pub fn router(state: Arc<AppState>) -> Router {
    let body_limit = (2 * state.config.max_program_bytes).max(2 << 20);
    Router::new()
        .route("/api/health", get(health))
        .route("/api/register", post(register))
        .route("/api/login", post(login))
        .route("/api/logout", post(logout))
        .route("/api/tree", get(tree))
        .route("/api/folders", post(create_folder))
        .route("/api/folders/{id}", put(rename_folder).delete(delete_folder))
        .route("/api/files", post(create_file))
        .route("/api/files/{id}", get(read_file).put(update_file).delete(delete_file))
        .route("/api/files/{id}/share", post(share_file))
        .route("/api/shared/{token}", get(read_shared))
        .route("/api/run", post(run_program))
        .layer(DefaultBodyLimit::max(body_limit))
        .with_state(state)
}
