//! Multi-user workspace service for SPARC programs: accounts, a per-user
//! folder tree of program files, and endpoints that check, solve, query and
//! render programs under enforced time and answer-set limits.

pub mod api;
pub mod config;
pub mod run;
pub mod store;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use tokio::net::TcpListener;

pub use api::{router, AppState};
pub use config::{ServiceConfig, TimeoutPolicy};
pub use run::{run, RunMode, RunRequest, RunResponse, RunStatus};
pub use store::{Store, StoreError};

/// Opens the store named by `config` and builds the shared state.
pub fn open(config: ServiceConfig) -> Result<Arc<AppState>, StoreError> {
    let store = Store::open(&config.data_dir, Duration::from_secs(config.session_ttl_sec))?;
    Ok(Arc::new(AppState::new(config, store)))
}

/// Serves on an already bound listener until the task is dropped or the
/// listener fails.
pub async fn serve_on(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

/// Binds `config.listen` and serves. Returns the bound address through
/// `on_bound` before accepting connections.
pub async fn serve(config: ServiceConfig, on_bound: impl FnOnce(SocketAddr)) -> std::io::Result<()> {
    let state = open(config).map_err(std::io::Error::other)?;
    let listener = TcpListener::bind(state.config.listen).await?;
    on_bound(listener.local_addr()?);
    serve_on(listener, state).await
}
