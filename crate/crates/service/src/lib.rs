//! HTTP JSON service over the guarantee-network engine: read-only analytic
//! endpoints, isolated editing sessions and cancellable background jobs.

pub mod api;
pub mod dataset;
pub mod error;
pub mod jobs;
pub mod session;
pub mod view;

use std::net::SocketAddr;
use std::sync::Arc;

use thiserror::Error;

pub use api::{router, AppState, Envelope, ServiceConfig, SCHEMA_VERSION};
pub use dataset::{Dataset, DatasetError};
pub use error::ApiError;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    BindFailure { addr: SocketAddr, source: std::io::Error },
    #[error("server stopped: {0}")]
    Io(#[from] std::io::Error),
}

pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> Result<(), ServeError> {
    let listener =
        tokio::net::TcpListener::bind(addr).await.map_err(|source| ServeError::BindFailure { addr, source })?;
    axum::serve(listener, router(state)).await?;
    Ok(())
}
