//! Read-only HTTP server for the explorer.

use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;

use crate::bundle::Bundle;
use crate::error::{Error, Result};

#[derive(Clone)]
struct AppState {
    bundle: Bytes,
    assets: Option<Arc<PathBuf>>,
}

/// Reads and validates the bundle; the exact file bytes are served.
pub fn load_bundle_bytes(path: &Path) -> Result<Bytes> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Bundle::from_json(&bytes)?;
    Ok(Bytes::from(bytes))
}

pub fn router(bundle: Bytes, assets: Option<PathBuf>) -> Router {
    let state = AppState {
        bundle,
        assets: assets.map(Arc::new),
    };
    Router::new()
        .route("/api/bundle", get(get_bundle))
        .fallback(get(get_asset))
        .with_state(state)
}

async fn get_bundle(State(state): State<AppState>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], state.bundle.clone()).into_response()
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") | Some("mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("wasm") => "application/wasm",
        _ => "application/octet-stream",
    }
}

/// Maps a request path under the asset root, refusing anything that
/// would climb out of it.
fn asset_path(root: &Path, uri_path: &str) -> Option<PathBuf> {
    let rel = uri_path.trim_start_matches('/');
    let rel = if rel.is_empty() { "index.html" } else { rel };
    let mut out = root.to_path_buf();
    for c in Path::new(rel).components() {
        match c {
            Component::Normal(part) => out.push(part),
            _ => return None,
        }
    }
    Some(out)
}

async fn get_asset(State(state): State<AppState>, uri: Uri) -> Response {
    let Some(root) = state.assets.as_deref() else {
        return StatusCode::NOT_FOUND.into_response();
    };
    let Some(path) = asset_path(root, uri.path()) else {
        return StatusCode::NOT_FOUND.into_response();
    };
    match tokio::fs::read(&path).await {
        Ok(body) => ([(header::CONTENT_TYPE, content_type(&path))], body).into_response(),
        Err(_) => StatusCode::NOT_FOUND.into_response(),
    }
}

/// Binds `127.0.0.1:port`; port 0 picks a free port.
pub async fn bind(port: u16) -> Result<tokio::net::TcpListener> {
    tokio::net::TcpListener::bind(SocketAddr::from(([127, 0, 0, 1], port)))
        .await
        .map_err(|source| Error::Bind { port, source })
}

/// Serves until `shutdown` resolves.
pub async fn run(
    listener: tokio::net::TcpListener,
    app: Router,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<()> {
    let addr = listener.local_addr().ok();
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|e| Error::io(addr.map(|a| a.to_string()).unwrap_or_default(), e))
}
