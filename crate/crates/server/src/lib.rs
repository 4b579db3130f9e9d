//! HTTP JSON API over exploration sessions.
//!
//! | route | effect |
//! |---|---|
//! | `POST /sessions` | open a session on a file or an endpoint |
//! | `GET /sessions/{id}` | every open pane with its breadcrumb |
//! | `DELETE /sessions/{id}` | drop the session |
//! | `POST /sessions/{id}/expand` | expand a bar into a new pane |
//! | `POST /sessions/{id}/expand/stream` | the same, streamed as NDJSON snapshots |
//! | `POST /sessions/{id}/jump` | open a pane on a searched class |
//! | `GET /sessions/{id}/classes?q=` | class autocomplete |
//! | `GET /sessions/{id}/bar-sparql?pane=&label=` | query listing a bar's members |
//! | `GET /sessions/{id}/panes/{pane}/chart` | a chart view of a pane |
//! | `POST /sessions/{id}/panes/{pane}/table` | instance table of a pane |
//! | `DELETE /sessions/{id}/panes/{pane}` | close a pane and its descendants |
//! | `GET /metrics` | session count and query manager counters |
//! | `GET /health` | liveness |

pub mod config;
pub mod dto;
pub mod error;
mod routes;
pub mod state;

use std::future::Future;
use std::sync::Arc;
use std::time::Instant;

use axum::http::HeaderValue;
use axum::routing::{delete, get, post};
use axum::Router;
use tokio::net::TcpListener;
use tower_http::cors::{Any, CorsLayer};

pub use config::{ConfigError, ServerConfig};
pub use error::ApiError;
pub use state::{AppState, SessionRecord};

pub fn router(state: Arc<AppState>) -> Router {
    let cors = state.config().cors_origin.as_deref().map(|origin| {
        let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any);
        match origin {
            "*" => layer.allow_origin(Any),
            o => match HeaderValue::from_str(o) {
                Ok(v) => layer.allow_origin(v),
                Err(_) => {
                    log::warn!("ignoring invalid cors_origin {o:?}");
                    layer
                }
            },
        }
    });
    let router = Router::new()
        .route("/health", get(routes::health))
        .route("/metrics", get(routes::metrics))
        .route("/sessions", post(routes::create_session))
        .route("/sessions/{id}", get(routes::get_session).delete(routes::delete_session))
        .route("/sessions/{id}/expand", post(routes::expand))
        .route("/sessions/{id}/expand/stream", post(routes::expand_stream))
        .route("/sessions/{id}/jump", post(routes::jump))
        .route("/sessions/{id}/classes", get(routes::classes))
        .route("/sessions/{id}/bar-sparql", get(routes::bar_sparql))
        .route("/sessions/{id}/panes/{pane}", delete(routes::close_pane))
        .route("/sessions/{id}/panes/{pane}/chart", get(routes::get_chart))
        .route("/sessions/{id}/panes/{pane}/table", post(routes::get_table))
        .with_state(state);
    match cors {
        Some(cors) => router.layer(cors),
        None => router,
    }
}

/// Periodically evicts idle sessions.
pub fn spawn_sweeper(state: Arc<AppState>) -> tokio::task::JoinHandle<()> {
    let period = state.config().sweep_interval;
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        tick.tick().await;
        loop {
            tick.tick().await;
            state.sweep(Instant::now());
        }
    })
}

/// Serves the API on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let sweeper = spawn_sweeper(state.clone());
    let manager = state.manager().clone();
    let result = axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await;
    sweeper.abort();
    manager.shutdown();
    result
}
