//! A SPARQL endpoint on localhost backed by the scan-only evaluator.
//!
//! Tests can script failures, inject a response delay and count requests.

use std::collections::{HashMap, VecDeque};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::thread::JoinHandle;
use std::time::Duration;

use axum::extract::{Form, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use ldx_core::rdf::Graph;
use ldx_core::sparql::{evaluate_with, EvalOptions};
use tokio::sync::oneshot;

/// A scripted reply that replaces the next real answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scripted {
    Status(u16),
    /// HTTP 200 with a body that is not a results document.
    Malformed,
}

struct MockState {
    graph: RwLock<Arc<Graph>>,
    requests: AtomicUsize,
    delay: Mutex<Duration>,
    script: Mutex<VecDeque<Scripted>>,
    queries: Mutex<Vec<String>>,
}

pub struct MockEndpoint {
    url: String,
    state: Arc<MockState>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl MockEndpoint {
    /// Serves `graph` at `http://127.0.0.1:<port>/sparql` on a private runtime.
    pub fn start(graph: Arc<Graph>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind mock endpoint");
        listener.set_nonblocking(true).expect("nonblocking listener");
        let url = format!("http://{}/sparql", listener.local_addr().expect("local addr"));
        let state = Arc::new(MockState {
            graph: RwLock::new(graph),
            requests: AtomicUsize::new(0),
            delay: Mutex::new(Duration::ZERO),
            script: Mutex::new(VecDeque::new()),
            queries: Mutex::new(Vec::new()),
        });
        let (tx, rx) = oneshot::channel::<()>();
        let app = Router::new()
            .route("/sparql", get(on_get).post(on_post))
            .with_state(state.clone());
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .enable_all()
                .build()
                .expect("mock runtime");
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).expect("tokio listener");
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
                    .expect("mock endpoint serves");
            });
        });
        MockEndpoint {
            url,
            state,
            shutdown: Some(tx),
            thread: Some(thread),
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    /// Requests received so far, scripted ones included.
    pub fn requests(&self) -> usize {
        self.state.requests.load(Ordering::SeqCst)
    }

    /// Query texts received so far.
    pub fn queries(&self) -> Vec<String> {
        self.state.queries.lock().expect("queries lock").clone()
    }

    pub fn set_delay(&self, delay: Duration) {
        *self.state.delay.lock().expect("delay lock") = delay;
    }

    pub fn set_graph(&self, graph: Arc<Graph>) {
        *self.state.graph.write().expect("graph lock") = graph;
    }

    /// Queues replies used, in order, for the next requests.
    pub fn script(&self, replies: &[Scripted]) {
        self.state.script.lock().expect("script lock").extend(replies.iter().copied());
    }
}

impl Drop for MockEndpoint {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

async fn on_get(State(state): State<Arc<MockState>>, Query(params): Query<HashMap<String, String>>) -> Response {
    answer(state, params.get("query").cloned()).await
}

async fn on_post(State(state): State<Arc<MockState>>, Form(params): Form<HashMap<String, String>>) -> Response {
    answer(state, params.get("query").cloned()).await
}

async fn answer(state: Arc<MockState>, query: Option<String>) -> Response {
    state.requests.fetch_add(1, Ordering::SeqCst);
    let delay = *state.delay.lock().expect("delay lock");
    if !delay.is_zero() {
        tokio::time::sleep(delay).await;
    }
    let scripted = state.script.lock().expect("script lock").pop_front();
    match scripted {
        Some(Scripted::Status(code)) => {
            let code = StatusCode::from_u16(code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            return (code, "scripted failure").into_response();
        }
        Some(Scripted::Malformed) => {
            return ([(header::CONTENT_TYPE, "application/sparql-results+json")], "{\"rows\": []}").into_response();
        }
        None => {}
    }
    let Some(query) = query else {
        return (StatusCode::BAD_REQUEST, "missing query parameter").into_response();
    };
    state.queries.lock().expect("queries lock").push(query.clone());
    let graph = state.graph.read().expect("graph lock").clone();
    let result = tokio::task::spawn_blocking(move || evaluate_with(&query, &graph, &EvalOptions::scan_only()))
        .await
        .expect("evaluation task");
    match result {
        Ok(r) => {
            let body = serde_json::to_string(&r.to_sparql_json()).expect("serializable results");
            ([(header::CONTENT_TYPE, "application/sparql-results+json")], body).into_response()
        }
        Err(e) => (StatusCode::BAD_REQUEST, e.to_string()).into_response(),
    }
}
