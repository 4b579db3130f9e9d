use std::convert::Infallible;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use futures::StreamExt;
use ldx_core::explore::{Direction, ExploreError, View};
use ldx_core::sparql::bar_query;
use ldx_query::MetricsSnapshot;
use serde::Serialize;
use tokio::sync::mpsc;

use crate::dto::{
    search_classes, BarSparqlParams, ChartJson, ChartParams, Closed, CreateSession, ExpandRequest, JumpRequest,
    PaneJson, SearchParams, SessionCreated, Snapshot, SparqlJson, TableJson,
};
use crate::error::ApiError;
use crate::state::AppState;

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<T, ApiError>;

/// Runs `f` on the blocking pool: sessions, the query manager and the
/// endpoint client all block.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

fn body<T>(json: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    json.map(|Json(t)| t).map_err(|e| ApiError::BadRequest(e.body_text()))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(t)| t).map_err(|e| ApiError::BadRequest(e.body_text()))
}

pub async fn create_session(
    State(state): Shared,
    request: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SessionCreated>)> {
    let request = body(request)?;
    let created = blocking(move || {
        let record = state.create_session(&request)?;
        let session = record.session.read();
        Ok(SessionCreated {
            session_id: record.id.clone(),
            dataset: record.dataset.id().to_string(),
            stats: record.stats,
            pane: PaneJson::render(&session.panes()[0], &ChartParams::default()),
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(created)))
}

pub async fn get_session(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<crate::dto::SessionJson>> {
    blocking(move || Ok(Json(state.session(&id)?.to_json()))).await
}

pub async fn delete_session(State(state): Shared, Path(id): Path<String>) -> ApiResult<StatusCode> {
    state.remove_session(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn expand(
    State(state): Shared,
    Path(id): Path<String>,
    params: Result<Query<ChartParams>, QueryRejection>,
    request: Result<Json<ExpandRequest>, JsonRejection>,
) -> ApiResult<Json<PaneJson>> {
    let (params, request) = (query(params)?, body(request)?);
    params.validate()?;
    let kind = request.kind()?;
    blocking(move || {
        let record = state.session(&id)?;
        let mut session = record.session.write();
        let pane = session.expand(request.parent_pane, &request.label, kind)?.id;
        if let Some(t) = params.threshold {
            session.set_threshold(pane, t)?;
        }
        Ok(Json(PaneJson::render(session.pane(pane)?, &params)))
    })
    .await
}

fn ndjson_line<T: Serialize>(value: &T) -> String {
    let mut line = serde_json::to_string(value).expect("response types serialize");
    line.push('\n');
    line
}

/// Expands like [`expand`], answering with newline-delimited JSON: one
/// incomplete snapshot per evaluated chunk, then a final line with
/// `complete: true` and the stored pane. Errors raised before the first
/// line are ordinary error responses; later ones become an error line.
pub async fn expand_stream(
    State(state): Shared,
    Path(id): Path<String>,
    params: Result<Query<ChartParams>, QueryRejection>,
    request: Result<Json<ExpandRequest>, JsonRejection>,
) -> ApiResult<Response> {
    let (params, request) = (query(params)?, body(request)?);
    params.validate()?;
    let kind = request.kind()?;
    let record = {
        let state = state.clone();
        blocking(move || state.session(&id)).await?
    };
    let (tx, mut rx) = mpsc::unbounded_channel::<ApiResult<String>>();
    tokio::task::spawn_blocking(move || {
        let mut session = record.session.write();
        let threshold = session
            .pane(request.parent_pane)
            .map_or(ldx_core::explore::DEFAULT_THRESHOLD, |p| p.coverage_threshold);
        let chart_params = params.clone();
        let partial_tx = tx.clone();
        let source = record.source.clone();
        let result = session.expand_with(request.parent_pane, &request.label, kind, |bar, kind| {
            source.expand_streaming(bar, kind, &mut |chart, progress| {
                if !progress.complete {
                    let snapshot = Snapshot {
                        complete: false,
                        fraction: progress.fraction,
                        chunks_done: progress.chunks_done,
                        chunks_total: progress.chunks_total,
                        chart: Some(ChartJson::render(chart, &chart_params, threshold)),
                        pane: None,
                    };
                    let _ = partial_tx.send(Ok(ndjson_line(&snapshot)));
                }
            })
        });
        let last = result.map(|pane| pane.id).and_then(|pane| {
            if let Some(t) = params.threshold {
                session.set_threshold(pane, t)?;
            }
            let pane = PaneJson::render(session.pane(pane)?, &params);
            Ok(Snapshot {
                complete: true,
                fraction: 1.0,
                chunks_done: 0,
                chunks_total: 0,
                chart: None,
                pane: Some(pane),
            })
        });
        let _ = tx.send(last.map(|s| ndjson_line(&s)).map_err(ApiError::from));
    });
    let first = rx
        .recv()
        .await
        .ok_or_else(|| ApiError::Internal("expansion ended without output".into()))??;
    let rest = futures::stream::unfold(rx, |mut rx| async move { rx.recv().await.map(|m| (m, rx)) }).map(|m| {
        Ok::<_, Infallible>(match m {
            Ok(line) => line,
            Err(e) => ndjson_line(&e.body()),
        })
    });
    let lines = futures::stream::once(async move { Ok::<_, Infallible>(first) }).chain(rest);
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], Body::from_stream(lines)).into_response())
}

pub async fn jump(
    State(state): Shared,
    Path(id): Path<String>,
    params: Result<Query<ChartParams>, QueryRejection>,
    request: Result<Json<JumpRequest>, JsonRejection>,
) -> ApiResult<Json<PaneJson>> {
    let (params, request) = (query(params)?, body(request)?);
    params.validate()?;
    blocking(move || {
        let record = state.session(&id)?;
        let mut session = record.session.write();
        let pane = session.open_class(&request.class)?;
        Ok(Json(PaneJson::render(pane, &params)))
    })
    .await
}

fn parse_view(params: &ChartParams) -> ApiResult<Option<View>> {
    Ok(Some(match params.view.as_deref().unwrap_or("pane") {
        "pane" => return Ok(None),
        "subclass" => View::Subclass,
        "prop_out" => View::PropertyOut,
        "prop_in" => View::PropertyIn,
        "connections" => {
            let property = params
                .property
                .clone()
                .ok_or_else(|| ApiError::BadRequest("connections view needs a property".into()))?;
            let direction = match params.direction.as_deref().unwrap_or("out") {
                "out" => Direction::Outgoing,
                "in" => Direction::Incoming,
                other => return Err(ApiError::BadRequest(format!("unknown direction {other:?}"))),
            };
            View::Connections { property, direction }
        }
        other => return Err(ApiError::BadRequest(format!("unknown view {other:?}"))),
    }))
}

pub async fn get_chart(
    State(state): Shared,
    Path((id, pane)): Path<(String, usize)>,
    params: Result<Query<ChartParams>, QueryRejection>,
) -> ApiResult<Json<ChartJson>> {
    let params = query(params)?;
    params.validate()?;
    let view = parse_view(&params)?;
    blocking(move || {
        let record = state.session(&id)?;
        let session = record.session.read();
        let p = session.pane(pane)?;
        let chart = match &view {
            None => p.chart.clone(),
            Some(view) => session.view(pane, view)?,
        };
        Ok(Json(ChartJson::render(&chart, &params, p.coverage_threshold)))
    })
    .await
}

pub async fn get_table(
    State(state): Shared,
    Path((id, pane)): Path<(String, usize)>,
    request: Result<Json<ldx_core::explore::TableRequest>, JsonRejection>,
) -> ApiResult<Json<TableJson>> {
    let request = body(request)?;
    blocking(move || {
        let record = state.session(&id)?;
        let table = record.session.read().table(pane, &request)?;
        Ok(Json(table.into()))
    })
    .await
}

pub async fn close_pane(State(state): Shared, Path((id, pane)): Path<(String, usize)>) -> ApiResult<Json<Closed>> {
    blocking(move || {
        let record = state.session(&id)?;
        let closed = record.session.write().close_pane(pane)?;
        Ok(Json(Closed { closed }))
    })
    .await
}

pub async fn classes(
    State(state): Shared,
    Path(id): Path<String>,
    params: Result<Query<SearchParams>, QueryRejection>,
) -> ApiResult<Json<Vec<ldx_core::explore::ClassInfo>>> {
    let params = query(params)?;
    blocking(move || {
        let record = state.session(&id)?;
        let classes = record.session.read().source().classes()?;
        Ok(Json(search_classes(classes, &params.q)))
    })
    .await
}

pub async fn bar_sparql(
    State(state): Shared,
    Path(id): Path<String>,
    params: Result<Query<BarSparqlParams>, QueryRejection>,
) -> ApiResult<Json<SparqlJson>> {
    let params = query(params)?;
    blocking(move || {
        let record = state.session(&id)?;
        let session = record.session.read();
        let pane = session.pane(params.pane)?;
        let bar = match &params.label {
            None => &pane.focus,
            Some(label) => {
                &pane
                    .chart
                    .get_str(label)
                    .ok_or_else(|| ExploreError::UnknownLabel(label.clone()))?
                    .bar
            }
        };
        Ok(Json(SparqlJson {
            label: bar.label.to_string(),
            sparql: bar_query(&bar.lineage)?.text,
        }))
    })
    .await
}

#[derive(Debug, Serialize)]
pub struct Metrics {
    pub sessions: usize,
    #[serde(flatten)]
    pub queries: MetricsSnapshot,
}

pub async fn metrics(State(state): Shared) -> Json<Metrics> {
    Json(Metrics {
        sessions: state.session_count(),
        queries: state.manager().metrics(),
    })
}

pub async fn health() -> &'static str {
    "ok"
}
