//! `/api/v1` routes. Every success body is an [`Envelope`]; every failure
//! body is an [`ApiError`].

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use glens_core::community::{
    community_stats, find_spanners, radar_profiles, treemap_layout, CommunityId, Partition, SizeMeasure,
    DEFAULT_WALK_STEPS,
};
use glens_core::contagion::{PathCaps, PropagationView};
use glens_core::graph::{diff_snapshots, Date};
use glens_core::metrics::{assemble_heatmap, default_rate_histogram, MetricKind};
use glens_core::patterns::{detect_circles_with, CircleOptions};
use glens_core::risk::{build_windows, rolling_predict, RollingParams};
use glens_core::{EnterpriseId, GuaranteeEdge, Snapshot, ViewMode};

use crate::dataset::{Dataset, GRACE_DAYS};
use crate::error::ApiError;
use crate::jobs::{JobRegistry, JobRequest, JobStatus};
use crate::session::{EditRequest, EditResponse, Session, SessionSummary};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    /// Dataset fingerprint the payload was computed from.
    pub fingerprint: String,
    pub data: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotNode {
    pub id: EnterpriseId,
    pub defaulted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotPayload {
    pub as_of: Date,
    pub nodes: Vec<SnapshotNode>,
    pub edges: Vec<GuaranteeEdge>,
}

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Size of the job worker pool.
    pub workers: usize,
    pub caps: PathCaps,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        let workers = std::thread::available_parallelism().map_or(2, |n| n.get());
        ServiceConfig { workers, caps: PathCaps { max_len: 8, max_paths: 10_000 } }
    }
}

pub struct AppState {
    pub dataset: Arc<Dataset>,
    caps: PathCaps,
    next_session: AtomicU64,
    sessions: RwLock<HashMap<String, Arc<tokio::sync::Mutex<Session>>>>,
    jobs: JobRegistry,
    heatmap: tokio::sync::OnceCell<Value>,
}

impl AppState {
    pub fn new(dataset: Dataset, config: &ServiceConfig) -> Arc<AppState> {
        Arc::new(AppState {
            dataset: Arc::new(dataset),
            caps: config.caps,
            next_session: AtomicU64::new(1),
            sessions: RwLock::default(),
            jobs: JobRegistry::new(config.workers),
            heatmap: tokio::sync::OnceCell::new(),
        })
    }

    fn envelope<T>(&self, data: T) -> Json<Envelope<T>> {
        Json(Envelope { schema_version: SCHEMA_VERSION, fingerprint: self.dataset.fingerprint.clone(), data })
    }

    fn session(&self, id: &str) -> Result<Arc<tokio::sync::Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session table")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("UnknownSession", format!("session {id}")))
    }
}

type Reply<T> = Result<Json<Envelope<T>>, ApiError>;
type Shared = State<Arc<AppState>>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/v1/health", get(health))
        .route("/api/v1/sessions", post(create_session))
        .route("/api/v1/sessions/{id}", get(get_session))
        .route("/api/v1/sessions/{id}/edits", post(post_edit))
        .route("/api/v1/network/snapshot", get(snapshot))
        .route("/api/v1/metrics", get(metrics))
        .route("/api/v1/metrics/histogram", get(histogram))
        .route("/api/v1/communities", get(communities))
        .route("/api/v1/treemap", get(treemap))
        .route("/api/v1/radar/{community}", get(radar))
        .route("/api/v1/circles", get(circles))
        .route("/api/v1/jobs", post(submit_job))
        .route("/api/v1/jobs/{id}", get(poll_job).delete(cancel_job))
        .route("/api/v1/heatmap", get(heatmap))
        .route("/api/v1/propagation/{node}", get(propagation))
        .route("/api/v1/sankey/{node}", get(sankey))
        .route("/api/v1/evolution/diff", get(evolution_diff))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "NoRoute", "no such endpoint") })
        .with_state(state)
}

/// Query extractor whose rejections use the structured error body.
pub struct ApiQuery<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for ApiQuery<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(v)| ApiQuery(v))
            .map_err(|e: QueryRejection| ApiError::bad_request(e.body_text()))
    }
}

pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| ApiJson(v))
            .map_err(|e: JsonRejection| ApiError::bad_request(e.body_text()))
    }
}

/// Runs CPU-bound work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|_| ApiError::internal())?
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    version: &'static str,
    enterprises: usize,
    guarantees: usize,
    span: (Date, Date),
    default_date: Date,
}

async fn health(State(st): Shared) -> Json<Envelope<Health>> {
    let d = &st.dataset;
    st.envelope(Health {
        status: "ok",
        version: env!("CARGO_PKG_VERSION"),
        enterprises: d.network.enterprises.len(),
        guarantees: d.network.edges.len(),
        span: d.span,
        default_date: d.default_date,
    })
}

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CreateSession {
    date: Option<Date>,
    steps: Option<usize>,
}

async fn create_session(
    State(st): Shared,
    ApiJson(body): ApiJson<CreateSession>,
) -> Result<(StatusCode, Json<Envelope<SessionSummary>>), ApiError> {
    let id = format!("s{}", st.next_session.fetch_add(1, Ordering::SeqCst));
    let date = st.dataset.date_or_default(body.date);
    let steps = body.steps.unwrap_or(DEFAULT_WALK_STEPS);
    if steps == 0 {
        return Err(ApiError::bad_request("steps must be positive"));
    }
    let dataset = st.dataset.clone();
    let sid = id.clone();
    let session = blocking(move || Ok(Session::new(sid, &dataset, date, steps))).await?;
    let summary = session.summary();
    st.sessions.write().expect("session table").insert(id, Arc::new(tokio::sync::Mutex::new(session)));
    Ok((StatusCode::CREATED, st.envelope(summary)))
}

async fn get_session(State(st): Shared, Path(id): Path<String>) -> Reply<SessionSummary> {
    let s = st.session(&id)?;
    let summary = s.lock().await.summary();
    Ok(st.envelope(summary))
}

/// Edits of one session are serialised by its mutex; other sessions proceed.
async fn post_edit(State(st): Shared, Path(id): Path<String>, ApiJson(req): ApiJson<EditRequest>) -> Reply<EditResponse> {
    let s = st.session(&id)?;
    let mut guard = s.lock_owned().await;
    let dataset = st.dataset.clone();
    let caps = st.caps;
    let out = blocking(move || guard.apply(&req, &dataset, caps)).await?;
    Ok(st.envelope(out))
}

#[derive(Default, Deserialize)]
#[serde(default)]
struct DateQuery {
    date: Option<Date>,
}

fn snapshot_payload(d: &Dataset, snap: &Snapshot) -> SnapshotPayload {
    SnapshotPayload {
        as_of: snap.as_of,
        nodes: snap.nodes.iter().map(|id| SnapshotNode { id: id.clone(), defaulted: d.ledger.is_defaulted(id) }).collect(),
        edges: snap.edges.clone(),
    }
}

async fn snapshot(State(st): Shared, ApiQuery(q): ApiQuery<DateQuery>) -> Reply<SnapshotPayload> {
    let d = st.dataset.clone();
    let payload = blocking(move || Ok(snapshot_payload(&d, &d.snapshot(q.date)))).await?;
    Ok(st.envelope(payload))
}

#[derive(Default, Deserialize)]
#[serde(default)]
struct MetricsQuery {
    date: Option<Date>,
    kind: Option<String>,
    bins: Option<usize>,
}

fn parse_kind(kind: &str) -> Result<MetricKind, ApiError> {
    MetricKind::from_str(kind).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()))
}

async fn metrics(State(st): Shared, ApiQuery(q): ApiQuery<MetricsQuery>) -> Reply<Value> {
    let kind = q.kind.as_deref().map(parse_kind).transpose()?;
    let d = st.dataset.clone();
    let date = d.date_or_default(q.date);
    let data = blocking(move || {
        let all = d.centralities(date);
        let all = all.as_ref().as_ref().map_err(|e| ApiError::from(e.clone()))?;
        Ok(match kind {
            None => serde_json::json!({ "date": date, "metrics": all }),
            Some(k) => {
                let values: BTreeMap<&EnterpriseId, f64> = all.iter().map(|(id, m)| (id, k.value(m))).collect();
                serde_json::json!({ "date": date, "kind": k, "values": values })
            }
        })
    })
    .await?;
    Ok(st.envelope(data))
}

async fn histogram(State(st): Shared, ApiQuery(q): ApiQuery<MetricsQuery>) -> Reply<Value> {
    let kind = parse_kind(q.kind.as_deref().ok_or_else(|| ApiError::bad_request("kind is required"))?)?;
    let bins = q.bins.unwrap_or(10);
    let d = st.dataset.clone();
    let date = d.date_or_default(q.date);
    let data = blocking(move || {
        let all = d.centralities(date);
        let all = all.as_ref().as_ref().map_err(|e| ApiError::from(e.clone()))?;
        let h = default_rate_histogram(all, &d.ledger.defaulted(), kind, bins)?;
        Ok(serde_json::json!({ "date": date, "histogram": h }))
    })
    .await?;
    Ok(st.envelope(data))
}

#[derive(Default, Deserialize)]
#[serde(default)]
struct PartitionQuery {
    date: Option<Date>,
    steps: Option<usize>,
    session: Option<String>,
    measure: Option<SizeMeasure>,
}

/// Partition, its stats and the undirected view, from a session or detected fresh.
async fn resolve_partition(
    st: &AppState,
    q: &PartitionQuery,
) -> Result<(Date, Partition, Vec<glens_core::community::CommunityStats>, glens_core::SimpleGraph), ApiError> {
    if let Some(id) = &q.session {
        let s = st.session(id)?;
        let s = s.lock().await;
        let und = s.snapshot().simple_view(ViewMode::Undirected);
        return Ok((s.date, s.partition().clone(), s.stats().to_vec(), und));
    }
    let d = st.dataset.clone();
    let date = d.date_or_default(q.date);
    let steps = q.steps.unwrap_or(DEFAULT_WALK_STEPS).max(1);
    blocking(move || {
        let p = (*d.partition(date, steps)).clone();
        let und = d.snapshot(Some(date)).simple_view(ViewMode::Undirected);
        let stats = community_stats(&p, &und, &d.ledger);
        Ok((date, p, stats, und))
    })
    .await
}

async fn communities(State(st): Shared, ApiQuery(q): ApiQuery<PartitionQuery>) -> Reply<Value> {
    let (date, p, stats, und) = resolve_partition(&st, &q).await?;
    let spanners = find_spanners(&p, &und);
    Ok(st.envelope(serde_json::json!({
        "date": date,
        "revision": p.revision(),
        "labels": p.labels(),
        "stats": stats,
        "spanners": spanners,
    })))
}

async fn treemap(State(st): Shared, ApiQuery(q): ApiQuery<PartitionQuery>) -> Reply<Value> {
    let (date, p, stats, _) = resolve_partition(&st, &q).await?;
    let layout = treemap_layout(&stats, q.measure.unwrap_or_default());
    Ok(st.envelope(serde_json::json!({ "date": date, "revision": p.revision(), "treemap": layout })))
}

fn parse_community(s: &str) -> Result<CommunityId, ApiError> {
    s.trim_start_matches('C')
        .parse()
        .map(CommunityId)
        .map_err(|_| ApiError::bad_request(format!("bad community id {s:?}")))
}

async fn radar(State(st): Shared, Path(c): Path<String>, ApiQuery(q): ApiQuery<PartitionQuery>) -> Reply<Value> {
    let c = parse_community(&c)?;
    let (date, p, _, _) = resolve_partition(&st, &q).await?;
    let d = st.dataset.clone();
    let profile = blocking(move || {
        let report = radar_profiles(&p, &d.snapshot(Some(date)), &d.network, &d.ledger);
        report
            .profile(c)
            .cloned()
            .ok_or_else(|| ApiError::not_found("UnknownCommunity", format!("community {c}")))
    })
    .await?;
    Ok(st.envelope(serde_json::json!({ "date": date, "profile": profile })))
}

#[derive(Default, Deserialize)]
#[serde(default)]
struct CircleQuery {
    date: Option<Date>,
    maxlen: Option<usize>,
}

async fn circles(State(st): Shared, ApiQuery(q): ApiQuery<CircleQuery>) -> Reply<Value> {
    let maxlen = q.maxlen.unwrap_or(CircleOptions::default().max_cycle_len);
    if maxlen < 2 {
        return Err(ApiError::bad_request("maxlen must be at least 2"));
    }
    let d = st.dataset.clone();
    let date = d.date_or_default(q.date);
    let report = blocking(move || {
        let g = d.snapshot(Some(date)).simple_view(ViewMode::Directed);
        Ok(detect_circles_with(&g, &CircleOptions { max_cycle_len: maxlen, ..Default::default() }, None))
    })
    .await?;
    Ok(st.envelope(serde_json::json!({ "date": date, "circles": report })))
}

async fn submit_job(
    State(st): Shared,
    ApiJson(req): ApiJson<JobRequest>,
) -> Result<(StatusCode, Json<Envelope<JobStatus>>), ApiError> {
    let status = st.jobs.submit(st.dataset.clone(), req);
    Ok((StatusCode::ACCEPTED, st.envelope(status)))
}

async fn poll_job(State(st): Shared, Path(id): Path<String>) -> Reply<JobStatus> {
    Ok(st.envelope(st.jobs.status(&id)?))
}

async fn cancel_job(State(st): Shared, Path(id): Path<String>) -> Reply<JobStatus> {
    Ok(st.envelope(st.jobs.cancel(&id)?))
}

/// Rolling quarterly predictions with default parameters, computed once.
async fn heatmap(State(st): Shared) -> Reply<Value> {
    let d = st.dataset.clone();
    let grid = st
        .heatmap
        .get_or_try_init(|| {
            blocking(move || {
                let plan = build_windows(d.span, 3, 3)?;
                let r = rolling_predict(&d.network, &plan, &RollingParams { grace_days: GRACE_DAYS, ..Default::default() });
                Ok(serde_json::json!({
                    "grid": assemble_heatmap(&r.scores),
                    "reports": r.reports,
                    "warnings": r.warnings,
                }))
            })
        })
        .await?;
    Ok(st.envelope(grid.clone()))
}

#[derive(Default, Deserialize)]
#[serde(default)]
struct PathQuery {
    date: Option<Date>,
    session: Option<String>,
    maxlen: Option<usize>,
    max_paths: Option<usize>,
}

async fn resolve_view(st: &AppState, q: &PathQuery) -> Result<PropagationView, ApiError> {
    if let Some(id) = &q.session {
        return Ok(st.session(id)?.lock().await.view().clone());
    }
    let d = st.dataset.clone();
    let date = q.date;
    blocking(move || Ok(PropagationView::new(&d.snapshot(date)))).await
}

fn caps_of(st: &AppState, q: &PathQuery) -> PathCaps {
    PathCaps { max_len: q.maxlen.unwrap_or(st.caps.max_len), max_paths: q.max_paths.unwrap_or(st.caps.max_paths) }
}

async fn propagation(State(st): Shared, Path(node): Path<String>, ApiQuery(q): ApiQuery<PathQuery>) -> Reply<Value> {
    let view = resolve_view(&st, &q).await?;
    let caps = caps_of(&st, &q);
    let r = blocking(move || Ok(view.enumerate_paths(&EnterpriseId::new(node), caps)?)).await?;
    Ok(st.envelope(serde_json::to_value(r).expect("serialisable")))
}

async fn sankey(State(st): Shared, Path(node): Path<String>, ApiQuery(q): ApiQuery<PathQuery>) -> Reply<Value> {
    let view = resolve_view(&st, &q).await?;
    let caps = caps_of(&st, &q);
    let r = blocking(move || Ok(view.sankey(&EnterpriseId::new(node), caps)?)).await?;
    Ok(st.envelope(serde_json::to_value(r).expect("serialisable")))
}

#[derive(Deserialize)]
struct DiffQuery {
    from: Date,
    to: Date,
}

async fn evolution_diff(State(st): Shared, ApiQuery(q): ApiQuery<DiffQuery>) -> Reply<Value> {
    let d = st.dataset.clone();
    let diff = blocking(move || Ok(diff_snapshots(&d.network, q.from, q.to)?)).await?;
    Ok(st.envelope(serde_json::to_value(diff).expect("serialisable")))
}
