//! JSON-over-HTTP session service.
//!
//! Routes (all under `/api`):
//!
//! | method | path                          | body / query                          |
//! |--------|-------------------------------|---------------------------------------|
//! | GET    | /sessions                     |                                       |
//! | POST   | /sessions                     | `{config}`                            |
//! | GET    | /sessions/{id}                |                                       |
//! | POST   | /sessions/{id}/responses      | `{version, x?, y}`                    |
//! | POST   | /sessions/{id}/parameters     | `{version, which, value?}`            |
//! | POST   | /sessions/{id}/undo           | `{version, k}`                        |
//! | GET    | /sessions/{id}/series/{kind}  | `conf, j, p, q, confs, format=svg`    |
//! | GET    | /sessions/{id}/export         |                                       |
//!
//! Every mutation carries the snapshot version it was based on; a stale
//! version is answered with 409 `version_conflict`.

pub mod error;
pub mod store;

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use sens_core::numerics::MleStatus;
use sens_core::phase1::Procedure;
use sens_core::plotdata::{render_svg, series, PlotKind, PlotOptions};
use sens_core::session::{Phase, Prompt, SessionConfig, TestSession, TrialRecord};
use tower_http::services::ServeDir;

pub use error::ApiError;
pub use store::Store;

pub const API_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Fit {
    pub mu: f64,
    /// `null` when infinite.
    pub sig: Option<f64>,
    pub status: MleStatus,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Links {
    pub state: String,
    pub series: String,
    pub export: String,
}

/// Everything a client needs to render a session and know which requests
/// are legal next: `prompt.kind` names the one mutation (besides undo) that
/// the session accepts.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Snapshot {
    pub api_version: u32,
    pub id: String,
    pub version: u64,
    pub config: SessionConfig,
    pub phase: Phase,
    pub prompt: Prompt,
    pub prompt_text: String,
    /// Recommended stress when a pair is awaited.
    pub recommended: Option<f64>,
    pub suspended: bool,
    pub messages: Vec<String>,
    pub trials: Vec<TrialRecord>,
    pub terminal: Option<TrialRecord>,
    pub phase1_len: usize,
    pub n2: Option<u32>,
    pub n3: Option<u32>,
    pub p_lam: Option<(f64, f64)>,
    pub fit: Option<Fit>,
    /// Console reads that undo can remove.
    pub reads: usize,
    pub links: Links,
}

pub fn snapshot(id: &str, version: u64, s: &TestSession) -> Snapshot {
    let prompt = s.prompt();
    let fit = (!s.trials().is_empty()).then(|| {
        let f = s.fit();
        Fit {
            mu: f.mu,
            sig: f.sig.is_finite().then_some(f.sig),
            status: f.status,
        }
    });
    let base = format!("/api/sessions/{id}");
    Snapshot {
        api_version: API_VERSION,
        id: id.into(),
        version,
        config: s.config().clone(),
        phase: s.phase(),
        prompt_text: prompt.text(),
        recommended: match &prompt {
            Prompt::Pair { rx, .. } => Some(*rx),
            _ => None,
        },
        suspended: s.is_suspended(),
        prompt,
        messages: s.messages().to_vec(),
        trials: s.records().to_vec(),
        terminal: s.terminal().cloned(),
        phase1_len: s.phase1_len(),
        n2: s.n2(),
        n3: s.n3(),
        p_lam: s.p_lam(),
        fit,
        reads: s.events().iter().filter(|e| e.is_read()).count(),
        links: Links {
            state: base.clone(),
            series: format!("{base}/series/{{kind}}"),
            export: format!("{base}/export"),
        },
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub version: u64,
    pub title: String,
    pub procedure: Procedure,
    pub phase: Phase,
    pub runs: usize,
    pub suspended: bool,
}

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    pub config: SessionConfig,
}

#[derive(Debug, Deserialize)]
pub struct ResponseRequest {
    pub version: u64,
    /// Defaults to the recommended stress.
    pub x: Option<f64>,
    pub y: i64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "which", content = "value", rename_all = "snake_case")]
pub enum Parameter {
    N2(i64),
    N3(i64),
    PLam((f64, f64)),
    Resume,
}

#[derive(Debug, Deserialize)]
pub struct ParameterRequest {
    pub version: u64,
    #[serde(flatten)]
    pub parameter: Parameter,
}

#[derive(Debug, Deserialize)]
pub struct UndoRequest {
    pub version: u64,
    pub k: usize,
}

#[derive(Debug, Default, Deserialize)]
pub struct SeriesQuery {
    pub conf: Option<f64>,
    pub j: Option<u32>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    /// Comma-separated confidence levels.
    pub confs: Option<String>,
    /// `svg` for a rendered plot; JSON otherwise.
    pub format: Option<String>,
}

type AppState = Arc<Store>;

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/api/sessions", get(list).post(create))
        .route("/api/sessions/{id}", get(state))
        .route("/api/sessions/{id}/responses", post(respond))
        .route("/api/sessions/{id}/parameters", post(parameter))
        .route("/api/sessions/{id}/undo", post(undo))
        .route("/api/sessions/{id}/series/{kind}", get(plot))
        .route("/api/sessions/{id}/export", get(export))
        .with_state(store)
}

/// The API plus static hosting of a built UI directory.
pub fn app(store: Arc<Store>, ui_dir: Option<PathBuf>) -> Router {
    let r = router(store);
    match ui_dir {
        Some(dir) => r.fallback_service(ServeDir::new(dir)),
        None => r,
    }
}

fn snap_of(id: &str, entry: &std::sync::Mutex<store::Entry>) -> Snapshot {
    let e = entry.lock().unwrap();
    snapshot(id, e.version, &e.session)
}

async fn list(State(st): State<AppState>) -> Json<Vec<SessionSummary>> {
    let out = st
        .ids()
        .into_iter()
        .map(|(id, entry)| {
            let e = entry.lock().unwrap();
            let s = &e.session;
            SessionSummary {
                id,
                version: e.version,
                title: s.config().title.clone(),
                procedure: s.config().phase1.procedure,
                phase: s.phase(),
                runs: s.records().len(),
                suspended: s.is_suspended(),
            }
        })
        .collect();
    Json(out)
}

async fn create(State(st): State<AppState>, Json(req): Json<CreateRequest>) -> Result<Response, ApiError> {
    req.config.validate()?;
    let (id, entry) = st.create(req.config)?;
    Ok((StatusCode::CREATED, Json(snap_of(&id, &entry))).into_response())
}

async fn state(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Snapshot>, ApiError> {
    let entry = st.get(&id)?;
    Ok(Json(snap_of(&id, &entry)))
}

async fn respond(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<ResponseRequest>,
) -> Result<Json<Snapshot>, ApiError> {
    let entry = st.mutate(&id, req.version, |s| {
        let x = match (req.x, s.prompt()) {
            (Some(x), _) => x,
            (None, Prompt::Pair { rx, .. }) => rx,
            (None, _) => 0.0,
        };
        let mut next = s.clone();
        next.enter_pair(x, req.y)?;
        Ok(next)
    })?;
    Ok(Json(snap_of(&id, &entry)))
}

async fn parameter(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<ParameterRequest>,
) -> Result<Json<Snapshot>, ApiError> {
    let entry = st.mutate(&id, req.version, |s| {
        let mut next = s.clone();
        match req.parameter {
            Parameter::N2(n) => next.enter_n2(n)?,
            Parameter::N3(n) => next.enter_n3(n)?,
            Parameter::PLam((p, lam)) => next.enter_p_lam(p, lam)?,
            Parameter::Resume => next.resume()?,
        };
        Ok(next)
    })?;
    Ok(Json(snap_of(&id, &entry)))
}

async fn undo(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<UndoRequest>,
) -> Result<Json<Snapshot>, ApiError> {
    let entry = st.mutate(&id, req.version, |s| {
        if req.k == 0 {
            return Err(ApiError::BadRequest("k must be positive".into()));
        }
        if s.events().iter().all(|e| !e.is_read()) {
            return Err(sens_core::Error::NothingToUndo.into());
        }
        Ok(s.fixw(req.k)?)
    })?;
    Ok(Json(snap_of(&id, &entry)))
}

async fn plot(
    State(st): State<AppState>,
    Path((id, kind)): Path<(String, String)>,
    Query(q): Query<SeriesQuery>,
) -> Result<Response, ApiError> {
    let kind: PlotKind = kind.parse()?;
    let mut opt = PlotOptions::default();
    if let Some(c) = q.conf {
        opt.conf = c;
    }
    if let Some(j) = q.j {
        opt.j = j;
    }
    opt.p = q.p;
    opt.q = q.q;
    if let Some(cs) = &q.confs {
        opt.confs = cs
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| ApiError::BadRequest(format!("bad confidence level {t:?}"))))
            .collect::<Result<_, _>>()?;
    }
    let entry = st.get(&id)?;
    let ser = {
        let e = entry.lock().unwrap();
        series(&e.session, kind, &opt)?
    };
    Ok(match q.format.as_deref() {
        Some("svg") => ([(header::CONTENT_TYPE, "image/svg+xml")], render_svg(&ser)).into_response(),
        None | Some("json") => Json(ser).into_response(),
        Some(f) => return Err(ApiError::BadRequest(format!("unknown format {f:?}"))),
    })
}

async fn export(State(st): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let text = st.get(&id)?.lock().unwrap().session.export_text();
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}
