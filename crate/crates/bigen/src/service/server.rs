//! HTTP and websocket front end.
//!
//! - `POST /sessions` opens a paused session; body `{params?, seed?, snapshot_every?}`.
//! - `GET /sessions/{id}/ws` streams snapshots and accepts `param_update` and
//!   `control` messages.
//! - `GET /sessions/{id}/edges` returns the edge list of small graphs.
//! - `GET /sessions/{id}/histogram` returns untruncated degree histograms.
//! - `DELETE /sessions/{id}` stops a session.
//! - `GET /health`.
//!
//! Each session runs on its own thread and publishes through a bounded
//! broadcast channel; a subscriber that falls behind loses the oldest
//! messages and sees a gap in `seq`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use bigen_core::{analytics, GeneratorParams, Modality};
use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, oneshot};

use super::protocol::{ClientMessage, ErrorCode, ServerMessage, Snapshot};
use super::session::{Session, SessionConfig};
use crate::report::HistogramJson;

/// Largest graph whose edge list can be pulled.
pub const MAX_PULL_EDGES: usize = 2000;
/// Iterations between inbox checks when unthrottled.
const BATCH: u64 = 256;
const THROTTLE_TICK: Duration = Duration::from_millis(20);
const CHANNEL_CAPACITY: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServiceConfig {
    pub max_sessions: usize,
    pub snapshot_every: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { max_sessions: 16, snapshot_every: 100 }
    }
}

type Text = Arc<str>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgesResponse {
    pub t: u64,
    pub users: usize,
    pub items: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramResponse {
    pub t: u64,
    pub user: HistogramJson,
    pub item: HistogramJson,
}

enum Inbound {
    Client { message: ClientMessage, reply: tokio::sync::mpsc::UnboundedSender<Text> },
    Subscribe(oneshot::Sender<(Option<Text>, broadcast::Receiver<Text>)>),
    Edges(oneshot::Sender<Result<EdgesResponse, usize>>),
    Histogram(oneshot::Sender<HistogramResponse>),
}

struct Handle {
    inbox: mpsc::Sender<Inbound>,
}

struct AppState {
    config: ServiceConfig,
    sessions: Mutex<HashMap<u64, Handle>>,
    next_id: AtomicU64,
}

fn text(msg: &ServerMessage) -> Text {
    msg.to_json().into()
}

/// Session thread: drains the inbox at iteration boundaries and steps the
/// generator while running. Exits once every sender is gone.
fn drive(mut session: Session, first: Snapshot, inbox: mpsc::Receiver<Inbound>, out: broadcast::Sender<Text>) {
    let mut latest = text(&ServerMessage::Snapshot(first));
    let publish = |msg: &ServerMessage, latest: &mut Text| {
        let t = text(msg);
        if matches!(msg, ServerMessage::Snapshot(_)) {
            *latest = t.clone();
        }
        // no subscribers is fine
        let _ = out.send(t);
    };
    loop {
        let next = if !session.is_running() {
            match inbox.recv() {
                Ok(m) => Some(m),
                Err(_) => return,
            }
        } else if session.speed().is_some() {
            match inbox.recv_timeout(THROTTLE_TICK) {
                Ok(m) => Some(m),
                Err(mpsc::RecvTimeoutError::Timeout) => None,
                Err(mpsc::RecvTimeoutError::Disconnected) => return,
            }
        } else {
            match inbox.try_recv() {
                Ok(m) => Some(m),
                Err(mpsc::TryRecvError::Empty) => None,
                Err(mpsc::TryRecvError::Disconnected) => return,
            }
        };

        match next {
            Some(Inbound::Client { message, reply }) => {
                for msg in session.handle(message) {
                    match msg {
                        ServerMessage::Error(_) => {
                            let _ = reply.send(text(&msg));
                        }
                        _ => publish(&msg, &mut latest),
                    }
                }
            }
            Some(Inbound::Subscribe(tx)) => {
                let _ = tx.send((Some(latest.clone()), out.subscribe()));
            }
            Some(Inbound::Edges(tx)) => {
                let g = session.graph();
                let resp = if g.edge_count() > MAX_PULL_EDGES {
                    Err(g.edge_count())
                } else {
                    Ok(EdgesResponse { t: session.t(), users: g.user_count(), items: g.item_count(), edges: g.edges() })
                };
                let _ = tx.send(resp);
            }
            Some(Inbound::Histogram(tx)) => {
                let g = session.graph();
                let _ = tx.send(HistogramResponse {
                    t: session.t(),
                    user: HistogramJson::full(&analytics::degree_histogram(g, Modality::User)),
                    item: HistogramJson::full(&analytics::degree_histogram(g, Modality::Item)),
                });
            }
            None => {
                let (n, started) = match session.speed() {
                    Some(s) => (((s * THROTTLE_TICK.as_secs_f64()).ceil() as u64).max(1), Some(Instant::now())),
                    None => (BATCH, None),
                };
                for snap in session.tick(n) {
                    publish(&ServerMessage::Snapshot(snap), &mut latest);
                }
                // pace to `speed` iterations per second
                if let (Some(s), Some(start)) = (session.speed(), started) {
                    let due = Duration::from_secs_f64(n as f64 / s);
                    if let Some(rest) = due.checked_sub(start.elapsed() + THROTTLE_TICK) {
                        thread::sleep(rest);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpenRequest {
    #[serde(default)]
    params: GeneratorParams,
    #[serde(default)]
    seed: u64,
    snapshot_every: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OpenResponse {
    pub id: String,
    pub seed: u64,
    pub snapshot_every: u64,
    pub snapshot: Snapshot,
}

fn error_response(status: StatusCode, msg: ServerMessage) -> Response {
    (status, Json(msg)).into_response()
}

fn unknown(id: &str) -> Response {
    error_response(StatusCode::NOT_FOUND, ServerMessage::error(ErrorCode::UnknownSession, format!("no session {id}")))
}

async fn open_session(State(app): State<Arc<AppState>>, body: axum::body::Bytes) -> Response {
    let req: OpenRequest = if body.is_empty() {
        OpenRequest::default()
    } else {
        match serde_json::from_slice(&body) {
            Ok(r) => r,
            Err(e) => return error_response(StatusCode::BAD_REQUEST, ServerMessage::error(ErrorCode::BadMessage, e.to_string())),
        }
    };
    let config = SessionConfig {
        snapshot_every: req.snapshot_every.unwrap_or(app.config.snapshot_every),
        ..Default::default()
    };
    let (session, first) = match Session::open(req.params, req.seed, config) {
        Ok(s) => s,
        Err(e) => return error_response(StatusCode::UNPROCESSABLE_ENTITY, ServerMessage::invalid(&e, None)),
    };
    let mut sessions = app.sessions.lock().expect("session table");
    if sessions.len() >= app.config.max_sessions {
        return error_response(
            StatusCode::SERVICE_UNAVAILABLE,
            ServerMessage::error(ErrorCode::TooManySessions, format!("limit of {} sessions reached", app.config.max_sessions)),
        );
    }
    let id = app.next_id.fetch_add(1, Ordering::Relaxed);
    let (tx, rx) = mpsc::channel();
    let (out, _) = broadcast::channel(CHANNEL_CAPACITY);
    let resp = OpenResponse { id: id.to_string(), seed: req.seed, snapshot_every: config.snapshot_every, snapshot: first.clone() };
    thread::Builder::new()
        .name(format!("session-{id}"))
        .spawn(move || drive(session, first, rx, out))
        .expect("spawn session thread");
    sessions.insert(id, Handle { inbox: tx });
    (StatusCode::CREATED, Json(resp)).into_response()
}

fn inbox(app: &AppState, id: &str) -> Option<mpsc::Sender<Inbound>> {
    let id: u64 = id.parse().ok()?;
    app.sessions.lock().expect("session table").get(&id).map(|h| h.inbox.clone())
}

async fn close_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let removed = id.parse::<u64>().ok().and_then(|n| app.sessions.lock().expect("session table").remove(&n));
    match removed {
        Some(_) => StatusCode::NO_CONTENT.into_response(),
        None => unknown(&id),
    }
}

async fn edges(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(tx) = inbox(&app, &id) else { return unknown(&id) };
    let (reply, rx) = oneshot::channel();
    if tx.send(Inbound::Edges(reply)).is_err() {
        return unknown(&id);
    }
    match rx.await {
        Ok(Ok(e)) => Json(e).into_response(),
        Ok(Err(n)) => error_response(
            StatusCode::PAYLOAD_TOO_LARGE,
            ServerMessage::error(ErrorCode::TooLarge, format!("{n} edges exceed the limit of {MAX_PULL_EDGES}")),
        ),
        Err(_) => unknown(&id),
    }
}

async fn histogram(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(tx) = inbox(&app, &id) else { return unknown(&id) };
    let (reply, rx) = oneshot::channel();
    if tx.send(Inbound::Histogram(reply)).is_err() {
        return unknown(&id);
    }
    match rx.await {
        Ok(h) => Json(h).into_response(),
        Err(_) => unknown(&id),
    }
}

async fn health(State(app): State<Arc<AppState>>) -> Response {
    let n = app.sessions.lock().expect("session table").len();
    Json(serde_json::json!({ "status": "ok", "sessions": n, "max_sessions": app.config.max_sessions })).into_response()
}

async fn ws_upgrade(State(app): State<Arc<AppState>>, Path(id): Path<String>, ws: WebSocketUpgrade) -> Response {
    let tx = inbox(&app, &id);
    ws.on_upgrade(move |socket| stream(socket, id, tx))
}

async fn stream(mut socket: WebSocket, id: String, inbox: Option<mpsc::Sender<Inbound>>) {
    let subscribed = match inbox.as_ref() {
        Some(tx) => {
            let (reply, rx) = oneshot::channel();
            match tx.send(Inbound::Subscribe(reply)) {
                Ok(()) => rx.await.ok(),
                Err(_) => None,
            }
        }
        None => None,
    };
    let (Some(inbox), Some((latest, mut updates))) = (inbox, subscribed) else {
        let msg = ServerMessage::error(ErrorCode::UnknownSession, format!("no session {id}"));
        let _ = socket.send(Message::Text(msg.to_json().into())).await;
        let _ = socket.send(Message::Close(None)).await;
        return;
    };
    if let Some(t) = latest {
        if socket.send(Message::Text(t.as_ref().into())).await.is_err() {
            return;
        }
    }
    let (reply_tx, mut replies) = tokio::sync::mpsc::unbounded_channel::<Text>();
    loop {
        tokio::select! {
            incoming = socket.recv() => {
                let Some(Ok(frame)) = incoming else { return };
                let body = match frame {
                    Message::Text(t) => t.to_string(),
                    Message::Binary(b) => String::from_utf8_lossy(&b).into_owned(),
                    Message::Close(_) => return,
                    _ => continue,
                };
                match serde_json::from_str::<ClientMessage>(&body) {
                    Ok(message) => {
                        if inbox.send(Inbound::Client { message, reply: reply_tx.clone() }).is_err() {
                            let msg = ServerMessage::error(ErrorCode::UnknownSession, "session closed");
                            let _ = socket.send(Message::Text(msg.to_json().into())).await;
                            return;
                        }
                    }
                    Err(e) => {
                        let msg = ServerMessage::error(ErrorCode::BadMessage, e.to_string());
                        if socket.send(Message::Text(msg.to_json().into())).await.is_err() {
                            return;
                        }
                    }
                }
            }
            Some(t) = replies.recv() => {
                if socket.send(Message::Text(t.as_ref().into())).await.is_err() {
                    return;
                }
            }
            update = updates.recv() => match update {
                Ok(t) => {
                    if socket.send(Message::Text(t.as_ref().into())).await.is_err() {
                        return;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => {
                    let _ = socket.send(Message::Close(None)).await;
                    return;
                }
            },
        }
    }
}

pub fn router(config: ServiceConfig) -> Router {
    let state = Arc::new(AppState { config, sessions: Mutex::new(HashMap::new()), next_id: AtomicU64::new(1) });
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(open_session))
        .route("/sessions/{id}", axum::routing::delete(close_session))
        .route("/sessions/{id}/ws", get(ws_upgrade))
        .route("/sessions/{id}/edges", get(edges))
        .route("/sessions/{id}/histogram", get(histogram))
        .with_state(state)
}

/// Binds `addr` and returns the bound address with the serving future.
pub async fn bind(
    addr: SocketAddr,
    config: ServiceConfig,
) -> std::io::Result<(SocketAddr, impl std::future::Future<Output = std::io::Result<()>>)> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    Ok((local, async move { axum::serve(listener, router(config)).await }))
}
