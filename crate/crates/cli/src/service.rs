//! Live session service.
//!
//! Every session lives on its own thread, which is the only code that touches
//! the simulation. HTTP handlers talk to it through a command queue and get
//! replies over oneshot channels; stream subscribers receive the
//! thread's messages, serialized once, through a broadcast channel.
//!
//! Routes:
//! - `POST /session` with `{"config": {...}, "seed"?: u64, "tick_rate"?: f64}`
//! - `POST /session/{id}/control` with `{"action": "resume" | "pause" | "step", "n"?: u32}`
//! - `POST /session/{id}/intervene` with an intervention payload and an optional `idempotency_key`
//! - `GET /session/{id}/snapshot`
//! - `GET /session/{id}/stream` (WebSocket)

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError, TryRecvError};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::ws::{Message as WsMessage, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use echo_pathways::session::{Control, Message, Mode, Session, SnapshotView, MESSAGE_VERSION};
use echo_pathways::{InterventionKind, RecordLevel, RunRecord, ScenarioConfig};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::{broadcast, oneshot};

use crate::error::{CliError, CliResult};

const BROADCAST_CAPACITY: usize = 4096;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    pub config: ScenarioConfig,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Steps per second while running; unlimited when absent.
    #[serde(default)]
    pub tick_rate: Option<f64>,
}

#[derive(Debug, Deserialize)]
pub struct InterveneRequest {
    #[serde(flatten)]
    pub kind: InterventionKind,
    /// Repeated submissions with the same key are acknowledged but queued once.
    #[serde(default)]
    pub idempotency_key: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlAck {
    pub v: u32,
    pub step: u32,
    pub mode: Mode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterveneAck {
    pub v: u32,
    pub queued: bool,
    /// Step boundary at which the intervention takes effect.
    pub effective_step: u32,
}

type Reply<T> = oneshot::Sender<Result<T, String>>;
type Subscription = (Vec<Arc<str>>, broadcast::Receiver<Arc<str>>);

enum Command {
    Control(Control, Reply<ControlAck>),
    Intervene(InterveneRequest, Reply<InterveneAck>),
    Snapshot(oneshot::Sender<SnapshotView>),
    Record(oneshot::Sender<RunRecord>),
    Subscribe(oneshot::Sender<Subscription>),
}

struct Worker {
    session: Session,
    id: String,
    tx: broadcast::Sender<Arc<str>>,
    keys: HashSet<String>,
    out: Option<PathBuf>,
    persisted: bool,
}

impl Worker {
    fn publish(&self, messages: Vec<Message>) {
        for m in messages {
            let text: Arc<str> = serde_json::to_string(&m).expect("messages serialize").into();
            // No subscribers is fine.
            let _ = self.tx.send(text);
        }
    }

    fn handle(&mut self, cmd: Command) {
        match cmd {
            Command::Control(action, reply) => {
                let result = self.session.control(action).map(|msgs| {
                    self.publish(msgs);
                    ControlAck {
                        v: MESSAGE_VERSION,
                        step: self.session.step(),
                        mode: self.session.mode(),
                    }
                });
                let _ = reply.send(result.map_err(|e| e.to_string()));
            }
            Command::Intervene(req, reply) => {
                let duplicate = req.idempotency_key.as_ref().is_some_and(|k| self.keys.contains(k));
                let result = if duplicate {
                    Ok(false)
                } else {
                    self.session.intervene(req.kind).map(|()| {
                        if let Some(k) = req.idempotency_key {
                            self.keys.insert(k);
                        }
                        true
                    })
                };
                let _ = reply.send(
                    result
                        .map(|queued| InterveneAck {
                            v: MESSAGE_VERSION,
                            queued,
                            effective_step: self.session.step(),
                        })
                        .map_err(|e| e.to_string()),
                );
            }
            Command::Snapshot(reply) => {
                let _ = reply.send(self.session.snapshot());
            }
            Command::Record(reply) => {
                let _ = reply.send(self.session.record());
            }
            Command::Subscribe(reply) => {
                let hello = self
                    .session
                    .hello()
                    .iter()
                    .map(|m| Arc::from(serde_json::to_string(m).expect("messages serialize")))
                    .collect();
                let _ = reply.send((hello, self.tx.subscribe()));
            }
        }
    }

    fn persist_if_finished(&mut self) {
        if self.persisted || self.session.mode() != Mode::Finished {
            return;
        }
        self.persisted = true;
        if let Some(root) = &self.out {
            let dir = root.join(&self.id);
            if let Err(e) = self.session.record().save(&dir, RecordLevel::Full) {
                eprintln!("session {}: cannot persist record: {e}", self.id);
            }
        }
    }

    fn run(mut self, rx: mpsc::Receiver<Command>, tick: Option<Duration>) {
        let mut next_tick = Instant::now();
        loop {
            let cmd = if self.session.mode() == Mode::Running {
                let wait = tick.map(|_| next_tick.saturating_duration_since(Instant::now()));
                match wait {
                    Some(w) if !w.is_zero() => match rx.recv_timeout(w) {
                        Ok(c) => Some(c),
                        Err(RecvTimeoutError::Timeout) => None,
                        Err(RecvTimeoutError::Disconnected) => return,
                    },
                    _ => match rx.try_recv() {
                        Ok(c) => Some(c),
                        Err(TryRecvError::Empty) => None,
                        Err(TryRecvError::Disconnected) => return,
                    },
                }
            } else {
                match rx.recv() {
                    Ok(c) => Some(c),
                    Err(_) => return,
                }
            };
            match cmd {
                Some(c) => {
                    let was_running = self.session.mode() == Mode::Running;
                    self.handle(c);
                    if !was_running && self.session.mode() == Mode::Running {
                        next_tick = Instant::now();
                    }
                }
                None => {
                    match self.session.tick() {
                        Ok(msgs) => self.publish(msgs),
                        Err(e) => {
                            eprintln!("session {}: step failed: {e}", self.id);
                            if let Ok(msgs) = self.session.control(Control::Pause) {
                                self.publish(msgs);
                            }
                        }
                    }
                    if let Some(d) = tick {
                        next_tick += d;
                    }
                }
            }
            self.persist_if_finished();
        }
    }
}

struct Handle {
    commands: mpsc::Sender<Command>,
}

struct Inner {
    sessions: Mutex<HashMap<String, Handle>>,
    next_id: AtomicU64,
    out: Option<PathBuf>,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

#[derive(Debug)]
pub enum ServiceError {
    NotFound(String),
    Invalid(String),
    Conflict(String),
    Gone,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (status, msg) = match self {
            ServiceError::NotFound(id) => (StatusCode::NOT_FOUND, format!("unknown session `{id}`")),
            ServiceError::Invalid(m) => (StatusCode::BAD_REQUEST, m),
            ServiceError::Conflict(m) => (StatusCode::CONFLICT, m),
            ServiceError::Gone => (StatusCode::INTERNAL_SERVER_ERROR, "session worker stopped".into()),
        };
        (status, Json(json!({ "v": MESSAGE_VERSION, "error": msg }))).into_response()
    }
}

impl AppState {
    pub fn new(out: Option<PathBuf>) -> Self {
        AppState {
            inner: Arc::new(Inner {
                sessions: Mutex::new(HashMap::new()),
                next_id: AtomicU64::new(1),
                out,
            }),
        }
    }

    pub fn create(&self, req: CreateRequest) -> Result<String, ServiceError> {
        let mut config = req.config;
        if let Some(seed) = req.seed {
            config.seed = seed;
        }
        let tick = match req.tick_rate {
            None => None,
            Some(r) if r > 0.0 && r.is_finite() => Some(Duration::from_secs_f64(1.0 / r)),
            Some(r) => return Err(ServiceError::Invalid(format!("invalid value for `tick_rate`: {r}"))),
        };
        let session = Session::new(config).map_err(|e| ServiceError::Invalid(e.to_string()))?;
        let id = format!("s{}", self.inner.next_id.fetch_add(1, Ordering::Relaxed));
        let (commands, rx) = mpsc::channel();
        let (tx, _) = broadcast::channel(BROADCAST_CAPACITY);
        let worker = Worker {
            session,
            id: id.clone(),
            tx,
            keys: HashSet::new(),
            out: self.inner.out.clone(),
            persisted: false,
        };
        std::thread::Builder::new()
            .name(format!("session-{id}"))
            .spawn(move || worker.run(rx, tick))
            .map_err(|e| ServiceError::Invalid(format!("cannot start session: {e}")))?;
        self.inner.sessions.lock().unwrap().insert(id.clone(), Handle { commands });
        Ok(id)
    }

    fn send(&self, id: &str, cmd: Command) -> Result<(), ServiceError> {
        let sessions = self.inner.sessions.lock().unwrap();
        let handle = sessions.get(id).ok_or_else(|| ServiceError::NotFound(id.to_string()))?;
        handle.commands.send(cmd).map_err(|_| ServiceError::Gone)
    }

    pub async fn control(&self, id: &str, action: Control) -> Result<ControlAck, ServiceError> {
        let (reply, rx) = oneshot::channel();
        self.send(id, Command::Control(action, reply))?;
        rx.await.map_err(|_| ServiceError::Gone)?.map_err(ServiceError::Conflict)
    }

    pub async fn intervene(&self, id: &str, req: InterveneRequest) -> Result<InterveneAck, ServiceError> {
        req.kind.validate().map_err(|e| ServiceError::Invalid(e.to_string()))?;
        let (reply, rx) = oneshot::channel();
        self.send(id, Command::Intervene(req, reply))?;
        rx.await.map_err(|_| ServiceError::Gone)?.map_err(ServiceError::Conflict)
    }

    pub async fn snapshot(&self, id: &str) -> Result<SnapshotView, ServiceError> {
        let (reply, rx) = oneshot::channel();
        self.send(id, Command::Snapshot(reply))?;
        rx.await.map_err(|_| ServiceError::Gone)
    }

    /// The session's record so far.
    pub async fn record(&self, id: &str) -> Result<RunRecord, ServiceError> {
        let (reply, rx) = oneshot::channel();
        self.send(id, Command::Record(reply))?;
        rx.await.map_err(|_| ServiceError::Gone)
    }

    /// Current state messages followed by a live feed.
    pub async fn subscribe(&self, id: &str) -> Result<Subscription, ServiceError> {
        let (reply, rx) = oneshot::channel();
        self.send(id, Command::Subscribe(reply))?;
        rx.await.map_err(|_| ServiceError::Gone)
    }
}

fn parse<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::Invalid(e.to_string()))
}

async fn create(State(state): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ServiceError> {
    let id = state.create(parse(&body)?)?;
    let snap = state.snapshot(&id).await?;
    Ok((
        StatusCode::CREATED,
        Json(json!({ "v": MESSAGE_VERSION, "id": id, "mode": snap.mode, "step": snap.step })),
    ))
}

async fn control(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ControlAck>, ServiceError> {
    Ok(Json(state.control(&id, parse(&body)?).await?))
}

async fn intervene(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<impl IntoResponse, ServiceError> {
    let ack = state.intervene(&id, parse(&body)?).await?;
    let status = if ack.queued { StatusCode::ACCEPTED } else { StatusCode::OK };
    Ok((status, Json(ack)))
}

async fn snapshot(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SnapshotView>, ServiceError> {
    Ok(Json(state.snapshot(&id).await?))
}

async fn stream(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ServiceError> {
    let (hello, rx) = state.subscribe(&id).await?;
    Ok(ws.on_upgrade(move |socket| forward(socket, hello, rx)))
}

async fn forward(mut socket: WebSocket, hello: Vec<Arc<str>>, mut rx: broadcast::Receiver<Arc<str>>) {
    for m in hello {
        if socket.send(WsMessage::Text(m.as_ref().into())).await.is_err() {
            return;
        }
    }
    loop {
        tokio::select! {
            msg = rx.recv() => match msg {
                Ok(m) => {
                    if socket.send(WsMessage::Text(m.as_ref().into())).await.is_err() {
                        return;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(skipped)) => {
                    eprintln!("stream subscriber fell behind by {skipped} messages");
                }
                Err(broadcast::error::RecvError::Closed) => return,
            },
            incoming = socket.recv() => match incoming {
                None | Some(Err(_)) | Some(Ok(WsMessage::Close(_))) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/session", post(create))
        .route("/session/{id}/control", post(control))
        .route("/session/{id}/intervene", post(intervene))
        .route("/session/{id}/snapshot", get(snapshot))
        .route("/session/{id}/stream", get(stream))
        .with_state(state)
}

pub fn serve(host: &str, port: u16, out: Option<PathBuf>) -> CliResult<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| CliError::Runtime(format!("cannot bind {host}:{port}: {e}")))?;
        let addr = listener.local_addr()?;
        println!("listening on http://{addr}");
        axum::serve(listener, router(AppState::new(out)))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::Runtime(e.to_string()))
    })
}
