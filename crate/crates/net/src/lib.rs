//! HTTP facades for the simulated ledger and the access-point gatekeeper,
//! and blocking clients for both.

pub mod ap_server;
pub mod client;
pub mod config;
pub mod ledger_server;
pub mod wire;

use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::FromRequest;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use sfwt_core::gatekeeper::{ApConfig, Gatekeeper};
use sfwt_core::ledger::SharedLedger;
use tokio::sync::oneshot;

pub use ap_server::{ApState, DynChain};
pub use client::{ApClient, ClientError, LedgerClient};
pub use config::ApDaemonConfig;
pub use ledger_server::LedgerServerConfig;

use wire::ErrorBody;

/// Non-2xx reply with a machine-readable code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(code: &'static str, msg: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, msg)
    }

    pub fn unauthorized(code: &'static str, msg: impl Into<String>) -> Self {
        Self::new(StatusCode::UNAUTHORIZED, code, msg)
    }

    pub fn forbidden(code: &'static str, msg: impl Into<String>) -> Self {
        Self::new(StatusCode::FORBIDDEN, code, msg)
    }

    pub fn not_found(code: &'static str, msg: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, msg)
    }

    pub fn conflict(code: &'static str, msg: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, code, msg)
    }

    pub fn too_many(code: &'static str, msg: impl Into<String>) -> Self {
        Self::new(StatusCode::TOO_MANY_REQUESTS, code, msg)
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", msg)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code.to_owned(),
            message: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(r.status(), "MALFORMED", r.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError::new(r.status(), "MALFORMED", r.body_text())
    }
}

/// JSON body extractor whose rejections use the API error body.
#[derive(FromRequest)]
#[from_request(via(axum::Json), rejection(ApiError))]
pub struct ApiJson<T>(pub T);

/// A server running on its own runtime thread. Dropping the handle shuts
/// it down.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn shutdown(mut self) -> std::io::Result<()> {
        self.stop()
    }

    fn stop(&mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().unwrap_or(Ok(())),
            None => Ok(()),
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        let _ = self.stop();
    }
}

fn spawn_server<F, Fut>(addr: &str, run: F) -> std::io::Result<ServerHandle>
where
    F: FnOnce(tokio::net::TcpListener, oneshot::Receiver<()>) -> Fut + Send + 'static,
    Fut: std::future::Future<Output = std::io::Result<()>>,
{
    let std_listener = std::net::TcpListener::bind(addr)?;
    std_listener.set_nonblocking(true)?;
    let local = std_listener.local_addr()?;
    let (tx, rx) = oneshot::channel();
    let thread = std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(std_listener)?;
            run(listener, rx).await
        })
    });
    Ok(ServerHandle {
        addr: local,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}

/// Serve `ledger` on `addr` (use port 0 for an ephemeral port).
pub fn spawn_ledger_server(
    addr: &str,
    ledger: SharedLedger,
    cfg: LedgerServerConfig,
) -> std::io::Result<ServerHandle> {
    spawn_server(addr, move |listener, rx| async move {
        ledger_server::serve_ledger(listener, ledger, cfg, async {
            let _ = rx.await;
        })
        .await
    })
}

/// Serve an access point backed by `chain` on `addr`.
pub fn spawn_ap_server(
    addr: &str,
    config: ApConfig,
    chain: DynChain,
    admin_token: Option<String>,
    tick: Duration,
) -> std::io::Result<ServerHandle> {
    let state = ApState::new(Gatekeeper::new(config, chain), admin_token);
    spawn_server(addr, move |listener, rx| async move {
        ap_server::serve_ap(listener, state, tick, async {
            let _ = rx.await;
        })
        .await
    })
}

/// Convenience for in-process setups: the AP reads the ledger directly.
pub fn local_chain(ledger: &SharedLedger) -> DynChain {
    Arc::new(ledger.clone())
}

/// Remote setups: the AP reads the ledger over HTTP.
pub fn remote_chain(ledger_url: &str) -> DynChain {
    Arc::new(LedgerClient::new(ledger_url))
}
