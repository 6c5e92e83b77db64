//! HTTP facade over a shared ledger.
//!
//! | route                       | body            | reply              |
//! |-----------------------------|-----------------|--------------------|
//! | `POST /chain/tx`            | `TxRequest`     | `TxResponse`       |
//! | `GET /chain/receipt/{txId}` |                 | `ReceiptResponse`  |
//! | `POST /chain/call`          | `Query`         | `QueryResult`      |
//! | `GET /chain/clock`          |                 | `ClockResponse`    |
//! | `POST /chain/advance`       | `AdvanceRequest`| `ClockResponse`    |
//! | `GET /chain/audit`          |                 | `[ReadAudit]`      |
//!
//! `/chain/advance` answers 403 unless enabled in the server config.

use std::time::Duration;

use axum::extract::{Path, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use sfwt_core::ledger::{LedgerError, QueryResult, ReadAudit, SharedLedger, TxId, TxState};

use crate::wire::{AdvanceRequest, ClockResponse, ReceiptResponse, TxRequest, TxResponse};
use crate::{ApiError, ApiJson};

#[derive(Debug, Clone, Default)]
pub struct LedgerServerConfig {
    /// Accept `POST /chain/advance`.
    pub allow_advance: bool,
    /// Simulated seconds per wall-clock second; `None` keeps the clock
    /// still unless advanced explicitly.
    pub time_scale: Option<f64>,
}

#[derive(Clone)]
struct AppState {
    ledger: SharedLedger,
    allow_advance: bool,
}

fn ledger_error(e: LedgerError) -> ApiError {
    let code = match e {
        LedgerError::UnknownSender(_) => "UNKNOWN_SENDER",
        LedgerError::MalformedCall(_) => "MALFORMED",
        _ => "LEDGER_ERROR",
    };
    ApiError::bad_request(code, e.to_string())
}

fn clock(ledger: &SharedLedger) -> ClockResponse {
    let l = ledger.read();
    ClockResponse {
        now_sec: l.now(),
        height: l.height(),
        block_interval_sec: l.config().block_interval_sec,
    }
}

async fn submit_tx(
    State(st): State<AppState>,
    ApiJson(req): ApiJson<TxRequest>,
) -> Result<Json<TxResponse>, ApiError> {
    let tx_id = st.ledger.submit(req.sender, req.payload).map_err(ledger_error)?;
    Ok(Json(TxResponse { tx_id }))
}

async fn get_receipt(
    State(st): State<AppState>,
    Path(raw): Path<String>,
) -> Result<Json<ReceiptResponse>, ApiError> {
    let id: TxId = raw.parse().map_err(ledger_error)?;
    match st.ledger.read().tx_state(&id) {
        Some(TxState::Pending) => Ok(Json(ReceiptResponse::Pending)),
        Some(TxState::Included(receipt)) => Ok(Json(ReceiptResponse::Included { receipt })),
        None => Err(ApiError::not_found("UNKNOWN_TX", format!("no transaction {id}"))),
    }
}

async fn call(
    State(st): State<AppState>,
    ApiJson(query): ApiJson<serde_json::Value>,
) -> Result<Json<QueryResult>, ApiError> {
    st.ledger
        .read()
        .call_read_json(query)
        .map(Json)
        .map_err(ledger_error)
}

async fn get_clock(State(st): State<AppState>) -> Json<ClockResponse> {
    Json(clock(&st.ledger))
}

async fn advance(
    State(st): State<AppState>,
    ApiJson(req): ApiJson<AdvanceRequest>,
) -> Result<Json<ClockResponse>, ApiError> {
    if !st.allow_advance {
        return Err(ApiError::forbidden("ADVANCE_DISABLED", "clock advance is disabled"));
    }
    st.ledger.advance_clock(req.delta_sec);
    Ok(Json(clock(&st.ledger)))
}

async fn audit(State(st): State<AppState>) -> Json<Vec<ReadAudit>> {
    Json(st.ledger.read().read_audit())
}

pub fn ledger_router(ledger: SharedLedger, cfg: &LedgerServerConfig) -> Router {
    Router::new()
        .route("/chain/tx", post(submit_tx))
        .route("/chain/receipt/{tx_id}", get(get_receipt))
        .route("/chain/call", post(call))
        .route("/chain/clock", get(get_clock))
        .route("/chain/advance", post(advance))
        .route("/chain/audit", get(audit))
        .with_state(AppState {
            ledger,
            allow_advance: cfg.allow_advance,
        })
}

/// Drive the simulated clock from wall time at `scale` simulated seconds
/// per second. Fractions carry over, so manual advances compose.
pub async fn run_realtime_clock(ledger: SharedLedger, scale: f64) {
    let period = Duration::from_millis(50);
    let mut ticker = tokio::time::interval(period);
    let mut last = tokio::time::Instant::now();
    let mut carry = 0.0f64;
    loop {
        ticker.tick().await;
        let now = tokio::time::Instant::now();
        carry += now.duration_since(last).as_secs_f64() * scale;
        last = now;
        let whole = carry.floor();
        if whole >= 1.0 {
            carry -= whole;
            ledger.advance_clock(whole as u64);
        }
    }
}

/// Serve until `shutdown` resolves.
pub async fn serve_ledger(
    listener: tokio::net::TcpListener,
    ledger: SharedLedger,
    cfg: LedgerServerConfig,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let clock_task = cfg
        .time_scale
        .filter(|s| *s > 0.0)
        .map(|s| tokio::spawn(run_realtime_clock(ledger.clone(), s)));
    let res = axum::serve(listener, ledger_router(ledger, &cfg))
        .with_graceful_shutdown(shutdown)
        .await;
    if let Some(t) = clock_task {
        t.abort();
    }
    res
}
