//! HTTP front of the access-point gatekeeper.
//!
//! | route                   | body            | reply                  |
//! |-------------------------|-----------------|------------------------|
//! | `GET /portal?mac=..`    |                 | `PortalInfo`           |
//! | `POST /auth/ari`        | `AriRequest`    | `AriResponse`          |
//! | `POST /auth/verify`     | `VerifyRequest` | `VerifyResult`         |
//! | `POST /usage`           | `UsageRequest`  | `UsageResponse`        |
//! | `GET /admin/authorized` |                 | `[AuthorizedEntry]`    |
//! | `GET /admin/events`     |                 | `[ApEvent]`            |
//!
//! Verification outcomes, including failures, are `200` with `ok: false`
//! and a `failReason`. Admin routes need `Authorization: Bearer <token>`.

use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::HeaderMap;
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::Mutex;
use serde::Deserialize;
use sfwt_core::contract::VerifyResult;
use sfwt_core::gatekeeper::{
    ApEvent, AuthorizedEntry, ChainReader, Gatekeeper, GatekeeperError, PortalInfo,
};
use sfwt_core::types::Mac;

use crate::wire::{AriRequest, AriResponse, UsageRequest, UsageResponse, VerifyRequest};
use crate::{ApiError, ApiJson};

pub type DynChain = Arc<dyn ChainReader>;

/// Ledger time as seen by the AP. When the ledger cannot be reached the
/// last reading is extrapolated at the last observed rate, so sweeps keep
/// running (and fail closed) during an outage.
#[derive(Debug)]
pub struct ChainClock {
    last: Mutex<Option<(u64, Instant, f64)>>,
}

impl Default for ChainClock {
    fn default() -> Self {
        ChainClock {
            last: Mutex::new(None),
        }
    }
}

impl ChainClock {
    pub fn now(&self, chain: &dyn ChainReader) -> u64 {
        match chain.now_sec() {
            Ok(t) => {
                self.observe(t, Instant::now());
                t
            }
            Err(_) => self.estimate(Instant::now()),
        }
    }

    fn observe(&self, t: u64, at: Instant) {
        let mut last = self.last.lock();
        *last = match *last {
            None => Some((t, at, 1.0)),
            Some((t0, at0, rate)) => {
                let wall = at.duration_since(at0).as_secs_f64();
                // re-anchor only once enough wall time has passed to
                // measure a rate
                if wall >= 0.5 && t >= t0 {
                    Some((t, at, (t - t0) as f64 / wall))
                } else {
                    Some((t0, at0, rate))
                }
            }
        };
    }

    fn estimate(&self, at: Instant) -> u64 {
        match *self.last.lock() {
            Some((t, at0, rate)) => t + (at.duration_since(at0).as_secs_f64() * rate) as u64,
            None => 0,
        }
    }
}

#[derive(Clone)]
pub struct ApState {
    pub gatekeeper: Arc<Gatekeeper<DynChain>>,
    pub clock: Arc<ChainClock>,
    pub admin_token: Option<String>,
}

impl ApState {
    pub fn new(gatekeeper: Gatekeeper<DynChain>, admin_token: Option<String>) -> Self {
        ApState {
            gatekeeper: Arc::new(gatekeeper),
            clock: Arc::new(ChainClock::default()),
            admin_token,
        }
    }

    pub fn now(&self) -> u64 {
        self.clock.now(self.gatekeeper.chain().as_ref())
    }
}

fn gk_error(e: GatekeeperError) -> ApiError {
    let msg = e.to_string();
    match e {
        GatekeeperError::Throttled => ApiError::too_many("THROTTLED", msg),
        GatekeeperError::UnknownClient(_) => ApiError::not_found("UNKNOWN_CLIENT", msg),
        GatekeeperError::AlreadyAuthenticated(_) => ApiError::conflict("ALREADY_AUTHENTICATED", msg),
        GatekeeperError::NotAuthorized(_) => ApiError::forbidden("NOT_AUTHORIZED", msg),
    }
}

/// Run gatekeeper work off the async executor; it may block on ledger I/O.
async fn blocking<T, F>(st: ApState, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(ApState) -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(st))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

#[derive(Deserialize)]
struct PortalQuery {
    mac: Mac,
}

async fn portal(
    State(st): State<ApState>,
    q: Result<Query<PortalQuery>, QueryRejection>,
) -> Result<Json<PortalInfo>, ApiError> {
    let Query(q) = q?;
    blocking(st, move |st| {
        let now = st.now();
        st.gatekeeper.handle_connect(q.mac, now).map(Json).map_err(gk_error)
    })
    .await
}

async fn ari(
    State(st): State<ApState>,
    ApiJson(req): ApiJson<AriRequest>,
) -> Result<Json<AriResponse>, ApiError> {
    blocking(st, move |st| {
        let now = st.now();
        st.gatekeeper
            .handle_ari_from(req.mac, req.wallet_addr, now)
            .map(|session_id| Json(AriResponse { session_id }))
            .map_err(gk_error)
    })
    .await
}

async fn verify(
    State(st): State<ApState>,
    ApiJson(req): ApiJson<VerifyRequest>,
) -> Result<Json<VerifyResult>, ApiError> {
    blocking(st, move |st| {
        let now = st.now();
        Ok(Json(st.gatekeeper.handle_verify(
            req.mac,
            req.session_id,
            &req.signature,
            req.token_id,
            now,
        )))
    })
    .await
}

async fn usage(
    State(st): State<ApState>,
    ApiJson(req): ApiJson<UsageRequest>,
) -> Result<Json<UsageResponse>, ApiError> {
    blocking(st, move |st| {
        st.gatekeeper
            .record_usage(req.mac, req.delta_bytes)
            .map(|used_data_bytes| Json(UsageResponse { used_data_bytes }))
            .map_err(gk_error)
    })
    .await
}

fn check_admin(st: &ApState, headers: &HeaderMap) -> Result<(), ApiError> {
    let Some(expected) = st.admin_token.as_deref() else {
        return Err(ApiError::forbidden("ADMIN_DISABLED", "no admin token configured"));
    };
    let presented = headers
        .get(axum::http::header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    if presented != Some(expected) {
        return Err(ApiError::unauthorized("BAD_TOKEN", "missing or wrong bearer token"));
    }
    Ok(())
}

async fn admin_authorized(
    State(st): State<ApState>,
    headers: HeaderMap,
) -> Result<Json<Vec<AuthorizedEntry>>, ApiError> {
    check_admin(&st, &headers)?;
    Ok(Json(st.gatekeeper.authorized_entries()))
}

async fn admin_events(
    State(st): State<ApState>,
    headers: HeaderMap,
) -> Result<Json<Vec<ApEvent>>, ApiError> {
    check_admin(&st, &headers)?;
    Ok(Json(st.gatekeeper.events()))
}

pub fn ap_router(state: ApState) -> Router {
    Router::new()
        .route("/portal", get(portal))
        .route("/auth/ari", post(ari))
        .route("/auth/verify", post(verify))
        .route("/usage", post(usage))
        .route("/admin/authorized", get(admin_authorized))
        .route("/admin/events", get(admin_events))
        .with_state(state)
}

/// Background scheduler: every `period` of wall time, read the ledger
/// clock and let the gatekeeper sweep if a sweep boundary has passed.
pub async fn run_sweeper(state: ApState, period: Duration) {
    let mut ticker = tokio::time::interval(period);
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    loop {
        ticker.tick().await;
        let st = state.clone();
        let res = tokio::task::spawn_blocking(move || {
            let now = st.now();
            st.gatekeeper.tick(now)
        })
        .await;
        if let Ok(Some(removed)) = res {
            if !removed.is_empty() {
                tracing::info!(?removed, "sweep disconnected clients");
            }
        }
    }
}

pub async fn serve_ap(
    listener: tokio::net::TcpListener,
    state: ApState,
    tick: Duration,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let sweeper = tokio::spawn(run_sweeper(state.clone(), tick));
    let res = axum::serve(listener, ap_router(state))
        .with_graceful_shutdown(shutdown)
        .await;
    sweeper.abort();
    res
}

#[cfg(test)]
mod tests {
    use super::*;
    use sfwt_core::contract::VerifyResult;
    use sfwt_core::gatekeeper::ChainError;
    use sfwt_core::types::{Address, TokenId};

    struct Fixed(Option<u64>);

    impl ChainReader for Fixed {
        fn now_sec(&self) -> Result<u64, ChainError> {
            self.0.ok_or_else(|| ChainError("down".into()))
        }

        fn verify_sfwt(
            &self,
            _: &Address,
            _: &TokenId,
            _: &str,
            _: u128,
            _: u64,
        ) -> Result<VerifyResult, ChainError> {
            Err(ChainError("down".into()))
        }
    }

    #[test]
    fn clock_extrapolates_during_outage() {
        let clock = ChainClock::default();
        assert_eq!(clock.now(&Fixed(None)), 0);
        let t0 = Instant::now();
        clock.observe(100, t0);
        clock.observe(120, t0 + Duration::from_secs(2));
        // measured rate: 10 simulated seconds per wall second
        assert_eq!(clock.estimate(t0 + Duration::from_secs(5)), 150);
        assert_eq!(clock.now(&Fixed(Some(500))), 500);
    }
}
