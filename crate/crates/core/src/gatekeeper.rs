//! Access-point authorization daemon core.
//!
//! A per-client state machine (`Preauthenticated` -> `Challenged` ->
//! `Authenticated`) driven by portal requests, an authorized-user list with
//! per-(user, token) data counters, and a periodic sweep that re-checks
//! lapsed entries against the ledger before disconnecting them.
//!
//! All mutation goes through one mutex. Ledger reads are issued with the
//! lock released, so slow chain queries never block other clients.
//! Time is always passed in explicitly as simulated seconds.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use parking_lot::Mutex;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contract::{FailReason, VerifyResult};
use crate::crypto::{recover_signer, SessionId, Signature};
use crate::ledger::SharedLedger;
use crate::types::{dec, dec_opt, Address, Mac, TokenId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("ledger unavailable: {0}")]
pub struct ChainError(pub String);

/// The two ledger facts the access point needs.
pub trait ChainReader: Send + Sync {
    fn now_sec(&self) -> Result<u64, ChainError>;

    fn verify_sfwt(
        &self,
        holder: &Address,
        token_id: &TokenId,
        ap_id: &str,
        used_data_bytes: u128,
        now_sec: u64,
    ) -> Result<VerifyResult, ChainError>;
}

impl ChainReader for SharedLedger {
    fn now_sec(&self) -> Result<u64, ChainError> {
        Ok(self.now())
    }

    fn verify_sfwt(
        &self,
        holder: &Address,
        token_id: &TokenId,
        ap_id: &str,
        used_data_bytes: u128,
        now_sec: u64,
    ) -> Result<VerifyResult, ChainError> {
        Ok(self
            .read()
            .verify_sfwt(holder, token_id, ap_id, used_data_bytes, now_sec))
    }
}

impl<T: ChainReader + ?Sized> ChainReader for Arc<T> {
    fn now_sec(&self) -> Result<u64, ChainError> {
        (**self).now_sec()
    }

    fn verify_sfwt(
        &self,
        holder: &Address,
        token_id: &TokenId,
        ap_id: &str,
        used_data_bytes: u128,
        now_sec: u64,
    ) -> Result<VerifyResult, ChainError> {
        (**self).verify_sfwt(holder, token_id, ap_id, used_data_bytes, now_sec)
    }
}

impl<T: ChainReader + ?Sized> ChainReader for Box<T> {
    fn now_sec(&self) -> Result<u64, ChainError> {
        (**self).now_sec()
    }

    fn verify_sfwt(
        &self,
        holder: &Address,
        token_id: &TokenId,
        ap_id: &str,
        used_data_bytes: u128,
        now_sec: u64,
    ) -> Result<VerifyResult, ChainError> {
        (**self).verify_sfwt(holder, token_id, ap_id, used_data_bytes, now_sec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ApConfig {
    pub ap_id: String,
    pub wallet_url: String,
    pub sweep_interval_sec: u64,
    pub session_ttl_sec: u64,
    pub max_pending_sessions: usize,
    /// Deterministic session ids for tests; `None` draws from the OS.
    pub rng_seed: Option<u64>,
}

impl Default for ApConfig {
    fn default() -> Self {
        ApConfig {
            ap_id: "AP1".to_owned(),
            wallet_url: "/wallet".to_owned(),
            sweep_interval_sec: 30,
            session_ttl_sec: 120,
            max_pending_sessions: 1024,
            rng_seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SessionState {
    Preauthenticated,
    Challenged,
    Authenticated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClientSession {
    pub mac: Mac,
    pub state: SessionState,
    /// Live challenge; cleared the moment a verify attempt consumes it.
    pub session_id: Option<SessionId>,
    pub issued_at_sec: u64,
    pub last_seen_sec: u64,
    /// Wallet address declared with the ARI, if any.
    pub claimed_addr: Option<Address>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AuthorizedEntry {
    pub mac: Mac,
    pub user_addr: Address,
    pub token_id: TokenId,
    #[serde(with = "dec")]
    pub expires_at_sec: u64,
    #[serde(with = "dec")]
    pub used_data_bytes: u128,
    /// Usage level at which the entry is re-checked by the sweep.
    #[serde(with = "dec")]
    pub data_limit_bytes: u128,
    #[serde(with = "dec")]
    pub admitted_at_sec: u64,
    #[serde(skip)]
    sweep_failures: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PortalInfo {
    pub ap_id: String,
    pub wallet_url: String,
    pub authorized: bool,
    #[serde(default, with = "dec_opt", skip_serializing_if = "Option::is_none")]
    pub remaining_time_sec: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatekeeperError {
    #[error("too many pending sessions")]
    Throttled,
    #[error("unknown client {0}: connect to the portal first")]
    UnknownClient(Mac),
    #[error("client {0} is already authenticated")]
    AlreadyAuthenticated(Mac),
    #[error("client {0} has no authorized entry")]
    NotAuthorized(Mac),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ApEventKind {
    Transition {
        from: Option<SessionState>,
        to: SessionState,
    },
    Admitted {
        user: Address,
        token_id: TokenId,
        result: VerifyResult,
    },
    Rejected {
        user: Option<Address>,
        token_id: TokenId,
        reason: FailReason,
    },
    Refreshed {
        user: Address,
        token_id: TokenId,
        #[serde(with = "dec")]
        expires_at_sec: u64,
    },
    Revoked {
        user: Address,
        token_id: TokenId,
        reason: Option<FailReason>,
    },
    SweepLedgerError {
        user: Address,
        consecutive: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ApEvent {
    #[serde(with = "dec")]
    pub at_sec: u64,
    pub mac: Mac,
    #[serde(flatten)]
    pub kind: ApEventKind,
}

#[derive(Debug)]
struct ApState {
    sessions: HashMap<Mac, ClientSession>,
    authorized: BTreeMap<Mac, AuthorizedEntry>,
    usage: HashMap<(Address, TokenId), u128>,
    rng: ChaCha20Rng,
    next_sweep_at: u64,
    log: Vec<ApEvent>,
}

impl ApState {
    fn set_state(&mut self, mac: Mac, to: SessionState, now: u64) {
        let session = self.sessions.entry(mac).or_insert_with(|| ClientSession {
            mac,
            state: to,
            session_id: None,
            issued_at_sec: now,
            last_seen_sec: now,
            claimed_addr: None,
        });
        let from = session.state;
        session.state = to;
        if from != to {
            self.log.push(ApEvent {
                at_sec: now,
                mac,
                kind: ApEventKind::Transition {
                    from: Some(from),
                    to,
                },
            });
        }
    }

    fn record(&mut self, now: u64, mac: Mac, kind: ApEventKind) {
        self.log.push(ApEvent {
            at_sec: now,
            mac,
            kind,
        });
    }

    fn remove_entry(&mut self, mac: Mac, now: u64, reason: Option<FailReason>) -> bool {
        let Some(entry) = self.authorized.remove(&mac) else {
            return false;
        };
        self.record(
            now,
            mac,
            ApEventKind::Revoked {
                user: entry.user_addr,
                token_id: entry.token_id,
                reason,
            },
        );
        if let Some(session) = self.sessions.get_mut(&mac) {
            session.last_seen_sec = now;
            self.set_state(mac, SessionState::Preauthenticated, now);
        }
        true
    }
}

#[derive(Debug)]
pub struct Gatekeeper<R> {
    config: ApConfig,
    chain: R,
    inner: Mutex<ApState>,
}

impl<R: ChainReader> Gatekeeper<R> {
    pub fn new(config: ApConfig, chain: R) -> Self {
        let rng = match config.rng_seed {
            Some(seed) => ChaCha20Rng::seed_from_u64(seed),
            None => ChaCha20Rng::from_os_rng(),
        };
        Gatekeeper {
            config,
            chain,
            inner: Mutex::new(ApState {
                sessions: HashMap::new(),
                authorized: BTreeMap::new(),
                usage: HashMap::new(),
                rng,
                next_sweep_at: 0,
                log: Vec::new(),
            }),
        }
    }

    pub fn config(&self) -> &ApConfig {
        &self.config
    }

    pub fn chain(&self) -> &R {
        &self.chain
    }

    /// Portal landing: register the client as pre-authenticated, or report
    /// its live authorization.
    pub fn handle_connect(&self, mac: Mac, now: u64) -> Result<PortalInfo, GatekeeperError> {
        let mut st = self.inner.lock();
        let mut info = PortalInfo {
            ap_id: self.config.ap_id.clone(),
            wallet_url: self.config.wallet_url.clone(),
            authorized: false,
            remaining_time_sec: None,
        };
        if let Some(entry) = st.authorized.get(&mac) {
            if entry.expires_at_sec > now {
                info.authorized = true;
                info.remaining_time_sec = Some(entry.expires_at_sec - now);
            }
        }
        match st.sessions.get_mut(&mac) {
            Some(session) => session.last_seen_sec = now,
            None => {
                let pending = st
                    .sessions
                    .values()
                    .filter(|s| s.state != SessionState::Authenticated)
                    .count();
                if pending >= self.config.max_pending_sessions {
                    return Err(GatekeeperError::Throttled);
                }
                st.sessions.insert(
                    mac,
                    ClientSession {
                        mac,
                        state: SessionState::Preauthenticated,
                        session_id: None,
                        issued_at_sec: now,
                        last_seen_sec: now,
                        claimed_addr: None,
                    },
                );
                st.record(
                    now,
                    mac,
                    ApEventKind::Transition {
                        from: None,
                        to: SessionState::Preauthenticated,
                    },
                );
            }
        }
        Ok(info)
    }

    /// Authentication request: issue a fresh single-use challenge,
    /// invalidating any earlier one for this client.
    pub fn handle_ari(&self, mac: Mac, now: u64) -> Result<SessionId, GatekeeperError> {
        self.handle_ari_from(mac, None, now)
    }

    /// ARI carrying the wallet's address. A signature that recovers to any
    /// other address is then rejected as `SIG_INVALID`.
    pub fn handle_ari_from(
        &self,
        mac: Mac,
        claimed: Option<Address>,
        now: u64,
    ) -> Result<SessionId, GatekeeperError> {
        let mut st = self.inner.lock();
        let state = st
            .sessions
            .get(&mac)
            .map(|s| s.state)
            .ok_or(GatekeeperError::UnknownClient(mac))?;
        if state == SessionState::Authenticated {
            return Err(GatekeeperError::AlreadyAuthenticated(mac));
        }
        let sid = loop {
            let candidate = SessionId::random(&mut st.rng);
            if !st.sessions.values().any(|s| s.session_id == Some(candidate)) {
                break candidate;
            }
        };
        let session = st.sessions.get_mut(&mac).expect("checked above");
        session.session_id = Some(sid);
        session.claimed_addr = claimed;
        session.issued_at_sec = now;
        session.last_seen_sec = now;
        st.set_state(mac, SessionState::Challenged, now);
        Ok(sid)
    }

    /// Verify a signed challenge and the presented token. The challenge is
    /// consumed whether or not verification succeeds.
    pub fn handle_verify(
        &self,
        mac: Mac,
        session_id: SessionId,
        signature: &Signature,
        token_id: TokenId,
        now: u64,
    ) -> VerifyResult {
        let claimed = {
            let mut st = self.inner.lock();
            let Some(session) = st.sessions.get_mut(&mac) else {
                return VerifyResult::fail(FailReason::SessionInvalid);
            };
            if session.state != SessionState::Challenged || session.session_id != Some(session_id) {
                return VerifyResult::fail(FailReason::SessionInvalid);
            }
            session.session_id = None;
            session.last_seen_sec = now;
            if now >= session.issued_at_sec.saturating_add(self.config.session_ttl_sec) {
                st.set_state(mac, SessionState::Preauthenticated, now);
                st.record(
                    now,
                    mac,
                    ApEventKind::Rejected {
                        user: None,
                        token_id,
                        reason: FailReason::SessionInvalid,
                    },
                );
                return VerifyResult::fail(FailReason::SessionInvalid);
            }
            session.claimed_addr.take()
        };

        let user = match recover_signer(&session_id, signature) {
            Ok(addr) if claimed.is_none_or(|c| c == addr) => addr,
            _ => return self.reject(mac, claimed, token_id, FailReason::SigInvalid, now),
        };
        let used = self
            .inner
            .lock()
            .usage
            .get(&(user, token_id))
            .copied()
            .unwrap_or(0);
        let result = match self
            .chain
            .verify_sfwt(&user, &token_id, &self.config.ap_id, used, now)
        {
            Ok(r) => r,
            Err(_) => {
                return self.reject(mac, Some(user), token_id, FailReason::LedgerUnavailable, now)
            }
        };
        if !result.ok {
            let reason = result.fail_reason.unwrap_or(FailReason::NoBalance);
            self.reject(mac, Some(user), token_id, reason, now);
            return result;
        }

        let mut st = self.inner.lock();
        st.authorized.insert(
            mac,
            AuthorizedEntry {
                mac,
                user_addr: user,
                token_id,
                expires_at_sec: now + result.remaining_time_sec,
                used_data_bytes: used,
                data_limit_bytes: used.saturating_add(result.remaining_data_bytes),
                admitted_at_sec: now,
                sweep_failures: 0,
            },
        );
        st.set_state(mac, SessionState::Authenticated, now);
        st.record(
            now,
            mac,
            ApEventKind::Admitted {
                user,
                token_id,
                result,
            },
        );
        result
    }

    fn reject(
        &self,
        mac: Mac,
        user: Option<Address>,
        token_id: TokenId,
        reason: FailReason,
        now: u64,
    ) -> VerifyResult {
        let mut st = self.inner.lock();
        st.set_state(mac, SessionState::Preauthenticated, now);
        st.record(
            now,
            mac,
            ApEventKind::Rejected {
                user,
                token_id,
                reason,
            },
        );
        VerifyResult::fail(reason)
    }

    /// Add `delta_bytes` to the admitted user's counter for its token. The
    /// counter outlives the entry and is never reset.
    pub fn record_usage(&self, mac: Mac, delta_bytes: u128) -> Result<u128, GatekeeperError> {
        let mut st = self.inner.lock();
        let (user, token) = st
            .authorized
            .get(&mac)
            .map(|e| (e.user_addr, e.token_id))
            .ok_or(GatekeeperError::NotAuthorized(mac))?;
        let counter = st.usage.entry((user, token)).or_insert(0);
        *counter = counter.saturating_add(delta_bytes);
        let total = *counter;
        if let Some(entry) = st.authorized.get_mut(&mac) {
            entry.used_data_bytes = total;
        }
        Ok(total)
    }

    /// Re-check every lapsed entry (time expired or data limit reached)
    /// against the ledger; renewals are refreshed, the rest disconnected.
    /// If the ledger cannot be reached the entry gets one sweep of grace and
    /// is removed on the second consecutive failure.
    pub fn sweep(&self, now: u64) -> Vec<Mac> {
        let candidates: Vec<(Mac, Address, TokenId, u128)> = {
            let st = self.inner.lock();
            st.authorized
                .values()
                .filter(|e| e.expires_at_sec <= now || e.used_data_bytes >= e.data_limit_bytes)
                .map(|e| (e.mac, e.user_addr, e.token_id, e.used_data_bytes))
                .collect()
        };
        let checks: Vec<_> = candidates
            .into_iter()
            .map(|(mac, user, token, used)| {
                let res = self
                    .chain
                    .verify_sfwt(&user, &token, &self.config.ap_id, used, now);
                (mac, user, token, res)
            })
            .collect();

        let mut removed = Vec::new();
        let mut st = self.inner.lock();
        for (mac, user, token, res) in checks {
            let still_same = st
                .authorized
                .get(&mac)
                .is_some_and(|e| e.user_addr == user && e.token_id == token);
            if !still_same {
                continue;
            }
            match res {
                Ok(v) if v.ok => {
                    let entry = st.authorized.get_mut(&mac).expect("checked");
                    entry.expires_at_sec = now + v.remaining_time_sec;
                    entry.data_limit_bytes = entry.used_data_bytes.saturating_add(v.remaining_data_bytes);
                    entry.sweep_failures = 0;
                    let expires_at_sec = entry.expires_at_sec;
                    st.record(
                        now,
                        mac,
                        ApEventKind::Refreshed {
                            user,
                            token_id: token,
                            expires_at_sec,
                        },
                    );
                }
                Ok(v) => {
                    st.remove_entry(mac, now, v.fail_reason);
                    removed.push(mac);
                }
                Err(_) => {
                    let entry = st.authorized.get_mut(&mac).expect("checked");
                    entry.sweep_failures += 1;
                    let consecutive = entry.sweep_failures;
                    if consecutive >= 2 {
                        st.remove_entry(mac, now, Some(FailReason::LedgerUnavailable));
                        removed.push(mac);
                    } else {
                        entry.expires_at_sec = now + self.config.sweep_interval_sec;
                        st.record(now, mac, ApEventKind::SweepLedgerError { user, consecutive });
                    }
                }
            }
        }

        let ttl = self.config.session_ttl_sec;
        st.sessions.retain(|_, s| {
            s.state == SessionState::Authenticated
                || now < s.last_seen_sec.saturating_add(ttl)
                || now < s.issued_at_sec.saturating_add(ttl)
        });
        removed
    }

    /// Run the sweep if a sweep boundary has been reached since the last
    /// run. Sweeps happen at multiples of the sweep interval.
    pub fn tick(&self, now: u64) -> Option<Vec<Mac>> {
        {
            let mut st = self.inner.lock();
            if now < st.next_sweep_at {
                return None;
            }
            let interval = self.config.sweep_interval_sec.max(1);
            st.next_sweep_at = (now / interval + 1) * interval;
        }
        Some(self.sweep(now))
    }

    pub fn is_authorized(&self, mac: Mac, now: u64) -> bool {
        self.inner
            .lock()
            .authorized
            .get(&mac)
            .is_some_and(|e| e.expires_at_sec > now)
    }

    pub fn authorized_entries(&self) -> Vec<AuthorizedEntry> {
        self.inner.lock().authorized.values().cloned().collect()
    }

    pub fn session(&self, mac: Mac) -> Option<ClientSession> {
        self.inner.lock().sessions.get(&mac).cloned()
    }

    pub fn usage_of(&self, user: &Address, token_id: &TokenId) -> u128 {
        self.inner
            .lock()
            .usage
            .get(&(*user, *token_id))
            .copied()
            .unwrap_or(0)
    }

    pub fn events(&self) -> Vec<ApEvent> {
        self.inner.lock().log.clone()
    }
}
