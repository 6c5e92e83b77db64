//! Blocking clients for the ledger facade and the AP API.

use std::time::{Duration, Instant};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sfwt_core::contract::{SfwtMetadata, VerifyResult};
use sfwt_core::gatekeeper::{ApEvent, AuthorizedEntry, ChainError, ChainReader, PortalInfo};
use sfwt_core::ledger::{Call, GasReceipt, Query, QueryResult, ReadAudit, TxId};
use sfwt_core::types::{Address, Mac, TokenId};
use sfwt_core::{SessionId, Signature};
use thiserror::Error;

use crate::wire::{
    AdvanceRequest, AriRequest, AriResponse, ClockResponse, ErrorBody, ReceiptResponse, TxRequest,
    TxResponse, UsageRequest, UsageResponse, VerifyRequest,
};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("cannot reach {url}: {msg}")]
    Transport { url: String, msg: String },
    #[error("{status} {code}: {message}")]
    Api {
        status: u16,
        code: String,
        message: String,
    },
    #[error("unexpected response: {0}")]
    Decode(String),
    #[error("timed out waiting for {0}")]
    Timeout(String),
}

#[derive(Debug, Clone)]
struct Http {
    base: String,
    agent: ureq::Agent,
}

impl Http {
    fn new(base: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Http {
            base: base.trim_end_matches('/').to_owned(),
            agent,
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    fn finish<T: DeserializeOwned>(
        url: &str,
        res: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<T, ClientError> {
        let mut resp = res.map_err(|e| ClientError::Transport {
            url: url.to_owned(),
            msg: e.to_string(),
        })?;
        let status = resp.status();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| ClientError::Decode(e.to_string()))?;
        if !status.is_success() {
            let body: ErrorBody = serde_json::from_str(&text).unwrap_or(ErrorBody {
                error: "HTTP".into(),
                message: text,
            });
            return Err(ClientError::Api {
                status: status.as_u16(),
                code: body.error,
                message: body.message,
            });
        }
        serde_json::from_str(&text).map_err(|e| ClientError::Decode(format!("{e}: {text}")))
    }

    fn get<T: DeserializeOwned>(&self, path: &str, bearer: Option<&str>) -> Result<T, ClientError> {
        let url = self.url(path);
        let mut req = self.agent.get(&url);
        if let Some(tok) = bearer {
            req = req.header("Authorization", format!("Bearer {tok}"));
        }
        Self::finish(&url, req.call())
    }

    fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, ClientError> {
        let url = self.url(path);
        Self::finish(&url, self.agent.post(&url).send_json(body))
    }
}

/// Client of the ledger HTTP facade.
#[derive(Debug, Clone)]
pub struct LedgerClient {
    http: Http,
}

impl LedgerClient {
    pub fn new(base_url: &str) -> Self {
        Self::with_timeout(base_url, Duration::from_secs(10))
    }

    pub fn with_timeout(base_url: &str, timeout: Duration) -> Self {
        LedgerClient {
            http: Http::new(base_url, timeout),
        }
    }

    pub fn submit(&self, sender: Address, payload: Call) -> Result<TxId, ClientError> {
        let r: TxResponse = self.http.post("/chain/tx", &TxRequest { sender, payload })?;
        Ok(r.tx_id)
    }

    pub fn receipt(&self, id: TxId) -> Result<ReceiptResponse, ClientError> {
        self.http.get(&format!("/chain/receipt/{id}"), None)
    }

    /// Poll until the transaction is in a block.
    pub fn wait_receipt(&self, id: TxId, timeout: Duration) -> Result<GasReceipt, ClientError> {
        let deadline = Instant::now() + timeout;
        loop {
            if let ReceiptResponse::Included { receipt } = self.receipt(id)? {
                return Ok(receipt);
            }
            if Instant::now() >= deadline {
                return Err(ClientError::Timeout(format!("inclusion of {id}")));
            }
            std::thread::sleep(Duration::from_millis(50));
        }
    }

    pub fn call(&self, query: &Query) -> Result<QueryResult, ClientError> {
        self.http.post("/chain/call", query)
    }

    pub fn clock(&self) -> Result<ClockResponse, ClientError> {
        self.http.get("/chain/clock", None)
    }

    pub fn advance(&self, delta_sec: u64) -> Result<ClockResponse, ClientError> {
        self.http.post("/chain/advance", &AdvanceRequest { delta_sec })
    }

    pub fn audit(&self) -> Result<Vec<ReadAudit>, ClientError> {
        self.http.get("/chain/audit", None)
    }

    pub fn native_balance(&self, address: Address) -> Result<u128, ClientError> {
        match self.call(&Query::NativeBalance { address })? {
            QueryResult::Balance(b) => Ok(b),
            other => Err(unexpected(other)),
        }
    }

    pub fn balance_of(&self, owner: Address, token_id: TokenId) -> Result<u128, ClientError> {
        match self.call(&Query::BalanceOf { owner, token_id })? {
            QueryResult::Balance(b) => Ok(b),
            other => Err(unexpected(other)),
        }
    }

    pub fn metadata(&self, token_id: TokenId) -> Result<Option<SfwtMetadata>, ClientError> {
        match self.call(&Query::GetMetadata { token_id })? {
            QueryResult::Metadata(m) => Ok(m),
            other => Err(unexpected(other)),
        }
    }

    pub fn expiration(&self, token_id: TokenId, holder: Address) -> Result<u64, ClientError> {
        match self.call(&Query::GetExpiration { token_id, holder })? {
            QueryResult::Expiration(e) => Ok(e),
            other => Err(unexpected(other)),
        }
    }

    pub fn list_sfwt(&self) -> Result<Vec<TokenId>, ClientError> {
        match self.call(&Query::ListSfwt)? {
            QueryResult::TokenIds(ids) => Ok(ids),
            other => Err(unexpected(other)),
        }
    }
}

fn unexpected(r: QueryResult) -> ClientError {
    ClientError::Decode(format!("unexpected query result {r:?}"))
}

impl ChainReader for LedgerClient {
    fn now_sec(&self) -> Result<u64, ChainError> {
        self.clock()
            .map(|c| c.now_sec)
            .map_err(|e| ChainError(e.to_string()))
    }

    fn verify_sfwt(
        &self,
        holder: &Address,
        token_id: &TokenId,
        ap_id: &str,
        used_data_bytes: u128,
        now_sec: u64,
    ) -> Result<VerifyResult, ChainError> {
        let q = Query::VerifySfwt {
            holder: *holder,
            token_id: *token_id,
            ap_id: ap_id.to_owned(),
            used_data_bytes,
            now_sec: Some(now_sec),
        };
        match self.call(&q) {
            Ok(QueryResult::Verify(v)) => Ok(v),
            Ok(other) => Err(ChainError(unexpected(other).to_string())),
            Err(e) => Err(ChainError(e.to_string())),
        }
    }
}

/// Client of the access-point API.
#[derive(Debug, Clone)]
pub struct ApClient {
    http: Http,
}

impl ApClient {
    pub fn new(base_url: &str) -> Self {
        Self::with_timeout(base_url, Duration::from_secs(10))
    }

    pub fn with_timeout(base_url: &str, timeout: Duration) -> Self {
        ApClient {
            http: Http::new(base_url, timeout),
        }
    }

    pub fn portal(&self, mac: Mac) -> Result<PortalInfo, ClientError> {
        self.http.get(&format!("/portal?mac={mac}"), None)
    }

    pub fn ari(&self, mac: Mac, wallet_addr: Option<Address>) -> Result<SessionId, ClientError> {
        let r: AriResponse = self.http.post("/auth/ari", &AriRequest { mac, wallet_addr })?;
        Ok(r.session_id)
    }

    pub fn verify(
        &self,
        mac: Mac,
        session_id: SessionId,
        signature: Signature,
        token_id: TokenId,
    ) -> Result<VerifyResult, ClientError> {
        self.http.post(
            "/auth/verify",
            &VerifyRequest {
                mac,
                session_id,
                signature,
                token_id,
            },
        )
    }

    pub fn usage(&self, mac: Mac, delta_bytes: u128) -> Result<u128, ClientError> {
        let r: UsageResponse = self.http.post("/usage", &UsageRequest { mac, delta_bytes })?;
        Ok(r.used_data_bytes)
    }

    pub fn authorized(&self, admin_token: &str) -> Result<Vec<AuthorizedEntry>, ClientError> {
        self.http.get("/admin/authorized", Some(admin_token))
    }

    pub fn events(&self, admin_token: &str) -> Result<Vec<ApEvent>, ClientError> {
        self.http.get("/admin/events", Some(admin_token))
    }
}
