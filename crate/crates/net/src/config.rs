//! Access-point daemon configuration.
//!
//! A config file is either a JSON object or `key=value` lines. Keys are
//! matched ignoring case, `_` and `-`, so `ap_id`, `ap-id` and `apId` are
//! the same key. `#` starts a comment line.
//!
//! ```text
//! apId = AP1
//! ledgerEndpoint = http://127.0.0.1:8545
//! listenAddr = 127.0.0.1:8080
//! sweepIntervalSec = 30
//! sessionTtlSec = 120
//! maxPendingSessions = 1024
//! adminToken = change-me
//! walletUrl = /wallet
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sfwt_core::gatekeeper::ApConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ApDaemonConfig {
    #[serde(flatten)]
    pub ap: ApConfig,
    pub ledger_endpoint: String,
    pub listen_addr: String,
    /// Bearer token for `/admin/*`; admin routes are closed when unset.
    pub admin_token: Option<String>,
    /// Wall-clock period of the sweep scheduler.
    pub tick_ms: u64,
}

impl Default for ApDaemonConfig {
    fn default() -> Self {
        ApDaemonConfig {
            ap: ApConfig::default(),
            ledger_endpoint: "http://127.0.0.1:8545".to_owned(),
            listen_addr: "127.0.0.1:8080".to_owned(),
            admin_token: None,
            tick_ms: 200,
        }
    }
}

fn norm(key: &str) -> String {
    key.chars()
        .filter(|c| *c != '_' && *c != '-')
        .flat_map(char::to_lowercase)
        .collect()
}

impl ApDaemonConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg = if text.trim_start().starts_with('{') {
            serde_json::from_str(text)?
        } else {
            let mut cfg = ApDaemonConfig::default();
            for (i, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Line {
                    line: i + 1,
                    msg: "expected key=value".into(),
                })?;
                cfg.set(&norm(k.trim()), v.trim())
                    .map_err(|msg| ConfigError::Line { line: i + 1, msg })?;
            }
            cfg
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("not a number: {v:?}"))
        }
        match key {
            "apid" => self.ap.ap_id = value.to_owned(),
            "walleturl" => self.ap.wallet_url = value.to_owned(),
            "sweepintervalsec" | "sweepinterval" => self.ap.sweep_interval_sec = num(value)?,
            "sessionttlsec" | "sessionttl" => self.ap.session_ttl_sec = num(value)?,
            "maxpendingsessions" => self.ap.max_pending_sessions = num(value)?,
            "rngseed" => self.ap.rng_seed = Some(num(value)?),
            "ledgerendpoint" => self.ledger_endpoint = value.to_owned(),
            "listenaddr" => self.listen_addr = value.to_owned(),
            "admintoken" => self.admin_token = Some(value.to_owned()),
            "tickms" => self.tick_ms = num(value)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.ap.sweep_interval_sec == 0 || self.ap.session_ttl_sec == 0 {
            return Err(ConfigError::Invalid(
                "sweepIntervalSec and sessionTtlSec must be positive".into(),
            ));
        }
        if self.ap.ap_id.is_empty() {
            return Err(ConfigError::Invalid("apId must not be empty".into()));
        }
        if self.tick_ms == 0 {
            return Err(ConfigError::Invalid("tickMs must be positive".into()));
        }
        Ok(())
    }
}
