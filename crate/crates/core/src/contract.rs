//! The SFWT contract: operator-side minting of Wi-Fi access tokens with AP,
//! price, duration and data-cap metadata; user purchases that extend a
//! per-holder expiration; and the read-only access-right check an AP runs
//! before admitting a client.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gas::ExecCtx;
use crate::ledger::{Accounts, EventKind};
use crate::tokens::{MultiTokenState, TokenError};
use crate::types::{dec, Address, TokenId};

/// Per-token-id offering parameters, fixed at first mint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SfwtMetadata {
    pub ap_id: String,
    #[serde(with = "dec")]
    pub price_wei: u128,
    #[serde(with = "dec")]
    pub duration_sec: u64,
    #[serde(with = "dec")]
    pub data_cap_bytes: u128,
}

/// Why an access check failed. The first five come from the contract; the
/// rest are raised by the access point before or instead of a chain read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FailReason {
    NoBalance,
    WrongAp,
    Expired,
    DataExhausted,
    UnknownToken,
    SessionInvalid,
    SigInvalid,
    LedgerUnavailable,
}

impl FailReason {
    pub fn is_chain_side(self) -> bool {
        matches!(
            self,
            FailReason::NoBalance
                | FailReason::WrongAp
                | FailReason::Expired
                | FailReason::DataExhausted
                | FailReason::UnknownToken
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FailReason::NoBalance => "NO_BALANCE",
            FailReason::WrongAp => "WRONG_AP",
            FailReason::Expired => "EXPIRED",
            FailReason::DataExhausted => "DATA_EXHAUSTED",
            FailReason::UnknownToken => "UNKNOWN_TOKEN",
            FailReason::SessionInvalid => "SESSION_INVALID",
            FailReason::SigInvalid => "SIG_INVALID",
            FailReason::LedgerUnavailable => "LEDGER_UNAVAILABLE",
        }
    }
}

impl fmt::Display for FailReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyResult {
    pub ok: bool,
    #[serde(with = "dec")]
    pub remaining_time_sec: u64,
    #[serde(with = "dec")]
    pub remaining_data_bytes: u128,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fail_reason: Option<FailReason>,
}

impl VerifyResult {
    pub fn fail(reason: FailReason) -> Self {
        VerifyResult {
            ok: false,
            remaining_time_sec: 0,
            remaining_data_bytes: 0,
            fail_reason: Some(reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("UNAUTHORIZED: {0} is neither the operator nor an administrator")]
    Unauthorized(Address),
    #[error("METADATA_CONFLICT: token {0} was minted with different metadata")]
    MetadataConflict(TokenId),
    #[error("INVALID_DURATION: duration must be positive")]
    InvalidDuration,
    #[error("UNKNOWN_TOKEN: token {0} has not been minted")]
    UnknownToken(TokenId),
    #[error("WRONG_SUM: expected {expected:?} wei, got {got}")]
    WrongSum { expected: Option<u128>, got: u128 },
    #[error("INSUFFICIENT_STOCK: operator holds {have}, requested {need}")]
    InsufficientStock { have: u128, need: u128 },
    #[error("INSUFFICIENT_FUNDS: balance {have} wei, needs {need}")]
    InsufficientFunds { have: u128, need: u128 },
    #[error("OVERFLOW: arithmetic overflow")]
    Overflow,
    #[error(transparent)]
    Token(#[from] TokenError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SfwtContract {
    operator: Address,
    admins: BTreeSet<Address>,
    tokens: MultiTokenState,
    metadata: BTreeMap<TokenId, SfwtMetadata>,
    /// tokenId -> holder -> expiration second. Absent means 0 (expired).
    expirations: BTreeMap<TokenId, BTreeMap<Address, u64>>,
}

impl SfwtContract {
    pub fn deploy(operator: Address, admins: impl IntoIterator<Item = Address>) -> Self {
        SfwtContract {
            operator,
            admins: admins.into_iter().collect(),
            tokens: MultiTokenState::default(),
            metadata: BTreeMap::new(),
            expirations: BTreeMap::new(),
        }
    }

    pub fn operator(&self) -> Address {
        self.operator
    }

    pub fn is_minter(&self, who: &Address) -> bool {
        *who == self.operator || self.admins.contains(who)
    }

    pub fn tokens(&self) -> &MultiTokenState {
        &self.tokens
    }

    pub fn balance_of(&self, owner: &Address, id: &TokenId) -> u128 {
        self.tokens.balance_of(owner, id)
    }

    pub fn metadata(&self, id: &TokenId) -> Option<&SfwtMetadata> {
        self.metadata.get(id)
    }

    pub fn token_ids(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.metadata.keys().copied()
    }

    pub fn expiration(&self, id: &TokenId, holder: &Address) -> u64 {
        self.expirations
            .get(id)
            .and_then(|m| m.get(holder))
            .copied()
            .unwrap_or(0)
    }

    /// Mint `quantity` units of a new (or identically parameterised) token
    /// id to `owner`. Only the operator and administrators may mint.
    pub fn mint_sfwt(
        &mut self,
        caller: Address,
        owner: Address,
        id: TokenId,
        meta: SfwtMetadata,
        quantity: u128,
        ctx: &mut ExecCtx<'_>,
    ) -> Result<(), ContractError> {
        if !self.is_minter(&caller) {
            return Err(ContractError::Unauthorized(caller));
        }
        if meta.duration_sec == 0 {
            return Err(ContractError::InvalidDuration);
        }
        let fresh = match self.metadata.get(&id) {
            Some(existing) if *existing != meta => return Err(ContractError::MetadataConflict(id)),
            Some(_) => false,
            None => true,
        };

        self.tokens.mint(caller, owner, id, quantity, ctx)?;
        if fresh {
            // ap id, price, duration, data cap
            for _ in 0..4 {
                ctx.write_new();
            }
        }
        ctx.emit(EventKind::SfwtMint {
            caller,
            owner,
            id,
            metadata: meta.clone(),
            amount: quantity,
        });
        if fresh {
            self.metadata.insert(id, meta);
        }
        Ok(())
    }

    /// Purchase `quantity` units from the operator for exactly
    /// `price * quantity` wei and extend the caller's expiration.
    pub fn buy_sfwt(
        &mut self,
        accounts: &mut Accounts,
        caller: Address,
        id: TokenId,
        quantity: u128,
        sum_wei: u128,
        ctx: &mut ExecCtx<'_>,
    ) -> Result<u64, ContractError> {
        let meta = self
            .metadata
            .get(&id)
            .ok_or(ContractError::UnknownToken(id))?;
        let expected = meta.price_wei.checked_mul(quantity);
        if expected != Some(sum_wei) {
            return Err(ContractError::WrongSum {
                expected,
                got: sum_wei,
            });
        }
        let stock = self.tokens.balance_of(&self.operator, &id);
        if stock < quantity {
            return Err(ContractError::InsufficientStock {
                have: stock,
                need: quantity,
            });
        }
        let funds = accounts.balance(&caller);
        if funds < sum_wei {
            return Err(ContractError::InsufficientFunds {
                have: funds,
                need: sum_wei,
            });
        }
        let extension = u128::from(meta.duration_sec)
            .checked_mul(quantity)
            .and_then(|v| u64::try_from(v).ok())
            .ok_or(ContractError::Overflow)?;
        let now = ctx.block_time;
        let current = self.expiration(&id, &caller);
        let start = if now >= current { now } else { current };
        let expiration = start.checked_add(extension).ok_or(ContractError::Overflow)?;

        let operator = self.operator;
        self.tokens
            .safe_batch_transfer(caller, operator, caller, id, quantity, ctx)?;
        accounts
            .transfer(caller, operator, sum_wei, ctx)
            .expect("funds checked above");
        let slot = self.expirations.entry(id).or_default();
        ctx.write(slot.contains_key(&caller));
        slot.insert(caller, expiration);
        ctx.emit(EventKind::SfwtBuy {
            buyer: caller,
            id,
            quantity,
            sum_wei,
            block_time: now,
        });
        Ok(expiration)
    }

    /// Read-only access-right check. Guards are evaluated in a fixed order
    /// and the first failing one names the result.
    pub fn verify_sfwt(
        &self,
        holder: &Address,
        id: &TokenId,
        current_ap_id: &str,
        used_data_bytes: u128,
        now_sec: u64,
    ) -> VerifyResult {
        let Some(meta) = self.metadata.get(id) else {
            return VerifyResult::fail(FailReason::UnknownToken);
        };
        let balance = self.tokens.balance_of(holder, id);
        if balance == 0 {
            return VerifyResult::fail(FailReason::NoBalance);
        }
        if current_ap_id != meta.ap_id {
            return VerifyResult::fail(FailReason::WrongAp);
        }
        let expiration = self.expiration(id, holder);
        if now_sec >= expiration {
            return VerifyResult::fail(FailReason::Expired);
        }
        let cap = meta.data_cap_bytes.saturating_mul(balance);
        if used_data_bytes >= cap {
            return VerifyResult::fail(FailReason::DataExhausted);
        }
        VerifyResult {
            ok: true,
            remaining_time_sec: expiration - now_sec,
            remaining_data_bytes: cap - used_data_bytes,
            fail_reason: None,
        }
    }
}

/// Display helpers for durations and data volumes (`1day`, `10GB`).
/// Arithmetic always uses seconds and bytes.
pub mod units {
    const DURATIONS: [(&str, u64); 4] = [("day", 86_400), ("h", 3_600), ("min", 60), ("s", 1)];
    const VOLUMES: [(&str, u128); 5] = [
        ("TB", 1_000_000_000_000),
        ("GB", 1_000_000_000),
        ("MB", 1_000_000),
        ("KB", 1_000),
        ("B", 1),
    ];

    pub fn parse_duration(s: &str) -> Option<u64> {
        let s = s.trim();
        for (suffix, mult) in DURATIONS {
            let plural = format!("{suffix}s");
            if let Some(num) = s.strip_suffix(plural.as_str()).or_else(|| s.strip_suffix(suffix)) {
                return num.trim().parse::<u64>().ok()?.checked_mul(mult);
            }
        }
        s.parse().ok()
    }

    pub fn parse_volume(s: &str) -> Option<u128> {
        let s = s.trim();
        for (suffix, mult) in VOLUMES {
            if let Some(num) = s.strip_suffix(suffix) {
                return num.trim().parse::<u128>().ok()?.checked_mul(mult);
            }
        }
        s.parse().ok()
    }

    pub fn format_duration(sec: u64) -> String {
        for (suffix, mult) in DURATIONS {
            if sec >= mult && sec.is_multiple_of(mult) {
                return format!("{}{suffix}", sec / mult);
            }
        }
        format!("{sec}s")
    }

    pub fn format_volume(bytes: u128) -> String {
        for (suffix, mult) in VOLUMES {
            if bytes >= mult && bytes.is_multiple_of(mult) {
                return format!("{}{suffix}", bytes / mult);
            }
        }
        format!("{bytes}B")
    }
}
