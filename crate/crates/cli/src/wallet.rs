//! `wallet` commands: keygen, list, buy, connect, status.
//!
//! Exit codes: 0 success, 2 rejected by the chain (expired, exhausted,
//! wrong AP, no balance, unknown token, reverted purchase), 3 session or
//! signature error, 4 ledger unavailable at the AP, 1 anything else.

use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sfwt_core::contract::{units, FailReason, VerifyResult};
use sfwt_core::crypto::{sign_session, KeyPair};
use sfwt_core::ledger::{Call, GasReceipt, ReceiptStatus};
use sfwt_core::types::{dec, Address, Mac, TokenId};
use sfwt_net::{ApClient, LedgerClient};

use crate::keystore::Keystore;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CHAIN_REJECT: i32 = 2;
pub const EXIT_SESSION: i32 = 3;
pub const EXIT_LEDGER_DOWN: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "wallet", about = "Semi-fungible Wi-Fi token wallet", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Key file.
    #[arg(long, global = true, env = "SFWT_KEYSTORE", default_value = "sfwt-keystore.json")]
    pub keystore: PathBuf,
    /// Ledger facade base URL.
    #[arg(long, global = true, env = "SFWT_LEDGER", default_value = "http://127.0.0.1:8545")]
    pub ledger: String,
    /// Access point base URL.
    #[arg(long, global = true, env = "SFWT_AP", default_value = "http://127.0.0.1:8080")]
    pub ap: String,
    /// Client MAC; derived from the account address when omitted.
    #[arg(long, global = true)]
    pub mac: Option<Mac>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Name of the environment variable holding the passphrase.
    #[arg(long, global = true, default_value = "SFWT_PASSPHRASE")]
    pub passphrase_env: String,
    /// Keystore entry to use.
    #[arg(long, global = true, default_value = "default")]
    pub label: String,
    /// Seconds to wait for a purchase to be included.
    #[arg(long, global = true, default_value_t = 60)]
    pub timeout: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a key and store it scrambled under the passphrase.
    Keygen {
        /// Deterministic key for tests.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Show every known token with its status for an address.
    List {
        /// Defaults to the keystore entry's address.
        #[arg(long)]
        address: Option<Address>,
    },
    /// Buy units of a token; the sum is computed from the listed price.
    Buy {
        #[arg(long)]
        token_id: TokenId,
        #[arg(long, default_value_t = 1)]
        quantity: u128,
    },
    /// Authenticate at the access point with a token.
    Connect {
        #[arg(long)]
        token_id: TokenId,
    },
    /// Ask the access point whether this client is authorized.
    Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenStatus {
    Valid,
    Expired,
    Unbought,
}

impl TokenStatus {
    /// Status is derived: expired iff held and `now >= expiration`.
    pub fn derive(balance: u128, expiration_sec: u64, now_sec: u64) -> Self {
        if balance == 0 {
            TokenStatus::Unbought
        } else if now_sec >= expiration_sec {
            TokenStatus::Expired
        } else {
            TokenStatus::Valid
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TokenView {
    pub token_id: TokenId,
    pub ap_id: String,
    #[serde(with = "dec")]
    pub price_wei: u128,
    #[serde(with = "dec")]
    pub duration_sec: u64,
    #[serde(with = "dec")]
    pub data_cap_bytes: u128,
    #[serde(with = "dec")]
    pub balance: u128,
    #[serde(with = "dec")]
    pub expiration_sec: u64,
    pub status: TokenStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BuySummary {
    pub receipt: GasReceipt,
    #[serde(with = "dec")]
    pub sum_wei: u128,
    #[serde(with = "dec")]
    pub balance: u128,
    #[serde(with = "dec")]
    pub expiration_sec: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConnectSummary {
    pub address: Address,
    pub mac: Mac,
    pub token_id: TokenId,
    pub authenticated: bool,
    pub result: VerifyResult,
}

/// Locally administered MAC derived from the account, stable per profile.
pub fn profile_mac(addr: &Address) -> Mac {
    let a = addr.0;
    Mac([0x02, a[0], a[1], a[2], a[3], a[4]])
}

pub fn exit_code_for(reason: Option<FailReason>) -> i32 {
    match reason {
        None => EXIT_OK,
        Some(FailReason::SessionInvalid) | Some(FailReason::SigInvalid) => EXIT_SESSION,
        Some(FailReason::LedgerUnavailable) => EXIT_LEDGER_DOWN,
        Some(_) => EXIT_CHAIN_REJECT,
    }
}

pub fn describe(reason: FailReason) -> &'static str {
    match reason {
        FailReason::UnknownToken => "this token does not exist on the ledger",
        FailReason::NoBalance => "the account holds no units of this token",
        FailReason::WrongAp => "this token is bound to a different access point",
        FailReason::Expired => "the token's service time has expired; buy more time",
        FailReason::DataExhausted => "the token's data allowance is used up",
        FailReason::SessionInvalid => "the authentication session is invalid or expired; retry",
        FailReason::SigInvalid => "the signature could not be verified",
        FailReason::LedgerUnavailable => "the access point cannot reach the ledger; retry later",
    }
}

fn passphrase(g: &Global) -> anyhow::Result<String> {
    std::env::var(&g.passphrase_env)
        .map_err(|_| anyhow!("set the passphrase in ${}", g.passphrase_env))
}

fn unlock(g: &Global) -> anyhow::Result<KeyPair> {
    let ks = Keystore::open(&g.keystore)?;
    let pass = passphrase(g)?;
    Ok(ks.get(&g.label)?.unlock(&pass)?)
}

fn account(g: &Global) -> anyhow::Result<Address> {
    Ok(Keystore::open(&g.keystore)?.get(&g.label)?.address)
}

fn emit<T: Serialize>(out: &mut dyn Write, g: &Global, value: &T, text: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> anyhow::Result<()> {
    if g.json {
        serde_json::to_writer_pretty(&mut *out, value)?;
        writeln!(out)?;
    } else {
        text(out)?;
    }
    Ok(())
}

pub fn token_views(ledger: &LedgerClient, owner: Address) -> anyhow::Result<Vec<TokenView>> {
    let now = ledger.clock().context("ledger unreachable")?.now_sec;
    let mut rows = Vec::new();
    for id in ledger.list_sfwt()? {
        let Some(meta) = ledger.metadata(id)? else {
            continue;
        };
        let balance = ledger.balance_of(owner, id)?;
        let expiration_sec = ledger.expiration(id, owner)?;
        rows.push(TokenView {
            token_id: id,
            ap_id: meta.ap_id,
            price_wei: meta.price_wei,
            duration_sec: meta.duration_sec,
            data_cap_bytes: meta.data_cap_bytes,
            balance,
            expiration_sec,
            status: TokenStatus::derive(balance, expiration_sec, now),
        });
    }
    Ok(rows)
}

fn cmd_keygen(g: &Global, seed: Option<u64>, out: &mut dyn Write) -> anyhow::Result<i32> {
    let pass = passphrase(g)?;
    let mut ks = Keystore::open(&g.keystore)?;
    let key = KeyPair::generate(seed);
    let address = ks.add(&g.label, &key, &pass)?;
    let body = serde_json::json!({ "label": g.label, "address": address });
    emit(out, g, &body, |o| writeln!(o, "{address}"))?;
    Ok(EXIT_OK)
}

fn cmd_list(g: &Global, address: Option<Address>, out: &mut dyn Write) -> anyhow::Result<i32> {
    let owner = match address {
        Some(a) => a,
        None => account(g)?,
    };
    let rows = token_views(&LedgerClient::new(&g.ledger), owner)?;
    emit(out, g, &rows, |o| {
        writeln!(
            o,
            "{:<8} {:<16} {:>10} {:>10} {:>10} {:>8} {:>12}  status",
            "token", "ap", "price", "duration", "data", "balance", "expires"
        )?;
        for r in &rows {
            writeln!(
                o,
                "{:<8} {:<16} {:>10} {:>10} {:>10} {:>8} {:>12}  {:?}",
                r.token_id.to_string(),
                r.ap_id,
                r.price_wei,
                units::format_duration(r.duration_sec),
                units::format_volume(r.data_cap_bytes),
                r.balance,
                r.expiration_sec,
                r.status
            )?;
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}

fn cmd_buy(g: &Global, token_id: TokenId, quantity: u128, out: &mut dyn Write) -> anyhow::Result<i32> {
    let key = unlock(g)?;
    let me = key.address();
    let ledger = LedgerClient::new(&g.ledger);
    let meta = ledger
        .metadata(token_id)?
        .ok_or_else(|| anyhow!("token {token_id} is not offered on this ledger"))?;
    let sum_wei = meta
        .price_wei
        .checked_mul(quantity)
        .ok_or_else(|| anyhow!("price x quantity overflows"))?;
    let tx = ledger.submit(
        me,
        Call::BuySfwt {
            token_id,
            quantity,
            sum_wei,
        },
    )?;
    let receipt = ledger
        .wait_receipt(tx, Duration::from_secs(g.timeout))
        .with_context(|| format!("transaction {tx} not yet included; check later with its id"))?;
    let summary = BuySummary {
        sum_wei,
        balance: ledger.balance_of(me, token_id)?,
        expiration_sec: ledger.expiration(token_id, me)?,
        receipt,
    };
    let ok = summary.receipt.status == ReceiptStatus::Success;
    emit(out, g, &summary, |o| {
        if ok {
            writeln!(
                o,
                "bought {quantity} x token {token_id} for {sum_wei} wei (gas {})\nbalance {}  expires at {}",
                summary.receipt.gas_used, summary.balance, summary.expiration_sec
            )
        } else {
            writeln!(
                o,
                "purchase reverted: {}",
                summary.receipt.revert_reason.as_deref().unwrap_or("unknown reason")
            )
        }
    })?;
    Ok(if ok { EXIT_OK } else { EXIT_CHAIN_REJECT })
}

fn cmd_connect(g: &Global, token_id: TokenId, out: &mut dyn Write) -> anyhow::Result<i32> {
    let key = unlock(g)?;
    let me = key.address();
    let mac = g.mac.unwrap_or_else(|| profile_mac(&me));
    let ap = ApClient::new(&g.ap);
    let portal = ap.portal(mac)?;
    if portal.authorized {
        let body = serde_json::json!({ "address": me, "mac": mac, "authorized": true, "remainingTimeSec": portal.remaining_time_sec.map(|t| t.to_string()) });
        emit(out, g, &body, |o| {
            writeln!(
                o,
                "already authenticated at {} ({} s remaining)",
                portal.ap_id,
                portal.remaining_time_sec.unwrap_or(0)
            )
        })?;
        return Ok(EXIT_OK);
    }
    let sid = ap.ari(mac, Some(me))?;
    let signature = sign_session(&sid, &key);
    let result = ap.verify(mac, sid, signature, token_id)?;
    let summary = ConnectSummary {
        address: me,
        mac,
        token_id,
        authenticated: result.ok,
        result,
    };
    emit(out, g, &summary, |o| {
        if result.ok {
            writeln!(
                o,
                "Authenticated at {} with token {token_id}\nremaining time {} s  remaining data {}",
                portal.ap_id,
                result.remaining_time_sec,
                units::format_volume(result.remaining_data_bytes)
            )
        } else {
            let reason = result.fail_reason.unwrap_or(FailReason::NoBalance);
            writeln!(o, "authentication failed: {reason}: {}", describe(reason))
        }
    })?;
    Ok(exit_code_for(if result.ok { None } else { result.fail_reason.or(Some(FailReason::NoBalance)) }))
}

fn cmd_status(g: &Global, out: &mut dyn Write) -> anyhow::Result<i32> {
    let mac = match g.mac {
        Some(m) => m,
        None => profile_mac(&account(g)?),
    };
    let portal = ApClient::new(&g.ap).portal(mac)?;
    emit(out, g, &portal, |o| {
        if portal.authorized {
            writeln!(
                o,
                "{mac}: Authenticated at {} ({} s remaining)",
                portal.ap_id,
                portal.remaining_time_sec.unwrap_or(0)
            )
        } else {
            writeln!(o, "{mac}: not authenticated at {}", portal.ap_id)
        }
    })?;
    Ok(EXIT_OK)
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let g = &cli.global;
    match &cli.command {
        Command::Keygen { seed } => cmd_keygen(g, *seed, out),
        Command::List { address } => cmd_list(g, *address, out),
        Command::Buy { token_id, quantity } => {
            if *quantity == 0 {
                bail!("quantity must be positive");
            }
            cmd_buy(g, *token_id, *quantity, out)
        }
        Command::Connect { token_id } => cmd_connect(g, *token_id, out),
        Command::Status => cmd_status(g, out),
    }
}
