//! Deterministic simulated blockchain.
//!
//! State-changing calls are queued as transactions and only take effect when
//! a block is produced; reads are answered immediately against committed
//! state. Blocks are produced at exact multiples of the configured interval
//! on a simulated clock that only moves when told to.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use parking_lot::{Mutex, RwLock, RwLockReadGuard, RwLockWriteGuard};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contract::{ContractError, SfwtContract, SfwtMetadata, VerifyResult};
use crate::gas::{ExecCtx, GasSchedule};
use crate::tokens::{MultiTokenState, NftState, TokenError};
use crate::types::{dec, dec_opt, Address, TokenId};

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("unknown sender {0}")]
    UnknownSender(Address),
    #[error("block interval must be positive")]
    ZeroBlockInterval,
    #[error("malformed call: {0}")]
    MalformedCall(String),
    #[error("event log: {0}")]
    EventLog(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainConfig {
    pub block_interval_sec: u64,
    #[serde(default)]
    pub gas_schedule: GasSchedule,
    /// Append-only JSON-lines file receiving every emitted event.
    #[serde(default)]
    pub event_log: Option<PathBuf>,
    /// Record every access-check read so admissions can be audited.
    #[serde(default)]
    pub audit_reads: bool,
}

impl ChainConfig {
    pub fn with_interval(block_interval_sec: u64) -> Self {
        ChainConfig {
            block_interval_sec,
            gas_schedule: GasSchedule::default(),
            event_log: None,
            audit_reads: false,
        }
    }
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig::with_interval(10)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GenesisAccount {
    pub address: Address,
    #[serde(with = "dec")]
    pub balance_wei: u128,
}

/// Initial accounts and the SFWT contract deployment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Genesis {
    pub accounts: Vec<GenesisAccount>,
    pub sfwt_operator: Address,
    #[serde(default)]
    pub sfwt_admins: Vec<Address>,
}

impl Genesis {
    pub fn new(sfwt_operator: Address) -> Self {
        Genesis {
            accounts: vec![GenesisAccount {
                address: sfwt_operator,
                balance_wei: 0,
            }],
            sfwt_operator,
            sfwt_admins: Vec::new(),
        }
    }

    pub fn admin(mut self, admin: Address) -> Self {
        self.sfwt_admins.push(admin);
        self.fund(admin, 0)
    }

    pub fn fund(mut self, address: Address, balance_wei: u128) -> Self {
        self.accounts.push(GenesisAccount {
            address,
            balance_wei,
        });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("INSUFFICIENT_FUNDS: balance {have} wei, needs {need}")]
pub struct InsufficientFunds {
    pub have: u128,
    pub need: u128,
}

/// Native-currency balances. An address is a known account once it appears
/// in genesis or receives a transfer, even with a zero balance.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Accounts(BTreeMap<Address, u128>);

impl Accounts {
    pub fn balance(&self, who: &Address) -> u128 {
        self.0.get(who).copied().unwrap_or(0)
    }

    pub fn exists(&self, who: &Address) -> bool {
        self.0.contains_key(who)
    }

    /// Create or top up an account outside any transaction (genesis only).
    pub fn credit(&mut self, who: Address, amount: u128) {
        let bal = self.0.entry(who).or_insert(0);
        *bal = bal.saturating_add(amount);
    }

    pub fn total(&self) -> u128 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Address, &u128)> {
        self.0.iter()
    }

    pub fn transfer(
        &mut self,
        from: Address,
        to: Address,
        amount: u128,
        ctx: &mut ExecCtx<'_>,
    ) -> Result<(), InsufficientFunds> {
        let have = self.balance(&from);
        if have < amount {
            return Err(InsufficientFunds { have, need: amount });
        }
        ctx.write(self.exists(&from));
        ctx.write(self.exists(&to));
        ctx.emit(EventKind::NativeTransfer { from, to, amount });
        if from != to {
            self.0.insert(from, have - amount);
            // cannot overflow: total supply is fixed and fits in u128
            *self.0.entry(to).or_insert(0) += amount;
        } else {
            self.0.entry(to).or_insert(0);
        }
        Ok(())
    }
}

/// Everything a transaction may touch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorldState {
    pub accounts: Accounts,
    pub sfwt: SfwtContract,
    /// Stand-alone multi-token contract used by the gas benchmark.
    pub erc1155: MultiTokenState,
    /// Stand-alone single-ownership contract used by the gas benchmark.
    pub erc721: NftState,
}

/// Transaction payload: the registered contract operations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "args", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Call {
    TransferNative {
        to: Address,
        #[serde(with = "dec")]
        amount_wei: u128,
    },
    MintSfwt {
        owner: Address,
        token_id: TokenId,
        ap_id: String,
        #[serde(with = "dec")]
        price_wei: u128,
        #[serde(with = "dec")]
        duration_sec: u64,
        #[serde(with = "dec")]
        data_cap_bytes: u128,
        #[serde(with = "dec")]
        quantity: u128,
    },
    BuySfwt {
        token_id: TokenId,
        #[serde(with = "dec")]
        quantity: u128,
        #[serde(with = "dec")]
        sum_wei: u128,
    },
    Mint1155 {
        to: Address,
        token_id: TokenId,
        #[serde(with = "dec")]
        quantity: u128,
    },
    Transfer1155 {
        to: Address,
        token_id: TokenId,
        #[serde(with = "dec")]
        quantity: u128,
    },
    Mint721 {
        to: Address,
        token_ids: Vec<TokenId>,
    },
    Transfer721 {
        to: Address,
        token_ids: Vec<TokenId>,
    },
}

impl Call {
    pub fn mint_sfwt(owner: Address, token_id: TokenId, meta: &SfwtMetadata, quantity: u128) -> Self {
        Call::MintSfwt {
            owner,
            token_id,
            ap_id: meta.ap_id.clone(),
            price_wei: meta.price_wei,
            duration_sec: meta.duration_sec,
            data_cap_bytes: meta.data_cap_bytes,
            quantity,
        }
    }
}

/// Read-only query descriptors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "args", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Query {
    NativeBalance {
        address: Address,
    },
    BalanceOf {
        owner: Address,
        token_id: TokenId,
    },
    VerifySfwt {
        holder: Address,
        token_id: TokenId,
        ap_id: String,
        #[serde(with = "dec")]
        used_data_bytes: u128,
        /// Defaults to the ledger clock.
        #[serde(default, with = "dec_opt", skip_serializing_if = "Option::is_none")]
        now_sec: Option<u64>,
    },
    GetMetadata {
        token_id: TokenId,
    },
    GetExpiration {
        token_id: TokenId,
        holder: Address,
    },
    ListSfwt,
    OwnerOf {
        token_id: TokenId,
    },
    Erc1155BalanceOf {
        owner: Address,
        token_id: TokenId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "camelCase")]
pub enum QueryResult {
    Balance(#[serde(with = "dec")] u128),
    Verify(VerifyResult),
    Metadata(Option<SfwtMetadata>),
    Expiration(#[serde(with = "dec")] u64),
    TokenIds(Vec<TokenId>),
    Owner(Option<Address>),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TxId(pub u64);

impl fmt::Display for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:016x}", self.0)
    }
}

impl fmt::Debug for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TxId({self})")
    }
}

impl FromStr for TxId {
    type Err = LedgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix("0x")
            .filter(|h| h.len() == 16)
            .and_then(|h| u64::from_str_radix(h, 16).ok())
            .map(TxId)
            .ok_or_else(|| LedgerError::MalformedCall(format!("bad tx id {s:?}")))
    }
}

impl Serialize for TxId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TxId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Transaction {
    pub id: TxId,
    pub sender: Address,
    pub payload: Call,
    #[serde(with = "dec")]
    pub submitted_at_sec: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ReceiptStatus {
    Success,
    Reverted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GasReceipt {
    pub tx_id: TxId,
    #[serde(with = "dec")]
    pub gas_used: u64,
    #[serde(with = "dec")]
    pub block_number: u64,
    #[serde(with = "dec")]
    pub block_timestamp_sec: u64,
    pub status: ReceiptStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revert_reason: Option<String>,
}

impl GasReceipt {
    pub fn succeeded(&self) -> bool {
        self.status == ReceiptStatus::Success
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Block {
    #[serde(with = "dec")]
    pub number: u64,
    #[serde(with = "dec")]
    pub timestamp_sec: u64,
    pub included_tx_ids: Vec<TxId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum EventKind {
    NativeTransfer {
        from: Address,
        to: Address,
        #[serde(with = "dec")]
        amount: u128,
    },
    TransferSingle {
        operator: Address,
        from: Address,
        to: Address,
        id: TokenId,
        #[serde(with = "dec")]
        value: u128,
    },
    Transfer721 {
        from: Address,
        to: Address,
        id: TokenId,
    },
    SfwtMint {
        caller: Address,
        owner: Address,
        id: TokenId,
        metadata: SfwtMetadata,
        #[serde(with = "dec")]
        amount: u128,
    },
    SfwtBuy {
        buyer: Address,
        id: TokenId,
        #[serde(with = "dec")]
        quantity: u128,
        #[serde(with = "dec")]
        sum_wei: u128,
        #[serde(with = "dec")]
        block_time: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LedgerEvent {
    #[serde(with = "dec")]
    pub block_number: u64,
    pub tx_id: TxId,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// One recorded access-check read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReadAudit {
    pub holder: Address,
    pub token_id: TokenId,
    pub ap_id: String,
    #[serde(with = "dec")]
    pub used_data_bytes: u128,
    #[serde(with = "dec")]
    pub now_sec: u64,
    pub result: VerifyResult,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TxState {
    Pending,
    Included(GasReceipt),
}

#[derive(Debug, Error)]
enum ExecError {
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error(transparent)]
    Token(#[from] TokenError),
    #[error(transparent)]
    Native(#[from] InsufficientFunds),
}

pub struct Ledger {
    config: ChainConfig,
    now_sec: u64,
    state: WorldState,
    blocks: Vec<Block>,
    pending: VecDeque<Transaction>,
    receipts: BTreeMap<TxId, GasReceipt>,
    pending_ids: BTreeSet<TxId>,
    next_tx: u64,
    events: Vec<LedgerEvent>,
    log: Option<BufWriter<File>>,
    log_error: Option<String>,
    read_audit: Mutex<Vec<ReadAudit>>,
}

impl fmt::Debug for Ledger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ledger")
            .field("now_sec", &self.now_sec)
            .field("height", &self.height())
            .field("pending", &self.pending.len())
            .finish_non_exhaustive()
    }
}

impl Ledger {
    pub fn new(config: ChainConfig, genesis: &Genesis) -> Result<Self, LedgerError> {
        if config.block_interval_sec == 0 {
            return Err(LedgerError::ZeroBlockInterval);
        }
        let log = match &config.event_log {
            Some(path) => Some(BufWriter::new(
                OpenOptions::new().create(true).append(true).open(path)?,
            )),
            None => None,
        };
        let mut accounts = Accounts::default();
        accounts.credit(genesis.sfwt_operator, 0);
        for acct in &genesis.accounts {
            accounts.credit(acct.address, acct.balance_wei);
        }
        let state = WorldState {
            accounts,
            sfwt: SfwtContract::deploy(genesis.sfwt_operator, genesis.sfwt_admins.iter().copied()),
            erc1155: MultiTokenState::default(),
            erc721: NftState::default(),
        };
        Ok(Ledger {
            config,
            now_sec: 0,
            state,
            blocks: vec![Block {
                number: 0,
                timestamp_sec: 0,
                included_tx_ids: Vec::new(),
            }],
            pending: VecDeque::new(),
            receipts: BTreeMap::new(),
            pending_ids: BTreeSet::new(),
            next_tx: 0,
            events: Vec::new(),
            log,
            log_error: None,
            read_audit: Mutex::new(Vec::new()),
        })
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn now(&self) -> u64 {
        self.now_sec
    }

    pub fn height(&self) -> u64 {
        self.blocks.last().map_or(0, |b| b.number)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn events(&self) -> &[LedgerEvent] {
        &self.events
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// First I/O error hit while appending to the event log, if any.
    pub fn event_log_error(&self) -> Option<&str> {
        self.log_error.as_deref()
    }

    pub fn read_audit(&self) -> Vec<ReadAudit> {
        self.read_audit.lock().clone()
    }

    /// Queue a transaction for the next block.
    pub fn submit(&mut self, sender: Address, payload: Call) -> Result<TxId, LedgerError> {
        if !self.state.accounts.exists(&sender) {
            return Err(LedgerError::UnknownSender(sender));
        }
        let id = TxId(self.next_tx);
        self.next_tx += 1;
        self.pending.push_back(Transaction {
            id,
            sender,
            payload,
            submitted_at_sec: self.now_sec,
        });
        self.pending_ids.insert(id);
        Ok(id)
    }

    pub fn tx_state(&self, id: &TxId) -> Option<TxState> {
        if let Some(r) = self.receipts.get(id) {
            Some(TxState::Included(r.clone()))
        } else if self.pending_ids.contains(id) {
            Some(TxState::Pending)
        } else {
            None
        }
    }

    pub fn receipt(&self, id: &TxId) -> Option<&GasReceipt> {
        self.receipts.get(id)
    }

    /// Produce the next block, executing every pending transaction in
    /// submission order. Does not move the clock.
    pub fn produce_block(&mut self) -> Block {
        let number = self.height() + 1;
        let timestamp_sec = number * self.config.block_interval_sec;
        let txs: Vec<Transaction> = self.pending.drain(..).collect();
        let mut included = Vec::with_capacity(txs.len());
        let first_event = self.events.len();
        for tx in txs {
            self.pending_ids.remove(&tx.id);
            let receipt = self.execute(&tx, number, timestamp_sec);
            included.push(tx.id);
            self.receipts.insert(tx.id, receipt);
        }
        let block = Block {
            number,
            timestamp_sec,
            included_tx_ids: included,
        };
        self.blocks.push(block.clone());
        self.append_log(first_event);
        block
    }

    /// Move the clock forward, producing one block per crossed boundary.
    pub fn advance_clock(&mut self, delta_sec: u64) -> u64 {
        self.now_sec = self.now_sec.saturating_add(delta_sec);
        while (self.height() + 1).saturating_mul(self.config.block_interval_sec) <= self.now_sec {
            self.produce_block();
        }
        self.now_sec
    }

    /// Direct native transfer outside the transaction queue.
    pub fn transfer_native(&mut self, from: Address, to: Address, amount_wei: u128) -> bool {
        let mut ctx = ExecCtx::new(&self.config.gas_schedule, self.now_sec);
        self.state
            .accounts
            .transfer(from, to, amount_wei, &mut ctx)
            .is_ok()
    }

    pub fn call_read(&self, query: &Query) -> QueryResult {
        let s = &self.state;
        match query {
            Query::NativeBalance { address } => QueryResult::Balance(s.accounts.balance(address)),
            Query::BalanceOf { owner, token_id } => {
                QueryResult::Balance(s.sfwt.balance_of(owner, token_id))
            }
            Query::VerifySfwt {
                holder,
                token_id,
                ap_id,
                used_data_bytes,
                now_sec,
            } => {
                let now = now_sec.unwrap_or(self.now_sec);
                let result = s
                    .sfwt
                    .verify_sfwt(holder, token_id, ap_id, *used_data_bytes, now);
                if self.config.audit_reads {
                    self.read_audit.lock().push(ReadAudit {
                        holder: *holder,
                        token_id: *token_id,
                        ap_id: ap_id.clone(),
                        used_data_bytes: *used_data_bytes,
                        now_sec: now,
                        result,
                    });
                }
                QueryResult::Verify(result)
            }
            Query::GetMetadata { token_id } => {
                QueryResult::Metadata(s.sfwt.metadata(token_id).cloned())
            }
            Query::GetExpiration { token_id, holder } => {
                QueryResult::Expiration(s.sfwt.expiration(token_id, holder))
            }
            Query::ListSfwt => QueryResult::TokenIds(s.sfwt.token_ids().collect()),
            Query::OwnerOf { token_id } => QueryResult::Owner(s.erc721.owner_of(token_id)),
            Query::Erc1155BalanceOf { owner, token_id } => {
                QueryResult::Balance(s.erc1155.balance_of(owner, token_id))
            }
        }
    }

    /// Decode and answer a JSON query descriptor.
    pub fn call_read_json(&self, query: serde_json::Value) -> Result<QueryResult, LedgerError> {
        let query: Query =
            serde_json::from_value(query).map_err(|e| LedgerError::MalformedCall(e.to_string()))?;
        Ok(self.call_read(&query))
    }

    pub fn balance_of(&self, owner: &Address, id: &TokenId) -> u128 {
        self.state.sfwt.balance_of(owner, id)
    }

    pub fn native_balance(&self, who: &Address) -> u128 {
        self.state.accounts.balance(who)
    }

    pub fn verify_sfwt(
        &self,
        holder: &Address,
        id: &TokenId,
        ap_id: &str,
        used_data_bytes: u128,
        now_sec: u64,
    ) -> VerifyResult {
        match self.call_read(&Query::VerifySfwt {
            holder: *holder,
            token_id: *id,
            ap_id: ap_id.to_owned(),
            used_data_bytes,
            now_sec: Some(now_sec),
        }) {
            QueryResult::Verify(v) => v,
            other => unreachable!("verify query answered with {other:?}"),
        }
    }

    /// Canonical serialization of committed state, receipts and blocks.
    pub fn fingerprint(&self) -> String {
        serde_json::to_string(&(&self.state, &self.receipts, &self.blocks, &self.events))
            .expect("ledger state serializes")
    }

    fn execute(&mut self, tx: &Transaction, block_number: u64, block_time: u64) -> GasReceipt {
        let base = self.config.gas_schedule.base_tx_gas;
        let schedule = self.config.gas_schedule;
        let mut ctx = ExecCtx::new(&schedule, block_time);
        let sender = tx.sender;
        let state = &mut self.state;
        let result: Result<(), ExecError> = match &tx.payload {
            Call::TransferNative { to, amount_wei } => state
                .accounts
                .transfer(sender, *to, *amount_wei, &mut ctx)
                .map_err(Into::into),
            Call::MintSfwt {
                owner,
                token_id,
                ap_id,
                price_wei,
                duration_sec,
                data_cap_bytes,
                quantity,
            } => {
                let meta = SfwtMetadata {
                    ap_id: ap_id.clone(),
                    price_wei: *price_wei,
                    duration_sec: *duration_sec,
                    data_cap_bytes: *data_cap_bytes,
                };
                state
                    .sfwt
                    .mint_sfwt(sender, *owner, *token_id, meta, *quantity, &mut ctx)
                    .map_err(Into::into)
            }
            Call::BuySfwt {
                token_id,
                quantity,
                sum_wei,
            } => state
                .sfwt
                .buy_sfwt(&mut state.accounts, sender, *token_id, *quantity, *sum_wei, &mut ctx)
                .map(|_| ())
                .map_err(Into::into),
            Call::Mint1155 {
                to,
                token_id,
                quantity,
            } => state
                .erc1155
                .mint(sender, *to, *token_id, *quantity, &mut ctx)
                .map_err(Into::into),
            Call::Transfer1155 {
                to,
                token_id,
                quantity,
            } => state
                .erc1155
                .safe_batch_transfer(sender, sender, *to, *token_id, *quantity, &mut ctx)
                .map_err(Into::into),
            Call::Mint721 { to, token_ids } => state
                .erc721
                .mint(*to, token_ids, &mut ctx)
                .map_err(Into::into),
            Call::Transfer721 { to, token_ids } => state
                .erc721
                .transfer(sender, *to, token_ids, &mut ctx)
                .map_err(Into::into),
        };
        let (status, gas_used, revert_reason) = match result {
            Ok(()) => {
                let (gas, events) = ctx.into_parts();
                self.events.extend(events.into_iter().map(|kind| LedgerEvent {
                    block_number,
                    tx_id: tx.id,
                    kind,
                }));
                (ReceiptStatus::Success, base + gas, None)
            }
            Err(e) => (ReceiptStatus::Reverted, base, Some(e.to_string())),
        };
        GasReceipt {
            tx_id: tx.id,
            gas_used,
            block_number,
            block_timestamp_sec: block_time,
            status,
            revert_reason,
        }
    }

    fn append_log(&mut self, from: usize) {
        let Some(log) = self.log.as_mut() else {
            return;
        };
        let res = (|| -> std::io::Result<()> {
            for ev in &self.events[from..] {
                serde_json::to_writer(&mut *log, ev)?;
                log.write_all(b"\n")?;
            }
            log.flush()
        })();
        if let Err(e) = res {
            self.log_error.get_or_insert_with(|| e.to_string());
        }
    }
}

/// Thread-safe ledger handle: one writer at a time, concurrent readers see
/// committed state only.
#[derive(Debug, Clone)]
pub struct SharedLedger(Arc<RwLock<Ledger>>);

impl SharedLedger {
    pub fn new(ledger: Ledger) -> Self {
        SharedLedger(Arc::new(RwLock::new(ledger)))
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Ledger> {
        self.0.read()
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, Ledger> {
        self.0.write()
    }

    pub fn submit(&self, sender: Address, payload: Call) -> Result<TxId, LedgerError> {
        self.0.write().submit(sender, payload)
    }

    pub fn advance_clock(&self, delta_sec: u64) -> u64 {
        self.0.write().advance_clock(delta_sec)
    }

    pub fn now(&self) -> u64 {
        self.0.read().now()
    }

    pub fn call_read(&self, query: &Query) -> QueryResult {
        self.0.read().call_read(query)
    }

    /// Submit, then advance the clock to the next block boundary so the
    /// transaction is included. Returns its receipt.
    pub fn submit_and_mine(&self, sender: Address, payload: Call) -> Result<GasReceipt, LedgerError> {
        let mut l = self.0.write();
        let id = l.submit(sender, payload)?;
        let interval = l.config().block_interval_sec;
        let next = (l.now() / interval + 1) * interval;
        let now = l.now();
        l.advance_clock(next - now);
        Ok(l.receipt(&id).cloned().expect("included in the block just produced"))
    }
}
