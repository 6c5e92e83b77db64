//! Semi-fungible Wi-Fi token (SFWT) access control.
//!
//! An operator mints multi-token access credentials on a simulated
//! gas-metered ledger, users buy them, and an access point admits clients
//! after a signed challenge-response and a read-only on-chain check.

pub mod bench;
pub mod contract;
pub mod crypto;
pub mod fixtures;
pub mod gatekeeper;
pub mod gas;
pub mod ledger;
pub mod tokens;
pub mod types;

pub use contract::{FailReason, SfwtContract, SfwtMetadata, VerifyResult};
pub use crypto::{recover_signer, sign_session, KeyPair, SessionId, Signature};
pub use gas::GasSchedule;
pub use gatekeeper::{ApConfig, ChainError, ChainReader, Gatekeeper, GatekeeperError};
pub use ledger::{Call, ChainConfig, GasReceipt, Genesis, Ledger, Query, QueryResult, SharedLedger};
pub use types::{Address, Mac, TokenId};
