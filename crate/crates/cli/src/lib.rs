//! Command line tools: wallet, benchmark harness, ledger node and AP node.

pub mod keystore;
pub mod wallet;
