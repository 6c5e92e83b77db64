use serde::{Deserialize, Serialize};

use super::{BenchError, Execution};
use crate::ledger::{Call, ChainConfig, Genesis, Ledger, SharedLedger};
use crate::types::{Address, TokenId};

pub const ERC1155_MINT: &str = "erc1155-mint";
pub const ERC1155_TRANSFER: &str = "erc1155-transfer";
pub const ERC721_MINT: &str = "erc721-mint";
pub const ERC721_TRANSFER: &str = "erc721-transfer";

/// One metered operation. `standard` names the token standard and the
/// operation, e.g. `erc721-mint`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GasRow {
    pub standard: String,
    pub quantity: u128,
    pub gas: u64,
}

fn addr(n: u8) -> Address {
    let mut a = [0u8; 20];
    a[0] = 0xbe;
    a[19] = n;
    Address(a)
}

/// Meter mint and transfer of `n` tokens under both standards on a fresh
/// ledger.
fn measure(n: u128) -> Result<Vec<GasRow>, BenchError> {
    let (minter, holder, receiver) = (addr(1), addr(2), addr(3));
    let ledger = Ledger::new(ChainConfig::with_interval(1), &Genesis::new(minter).fund(holder, 1))
        .map_err(|e| BenchError::Fixture(e.to_string()))?;
    let ledger = SharedLedger::new(ledger);
    let id = TokenId::from(1);
    let ids: Vec<TokenId> = (0..n as u64).map(TokenId::from).collect();

    let steps = [
        (ERC1155_MINT, minter, Call::Mint1155 { to: holder, token_id: id, quantity: n }),
        (ERC1155_TRANSFER, holder, Call::Transfer1155 { to: receiver, token_id: id, quantity: n }),
        (ERC721_MINT, minter, Call::Mint721 { to: holder, token_ids: ids.clone() }),
        (ERC721_TRANSFER, holder, Call::Transfer721 { to: receiver, token_ids: ids }),
    ];
    let mut rows = Vec::with_capacity(steps.len());
    for (label, sender, call) in steps {
        let receipt = ledger
            .submit_and_mine(sender, call)
            .map_err(|e| BenchError::Fixture(e.to_string()))?;
        if !receipt.succeeded() {
            return Err(BenchError::Fixture(format!(
                "{label} n={n} reverted: {:?}",
                receipt.revert_reason
            )));
        }
        rows.push(GasRow {
            standard: label.to_owned(),
            quantity: n,
            gas: receipt.gas_used,
        });
    }
    Ok(rows)
}

/// Gas for each quantity, ordered by quantity then operation. Every
/// repetition runs on its own ledger and must reproduce the first exactly.
pub fn run_gas_benchmark(
    quantities: &[u128],
    repetitions: usize,
    exec: Execution,
) -> Result<Vec<GasRow>, BenchError> {
    if quantities.is_empty() || quantities.contains(&0) {
        return Err(BenchError::Invalid("quantities must be nonempty and positive".into()));
    }
    if repetitions == 0 {
        return Err(BenchError::Invalid("repetitions must be >= 1".into()));
    }
    let jobs = quantities.len() * repetitions;
    let results = exec.map(jobs, |j| measure(quantities[j % quantities.len()]));
    let mut results = results.into_iter();
    let first: Vec<Vec<GasRow>> = results.by_ref().take(quantities.len()).collect::<Result<_, _>>()?;
    for (j, r) in results.enumerate() {
        let r = r?;
        let q = j % quantities.len();
        if r != first[q] {
            return Err(BenchError::NonDeterministic(format!(
                "quantity {} repetition {}",
                quantities[q],
                j / quantities.len() + 1
            )));
        }
    }
    Ok(first.into_iter().flatten().collect())
}

pub fn gas_of(rows: &[GasRow], standard: &str, quantity: u128) -> Option<u64> {
    rows.iter()
        .find(|r| r.standard == standard && r.quantity == quantity)
        .map(|r| r.gas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::GasSchedule;

    #[test]
    fn closed_form_matches_schedule() {
        let s = GasSchedule::default();
        let rows = run_gas_benchmark(&[1, 7], 2, Execution::Sequential).unwrap();
        for n in [1u128, 7] {
            let k = n as u64;
            assert_eq!(
                gas_of(&rows, ERC1155_MINT, n),
                Some(s.base_tx_gas + s.storage_write_new_gas + s.storage_write_update_gas + s.event_emit_gas)
            );
            assert_eq!(
                gas_of(&rows, ERC1155_TRANSFER, n),
                Some(s.base_tx_gas + s.storage_write_update_gas + s.storage_write_new_gas + s.event_emit_gas)
            );
            assert_eq!(
                gas_of(&rows, ERC721_MINT, n),
                Some(s.base_tx_gas + k * (s.storage_write_new_gas + s.storage_write_update_gas + s.event_emit_gas))
            );
            assert_eq!(
                gas_of(&rows, ERC721_TRANSFER, n),
                Some(s.base_tx_gas + k * (s.storage_write_new_gas + s.storage_write_update_gas + s.event_emit_gas))
            );
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(run_gas_benchmark(&[], 1, Execution::Sequential).is_err());
        assert!(run_gas_benchmark(&[0], 1, Execution::Sequential).is_err());
        assert!(run_gas_benchmark(&[1], 0, Execution::Sequential).is_err());
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_equals_sequential() {
        let q = [1, 10, 100];
        assert_eq!(
            run_gas_benchmark(&q, 3, Execution::Sequential).unwrap(),
            run_gas_benchmark(&q, 3, Execution::Parallel).unwrap()
        );
    }
}
