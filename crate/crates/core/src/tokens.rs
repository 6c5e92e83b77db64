//! Token engines executed inside ledger transactions.
//!
//! [`MultiTokenState`] follows multi-token (ERC1155) semantics: balances per
//! `(owner, id)` and batch mint/transfer of any quantity of one id for a
//! constant gas cost. [`NftState`] follows single-ownership (ERC721)
//! semantics and exists only as the gas baseline: every id minted or moved
//! costs its own storage writes and event.
//!
//! Every operation validates before it mutates, so an `Err` leaves the state
//! exactly as it was.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::gas::ExecCtx;
use crate::ledger::EventKind;
use crate::types::{Address, TokenId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("INSUFFICIENT_BALANCE: {owner} holds {have} of token {id}, needs {need}")]
    InsufficientBalance {
        owner: Address,
        id: TokenId,
        have: u128,
        need: u128,
    },
    #[error("OVERFLOW: balance arithmetic overflow")]
    Overflow,
    #[error("DUPLICATE_TOKEN: token {0} already exists")]
    DuplicateToken(TokenId),
    #[error("NOT_OWNER: {from} does not own token {id}")]
    NotOwner { from: Address, id: TokenId },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MultiTokenState {
    /// Zero balances are never stored; an absent key is a zero balance.
    balances: BTreeMap<(Address, TokenId), u128>,
    supply: BTreeMap<TokenId, u128>,
}

impl MultiTokenState {
    pub fn balance_of(&self, owner: &Address, id: &TokenId) -> u128 {
        self.balances.get(&(*owner, *id)).copied().unwrap_or(0)
    }

    pub fn total_supply(&self, id: &TokenId) -> u128 {
        self.supply.get(id).copied().unwrap_or(0)
    }

    /// All `(owner, id, balance)` triples with a nonzero balance.
    pub fn holdings(&self) -> impl Iterator<Item = (Address, TokenId, u128)> + '_ {
        self.balances.iter().map(|(&(a, id), &b)| (a, id, b))
    }

    fn set_balance(&mut self, owner: Address, id: TokenId, value: u128) {
        if value == 0 {
            self.balances.remove(&(owner, id));
        } else {
            self.balances.insert((owner, id), value);
        }
    }

    /// Mint `quantity` units of `id` to `to`.
    ///
    /// Gas: one balance-slot write (fresh or update), one supply-counter
    /// update and one event, whatever the quantity.
    pub fn mint(
        &mut self,
        operator: Address,
        to: Address,
        id: TokenId,
        quantity: u128,
        ctx: &mut ExecCtx<'_>,
    ) -> Result<(), TokenError> {
        let before = self.balance_of(&to, &id);
        let after = before.checked_add(quantity).ok_or(TokenError::Overflow)?;
        let supply = self
            .total_supply(&id)
            .checked_add(quantity)
            .ok_or(TokenError::Overflow)?;

        ctx.write(before > 0);
        ctx.write_update();
        ctx.emit(EventKind::TransferSingle {
            operator,
            from: Address::ZERO,
            to,
            id,
            value: quantity,
        });
        self.set_balance(to, id, after);
        if supply > 0 {
            self.supply.insert(id, supply);
        }
        Ok(())
    }

    /// Move `quantity` units of `id` from `from` to `to`.
    ///
    /// Gas: two balance-slot writes and one event, whatever the quantity.
    pub fn safe_batch_transfer(
        &mut self,
        operator: Address,
        from: Address,
        to: Address,
        id: TokenId,
        quantity: u128,
        ctx: &mut ExecCtx<'_>,
    ) -> Result<(), TokenError> {
        let from_before = self.balance_of(&from, &id);
        if from_before < quantity {
            return Err(TokenError::InsufficientBalance {
                owner: from,
                id,
                have: from_before,
                need: quantity,
            });
        }
        let to_before = self.balance_of(&to, &id);
        let to_after = if from == to {
            to_before
        } else {
            to_before.checked_add(quantity).ok_or(TokenError::Overflow)?
        };

        ctx.write(from_before > 0);
        ctx.write(to_before > 0);
        ctx.emit(EventKind::TransferSingle {
            operator,
            from,
            to,
            id,
            value: quantity,
        });
        if from != to {
            self.set_balance(from, id, from_before - quantity);
            self.set_balance(to, id, to_after);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NftState {
    owners: BTreeMap<TokenId, Address>,
    counts: BTreeMap<Address, u64>,
}

impl NftState {
    pub fn owner_of(&self, id: &TokenId) -> Option<Address> {
        self.owners.get(id).copied()
    }

    pub fn count_of(&self, owner: &Address) -> u64 {
        self.counts.get(owner).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }

    /// Mint each id in `ids` to `to`. Per id: owner-slot write, owner
    /// counter update, one event.
    pub fn mint(
        &mut self,
        to: Address,
        ids: &[TokenId],
        ctx: &mut ExecCtx<'_>,
    ) -> Result<(), TokenError> {
        let mut seen = BTreeSet::new();
        for id in ids {
            if self.owners.contains_key(id) || !seen.insert(*id) {
                return Err(TokenError::DuplicateToken(*id));
            }
        }
        let count = self
            .count_of(&to)
            .checked_add(ids.len() as u64)
            .ok_or(TokenError::Overflow)?;

        for id in ids {
            ctx.write_new();
            ctx.write_update();
            ctx.emit(EventKind::Transfer721 {
                from: Address::ZERO,
                to,
                id: *id,
            });
            self.owners.insert(*id, to);
        }
        if !ids.is_empty() {
            self.counts.insert(to, count);
        }
        Ok(())
    }

    /// Reassign each id from `from` to `to`. Per id: the recipient's owned-id
    /// index entry (new), the owner slot (update), one event.
    pub fn transfer(
        &mut self,
        from: Address,
        to: Address,
        ids: &[TokenId],
        ctx: &mut ExecCtx<'_>,
    ) -> Result<(), TokenError> {
        let mut seen = BTreeSet::new();
        for id in ids {
            if self.owners.get(id) != Some(&from) || !seen.insert(*id) {
                return Err(TokenError::NotOwner { from, id: *id });
            }
        }
        let n = ids.len() as u64;
        for id in ids {
            ctx.write_new();
            ctx.write_update();
            ctx.emit(EventKind::Transfer721 { from, to, id: *id });
            self.owners.insert(*id, to);
        }
        if from != to && n > 0 {
            let from_count = self.count_of(&from) - n;
            if from_count == 0 {
                self.counts.remove(&from);
            } else {
                self.counts.insert(from, from_count);
            }
            *self.counts.entry(to).or_insert(0) += n;
        }
        Ok(())
    }
}
