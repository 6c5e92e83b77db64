use serde::{Deserialize, Serialize};

use crate::ledger::EventKind;

/// Gas prices for the primitive actions a contract can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GasSchedule {
    pub base_tx_gas: u64,
    pub storage_write_new_gas: u64,
    pub storage_write_update_gas: u64,
    pub event_emit_gas: u64,
    /// Reads are free; kept so the schedule is self-describing.
    pub read_gas: u64,
}

impl Default for GasSchedule {
    fn default() -> Self {
        GasSchedule {
            base_tx_gas: 21_000,
            storage_write_new_gas: 20_000,
            storage_write_update_gas: 5_000,
            event_emit_gas: 2_000,
            read_gas: 0,
        }
    }
}

/// Execution context handed to contract code for one transaction: meters
/// storage writes and collects emitted events.
#[derive(Debug)]
pub struct ExecCtx<'a> {
    schedule: &'a GasSchedule,
    gas: u64,
    events: Vec<EventKind>,
    pub block_time: u64,
}

impl<'a> ExecCtx<'a> {
    pub fn new(schedule: &'a GasSchedule, block_time: u64) -> Self {
        ExecCtx {
            schedule,
            gas: 0,
            events: Vec::new(),
            block_time,
        }
    }

    /// Charge one storage write; `existed` selects update vs fresh-slot pricing.
    pub fn write(&mut self, existed: bool) {
        self.gas += if existed {
            self.schedule.storage_write_update_gas
        } else {
            self.schedule.storage_write_new_gas
        };
    }

    pub fn write_new(&mut self) {
        self.write(false);
    }

    pub fn write_update(&mut self) {
        self.write(true);
    }

    pub fn emit(&mut self, event: EventKind) {
        self.gas += self.schedule.event_emit_gas;
        self.events.push(event);
    }

    /// Gas charged so far, excluding the base transaction fee.
    pub fn execution_gas(&self) -> u64 {
        self.gas
    }

    pub fn into_parts(self) -> (u64, Vec<EventKind>) {
        (self.gas, self.events)
    }
}
