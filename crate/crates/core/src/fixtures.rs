//! Canonical scenario data: the batch-mint example (token 1, ten units for
//! "access point 1") and the wallet example where token 1 has lapsed and
//! token 2 is live on AP1.

use crate::contract::SfwtMetadata;
use crate::types::Address;

pub const FIG3_OWNER: &str = "0xa8126934003110d5b7eC9a275e27B6d2fFA28529";
pub const FIG3_CALLER: &str = "0xb9f786a9e81ca99fcb3a078ebb18148a4f04bb46";
pub const FIG3_TOKEN_ID: u64 = 1;
pub const FIG3_QUANTITY: u128 = 10;

pub const ONE_DAY_SEC: u64 = 86_400;
pub const TEN_GB: u128 = 10_000_000_000;

/// Token owner and receiving operator of the mint example.
pub fn fig3_owner() -> Address {
    FIG3_OWNER.parse().expect("fixture address")
}

/// Account that submitted the mint example.
pub fn fig3_caller() -> Address {
    FIG3_CALLER.parse().expect("fixture address")
}

pub fn fig3_metadata() -> SfwtMetadata {
    SfwtMetadata {
        ap_id: "access point 1".to_owned(),
        price_wei: 1,
        duration_sec: ONE_DAY_SEC,
        data_cap_bytes: TEN_GB,
    }
}

pub const WALLET_AP_ID: &str = "AP1";
pub const WALLET_VALID_TOKEN_ID: u64 = 2;

/// Second offering, bound to AP1.
pub fn ap1_metadata() -> SfwtMetadata {
    SfwtMetadata {
        ap_id: WALLET_AP_ID.to_owned(),
        price_wei: 1,
        duration_sec: ONE_DAY_SEC,
        data_cap_bytes: TEN_GB,
    }
}
