//! JSON bodies of the ledger facade and the AP API. Integers that may
//! exceed 64 bits travel as decimal strings.

use serde::{Deserialize, Serialize};
use sfwt_core::crypto::{SessionId, Signature};
use sfwt_core::ledger::{Call, GasReceipt, TxId};
use sfwt_core::types::{dec, Address, Mac, TokenId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TxRequest {
    pub sender: Address,
    pub payload: Call,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TxResponse {
    pub tx_id: TxId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "camelCase")]
pub enum ReceiptResponse {
    Pending,
    Included { receipt: GasReceipt },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClockResponse {
    #[serde(with = "dec")]
    pub now_sec: u64,
    #[serde(with = "dec")]
    pub height: u64,
    #[serde(with = "dec")]
    pub block_interval_sec: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AdvanceRequest {
    #[serde(with = "dec")]
    pub delta_sec: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AriRequest {
    pub mac: Mac,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wallet_addr: Option<Address>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AriResponse {
    pub session_id: SessionId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyRequest {
    pub mac: Mac,
    pub session_id: SessionId,
    pub signature: Signature,
    pub token_id: TokenId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UsageRequest {
    pub mac: Mac,
    #[serde(with = "dec")]
    pub delta_bytes: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UsageResponse {
    #[serde(with = "dec")]
    pub used_data_bytes: u128,
}

/// Error body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn verify_request_wire_shape() {
        let req = VerifyRequest {
            mac: "02:00:00:00:00:01".parse().unwrap(),
            session_id: SessionId([0xab; 32]),
            signature: Signature {
                r: [1; 32],
                s: [2; 32],
                v: 1,
            },
            token_id: TokenId::from(2),
        };
        let v = serde_json::to_value(&req).unwrap();
        assert_eq!(v["mac"], "02:00:00:00:00:01");
        assert_eq!(v["tokenId"], "2");
        assert_eq!(v["sessionId"].as_str().unwrap().len(), 66);
        assert_eq!(v["signature"].as_str().unwrap().len(), 132);
        assert_eq!(serde_json::from_value::<VerifyRequest>(v).unwrap(), req);
    }

    #[test]
    fn large_integers_are_strings() {
        let v = serde_json::to_value(UsageRequest {
            mac: Mac([0; 6]),
            delta_bytes: u128::MAX,
        })
        .unwrap();
        assert_eq!(v["deltaBytes"], json!(u128::MAX.to_string()));
        let bad = json!({"mac": "00:00:00:00:00:00", "deltaBytes": 5});
        assert!(serde_json::from_value::<UsageRequest>(bad).is_err());
    }

    #[test]
    fn receipt_response_tagged() {
        let v = serde_json::to_value(ReceiptResponse::Pending).unwrap();
        assert_eq!(v, json!({"state": "pending"}));
    }
}
