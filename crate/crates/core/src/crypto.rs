//! Challenge-response primitives shared by wallet and access point:
//! 256-bit session identifiers, secp256k1 ECDSA with public-key recovery,
//! and keccak-256 address derivation.
//!
//! The signed digest is `keccak256(session_id)` with no message prefix.
//! Nonces are deterministic (RFC 6979) and `s` is always normalized to the
//! low half of the curve order; recovery rejects high-`s` signatures.

use std::fmt;
use std::str::FromStr;

use k256::ecdsa::{RecoveryId, Signature as EcdsaSignature, SigningKey, VerifyingKey};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha3::{Digest, Keccak256};
use thiserror::Error;

use crate::types::{decode_hex_fixed, encode_hex, Address, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("secret key is zero or not below the curve order")]
    InvalidSecretKey,
    #[error("public key is not a valid curve point")]
    InvalidPublicKey,
    #[error("recovery id must be 0 or 1, got {0}")]
    InvalidRecoveryId(u8),
    #[error("signature scalars out of range")]
    ScalarOutOfRange,
    #[error("signature s is not in the lower half of the curve order")]
    HighS,
    #[error("public key recovery failed")]
    RecoveryFailed,
}

pub fn keccak256(data: &[u8]) -> [u8; 32] {
    Keccak256::digest(data).into()
}

pub struct KeyPair {
    sk: SigningKey,
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("address", &self.address())
            .finish_non_exhaustive()
    }
}

impl KeyPair {
    pub fn from_secret(bytes: &[u8; 32]) -> Result<Self, CryptoError> {
        SigningKey::from_bytes(bytes.into())
            .map(|sk| KeyPair { sk })
            .map_err(|_| CryptoError::InvalidSecretKey)
    }

    /// Draw a key from a CSPRNG, or from a deterministic generator when a
    /// seed is given. Out-of-range scalars are rejected and redrawn.
    pub fn generate(seed: Option<u64>) -> Self {
        let mut rng = match seed {
            Some(seed) => ChaCha20Rng::seed_from_u64(seed),
            None => ChaCha20Rng::from_os_rng(),
        };
        loop {
            let mut bytes = [0u8; 32];
            rng.fill_bytes(&mut bytes);
            if let Ok(kp) = KeyPair::from_secret(&bytes) {
                return kp;
            }
        }
    }

    pub fn secret_bytes(&self) -> [u8; 32] {
        self.sk.to_bytes().into()
    }

    /// Uncompressed public point `x || y`, without the SEC1 tag byte.
    pub fn public_bytes(&self) -> [u8; 64] {
        uncompressed(self.sk.verifying_key())
    }

    pub fn address(&self) -> Address {
        address_from_key(self.sk.verifying_key())
    }
}

fn uncompressed(vk: &VerifyingKey) -> [u8; 64] {
    let point = vk.to_encoded_point(false);
    let mut out = [0u8; 64];
    out.copy_from_slice(&point.as_bytes()[1..]);
    out
}

fn address_from_key(vk: &VerifyingKey) -> Address {
    let hash = keccak256(&uncompressed(vk));
    Address::from_slice(&hash[12..]).expect("20 bytes")
}

/// Address of a 64-byte uncompressed public key: the last 20 bytes of its
/// keccak-256 hash.
pub fn address_of(pk: &[u8; 64]) -> Result<Address, CryptoError> {
    let mut sec1 = [0u8; 65];
    sec1[0] = 0x04;
    sec1[1..].copy_from_slice(pk);
    let vk = VerifyingKey::from_sec1_bytes(&sec1).map_err(|_| CryptoError::InvalidPublicKey)?;
    Ok(address_from_key(&vk))
}

/// 256-bit challenge issued by the access point.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SessionId(pub [u8; 32]);

impl SessionId {
    pub fn random<R: RngCore>(rng: &mut R) -> Self {
        let mut bytes = [0u8; 32];
        rng.fill_bytes(&mut bytes);
        SessionId(bytes)
    }

    pub fn digest(&self) -> [u8; 32] {
        keccak256(&self.0)
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&encode_hex(&self.0))
    }
}

impl fmt::Debug for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SessionId({self})")
    }
}

impl FromStr for SessionId {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        decode_hex_fixed::<32>(s).map(SessionId)
    }
}

/// Recoverable signature, wire form `r || s || v` (65 bytes).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub r: [u8; 32],
    pub s: [u8; 32],
    pub v: u8,
}

impl Signature {
    pub fn to_bytes(&self) -> [u8; 65] {
        let mut out = [0u8; 65];
        out[..32].copy_from_slice(&self.r);
        out[32..64].copy_from_slice(&self.s);
        out[64] = self.v;
        out
    }

    pub fn from_bytes(bytes: &[u8; 65]) -> Self {
        let mut r = [0u8; 32];
        let mut s = [0u8; 32];
        r.copy_from_slice(&bytes[..32]);
        s.copy_from_slice(&bytes[32..64]);
        Signature { r, s, v: bytes[64] }
    }

    pub fn is_low_s(&self) -> bool {
        match EcdsaSignature::from_scalars(self.r, self.s) {
            Ok(sig) => sig.normalize_s().is_none(),
            Err(_) => false,
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&encode_hex(&self.to_bytes()))
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({self})")
    }
}

impl FromStr for Signature {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        decode_hex_fixed::<65>(s).map(|b| Signature::from_bytes(&b))
    }
}

macro_rules! hex_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                String::deserialize(d)?
                    .parse()
                    .map_err(serde::de::Error::custom)
            }
        }
    };
}

hex_serde!(SessionId);
hex_serde!(Signature);

/// Sign `keccak256(session_id)` with a deterministic nonce.
pub fn sign_session(session_id: &SessionId, key: &KeyPair) -> Signature {
    let (sig, recid) = key
        .sk
        .sign_prehash_recoverable(&session_id.digest())
        .expect("32-byte prehash is always accepted");
    let (sig, recid) = match sig.normalize_s() {
        Some(low) => (
            low,
            RecoveryId::new(!recid.is_y_odd(), recid.is_x_reduced()),
        ),
        None => (sig, recid),
    };
    // an x-reduced r would need recovery ids 2/3, which the wire format
    // cannot carry; probability is ~2^-128
    assert!(!recid.is_x_reduced(), "x-reduced signature r");
    let (r, s) = sig.split_bytes();
    Signature {
        r: r.into(),
        s: s.into(),
        v: recid.to_byte(),
    }
}

/// Recover the signer address. Never returns an address for a signature
/// that is malformed, high-`s`, or does not recover to a point.
pub fn recover_signer(session_id: &SessionId, sig: &Signature) -> Result<Address, CryptoError> {
    if sig.v > 1 {
        return Err(CryptoError::InvalidRecoveryId(sig.v));
    }
    let ecdsa =
        EcdsaSignature::from_scalars(sig.r, sig.s).map_err(|_| CryptoError::ScalarOutOfRange)?;
    if ecdsa.normalize_s().is_some() {
        return Err(CryptoError::HighS);
    }
    let recid = RecoveryId::from_byte(sig.v).ok_or(CryptoError::InvalidRecoveryId(sig.v))?;
    let vk = VerifyingKey::recover_from_prehash(&session_id.digest(), &ecdsa, recid)
        .map_err(|_| CryptoError::RecoveryFailed)?;
    Ok(address_from_key(&vk))
}
