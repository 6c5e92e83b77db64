//! Passphrase-scrambled key file.
//!
//! Each entry stores the secret key XORed with a PBKDF2-HMAC-SHA256 key
//! stream and an HMAC tag over the ciphertext and address, so a wrong
//! passphrase is detected before any key material is used. The file never
//! holds a plaintext secret.

use std::fs;
use std::path::{Path, PathBuf};

use hmac::{Hmac, Mac as _};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sfwt_core::crypto::KeyPair;
use sfwt_core::types::Address;
use sha2::Sha256;
use thiserror::Error;

pub const MIN_PASSPHRASE_LEN: usize = 8;
const DEFAULT_ITERATIONS: u32 = 100_000;

type HmacSha256 = Hmac<Sha256>;

#[derive(Debug, Error)]
pub enum KeystoreError {
    #[error("label {0:?} already exists")]
    DuplicateLabel(String),
    #[error("no key labelled {0:?}")]
    UnknownLabel(String),
    #[error("passphrase must be at least {MIN_PASSPHRASE_LEN} characters")]
    WeakPassphrase,
    #[error("wrong passphrase or corrupted entry")]
    BadPassphrase,
    #[error("malformed keystore: {0}")]
    Malformed(String),
    #[error("keystore I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Entry {
    pub label: String,
    pub address: Address,
    #[serde(with = "hex::serde")]
    salt: [u8; 16],
    iterations: u32,
    #[serde(with = "hex::serde")]
    ciphertext: [u8; 32],
    #[serde(with = "hex::serde")]
    tag: [u8; 32],
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeystoreFile {
    pub version: u32,
    pub entries: Vec<Entry>,
}

fn derive(passphrase: &str, salt: &[u8; 16], iterations: u32) -> ([u8; 32], [u8; 32]) {
    let mut okm = [0u8; 64];
    pbkdf2::pbkdf2_hmac::<Sha256>(passphrase.as_bytes(), salt, iterations, &mut okm);
    let mut stream = [0u8; 32];
    let mut mac_key = [0u8; 32];
    stream.copy_from_slice(&okm[..32]);
    mac_key.copy_from_slice(&okm[32..]);
    (stream, mac_key)
}

fn tagger(mac_key: &[u8; 32], ciphertext: &[u8; 32], address: &Address) -> HmacSha256 {
    let mut m = HmacSha256::new_from_slice(mac_key).expect("any key length");
    m.update(ciphertext);
    m.update(&address.0);
    m
}

impl Entry {
    fn seal(label: &str, key: &KeyPair, passphrase: &str, iterations: u32) -> Entry {
        let mut salt = [0u8; 16];
        rand::rng().fill_bytes(&mut salt);
        let (stream, mac_key) = derive(passphrase, &salt, iterations);
        let sk = key.secret_bytes();
        let mut ciphertext = [0u8; 32];
        for i in 0..32 {
            ciphertext[i] = sk[i] ^ stream[i];
        }
        let address = key.address();
        let tag = tagger(&mac_key, &ciphertext, &address).finalize().into_bytes().into();
        Entry {
            label: label.to_owned(),
            address,
            salt,
            iterations,
            ciphertext,
            tag,
        }
    }

    pub fn unlock(&self, passphrase: &str) -> Result<KeyPair, KeystoreError> {
        let (stream, mac_key) = derive(passphrase, &self.salt, self.iterations);
        tagger(&mac_key, &self.ciphertext, &self.address)
            .verify_slice(&self.tag)
            .map_err(|_| KeystoreError::BadPassphrase)?;
        let mut sk = [0u8; 32];
        for i in 0..32 {
            sk[i] = self.ciphertext[i] ^ stream[i];
        }
        let key = KeyPair::from_secret(&sk).map_err(|e| KeystoreError::Malformed(e.to_string()))?;
        if key.address() != self.address {
            return Err(KeystoreError::Malformed("address does not match key".into()));
        }
        Ok(key)
    }
}

/// Key file on disk; every mutation is written back immediately.
#[derive(Debug)]
pub struct Keystore {
    path: PathBuf,
    file: KeystoreFile,
    iterations: u32,
}

impl Keystore {
    /// Open `path`, or start an empty store if it does not exist yet.
    pub fn open(path: &Path) -> Result<Self, KeystoreError> {
        let file = match fs::read_to_string(path) {
            Ok(text) => {
                let f: KeystoreFile =
                    serde_json::from_str(&text).map_err(|e| KeystoreError::Malformed(e.to_string()))?;
                if f.version != 1 {
                    return Err(KeystoreError::Malformed(format!("unsupported version {}", f.version)));
                }
                f
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => KeystoreFile {
                version: 1,
                entries: Vec::new(),
            },
            Err(e) => return Err(e.into()),
        };
        Ok(Keystore {
            path: path.to_owned(),
            file,
            iterations: DEFAULT_ITERATIONS,
        })
    }

    pub fn with_iterations(mut self, iterations: u32) -> Self {
        self.iterations = iterations.max(1);
        self
    }

    pub fn entries(&self) -> &[Entry] {
        &self.file.entries
    }

    pub fn get(&self, label: &str) -> Result<&Entry, KeystoreError> {
        self.file
            .entries
            .iter()
            .find(|e| e.label == label)
            .ok_or_else(|| KeystoreError::UnknownLabel(label.to_owned()))
    }

    pub fn add(&mut self, label: &str, key: &KeyPair, passphrase: &str) -> Result<Address, KeystoreError> {
        if passphrase.chars().count() < MIN_PASSPHRASE_LEN {
            return Err(KeystoreError::WeakPassphrase);
        }
        if self.file.entries.iter().any(|e| e.label == label) {
            return Err(KeystoreError::DuplicateLabel(label.to_owned()));
        }
        let entry = Entry::seal(label, key, passphrase, self.iterations);
        let address = entry.address;
        self.file.entries.push(entry);
        self.save()?;
        Ok(address)
    }

    fn save(&self) -> Result<(), KeystoreError> {
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let text = serde_json::to_string_pretty(&self.file).expect("serializable");
        let tmp = self.path.with_extension("tmp");
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &self.path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(dir: &tempfile::TempDir) -> Keystore {
        Keystore::open(&dir.path().join("ks.json")).unwrap().with_iterations(1000)
    }

    #[test]
    fn seal_unlock_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut ks = store(&dir);
        let key = KeyPair::generate(Some(7));
        let addr = ks.add("main", &key, "correct horse").unwrap();
        assert_eq!(addr, key.address());

        let ks = Keystore::open(&dir.path().join("ks.json")).unwrap();
        let back = ks.get("main").unwrap().unlock("correct horse").unwrap();
        assert_eq!(back.secret_bytes(), key.secret_bytes());
        assert!(matches!(
            ks.get("main").unwrap().unlock("wrong horse"),
            Err(KeystoreError::BadPassphrase)
        ));
    }

    #[test]
    fn file_never_holds_plaintext_secret() {
        let dir = tempfile::tempdir().unwrap();
        let mut ks = store(&dir);
        let key = KeyPair::generate(Some(8));
        ks.add("a", &key, "passphrase!").unwrap();
        let text = fs::read_to_string(dir.path().join("ks.json")).unwrap();
        assert!(!text.contains(&hex::encode(key.secret_bytes())));
    }

    #[test]
    fn rejects_weak_passphrase_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let mut ks = store(&dir);
        let key = KeyPair::generate(Some(9));
        assert!(matches!(ks.add("a", &key, ""), Err(KeystoreError::WeakPassphrase)));
        assert!(matches!(ks.add("a", &key, "short"), Err(KeystoreError::WeakPassphrase)));
        ks.add("a", &key, "long enough").unwrap();
        assert!(matches!(
            ks.add("a", &key, "long enough"),
            Err(KeystoreError::DuplicateLabel(_))
        ));
        assert!(matches!(ks.get("b"), Err(KeystoreError::UnknownLabel(_))));
    }

    #[test]
    fn tampered_entry_detected() {
        let dir = tempfile::tempdir().unwrap();
        let mut ks = store(&dir);
        ks.add("a", &KeyPair::generate(Some(1)), "long enough").unwrap();
        let mut e = ks.get("a").unwrap().clone();
        e.ciphertext[0] ^= 1;
        assert!(matches!(e.unlock("long enough"), Err(KeystoreError::BadPassphrase)));
    }

    #[test]
    fn malformed_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ks.json");
        fs::write(&p, "{not json").unwrap();
        assert!(matches!(Keystore::open(&p), Err(KeystoreError::Malformed(_))));
    }
}
