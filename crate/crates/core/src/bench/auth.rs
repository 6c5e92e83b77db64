use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BenchError, Execution, LatencyModel};
use crate::contract::SfwtMetadata;
use crate::crypto::{sign_session, KeyPair};
use crate::gatekeeper::{ApConfig, Gatekeeper};
use crate::ledger::{Call, ChainConfig, Genesis, Ledger, Query, QueryResult, SharedLedger};
use crate::types::{Address, Mac, TokenId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Wpa2,
    BlockBroadcast,
    NWpa2,
    SfwtQuery,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Wpa2,
        SchemeKind::BlockBroadcast,
        SchemeKind::NWpa2,
        SchemeKind::SfwtQuery,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Wpa2 => "wpa2",
            SchemeKind::BlockBroadcast => "block-broadcast",
            SchemeKind::NWpa2 => "n-wpa2",
            SchemeKind::SfwtQuery => "sfwt-query",
        }
    }

    fn stream(self) -> u64 {
        match self {
            SchemeKind::Wpa2 => 1,
            SchemeKind::BlockBroadcast => 2,
            SchemeKind::NWpa2 => 3,
            SchemeKind::SfwtQuery => 4,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemeKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.label() == norm || k.label().replace('-', "") == norm)
            .ok_or_else(|| BenchError::Invalid(format!("unknown scheme {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub scheme: SchemeKind,
    pub trial: usize,
    pub latency_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthStats {
    pub scheme: SchemeKind,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

impl AuthStats {
    pub fn from_samples(scheme: SchemeKind, xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        AuthStats {
            scheme,
            mean,
            stddev: var.sqrt(),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            samples: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthRun {
    pub trials: Vec<TrialResult>,
    pub stats: AuthStats,
}

const BENCH_AP: &str = "bench-ap";

fn operator() -> Address {
    let mut a = [0u8; 20];
    a[0] = 0x0b;
    Address(a)
}

fn fixture_err(e: impl fmt::Display) -> BenchError {
    BenchError::Fixture(e.to_string())
}

/// Ledger where `user` holds one unit of an access token for the bench AP
/// and one ERC721 token.
fn query_fixture(interval: u64, user: &KeyPair) -> Result<SharedLedger, BenchError> {
    let op = operator();
    let genesis = Genesis::new(op).fund(user.address(), 1_000);
    let ledger = SharedLedger::new(Ledger::new(ChainConfig::with_interval(interval), &genesis).map_err(fixture_err)?);
    let meta = SfwtMetadata {
        ap_id: BENCH_AP.to_owned(),
        price_wei: 1,
        duration_sec: 86_400,
        data_cap_bytes: 10_000_000_000,
    };
    let steps = [
        (op, Call::mint_sfwt(op, TokenId::from(1), &meta, 100)),
        (
            user.address(),
            Call::BuySfwt {
                token_id: TokenId::from(1),
                quantity: 1,
                sum_wei: 1,
            },
        ),
        (
            op,
            Call::Mint721 {
                to: user.address(),
                token_ids: vec![TokenId::from(1)],
            },
        ),
    ];
    for (sender, call) in steps {
        let r = ledger.submit_and_mine(sender, call).map_err(fixture_err)?;
        if !r.succeeded() {
            return Err(BenchError::Fixture(format!("{:?}", r.revert_reason)));
        }
    }
    Ok(ledger)
}

fn trial_mac(trial: usize) -> Mac {
    let t = (trial as u32).to_be_bytes();
    Mac([0x02, 0xbe, t[0], t[1], t[2], t[3]])
}

/// Wait in ms from submitting at `phase_ms` past a block boundary until
/// the transaction's block is produced, measured on a live ledger.
fn inclusion_wait_ms(interval: u64, user: &KeyPair, phase_ms: f64) -> Result<f64, BenchError> {
    let genesis = Genesis::new(operator()).fund(user.address(), 1_000);
    let mut ledger = Ledger::new(ChainConfig::with_interval(interval), &genesis).map_err(fixture_err)?;
    let boundary_ms = (interval * 1000) as f64;
    ledger.advance_clock(interval);
    let submit_at_ms = boundary_ms + phase_ms;
    let submit_sec = (submit_at_ms / 1000.0).floor() as u64;
    ledger.advance_clock(submit_sec - ledger.now());
    let tx = ledger
        .submit(
            user.address(),
            Call::TransferNative {
                to: operator(),
                amount_wei: 1,
            },
        )
        .map_err(fixture_err)?;
    for _ in 0..=interval {
        if let Some(r) = ledger.receipt(&tx) {
            return Ok(r.block_timestamp_sec as f64 * 1000.0 - submit_at_ms);
        }
        ledger.advance_clock(1);
    }
    Err(BenchError::Fixture("transaction never included".into()))
}

/// Simulated authentication latency of `trials` runs of `scheme`.
///
/// `Wpa2`: four message exchanges. `SfwtQuery`: three exchanges and one
/// chain read, with a real challenge/verify against a gatekeeper.
/// `NWpa2`: an ownership read followed by the full WPA2 exchange.
/// `BlockBroadcast`: three exchanges, a transaction submission, the wait
/// until the next block (submission phase stratified over the interval)
/// and a confirmation read.
pub fn run_auth_benchmark(
    scheme: SchemeKind,
    trials: usize,
    block_interval_sec: u64,
    model: &LatencyModel,
    exec: Execution,
) -> Result<AuthRun, BenchError> {
    if trials == 0 {
        return Err(BenchError::Invalid("trials must be >= 1".into()));
    }
    if block_interval_sec == 0 {
        return Err(BenchError::Invalid("block interval must be >= 1 s".into()));
    }
    model.validate()?;
    let user = KeyPair::generate(Some(model.rng_seed));
    let ledger = match scheme {
        SchemeKind::SfwtQuery | SchemeKind::NWpa2 => Some(query_fixture(block_interval_sec, &user)?),
        _ => None,
    };
    let gatekeeper = ledger.as_ref().map(|l| {
        Gatekeeper::new(
            ApConfig {
                ap_id: BENCH_AP.to_owned(),
                rng_seed: Some(model.rng_seed),
                max_pending_sessions: usize::MAX,
                ..ApConfig::default()
            },
            l.clone(),
        )
    });

    let results = exec.map(trials, |i| -> Result<f64, BenchError> {
        let mut rng = model.trial_rng(scheme.stream(), i as u64);
        match scheme {
            SchemeKind::Wpa2 => Ok(model.messages(&mut rng, model.wpa2_message_count)),
            SchemeKind::SfwtQuery => {
                let gk = gatekeeper.as_ref().expect("fixture");
                let mac = trial_mac(i);
                let now = ledger.as_ref().expect("fixture").now();
                gk.handle_connect(mac, now).map_err(fixture_err)?;
                let sid = gk.handle_ari(mac, now).map_err(fixture_err)?;
                let sig = sign_session(&sid, &user);
                let res = gk.handle_verify(mac, sid, &sig, TokenId::from(1), now);
                if !res.ok {
                    return Err(BenchError::Fixture(format!("verify failed: {:?}", res.fail_reason)));
                }
                Ok(model.messages(&mut rng, model.proposed_message_count) + model.chain_read(&mut rng))
            }
            SchemeKind::NWpa2 => {
                let owner = ledger
                    .as_ref()
                    .expect("fixture")
                    .call_read(&Query::OwnerOf {
                        token_id: TokenId::from(1),
                    });
                if owner != QueryResult::Owner(Some(user.address())) {
                    return Err(BenchError::Fixture(format!("ownership read {owner:?}")));
                }
                Ok(model.chain_read(&mut rng) + model.messages(&mut rng, model.wpa2_message_count))
            }
            SchemeKind::BlockBroadcast => {
                let u: f64 = rng.random();
                let phase_ms = (i as f64 + u) / trials as f64 * (block_interval_sec * 1000) as f64;
                let wait = inclusion_wait_ms(block_interval_sec, &user, phase_ms)?;
                Ok(model.messages(&mut rng, model.proposed_message_count)
                    + model.chain_read(&mut rng)
                    + wait
                    + model.chain_read(&mut rng))
            }
        }
    });

    let latencies: Vec<f64> = results.into_iter().collect::<Result<_, _>>()?;
    let stats = AuthStats::from_samples(scheme, &latencies);
    let trials = latencies
        .into_iter()
        .enumerate()
        .map(|(trial, latency_ms)| TrialResult {
            scheme,
            trial,
            latency_ms,
        })
        .collect();
    Ok(AuthRun { trials, stats })
}
