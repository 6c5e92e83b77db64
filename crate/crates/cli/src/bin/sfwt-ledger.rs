//! Simulated ledger node behind the HTTP facade.

use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;
use sfwt_core::fixtures;
use sfwt_core::ledger::{ChainConfig, Genesis, Ledger, SharedLedger};
use sfwt_core::types::Address;
use sfwt_net::ledger_server::{serve_ledger, LedgerServerConfig};

#[derive(Debug, Parser)]
#[command(name = "sfwt-ledger", about = "Simulated ledger node", version)]
struct Cli {
    #[arg(long, default_value = "127.0.0.1:8545")]
    listen_addr: String,
    #[arg(long, default_value_t = 10)]
    block_interval: u64,
    /// Genesis JSON: {accounts: [{address, balanceWei}], sfwtOperator, sfwtAdmins}.
    #[arg(long)]
    genesis: Option<PathBuf>,
    /// Extra funded account, ADDRESS=WEI; repeatable.
    #[arg(long, value_parser = parse_fund)]
    fund: Vec<(Address, u128)>,
    /// Simulated seconds per wall-clock second; 0 freezes the clock.
    #[arg(long, default_value_t = 1.0)]
    time_scale: f64,
    /// Accept POST /chain/advance.
    #[arg(long)]
    allow_advance: bool,
    /// Append every event as a JSON line to this file.
    #[arg(long)]
    event_log: Option<PathBuf>,
    /// Keep an audit trail of access-check reads.
    #[arg(long)]
    audit_reads: bool,
}

fn parse_fund(s: &str) -> Result<(Address, u128), String> {
    let (a, w) = s.split_once('=').ok_or("expected ADDRESS=WEI")?;
    Ok((
        a.parse().map_err(|e| format!("{e}"))?,
        w.parse().map_err(|e| format!("{e}"))?,
    ))
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let mut genesis = match &cli.genesis {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p).with_context(|| format!("{}", p.display()))?)
            .context("genesis")?,
        None => Genesis::new(fixtures::fig3_owner()),
    };
    for (addr, wei) in &cli.fund {
        genesis = genesis.fund(*addr, *wei);
    }
    let config = ChainConfig {
        event_log: cli.event_log.clone(),
        audit_reads: cli.audit_reads,
        ..ChainConfig::with_interval(cli.block_interval)
    };
    let ledger = SharedLedger::new(Ledger::new(config, &genesis)?);
    let listener = tokio::net::TcpListener::bind(&cli.listen_addr).await?;
    println!("listening on {}", listener.local_addr()?);
    tracing::info!(operator = %genesis.sfwt_operator, "ledger up");
    let server_cfg = LedgerServerConfig {
        allow_advance: cli.allow_advance,
        time_scale: (cli.time_scale > 0.0).then_some(cli.time_scale),
    };
    serve_ledger(listener, ledger, server_cfg, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}
