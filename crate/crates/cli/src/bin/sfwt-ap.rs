//! Access-point gatekeeper daemon.

use std::path::PathBuf;
use std::time::Duration;

use clap::Parser;
use sfwt_core::gatekeeper::Gatekeeper;
use sfwt_net::ap_server::serve_ap;
use sfwt_net::{remote_chain, ApDaemonConfig, ApState};

#[derive(Debug, Parser)]
#[command(name = "sfwt-ap", about = "Access point gatekeeper", version)]
struct Cli {
    /// JSON or key=value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ap_id: Option<String>,
    #[arg(long)]
    ledger_endpoint: Option<String>,
    #[arg(long)]
    listen_addr: Option<String>,
    #[arg(long)]
    sweep_interval: Option<u64>,
    #[arg(long)]
    session_ttl: Option<u64>,
    #[arg(long, env = "SFWT_ADMIN_TOKEN")]
    admin_token: Option<String>,
    #[arg(long)]
    tick_ms: Option<u64>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(p) => ApDaemonConfig::load(p)?,
        None => ApDaemonConfig::default(),
    };
    if let Some(v) = cli.ap_id {
        cfg.ap.ap_id = v;
    }
    if let Some(v) = cli.ledger_endpoint {
        cfg.ledger_endpoint = v;
    }
    if let Some(v) = cli.listen_addr {
        cfg.listen_addr = v;
    }
    if let Some(v) = cli.sweep_interval {
        cfg.ap.sweep_interval_sec = v;
    }
    if let Some(v) = cli.session_ttl {
        cfg.ap.session_ttl_sec = v;
    }
    if let Some(v) = cli.admin_token {
        cfg.admin_token = Some(v);
    }
    if let Some(v) = cli.tick_ms {
        cfg.tick_ms = v;
    }
    cfg.validate()?;

    let chain = remote_chain(&cfg.ledger_endpoint);
    let state = ApState::new(Gatekeeper::new(cfg.ap.clone(), chain), cfg.admin_token.clone());
    let listener = tokio::net::TcpListener::bind(&cfg.listen_addr).await?;
    println!("listening on {}", listener.local_addr()?);
    tracing::info!(ap = %cfg.ap.ap_id, ledger = %cfg.ledger_endpoint, "gatekeeper up");
    serve_ap(listener, state, Duration::from_millis(cfg.tick_ms), async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}
