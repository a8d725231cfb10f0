use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use adaptalearn::adaptation::AdaptationConfig;
use adaptalearn::service::{http, Service, ServiceConfig};
use clap::Parser;

/// Serves the adaptive learning JSON API.
#[derive(Parser)]
#[command(name = "adaptalearn-server", version)]
struct Cli {
    /// Directory for ontologies, accounts, the event log and survey responses.
    #[arg(long, default_value = "data")]
    data_dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// User ids that receive the admin role at registration. Repeatable.
    #[arg(long = "admin")]
    admins: Vec<String>,
    /// Monitor scan period in seconds.
    #[arg(long, default_value_t = 30)]
    period: u64,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let service = Arc::new(Service::new(ServiceConfig {
        data_dir: Some(cli.data_dir),
        adaptation: AdaptationConfig { ticker_period: Duration::from_secs(cli.period.max(1)), ..AdaptationConfig::default() },
        admins: cli.admins,
        ..ServiceConfig::default()
    })?);

    // Drives Monitor tickers off the wall clock.
    let pump = service.clone();
    tokio::spawn(async move {
        let mut every = tokio::time::interval(Duration::from_secs(1));
        loop {
            every.tick().await;
            let svc = pump.clone();
            let _ = tokio::task::spawn_blocking(move || svc.platform().run_due()).await;
        }
    });

    let listener = tokio::net::TcpListener::bind(cli.addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, http::router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
