use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use attache_service::config::{DEFAULT_HOST, DEFAULT_PORT};
use attache_service::report::validation_summary;
use attache_service::{
    build_report, load, router, write_report, AppState, DataSource, ReportKind, RouterOptions,
    ServiceConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "attache",
    version,
    about = "Community attachment survey explorer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Survey export (delimiter-separated text with a header row).
    #[arg(long, env = "ATTACHE_DATA")]
    data: PathBuf,
    /// Column mapping (TOML).
    #[arg(long, env = "ATTACHE_MAPPING")]
    mapping: PathBuf,
    /// Community registry CSV; the built-in registry when omitted.
    #[arg(long, env = "ATTACHE_REGISTRY")]
    registry: Option<PathBuf>,
    #[arg(long, env = "ATTACHE_LOG_LEVEL", default_value = "info")]
    log_level: String,
}

impl DataArgs {
    fn source(&self) -> DataSource {
        DataSource {
            data_path: self.data.clone(),
            mapping_path: self.mapping.clone(),
            registry_path: self.registry.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Serve the JSON API (and optionally the dashboard assets).
    Serve {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, env = "ATTACHE_HOST", default_value = DEFAULT_HOST)]
        host: String,
        #[arg(long, env = "ATTACHE_PORT", default_value_t = DEFAULT_PORT, value_parser = clap::value_parser!(u16).range(1..))]
        port: u16,
        /// Static files served outside `/api`.
        #[arg(long, env = "ATTACHE_ASSETS")]
        assets: Option<PathBuf>,
        /// Comma-separated CORS allow-list; any origin when omitted.
        #[arg(long, env = "ATTACHE_CORS_ORIGINS", value_delimiter = ',')]
        cors_origins: Vec<String>,
    },
    /// Write one of the published tables as delimiter-separated text.
    Report {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum)]
        kind: ReportKind,
        /// Output file; standard output when omitted.
        #[arg(long, env = "ATTACHE_REPORT_OUT")]
        out: Option<PathBuf>,
        #[arg(long, env = "ATTACHE_REPORT_DELIMITER", default_value = ",")]
        delimiter: char,
    },
    /// Ingest the data and print counts and registry diagnostics.
    Validate {
        #[command(flatten)]
        data: DataArgs,
    },
}

fn init_logging(level: &str) {
    let filter = EnvFilter::try_new(level).unwrap_or_else(|_| EnvFilter::new("info"));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Serve {
            data,
            host,
            port,
            assets,
            cors_origins,
        } => {
            init_logging(&data.log_level);
            let config = ServiceConfig {
                source: data.source(),
                listen_host: host,
                listen_port: port,
                static_assets_path: assets,
                log_level: data.log_level.clone(),
                cors_origins,
            };
            serve(config)
        }
        Command::Report {
            data,
            kind,
            out,
            delimiter,
        } => {
            init_logging(&data.log_level);
            let delimiter =
                u8::try_from(delimiter).context("delimiter must be a single ASCII character")?;
            let dataset = load(&data.source())?;
            let report = build_report(&dataset.snapshot, kind)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path)
                        .with_context(|| format!("creating `{}`", path.display()))?;
                    write_report(&report, file, delimiter)?;
                }
                None => write_report(&report, std::io::stdout().lock(), delimiter)?,
            }
            Ok(())
        }
        Command::Validate { data } => {
            init_logging(&data.log_level);
            let dataset = load(&data.source())?;
            let mut out = std::io::stdout().lock();
            out.write_all(validation_summary(&dataset.table, &dataset.snapshot).as_bytes())?;
            Ok(())
        }
    }
}

#[tokio::main]
async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    config.validate()?;
    let addr = config.socket_addr()?;
    let dataset = load(&config.source)?;
    let p = dataset.table.provenance();
    tracing::info!(
        accepted = p.accepted,
        rejected = p.rejected,
        "snapshot built"
    );
    let state = AppState::new(dataset.snapshot, p.clone());
    let app = router(
        state,
        &RouterOptions {
            assets: config.static_assets_path.clone(),
            cors_origins: config.cors_origins.clone(),
        },
    );
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
