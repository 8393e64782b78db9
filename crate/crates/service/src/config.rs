use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

use attache_core::ingestion::{build_snapshot, parse_survey_path, ColumnMapping, ResponseTable};
use attache_core::{AnalyticsSnapshot, CommunityRegistry};

pub const DEFAULT_HOST: &str = "127.0.0.1";
pub const DEFAULT_PORT: u16 = 8787;

/// Where the data lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataSource {
    pub data_path: PathBuf,
    pub mapping_path: PathBuf,
    /// Defaults to the built-in registry.
    pub registry_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub source: DataSource,
    pub listen_host: String,
    pub listen_port: u16,
    pub static_assets_path: Option<PathBuf>,
    pub log_level: String,
    pub cors_origins: Vec<String>,
}

fn readable_file(path: &Path, what: &str) -> anyhow::Result<()> {
    std::fs::File::open(path)
        .with_context(|| format!("{what} `{}` is not readable", path.display()))?;
    Ok(())
}

impl DataSource {
    pub fn validate(&self) -> anyhow::Result<()> {
        readable_file(&self.data_path, "data file")?;
        readable_file(&self.mapping_path, "mapping file")?;
        if let Some(r) = &self.registry_path {
            readable_file(r, "registry file")?;
        }
        Ok(())
    }
}

impl ServiceConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        self.source.validate()?;
        if self.listen_port == 0 {
            bail!("port must be in 1..=65535");
        }
        if let Some(dir) = &self.static_assets_path {
            if !dir.is_dir() {
                bail!("assets directory `{}` does not exist", dir.display());
            }
        }
        self.socket_addr()?;
        Ok(())
    }

    pub fn socket_addr(&self) -> anyhow::Result<SocketAddr> {
        format!("{}:{}", self.listen_host, self.listen_port)
            .parse()
            .or_else(|_| format!("[{}]:{}", self.listen_host, self.listen_port).parse())
            .with_context(|| format!("`{}` is not a valid listen address", self.listen_host))
    }
}

/// An ingested table and its snapshot.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub table: ResponseTable,
    pub snapshot: AnalyticsSnapshot,
}

pub fn load(source: &DataSource) -> anyhow::Result<Dataset> {
    source.validate()?;
    let registry = match &source.registry_path {
        Some(p) => CommunityRegistry::from_path(p)
            .with_context(|| format!("loading registry `{}`", p.display()))?,
        None => CommunityRegistry::default_registry(),
    };
    let mapping = ColumnMapping::from_path(&source.mapping_path)
        .with_context(|| format!("loading mapping `{}`", source.mapping_path.display()))?;
    let table = parse_survey_path(&source.data_path, &mapping, &registry)
        .with_context(|| format!("ingesting `{}`", source.data_path.display()))?;
    let snapshot = build_snapshot(&table);
    Ok(Dataset { table, snapshot })
}
