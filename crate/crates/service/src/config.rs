use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

pub const DEFAULT_MAX_SESSIONS: usize = 16;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("listen address `{0}` is not a valid host:port")]
    Listen(String),
    #[error("fixtures directory {0} does not exist")]
    MissingFixtures(PathBuf),
    #[error("max_sessions must be at least 1")]
    NoSessions,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    listen: String,
    fixtures_dir: PathBuf,
    #[serde(default = "default_max_sessions")]
    max_sessions: usize,
    #[serde(default)]
    cors: bool,
}

fn default_max_sessions() -> usize {
    DEFAULT_MAX_SESSIONS
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerConfig {
    pub listen: SocketAddr,
    pub fixtures_dir: PathBuf,
    pub max_sessions: usize,
    /// Answer cross-origin requests from any origin.
    pub cors: bool,
}

impl ServerConfig {
    /// Checked config for an existing fixtures directory.
    pub fn new(
        listen: SocketAddr,
        fixtures_dir: PathBuf,
        max_sessions: usize,
        cors: bool,
    ) -> Result<Self, ConfigError> {
        if !fixtures_dir.is_dir() {
            return Err(ConfigError::MissingFixtures(fixtures_dir));
        }
        if max_sessions == 0 {
            return Err(ConfigError::NoSessions);
        }
        Ok(Self {
            listen,
            fixtures_dir,
            max_sessions,
            cors,
        })
    }

    /// Parses TOML. A relative `fixtures_dir` is taken from `base`.
    pub fn from_toml(text: &str, path: &Path, base: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })?;
        let listen = raw
            .listen
            .parse()
            .map_err(|_| ConfigError::Listen(raw.listen.clone()))?;
        Self::new(listen, base.join(raw.fixtures_dir), raw.max_sessions, raw.cors)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, path, base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ServerConfig, ConfigError> {
        let dir = std::env::temp_dir();
        ServerConfig::from_toml(text, Path::new("c.toml"), &dir)
    }

    #[test]
    fn defaults_and_relative_dir() {
        let config = parse("listen = \"127.0.0.1:0\"\nfixtures_dir = \".\"\n").unwrap();
        assert_eq!(config.max_sessions, 16);
        assert!(!config.cors);
        assert_eq!(config.fixtures_dir, std::env::temp_dir().join("."));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(
            parse("listen = \"nowhere\"\nfixtures_dir = \".\"\n"),
            Err(ConfigError::Listen(_))
        ));
        assert!(matches!(
            parse("listen = \"127.0.0.1:99999\"\nfixtures_dir = \".\"\n"),
            Err(ConfigError::Listen(_))
        ));
        assert!(matches!(
            parse("listen = \"127.0.0.1:80\"\nfixtures_dir = \"no/such/dir\"\n"),
            Err(ConfigError::MissingFixtures(_))
        ));
        assert!(matches!(
            parse("listen = \"127.0.0.1:80\"\nfixtures_dir = \".\"\nmax_sessions = 0\n"),
            Err(ConfigError::NoSessions)
        ));
        assert!(matches!(parse("listen = 1"), Err(ConfigError::Parse { .. })));
        assert!(matches!(
            parse("listen = \"127.0.0.1:80\"\nfixtures_dir = \".\"\nport = 3\n"),
            Err(ConfigError::Parse { .. })
        ));
    }
}
