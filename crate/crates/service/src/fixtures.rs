//! Named fixture files in one directory. Clients pick fixtures by name only;
//! names never carry path separators.

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    Model,
    Bindings,
    Sut,
}

impl FixtureKind {
    pub fn suffix(self) -> &'static str {
        match self {
            FixtureKind::Model => ".pnml",
            FixtureKind::Bindings => ".bindings.json",
            FixtureKind::Sut => ".sut.json",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::Model => "model",
            FixtureKind::Bindings => "bindings",
            FixtureKind::Sut => "sut",
        }
    }
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("`{0}` is not a valid fixture name (letters, digits, `_` and `-` only)")]
    InvalidName(String),
    #[error("no {} fixture named `{name}`", kind.name())]
    NotFound { kind: FixtureKind, name: String },
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

pub fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Available fixture names of each kind, sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Catalog {
    pub models: Vec<String>,
    pub bindings: Vec<String>,
    pub suts: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct FixtureStore {
    dir: PathBuf,
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, kind: FixtureKind, name: &str) -> Result<PathBuf, FixtureError> {
        if !valid_name(name) {
            return Err(FixtureError::InvalidName(name.to_string()));
        }
        Ok(self.dir.join(format!("{name}{}", kind.suffix())))
    }

    pub fn read(&self, kind: FixtureKind, name: &str) -> Result<String, FixtureError> {
        let path = self.path(kind, name)?;
        std::fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => FixtureError::NotFound {
                kind,
                name: name.to_string(),
            },
            _ => FixtureError::Io {
                path,
                message: e.to_string(),
            },
        })
    }

    pub fn catalog(&self) -> Result<Catalog, FixtureError> {
        let entries = std::fs::read_dir(&self.dir).map_err(|e| FixtureError::Io {
            path: self.dir.clone(),
            message: e.to_string(),
        })?;
        let mut catalog = Catalog::default();
        for entry in entries.flatten() {
            let file = entry.file_name().to_string_lossy().into_owned();
            // Longest suffix first: `.bindings.json` and `.sut.json` both end in `.json`.
            for (kind, list) in [
                (FixtureKind::Bindings, &mut catalog.bindings),
                (FixtureKind::Sut, &mut catalog.suts),
                (FixtureKind::Model, &mut catalog.models),
            ] {
                if let Some(name) = file.strip_suffix(kind.suffix()) {
                    if valid_name(name) {
                        list.push(name.to_string());
                    }
                    break;
                }
            }
        }
        catalog.models.sort();
        catalog.bindings.sort();
        catalog.suts.sort();
        Ok(catalog)
    }
}
