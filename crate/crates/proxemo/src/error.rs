use std::path::{Path, PathBuf};

use proxemo_core::Error as CoreError;

/// Process exit codes, one per failure class.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad command-line usage (clap's own code).
    pub const USAGE: i32 = 2;
    pub const MISSING_FILE: i32 = 3;
    pub const MALFORMED_FILE: i32 = 4;
    pub const CONFIG: i32 = 5;
    pub const SHAPE: i32 = 6;
    pub const WRITE: i32 = 7;
    /// Any other pipeline failure (invalid data, training errors, ...).
    pub const PIPELINE: i32 = 8;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Malformed { path: PathBuf, message: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn malformed(path: &Path, message: impl Into<String>) -> Self {
        CliError::Malformed {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } => exit::MISSING_FILE,
            CliError::Write { .. } => exit::WRITE,
            CliError::Malformed { .. } => exit::MALFORMED_FILE,
            CliError::Config(_) | CliError::Core(CoreError::Config(_)) => exit::CONFIG,
            CliError::Core(CoreError::Shape(_)) => exit::SHAPE,
            CliError::Core(_) => exit::PIPELINE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    let bytes = read_bytes(path)?;
    String::from_utf8(bytes).map_err(|_| CliError::malformed(path, "not valid UTF-8"))
}

/// Write `bytes`, creating parent directories as needed.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let wrap = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(wrap)?;
    }
    std::fs::write(path, bytes).map_err(wrap)
}
