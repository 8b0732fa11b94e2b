use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Where in an input file a parse error was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    ByteOffset(u64),
    Line(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::ByteOffset(off) => write!(f, "byte offset {off}"),
            Location::Line(line) => write!(f, "line {line}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Parameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported channel count {got} for {what}")]
    Channels { what: &'static str, got: usize },

    #[error("site ({x}, {y}) is outside the {width}x{height} grid")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("duplicate sparse site ({x}, {y})")]
    DuplicateSite { x: usize, y: usize },

    #[error("input has no confident samples")]
    NoSamples,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("image has {pixels} pixels, exact oracle is limited to {limit}")]
    OracleScale { pixels: usize, limit: usize },

    #[error("evaluation mask selects no pixels")]
    EmptyMask,

    #[error("{}: malformed {format} at {location}: {message}", path.display())]
    Parse {
        path: PathBuf,
        format: &'static str,
        location: Location,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures caused by reading or writing files.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Parse { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
