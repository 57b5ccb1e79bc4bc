use std::path::PathBuf;

use crate::corpus::Link;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line count mismatch: {source_path} has {source_lines} lines, {target_path} has {target_lines}")]
    LineCountMismatch {
        source_path: PathBuf,
        source_lines: usize,
        target_path: PathBuf,
        target_lines: usize,
    },

    #[error("{path}:{line}: empty sentence")]
    EmptySentence { path: PathBuf, line: usize },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("token {0:?} is empty or contains whitespace")]
    BadToken(String),

    #[error("link {link} out of bounds for a {l}x{m} pair")]
    LinkOutOfBounds { link: Link, l: usize, m: usize },

    #[error("link {0} already present")]
    LinkPresent(Link),

    #[error("link {0} not present")]
    LinkAbsent(Link),

    #[error("pair has {links} candidate links, enumeration is capped at {cap}")]
    EnumerationGuard { links: usize, cap: usize },

    #[error("length mismatch: {left} vs {right} {what}")]
    LengthMismatch {
        left: usize,
        right: usize,
        what: &'static str,
    },

    #[error("top-n set is empty")]
    EmptyTopN,

    #[error("no pairs available for {0}")]
    EmptyCorpus(&'static str),

    #[error("{0} vocabulary is empty")]
    EmptyVocab(&'static str),

    #[error("noise rate {0} outside (0, 1]")]
    NoiseRate(f64),

    #[error("weights diverged (non-finite) during epoch {epoch}")]
    Diverged { epoch: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
