use thiserror::Error;

use crate::lattice::Vertex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice dimension {h}x{w}: both sides must be at least 2")]
    InvalidDimension { h: usize, w: usize },

    #[error("vertex ({}, {}) lies outside the {h}x{w} lattice", .vertex.row, .vertex.col)]
    InvalidVertex { vertex: Vertex, h: usize, w: usize },

    #[error("root ({}, {}) is not in the region", .0.row, .0.col)]
    InvalidRoot(Vertex),

    #[error("region is not connected")]
    DisconnectedRegion,

    #[error("mask covers the whole lattice")]
    EmptyComplement,

    #[error("{what} exceeds the size limit ({size} > {limit})")]
    SizeLimit { what: &'static str, size: usize, limit: usize },

    #[error("mask is empty")]
    EmptyMask,

    #[error("mask is not connected")]
    DisconnectedMask,

    #[error("unmasked region is not connected")]
    DisconnectedComplement,

    #[error("every lattice corner is masked")]
    AllCornersMasked,

    #[error("masking ratio {0} is outside (0, 1)")]
    InvalidRatio(f64),

    #[error("masking ratio {ratio} needs {size} masked vertices but at most {max} fit while keeping corners free")]
    MaskTooLarge { ratio: f64, size: usize, max: usize },

    #[error("mask size {actual} does not match ceil(ratio * N) = {expected}")]
    MaskSizeMismatch { expected: usize, actual: usize },

    #[error("no valid mask after {attempts} attempts")]
    MaskGenerationFailed { attempts: usize },

    #[error("target ({}, {}) is already observed", .0.row, .0.col)]
    InvalidTarget(Vertex),

    #[error("vertex ({}, {}) is not a site of the model", .0.row, .0.col)]
    NotInModel(Vertex),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("at masking ratio {ratio}: {source}")]
    AtRatio { ratio: f64, source: Box<Error> },

    #[error(transparent)]
    Format(#[from] FormatError),
}

/// Failures while reading the text interchange formats.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("unsupported format version `{0}`")]
    UnsupportedVersion(String),

    #[error("bad dimensions line: {0}")]
    BadDimensions(String),

    #[error("expected {expected} indices, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("payload is not a permutation: index {0} repeats")]
    NotPermutation(usize),

    #[error("bad ratio line: {0}")]
    BadRatio(String),

    #[error("cannot parse `{0}` as an index")]
    BadIndex(String),

    #[error("unexpected trailing content")]
    TrailingContent,

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for FormatError {
    fn from(err: std::io::Error) -> Self {
        FormatError::Io(err.to_string())
    }
}
