use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,
    #[error("input has {0} elements, more than a 32-bit index can address")]
    TooLarge(usize),
    #[error("value at position {index} is NaN")]
    NotANumber { index: usize },
    #[error("invalid range [{left}, {right}] for an array of length {len}")]
    InvalidRange {
        left: usize,
        right: usize,
        len: usize,
    },
    #[error("rank {rank} is outside 1..={len}")]
    InvalidRank { rank: usize, len: usize },
    #[error("bit position {pos} is past the end ({len})")]
    BitPosition { pos: usize, len: usize },
    #[error("node at level {level} is not materialized; build the tree eagerly first")]
    NotMaterialized { level: usize },
    #[error("handle does not refer to a live element")]
    DeadHandle,
    #[error("query endpoints are in reverse list order")]
    ReversedRange,
    #[error("structure is empty")]
    EmptyStructure,
    #[error("radius {radius} is too large for a {width}x{height} image")]
    RadiusTooLarge {
        radius: usize,
        width: usize,
        height: usize,
    },
    #[error("radius must be at least 1")]
    ZeroRadius,
    #[error("image dimensions {width}x{height} do not match {pixels} pixels")]
    ImageShape {
        width: usize,
        height: usize,
        pixels: usize,
    },
    #[error("malformed PGM: {0}")]
    Pgm(String),
}
