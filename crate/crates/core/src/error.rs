use std::io;

use crate::grid::{Dims, Voxel};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("voxel ({}, {}, {}) is outside a {}x{}x{} volume", .voxel.x, .voxel.y, .voxel.z, .dims.nx, .dims.ny, .dims.nz)]
    OutOfBounds { voxel: Voxel, dims: Dims },

    #[error("volume dimensions must be positive, got {0}x{1}x{2}")]
    EmptyDims(usize, usize, usize),

    #[error("data length {actual} does not match dimensions (expected {expected})")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("voxel value {value} at linear index {index} is not allowed here")]
    InvalidValue { index: usize, value: f64 },

    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimensionMismatch(Dims, Dims),

    #[error("neighborhood configuration {0:#09x} has a background center voxel")]
    BackgroundCenter(u32),

    #[error("metric is undefined for an empty centerline")]
    EmptyCenterline,

    #[error("inconsistent topology: derived b1 = {b0} + {b2} - {chi} is negative")]
    InconsistentTopology { b0: i64, b2: i64, chi: i64 },

    #[error("invalid phantom spec: {0}")]
    InvalidSpec(String),

    #[error("phantom does not fit: {0}")]
    PhantomDoesNotFit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bad volume file: {0}")]
    Format(String),

    #[error("unsupported datatype code {0}")]
    UnsupportedDatatype(i16),

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: usize, actual: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}
