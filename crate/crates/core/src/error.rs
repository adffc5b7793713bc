// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("numerical null space has dimension {dimension}; expected exactly one")]
    NullSpaceDegenerate { dimension: usize },

    #[error("matrix has no numerical null vector")]
    NoNullVector,

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("unsupported level scheme: {0}")]
    UnsupportedScheme(String),

    #[error("invalid level label: {0}")]
    InvalidLabel(String),

    #[error("scheme mismatch: {0}")]
    SchemeMismatch(String),

    #[error("emitter positions coincide; near-field couplings diverge")]
    CoincidentPositions,

    #[error("collective ZPL decay matrix has negative eigenvalue {min_eigenvalue:e}")]
    UnphysicalRates { min_eigenvalue: f64 },

    #[error("non-positive rate: {0}")]
    NonPositiveRates(String),

    #[error("mean intensity of the selected filter vanishes")]
    ZeroIntensity,

    #[error("dressed states undefined for V = 0 and delta = 0")]
    DegenerateDressing,

    #[error("time grid is not uniform on the convolution segment")]
    NonUniformGrid,

    #[error("filter recorded no clicks")]
    ZeroClicks,

    #[error("correlator has imaginary residue {0:e} relative to its magnitude")]
    ImaginaryResidue(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
