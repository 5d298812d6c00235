//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Torus Hilbert spaces need at least two lattice sites.
    #[error("Hilbert space dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    /// Production runs are capped to keep the 4-D classical grid in memory.
    #[error("dimension {0} exceeds the supported maximum of 128")]
    DimensionTooLarge(usize),

    #[error("torus map must have unit determinant, got {0}")]
    NotAreaPreserving(i64),

    /// The position-representation propagator divides by `N * m12`.
    #[error("torus map with m12 = 0 has no position-representation propagator")]
    SingularPropagator,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation requires a {expected}-mode input, got {found} modes")]
    ModeMismatch { expected: usize, found: usize },

    #[error("state is not normalized: |norm - 1| = {0:.3e}")]
    NotNormalized(f64),

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    /// Separability entropies are undefined for an identically zero operator.
    #[error("spectrum contains no nonzero singular value")]
    EmptySpectrum,

    #[error("dense two-mode propagator is limited to dim <= {limit}, got {dim}")]
    DenseTooLarge { dim: usize, limit: usize },

    #[error("classical grid subdivision must be at least 2, got {0}")]
    GridTooCoarse(usize),

    #[error("subsample factor must be at least 1")]
    ZeroSubsample,

    #[error("grid has no mass")]
    EmptyGrid,

    #[error("stride must be at least 1")]
    ZeroStride,

    #[error("Wigner transform left an imaginary residue of {0:.3e}")]
    WignerResidue(f64),

    #[error("linear algebra backend: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("image encoding: {0}")]
    Image(#[from] image::ImageError),
}
