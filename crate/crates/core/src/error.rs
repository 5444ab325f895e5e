use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
///
/// Variants split into two families: [`Error::is_validation`] covers bad
/// inputs that a caller can fix, everything else is a numerical failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("k = 0 is a branch point of the Siegert function")]
    ZeroWavenumber,

    #[error("exponent {exponent:.1} exceeds the overflow guard")]
    Overflow { exponent: f64 },

    #[error("energy {energy} sits on a lead band edge (E = ±2J)")]
    BandEdge { energy: Complex64 },

    #[error("zero of the contour function too close to the boundary of box [{re_min}, {re_max}]x[{im_min}, {im_max}]")]
    BoundaryProximity {
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
    },

    #[error("Newton iteration did not converge after {iterations} steps (last z = {last}, |f| = {residual:e})")]
    NoConvergence {
        iterations: usize,
        last: Complex64,
        residual: f64,
    },

    #[error("Newton converged to E = {energy} on the sheet of the opposite branch")]
    OffBranch { energy: Complex64 },

    #[error("matrix is too close to an exceptional point (eigenvector condition number {condition:e})")]
    ExceptionalPoint { condition: f64 },

    #[error("spurious pole: wavefunction matching residual {residual:e} exceeds tolerance")]
    SpuriousPole { residual: f64 },

    #[error("lattice of {sites} sites too small: the wave front reaches the boundary before t = {t_max}")]
    BoundaryReflection { sites: usize, t_max: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed or out-of-contract input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::InvalidModel(_)
                | Error::NonFinite(_)
                | Error::ZeroWavenumber
                | Error::BoundaryReflection { .. }
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
