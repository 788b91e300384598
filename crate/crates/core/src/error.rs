use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Adaptive quadrature ran out of refinement budget.
    #[error(
        "quadrature did not converge: estimated error {error_estimate:.3e} \
         against target {target:.3e} after {panels} panels"
    )]
    Quadrature {
        error_estimate: f64,
        target: f64,
        panels: usize,
    },

    /// Every pump amplitude cancelled.
    #[error("degenerate pump: amplitudes sum to zero norm")]
    DegeneratePump,

    /// A spectrum could not be normalized within the maximum OAM support.
    #[error("spectrum did not converge: tail mass {tail_mass:.3e} beyond |ell| <= {max_ell}")]
    NonConvergentSpectrum { tail_mass: f64, max_ell: i32 },

    /// A scan point failed; carries the grid coordinates.
    #[error("at gamma_s = {gamma_s}, gamma_i = {gamma_i}: {source}")]
    ScanPoint {
        gamma_s: f64,
        gamma_i: f64,
        #[source]
        source: Box<Error>,
    },

    /// Malformed pump description.
    #[error("pump file line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Quadrature { .. }
            | Error::NonConvergentSpectrum { .. } => true,
            Error::ScanPoint { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
