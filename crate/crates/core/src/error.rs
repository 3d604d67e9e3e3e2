use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad parameters, grids or flags.
    #[error("configuration error: {0}")]
    Config(String),

    /// A user-supplied function violated its declared contract.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("flow inversion failed to converge at r = {r}, z = {z}")]
    Inversion { r: f64, z: f64 },

    /// Any error raised while integrating, tagged with the model time.
    #[error("at t = {t}: {source}")]
    At {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "averaged drift unavailable: drift has neither an analytic mean nor a period, \
         so the bounded-G averaging condition cannot be checked"
    )]
    UnsupportedDrift,

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Trajectories from different grids or different noise realizations.
    #[error("comparison error: {0}")]
    Comparison(String),

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by the caller's configuration rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        if let Error::At { source, .. } = self {
            return source.is_validation();
        }
        matches!(
            self,
            Error::Config(_)
                | Error::Validation(_)
                | Error::UnsupportedDrift
                | Error::Unsupported(_)
                | Error::Input(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
