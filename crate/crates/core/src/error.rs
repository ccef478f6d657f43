use thiserror::Error;

/// Errors raised anywhere in the simulator stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error("frequency {frequency_ghz} GHz outside atmosphere table range [{min_ghz}, {max_ghz}] GHz")]
    OutOfTableRange {
        frequency_ghz: f64,
        min_ghz: f64,
        max_ghz: f64,
    },

    #[error("integration did not converge: {0}")]
    NonConvergent(String),

    #[error("Fock cutoff {cutoff} too small: truncated trace {trace:.9} (deficit limit {max_deficit:e})")]
    InsufficientCutoff {
        cutoff: usize,
        trace: f64,
        max_deficit: f64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("tolerance check failed: {0}")]
    Tolerance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::Csv(_) | Error::InvalidArgument(_) => 2,
            Error::Tolerance(_) => 4,
            Error::Dimension(_)
            | Error::Unphysical(_)
            | Error::OutOfTableRange { .. }
            | Error::NonConvergent(_)
            | Error::InsufficientCutoff { .. } => 3,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
