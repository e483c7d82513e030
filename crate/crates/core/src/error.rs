use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("`{0}` is not finite")]
    NonFinite(&'static str),

    #[error("pointwise evaluation is undefined for the local (delta) kernel; use its Fourier transform")]
    PointwiseLocalKernel,

    #[error("domain length {length:.4e} m is shorter than {min_ranges} interaction ranges ({min:.4e} m)")]
    DomainTooShort { length: f64, min: f64, min_ranges: f64 },

    #[error("mode k = {k:.6e} 1/m is unstable (growth rate {growth:.6e} 1/s); no steady oscillation frequency")]
    UnstableMode { k: f64, growth: f64 },

    #[error("time step {dt:.3e} s violates the stability guard: dt*max|w0+2 n_p U_k| = {product:.3e} >= {guard}")]
    StepTooLarge { dt: f64, product: f64, guard: f64 },

    #[error("field diverged at t = {t:.6e} s (fastest-growing mode near k = {k:.6e} 1/m)")]
    Diverged { t: f64, k: f64 },

    #[error("quadrature did not converge: tail estimate {tail:.3e} exceeds tolerance {tol:.3e}")]
    Quadrature { tail: f64, tol: f64 },

    #[error("record too short: {covered:.3} periods or e-folds, need {required}")]
    RecordTooShort { covered: f64, required: f64 },

    #[error(
        "signal is not a single tone: primary {primary_re:.8e}{primary_im:+.3e}i, \
         secondary {secondary_re:.8e}{secondary_im:+.3e}i 1/s"
    )]
    Beating {
        primary_re: f64,
        primary_im: f64,
        secondary_re: f64,
        secondary_im: f64,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Broad category, used by front ends to pick an exit status.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. }
            | Error::NonFinite(_)
            | Error::PointwiseLocalKernel
            | Error::DomainTooShort { .. }
            | Error::StepTooLarge { .. }
            | Error::Config(_) => ErrorKind::Config,
            Error::UnstableMode { .. }
            | Error::Diverged { .. }
            | Error::Quadrature { .. }
            | Error::RecordTooShort { .. }
            | Error::Beating { .. } => ErrorKind::Numerical,
            Error::Checkpoint(_) | Error::Io(_) => ErrorKind::Io,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numerical,
    Io,
}

pub(crate) fn finite(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(name))
    }
}

pub(crate) fn positive(name: &'static str, x: f64) -> Result<f64> {
    finite(name, x)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {x}")))
    }
}

pub(crate) fn non_negative(name: &'static str, x: f64) -> Result<f64> {
    finite(name, x)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(Error::invalid(name, format!("must be >= 0, got {x}")))
    }
}
