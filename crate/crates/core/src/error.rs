use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(
        "transverse wavevector {q:.4e} rad/m exceeds the signal wavenumber {k0:.4e} rad/m; use a smaller q_max"
    )]
    WavevectorOutOfRange { q: f64, k0: f64 },

    #[error(
        "azimuthal sampling too coarse: {n_phi} samples leave {tail:.3e} of the weight above order {n_max}"
    )]
    NyquistViolation { n_phi: usize, n_max: usize, tail: f64 },

    #[error("SVD did not converge for azimuthal order {order}")]
    SvdFailure { order: i32 },

    #[error("no Schmidt mode with m = {m}, n = {n}")]
    MissingMode { m: usize, n: i32 },

    #[error("empty eigenvalue spectrum")]
    EmptySpectrum,

    #[error("gain overflow: G*sqrt(lambda_00) = {0:.1} exceeds 700")]
    GainOverflow(f64),

    #[error("g2 = {0} does not describe a thermal multimode field (needs g2 > 1)")]
    NonThermalG2(f64),

    #[error("grid mismatch between {0}")]
    GridMismatch(&'static str),

    #[error("mode index sets do not match ({0} vs {1} modes)")]
    ModeCountMismatch(usize, usize),

    #[error("zero photon number after the fiber")]
    ZeroPhotonNumber,

    #[error("correlator identity violated: g2_ss evaluated to {0:.15}")]
    CorrelatorIdentity(f64),

    #[error("root bracket does not contain a solution: {0}")]
    NoRoot(String),
}

pub type Result<T> = std::result::Result<T, Error>;
