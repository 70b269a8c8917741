use thiserror::Error;

/// Errors shared by the field algebra and the evolution machinery.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field contains a non-finite entry ({0})")]
    NonFinite(String),

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("representation mismatch: {0}")]
    Representation(String),

    #[error("fractional Laplacian of negative order requires a mean-free field (mean magnitude {mean:.3e})")]
    MeanNotZero { mean: f64 },

    #[error("advective CFL bound violated at t = {t:.6e}: dt = {dt:.6e} exceeds {bound:.6e} (max speed {speed:.6e})")]
    CflViolation { t: f64, dt: f64, bound: f64, speed: f64 },

    #[error("energy blow-up guard tripped at t = {t:.6e}: energy {energy:.6e} exceeds 10x initial {initial:.6e}")]
    BlowUp { t: f64, energy: f64, initial: f64 },

    #[error("invalid time schedule: {0}")]
    Schedule(String),

    #[error("quadrature needs at least {needed} nodes in [0, t], found {found}")]
    TooFewNodes { needed: usize, found: usize },

    #[error("rate fit window [{lo:.3e}, {hi:.3e}] selects {found} points, need at least {needed}")]
    FitWindow { lo: f64, hi: f64, found: usize, needed: usize },

    #[error("rate fit requires positive values: {0}")]
    NonPositiveSeries(String),

    #[error("exponent pair (p = {p}, q = {q}) is not conjugate: 1/p + 1/q = {sum}")]
    NotConjugate { p: f64, q: f64, sum: f64 },

    #[error("cutoff support violation: {0}")]
    CutoffSupport(String),

    #[error("snapshot i/o: {0}")]
    SnapshotIo(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
