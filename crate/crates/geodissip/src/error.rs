use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "field magnitude {magnitude:.3e} below gap tolerance at (phi1={phi1:.6}, phi2={phi2:.6})"
    )]
    DegenerateField {
        magnitude: f64,
        phi1: f64,
        phi2: f64,
    },

    #[error("vector is not unit length: |v| = {norm}")]
    NotUnit { norm: f64 },

    #[error("rotating-frame matrix is numerically singular (det = {det:.3e})")]
    SingularMatrix { det: f64 },

    #[error("integration step dt = {dt} exceeds stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("gap closes on the phase torus: min |d| = {min_gap:.3e} near (phi1={phi1:.6}, phi2={phi2:.6})")]
    GapClosure { min_gap: f64, phi1: f64, phi2: f64 },

    #[error(
        "Chern number did not stabilize under grid doubling ({coarse} at n={n}, {fine} at 2n)"
    )]
    UnresolvedTopology { coarse: i64, fine: i64, n: usize },

    #[error("spectrum is degenerate: gap {gap:.3e} between bands {lower} and {upper}")]
    DegenerateSpectrum {
        gap: f64,
        lower: usize,
        upper: usize,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
