use thiserror::Error;

/// Errors reported by the physics layer.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor argument violates its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A covariance matrix violates the uncertainty relation beyond the
    /// accepted tolerance. `min_eig` is the most negative eigenvalue of
    /// C + (i/2) Omega.
    #[error("unphysical covariance matrix: min eigenvalue of C + (i/2) Omega is {min_eig:.3e}")]
    UnphysicalCovariance { min_eig: f64 },

    /// A steady state was requested for a drift with an unstable mode.
    #[error("drift matrix is unstable: max Re eigenvalue = {max_re_eig:.6e} 1/s")]
    UnstableDrift { max_re_eig: f64 },

    /// The steady-state residual check failed, indicating an
    /// ill-conditioned Lyapunov system.
    #[error("Lyapunov residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    LyapunovResidual { residual: f64, tolerance: f64 },

    /// A mean-field integration kernel hit a vanishing denominator that the
    /// periodic (steady) ansatz cannot absorb.
    #[error(
        "resonant secular term at order {order}, harmonic {harmonic}: \
         |denominator| = {magnitude:.3e} 1/s is below the degeneracy threshold"
    )]
    ResonantSecularTerm {
        order: usize,
        harmonic: i64,
        magnitude: f64,
    },

    /// An exponential series outgrew the configured term cap.
    #[error("exponential series exceeded the term cap: {count} terms, cap {cap}")]
    SeriesTermCap { count: usize, cap: usize },

    /// The mechanical frequencies admit no common period within the
    /// supported rational search range.
    #[error("incommensurate mechanical frequencies: {reason}")]
    IncommensurateFrequencies { reason: String },

    /// Covariance propagation produced a non-finite entry, typically after
    /// an instability has amplified the state beyond f64 range.
    #[error("covariance became non-finite at t = {t:.6e} s")]
    NonFiniteCovariance { t: f64 },

    /// Homodyne records do not determine every second moment.
    #[error("detection records leave moments undetermined: {missing:?}")]
    MissingMoments { missing: Vec<&'static str> },
}
