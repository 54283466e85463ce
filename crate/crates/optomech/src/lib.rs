//! Gaussian dynamics of two mechanical resonators coupled to one
//! bichromatically driven cavity mode.
//!
//! The crate models the linearized optomechanical system in which a single
//! cavity mode, driven on the blue sideband of one mechanical resonator and
//! the red sideband of the other, mediates a two-mode-squeezing interaction
//! that entangles the resonators. It provides:
//!
//! - [`gaussian`]: covariance-matrix algebra, symplectic and Bogoliubov
//!   transforms, and logarithmic negativity;
//! - [`params`]: system parameters, effective couplings, and the static
//!   detuning shift;
//! - [`rwa`]: the resonant (rotating-wave) model: drift/diffusion assembly,
//!   stability, exact covariance propagation, Lyapunov steady states, and
//!   the analytic Bogoliubov-mode steady state;
//! - [`closed_form`]: dissipationless normal-mode dynamics, stroboscopic
//!   entanglement, and the equal-coupling geometric-phase map;
//! - [`mean_field`]: the classical mean-field amplitudes expanded as
//!   exponential series in powers of the single-photon coupling;
//! - [`full_model`]: the time-periodic linearized model including
//!   counter-rotating terms, its covariance propagation, and Floquet
//!   stability analysis;
//! - [`detection`]: simulated homodyne readout of the mechanical state via
//!   weak probe modes and statistical reconstruction of the covariance
//!   matrix.
//!
//! Conventions: quadratures x = (b + b')/sqrt(2), p = (b - b')/(i sqrt(2))
//! with vacuum variance 1/2 and hbar = 1; all rates and frequencies in 1/s;
//! logarithmic negativity uses the natural logarithm.

pub mod closed_form;
pub mod detection;
pub mod full_model;
pub mod gaussian;
pub mod linalg;
pub mod mean_field;
pub mod params;
pub mod rwa;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
