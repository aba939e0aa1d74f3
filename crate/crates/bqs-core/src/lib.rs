//! Pseudospectral solver for a generalized 2D Boussinesq system with
//! fractional dissipation and a log-modified velocity law, together with the
//! Littlewood-Paley/Besov toolkit and the diagnostics that monitor the
//! quantities its a priori estimates are built from.
//!
//! The system evolves vorticity and temperature on the periodic square
//! `[0, 2pi)^2`:
//!
//! ```text
//! d_t omega + u . grad omega + nu Lambda^alpha omega = d_x1 theta
//! u = grad^perp psi,   Laplace psi = Lambda^sigma (log(I - Laplace))^gamma omega
//! d_t theta + u . grad theta + kappa Lambda^beta theta = 0
//! ```
//!
//! Everything is spectral: `Lambda^s`, the modified Riesz transform
//! `R_alpha = Lambda^{-alpha} d_x1`, the velocity law and the dyadic blocks
//! are exact Fourier multipliers on the integer lattice.

pub mod besov;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod multipliers;
pub mod oracle;
pub mod output;
pub mod regions;
pub mod snapshot;
pub mod spectral;

pub use error::BqsError;

/// Convenience result alias used across the crate.
pub type Result<T> = std::result::Result<T, BqsError>;
