//! Simulation and spectral analysis of one-dimensional nonlinear quantum
//! walks.
//!
//! The walk evolves by `u(t+1) = S Ĉ u(t)`, where the coin `Ĉ` multiplies
//! each site by `C_N(g|u1(x)|^2, g|u2(x)|^2)` and the shift `S` moves the
//! first component left and the second right. The crate
//!
//! - evolves the nonlinear dynamics ([`dynamics`]),
//! - extracts the asymptotic state `u+` of a scattering trajectory
//!   ([`scattering`]),
//! - computes the weak-limit velocity density `w(v) f_K(v; |a|)` from `u+`
//!   ([`spectral`]), and
//! - compares the empirical law of `X_t / t` with that density
//!   ([`wlt`]).

pub mod cli;
pub mod coins;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod lattice;
pub mod mat2;
pub mod scattering;
pub mod spectral;
pub mod wlt;

pub use coins::{BaseCoin, CoinFamily, NonlinearCoinModel};
pub use dynamics::{evolve, step, step_linear, step_linear_inverse, WalkConfig, Walker};
pub use error::{Error, Result};
pub use lattice::{LatticeState, SiteDistribution, Spinor};
pub use mat2::Mat2;
pub use scattering::{back_propagated, extract_asymptotic, ScatteringResult};
pub use spectral::{konno_density, limit_density, Band, Branch, VelocityDensity};
pub use wlt::{verify, ConvergenceReport, EmpiricalDistribution, VerifyOptions};
