//! Numerical microlocal analysis on the periodic box: FBI transforms and
//! analytic-wavefront detection, Hamiltonian scattering and classical wave
//! operators, pseudo-spectral Schrödinger propagators, and the eikonal /
//! good-contour diagnostics that tie them together.
//!
//! The central experiment relates the analytic wavefront set of an initial
//! state `u₀` to that of the conjugated evolution
//! `u(t) = e^{itH₀} e^{−itH} u₀` through the classical wave operator: a phase
//! point `(x₀, ξ₀)` is singular for `u₀` exactly when its scattering image
//! `(x₊, ξ₊)` is singular for `u(t)`. Every stage of that pipeline is exposed
//! as a library call, a runnable example (`examples/`), and a CLI subcommand.
//!
//! Quick tour:
//!
//! - [`coeffs`]: metric coefficient fields and short-range validation
//! - [`flow`]: Hamilton flows, trapping classification, wave operators
//! - [`grid`] / [`schrod`]: box grids, discrete Hamiltonians, propagators
//! - [`fbi`]: FBI transform and decay-rate wavefront detection
//! - [`microlocal`]: the twisted flow, generating function, saddle and
//!   contour diagnostics
//! - [`harness`]: config-driven end-to-end experiments and persistence

pub mod coeffs;
pub mod error;
pub mod fbi;
pub mod flow;
pub mod grid;
pub mod harness;
pub mod microlocal;
pub mod ode;
pub mod schrod;

pub use error::{Error, Result};
