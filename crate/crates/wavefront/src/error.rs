use thiserror::Error;

use crate::flow::Trajectory;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("point outside the holomorphy tube: |Im z| = {im_norm:.6e} >= nu*<Re z> = {bound:.6e}")]
    OutsideTube { im_norm: f64, bound: f64 },

    #[error(
        "Gaussian window leaks outside the box on axis {axis}: needs half-width {needed:.3} around Re z = {center:.3}, box edge at {edge:.3}"
    )]
    WindowLeak {
        axis: usize,
        center: f64,
        needed: f64,
        edge: f64,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("step size underflow at t = {t:.6e} (dt = {dt:.3e}); partial trajectory retained")]
    StepUnderflow {
        t: f64,
        dt: f64,
        partial: Box<Trajectory>,
    },

    #[error("integration aborted at t = {t:.6e}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("propagation failed at t = {t_reached:.6e} of {t_target:.6e}: {reason}")]
    Propagation {
        t_reached: f64,
        t_target: f64,
        reason: String,
    },

    #[error("wave-operator extrapolation did not converge: residual {residual:.3e} > tol {tol:.3e} at horizon {horizon}")]
    Unconverged {
        residual: f64,
        tol: f64,
        horizon: f64,
    },

    #[error("Newton shooting diverged after {iters} iterations (|F| = {residual:.3e})")]
    NewtonDiverged { iters: usize, residual: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("malformed grid file: {0}")]
    GridFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
