//! Adaptive Dormand–Prince 5(4) integrator over complex state vectors.
//!
//! One integrator serves both the real Hamilton system (states embedded with
//! zero imaginary part) and the complexified flows of the microlocal layer.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Right-hand side of a (possibly non-autonomous) ODE over `Vec<Complex64>`.
pub trait OdeRhs {
    fn eval(&self, t: f64, y: &[Complex64], dydt: &mut [Complex64]) -> Result<()>;
}

impl<F> OdeRhs for F
where
    F: Fn(f64, &[Complex64], &mut [Complex64]) -> Result<()>,
{
    fn eval(&self, t: f64, y: &[Complex64], dydt: &mut [Complex64]) -> Result<()> {
        self(t, y, dydt)
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
// 4th-order embedded weights (b - b_hat gives the error estimate directly).
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Initial step guess; derived from the interval when absent.
    pub initial_dt: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            max_steps: 2_000_000,
            initial_dt: None,
        }
    }
}

pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

impl OdeSolution {
    pub fn final_state(&self) -> &[Complex64] {
        self.states.last().expect("solution has at least the initial state")
    }
}

/// Integrate from `t0` to `t1` (either direction), recording every accepted step.
///
/// `monitor` is called at each accepted step and may abort the run (e.g. tube
/// exit checks); its error is propagated.
pub fn dopri5<R: OdeRhs>(
    rhs: &R,
    t0: f64,
    t1: f64,
    y0: &[Complex64],
    opts: &OdeOptions,
    mut monitor: impl FnMut(f64, &[Complex64]) -> Result<()>,
) -> Result<OdeSolution> {
    let dim = y0.len();
    let span = t1 - t0;
    let mut sol = OdeSolution {
        times: vec![t0],
        states: vec![y0.to_vec()],
        steps_accepted: 0,
        steps_rejected: 0,
    };
    monitor(t0, y0)?;
    if span == 0.0 {
        return Ok(sol);
    }
    let dir = span.signum();
    let mut dt = opts
        .initial_dt
        .map(|d| d.abs())
        .unwrap_or_else(|| (span.abs() / 100.0).min(0.1).max(1e-8))
        * dir;

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![Complex64::new(0.0, 0.0); dim]; 7];
    rhs.eval(t, &y, &mut k[0])?;

    let mut ytmp = vec![Complex64::new(0.0, 0.0); dim];
    let mut y5 = vec![Complex64::new(0.0, 0.0); dim];

    for _ in 0..opts.max_steps {
        if (t1 - t) * dir <= 0.0 {
            return Ok(sol);
        }
        if (t + dt - t1) * dir > 0.0 {
            dt = t1 - t;
        }
        if dt.abs() < 1e-15 * (1.0 + t.abs()) {
            return Err(Error::StepUnderflow {
                t,
                dt,
                partial: Box::new(crate::flow::Trajectory::empty()),
            });
        }

        for stage in 0..6 {
            for i in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        acc += a * kj[i];
                    }
                }
                ytmp[i] = y[i] + dt * acc;
            }
            let _ = C; // stage times follow the tableau
            rhs.eval(t + C[stage] * dt, &ytmp, &mut k[stage + 1])?;
        }
        // 5th-order solution is the last stage combination (FSAL form).
        y5.copy_from_slice(&ytmp);

        // weighted rms error norm
        let mut err2 = 0.0;
        for i in 0..dim {
            let mut e = Complex64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += E[j] * kj[i];
                }
            }
            let e = (dt * e).norm();
            let scale = opts.atol + opts.rtol * y[i].norm().max(y5[i].norm());
            err2 += (e / scale) * (e / scale);
        }
        let err = (err2 / dim as f64).sqrt();

        if err <= 1.0 {
            t += dt;
            y.copy_from_slice(&y5);
            k.swap(0, 6); // FSAL: k7 at the new point becomes k1
            sol.times.push(t);
            sol.states.push(y.clone());
            sol.steps_accepted += 1;
            monitor(t, &y)?;
        } else {
            sol.steps_rejected += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        dt *= factor;
    }
    Err(Error::Integration {
        t,
        reason: format!("step budget of {} exhausted", opts.max_steps),
    })
}
