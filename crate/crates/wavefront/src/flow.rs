//! Hamilton flow of the principal symbol, trapping classification, and the
//! classical wave operators `F±`.

use num_complex::Complex64;
use serde::Serialize;

use crate::coeffs::CoefficientField;
use crate::error::{Error, Result};
use crate::ode::{dopri5, OdeOptions};

/// A point of `T*ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Self {
        Self { x, xi }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn xi_norm(&self) -> f64 {
        self.xi.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn from_complex_state(state: &[Complex64], n: usize) -> Self {
        Self {
            x: state[..n].iter().map(|v| v.re).collect(),
            xi: state[n..2 * n].iter().map(|v| v.re).collect(),
        }
    }

    fn to_complex_state(&self) -> Vec<Complex64> {
        self.x
            .iter()
            .chain(self.xi.iter())
            .map(|&v| Complex64::new(v, 0.0))
            .collect()
    }
}

/// Time-sampled Hamiltonian trajectory with its conserved-energy ledger.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub energies: Vec<f64>,
    pub energy_drift: f64,
    pub energy_tol: f64,
}

impl Trajectory {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn last(&self) -> &PhasePoint {
        self.states.last().expect("trajectory has samples")
    }

    /// CSV rows `t, y_1.., eta_1.., energy`.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map(|s| s.dim()).unwrap_or(0);
        let mut out = String::from("t");
        for j in 0..n {
            out.push_str(&format!(",y{}", j + 1));
        }
        for j in 0..n {
            out.push_str(&format!(",eta{}", j + 1));
        }
        out.push_str(",energy\n");
        for i in 0..self.times.len() {
            out.push_str(&format!("{}", self.times[i]));
            for v in &self.states[i].x {
                out.push_str(&format!(",{v}"));
            }
            for v in &self.states[i].xi {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{}\n", self.energies[i]));
        }
        out
    }
}

pub(crate) fn hamilton_rhs(
    field: &CoefficientField,
    state: &[Complex64],
    out: &mut [Complex64],
) -> Result<()> {
    let n = field.n;
    let x: Vec<f64> = state[..n].iter().map(|v| v.re).collect();
    let xi: Vec<f64> = state[n..2 * n].iter().map(|v| v.re).collect();
    let a = field.a2_matrix(&x);
    for j in 0..n {
        let mut v = 0.0;
        for k in 0..n {
            v += a[j][k] * xi[k];
        }
        out[j] = Complex64::new(v, 0.0);
    }
    // dp/dx_m = 1/2 sum_{j,k} (d a_{j,k} / d x_m) xi_j xi_k
    let mut dp = vec![0.0; n];
    for j in 0..n {
        for k in 0..n {
            let grad = field.a2_grad_real(j, k, &x);
            for m in 0..n {
                dp[m] += 0.5 * grad[m] * xi[j] * xi[k];
            }
        }
    }
    for m in 0..n {
        out[n + m] = Complex64::new(-dp[m], 0.0);
    }
    Ok(())
}

/// Integrate the Hamilton system of `p` from `p0` to `t_end` (signed) with
/// adaptive error control; the recorded energy drift is checked against `tol`.
pub fn integrate_hamilton(
    field: &CoefficientField,
    p0: &PhasePoint,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory> {
    if tol <= 0.0 {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    if p0.dim() != field.n || p0.xi.len() != field.n {
        return Err(Error::Dimension {
            expected: field.n,
            got: p0.dim(),
        });
    }
    let n = field.n;
    let rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| hamilton_rhs(field, y, dy);
    let opts = OdeOptions {
        rtol: (tol * 1e-2).min(1e-12).max(1e-14),
        atol: (tol * 1e-2).min(1e-12).max(1e-14),
        ..Default::default()
    };
    let mut traj = Trajectory {
        energy_tol: tol,
        ..Trajectory::empty()
    };
    let e0 = field.eval_symbol(&p0.x, &p0.xi)?;
    let result = dopri5(&rhs, 0.0, t_end, &p0.to_complex_state(), &opts, |t, y| {
        let pt = PhasePoint::from_complex_state(y, n);
        let e = field.eval_symbol(&pt.x, &pt.xi)?;
        traj.times.push(t);
        traj.energies.push(e);
        traj.states.push(pt);
        Ok(())
    });
    match result {
        Ok(_) => {}
        Err(Error::StepUnderflow { t, dt, .. }) => {
            traj.energy_drift = traj
                .energies
                .iter()
                .map(|e| (e - e0).abs())
                .fold(0.0, f64::max);
            return Err(Error::StepUnderflow {
                t,
                dt,
                partial: Box::new(traj),
            });
        }
        Err(e) => return Err(e),
    }
    traj.energy_drift = traj
        .energies
        .iter()
        .map(|e| (e - e0).abs())
        .fold(0.0, f64::max);
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrappingVerdict {
    Nontrapping,
    Trapped,
    Undetermined,
}

/// Escape test for the classical flow. `Nontrapping` requires the orbit to
/// leave `escape_radius` with outward radial velocity at ten consecutive
/// checkpoints and an outward far-field linearization; `Trapped` requires the
/// orbit to stay bounded over the whole horizon while the radius keeps
/// oscillating (recurrence proxy). Everything else is `Undetermined`.
pub fn classify_nontrapping(
    field: &CoefficientField,
    p0: &PhasePoint,
    direction: Direction,
    horizon: f64,
    escape_radius: f64,
) -> Result<TrappingVerdict> {
    if p0.xi_norm() == 0.0 {
        return Err(Error::Argument(
            "trapping classification requires xi != 0".into(),
        ));
    }
    // fixed checkpoint cadence, independent of the adaptive step sizes
    const CHECKPOINTS: usize = 400;
    let chunk = direction.sign() * horizon.abs() / CHECKPOINTS as f64;
    let rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| hamilton_rhs(field, y, dy);
    let opts = OdeOptions {
        rtol: 1e-10,
        atol: 1e-10,
        ..Default::default()
    };
    let mut state = p0.to_complex_state();
    let mut t = 0.0;
    let mut consecutive = 0;
    let mut radial_maxima = 0;
    let mut prev_r: Option<f64> = None;
    let mut increasing = true;
    let mut max_r = 0.0f64;
    for i in 0..CHECKPOINTS {
        let sol = dopri5(&rhs, t, t + chunk, &state, &opts, |_, _| Ok(()))?;
        state = sol.final_state().to_vec();
        t += chunk;
        let s = PhasePoint::from_complex_state(&state, field.n);
        let r = s.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        max_r = max_r.max(r);
        // <y, dy/dt> with dy/dt = a(y) eta; sign flips for backward time
        let a = field.a2_matrix(&s.x);
        let mut ydot = vec![0.0; field.n];
        for j in 0..field.n {
            for k in 0..field.n {
                ydot[j] += a[j][k] * s.xi[k];
            }
        }
        let radial: f64 = s.x.iter().zip(&ydot).map(|(y, v)| y * v).sum::<f64>()
            * direction.sign();
        if r >= escape_radius && radial > 0.0 {
            consecutive += 1;
            if consecutive >= 10 {
                // far-field linearization: straight-line continuation keeps
                // moving outward iff <y, eta> has the right sign
                let lin: f64 = s.x.iter().zip(&s.xi).map(|(y, e)| y * e).sum::<f64>()
                    * direction.sign();
                if lin > 0.0 {
                    return Ok(TrappingVerdict::Nontrapping);
                }
            }
        } else {
            consecutive = 0;
        }
        if let Some(pr) = prev_r {
            if increasing && r < pr && i > 1 {
                radial_maxima += 1;
                increasing = false;
            } else if !increasing && r > pr {
                increasing = true;
            }
        }
        prev_r = Some(r);
    }
    if max_r < escape_radius && radial_maxima >= 2 {
        return Ok(TrappingVerdict::Trapped);
    }
    Ok(TrappingVerdict::Undetermined)
}

pub fn classify_forward_nontrapping(
    field: &CoefficientField,
    p0: &PhasePoint,
    horizon: f64,
    escape_radius: f64,
) -> Result<TrappingVerdict> {
    classify_nontrapping(field, p0, Direction::Forward, horizon, escape_radius)
}

/// Asymptotic straight-line data of a nontrapped trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct WaveOperatorResult {
    pub x_plus: Vec<f64>,
    pub xi_plus: Vec<f64>,
    pub direction: Direction,
    pub residual: f64,
    pub horizon: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct WaveOperatorOptions {
    pub tol: f64,
    pub base_horizon: f64,
    pub max_horizon: f64,
    pub classify_horizon: f64,
    pub escape_radius: f64,
}

impl Default for WaveOperatorOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            base_horizon: 25.0,
            max_horizon: 6400.0,
            classify_horizon: 400.0,
            escape_radius: 50.0,
        }
    }
}

/// Computes `(x±, ξ±) = lim (y(t) − t·η(t), η(t))` by horizon doubling with an
/// iterated Richardson ladder in the expansion parameter `T^{−σ}`.
pub fn wave_operator(
    field: &CoefficientField,
    p0: &PhasePoint,
    direction: Direction,
    opts: &WaveOperatorOptions,
) -> Result<WaveOperatorResult> {
    // the classification horizon must let slow seeds reach the escape radius
    let x0_norm = p0.x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let needed = 3.0 * (opts.escape_radius + x0_norm) / p0.xi_norm().max(1e-6);
    let verdict = classify_nontrapping(
        field,
        p0,
        direction,
        opts.classify_horizon.max(needed),
        opts.escape_radius,
    )?;
    if verdict != TrappingVerdict::Nontrapping {
        return Err(Error::Argument(format!(
            "seed is not nontrapping in the requested direction (verdict {verdict:?})"
        )));
    }
    let n = field.n;
    let sign = direction.sign();
    let rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| hamilton_rhs(field, y, dy);
    let opts_ode = OdeOptions {
        rtol: 1e-12,
        atol: 1e-12,
        ..Default::default()
    };

    // raw estimates v(T) = (y(T) - T eta(T), eta(T)) at T, 2T, 4T, ...
    let mut raw: Vec<Vec<f64>> = Vec::new();
    let mut horizons: Vec<f64> = Vec::new();
    let mut state = p0.to_complex_state();
    let mut t_prev = 0.0;
    let mut horizon = opts.base_horizon;
    let mut best: Option<(Vec<f64>, f64)> = None;

    while horizon <= opts.max_horizon {
        let t_target = sign * horizon;
        let sol = dopri5(&rhs, t_prev, t_target, &state, &opts_ode, |_, _| Ok(()))?;
        state = sol.final_state().to_vec();
        t_prev = t_target;

        let mut v = Vec::with_capacity(2 * n);
        for j in 0..n {
            v.push(state[j].re - t_target * state[n + j].re);
        }
        for j in 0..n {
            v.push(state[n + j].re);
        }
        raw.push(v);
        horizons.push(horizon);

        if raw.len() >= 3 {
            let (extrap, residual) = richardson_ladder(&raw, field.sigma);
            best = Some((extrap.clone(), residual));
            if residual < opts.tol {
                return Ok(WaveOperatorResult {
                    x_plus: extrap[..n].to_vec(),
                    xi_plus: extrap[n..].to_vec(),
                    direction,
                    residual,
                    horizon,
                    converged: true,
                });
            }
        }
        horizon *= 2.0;
    }
    let (extrap, residual) = best.ok_or(Error::Unconverged {
        residual: f64::INFINITY,
        tol: opts.tol,
        horizon: opts.max_horizon,
    })?;
    Ok(WaveOperatorResult {
        x_plus: extrap[..n].to_vec(),
        xi_plus: extrap[n..].to_vec(),
        direction,
        residual,
        horizon: *horizons.last().unwrap(),
        converged: false,
    })
}

/// Iterated Richardson extrapolation over a horizon-doubling sequence with
/// error exponents `sigma, sigma+1, ...`; returns the ladder diagonal and the
/// magnitude of its last correction.
fn richardson_ladder(raw: &[Vec<f64>], sigma: f64) -> (Vec<f64>, f64) {
    let mut table: Vec<Vec<Vec<f64>>> = vec![raw.to_vec()];
    let levels = raw.len() - 1;
    for lev in 1..=levels {
        let p = 2f64.powf(sigma + (lev - 1) as f64);
        let prev = &table[lev - 1];
        let mut row = Vec::with_capacity(prev.len() - 1);
        for i in 0..prev.len() - 1 {
            let v: Vec<f64> = prev[i]
                .iter()
                .zip(&prev[i + 1])
                .map(|(a, b)| (p * b - a) / (p - 1.0))
                .collect();
            row.push(v);
        }
        table.push(row);
    }
    let diag: Vec<Vec<f64>> = (0..=levels)
        .map(|lev| table[lev].last().unwrap().clone())
        .collect();
    let last = diag.last().unwrap().clone();
    let prev = &diag[diag.len() - 2];
    let residual = last
        .iter()
        .zip(prev)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (last, residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{conformal1d, conformal2d_well, flat};

    #[test]
    fn flat_straight_line() {
        let f = flat(1);
        let traj = integrate_hamilton(&f, &PhasePoint::new(vec![0.0], vec![1.0]), 3.0, 1e-10)
            .unwrap();
        let end = traj.last();
        assert!((end.x[0] - 3.0).abs() < 1e-9);
        assert!((end.xi[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_time_is_identity() {
        let f = conformal1d(1.0);
        let p0 = PhasePoint::new(vec![0.3], vec![-0.7]);
        let traj = integrate_hamilton(&f, &p0, 0.0, 1e-10).unwrap();
        assert_eq!(traj.times, vec![0.0]);
        assert_eq!(traj.states[0], p0);
    }

    #[test]
    fn conformal_against_step_halving_oracle() {
        // frozen from an independent fixed-step RK4 step-halving run
        let f = conformal1d(1.0);
        let traj = integrate_hamilton(&f, &PhasePoint::new(vec![0.0], vec![1.0]), 1.0, 1e-10)
            .unwrap();
        let end = traj.last();
        assert!((end.x[0] - 1.770615211768840).abs() < 1e-9);
        assert!((end.xi[0] - 1.269063434048210).abs() < 1e-9);
        assert!(traj.energy_drift < 1e-10);
    }

    #[test]
    fn time_reversal_roundtrip() {
        let f = conformal1d(1.0);
        let tol = 1e-10;
        let fwd = integrate_hamilton(&f, &PhasePoint::new(vec![0.2], vec![1.1]), 2.0, tol)
            .unwrap();
        let back = integrate_hamilton(&f, fwd.last(), -2.0, tol).unwrap();
        let end = back.last();
        assert!((end.x[0] - 0.2).abs() < 10.0 * tol);
        assert!((end.xi[0] - 1.1).abs() < 10.0 * tol);
    }

    #[test]
    fn classify_flat_sample() {
        let f = flat(1);
        for s in 0..20 {
            let xi = if s % 2 == 0 { 1.0 + s as f64 } else { -1.0 - s as f64 };
            let v = classify_forward_nontrapping(
                &f,
                &PhasePoint::new(vec![s as f64 - 10.0], vec![xi * 0.1]),
                2000.0,
                50.0,
            )
            .unwrap();
            assert_eq!(v, TrappingVerdict::Nontrapping, "seed {s}");
        }
    }

    #[test]
    fn classify_conformal_nontrapping() {
        let f = conformal1d(1.0);
        let v =
            classify_forward_nontrapping(&f, &PhasePoint::new(vec![0.0], vec![1.0]), 400.0, 50.0)
                .unwrap();
        assert_eq!(v, TrappingVerdict::Nontrapping);
    }

    #[test]
    fn classify_zero_momentum_rejected() {
        let f = flat(1);
        assert!(classify_forward_nontrapping(
            &f,
            &PhasePoint::new(vec![0.0], vec![0.0]),
            100.0,
            50.0
        )
        .is_err());
    }

    #[test]
    fn well_orbit_never_nontrapping() {
        // near-circular seed in the 2-d well; a tenfold-horizon integration
        // stays bounded, so the classifier must not report escape
        let f = conformal2d_well(0.5);
        // circular-ish orbit: radius r0, angular speed from the well profile
        let p0 = PhasePoint::new(vec![0.6, 0.0], vec![0.0, 0.25]);
        let long = integrate_hamilton(&f, &p0, 200.0, 1e-8).unwrap();
        let max_r = long
            .states
            .iter()
            .map(|s| (s.x[0] * s.x[0] + s.x[1] * s.x[1]).sqrt())
            .fold(0.0f64, f64::max);
        assert!(max_r < 50.0, "oracle orbit escaped (r = {max_r})");
        let v = classify_forward_nontrapping(&f, &p0, 20.0, 50.0).unwrap();
        assert_ne!(v, TrappingVerdict::Nontrapping);
    }

    #[test]
    fn wave_operator_flat_identity() {
        let f = flat(1);
        let p0 = PhasePoint::new(vec![1.5], vec![-0.8]);
        let w = wave_operator(&f, &p0, Direction::Forward, &WaveOperatorOptions::default())
            .unwrap();
        assert!((w.x_plus[0] - 1.5).abs() < 1e-9);
        assert!((w.xi_plus[0] + 0.8).abs() < 1e-9);
        assert!(w.converged);
    }

    #[test]
    fn wave_operator_conformal_closed_forms() {
        // xi+ = sqrt(2) by energy conservation; x+ by the quadrature oracle
        // int_0^inf (1 - a^{-1/2}) dx = 0.599070117367679
        let f = conformal1d(1.0);
        let p0 = PhasePoint::new(vec![0.0], vec![1.0]);
        let w = wave_operator(&f, &p0, Direction::Forward, &WaveOperatorOptions::default())
            .unwrap();
        assert!(w.converged);
        assert!((w.xi_plus[0] - 2f64.sqrt()).abs() < 1e-8);
        assert!((w.x_plus[0] - 0.599070117367679).abs() < 1e-6);
    }

    #[test]
    fn wave_operator_parity() {
        let f = conformal1d(1.0);
        let a = wave_operator(
            &f,
            &PhasePoint::new(vec![0.4], vec![1.2]),
            Direction::Forward,
            &WaveOperatorOptions::default(),
        )
        .unwrap();
        let b = wave_operator(
            &f,
            &PhasePoint::new(vec![-0.4], vec![-1.2]),
            Direction::Forward,
            &WaveOperatorOptions::default(),
        )
        .unwrap();
        assert!((a.x_plus[0] + b.x_plus[0]).abs() < 1e-7);
        assert!((a.xi_plus[0] + b.xi_plus[0]).abs() < 1e-9);
    }

    #[test]
    fn wave_operator_consistency_decreasing() {
        // |y(T) - (x+ + T xi+)| decreases over the last three horizon doublings
        let f = conformal1d(1.0);
        let p0 = PhasePoint::new(vec![0.0], vec![1.0]);
        let w = wave_operator(&f, &p0, Direction::Forward, &WaveOperatorOptions::default())
            .unwrap();
        let mut gaps = Vec::new();
        for t in [100.0, 200.0, 400.0, 800.0] {
            let traj = integrate_hamilton(&f, &p0, t, 1e-9).unwrap();
            let end = traj.last();
            gaps.push((end.x[0] - (w.x_plus[0] + t * w.xi_plus[0])).abs());
        }
        assert!(gaps.windows(2).all(|g| g[1] < g[0]), "gaps {gaps:?}");
    }

    #[test]
    fn backward_wave_operator_runs() {
        let f = conformal1d(1.0);
        let w = wave_operator(
            &f,
            &PhasePoint::new(vec![0.0], vec![1.0]),
            Direction::Backward,
            &WaveOperatorOptions::default(),
        )
        .unwrap();
        // backward limit of a right-mover: momentum still sqrt(2) by symmetry
        assert!((w.xi_plus[0] - 2f64.sqrt()).abs() < 1e-7);
    }
}
