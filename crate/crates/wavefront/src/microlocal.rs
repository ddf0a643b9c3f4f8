//! The geometric layer on the FBI side: the complex canonical transformation
//! `κ(x,ξ) = (x − iξ, ξ)`, the symbol `b`, the twisted flow
//! `R_s = κ ∘ exp(−sH_{p₀}) ∘ exp(sH_p) ∘ κ⁻¹`, the generating function `ψ`
//! solving the eikonal equation, saddle-point diagnostics, the leading-symbol
//! (Egorov) check, and the good-contour identity.

use num_complex::Complex64;
use serde::Serialize;

use crate::coeffs::{Coefficient, CoefficientField};
use crate::error::{Error, Result};
use crate::fbi::{fbi_transform, FbiPoint};
use crate::flow::{integrate_hamilton, PhasePoint};
use crate::grid::GridFunction;
use crate::ode::{dopri5, OdeOptions};
use crate::schrod::weyl_linear_sandwich;

/// A point `(z, ζ)` of complexified phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPhasePoint {
    pub z: Vec<Complex64>,
    pub zeta: Vec<Complex64>,
}

impl ComplexPhasePoint {
    pub fn new(z: Vec<Complex64>, zeta: Vec<Complex64>) -> Self {
        Self { z, zeta }
    }

    /// Distance from the FBI submanifold `{ζ = −Im z, ζ real}`.
    pub fn fbi_defect(&self) -> f64 {
        self.z
            .iter()
            .zip(&self.zeta)
            .map(|(z, zeta)| (zeta - Complex64::new(-z.im, 0.0)).norm())
            .fold(0.0, f64::max)
    }
}

/// `κ(x, ξ) = (x − iξ, ξ)`.
pub fn kappa(x: &[f64], xi: &[f64]) -> ComplexPhasePoint {
    ComplexPhasePoint {
        z: x.iter()
            .zip(xi)
            .map(|(&a, &b)| Complex64::new(a, -b))
            .collect(),
        zeta: xi.iter().map(|&b| Complex64::new(b, 0.0)).collect(),
    }
}

/// Inverse of `κ` on the FBI submanifold; rejects points off it when
/// `strict` is set.
pub fn kappa_inv(p: &ComplexPhasePoint, strict: bool) -> Result<PhasePoint> {
    if strict && p.fbi_defect() > 1e-12 {
        return Err(Error::Argument(format!(
            "point is off the FBI submanifold (defect {:.3e})",
            p.fbi_defect()
        )));
    }
    Ok(PhasePoint {
        x: p.z.iter().map(|z| z.re).collect(),
        xi: p.zeta.iter().map(|zeta| zeta.re).collect(),
    })
}

fn transport_argument(s: f64, z: &[Complex64], zeta: &[Complex64]) -> Vec<Complex64> {
    z.iter()
        .zip(zeta)
        .map(|(zj, cj)| zj + (Complex64::i() + s) * cj)
        .collect()
}

/// `b(s, z, ζ) = ½ Σ (a_{j,k}(z + iζ + sζ) − δ_{j,k}) ζ_j ζ_k`.
pub fn b_symbol(
    field: &CoefficientField,
    s: f64,
    z: &[Complex64],
    zeta: &[Complex64],
) -> Result<Complex64> {
    if zeta.iter().all(|c| c.norm() == 0.0) {
        return Ok(Complex64::new(0.0, 0.0)); // quadratic form in zeta
    }
    let w = transport_argument(s, z, zeta);
    if !field.in_tube(&w) {
        let im: f64 = w.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
        let re: Vec<f64> = w.iter().map(|v| v.re).collect();
        return Err(Error::OutsideTube {
            im_norm: im,
            bound: field.nu * crate::coeffs::jbracket(&re),
        });
    }
    Ok(b_symbol_unchecked(field, s, z, zeta))
}

fn b_symbol_unchecked(
    field: &CoefficientField,
    s: f64,
    z: &[Complex64],
    zeta: &[Complex64],
) -> Complex64 {
    let n = field.n;
    let w = transport_argument(s, z, zeta);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            let delta = if j == k { 1.0 } else { 0.0 };
            let a = field.eval_complex_unchecked(Coefficient::A2(j, k), &w);
            acc += (a - delta) * zeta[j] * zeta[k];
        }
    }
    0.5 * acc
}

// Hamilton field of b: dz/ds = ∂b/∂ζ, dζ/ds = −∂b/∂z, with the shared
// quantity S_m = ½ Σ (∂a_{j,k}/∂w_m) ζ_j ζ_k.
fn b_flow_rhs(
    field: &CoefficientField,
    s: f64,
    state: &[Complex64],
    out: &mut [Complex64],
) -> Result<()> {
    let n = field.n;
    let z = &state[..n];
    let zeta = &state[n..2 * n];
    let w = transport_argument(s, z, zeta);
    if !field.in_tube(&w) {
        let im: f64 = w.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
        let re: Vec<f64> = w.iter().map(|v| v.re).collect();
        return Err(Error::OutsideTube {
            im_norm: im,
            bound: field.nu * crate::coeffs::jbracket(&re),
        });
    }
    let mut grad_w = vec![Complex64::new(0.0, 0.0); n];
    for m in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                let da = field.coeff_dz(Coefficient::A2(j, k), &w, m);
                acc += da * zeta[j] * zeta[k];
            }
        }
        grad_w[m] = 0.5 * acc;
    }
    for j in 0..n {
        let mut v = Complex64::new(0.0, 0.0);
        for l in 0..n {
            let delta = if j == l { 1.0 } else { 0.0 };
            let a = field.eval_complex_unchecked(Coefficient::A2(j, l), &w);
            v += (a - delta) * zeta[l];
        }
        out[j] = v + (Complex64::i() + s) * grad_w[j];
        out[n + j] = -grad_w[j];
    }
    // optional action accumulator: zeta . db/dzeta - b
    if state.len() > 2 * n {
        let mut zdot = Complex64::new(0.0, 0.0);
        for j in 0..n {
            zdot += zeta[j] * out[j];
        }
        out[2 * n] = zdot - b_symbol_unchecked(field, s, z, zeta);
    }
    Ok(())
}

/// Direct complexified Hamilton flow of `b` from time `s_from` to `s_to`.
pub fn twisted_flow_ode(
    field: &CoefficientField,
    s_from: f64,
    s_to: f64,
    start: &ComplexPhasePoint,
    tol: f64,
) -> Result<ComplexPhasePoint> {
    let n = field.n;
    let mut state: Vec<Complex64> = start.z.iter().chain(start.zeta.iter()).copied().collect();
    let rhs = |s: f64, y: &[Complex64], dy: &mut [Complex64]| b_flow_rhs(field, s, y, dy);
    let opts = OdeOptions {
        rtol: tol.min(1e-10),
        atol: tol.min(1e-10),
        ..Default::default()
    };
    let sol = dopri5(&rhs, s_from, s_to, &state, &opts, |_, _| Ok(()))?;
    state = sol.final_state().to_vec();
    Ok(ComplexPhasePoint {
        z: state[..n].to_vec(),
        zeta: state[n..2 * n].to_vec(),
    })
}

/// Composition route `κ ∘ exp(−sH_{p₀}) ∘ exp(sH_p) ∘ κ⁻¹`, valid on
/// real-base starts (`ζ` real with `ζ = −Im z`).
pub fn twisted_flow_composition(
    field: &CoefficientField,
    s: f64,
    start: &ComplexPhasePoint,
    tol: f64,
) -> Result<ComplexPhasePoint> {
    let base = kappa_inv(start, true)?;
    let traj = integrate_hamilton(field, &base, s, tol)?;
    let end = traj.last();
    let x: Vec<f64> = end
        .x
        .iter()
        .zip(&end.xi)
        .map(|(y, eta)| y - s * eta)
        .collect();
    Ok(kappa(&x, &end.xi))
}

/// `R_s(start)`: the twisted flow for signed `s`. Real-base points go through
/// the real composition; general complex points through the `b`-flow ODE with
/// tube monitoring.
pub fn twisted_flow(
    field: &CoefficientField,
    s: f64,
    start: &ComplexPhasePoint,
    tol: f64,
) -> Result<ComplexPhasePoint> {
    if start.fbi_defect() < 1e-12 {
        twisted_flow_composition(field, s, start, tol)
    } else {
        twisted_flow_ode(field, 0.0, s, start, tol)
    }
}

/// Inverse map `R_s⁻¹` (the flow of `b` from time `s` back to time 0). For a
/// time-dependent generator this differs from `R_{−s}`.
pub fn twisted_flow_inverse(
    field: &CoefficientField,
    s: f64,
    end: &ComplexPhasePoint,
    tol: f64,
) -> Result<ComplexPhasePoint> {
    if end.fbi_defect() < 1e-12 {
        // κ ∘ exp(−sH_p) ∘ exp(sH_{p₀}) ∘ κ⁻¹
        let base = kappa_inv(end, true)?;
        let shifted = PhasePoint {
            x: base
                .x
                .iter()
                .zip(&base.xi)
                .map(|(x, xi)| x + s * xi)
                .collect(),
            xi: base.xi.clone(),
        };
        let traj = integrate_hamilton(field, &shifted, -s, tol)?;
        let back = traj.last();
        Ok(kappa(&back.x, &back.xi))
    } else {
        twisted_flow_ode(field, s, 0.0, end, tol)
    }
}

/// One evaluation of the generating function `ψ(s, z, η)` together with its
/// gradients; `converged` records the Newton shooting status for
/// `J_{s,η}⁻¹(z)`.
#[derive(Debug, Clone)]
pub struct GeneratingSample {
    pub s: f64,
    pub z: Vec<Complex64>,
    pub eta: Vec<Complex64>,
    pub psi: Complex64,
    pub grad_z_psi: Vec<Complex64>,
    pub grad_eta_psi: Vec<Complex64>,
    pub converged: bool,
    pub newton_residual: f64,
}

fn flow_with_action(
    field: &CoefficientField,
    y: &[Complex64],
    eta: &[Complex64],
    s: f64,
    tol: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>, Complex64)> {
    let n = field.n;
    let mut state: Vec<Complex64> = y.iter().chain(eta.iter()).copied().collect();
    state.push(Complex64::new(0.0, 0.0));
    let rhs = |ss: f64, q: &[Complex64], dq: &mut [Complex64]| b_flow_rhs(field, ss, q, dq);
    let opts = OdeOptions {
        rtol: tol.min(1e-11),
        atol: tol.min(1e-11),
        ..Default::default()
    };
    let sol = dopri5(&rhs, 0.0, s, &state, &opts, |_, _| Ok(()))?;
    let fin = sol.final_state();
    Ok((fin[..n].to_vec(), fin[n..2 * n].to_vec(), fin[2 * n]))
}

fn flow_endpoint(
    field: &CoefficientField,
    y: &[Complex64],
    eta: &[Complex64],
    s: f64,
    tol: f64,
) -> Result<Vec<Complex64>> {
    let p = twisted_flow_ode(
        field,
        0.0,
        s,
        &ComplexPhasePoint::new(y.to_vec(), eta.to_vec()),
        tol,
    )?;
    Ok(p.z)
}

/// Newton shooting for `J_{s,η}⁻¹(z)`: find `y` with `z̃(s; y, η) = z`,
/// initialized at the flat-field answer `y = z`, damped, 25-iteration cap.
fn shoot_initial_point(
    field: &CoefficientField,
    s: f64,
    z: &[Complex64],
    eta: &[Complex64],
    tol: f64,
) -> Result<(Vec<Complex64>, f64, bool)> {
    let n = field.n;
    let mut y = z.to_vec();
    let fd = 1e-6;
    let mut residual = f64::INFINITY;
    for _ in 0..25 {
        let ze = flow_endpoint(field, &y, eta, s, tol)?;
        let f: Vec<Complex64> = ze.iter().zip(z).map(|(a, b)| a - b).collect();
        residual = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if residual < tol {
            return Ok((y, residual, true));
        }
        // Jacobian dz~/dy by central differences
        let mut jac = nalgebra::DMatrix::<Complex64>::zeros(n, n);
        for m in 0..n {
            let mut yp = y.clone();
            yp[m] += fd;
            let mut ym = y.clone();
            ym[m] -= fd;
            let zp = flow_endpoint(field, &yp, eta, s, tol)?;
            let zm = flow_endpoint(field, &ym, eta, s, tol)?;
            for r in 0..n {
                jac[(r, m)] = (zp[r] - zm[r]) / (2.0 * fd);
            }
        }
        let rhs = nalgebra::DVector::<Complex64>::from_vec(f.clone());
        let lu = jac.lu();
        let step = match lu.solve(&rhs) {
            Some(sv) => sv,
            None => break,
        };
        // damped update
        let mut lambda = 1.0;
        loop {
            let trial: Vec<Complex64> =
                y.iter().zip(step.iter()).map(|(a, d)| a - lambda * d).collect();
            let zt = flow_endpoint(field, &trial, eta, s, tol)?;
            let rt = zt
                .iter()
                .zip(z)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if rt < residual || lambda < 0.1 {
                y = trial;
                break;
            }
            lambda *= 0.5;
        }
    }
    let ze = flow_endpoint(field, &y, eta, s, tol)?;
    let residual_final = ze
        .iter()
        .zip(z)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok((y, residual_final.min(residual), false))
}

/// Evaluate `ψ(s, z, η) = y*·η + ∫₀ˢ (ζ̂·∇_ζ b − b) ds'` along the
/// characteristic through `y* = J_{s,η}⁻¹(z)`, with
/// `∇_η ψ = y*` and `∇_z ψ = ζ̃(s)`.
pub fn generating_function(
    field: &CoefficientField,
    s: f64,
    z: &[Complex64],
    eta: &[Complex64],
    tol: f64,
) -> Result<GeneratingSample> {
    let (y, residual, converged) = shoot_initial_point(field, s, z, eta, tol)?;
    let (_zf, zetaf, action) = flow_with_action(field, &y, eta, s, tol)?;
    let ip: Complex64 = y.iter().zip(eta).map(|(a, b)| a * b).sum();
    Ok(GeneratingSample {
        s,
        z: z.to_vec(),
        eta: eta.to_vec(),
        psi: ip + action,
        grad_z_psi: zetaf,
        grad_eta_psi: y,
        converged,
        newton_residual: residual,
    })
}

/// Large-s limit of `ψ(s, z, η)`: horizon doubling with an iterated
/// Richardson ladder in `s^{−σ}` (raw convergence is only `O(s^{−σ})`),
/// accepted when the ladder diagonal is Cauchy to `tol`. Returns the
/// extrapolated value, the last finite-s sample, and the horizon reached.
pub fn psi_infinity(
    field: &CoefficientField,
    z: &[Complex64],
    eta: &[Complex64],
    tol: f64,
    s0: f64,
    max_s: f64,
) -> Result<(Complex64, GeneratingSample, f64)> {
    let mut s = s0;
    let mut raw: Vec<Complex64> = Vec::new();
    let mut last_sample = None;
    while s <= max_s {
        let cur = generating_function(field, s, z, eta, tol.min(1e-9))?;
        raw.push(cur.psi);
        last_sample = Some(cur);
        if raw.len() >= 3 {
            // ladder with exponents sigma, sigma+1, ...
            let mut diag: Vec<Complex64> = vec![raw[raw.len() - 1]];
            let mut row = raw.clone();
            for lev in 1..raw.len() {
                let p = 2f64.powf(field.sigma + (lev - 1) as f64);
                let mut next = Vec::with_capacity(row.len() - 1);
                for i in 0..row.len() - 1 {
                    next.push((p * row[i + 1] - row[i]) / (p - 1.0));
                }
                row = next;
                diag.push(*row.last().unwrap());
            }
            let m = diag.len();
            let resid = (diag[m - 1] - diag[m - 2]).norm();
            if resid < tol {
                return Ok((diag[m - 1], last_sample.unwrap(), s));
            }
        }
        s *= 2.0;
    }
    Err(Error::Unconverged {
        residual: f64::NAN,
        tol,
        horizon: max_s,
    })
}

/// Saddle-point diagnostics of `(y,η) ↦ Φ₀(y) − Im(ψ(s,z,η) − yη)` at the
/// predicted critical point `R_s⁻¹(z, −Im z)`.
#[derive(Debug, Clone, Serialize)]
pub struct SaddleReport {
    pub s: f64,
    pub gradient_norm: f64,
    pub critical_value: f64,
    pub phi0_z: f64,
    pub critical_value_gap: f64,
    /// Smallest singular value of `I + Im ∇²_η ψ`.
    pub hessian_min_sv: f64,
    pub newton_converged: bool,
}

pub fn saddle_check(
    field: &CoefficientField,
    s: f64,
    z: &[Complex64],
    tol: f64,
) -> Result<SaddleReport> {
    let n = field.n;
    let zeta0: Vec<Complex64> = z.iter().map(|v| Complex64::new(-v.im, 0.0)).collect();
    let saddle = twisted_flow_inverse(
        field,
        s,
        &ComplexPhasePoint::new(z.to_vec(), zeta0),
        tol.min(1e-10),
    )?;
    let (yc, etac) = (&saddle.z, &saddle.zeta);

    let sample = generating_function(field, s, z, etac, tol.min(1e-10))?;

    // gradient of G(y, eta) = Phi0(y) - Im(psi - y.eta) over the 4n real
    // coordinates, using holomorphy of psi in eta:
    //   dG/dRe y_j = Im eta_j           dG/dIm y_j = Im y_j + Re eta_j
    //   dG/dRe eta_j = Im(y - grad_eta psi)_j
    //   dG/dIm eta_j = Re(y - grad_eta psi)_j
    let mut grad2 = 0.0;
    for j in 0..n {
        grad2 += (etac[j].im) * (etac[j].im) / 4.0;
        let t = yc[j].im + etac[j].re;
        grad2 += t * t / 4.0;
        grad2 += (yc[j] - sample.grad_eta_psi[j]).norm_sqr();
    }
    let gradient_norm = grad2.sqrt();

    let phi0_y: f64 = 0.5 * yc.iter().map(|v| v.im * v.im).sum::<f64>();
    let y_dot_eta: Complex64 = yc.iter().zip(etac.iter()).map(|(a, b)| a * b).sum();
    let critical_value = phi0_y - (sample.psi - y_dot_eta).im;
    let phi0_z: f64 = 0.5 * z.iter().map(|v| v.im * v.im).sum::<f64>();

    // Hessian d^2 psi / d eta^2 by central differences of grad_eta psi = y*(eta)
    let fd = 1e-4;
    let mut hess = nalgebra::DMatrix::<f64>::zeros(n, n);
    let mut all_converged = sample.converged;
    for m in 0..n {
        let mut ep = etac.clone();
        ep[m] += fd;
        let mut em = etac.clone();
        em[m] -= fd;
        let sp = generating_function(field, s, z, &ep, tol.min(1e-10))?;
        let sm = generating_function(field, s, z, &em, tol.min(1e-10))?;
        all_converged &= sp.converged && sm.converged;
        for r in 0..n {
            let d = (sp.grad_eta_psi[r] - sm.grad_eta_psi[r]) / (2.0 * fd);
            hess[(r, m)] = d.im;
        }
    }
    let m_matrix = nalgebra::DMatrix::<f64>::identity(n, n) + hess;
    let svd = m_matrix.svd(false, false);
    let hessian_min_sv = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);

    Ok(SaddleReport {
        s,
        gradient_norm,
        critical_value,
        phi0_z,
        critical_value_gap: (critical_value - phi0_z).abs(),
        hessian_min_sv,
        newton_converged: all_converged,
    })
}

/// Leading-symbol (Egorov) check: the FBI ratio of `f^W(x + thD)u_h` to
/// `u_h` on a coherent state at `(x₀, ξ₀)` converges to `f(x₀ + tξ₀)` with
/// order `h`.
#[derive(Debug, Clone, Serialize)]
pub struct EgorovReport {
    pub t: f64,
    pub expected: f64,
    pub h_values: Vec<f64>,
    pub ratios_re: Vec<f64>,
    pub ratios_im: Vec<f64>,
    pub errors: Vec<f64>,
    pub fitted_order: f64,
    pub degenerate: bool,
}

pub struct EgorovGrid {
    pub points: usize,
    pub box_half: f64,
}

impl Default for EgorovGrid {
    fn default() -> Self {
        Self {
            points: 16384,
            box_half: 40.0,
        }
    }
}

pub fn symbol_action_check(
    f: &dyn Fn(&[f64]) -> f64,
    seed: &PhasePoint,
    t: f64,
    h_grid: &[f64],
    grid: &EgorovGrid,
) -> Result<EgorovReport> {
    if seed.dim() != 1 {
        return Err(Error::Argument(
            "the symbol action check is implemented for n = 1".into(),
        ));
    }
    let (x0, xi0) = (seed.x[0], seed.xi[0]);
    let target: f64 = f(&[x0 + t * xi0]);
    let z0 = FbiPoint::from_phase(&[x0], &[xi0]);
    let mut h_values = Vec::new();
    let mut ratios = Vec::new();
    let mut errors = Vec::new();
    let mut degenerate = false;
    for &h in h_grid {
        let u = GridFunction::from_fn(1, grid.points, grid.box_half, |x| {
            (Complex64::i() * xi0 * x[0] / h).exp()
                * Complex64::new((-(x[0] - x0) * (x[0] - x0) / (2.0 * h)).exp(), 0.0)
        });
        let moved = weyl_linear_sandwich(f, &u, t, h);
        let num = fbi_transform(&moved, &z0.z, h)?;
        let den = fbi_transform(&u, &z0.z, h)?;
        if den.norm() < 1e-250 {
            degenerate = true;
            continue;
        }
        let r = num / den;
        h_values.push(h);
        ratios.push(r);
        errors.push((r - target).norm());
    }
    // log-log fit of |r(h) - f| against h
    let fitted_order = if errors.len() >= 2 && errors.iter().all(|&e| e > 0.0) {
        let xs: Vec<f64> = h_values.iter().map(|h| h.ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let num: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum();
        let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        num / den
    } else {
        degenerate = true;
        f64::NAN
    };
    Ok(EgorovReport {
        t,
        expected: target,
        h_values,
        ratios_re: ratios.iter().map(|r| r.re).collect(),
        ratios_im: ratios.iter().map(|r| r.im).collect(),
        errors,
        fitted_order,
        degenerate,
    })
}

/// Good-contour diagnostics for the phase
/// `φ_z(x,y) = Φ₀(y) + Re(−(z−x)²/2 + (x−y)²/2)` along the contour
/// `x = (y+z)/2 − i Im z − R conj(z−y)`, `|y−z| < r`.
///
/// Along the contour the phase evaluates in closed form to
/// `Φ₀(z) − (R−½)|Im y−Im z|² − R|Re y−Re z|²`; the report carries the
/// worst residual against that identity, the best quadratic-decay constant,
/// and the `|x−Re z| ≤ (1+R)|y−z|` margin.
#[derive(Debug, Clone, Serialize)]
pub struct ContourReport {
    pub slope: f64,
    pub samples: usize,
    pub max_identity_residual: f64,
    pub best_constant: f64,
    pub max_x_excursion_ratio: f64,
    pub critical_point_residual: f64,
}

pub fn contour_diagnostics(
    z: &[Complex64],
    samples: usize,
    radius: f64,
    slope: f64,
    seed: u64,
) -> ContourReport {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = z.len();
    let phi0_z: f64 = 0.5 * z.iter().map(|v| v.im * v.im).sum::<f64>();

    let eval_phase = |y: &[Complex64]| -> (f64, f64, f64) {
        // contour point
        let x: Vec<Complex64> = y
            .iter()
            .zip(z)
            .map(|(yj, zj)| {
                (yj + zj) / 2.0 - Complex64::i() * zj.im - slope * (zj - yj).conj()
            })
            .collect();
        let phi0_y: f64 = 0.5 * y.iter().map(|v| v.im * v.im).sum::<f64>();
        let mut quad = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let a = z[j] - x[j];
            let b = x[j] - y[j];
            quad += -a * a / 2.0 + b * b / 2.0;
        }
        let phase = phi0_y + quad.re;
        let x_minus_rez: f64 = x
            .iter()
            .zip(z)
            .map(|(xj, zj)| (xj - zj.re).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let y_minus_z: f64 = y
            .iter()
            .zip(z)
            .map(|(yj, zj)| (yj - zj).norm_sqr())
            .sum::<f64>()
            .sqrt();
        (phase, x_minus_rez, y_minus_z)
    };

    // critical point y = z maps to x = Re z with value Phi0(z)
    let (crit_phase, _, _) = eval_phase(z);
    let critical_point_residual = (crit_phase - phi0_z).abs();

    let mut max_resid = 0.0f64;
    let mut best_c = 0.0f64;
    let mut max_ratio = 0.0f64;
    for _ in 0..samples {
        let y: Vec<Complex64> = z
            .iter()
            .map(|zj| {
                let dr = rng.gen_range(-radius..radius) / (n as f64).sqrt();
                let di = rng.gen_range(-radius..radius) / (n as f64).sqrt();
                zj + Complex64::new(dr, di)
            })
            .collect();
        let (phase, xr, yz) = eval_phase(&y);
        let im_gap: f64 = y
            .iter()
            .zip(z)
            .map(|(yj, zj)| (yj.im - zj.im) * (yj.im - zj.im))
            .sum();
        let re_gap: f64 = y
            .iter()
            .zip(z)
            .map(|(yj, zj)| (yj.re - zj.re) * (yj.re - zj.re))
            .sum();
        let identity = phi0_z - (slope - 0.5) * im_gap - slope * re_gap;
        max_resid = max_resid.max((phase - identity).abs());
        if yz > 0.0 {
            max_ratio = max_ratio.max(xr / ((1.0 + slope) * yz));
            let drop = phi0_z - phase;
            if drop > 0.0 {
                best_c = best_c.max((xr * xr + yz * yz) / drop);
            }
        }
    }
    ContourReport {
        slope,
        samples,
        max_identity_residual: max_resid,
        best_constant: best_c,
        max_x_excursion_ratio: max_ratio,
        critical_point_residual,
    }
}
