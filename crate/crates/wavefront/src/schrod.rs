//! Pseudo-spectral discretization of `H = ½ Σ D_j a_{j,k} D_k + ½ Σ (a_j D_j
//! + D_j a_j) + a₀` on the periodic box, the exact free propagator, a
//! Lanczos-exponential propagator for the full operator, and the conjugated
//! evolution `u(t) = e^{itH₀} e^{−itH} u₀`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::coeffs::{Coefficient, CoefficientField};
use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Cached FFT plans for one grid size.
struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl Plans {
    fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }
}

/// Frequency of FFT bin `i` on an axis with `points` samples over `[-L, L)`.
pub fn frequency(i: usize, points: usize, box_half: f64) -> f64 {
    let m = if i <= points / 2 - 1 {
        i as i64
    } else {
        i as i64 - points as i64
    };
    std::f64::consts::PI * m as f64 / box_half
}

fn for_each_line(
    n: usize,
    points: usize,
    axis: usize,
    mut body: impl FnMut(usize, usize), // (base offset, stride)
) {
    // iterate over all 1-d lines along `axis` in the row-major layout
    let stride = points.pow((n - 1 - axis) as u32);
    let total = points.pow(n as u32);
    let block = stride * points;
    let mut base = 0;
    while base < total {
        for off in 0..stride {
            body(base + off, stride);
        }
        base += block;
    }
}

fn fft_axis(values: &mut [Complex64], n: usize, points: usize, axis: usize, plans: &Plans, forward: bool) {
    debug_assert_eq!(plans.len, points);
    let mut line = vec![Complex64::new(0.0, 0.0); points];
    for_each_line(n, points, axis, |base, stride| {
        for i in 0..points {
            line[i] = values[base + i * stride];
        }
        if forward {
            plans.forward.process(&mut line);
        } else {
            plans.inverse.process(&mut line);
            let norm = 1.0 / points as f64;
            for v in line.iter_mut() {
                *v *= norm;
            }
        }
        for i in 0..points {
            values[base + i * stride] = line[i];
        }
    });
}

/// Spectral derivative `D_axis u` (multiplier `k` in the frequency basis).
pub fn spectral_derivative(u: &GridFunction, axis: usize) -> GridFunction {
    let plans = Plans::new(u.points);
    let mut out = u.clone();
    fft_axis(&mut out.values, u.n, u.points, axis, &plans, true);
    apply_axis_multiplier(&mut out.values, u.n, u.points, axis, |k| {
        Complex64::new(k, 0.0)
    }, u.box_half);
    fft_axis(&mut out.values, u.n, u.points, axis, &plans, false);
    out
}

fn apply_axis_multiplier(
    values: &mut [Complex64],
    n: usize,
    points: usize,
    axis: usize,
    f: impl Fn(f64) -> Complex64,
    box_half: f64,
) {
    let mults: Vec<Complex64> = (0..points).map(|i| f(frequency(i, points, box_half))).collect();
    for_each_line(n, points, axis, |base, stride| {
        for i in 0..points {
            values[base + i * stride] *= mults[i];
        }
    });
}

fn full_fft(u: &mut GridFunction, plans: &Plans, forward: bool) {
    for axis in 0..u.n {
        fft_axis(&mut u.values, u.n, u.points, axis, plans, forward);
    }
}

fn apply_radial_multiplier(u: &mut GridFunction, f: impl Fn(f64) -> Complex64) {
    // multiplier depending on |k|^2 across all axes
    let np = u.points;
    let freqs: Vec<f64> = (0..np).map(|i| frequency(i, np, u.box_half)).collect();
    let mut idx = vec![0usize; u.n];
    for flat in 0..u.values.len() {
        let mut rem = flat;
        for j in (0..u.n).rev() {
            idx[j] = rem % np;
            rem /= np;
        }
        let k2: f64 = idx.iter().map(|&i| freqs[i] * freqs[i]).sum();
        u.values[flat] *= f(k2);
    }
}

/// Raised-cosine low-pass: keep `|k| <= k1`, kill `|k| >= k2`.
pub fn low_pass(u: &GridFunction, k1: f64, k2: f64) -> GridFunction {
    let plans = Plans::new(u.points);
    let mut out = u.clone();
    full_fft(&mut out, &plans, true);
    apply_radial_multiplier(&mut out, |kk2| {
        let k = kk2.sqrt();
        let g = if k <= k1 {
            1.0
        } else if k >= k2 {
            0.0
        } else {
            0.5 * (1.0 + (std::f64::consts::PI * (k - k1) / (k2 - k1)).cos())
        };
        Complex64::new(g, 0.0)
    });
    full_fft(&mut out, &plans, false);
    out
}

/// Exact spectral resampling: zero-padding when refining, frequency
/// truncation when coarsening (exact for content within the target band).
pub fn resample(u: &GridFunction, new_points: usize) -> Result<GridFunction> {
    if new_points == u.points {
        return Ok(u.clone());
    }
    if !new_points.is_power_of_two() {
        return Err(Error::Argument(format!(
            "resample target {new_points} must be a power of two"
        )));
    }
    let plans_old = Plans::new(u.points);
    let mut hat = u.clone();
    full_fft(&mut hat, &plans_old, true);
    let old = u.points;
    let scale = (new_points as f64 / old as f64).powi(u.n as i32);

    let mut out = GridFunction::zeros(u.n, new_points, u.box_half);
    let mut idx = vec![0usize; u.n];
    for flat in 0..hat.values.len() {
        let mut rem = flat;
        for j in (0..u.n).rev() {
            idx[j] = rem % old;
            rem /= old;
        }
        // per axis: same signed frequency in the target array; a refined
        // Nyquist bin splits evenly between +-N/2, a coarsened band drops
        // everything at or beyond the new Nyquist
        let mut targets: Vec<Vec<(usize, f64)>> = Vec::with_capacity(u.n);
        let mut dropped = false;
        for &i in &idx {
            let signed = if i < old / 2 { i as i64 } else { i as i64 - old as i64 };
            if new_points > old {
                if i == old / 2 {
                    targets.push(vec![(old / 2, 0.5), (new_points - old / 2, 0.5)]);
                } else if signed >= 0 {
                    targets.push(vec![(signed as usize, 1.0)]);
                } else {
                    targets.push(vec![((new_points as i64 + signed) as usize, 1.0)]);
                }
            } else {
                if signed.unsigned_abs() as usize >= new_points / 2 {
                    dropped = true;
                    break;
                }
                if signed >= 0 {
                    targets.push(vec![(signed as usize, 1.0)]);
                } else {
                    targets.push(vec![((new_points as i64 + signed) as usize, 1.0)]);
                }
            }
        }
        if dropped {
            continue;
        }
        let mut combos: Vec<(usize, f64)> = vec![(0, 1.0)];
        for t in &targets {
            let mut next = Vec::with_capacity(combos.len() * t.len());
            for &(base, w) in &combos {
                for &(j, wj) in t {
                    next.push((base * new_points + j, w * wj));
                }
            }
            combos = next;
        }
        for (target, w) in combos {
            out.values[target] += hat.values[flat] * w * scale;
        }
    }
    let plans_new = Plans::new(new_points);
    full_fft(&mut out, &plans_new, false);
    Ok(out)
}

/// Result of a propagation call.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub u_t: GridFunction,
    pub t: f64,
    /// Relative drift of the `L²` norm.
    pub norm_drift: f64,
    pub steps: usize,
    /// Set when the drift exceeded the configured bound.
    pub flagged: bool,
}

/// Exact free propagator `e^{−itH₀}` (Fourier multiplier `e^{−it|k|²/2}`).
pub fn free_propagate(u0: &GridFunction, t: f64) -> EvolutionResult {
    let plans = Plans::new(u0.points);
    let mut u = u0.clone();
    full_fft(&mut u, &plans, true);
    apply_radial_multiplier(&mut u, |k2| (-Complex64::i() * (t * k2 / 2.0)).exp());
    full_fft(&mut u, &plans, false);
    let n0 = u0.l2_norm();
    let drift = if n0 > 0.0 {
        (u.l2_norm() - n0).abs() / n0
    } else {
        0.0
    };
    EvolutionResult {
        u_t: u,
        t,
        norm_drift: drift,
        steps: 1,
        flagged: drift > 1e-12,
    }
}

/// Matrix-free action of the discretized Hamiltonian, with coefficient
/// samples and FFT plans prepared once.
pub struct DiscreteHamiltonian {
    pub field: CoefficientField,
    pub n: usize,
    pub points: usize,
    pub box_half: f64,
    a2: Vec<Vec<Vec<f64>>>,
    a1: Vec<Vec<f64>>,
    a0: Vec<f64>,
    has_a1: bool,
    has_a0: bool,
    plans: Plans,
}

impl DiscreteHamiltonian {
    pub fn new(field: &CoefficientField, template: &GridFunction) -> Result<Self> {
        if field.n != template.n {
            return Err(Error::Dimension {
                expected: field.n,
                got: template.n,
            });
        }
        let n = field.n;
        let np = template.points;
        let count = template.len();
        let sample = |which: Coefficient| -> Vec<f64> {
            let mut out = Vec::with_capacity(count);
            let mut idx = vec![0usize; n];
            let mut x = vec![0.0; n];
            for flat in 0..count {
                let mut rem = flat;
                for j in (0..n).rev() {
                    idx[j] = rem % np;
                    rem /= np;
                }
                for j in 0..n {
                    x[j] = template.coord(idx[j]);
                }
                out.push(field.eval_real(which, &x));
            }
            out
        };
        let a2: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|j| (0..n).map(|k| sample(Coefficient::A2(j, k))).collect())
            .collect();
        let a1: Vec<Vec<f64>> = (0..n).map(|j| sample(Coefficient::A1(j))).collect();
        let a0 = sample(Coefficient::A0);
        let has_a1 = a1.iter().any(|g| g.iter().any(|&v| v != 0.0));
        let has_a0 = a0.iter().any(|&v| v != 0.0);
        Ok(Self {
            field: field.clone(),
            n,
            points: np,
            box_half: template.box_half,
            a2,
            a1,
            a0,
            has_a1,
            has_a0,
            plans: Plans::new(np),
        })
    }

    /// `u ↦ Hu` (allocating). Symmetric by construction: every factor is
    /// exactly Hermitian on the discrete grid.
    pub fn apply(&self, u: &GridFunction) -> GridFunction {
        let mut out = u.clone();
        self.apply_slice(&u.values, &mut out.values);
        out
    }

    /// Matrix-free action on raw storage.
    pub fn apply_slice(&self, input: &[Complex64], output: &mut [Complex64]) {
        let n = self.n;
        let np = self.points;
        let count = input.len();
        for v in output.iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); count];
        let mut accum = vec![Complex64::new(0.0, 0.0); count];

        // kinetic part: 1/2 sum_j D_j ( sum_k a_{j,k} D_k u )
        for k in 0..n {
            scratch.copy_from_slice(input);
            fft_axis(&mut scratch, n, np, k, &self.plans, true);
            apply_axis_multiplier(&mut scratch, n, np, k, |kk| Complex64::new(kk, 0.0), self.box_half);
            fft_axis(&mut scratch, n, np, k, &self.plans, false);
            // scratch = D_k u
            for j in 0..n {
                let coeff = &self.a2[j][k];
                for i in 0..count {
                    accum[i] = scratch[i] * coeff[i];
                }
                fft_axis(&mut accum, n, np, j, &self.plans, true);
                apply_axis_multiplier(&mut accum, n, np, j, |kk| Complex64::new(kk, 0.0), self.box_half);
                fft_axis(&mut accum, n, np, j, &self.plans, false);
                for i in 0..count {
                    output[i] += 0.5 * accum[i];
                }
            }
        }

        // drift part: 1/2 sum_j (a_j D_j u + D_j (a_j u))
        if self.has_a1 {
            for j in 0..n {
                let coeff = &self.a1[j];
                scratch.copy_from_slice(input);
                fft_axis(&mut scratch, n, np, j, &self.plans, true);
                apply_axis_multiplier(&mut scratch, n, np, j, |kk| Complex64::new(kk, 0.0), self.box_half);
                fft_axis(&mut scratch, n, np, j, &self.plans, false);
                for i in 0..count {
                    output[i] += 0.5 * coeff[i] * scratch[i];
                }
                for i in 0..count {
                    accum[i] = coeff[i] * input[i];
                }
                fft_axis(&mut accum, n, np, j, &self.plans, true);
                apply_axis_multiplier(&mut accum, n, np, j, |kk| Complex64::new(kk, 0.0), self.box_half);
                fft_axis(&mut accum, n, np, j, &self.plans, false);
                for i in 0..count {
                    output[i] += 0.5 * accum[i];
                }
            }
        }

        if self.has_a0 {
            for i in 0..count {
                output[i] += self.a0[i] * input[i];
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropagateOptions {
    pub tol: f64,
    /// Krylov subspace dimension per substep.
    pub krylov_dim: usize,
    pub norm_drift_bound: f64,
    pub max_substeps: usize,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            krylov_dim: 40,
            norm_drift_bound: 1e-8,
            max_substeps: 2_000_000,
        }
    }
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn vec_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

struct LanczosStep {
    result: Vec<Complex64>,
    error_estimate: f64,
}

/// One Lanczos approximation of `e^{−i dt H} v` with full reorthogonalization;
/// `H` is Hermitian so the projected matrix is real symmetric tridiagonal.
fn lanczos_exp(
    ham: &DiscreteHamiltonian,
    v: &[Complex64],
    dt: f64,
    m: usize,
) -> LanczosStep {
    let dim = v.len();
    let beta0 = vec_norm(v);
    if beta0 == 0.0 {
        return LanczosStep {
            result: v.to_vec(),
            error_estimate: 0.0,
        };
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    basis.push(v.iter().map(|z| z / beta0).collect());
    let mut alphas: Vec<f64> = Vec::with_capacity(m);
    let mut betas: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut happy = false;

    for j in 0..m {
        ham.apply_slice(&basis[j], &mut w);
        let alpha = vec_dot(&basis[j], &w).re;
        alphas.push(alpha);
        for i in 0..dim {
            w[i] -= alpha * basis[j][i];
        }
        if j > 0 {
            let b = betas[j - 1];
            for i in 0..dim {
                w[i] -= b * basis[j - 1][i];
            }
        }
        // full reorthogonalization keeps the tridiagonal honest
        for q in &basis {
            let c = vec_dot(q, &w);
            for i in 0..dim {
                w[i] -= c * q[i];
            }
        }
        let beta = vec_norm(&w);
        if j + 1 == m {
            betas.push(beta);
            break;
        }
        if beta < 1e-13 * beta0 {
            betas.push(beta);
            happy = true;
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|z| z / beta).collect());
    }

    let mm = basis.len();
    let mut tmat = DMatrix::<f64>::zeros(mm, mm);
    for i in 0..mm {
        tmat[(i, i)] = alphas[i];
        if i + 1 < mm {
            tmat[(i, i + 1)] = betas[i];
            tmat[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(tmat);
    // small = Q exp(-i dt Lambda) Q^T e1
    let q = &eig.eigenvectors;
    let mut small = vec![Complex64::new(0.0, 0.0); mm];
    for i in 0..mm {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..mm {
            let phase = (-Complex64::i() * dt * eig.eigenvalues[l]).exp();
            acc += q[(i, l)] * phase * q[(0, l)];
        }
        small[i] = acc;
    }
    let mut result = vec![Complex64::new(0.0, 0.0); dim];
    for (j, basis_vec) in basis.iter().enumerate() {
        let c = beta0 * small[j];
        for i in 0..dim {
            result[i] += c * basis_vec[i];
        }
    }
    let error_estimate = if happy {
        0.0
    } else {
        beta0 * betas[mm - 1] * small[mm - 1].norm() * dt.abs()
    };
    LanczosStep {
        result,
        error_estimate,
    }
}

/// Krylov exponential time stepping for `e^{−itH} u0` with adaptive substeps;
/// the local error budget is `tol` spread over the whole interval.
pub fn propagate(
    ham: &DiscreteHamiltonian,
    u0: &GridFunction,
    t: f64,
    opts: &PropagateOptions,
) -> Result<EvolutionResult> {
    if opts.tol <= 0.0 {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let n0 = u0.l2_norm();
    if t == 0.0 || n0 == 0.0 {
        return Ok(EvolutionResult {
            u_t: u0.clone(),
            t,
            norm_drift: 0.0,
            steps: 0,
            flagged: false,
        });
    }
    let budget = opts.tol / t.abs(); // error per unit time, relative
    let mut u = u0.values.clone();
    let unorm0 = vec_norm(&u);

    // crude spectral-scale probe for the first substep
    let mut hu = vec![Complex64::new(0.0, 0.0); u.len()];
    ham.apply_slice(&u, &mut hu);
    let lambda_est = (vec_norm(&hu) / unorm0).max(1.0);
    let mut dt = (opts.krylov_dim as f64 / (4.0 * lambda_est)).min(t.abs()) * t.signum();

    let mut done = 0.0;
    let mut steps = 0usize;
    while (t - done).abs() > 1e-14 * t.abs() {
        if steps >= opts.max_substeps {
            return Err(Error::Propagation {
                t_reached: done,
                t_target: t,
                reason: format!("substep budget {} exhausted", opts.max_substeps),
            });
        }
        if (done + dt - t) * t.signum() > 0.0 {
            dt = t - done;
        }
        let step = lanczos_exp(ham, &u, dt, opts.krylov_dim);
        let allowed = budget * dt.abs() * unorm0;
        if step.error_estimate > allowed {
            if dt.abs() < 1e-13 * t.abs() {
                return Err(Error::Propagation {
                    t_reached: done,
                    t_target: t,
                    reason: "substep underflow in Krylov stepping".into(),
                });
            }
            dt *= 0.5;
            continue;
        }
        u = step.result;
        done += dt;
        steps += 1;
        if step.error_estimate < 0.05 * allowed {
            dt *= 1.4;
        }
    }
    let u_t = GridFunction {
        n: u0.n,
        points: u0.points,
        box_half: u0.box_half,
        values: u,
    };
    let drift = (u_t.l2_norm() - n0).abs() / n0;
    Ok(EvolutionResult {
        flagged: drift > opts.norm_drift_bound,
        u_t,
        t,
        norm_drift: drift,
        steps,
    })
}

/// The conjugated evolution `u(t) = e^{itH₀} e^{−itH} u₀`.
pub fn conjugated_evolution(
    ham: &DiscreteHamiltonian,
    u0: &GridFunction,
    t: f64,
    opts: &PropagateOptions,
) -> Result<EvolutionResult> {
    let inner = propagate(ham, u0, t, opts)?;
    let outer = free_propagate(&inner.u_t, -t); // e^{+itH0}
    let n0 = u0.l2_norm();
    let drift = if n0 > 0.0 {
        (outer.u_t.l2_norm() - n0).abs() / n0
    } else {
        0.0
    };
    Ok(EvolutionResult {
        u_t: outer.u_t,
        t,
        norm_drift: drift,
        steps: inner.steps + 1,
        flagged: drift > opts.norm_drift_bound,
    })
}

/// Exact metaplectic realization of `f^W(x + t·hD_x) u` as
/// `e^{itH₀,h} f(x) e^{−itH₀,h} u` with the h-scaled free multiplier
/// `e^{−ith|k|²/2}`.
pub fn weyl_linear_sandwich(
    f: &dyn Fn(&[f64]) -> f64,
    u: &GridFunction,
    t: f64,
    h: f64,
) -> GridFunction {
    let plans = Plans::new(u.points);
    let mut v = u.clone();
    full_fft(&mut v, &plans, true);
    apply_radial_multiplier(&mut v, |k2| (-Complex64::i() * (t * h * k2 / 2.0)).exp());
    full_fft(&mut v, &plans, false);
    // multiply by f on the grid
    let np = v.points;
    let mut idx = vec![0usize; v.n];
    let mut x = vec![0.0; v.n];
    for flat in 0..v.values.len() {
        let mut rem = flat;
        for j in (0..v.n).rev() {
            idx[j] = rem % np;
            rem /= np;
        }
        for j in 0..v.n {
            x[j] = v.coord(idx[j]);
        }
        v.values[flat] *= f(&x);
    }
    full_fft(&mut v, &plans, true);
    apply_radial_multiplier(&mut v, |k2| (Complex64::i() * (t * h * k2 / 2.0)).exp());
    full_fft(&mut v, &plans, false);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{conformal1d, flat, potential_only};

    fn gaussian(points: usize, box_half: f64) -> GridFunction {
        GridFunction::from_fn(1, points, box_half, |x| {
            Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0)
        })
    }

    #[test]
    fn free_propagate_identity_at_zero() {
        let u = gaussian(1024, 20.0);
        let r = free_propagate(&u, 0.0);
        assert!(u.linf_distance(&r.u_t) < 1e-14);
    }

    #[test]
    fn free_propagate_plane_wave_phase() {
        // on-grid plane wave is an exact eigenfunction of the multiplier
        let box_half = 10.0;
        let points = 256;
        let k = frequency(5, points, box_half);
        let u = GridFunction::from_fn(1, points, box_half, |x| (Complex64::i() * k * x[0]).exp());
        let t = 0.7;
        let r = free_propagate(&u, t);
        let expected_phase = (-Complex64::i() * (t * k * k / 2.0)).exp();
        let got = r.u_t.values[7] / u.values[7];
        assert!((got - expected_phase).norm() < 1e-12);
    }

    #[test]
    fn free_gaussian_closed_form() {
        let box_half = 20.0 * std::f64::consts::PI;
        let u = gaussian(4096, box_half);
        let t = 1.0;
        let r = free_propagate(&u, t);
        let want = GridFunction::from_fn(1, 4096, box_half, |x| {
            let z = Complex64::new(1.0, t);
            z.powf(-0.5) * (-x[0] * x[0] / (2.0 * z)).exp()
        });
        assert!(r.u_t.linf_distance(&want) < 1e-8);
        assert!(r.norm_drift < 1e-12);
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let field = conformal1d(1.0);
        let template = GridFunction::zeros(1, 256, 12.0);
        let ham = DiscreteHamiltonian::new(&field, &template).unwrap();
        for _ in 0..4 {
            let u = GridFunction::from_fn(1, 256, 12.0, |_| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let v = GridFunction::from_fn(1, 256, 12.0, |_| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let hu = ham.apply(&u);
            let hv = ham.apply(&v);
            let a = vec_dot(&hu.values, &v.values);
            let b = vec_dot(&u.values, &hv.values);
            assert!((a - b).norm() < 1e-10 * vec_norm(&u.values) * vec_norm(&v.values));
        }
    }

    #[test]
    fn flat_field_reduces_to_free() {
        let field = flat(1);
        let u = gaussian(2048, 20.0);
        let ham = DiscreteHamiltonian::new(&field, &u).unwrap();
        let r = propagate(&ham, &u, 1.0, &PropagateOptions::default()).unwrap();
        let free = free_propagate(&u, 1.0);
        assert!(r.u_t.linf_distance(&free.u_t) < 1e-8);
    }

    #[test]
    fn unitarity_conformal() {
        let field = conformal1d(1.0);
        let u = gaussian(2048, 20.0);
        let ham = DiscreteHamiltonian::new(&field, &u).unwrap();
        let r = propagate(&ham, &u, 1.0, &PropagateOptions::default()).unwrap();
        assert!(r.norm_drift < 1e-8, "drift {}", r.norm_drift);
        assert!(!r.flagged);
    }

    #[test]
    fn semigroup_self_consistency() {
        let field = conformal1d(1.0);
        let u = gaussian(2048, 20.0);
        let ham = DiscreteHamiltonian::new(&field, &u).unwrap();
        let opts = PropagateOptions::default();
        let half1 = propagate(&ham, &u, 0.5, &opts).unwrap();
        let half2 = propagate(&ham, &half1.u_t, 0.5, &opts).unwrap();
        let full = propagate(&ham, &u, 1.0, &opts).unwrap();
        assert!(half2.u_t.linf_distance(&full.u_t) < 5e-8);
    }

    #[test]
    fn conjugated_flat_is_identity() {
        let field = flat(1);
        let u = gaussian(2048, 20.0);
        let ham = DiscreteHamiltonian::new(&field, &u).unwrap();
        let r = conjugated_evolution(&ham, &u, 1.0, &PropagateOptions::default()).unwrap();
        assert!(r.u_t.linf_distance(&u) < 1e-8);
    }

    #[test]
    fn conjugated_zero_time_identity() {
        let field = conformal1d(1.0);
        let u = gaussian(1024, 20.0);
        let ham = DiscreteHamiltonian::new(&field, &u).unwrap();
        let r = conjugated_evolution(&ham, &u, 0.0, &PropagateOptions::default()).unwrap();
        assert!(r.u_t.linf_distance(&u) < 1e-13);
    }

    #[test]
    fn conjugated_evolution_satisfies_interaction_equation() {
        // central-difference d/dt u(t) vs -i L(t) u(t), with
        // L(t) = e^{itH0} (H - H0) e^{-itH0} applied through propagators
        let field = potential_only(1.0);
        let u = gaussian(2048, 20.0);
        let ham = DiscreteHamiltonian::new(&field, &u).unwrap();
        let opts = PropagateOptions {
            tol: 1e-11,
            ..Default::default()
        };
        let t = 0.5;
        let mut resid = Vec::new();
        for dt in [2e-2, 1e-2] {
            let up = conjugated_evolution(&ham, &u, t + dt, &opts).unwrap().u_t;
            let um = conjugated_evolution(&ham, &u, t - dt, &opts).unwrap().u_t;
            let mut dudt = up.clone();
            for i in 0..dudt.values.len() {
                dudt.values[i] = (up.values[i] - um.values[i]) / (2.0 * dt);
            }
            // L(t) u(t): push u(t) back through e^{-itH0}, apply (H - H0), pull forward
            let ut = conjugated_evolution(&ham, &u, t, &opts).unwrap().u_t;
            let back = free_propagate(&ut, t).u_t;
            let h_back = ham.apply(&back);
            let h0_back = {
                let f0 = flat(1);
                let h0 = DiscreteHamiltonian::new(&f0, &u).unwrap();
                h0.apply(&back)
            };
            let mut diff = back.clone();
            for i in 0..diff.values.len() {
                diff.values[i] = h_back.values[i] - h0_back.values[i];
            }
            let lu = free_propagate(&diff, -t).u_t;
            let mut gap = 0.0f64;
            for i in 0..lu.values.len() {
                gap = gap.max((dudt.values[i] + Complex64::i() * lu.values[i]).norm());
            }
            resid.push(gap);
        }
        // O(dt^2): halving dt shrinks the residual ~4x
        assert!(resid[1] < resid[0] / 2.5, "residuals {resid:?}");
    }

    #[test]
    fn weyl_identity_symbol() {
        let u = gaussian(1024, 20.0);
        let out = weyl_linear_sandwich(&|_| 1.0, &u, 1.3, 0.05);
        assert!(out.linf_distance(&u) < 1e-10);
    }

    #[test]
    fn weyl_zero_time_is_multiplication() {
        let u = gaussian(1024, 20.0);
        let f = |x: &[f64]| 1.0 / (1.0 + x[0] * x[0]);
        let out = weyl_linear_sandwich(&f, &u, 0.0, 0.05);
        let want = GridFunction::from_fn(1, 1024, 20.0, |x| {
            Complex64::new(f(x) * (-x[0] * x[0] / 2.0).exp(), 0.0)
        });
        assert!(out.linf_distance(&want) < 1e-10);
    }

    #[test]
    fn weyl_position_symbol_transports_coherent_state() {
        // mean position of (x + t h D) acting on a coherent state at (x0, xi0)
        // shifts the output/input Gaussian-moment ratio to x0 + t*xi0
        let h = 0.05;
        let (x0, xi0) = (0.3, 1.0);
        let u = GridFunction::from_fn(1, 4096, 20.0, |x| {
            (Complex64::i() * xi0 * x[0] / h).exp()
                * Complex64::new((-(x[0] - x0) * (x[0] - x0) / (2.0 * h)).exp(), 0.0)
        });
        let t = 1.0;
        let out = weyl_linear_sandwich(&|x| x[0], &u, t, h);
        // <u, (x + thD) u> / <u, u> = x0 + t xi0 + O(h)
        let num = vec_dot(&u.values, &out.values);
        let den = vec_dot(&u.values, &u.values);
        let mean = (num / den).re;
        assert!(
            (mean - (x0 + t * xi0)).abs() < 0.02,
            "mean {mean} vs {}",
            x0 + t * xi0
        );
    }

    #[test]
    fn group_law() {
        let field = conformal1d(0.5);
        let u = gaussian(2048, 20.0);
        let ham = DiscreteHamiltonian::new(&field, &u).unwrap();
        let opts = PropagateOptions::default();
        let a = propagate(&ham, &u, 0.3, &opts).unwrap();
        let b = propagate(&ham, &a.u_t, 0.7, &opts).unwrap();
        let c = propagate(&ham, &u, 1.0, &opts).unwrap();
        assert!(b.u_t.linf_distance(&c.u_t) < 10.0 * opts.tol);
    }

    #[test]
    fn low_pass_kills_high_band() {
        let box_half = 10.0;
        let points = 512;
        let klo = frequency(20, points, box_half);
        let khi = frequency(60, points, box_half);
        let u = GridFunction::from_fn(1, points, box_half, |x| {
            (Complex64::i() * klo * x[0]).exp() + (Complex64::i() * khi * x[0]).exp()
        });
        let cut = low_pass(&u, klo + 1.0, khi - 1.0);
        let want = GridFunction::from_fn(1, points, box_half, |x| (Complex64::i() * klo * x[0]).exp());
        assert!(cut.linf_distance(&want) < 1e-12);
    }

    #[test]
    fn resample_down_then_up_is_identity_on_band() {
        let box_half = 8.0;
        let u = GridFunction::from_fn(1, 512, box_half, |x| {
            Complex64::new((-x[0] * x[0]).exp(), (2.0 * x[0]).cos())
        });
        // content within the coarse band survives down- and upsampling exactly
        let banded = low_pass(&u, 20.0, 30.0); // coarse Nyquist is pi*128/8 = 50
        let coarse = resample(&banded, 128).unwrap();
        let back = resample(&coarse, 512).unwrap();
        assert!(back.linf_distance(&banded) < 1e-11);
    }

    #[test]
    fn resample_reproduces_band_limited_values() {
        let box_half = 8.0;
        let u = GridFunction::from_fn(1, 128, box_half, |x| {
            Complex64::new((-x[0] * x[0]).exp(), 0.1 * x[0].sin())
        });
        let fine = resample(&low_pass(&u, 10.0, 15.0), 512).unwrap();
        let lo = low_pass(&u, 10.0, 15.0);
        // every coarse point appears among the fine points (indices * 4)
        for i in 0..128 {
            let a = lo.values[i];
            let b = fine.values[i * 4];
            assert!((a - b).norm() < 1e-10, "mismatch at {i}");
        }
        assert!((fine.l2_norm() - lo.l2_norm()).abs() < 1e-10);
    }
}
