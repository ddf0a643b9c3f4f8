//! The Bargmann–FBI transform `Tu(z,h) = ∫ e^{−(z−x)²/2h} u(x) dx` and the
//! analytic-wavefront membership test built on it.
//!
//! A phase point `(x₀, ξ₀)` is regular for `u` when the weighted norm
//! `‖e^{−Φ₀/h} Tu‖_{L²(Ω)}`, `Φ₀(z) = |Im z|²/2`, decays like `e^{−δ/h}` with
//! `δ > 0` on a neighborhood `Ω` of `z₀ = x₀ − iξ₀`. The detector scans a
//! decreasing grid of `h`, fits the decay exponent, and issues a three-way
//! verdict. Fitting uses `log ν = a + b·(1/h) + c·log h` so that polynomial
//! prefactors (which carry no microlocal information) cannot leak into the
//! exponent estimate.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Point of the FBI phase space, `z = x₀ − iξ₀` componentwise.
#[derive(Debug, Clone, PartialEq)]
pub struct FbiPoint {
    pub z: Vec<Complex64>,
}

impl FbiPoint {
    pub fn new(z: Vec<Complex64>) -> Self {
        Self { z }
    }

    pub fn from_phase(x: &[f64], xi: &[f64]) -> Self {
        Self {
            z: x.iter()
                .zip(xi)
                .map(|(&a, &b)| Complex64::new(a, -b))
                .collect(),
        }
    }

    pub fn x(&self) -> Vec<f64> {
        self.z.iter().map(|v| v.re).collect()
    }

    pub fn xi(&self) -> Vec<f64> {
        self.z.iter().map(|v| -v.im).collect()
    }

    pub fn xi_norm(&self) -> f64 {
        self.z.iter().map(|v| v.im * v.im).sum::<f64>().sqrt()
    }
}

/// `Φ₀(z) = |Im z|²/2`, the growth gauge of `Tu`.
pub fn phi0(z: &[Complex64]) -> f64 {
    0.5 * z.iter().map(|v| v.im * v.im).sum::<f64>()
}

// The kernel modulus on an axis is e^{(Im z² − (Re z − x)²)/2h}, peaking at
// e^{Im z²/2h}; the numerical support cut at 1e-16 of that peak gives
// half-width sqrt(Im z² + 2h · 16 ln 10).
fn window_halfwidth(h: f64, im: f64) -> f64 {
    (im * im + 2.0 * h * 16.0 * std::f64::consts::LN_10).sqrt()
}

fn check_containment(u: &GridFunction, z: &[Complex64], h: f64) -> Result<()> {
    if h <= 0.0 {
        return Err(Error::Argument(format!("scale h must be positive, got {h}")));
    }
    if z.len() != u.n {
        return Err(Error::Dimension {
            expected: u.n,
            got: z.len(),
        });
    }
    for (axis, zj) in z.iter().enumerate() {
        let half = window_halfwidth(h, zj.im);
        if zj.re.abs() + half > u.box_half {
            return Err(Error::WindowLeak {
                axis,
                center: zj.re,
                needed: half,
                edge: u.box_half,
            });
        }
    }
    Ok(())
}

/// Quadrature of `e^{−(z−x)²/2h} u(x)` over the grid; `(z−x)²` is the
/// holomorphic square `Σ (z_j − x_j)²`. The sum is restricted per axis to the
/// window support, so the cost is independent of the box size.
pub fn fbi_transform(u: &GridFunction, z: &[Complex64], h: f64) -> Result<Complex64> {
    check_containment(u, z, h)?;
    let dx = u.dx();
    let np = u.points;

    // per-axis window factors over the supported index range
    let mut ranges: Vec<(usize, usize)> = Vec::with_capacity(u.n);
    let mut weights: Vec<Vec<Complex64>> = Vec::with_capacity(u.n);
    for zj in z.iter() {
        let half = window_halfwidth(h, zj.im);
        let lo = (((zj.re - half) + u.box_half) / dx).floor().max(0.0) as usize;
        let hi = ((((zj.re + half) + u.box_half) / dx).ceil() as usize).min(np - 1);
        let mut w = Vec::with_capacity(hi - lo + 1);
        for i in lo..=hi {
            let x = u.coord(i);
            let d = zj - x;
            w.push((-(d * d) / (2.0 * h)).exp());
        }
        ranges.push((lo, hi));
        weights.push(w);
    }

    let mut acc = Complex64::new(0.0, 0.0);
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    'outer: loop {
        let mut flat = 0usize;
        let mut w = Complex64::new(1.0, 0.0);
        for j in 0..u.n {
            flat = flat * np + idx[j];
            w *= weights[j][idx[j] - ranges[j].0];
        }
        acc += w * u.values[flat];
        // advance the multi-index
        let mut axis = u.n;
        loop {
            if axis == 0 {
                break 'outer;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] <= ranges[axis].1 {
                break;
            }
            idx[axis] = ranges[axis].0;
        }
    }
    Ok(acc * dx.powi(u.n as i32))
}

/// Sampling plan for the neighborhood `Ω` around a point: a product grid of
/// `samples_per_axis` points per sampled real direction, radius `re_radius`
/// in `Re z` and `im_radius` in `Im z` (an axis with zero radius collapses to
/// the center, contributing no measure factor).
#[derive(Debug, Clone, Serialize)]
pub struct OmegaSpec {
    pub re_radius: f64,
    pub im_radius: f64,
    pub samples_per_axis: usize,
}

impl Default for OmegaSpec {
    fn default() -> Self {
        Self {
            re_radius: 0.1,
            im_radius: 0.0,
            samples_per_axis: 5,
        }
    }
}

impl OmegaSpec {
    fn offsets(&self, n: usize) -> (Vec<Vec<Complex64>>, f64) {
        // product grid over the active axes with midpoint-rule cell measure
        let m = self.samples_per_axis.max(1);
        let mut axes: Vec<Vec<f64>> = Vec::new();
        let mut measure = 1.0;
        let line = |r: f64| -> Vec<f64> {
            if m == 1 {
                vec![0.0]
            } else {
                (0..m)
                    .map(|i| -r + 2.0 * r * i as f64 / (m - 1) as f64)
                    .collect()
            }
        };
        for _ in 0..n {
            if self.re_radius > 0.0 {
                axes.push(line(self.re_radius));
                measure *= 2.0 * self.re_radius / m as f64;
            } else {
                axes.push(vec![0.0]);
            }
        }
        for _ in 0..n {
            if self.im_radius > 0.0 {
                axes.push(line(self.im_radius));
                measure *= 2.0 * self.im_radius / m as f64;
            } else {
                axes.push(vec![0.0]);
            }
        }
        let mut offsets = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(offsets.len() * axis.len());
            for base in &offsets {
                for &v in axis {
                    let mut b = base.clone();
                    b.push(v);
                    next.push(b);
                }
            }
            offsets = next;
        }
        let complex_offsets = offsets
            .into_iter()
            .map(|o| {
                (0..n)
                    .map(|j| Complex64::new(o[j], o[n + j]))
                    .collect::<Vec<_>>()
            })
            .collect();
        (complex_offsets, measure)
    }
}

/// Discrete `L²(Ω)` norm of `e^{−Φ₀(z)/h} |Tu(z,h)|` over the Ω sample.
pub fn weighted_fbi_norm(
    u: &GridFunction,
    center: &FbiPoint,
    omega: &OmegaSpec,
    h: f64,
) -> Result<f64> {
    let (offsets, measure) = omega.offsets(u.n);
    let mut acc = 0.0;
    for off in &offsets {
        let z: Vec<Complex64> = center.z.iter().zip(off).map(|(a, b)| a + b).collect();
        let t = fbi_transform(u, &z, h)?;
        let v = t.norm() * (-phi0(&z) / h).exp();
        acc += v * v;
    }
    Ok((acc * measure).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Regular,
    Singular,
    Undetermined,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Regular => write!(f, "regular"),
            Verdict::Singular => write!(f, "singular"),
            Verdict::Undetermined => write!(f, "undetermined"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionThresholds {
    pub delta_reg: f64,
    pub delta_sing: f64,
    pub r2_min: f64,
    /// Norms below this are rounding-dominated and dropped from the fit.
    pub norm_floor: f64,
}

impl Default for DetectionThresholds {
    fn default() -> Self {
        Self {
            delta_reg: 0.05,
            delta_sing: 0.01,
            r2_min: 0.98,
            // the quadrature computes Tu by cancellation against terms of
            // modulus up to e^{Phi0/h}; weighted norms below this are noise
            norm_floor: 1e-15,
        }
    }
}

/// Per-point decay scan: the h-grid, measured log-norms, the fitted rate
/// `δ̂`, fit quality, and the verdict.
#[derive(Debug, Clone)]
pub struct DecayEstimate {
    pub point: FbiPoint,
    pub h_values: Vec<f64>,
    pub log_norms: Vec<f64>,
    pub delta_hat: f64,
    pub r2: f64,
    pub verdict: Verdict,
    pub degenerate: bool,
}

/// Least squares of `log ν` against `(1/h, log h, 1)`; returns `(δ̂, r²)`.
pub(crate) fn fit_decay_rate(hs: &[f64], log_norms: &[f64]) -> (f64, f64) {
    let m = hs.len();
    // normal equations for the 3-parameter model
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for i in 0..m {
        let row = [1.0 / hs[i], hs[i].ln(), 1.0];
        for a in 0..3 {
            for b in 0..3 {
                ata[a][b] += row[a] * row[b];
            }
            atb[a] += row[a] * log_norms[i];
        }
    }
    let coef = solve3(ata, atb);
    let mut ss_res = 0.0;
    let mean = log_norms.iter().sum::<f64>() / m as f64;
    let mut ss_tot = 0.0;
    for i in 0..m {
        let pred = coef[0] / hs[i] + coef[1] * hs[i].ln() + coef[2];
        ss_res += (log_norms[i] - pred) * (log_norms[i] - pred);
        ss_tot += (log_norms[i] - mean) * (log_norms[i] - mean);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (-coef[0], r2)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        for row in 0..3 {
            if row == col {
                continue;
            }
            let f = a[row][col] / d;
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    [b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]]
}

/// Scan `h_grid` (strictly decreasing, at least three entries) at `z0` and fit
/// the decay rate of the weighted norm.
pub fn decay_rate_estimate(
    u: &GridFunction,
    z0: &FbiPoint,
    h_grid: &[f64],
    omega: &OmegaSpec,
    thresholds: &DetectionThresholds,
) -> Result<DecayEstimate> {
    if h_grid.len() < 3 {
        return Err(Error::Argument(
            "decay scan needs at least three h values".into(),
        ));
    }
    if h_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Argument("h grid must be strictly decreasing".into()));
    }
    if z0.xi_norm() == 0.0 {
        return Err(Error::Argument(
            "wavefront query requires xi = -Im z != 0".into(),
        ));
    }
    let mut hs = Vec::new();
    let mut logs = Vec::new();
    for &h in h_grid {
        let v = weighted_fbi_norm(u, z0, omega, h)?;
        if v > thresholds.norm_floor {
            hs.push(h);
            logs.push(v.ln());
        } else {
            break; // the scan saturated at the noise floor
        }
    }
    if hs.len() < 3 {
        // censored scan: the norm dove under the floor before three usable
        // points; a decay that outruns double precision is itself a regular
        // certificate when the surviving pair already exceeds delta_reg
        if hs.len() == 2 {
            let pair_rate = -(logs[1] - logs[0]) / (1.0 / hs[1] - 1.0 / hs[0]);
            if pair_rate >= thresholds.delta_reg {
                return Ok(DecayEstimate {
                    point: z0.clone(),
                    h_values: hs,
                    log_norms: logs,
                    delta_hat: pair_rate,
                    r2: 1.0,
                    verdict: Verdict::Regular,
                    degenerate: false,
                });
            }
        }
        return Ok(DecayEstimate {
            point: z0.clone(),
            h_values: hs,
            log_norms: logs,
            delta_hat: 0.0,
            r2: 0.0,
            verdict: Verdict::Undetermined,
            degenerate: true,
        });
    }
    let (delta_hat, r2) = fit_decay_rate(&hs, &logs);
    let verdict = if delta_hat >= thresholds.delta_reg && r2 >= thresholds.r2_min {
        Verdict::Regular
    } else if delta_hat <= thresholds.delta_sing {
        Verdict::Singular
    } else {
        Verdict::Undetermined
    };
    Ok(DecayEstimate {
        point: z0.clone(),
        h_values: hs,
        log_norms: logs,
        delta_hat,
        r2,
        verdict,
        degenerate: false,
    })
}

/// One row of a wavefront report.
#[derive(Debug, Clone)]
pub struct WavefrontRow {
    pub seed: FbiPoint,
    pub estimate: Option<DecayEstimate>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct WavefrontReport {
    pub rows: Vec<WavefrontRow>,
}

impl WavefrontReport {
    /// CSV rows `x0.., xi0.., delta_hat, r2, verdict`.
    pub fn to_csv(&self) -> String {
        let n = self.rows.first().map(|r| r.seed.z.len()).unwrap_or(0);
        let mut out = String::new();
        for j in 0..n {
            out.push_str(&format!("x0_{},", j + 1));
        }
        for j in 0..n {
            out.push_str(&format!("xi0_{},", j + 1));
        }
        out.push_str("delta_hat,r2,verdict\n");
        for row in &self.rows {
            for v in row.seed.x() {
                out.push_str(&format!("{v},"));
            }
            for v in row.seed.xi() {
                out.push_str(&format!("{v},"));
            }
            match (&row.estimate, &row.error) {
                (Some(e), _) => {
                    out.push_str(&format!("{},{},{}\n", e.delta_hat, e.r2, e.verdict))
                }
                (None, Some(err)) => out.push_str(&format!(",,error: {err}\n")),
                _ => out.push_str(",,\n"),
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "x0": r.seed.x(),
                        "xi0": r.seed.xi(),
                        "delta_hat": r.estimate.as_ref().map(|e| e.delta_hat),
                        "r2": r.estimate.as_ref().map(|e| e.r2),
                        "verdict": r.estimate.as_ref().map(|e| e.verdict.to_string()),
                        "h_values": r.estimate.as_ref().map(|e| e.h_values.clone()),
                        "log_norms": r.estimate.as_ref().map(|e| e.log_norms.clone()),
                        "error": r.error,
                    })
                })
                .collect(),
        )
    }
}

/// Run the decay test on every seed; per-seed failures become report entries.
pub fn wavefront_indicator(
    u: &GridFunction,
    seeds: &[FbiPoint],
    h_grid: &[f64],
    omega: &OmegaSpec,
    thresholds: &DetectionThresholds,
) -> WavefrontReport {
    let mut report = WavefrontReport::default();
    for seed in seeds {
        match decay_rate_estimate(u, seed, h_grid, omega, thresholds) {
            Ok(est) => report.rows.push(WavefrontRow {
                seed: seed.clone(),
                estimate: Some(est),
                error: None,
            }),
            Err(e) => report.rows.push(WavefrontRow {
                seed: seed.clone(),
                estimate: None,
                error: Some(e.to_string()),
            }),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_grid() -> GridFunction {
        GridFunction::from_fn(1, 4096, 20.0, |x| {
            Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0)
        })
    }

    fn jump_grid() -> GridFunction {
        GridFunction::from_fn(1, 16384, 24.0, |x| {
            let env = (-x[0] * x[0] / 2.0).exp();
            let step = if x[0] > 0.0 {
                1.0
            } else if x[0] == 0.0 {
                0.5
            } else {
                0.0
            };
            Complex64::new(step * env, 0.0)
        })
    }

    fn gaussian_closed_form(z: Complex64, h: f64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        (2.0 * std::f64::consts::PI * h / (1.0 + h)).sqrt() * (-z * z / (2.0 * (1.0 + h))).exp()
            * one
    }

    #[test]
    fn zero_function_transforms_to_zero() {
        let u = GridFunction::zeros(1, 512, 10.0);
        let v = fbi_transform(&u, &[Complex64::new(0.3, -1.0)], 0.1).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
        let n = weighted_fbi_norm(
            &u,
            &FbiPoint::from_phase(&[0.0], &[1.0]),
            &OmegaSpec::default(),
            0.05,
        )
        .unwrap();
        assert_eq!(n, 0.0);
    }

    #[test]
    fn gaussian_closed_form_agreement() {
        let u = gaussian_grid();
        let z = Complex64::new(1.0, -1.0);
        let got = fbi_transform(&u, &[z], 0.1).unwrap();
        let want = gaussian_closed_form(z, 0.1);
        assert!((got - want).norm() < 1e-8 * want.norm());
    }

    #[test]
    fn gaussian_closed_form_random_sample() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let u = gaussian_grid();
        // |Im z| <= 0.9 keeps the kernel's modulus peak e^{Im z^2/2h} within
        // what double precision can cancel to 1e-7 relative at h = 0.025
        for _ in 0..20 {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.9..-0.3));
            let h = rng.gen_range(0.025..0.2);
            let got = fbi_transform(&u, &[z], h).unwrap();
            let want = gaussian_closed_form(z, h);
            assert!(
                (got - want).norm() <= 1e-7 * want.norm(),
                "rel err {} at z={z}, h={h}",
                (got - want).norm() / want.norm()
            );
        }
    }

    #[test]
    fn plane_wave_closed_form() {
        // u = e^{i omega x} over the whole (large) box; window containment
        // keeps the quadrature away from the edges
        let omega = 2.0;
        let u = GridFunction::from_fn(1, 8192, 40.0, |x| (Complex64::i() * omega * x[0]).exp());
        let z = Complex64::new(0.5, -1.2);
        let h = 0.05;
        let got = fbi_transform(&u, &[z], h).unwrap();
        let want = (2.0 * std::f64::consts::PI * h).sqrt()
            * (Complex64::i() * omega * z - omega * omega * h / 2.0).exp();
        assert!((got - want).norm() < 1e-6 * want.norm());
    }

    #[test]
    fn window_leak_is_reported() {
        let u = GridFunction::zeros(1, 256, 2.0);
        let err = fbi_transform(&u, &[Complex64::new(1.9, -1.0)], 0.2).unwrap_err();
        assert!(matches!(err, Error::WindowLeak { .. }));
        let err2 = fbi_transform(&u, &[Complex64::new(0.0, -1.0)], -0.1).unwrap_err();
        assert!(matches!(err2, Error::Argument(_)));
    }

    #[test]
    fn conjugation_symmetry() {
        // T(conj u)(conj z, h) = conj(Tu(z,h)) for grids sampled on the reals
        let u = GridFunction::from_fn(1, 2048, 16.0, |x| {
            Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.3 * x[0] * (-x[0] * x[0]).exp())
        });
        let uc = GridFunction {
            values: u.values.iter().map(|v| v.conj()).collect(),
            ..u.clone()
        };
        let z = Complex64::new(0.7, -0.9);
        let a = fbi_transform(&uc, &[z.conj()], 0.07).unwrap();
        let b = fbi_transform(&u, &[z], 0.07).unwrap().conj();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn linearity() {
        let u = gaussian_grid();
        let mut v = u.clone();
        for w in &mut v.values {
            *w *= Complex64::new(2.0, 1.0);
        }
        let z = [Complex64::new(0.2, -1.0)];
        let a = fbi_transform(&v, &z, 0.1).unwrap();
        let b = fbi_transform(&u, &z, 0.1).unwrap() * Complex64::new(2.0, 1.0);
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn monotone_containment() {
        let u = gaussian_grid();
        let center = FbiPoint::from_phase(&[0.0], &[1.0]);
        let big = weighted_fbi_norm(
            &u,
            &center,
            &OmegaSpec {
                re_radius: 0.1,
                ..Default::default()
            },
            0.05,
        )
        .unwrap();
        let small = weighted_fbi_norm(
            &u,
            &center,
            &OmegaSpec {
                re_radius: 0.05,
                ..Default::default()
            },
            0.05,
        )
        .unwrap();
        assert!(small <= big);
    }

    #[test]
    fn gaussian_is_regular_with_calibrated_rate() {
        let u = gaussian_grid();
        let est = decay_rate_estimate(
            &u,
            &FbiPoint::from_phase(&[0.0], &[1.0]),
            &[0.2, 0.1, 0.05, 0.025],
            &OmegaSpec::default(),
            &DetectionThresholds::default(),
        )
        .unwrap();
        assert_eq!(est.verdict, Verdict::Regular);
        assert!((est.delta_hat - 0.5).abs() <= 0.02, "delta {}", est.delta_hat);
        assert!(est.r2 >= 0.999);
    }

    #[test]
    fn jump_is_singular_at_the_jump() {
        let u = jump_grid();
        let est = decay_rate_estimate(
            &u,
            &FbiPoint::from_phase(&[0.0], &[1.0]),
            &[0.2, 0.1, 0.05, 0.025],
            &OmegaSpec::default(),
            &DetectionThresholds::default(),
        )
        .unwrap();
        assert_eq!(est.verdict, Verdict::Singular);
        assert!(est.delta_hat.abs() < 0.01, "delta {}", est.delta_hat);
    }

    #[test]
    fn jump_is_regular_away_from_the_jump() {
        let u = jump_grid();
        let est = decay_rate_estimate(
            &u,
            &FbiPoint::from_phase(&[2.0], &[1.0]),
            &[0.2, 0.1, 0.05, 0.025],
            &OmegaSpec::default(),
            &DetectionThresholds::default(),
        )
        .unwrap();
        assert_eq!(est.verdict, Verdict::Regular);
        assert!(est.delta_hat > 0.1);
    }

    #[test]
    fn intertwining_with_spectral_derivative() {
        // T(D_x u) = D_z Tu up to grid and finite-difference error
        let u = gaussian_grid();
        let du = crate::schrod::spectral_derivative(&u, 0);
        let z = Complex64::new(0.4, -1.1);
        let h = 0.1;
        let lhs = fbi_transform(&du, &[z], h).unwrap();
        let tau = 1e-4;
        let tp = fbi_transform(&u, &[z + tau], h).unwrap();
        let tm = fbi_transform(&u, &[z - tau], h).unwrap();
        let rhs = -Complex64::i() * (tp - tm) / (2.0 * tau);
        assert!((lhs - rhs).norm() < 1e-6, "gap {}", (lhs - rhs).norm());
    }

    #[test]
    fn flat_nonanalytic_function_detected() {
        // e^{-1/x} H(x) is smooth but not analytic at 0: not regular there
        let u = GridFunction::from_fn(1, 16384, 24.0, |x| {
            if x[0] > 0.0 {
                Complex64::new((-1.0 / x[0]).exp() * (-x[0] * x[0] / 2.0).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let at_sing = decay_rate_estimate(
            &u,
            &FbiPoint::from_phase(&[0.0], &[1.0]),
            &[0.2, 0.1, 0.05, 0.025],
            &OmegaSpec::default(),
            &DetectionThresholds::default(),
        )
        .unwrap();
        assert_ne!(at_sing.verdict, Verdict::Singular); // weak Gevrey decay, not a jump
        let away = decay_rate_estimate(
            &u,
            &FbiPoint::from_phase(&[2.0], &[1.0]),
            &[0.2, 0.1, 0.05, 0.025],
            &OmegaSpec::default(),
            &DetectionThresholds::default(),
        )
        .unwrap();
        assert_eq!(away.verdict, Verdict::Regular);
        // the rate at the non-analytic point is well below the analytic one
        assert!(at_sing.delta_hat < 0.5 * away.delta_hat);
    }

    #[test]
    fn empty_seed_list_gives_empty_report() {
        let u = gaussian_grid();
        let rep = wavefront_indicator(
            &u,
            &[],
            &[0.2, 0.1, 0.05],
            &OmegaSpec::default(),
            &DetectionThresholds::default(),
        );
        assert!(rep.rows.is_empty());
    }

    #[test]
    fn gaussian_all_regular_over_seed_grid() {
        let u = gaussian_grid();
        let mut seeds = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                let x = -1.0 + 0.5 * i as f64;
                let xi = [-2.0, -1.0, 0.7, 1.0, 2.0][j];
                seeds.push(FbiPoint::from_phase(&[x], &[xi]));
            }
        }
        let rep = wavefront_indicator(
            &u,
            &seeds,
            &[0.2, 0.1, 0.05, 0.025],
            &OmegaSpec::default(),
            &DetectionThresholds::default(),
        );
        for row in &rep.rows {
            let est = row.estimate.as_ref().unwrap();
            assert_eq!(est.verdict, Verdict::Regular, "seed {:?}", row.seed);
        }
    }

    #[test]
    fn degenerate_fit_flagged() {
        let u = GridFunction::zeros(1, 512, 10.0);
        let est = decay_rate_estimate(
            &u,
            &FbiPoint::from_phase(&[0.0], &[1.0]),
            &[0.2, 0.1, 0.05],
            &OmegaSpec::default(),
            &DetectionThresholds::default(),
        )
        .unwrap();
        assert!(est.degenerate);
        assert_eq!(est.verdict, Verdict::Undetermined);
    }
}
