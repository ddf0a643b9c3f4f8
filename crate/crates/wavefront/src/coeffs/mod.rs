//! Metric coefficient fields: evaluation on real and complex arguments,
//! derivative helpers, and numerical validation of the short-range decay
//! hypotheses.
//!
//! A field carries evaluators for the second-order coefficients `a2[j][k]`,
//! first-order `a1[j]`, and the potential `a0`, together with decay metadata
//! `(sigma, c0)` and the half-angle `nu` of the holomorphy tube
//! `Γ_ν = { z : |Im z| < ν <Re z> }`. Evaluators are pure and `Send + Sync`;
//! holomorphy inside the tube is trusted metadata — it cannot be decided by
//! sampling, which is why validation only probes finiteness there.

pub mod expr;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Evaluator = Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>;

/// Which coefficient to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    /// Second-order `a_{j,k}`.
    A2(usize, usize),
    /// First-order `a_j`.
    A1(usize),
    /// Potential `a_0`.
    A0,
}

#[derive(Clone)]
pub struct CoefficientField {
    pub n: usize,
    a2: Vec<Vec<Evaluator>>,
    a1: Vec<Evaluator>,
    a0: Evaluator,
    pub sigma: f64,
    pub c0: f64,
    pub nu: f64,
    pub name: String,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("n", &self.n)
            .field("sigma", &self.sigma)
            .field("c0", &self.c0)
            .field("nu", &self.nu)
            .field("name", &self.name)
            .finish()
    }
}

fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Japanese bracket of a real vector.
pub fn jbracket(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

impl CoefficientField {
    pub fn new(
        n: usize,
        a2: Vec<Vec<Evaluator>>,
        a1: Vec<Evaluator>,
        a0: Evaluator,
        sigma: f64,
        c0: f64,
        nu: f64,
        name: impl Into<String>,
    ) -> Self {
        assert_eq!(a2.len(), n);
        assert!(a2.iter().all(|row| row.len() == n));
        assert_eq!(a1.len(), n);
        Self {
            n,
            a2,
            a1,
            a0,
            sigma,
            c0,
            nu,
            name: name.into(),
        }
    }

    /// Build a field from grammar expressions (see [`expr`]).
    pub fn from_expressions(
        n: usize,
        a2: &[Vec<String>],
        a1: &[String],
        a0: &str,
        sigma: f64,
        c0: f64,
        nu: f64,
        name: impl Into<String>,
    ) -> Result<Self> {
        if a2.len() != n || a2.iter().any(|r| r.len() != n) || a1.len() != n {
            return Err(Error::Config(format!(
                "field expressions must be n x n + n + 1 with n = {n}"
            )));
        }
        let compile = |src: &str| -> Result<Evaluator> {
            let e = expr::Expr::parse(src)?;
            if e.arity() > n {
                return Err(Error::Expr(format!(
                    "expression {src:?} mentions coordinate x{} but n = {n}",
                    e.arity()
                )));
            }
            Ok(Arc::new(move |z: &[Complex64]| e.eval(z)) as Evaluator)
        };
        let mut rows = Vec::with_capacity(n);
        for r in a2 {
            let mut row = Vec::with_capacity(n);
            for src in r {
                row.push(compile(src)?);
            }
            rows.push(row);
        }
        let firsts = a1.iter().map(|s| compile(s)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(n, rows, firsts, compile(a0)?, sigma, c0, nu, name))
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    /// Membership in the holomorphy tube `Γ_ν`.
    pub fn in_tube(&self, z: &[Complex64]) -> bool {
        let im: f64 = z.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
        let re: Vec<f64> = z.iter().map(|v| v.re).collect();
        im < self.nu * jbracket(&re)
    }

    fn require_tube(&self, z: &[Complex64]) -> Result<()> {
        self.check_dim(z.len())?;
        if !self.in_tube(z) {
            let im: f64 = z.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
            let re: Vec<f64> = z.iter().map(|v| v.re).collect();
            return Err(Error::OutsideTube {
                im_norm: im,
                bound: self.nu * jbracket(&re),
            });
        }
        Ok(())
    }

    /// Holomorphic extension value of the selected coefficient at a tube point.
    pub fn eval_complex(&self, which: Coefficient, z: &[Complex64]) -> Result<Complex64> {
        self.require_tube(z)?;
        Ok(self.eval_complex_unchecked(which, z))
    }

    pub(crate) fn eval_complex_unchecked(&self, which: Coefficient, z: &[Complex64]) -> Complex64 {
        match which {
            Coefficient::A2(j, k) => (self.a2[j][k])(z),
            Coefficient::A1(j) => (self.a1[j])(z),
            Coefficient::A0 => (self.a0)(z),
        }
    }

    /// Real-argument evaluation (imaginary part is checked to vanish in tests).
    pub fn eval_real(&self, which: Coefficient, x: &[f64]) -> f64 {
        self.eval_complex_unchecked(which, &to_complex(x)).re
    }

    /// `a_{j,k}(x)` as a dense matrix on a real point.
    pub fn a2_matrix(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let zx = to_complex(x);
        (0..self.n)
            .map(|j| {
                (0..self.n)
                    .map(|k| self.eval_complex_unchecked(Coefficient::A2(j, k), &zx).re)
                    .collect()
            })
            .collect()
    }

    /// Principal symbol `p(x, ξ) = ½ Σ a_{j,k}(x) ξ_j ξ_k`.
    pub fn eval_symbol(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        self.check_dim(xi.len())?;
        let a = self.a2_matrix(x);
        let mut p = 0.0;
        for j in 0..self.n {
            for k in 0..self.n {
                p += a[j][k] * xi[j] * xi[k];
            }
        }
        Ok(0.5 * p)
    }

    /// Gradient of `a_{j,k}` at a real point by complex-step differentiation
    /// (exact to rounding for holomorphic evaluators).
    pub fn a2_grad_real(&self, j: usize, k: usize, x: &[f64]) -> Vec<f64> {
        const H: f64 = 1e-100;
        let mut z = to_complex(x);
        (0..self.n)
            .map(|m| {
                z[m].im = H;
                let d = self.eval_complex_unchecked(Coefficient::A2(j, k), &z).im / H;
                z[m].im = 0.0;
                d
            })
            .collect()
    }

    /// Holomorphic partial `∂a/∂z_m` at a complex point: fourth-order central
    /// stencil with step along the real axis of the m-th coordinate.
    pub fn coeff_dz(&self, which: Coefficient, z: &[Complex64], m: usize) -> Complex64 {
        const TAU: f64 = 1e-3;
        let mut w = z.to_vec();
        let mut sample = |offset: f64| {
            w[m] = z[m] + offset;
            self.eval_complex_unchecked(which, &w)
        };
        let f_m2 = sample(-2.0 * TAU);
        let f_m1 = sample(-TAU);
        let f_p1 = sample(TAU);
        let f_p2 = sample(2.0 * TAU);
        (f_m2 - 8.0 * f_m1 + 8.0 * f_p1 - f_p2) / (12.0 * TAU)
    }
}

/// Outcome of one sampled decay-bound comparison.
#[derive(Debug, Clone)]
pub struct DecaySample {
    pub coefficient: String,
    pub point: Vec<f64>,
    pub ratio: f64,
    pub flagged: bool,
}

/// Outcome of one tube-finiteness probe.
#[derive(Debug, Clone)]
pub struct TubeSample {
    pub coefficient: String,
    pub point: Vec<Complex64>,
    pub magnitude: f64,
    pub finite: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub decay: Vec<DecaySample>,
    pub tube: Vec<TubeSample>,
    pub symmetry_max_gap: f64,
    pub realness_max_im: f64,
    pub min_eigenvalue: f64,
    pub flagged_count: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.flagged_count == 0
            && self.symmetry_max_gap <= 1e-12
            && self.realness_max_im <= 1e-14
            && self.min_eigenvalue > 0.0
    }
}

/// Sampling plan for [`validate_assumption_a`].
#[derive(Debug, Clone)]
pub struct SamplingSpec {
    /// Points per axis-aligned ray (spaced quadratically out to `ray_extent`).
    pub ray_points: usize,
    pub ray_extent: f64,
    /// Random points inside the tube (finiteness probes).
    pub tube_points: usize,
    pub seed: u64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            ray_points: 40,
            ray_extent: 40.0,
            tube_points: 60,
            seed: 0,
        }
    }
}

/// Checks the declared short-range bounds on real rays, probes finiteness on
/// random tube points, and verifies symmetry / realness / positive
/// definiteness. Violations are report entries, never hard errors.
pub fn validate_assumption_a(field: &CoefficientField, samples: &SamplingSpec) -> ValidationReport {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(samples.seed);
    let n = field.n;
    let mut report = ValidationReport::default();
    report.min_eigenvalue = f64::INFINITY;
    const RATIO_TOL: f64 = 1.0 + 1e-9;

    let mut real_points: Vec<Vec<f64>> = Vec::new();
    for axis in 0..n {
        for dir in [-1.0, 1.0] {
            for i in 0..samples.ray_points {
                let frac = (i as f64 + 0.5) / samples.ray_points as f64;
                let r = samples.ray_extent * frac * frac;
                let mut x = vec![0.0; n];
                x[axis] = dir * r;
                real_points.push(x);
            }
        }
    }

    for x in &real_points {
        let jb = jbracket(x);
        let zx = to_complex(x);
        for j in 0..n {
            for k in 0..n {
                let v = field.eval_complex_unchecked(Coefficient::A2(j, k), &zx);
                report.realness_max_im = report.realness_max_im.max(v.im.abs());
                let reference = if j == k { 1.0 } else { 0.0 };
                let bound = field.c0 * jb.powf(-1.0 - field.sigma);
                let ratio = (v.re - reference).abs() / bound;
                let flagged = ratio > RATIO_TOL;
                if flagged {
                    report.flagged_count += 1;
                }
                report.decay.push(DecaySample {
                    coefficient: format!("a{}{}", j + 1, k + 1),
                    point: x.clone(),
                    ratio,
                    flagged,
                });
                let vkj = field.eval_complex_unchecked(Coefficient::A2(k, j), &zx);
                report.symmetry_max_gap = report.symmetry_max_gap.max((v - vkj).norm());
            }
            let v1 = field.eval_complex_unchecked(Coefficient::A1(j), &zx);
            report.realness_max_im = report.realness_max_im.max(v1.im.abs());
            let bound = field.c0 * jb.powf(-field.sigma);
            let ratio = v1.re.abs() / bound;
            let flagged = ratio > RATIO_TOL;
            if flagged {
                report.flagged_count += 1;
            }
            report.decay.push(DecaySample {
                coefficient: format!("a{}", j + 1),
                point: x.clone(),
                ratio,
                flagged,
            });
        }
        let v0 = field.eval_complex_unchecked(Coefficient::A0, &zx);
        report.realness_max_im = report.realness_max_im.max(v0.im.abs());
        let bound = field.c0 * jb.powf(1.0 - field.sigma);
        let ratio = v0.re.abs() / bound;
        let flagged = ratio > RATIO_TOL;
        if flagged {
            report.flagged_count += 1;
        }
        report.decay.push(DecaySample {
            coefficient: "a0".into(),
            point: x.clone(),
            ratio,
            flagged,
        });

        let a = field.a2_matrix(x);
        let lam = min_eigenvalue_sym(&a);
        report.min_eigenvalue = report.min_eigenvalue.min(lam);
    }

    for _ in 0..samples.tube_points {
        let re: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let depth: f64 = rng.gen_range(0.0..0.95);
        let mut dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let jb = jbracket(&re);
        for d in &mut dir {
            *d *= depth * field.nu * jb / norm;
        }
        let z: Vec<Complex64> = re
            .iter()
            .zip(&dir)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        for (which, label) in coefficient_list(n) {
            let v = field.eval_complex_unchecked(which, &z);
            let finite = v.is_finite();
            if !finite {
                report.flagged_count += 1;
            }
            report.tube.push(TubeSample {
                coefficient: label,
                point: z.clone(),
                magnitude: v.norm(),
                finite,
            });
        }
    }

    report
}

fn coefficient_list(n: usize) -> Vec<(Coefficient, String)> {
    let mut out = Vec::new();
    for j in 0..n {
        for k in 0..n {
            out.push((Coefficient::A2(j, k), format!("a{}{}", j + 1, k + 1)));
        }
    }
    for j in 0..n {
        out.push((Coefficient::A1(j), format!("a{}", j + 1)));
    }
    out.push((Coefficient::A0, "a0".into()));
    out
}

/// Smallest eigenvalue of a small symmetric matrix (Jacobi sweeps).
pub fn min_eigenvalue_sym(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _ in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[i][p];
                    let miq = m[i][q];
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for i in 0..n {
                    let mpi = m[p][i];
                    let mqi = m[q][i];
                    m[p][i] = c * mpi - s * mqi;
                    m[q][i] = s * mpi + c * mqi;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).fold(f64::INFINITY, f64::min)
}

fn constant(v: f64) -> Evaluator {
    Arc::new(move |_: &[Complex64]| Complex64::new(v, 0.0))
}

/// Euclidean metric: `a_{j,k} = δ_{j,k}`, no drift, no potential.
pub fn flat(n: usize) -> CoefficientField {
    let a2 = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| constant(if j == k { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    let a1 = (0..n).map(|_| constant(0.0)).collect();
    CoefficientField::new(n, a2, a1, constant(0.0), 1.0, 1.0, 0.9, "flat")
}

/// One-dimensional conformal metric `a(x) = 1 + c/(1+x²)`.
pub fn conformal1d(c: f64) -> CoefficientField {
    let a11: Evaluator = Arc::new(move |z: &[Complex64]| {
        Complex64::new(1.0, 0.0) + c / (Complex64::new(1.0, 0.0) + z[0] * z[0])
    });
    CoefficientField::new(
        1,
        vec![vec![a11]],
        vec![constant(0.0)],
        constant(0.0),
        1.0,
        c.abs().max(1.0),
        0.9,
        "conformal1d",
    )
}

/// One-dimensional Gaussian bump metric `a(x) = 1 + c·e^{−x²}`.
pub fn gauss_bump(c: f64) -> CoefficientField {
    let a11: Evaluator =
        Arc::new(move |z: &[Complex64]| Complex64::new(1.0, 0.0) + c * (-z[0] * z[0]).exp());
    CoefficientField::new(
        1,
        vec![vec![a11]],
        vec![constant(0.0)],
        constant(0.0),
        1.0,
        (7.0 * c.abs()).max(1.0),
        0.9,
        "gauss-bump",
    )
}

/// Flat metric with short-range potential `a0(x) = c/(1+x²)`.
pub fn potential_only(c: f64) -> CoefficientField {
    let a0: Evaluator =
        Arc::new(move |z: &[Complex64]| c / (Complex64::new(1.0, 0.0) + z[0] * z[0]));
    CoefficientField::new(
        1,
        vec![vec![constant(1.0)]],
        vec![constant(0.0)],
        a0,
        1.0,
        c.abs().max(1.0),
        0.9,
        "potential-only",
    )
}

/// Two-dimensional conformal well `a_{j,k}(x) = (1 − c e^{−|x|²}) δ_{j,k}`, 0 < c < 1.
pub fn conformal2d_well(c: f64) -> CoefficientField {
    assert!(c > 0.0 && c < 1.0, "well depth must satisfy 0 < c < 1");
    let diag = move |z: &[Complex64]| {
        Complex64::new(1.0, 0.0) - c * (-(z[0] * z[0] + z[1] * z[1])).exp()
    };
    let a2: Vec<Vec<Evaluator>> = (0..2)
        .map(|j| {
            (0..2)
                .map(|k| -> Evaluator {
                    if j == k {
                        Arc::new(diag)
                    } else {
                        constant(0.0)
                    }
                })
                .collect()
        })
        .collect();
    let a1 = vec![constant(0.0), constant(0.0)];
    CoefficientField::new(
        2,
        a2,
        a1,
        constant(0.0),
        1.0,
        (20.0 * c).max(1.0),
        0.9,
        "conformal2d-well",
    )
}

/// Registry of named builtin fields with their default parameters.
pub fn builtin_fields() -> Vec<CoefficientField> {
    vec![
        flat(1),
        conformal1d(1.0),
        gauss_bump(0.3),
        potential_only(1.0),
        conformal2d_well(0.5),
    ]
}

/// Look a builtin up by name, with an optional strength parameter.
pub fn builtin(name: &str, c: Option<f64>) -> Option<CoefficientField> {
    match name {
        "flat" => Some(flat(1)),
        "flat2d" => Some(flat(2)),
        "conformal1d" => Some(conformal1d(c.unwrap_or(1.0))),
        "gauss-bump" => Some(gauss_bump(c.unwrap_or(0.3))),
        "potential-only" => Some(potential_only(c.unwrap_or(1.0))),
        "conformal2d-well" => Some(conformal2d_well(c.unwrap_or(0.5))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_flat_line() {
        let f = flat(1);
        let p = f.eval_symbol(&[3.7], &[2.0]).unwrap();
        assert_eq!(p, 2.0);
    }

    #[test]
    fn symbol_conformal_origin() {
        let f = conformal1d(1.0);
        let p = f.eval_symbol(&[0.0], &[1.0]).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symbol_zero_momentum() {
        for f in builtin_fields() {
            let x = vec![0.3; f.n];
            let xi = vec![0.0; f.n];
            assert_eq!(f.eval_symbol(&x, &xi).unwrap(), 0.0);
        }
    }

    #[test]
    fn symbol_dimension_mismatch() {
        let f = flat(1);
        assert!(matches!(
            f.eval_symbol(&[0.0, 1.0], &[1.0]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn complex_eval_conformal_halfi() {
        // a11 at z = 0.5i: 1 + 1/(1 - 0.25) = 7/3
        let f = conformal1d(1.0);
        let v = f
            .eval_complex(Coefficient::A2(0, 0), &[Complex64::new(0.0, 0.5)])
            .unwrap();
        assert!((v - Complex64::new(7.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn complex_eval_flat_constant() {
        let f = flat(1);
        let v = f
            .eval_complex(Coefficient::A2(0, 0), &[Complex64::new(1.3, 0.4)])
            .unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn complex_eval_gauss_bump_at_one() {
        let f = gauss_bump(0.3);
        let v = f
            .eval_complex(Coefficient::A2(0, 0), &[Complex64::new(1.0, 0.0)])
            .unwrap();
        assert!((v.re - (1.0 + 0.3 * (-1.0f64).exp())).abs() < 1e-15);
        assert!((v.re - 1.110363832351432).abs() < 1e-12);
    }

    #[test]
    fn tube_violation_named() {
        let f = conformal1d(1.0);
        let err = f
            .eval_complex(Coefficient::A2(0, 0), &[Complex64::new(0.0, 0.95)])
            .unwrap_err();
        assert!(matches!(err, Error::OutsideTube { .. }));
    }

    #[test]
    fn complex_matches_real_on_reals() {
        for f in builtin_fields() {
            let x = vec![0.7; f.n];
            let zx: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            for (which, _) in coefficient_list(f.n) {
                let zc = f.eval_complex(which, &zx).unwrap();
                let re = f.eval_real(which, &x);
                assert!((zc.re - re).abs() <= 1e-14);
                assert!(zc.im.abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn validate_flat_all_zero() {
        let rep = validate_assumption_a(&flat(1), &SamplingSpec::default());
        assert!(rep.passed());
        assert!(rep.decay.iter().all(|s| s.ratio == 0.0));
    }

    #[test]
    fn validate_conformal_with_tight_constant() {
        // |a-1| = <x>^{-2} exactly, so sigma=1, c0=1 passes on the rays.
        let mut f = conformal1d(1.0);
        f.c0 = 1.0;
        let rep = validate_assumption_a(&f, &SamplingSpec::default());
        assert!(rep.passed(), "flagged {}", rep.flagged_count);
    }

    #[test]
    fn validate_flags_slow_decay() {
        // a11 = 1 + 1/<x> decays too slowly for sigma = 1
        let a11: Evaluator = Arc::new(|z: &[Complex64]| {
            Complex64::new(1.0, 0.0)
                + 1.0 / (Complex64::new(1.0, 0.0) + z[0] * z[0]).sqrt()
        });
        let f = CoefficientField::new(
            1,
            vec![vec![a11]],
            vec![constant(0.0)],
            constant(0.0),
            1.0,
            1.0,
            0.5,
            "slow",
        );
        let rep = validate_assumption_a(&f, &SamplingSpec::default());
        assert!(rep.flagged_count > 0);
        // ratio at |x| = 2 is <x> = sqrt(5) > 1
        let bad = rep
            .decay
            .iter()
            .filter(|s| s.coefficient == "a11")
            .map(|s| s.ratio)
            .fold(0.0f64, f64::max);
        assert!(bad > 1.0);
    }

    #[test]
    fn positive_definite_on_box_sample() {
        for f in builtin_fields() {
            let per_axis = if f.n == 1 { 1000 } else { 32 };
            let mut min_lam = f64::INFINITY;
            let mut idx = vec![0usize; f.n];
            loop {
                let x: Vec<f64> = idx
                    .iter()
                    .map(|&i| -20.0 + 40.0 * (i as f64 + 0.5) / per_axis as f64)
                    .collect();
                min_lam = min_lam.min(min_eigenvalue_sym(&f.a2_matrix(&x)));
                let mut axis = 0;
                loop {
                    idx[axis] += 1;
                    if idx[axis] < per_axis {
                        break;
                    }
                    idx[axis] = 0;
                    axis += 1;
                    if axis == f.n {
                        break;
                    }
                }
                if axis == f.n {
                    break;
                }
            }
            assert!(min_lam > 0.0, "{} not positive definite", f.name);
        }
    }

    #[test]
    fn registry_contents() {
        let names: Vec<_> = builtin_fields().iter().map(|f| f.name.clone()).collect();
        for n in [
            "flat",
            "conformal1d",
            "gauss-bump",
            "potential-only",
            "conformal2d-well",
        ] {
            assert!(names.iter().any(|x| x == n));
        }
        assert!(builtin("no-such-field", None).is_none());
        let c = builtin("conformal1d", Some(1.0)).unwrap();
        assert!((c.eval_real(Coefficient::A2(0, 0), &[0.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn complex_step_gradient_matches_closed_form() {
        let f = conformal1d(1.0);
        let x = 0.8;
        let got = f.a2_grad_real(0, 0, &[x])[0];
        let want = -2.0 * x / (1.0 + x * x).powi(2);
        assert!((got - want).abs() < 1e-14);
    }
}
