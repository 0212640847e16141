//! Boundary profiles `x_n = F(x')` near the origin, their spherical averages,
//! the flattening map, trial functions built from the half-space minimizer
//! and the first-order correction integrals.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::extension::{power_integral, weighted_t_integral, ExtensionField};
use crate::grid::{Grid, GridFunction};
use crate::halfspace::ReducedMinimizer;
use crate::params::FracParams;
use crate::special::{smooth_cutoff, unit_sphere_area};

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Named built-in profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    /// `F = −c|x'|^α`
    PowerLaw { alpha: f64, coeff: f64 },
    /// `F = −|x'|^α |log|x'||^κ`
    PowerLog { alpha: f64, kappa: f64 },
    Flat,
    /// `F = +c|x'|²`
    Convex { coeff: f64 },
    Custom,
}

/// Boundary graph `x_n = F(x')` on `|x'| < r0` with `F(0) = 0`, `∇F(0) = 0`.
#[derive(Clone)]
pub struct BoundaryProfile {
    pub n: usize,
    pub r0: f64,
    pub kind: ProfileKind,
    f: ScalarFn,
    grad: VectorFn,
}

impl fmt::Debug for BoundaryProfile {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("BoundaryProfile")
            .field("n", &self.n)
            .field("r0", &self.r0)
            .field("kind", &self.kind)
            .finish()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl BoundaryProfile {
    pub fn new(
        n: usize,
        r0: f64,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::build(n, r0, ProfileKind::Custom, Arc::new(f), Arc::new(grad))
    }

    fn build(n: usize, r0: f64, kind: ProfileKind, f: ScalarFn, grad: VectorFn) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(FracError::InvalidArgument(format!("boundary profiles need n in {{2, 3}}, got {n}")));
        }
        if !(r0 > 0.0) {
            return Err(FracError::InvalidArgument(format!("validity radius must be positive, got {r0}")));
        }
        let origin = vec![0.0; n - 1];
        let f0 = f(&origin);
        let g0 = norm(&grad(&origin));
        if !(f0.abs() < 1e-12) || !(g0 < 1e-10) {
            return Err(FracError::InvalidArgument(format!(
                "profile must satisfy F(0) = 0 and ∇F(0) = 0, got {f0:e} and |∇F(0)| = {g0:e}"
            )));
        }
        Ok(Self { n, r0, kind, f, grad })
    }

    pub fn power_law(n: usize, alpha: f64, coeff: f64, r0: f64) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(FracError::InvalidArgument(format!("power-law exponent must exceed 1, got {alpha}")));
        }
        let f = move |x: &[f64]| -coeff * norm(x).powf(alpha);
        let grad = move |x: &[f64]| {
            let r = norm(x);
            if r == 0.0 {
                return vec![0.0; x.len()];
            }
            let c = -coeff * alpha * r.powf(alpha - 2.0);
            x.iter().map(|v| c * v).collect()
        };
        Self::build(n, r0, ProfileKind::PowerLaw { alpha, coeff }, Arc::new(f), Arc::new(grad))
    }

    /// `−|x'|^α |log|x'||^κ`, defined for `r0 < 1`.
    pub fn power_log(n: usize, alpha: f64, kappa: f64, r0: f64) -> Result<Self> {
        if !(r0 < 1.0) {
            return Err(FracError::InvalidArgument(format!("power-log profile needs r0 < 1, got {r0}")));
        }
        if !(alpha > 1.0 || (alpha == 1.0 && kappa < 0.0)) {
            return Err(FracError::InvalidArgument(format!(
                "power-log profile is not C¹ for alpha = {alpha}, kappa = {kappa}"
            )));
        }
        let f = move |x: &[f64]| {
            let r = norm(x);
            if r == 0.0 {
                0.0
            } else {
                -r.powf(alpha) * (-r.ln()).powf(kappa)
            }
        };
        let grad = move |x: &[f64]| {
            let r = norm(x);
            if r == 0.0 {
                return vec![0.0; x.len()];
            }
            let l = -r.ln();
            let c = -r.powf(alpha - 2.0) * l.powf(kappa - 1.0) * (alpha * l - kappa);
            x.iter().map(|v| c * v).collect()
        };
        Self::build(n, r0, ProfileKind::PowerLog { alpha, kappa }, Arc::new(f), Arc::new(grad))
    }

    pub fn flat(n: usize, r0: f64) -> Result<Self> {
        Self::build(n, r0, ProfileKind::Flat, Arc::new(|_: &[f64]| 0.0), Arc::new(|x: &[f64]| vec![0.0; x.len()]))
    }

    pub fn convex(n: usize, coeff: f64, r0: f64) -> Result<Self> {
        let f = move |x: &[f64]| coeff * x.iter().map(|v| v * v).sum::<f64>();
        let grad = move |x: &[f64]| x.iter().map(|v| 2.0 * coeff * v).collect();
        Self::build(n, r0, ProfileKind::Convex { coeff }, Arc::new(f), Arc::new(grad))
    }

    /// Built-in profile by kind.
    pub fn from_kind(n: usize, kind: ProfileKind, r0: f64) -> Result<Self> {
        match kind {
            ProfileKind::PowerLaw { alpha, coeff } => Self::power_law(n, alpha, coeff, r0),
            ProfileKind::PowerLog { alpha, kappa } => Self::power_log(n, alpha, kappa, r0),
            ProfileKind::Flat => Self::flat(n, r0),
            ProfileKind::Convex { coeff } => Self::convex(n, coeff, r0),
            ProfileKind::Custom => Err(FracError::InvalidArgument(
                "custom profiles are built from closures".into(),
            )),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }

    /// Average of `g` over the sphere `|x'| = τ` in `ℝ^{n−1}`: the two points
    /// `±τ` for `n = 2`, a 64-node trapezoid on the circle for `n = 3`
    /// (checked against 32 nodes).
    pub fn sphere_average(&self, tau: f64, g: impl Fn(&[f64]) -> f64) -> Result<f64> {
        if self.n == 2 {
            return Ok(0.5 * (g(&[tau]) + g(&[-tau])));
        }
        let ring = |m: usize| {
            (0..m)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / m as f64;
                    g(&[tau * th.cos(), tau * th.sin()])
                })
                .sum::<f64>()
                / m as f64
        };
        let fine = ring(64);
        let coarse = ring(32);
        let scale = fine.abs().max(1e-300);
        if !fine.is_finite() || (fine - coarse).abs() > 1e-8 * scale.max(coarse.abs()) + 1e-300 {
            return Err(FracError::Quadrature(format!(
                "circle average at radius {tau} not converged: {fine} (64 nodes) vs {coarse} (32 nodes)"
            )));
        }
        Ok(fine)
    }

    /// `f(τ)`.
    pub fn mean(&self, tau: f64) -> Result<f64> {
        self.sphere_average(tau, |x| self.eval(x))
    }

    /// `f'(τ)`, the average of the radial derivative of `F`.
    pub fn mean_slope(&self, tau: f64) -> Result<f64> {
        if tau == 0.0 {
            return Ok(0.0);
        }
        self.sphere_average(tau, |x| {
            let g = self.gradient(x);
            g.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / tau
        })
    }

    /// Average of `|∇F|²`.
    pub fn mean_grad_sq(&self, tau: f64) -> Result<f64> {
        self.sphere_average(tau, |x| self.gradient(x).iter().map(|v| v * v).sum())
    }
}

// ---------------------------------------------------------------------------
// spherical averages

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub taus: Vec<f64>,
    pub f: Vec<f64>,
    /// average of `F²`
    pub f1: Vec<f64>,
    /// average of `|∇F|²`
    pub f2: Vec<f64>,
    /// average of `|∇F|`
    pub f3: Vec<f64>,
    pub alpha_hat: f64,
    pub concave: bool,
    pub rv_ok: bool,
    pub cond_ok: bool,
    pub f1_ok: bool,
}

impl CurvatureReport {
    pub fn all_pass(&self) -> bool {
        self.concave && self.rv_ok && self.cond_ok && self.f1_ok
    }

    /// `f₃² ≤ f₂` at every sample.
    pub fn cauchy_schwarz_holds(&self) -> bool {
        self.f3.iter().zip(&self.f2).all(|(a, b)| a * a <= b * (1.0 + 1e-12) + 1e-300)
    }
}

/// Least-squares slope and intercept of `y` on `x`, with the slope's standard
/// error (infinite with fewer than three points).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let se = if x.len() > 2 {
        let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
        (ssr / (m - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    (slope, icpt, se)
}

/// `|v|` decreasing strictly towards the smallest radius (or identically tiny).
fn vanishing_trend(v: &[f64]) -> bool {
    if v.iter().any(|x| !x.is_finite()) {
        return false;
    }
    if v.iter().all(|x| x.abs() < 1e-12) {
        return true;
    }
    v.windows(2).all(|w| w[1].abs() < w[0].abs())
}

/// Spherical averages of `F` at the radii `taus` and the admissibility tests.
/// The regular-variation index is fitted over the smallest decade of the
/// sample; the limit tests look at the trend over the three smallest radii.
pub fn curvature_functionals(bp: &BoundaryProfile, taus: &[f64], p: &FracParams) -> Result<CurvatureReport> {
    if taus.len() < 3 {
        return Err(FracError::InvalidArgument("at least three sample radii are needed".into()));
    }
    if let Some(t) = taus.iter().find(|t| !(**t > 0.0 && **t < bp.r0)) {
        return Err(FracError::InvalidArgument(format!("sample radius {t} outside (0, {})", bp.r0)));
    }
    let mut f = Vec::with_capacity(taus.len());
    let mut f1 = Vec::with_capacity(taus.len());
    let mut f2 = Vec::with_capacity(taus.len());
    let mut f3 = Vec::with_capacity(taus.len());
    for &t in taus {
        f.push(bp.sphere_average(t, |x| bp.eval(x))?);
        f1.push(bp.sphere_average(t, |x| bp.eval(x).powi(2))?);
        f2.push(bp.mean_grad_sq(t)?);
        f3.push(bp.sphere_average(t, |x| norm(&bp.gradient(x)))?);
    }
    let concave = f.iter().all(|v| *v < 0.0);

    // indices sorted by decreasing radius
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&a, &b| taus[b].total_cmp(&taus[a]));
    let tmin = taus[*order.last().unwrap()];
    let decade: Vec<usize> = order.iter().cloned().filter(|&k| taus[k] <= 10.0 * tmin).collect();
    let alpha_hat = if decade.len() >= 2 && decade.iter().all(|&k| f[k] != 0.0) {
        let lx: Vec<f64> = decade.iter().map(|&k| taus[k].ln()).collect();
        let ly: Vec<f64> = decade.iter().map(|&k| f[k].abs().ln()).collect();
        linear_fit(&lx, &ly).0
    } else {
        f64::NAN
    };
    let tail: Vec<usize> = order[order.len() - 3..].to_vec();

    let nf = p.n as f64;
    let alpha_in_range = alpha_hat >= 1.0 - 0.05 && alpha_hat < nf - 2.0 * p.s + 3.0;
    // the dilation ratio F(2τ)/F(τ) must settle; comparing it with 2^α̂ alone
    // is blind to slowly varying factors, which bias α̂
    let rv_ok = concave && alpha_in_range && {
        let ratios = tail
            .iter()
            .map(|&k| {
                let t = taus[k].min(0.5 * bp.r0 * 0.999);
                Ok(bp.mean(2.0 * t)? / bp.mean(t)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        let steps: Vec<f64> = ratios.windows(2).map(|w| w[1] - w[0]).collect();
        let last = *ratios.last().unwrap();
        (last / 2f64.powf(alpha_hat) - 1.0).abs() < 0.1
            && (steps.iter().all(|d| d.abs() < 1e-6 * last) || vanishing_trend(&steps))
    };
    let cond: Vec<f64> = tail.iter().map(|&k| f2[k] * taus[k] / f[k]).collect();
    let cond_ok = concave && vanishing_trend(&cond);
    let shape: Vec<f64> = tail.iter().map(|&k| f1[k] / (taus[k] * f[k].abs())).collect();
    let f1_ok = concave && vanishing_trend(&shape);

    Ok(CurvatureReport {
        taus: taus.to_vec(),
        f,
        f1,
        f2,
        f3,
        alpha_hat,
        concave,
        rv_ok,
        cond_ok,
        f1_ok,
    })
}

// ---------------------------------------------------------------------------
// flattening

/// `Θ₁(x) = x − F(x')e_n`.
pub fn theta_1(bp: &BoundaryProfile, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut y = x.to_vec();
    y[n - 1] -= bp.eval(&x[..n - 1]);
    y
}

/// `Θ_ε = ε⁻¹Θ₁` and its extension `(x, t) ↦ (Θ_ε(x), t/ε)`.
#[derive(Debug, Clone)]
pub struct FlattenMap {
    pub profile: BoundaryProfile,
    pub eps: f64,
    /// `ε^{−n}`
    pub jacobian_x: f64,
    /// `ε^{−n−1}`
    pub jacobian_xt: f64,
}

pub fn flatten_map(bp: &BoundaryProfile, eps: f64) -> Result<FlattenMap> {
    if !(eps > 0.0) {
        return Err(FracError::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let nf = bp.n as f64;
    Ok(FlattenMap {
        profile: bp.clone(),
        eps,
        jacobian_x: eps.powf(-nf),
        jacobian_xt: eps.powf(-nf - 1.0),
    })
}

impl FlattenMap {
    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.profile.n {
            return Err(FracError::InvalidArgument(format!(
                "point has {} coordinates, expected {}",
                v.len(),
                self.profile.n
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(theta_1(&self.profile, x).iter().map(|v| v / self.eps).collect())
    }

    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y)?;
        let n = y.len();
        let xp: Vec<f64> = y[..n - 1].iter().map(|v| self.eps * v).collect();
        if norm(&xp) > self.profile.r0 {
            return Err(FracError::InvalidArgument(format!(
                "|x'| = {} outside the validity radius {}",
                norm(&xp),
                self.profile.r0
            )));
        }
        let mut x = xp.clone();
        x.push(self.eps * y[n - 1] + self.profile.eval(&xp));
        Ok(x)
    }

    pub fn forward_ext(&self, x: &[f64], t: f64) -> Result<(Vec<f64>, f64)> {
        Ok((self.forward(x)?, t / self.eps))
    }

    pub fn inverse_ext(&self, y: &[f64], z: f64) -> Result<(Vec<f64>, f64)> {
        Ok((self.inverse(y)?, z * self.eps))
    }
}

// ---------------------------------------------------------------------------
// trial functions

/// `Φ_ε(x) = ε^{−(n−2s)/2} Φ(Θ_ε(x)) φ_δ(|Θ₁(x)|)` inside `Ω = {x_n > F(x')}`,
/// sampled on a planar grid (`n = 2`).
pub fn trial_function(m: &ReducedMinimizer, bp: &BoundaryProfile, eps: f64, delta: f64, grid: &Arc<Grid>) -> Result<GridFunction> {
    let p = &m.params;
    if p.n != 2 || bp.n != 2 || grid.dim() != 2 {
        return Err(FracError::InvalidArgument("trial functions are sampled on planar grids (n = 2)".into()));
    }
    if !(delta > 0.0 && delta < bp.r0) {
        return Err(FracError::InvalidArgument(format!("delta must lie in (0, {}), got {delta}", bp.r0)));
    }
    let map = flatten_map(bp, eps)?;
    let scale = eps * m.median_mass_radius;
    if scale < 2.0 * grid.min_spacing() {
        return Err(FracError::Resolution(format!(
            "concentration scale {scale:e} is below twice the grid spacing {:e}",
            grid.min_spacing()
        )));
    }
    let amp = eps.powf(-p.y_frak);
    let tail = m.tail_constant();
    GridFunction::from_fn(grid.clone(), |x1, x2| {
        let x = [x1, x2];
        let flat = theta_1(bp, &x);
        let r1 = norm(&flat);
        if x1.abs() >= bp.r0 || flat[1] <= 0.0 || r1 >= delta {
            return 0.0;
        }
        let y = map.forward(&x).expect("planar point");
        amp * m.eval_extended(y[0].abs(), y[1], tail) * smooth_cutoff(delta, r1)
    })
}

// ---------------------------------------------------------------------------
// correction integrals

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionIntegrals {
    pub alpha: f64,
    /// limit of `ε I₃ / f(ε)`: weighted-density moment against `y_n/|y|²`
    pub c1: f64,
    pub c1_error: f64,
    /// limit of `ε E₃ / f(ε)`: normal-derivative energy on `y_n = 0`
    pub c2: f64,
    pub c2_error: f64,
    /// fitted log-log slope of the `c1` integrand in `τ` on the outer half of
    /// the trusted region
    pub tail_slope: f64,
    /// the majorant exponent `α+n−(n−s−σ+1)2*_σ−2`
    pub tail_bound: f64,
}

/// `τ`-integrand of `c1` at the radial nodes: `τ^{α+n−2}∫ y_n |Φ|^{2*_σ} |y|^{−(s−σ)2*_σ−2} dy_n`.
fn c1_profile(m: &ReducedMinimizer, alpha: f64, refine: usize) -> Vec<(f64, f64)> {
    let p = &m.params;
    let nf = p.n as f64;
    let grid = &m.values.grid;
    let (nx, ny) = grid.shape();
    let (ax, ay) = (&grid.axes[0], &grid.axes[1]);
    let q = p.two_star_sigma;
    let expo = (p.s - p.sigma) * q + 2.0;
    let r = refine as f64;
    let mut out = Vec::with_capacity(nx * refine);
    for i in 0..nx * refine {
        let tau = (i as f64 + 0.5) * ax.h / r;
        let mut inner = 0.0;
        for j in 0..(ny + 1) * refine {
            let yn = (j as f64 + 0.5) * ay.h / r;
            let phi = if refine == 1 {
                if j >= ny {
                    continue;
                }
                m.values.values[i * ny + j]
            } else {
                m.values.interpolate(tau, yn)
            };
            let yy = if refine == 1 { ay.nodes[j] } else { yn };
            inner += ay.h / r * yy * phi.abs().powf(q) * (tau * tau + yy * yy).powf(-0.5 * expo);
        }
        out.push((tau, tau.powf(alpha + nf - 2.0) * inner));
    }
    out
}

/// `c1` and `c2` on the reduced minimizer, with error bars from a second
/// quadrature (bilinear refinement for `c1`, every other `z` node for `c2`).
pub fn correction_integrals(m: &ReducedMinimizer, p: &FracParams, alpha: f64) -> Result<CorrectionIntegrals> {
    let nf = p.n as f64;
    if !(alpha >= 1.0 && alpha < nf - 2.0 * p.s + 3.0) {
        return Err(FracError::InvalidArgument(format!(
            "alpha must lie in [1, {}), got {alpha}",
            nf - 2.0 * p.s + 3.0
        )));
    }
    let sphere = unit_sphere_area(p.n - 1);
    let q = p.two_star_sigma;
    let grid = &m.values.grid;
    let ax = &grid.axes[0];
    let pref1 = (p.s - p.sigma) * q * sphere;
    let base = c1_profile(m, alpha, 1);
    let fine = c1_profile(m, alpha, 2);
    let c1 = pref1 * ax.h * base.iter().map(|v| v.1).sum::<f64>();
    let c1_fine = pref1 * 0.5 * ax.h * fine.iter().map(|v| v.1).sum::<f64>();

    // tail of the c1 integrand on the outer half of the trusted region
    let trusted = 0.5 * m.radius;
    let pts: Vec<(f64, f64)> = base
        .iter()
        .filter(|(t, v)| *t >= 0.5 * trusted && *t <= trusted && *v > 0.0)
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    let tail_slope = if pts.len() >= 2 {
        let (lx, ly): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        linear_fit(&lx, &ly).0
    } else {
        f64::NAN
    };
    let tail_bound = alpha + nf - (nf - p.s - p.sigma + 1.0) * q - 2.0;

    let w = m.extension()?;
    let c2 = c2_value(&w, grid, alpha, p, sphere);
    let c2_coarse = c2_value(&w.coarsened(), grid, alpha, p, sphere);

    for (name, v) in [("c1", c1), ("c2", c2)] {
        if !v.is_finite() {
            return Err(FracError::Quadrature(format!("{name} is not finite")));
        }
    }
    Ok(CorrectionIntegrals {
        alpha,
        c1,
        c1_error: (c1 - c1_fine).abs(),
        c2,
        c2_error: (c2 - c2_coarse).abs() / 3.0,
        tail_slope,
        tail_bound,
    })
}

/// `|S^{n−2}| ∫ τ^{n+α−2} ∫ z^{1−2s} 𝒲_{y_n}(τ,0,z)² dz dτ`, with the
/// one-sided second-order normal derivative.
fn c2_value(w: &ExtensionField, grid: &Grid, alpha: f64, p: &FracParams, sphere: f64) -> f64 {
    let nf = p.n as f64;
    let (nx, ny) = grid.shape();
    let (ax, ay) = (&grid.axes[0], &grid.axes[1]);
    let hy = ay.h;
    (0..nx)
        .map(|i| {
            let tau = ax.nodes[i];
            let d2: Vec<f64> = w
                .values
                .iter()
                .map(|v| {
                    let d = (4.0 * v[i * ny] - v[i * ny + 1]) / (2.0 * hy);
                    d * d
                })
                .collect();
            ax.h * tau.powf(nf + alpha - 2.0) * weighted_t_integral(&w.t_nodes, &d2, w.s)
        })
        .sum::<f64>()
        * sphere
}

// ---------------------------------------------------------------------------
// trial quotient sweep

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialPoint {
    pub eps: f64,
    /// `C_s E[w_ε]`
    pub numerator: f64,
    /// `∫ |x|^{(σ−s)2*_σ} |Φ_ε|^{2*_σ}`
    pub denominator: f64,
    pub quotient: f64,
    /// regression abscissa `|f(ε)|/ε` (`ε` for a flat boundary)
    pub abscissa: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub s_ref: f64,
    pub delta: f64,
    pub points: Vec<TrialPoint>,
    /// slope of `I[Φ_ε] − S_ref` against the abscissa
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// `I[Φ_ε]` monotone in `ε` across the sweep
    pub monotone: bool,
}

impl SweepReport {
    pub fn slope_negative(&self) -> bool {
        self.slope < 0.0
    }
}

/// Per-node `t` integrals of the squared gradient pieces of `V = 𝒲·c`:
/// `(∫V_τ², ∫V_τV_{y_n}, ∫V_{y_n}², ∫V_z²)` against `z^{1−2s}`.
fn gradient_moments(w: &ExtensionField, cutoff: &[f64]) -> Vec<[f64; 4]> {
    let s = w.s;
    let beta = 1.0 - 2.0 * s;
    let t = &w.t_nodes;
    let grads: Vec<Vec<[f64; 2]>> = w
        .values
        .par_iter()
        .map(|v| {
            let f = GridFunction {
                grid: w.grid.clone(),
                values: v.iter().zip(cutoff).map(|(a, c)| a * c).collect(),
            };
            f.gradient()
        })
        .collect();
    (0..w.grid.len())
        .into_par_iter()
        .map(|k| {
            let tt: Vec<f64> = grads.iter().map(|g| g[k][0] * g[k][0]).collect();
            let tn: Vec<f64> = grads.iter().map(|g| g[k][0] * g[k][1]).collect();
            let nn: Vec<f64> = grads.iter().map(|g| g[k][1] * g[k][1]).collect();
            let mut zz = 0.0;
            for j in 0..t.len() - 1 {
                let dz = cutoff[k] * (w.values[j + 1][k] - w.values[j][k]) / (t[j + 1] - t[j]);
                zz += dz * dz * power_integral(t[j], t[j + 1], beta);
                if j == 0 {
                    zz += t[0].powf(beta) * dz * dz * t[0] / (2.0 * s);
                }
            }
            [
                weighted_t_integral(t, &tt, s),
                weighted_t_integral(t, &tn, s),
                weighted_t_integral(t, &nn, s),
                zz,
            ]
        })
        .collect()
}

/// `C_s E[w_ε]` and the weighted norm of `Φ_ε`, written in flattened
/// coordinates on the reduced grid. The map has unit Jacobian, so only the
/// sphere averages of `F`, of its radial slope and of `|∇F|²` enter.
fn trial_parts(m: &ReducedMinimizer, w: &ExtensionField, bp: &BoundaryProfile, eps: f64, delta: f64) -> Result<(f64, f64)> {
    let p = &m.params;
    let grid = &m.values.grid;
    let pts = grid.points();
    let weights = grid.weights();
    let q = p.two_star_sigma;
    let a = (p.s - p.sigma) * q;
    let cutoff: Vec<f64> = pts.iter().map(|y| smooth_cutoff(delta, eps * y[0].hypot(y[1]))).collect();
    let moments = gradient_moments(w, &cutoff);
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, y) in pts.iter().enumerate() {
        if cutoff[k] == 0.0 {
            continue;
        }
        let (tau, yn) = (y[0], y[1]);
        let r = eps * tau;
        let (slope, gsq) = if r < bp.r0 {
            (bp.mean_slope(r)?, bp.mean_grad_sq(r)?)
        } else {
            return Err(FracError::InvalidArgument(format!(
                "cutoff support reaches |x'| = {r}, beyond the validity radius {}",
                bp.r0
            )));
        };
        let [tt, tn, nn, zz] = moments[k];
        num += weights[k] * (tt - 2.0 * slope * tn + (1.0 + gsq) * nn + zz);
        let phi = m.values.values[k].abs().powf(q) * cutoff[k].powf(q);
        if phi > 0.0 {
            let avg = bp.sphere_average(r, |x| {
                let shift = yn + bp.eval(x) / eps;
                (tau * tau + shift * shift).powf(-0.5 * a)
            })?;
            den += weights[k] * phi * avg;
        }
    }
    Ok((p.c_s * num, den))
}

/// `I[Φ_ε]` through the admissible extension `w_ε` for each `ε`, and the
/// regression of `I[Φ_ε] − S_ref` on `|f(ε)|/ε`.
pub fn trial_quotient_sweep(m: &ReducedMinimizer, bp: &BoundaryProfile, p: &FracParams, eps_list: &[f64], delta: f64) -> Result<SweepReport> {
    if bp.n != p.n || m.params != *p {
        return Err(FracError::InvalidArgument("profile, minimizer and parameters disagree on n".into()));
    }
    if eps_list.len() < 2 {
        return Err(FracError::InvalidArgument("the sweep needs at least two values of eps".into()));
    }
    if !(delta > 0.0 && delta < bp.r0) {
        return Err(FracError::InvalidArgument(format!("delta must lie in (0, {}), got {delta}", bp.r0)));
    }
    let flat = bp.kind == ProfileKind::Flat;
    if !flat {
        let taus: Vec<f64> = (0..8).map(|k| 0.5 * bp.r0 * 0.5f64.powi(k)).collect();
        let report = curvature_functionals(bp, &taus, p)?;
        if !report.all_pass() {
            return Err(FracError::InvalidArgument(
                "the profile is not average concave and admissible".into(),
            ));
        }
    }
    let w = m.extension()?;
    let points = eps_list
        .par_iter()
        .map(|&eps| {
            if !(eps > 0.0) {
                return Err(FracError::InvalidArgument(format!("eps must be positive, got {eps}")));
            }
            let (num, den) = trial_parts(m, &w, bp, eps, delta)?;
            let abscissa = if flat { eps } else { bp.mean(eps)?.abs() / eps };
            Ok(TrialPoint {
                eps,
                numerator: num,
                denominator: den,
                quotient: num / den.powf(2.0 / p.two_star_sigma),
                abscissa,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = points.iter().map(|t| t.abscissa).collect();
    let y: Vec<f64> = points.iter().map(|t| t.quotient - m.quotient).collect();
    let (slope, intercept, slope_stderr) = linear_fit(&x, &y);
    let mut by_eps = points.clone();
    by_eps.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    let inc = by_eps.windows(2).all(|w| w[1].quotient >= w[0].quotient);
    let dec = by_eps.windows(2).all(|w| w[1].quotient <= w[0].quotient);
    Ok(SweepReport {
        s_ref: m.quotient,
        delta,
        points,
        slope,
        intercept,
        slope_stderr,
        monotone: inc || dec,
    })
}
