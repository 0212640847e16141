//! Green kernels of the upper half space, the s-Kelvin transform, and the
//! radially reduced half-space minimizer with its decay diagnostics.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::extension::{default_t_nodes, energy_density, extend, ExtensionField};
use crate::grid::{make_grid, Domain, Grid, GridFunction};
use crate::params::FracParams;
use crate::special::{gamma, unit_sphere_area};
use crate::spectral::{lebesgue_norm, rayleigh_quotient, spectral_form, QuotientWeight, SpectralDecomposition};
use crate::variational::{geometric_mean_radius, median_mass_radius, minimize_with, ElOptions};

// ---------------------------------------------------------------------------
// kernels

/// Observation point `Y = (y, z)` and source `ξ` on the boundary hyperplane
/// `z = 0` of the upper half space `y_n > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    pub y: Vec<f64>,
    pub z: f64,
    pub xi: Vec<f64>,
}

impl KernelPoint {
    pub fn new(y: Vec<f64>, z: f64, xi: Vec<f64>) -> Result<Self> {
        if y.is_empty() || y.len() != xi.len() {
            return Err(FracError::InvalidArgument(format!(
                "point and source must share the dimension ({} vs {})",
                y.len(),
                xi.len()
            )));
        }
        let n = y.len();
        if y[n - 1] < 0.0 || xi[n - 1] < 0.0 || z < 0.0 {
            return Err(FracError::InvalidArgument(
                "kernel points need y_n ≥ 0, ξ_n ≥ 0 and z ≥ 0".into(),
            ));
        }
        Ok(Self { y, z, xi })
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    /// `|y − ξ|² + z²`.
    pub fn dist2(&self) -> f64 {
        self.y.iter().zip(&self.xi).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + self.z * self.z
    }

    /// `4 y_n ξ_n`.
    fn image_gap(&self) -> f64 {
        let n = self.dim();
        4.0 * self.y[n - 1] * self.xi[n - 1]
    }

    /// The trace point with `y` and `ξ` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            y: self.xi.clone(),
            z: self.z,
            xi: self.y.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// `G_s(Y, ξ)`, Neumann data on `z = 0`
    SourceData,
    /// `Γ_s(Y, ξ)`, Dirichlet data on `z = 0`
    BoundaryData,
    /// `G_s(y, 0, ξ)`
    Trace,
}

/// Normalizations of the whole-space kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelNormalization {
    /// `C̃` of `G̃_s = C̃ |X|^{2s−n}`, from the calibration
    pub c_tilde: f64,
    /// `Ĉ` of `Γ̃_s = Ĉ t^{2s}|X|^{−n−2s}`
    pub c_hat: f64,
    /// relative least-squares residual of the calibration
    pub calibration_residual: f64,
}

/// `Ĉ = Γ((n+2s)/2)/(π^{n/2}Γ(s))`, the unit-mass normalization of the
/// Poisson kernel.
pub fn poisson_constant(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    gamma((nf + 2.0 * s) / 2.0) / (PI.powf(nf / 2.0) * gamma(s))
}

/// Closed form `Γ((n−2s)/2)/(4^s π^{n/2} Γ(s))` of the Riesz potential
/// constant, used as a cross-check of the calibration.
pub fn riesz_potential_constant(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    gamma((nf - 2.0 * s) / 2.0) / (4f64.powf(s) * PI.powf(nf / 2.0) * gamma(s))
}

/// Trapezoid rule in `v = ln t` over `[lo, hi]` with `m` cells.
fn log_trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, m: usize) -> f64 {
    let step = (hi - lo) / m as f64;
    let mut acc = 0.5 * (f(lo) + f(hi));
    for k in 1..m {
        acc += f(lo + k as f64 * step);
    }
    acc * step
}

/// Calibrates `C̃` so that `C̃ |x|^{2s−n} ∗ h` reproduces `(−Δ)^{−s} h` for
/// `h = e^{−|x|²}`, both sides evaluated by one-dimensional quadratures with
/// `m` cells. Returns `(C̃, relative residual)`.
pub fn calibrate_riesz_constant(n: usize, s: f64, m: usize) -> (f64, f64) {
    let nf = n as f64;
    let beta = (nf - 2.0 * s) / 2.0;
    let lo = -40.0 / s.min(beta).min(0.5);
    let hi = 40.0 / s.min(0.5);
    let samples: Vec<f64> = (0..16).map(|k| 0.2 * k as f64).collect();
    let mut pairs = Vec::with_capacity(samples.len());
    for &r in &samples {
        let r2 = r * r;
        // heat-semigroup formula for (−Δ)^{−s} e^{−|x|²}
        let pot = log_trapezoid(
            |v| {
                let t = v.exp();
                let a = 1.0 + 4.0 * t;
                t.powf(s) * a.powf(-nf / 2.0) * (-r2 / a).exp()
            },
            lo,
            hi,
            m,
        ) / gamma(s);
        // |x|^{2s−n} ∗ e^{−|x|²} via the Gaussian subordination of the power
        let conv = log_trapezoid(
            |v| {
                let a = v.exp();
                a.powf(beta) * (PI / (1.0 + a)).powf(nf / 2.0) * (-a * r2 / (1.0 + a)).exp()
            },
            lo,
            hi,
            m,
        ) / gamma(beta);
        pairs.push((pot, conv));
    }
    let num: f64 = pairs.iter().map(|(p, c)| p * c).sum();
    let den: f64 = pairs.iter().map(|(_, c)| c * c).sum();
    let c = num / den;
    let res2: f64 = pairs.iter().map(|(p, cv)| (p - c * cv).powi(2)).sum();
    let tot: f64 = pairs.iter().map(|(p, _)| p * p).sum();
    (c, (res2 / tot).sqrt())
}

pub fn kernel_normalizations(p: &FracParams) -> Result<KernelNormalization> {
    let (c_tilde, residual) = calibrate_riesz_constant(p.n, p.s, 4000);
    let limit = 1e-4;
    if !(residual <= limit) {
        return Err(FracError::Calibration { residual, limit });
    }
    Ok(KernelNormalization {
        c_tilde,
        c_hat: poisson_constant(p.n, p.s),
        calibration_residual: residual,
    })
}

/// Numerical `∫_{ℝⁿ} Γ̃_s(x, t) dx` by a radial log-trapezoid rule.
pub fn poisson_mass(n: usize, s: f64, c_hat: f64, t: f64) -> f64 {
    let nf = n as f64;
    let integrand = |v: f64| {
        let r = v.exp();
        c_hat * t.powf(2.0 * s) * r.powf(nf) * (r * r + t * t).powf(-(nf + 2.0 * s) / 2.0)
    };
    let lo = t.ln() - 40.0 / nf;
    let hi = t.ln() + 40.0 / s;
    unit_sphere_area(n) * log_trapezoid(integrand, lo, hi, 20_000)
}

/// Closed-form Green kernels of the half space.
pub fn green_kernel(kind: KernelKind, pt: &KernelPoint, p: &FracParams, normalization: f64) -> Result<f64> {
    if pt.dim() != p.n {
        return Err(FracError::InvalidArgument(format!(
            "kernel point has dimension {}, parameters say {}",
            pt.dim(),
            p.n
        )));
    }
    let nf = p.n as f64;
    let s = p.s;
    let z = if kind == KernelKind::Trace { 0.0 } else { pt.z };
    let pt = KernelPoint {
        y: pt.y.clone(),
        z,
        xi: pt.xi.clone(),
    };
    let d2 = pt.dist2();
    if !(d2 > 0.0) {
        return Err(FracError::Singular("observation point coincides with the source".into()));
    }
    let gap = pt.image_gap();
    if gap == 0.0 {
        return Ok(0.0);
    }
    let ratio = gap / d2;
    Ok(match kind {
        KernelKind::SourceData | KernelKind::Trace => {
            // 1 − (1+ρ)^{−a} computed without cancellation
            let a = (nf - 2.0 * s) / 2.0;
            normalization * d2.powf(-a) * -(-a * ratio.ln_1p()).exp_m1()
        }
        KernelKind::BoundaryData => {
            let a = (nf + 2.0 * s) / 2.0;
            normalization * z.powf(2.0 * s) * d2.powf(-a) * -(-a * ratio.ln_1p()).exp_m1()
        }
    })
}

/// `∇_Y G_s(Y, ξ)` as `(∂_{y_1}, …, ∂_{y_n}, ∂_z)`.
pub fn green_gradient(pt: &KernelPoint, p: &FracParams, c_tilde: f64) -> Result<Vec<f64>> {
    let n = p.n;
    let nf = n as f64;
    let d2 = pt.dist2();
    if !(d2 > 0.0) {
        return Err(FracError::Singular("observation point coincides with the source".into()));
    }
    let b = (nf - 2.0 * p.s + 2.0) / 2.0;
    let k = -c_tilde * (nf - 2.0 * p.s);
    let ratio = pt.image_gap() / d2;
    let bracket = -(-b * ratio.ln_1p()).exp_m1();
    let db = d2.powf(-b);
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n - 1 {
        out.push(k * (pt.y[i] - pt.xi[i]) * db * bracket);
    }
    let (yn, xn) = (pt.y[n - 1], pt.xi[n - 1]);
    let d2_image = d2 + pt.image_gap();
    out.push(k * ((yn - xn) * db - (yn + xn) * d2_image.powf(-b)));
    out.push(k * pt.z * db * bracket);
    Ok(out)
}

/// Kernel value of `G_s` and the unconstanted bound shape
/// `y_n^𝔟 ξ_n^𝔟 (|y−ξ|²+z²)^{−(n−2s+2𝔟)/2}`.
pub fn kernel_bound_margin(pt: &KernelPoint, b_frak: f64, p: &FracParams) -> Result<(f64, f64)> {
    bound_margin(KernelKind::SourceData, pt, b_frak, p)
}

/// Same as [`kernel_bound_margin`] for either kernel; for `Γ_s` the shape
/// carries the extra `z^{2s}` and the exponent `(n+2s+2𝔟)/2`.
pub fn bound_margin(kind: KernelKind, pt: &KernelPoint, b_frak: f64, p: &FracParams) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&b_frak) {
        return Err(FracError::InvalidArgument(format!("𝔟 must lie in [0, 1], got {b_frak}")));
    }
    let nf = p.n as f64;
    let s = p.s;
    let n = p.n;
    let d2 = pt.dist2();
    let yb = (pt.y[n - 1] * pt.xi[n - 1]).powf(b_frak);
    let (norm, shape) = match kind {
        KernelKind::BoundaryData => (
            poisson_constant(n, s),
            yb * pt.z.powf(2.0 * s) * d2.powf(-(nf + 2.0 * s + 2.0 * b_frak) / 2.0),
        ),
        _ => (
            riesz_potential_constant(n, s),
            yb * d2.powf(-(nf - 2.0 * s + 2.0 * b_frak) / 2.0),
        ),
    };
    let lhs = green_kernel(kind, pt, p, norm)?;
    Ok((lhs, shape))
}

/// `|∇_Y G_s|` and the gradient bound shape
/// `(|y−ξ|²+z²)^{−(n−2s+1)/2} min(1, y_nξ_n/d² + ξ_n/d)`.
pub fn gradient_bound_margin(pt: &KernelPoint, p: &FracParams) -> Result<(f64, f64)> {
    let n = p.n;
    let nf = n as f64;
    let g = green_gradient(pt, p, riesz_potential_constant(n, p.s))?;
    let lhs = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d2 = pt.dist2();
    let d = d2.sqrt();
    let (yn, xn) = (pt.y[n - 1], pt.xi[n - 1]);
    let m = (yn * xn / d2 + xn / d).min(1.0);
    Ok((lhs, d2.powf(-(nf - 2.0 * p.s + 1.0) / 2.0) * m))
}

// ---------------------------------------------------------------------------
// the degenerate operator and the Kelvin transform

/// Finite-difference `L_s f = −div(z^{1−2s}∇f)` at `X = (x, z)`, `z > h`,
/// conservative in `z` (weights at half steps).
pub fn ls_residual(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64, s: f64) -> f64 {
    let m = x.len();
    let z = x[m - 1];
    let beta = 1.0 - 2.0 * s;
    let f0 = f(x);
    let mut p = x.to_vec();
    let mut acc = 0.0;
    for i in 0..m - 1 {
        p[i] = x[i] + h;
        let fp = f(&p);
        p[i] = x[i] - h;
        let fm = f(&p);
        p[i] = x[i];
        acc += z.powf(beta) * (fp - 2.0 * f0 + fm);
    }
    p[m - 1] = z + h;
    let fp = f(&p);
    p[m - 1] = z - h;
    let fm = f(&p);
    acc += (z + 0.5 * h).powf(beta) * (fp - f0) - (z - 0.5 * h).powf(beta) * (f0 - fm);
    -acc / (h * h)
}

/// `w*(X) = |X|^{2s−n} w(X/|X|²)` on `ℝⁿ × ℝ₊ \ {0}`.
pub struct KelvinTransform<F> {
    inner: F,
    n: usize,
    s: f64,
}

pub fn kelvin<F: Fn(&[f64]) -> f64>(w: F, p: &FracParams) -> KelvinTransform<F> {
    KelvinTransform {
        inner: w,
        n: p.n,
        s: p.s,
    }
}

impl<F: Fn(&[f64]) -> f64> KelvinTransform<F> {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if !(r2 > 0.0) {
            return Err(FracError::Singular("Kelvin transform at the origin".into()));
        }
        let inv: Vec<f64> = x.iter().map(|v| v / r2).collect();
        let scale = r2.powf((2.0 * self.s - self.n as f64) / 2.0);
        Ok(scale * (self.inner)(&inv))
    }

    /// Infallible evaluation for use away from the origin.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.eval(x).unwrap_or(f64::NAN)
    }
}

/// Comparison of `L_s[w*](X)` with `|X|^{−n−2s−2} L_s[w](X/|X|²)` at two
/// step sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KelvinCheck {
    /// Richardson-extrapolated `L_s[w*](X)`
    pub lhs: f64,
    /// Richardson-extrapolated right-hand side
    pub rhs: f64,
    /// `|lhs − rhs|`
    pub residual: f64,
    /// `|lhs − rhs|` of the plain step-`h` values
    pub raw_residual: f64,
    /// `(4/3)|R_h − R_{h/2}|` summed over both sides: the step-`h` error
    pub fd_error: f64,
}

pub fn kelvin_mapping_check(w: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64, p: &FracParams) -> Result<KelvinCheck> {
    let kt = kelvin(|y: &[f64]| w(y), p);
    let star = |y: &[f64]| kt.value(y);
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if !(r2 > 0.0) {
        return Err(FracError::Singular("Kelvin check at the origin".into()));
    }
    let inv: Vec<f64> = x.iter().map(|v| v / r2).collect();
    let factor = r2.powf(-(p.n as f64 + 2.0 * p.s + 2.0) / 2.0);
    let l1 = ls_residual(&star, x, h, p.s);
    let l2 = ls_residual(&star, x, h / 2.0, p.s);
    let r1 = factor * ls_residual(w, &inv, h, p.s);
    let r2h = factor * ls_residual(w, &inv, h / 2.0, p.s);
    let lhs = (4.0 * l2 - l1) / 3.0;
    let rhs = (4.0 * r2h - r1) / 3.0;
    Ok(KelvinCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        raw_residual: (l1 - r1).abs(),
        fd_error: 4.0 / 3.0 * ((l1 - l2).abs() + (r1 - r2h).abs()),
    })
}

// ---------------------------------------------------------------------------
// reduced half-space minimizer

/// Minimizer of the half-space quotient among functions radial in `y'`,
/// computed on `(τ, y_n) ∈ [0, R] × (0, R)`.
#[derive(Debug, Clone)]
pub struct ReducedMinimizer {
    pub params: FracParams,
    pub radius: f64,
    pub values: GridFunction,
    pub quotient: f64,
    pub history: Vec<f64>,
    pub iterations: usize,
    pub el_residual: f64,
    pub positivity_projections: usize,
    /// weighted mass within `R/10` of the outer boundary
    pub boundary_layer_mass: f64,
    pub median_mass_radius: f64,
    pub dec: Arc<SpectralDecomposition>,
}

/// Settings of [`halfspace_minimizer`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceOptions {
    pub max_iter: usize,
    pub boundary_layer_limit: f64,
}

impl Default for HalfspaceOptions {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            boundary_layer_limit: 1e-3,
        }
    }
}

pub fn reduced_grid(n: usize, radius: f64, res: usize) -> Result<Arc<Grid>> {
    Ok(Arc::new(make_grid(&Domain::ReducedHalfSpace { n, radius }, &[res, res])?))
}

/// Euler–Lagrange fixed point on the reduced grid, started from
/// `y_n e^{−|y|²}`.
pub fn halfspace_minimizer(p: &FracParams, radius: f64, res: usize, tol: f64) -> Result<ReducedMinimizer> {
    halfspace_minimizer_with(p, radius, res, tol, HalfspaceOptions::default())
}

pub fn halfspace_minimizer_with(
    p: &FracParams,
    radius: f64,
    res: usize,
    tol: f64,
    opts: HalfspaceOptions,
) -> Result<ReducedMinimizer> {
    let grid = reduced_grid(p.n, radius, res)?;
    let dec = Arc::new(SpectralDecomposition::full(grid.clone())?);
    let init = GridFunction::from_fn(grid.clone(), |t, y| y * (-(t * t + y * y)).exp())?;
    let mut el = ElOptions::new(tol);
    el.max_iter = opts.max_iter;
    let weight = QuotientWeight::hardy_sobolev(p);
    let r = minimize_with(&dec, p.s, weight, &init, el)?;
    let layer = boundary_layer_mass(&r.minimizer, weight, radius);
    if layer > opts.boundary_layer_limit {
        return Err(FracError::Resolution(format!(
            "boundary layer carries {layer:e} of the mass; increase R"
        )));
    }
    Ok(ReducedMinimizer {
        params: *p,
        radius,
        median_mass_radius: median_mass_radius(&r.minimizer, weight),
        values: r.minimizer,
        quotient: r.quotient,
        history: r.history,
        iterations: r.iterations,
        el_residual: r.el_residual,
        positivity_projections: r.positivity_projections,
        boundary_layer_mass: layer,
        dec,
    })
}

fn boundary_layer_mass(u: &GridFunction, weight: QuotientWeight, radius: f64) -> f64 {
    let w = u.grid.weights();
    let r = u.grid.clamped_radii();
    let pts = u.grid.points();
    let mut total = 0.0;
    let mut layer = 0.0;
    for k in 0..u.values.len() {
        let d = w[k] * r[k].powf(weight.power) * u.values[k].abs().powf(weight.q);
        total += d;
        if pts[k][0] > 0.9 * radius || pts[k][1] > 0.9 * radius {
            layer += d;
        }
    }
    layer / total
}

/// Dilation `λ^{(n−2s)/2} Φ(λ y)` with `λ` chosen so that the geometric-mean
/// radius of the weighted density equals `target`, then renormalized.
pub fn dilate_to_scale(u: &GridFunction, p: &FracParams, target: f64) -> Result<GridFunction> {
    let weight = QuotientWeight::hardy_sobolev(p);
    let rho = geometric_mean_radius(u, weight);
    let lam = rho / target;
    let v = GridFunction::from_fn(u.grid.clone(), |t, y| u.interpolate(lam * t, lam * y))?;
    let nrm = weight.norm(&v);
    if !(nrm > 0.0) {
        return Err(FracError::ZeroFunction);
    }
    Ok(v.scale(1.0 / nrm))
}

/// Scale-fixed profile: the EL map composed with a dilation back to a fixed
/// geometric-mean radius. The plain EL iteration on a lattice drifts towards
/// the grid scale; this fixed point keeps the profile resolved.
#[derive(Debug, Clone)]
pub struct GaugedProfile {
    pub minimizer: ReducedMinimizer,
    pub target_radius: f64,
    /// quotient after each gauged step (not monotone in general)
    pub gauge_history: Vec<f64>,
    pub converged: bool,
}

pub fn gauged_profile(m: &ReducedMinimizer, target: f64, tol: f64, max_iter: usize) -> Result<GaugedProfile> {
    let p = &m.params;
    let weight = QuotientWeight::hardy_sobolev(p);
    let radii = m.values.grid.clamped_radii();
    let mut u = dilate_to_scale(&m.values, p, target)?;
    let mut q = spectral_form(&m.dec, &u, p.s)?;
    let mut history = vec![q];
    let mut converged = false;
    for _ in 0..max_iter {
        let g = GridFunction {
            grid: u.grid.clone(),
            values: u
                .values
                .iter()
                .zip(&radii)
                .map(|(v, r)| v.abs().powf(weight.q - 2.0) * v * r.powf(weight.power))
                .collect(),
        };
        let v = m.dec.apply_power(&g, -p.s)?.map(|x| x.max(0.0));
        let next = dilate_to_scale(&v, p, target)?;
        let qn = spectral_form(&m.dec, &next, p.s)?;
        let change = next
            .values
            .iter()
            .zip(&u.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / next.values.iter().cloned().fold(0.0, f64::max);
        history.push(qn);
        let dq = ((q - qn) / q).abs();
        u = next;
        q = qn;
        if dq < tol && change < tol.sqrt() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(FracError::MaxIterations {
            iterations: max_iter,
            last_decrease: history[history.len() - 2] - q,
            residual: f64::NAN,
        });
    }
    let mut out = m.clone();
    out.median_mass_radius = median_mass_radius(&u, weight);
    out.boundary_layer_mass = boundary_layer_mass(&u, weight, m.radius);
    out.el_residual = crate::variational::el_residual(&m.dec, &u, p.s, weight)?;
    out.quotient = rayleigh_quotient(&m.dec, &u, p)?;
    out.values = u;
    Ok(GaugedProfile {
        minimizer: out,
        target_radius: target,
        gauge_history: history,
        converged,
    })
}

impl ReducedMinimizer {
    /// Extension `𝒲` of the reduced profile.
    pub fn extension(&self) -> Result<ExtensionField> {
        let t = default_t_nodes(&self.dec, self.params.s)?;
        extend(&self.dec, &self.values, &self.params, &t)
    }

    /// Φ at `(τ, y_n)`: bilinear inside the box, zero outside.
    pub fn eval(&self, tau: f64, yn: f64) -> f64 {
        if yn <= 0.0 {
            return 0.0;
        }
        self.values.interpolate(tau, yn)
    }

    /// Least-squares constant `C` of the far field `C y_n |y|^{−(n−2s+2)}`,
    /// fitted on `R/4 < |y| < R/2`.
    pub fn tail_constant(&self) -> f64 {
        let e = self.params.n as f64 - 2.0 * self.params.s + 2.0;
        let (mut num, mut den) = (0.0, 0.0);
        for (pt, v) in self.values.grid.points().iter().zip(&self.values.values) {
            let r = pt[0].hypot(pt[1]);
            if r > 0.25 * self.radius && r < 0.5 * self.radius {
                let g = pt[1] * r.powf(-e);
                num += g * v;
                den += g * g;
            }
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// Φ inside the trusted region `|y| ≤ R/2`, the fitted far field beyond.
    pub fn eval_extended(&self, tau: f64, yn: f64, tail: f64) -> f64 {
        if yn <= 0.0 {
            return 0.0;
        }
        let r = tau.hypot(yn);
        if r <= 0.5 * self.radius {
            self.values.interpolate(tau, yn)
        } else {
            tail * yn * r.powf(-(self.params.n as f64 - 2.0 * self.params.s + 2.0))
        }
    }
}

/// Decay constants of the minimizer and its extension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    /// `sup Φ (1+|y|^{n−2s+2}) / y_n`
    pub phi_constant: f64,
    /// `sup 𝒱 (1+|y|^{2n−2s+2})` with `𝒱(y) = ∫ z^{1−2s}|∇_Y𝒲|² dz`
    pub v_constant: f64,
    /// `max Φ/y_n` on the first row above `y_n = 0`
    pub boundary_slope: f64,
    /// the suprema are taken over `|y| ≤ trusted_radius`
    pub trusted_radius: f64,
    pub boundary_layer_mass: f64,
}

/// Suprema over the trusted region `|y| ≤ R/2`, away from the artificial
/// outer boundary.
pub fn decay_certificate(m: &ReducedMinimizer) -> Result<DecayCertificate> {
    let p = &m.params;
    let nf = p.n as f64;
    let trusted = 0.5 * m.radius;
    let grid = &m.values.grid;
    let pts = grid.points();
    let w = m.extension()?;
    let v = energy_density(&w);
    let mut phi_c: f64 = 0.0;
    let mut v_c: f64 = 0.0;
    let mut slope: f64 = 0.0;
    let first_row = grid.axes[1].nodes[0];
    for (k, pt) in pts.iter().enumerate() {
        let r = pt[0].hypot(pt[1]);
        if r > trusted {
            continue;
        }
        let phi = m.values.values[k];
        phi_c = phi_c.max(phi * (1.0 + r.powf(nf - 2.0 * p.s + 2.0)) / pt[1]);
        v_c = v_c.max(v[k] * (1.0 + r.powf(2.0 * nf - 2.0 * p.s + 2.0)));
        if pt[1] == first_row {
            slope = slope.max(phi / pt[1]);
        }
    }
    Ok(DecayCertificate {
        phi_constant: phi_c,
        v_constant: v_c,
        boundary_slope: slope,
        trusted_radius: trusted,
        boundary_layer_mass: m.boundary_layer_mass,
    })
}

/// `‖(u − λ)₊‖_{L_{2*_s}}`.
fn level_norm(u: &GridFunction, lambda: f64, q: f64) -> f64 {
    let cut = u.map(|v| (v - lambda).max(0.0));
    lebesgue_norm(&cut, q, 0.0)
}

/// The level `λ ≥ 0` with `‖(u−λ)₊‖_{L_{2*_s}} = τ`, by bisection.
pub fn level_lambda(u: &GridFunction, tau: f64, p: &FracParams) -> Result<f64> {
    let q = p.two_star_s;
    let full = level_norm(u, 0.0, q);
    if !(tau > 0.0 && tau <= full) {
        return Err(FracError::InvalidArgument(format!(
            "level target {tau} outside (0, {full}]"
        )));
    }
    if tau == full {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = u.values.iter().cloned().fold(0.0, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if level_norm(u, mid, q) > tau {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fitted constants of the level-set bound `sup u ≤ C λ(u, τ)` over a sweep
/// of `τ` given as fractions of `‖u‖_{L_{2*_s}}`.
pub fn level_bound_sweep(u: &GridFunction, fractions: &[f64], p: &FracParams) -> Result<Vec<(f64, f64, f64)>> {
    let full = level_norm(u, 0.0, p.two_star_s);
    let sup = u.values.iter().cloned().fold(0.0, f64::max);
    fractions
        .iter()
        .map(|f| {
            let tau = f * full;
            let lam = level_lambda(u, tau, p)?;
            Ok((tau, lam, sup / lam))
        })
        .collect()
}

/// Fitted `C` in `Φ(y) ≤ C(1+|y|)^{2s−n}`.
pub fn rough_bound_constant(m: &ReducedMinimizer) -> f64 {
    let nf = m.params.n as f64;
    m.values
        .grid
        .points()
        .iter()
        .zip(&m.values.values)
        .map(|(pt, v)| v * (1.0 + pt[0].hypot(pt[1])).powf(nf - 2.0 * m.params.s))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    #[test]
    fn poisson_constant_line() {
        assert!((poisson_constant(1, 0.5) - 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn poisson_mass_is_one() {
        for (n, s) in [(2, 0.5), (3, 0.3), (2, 0.8)] {
            let c = poisson_constant(n, s);
            let a = poisson_mass(n, s, c, 0.5);
            let b = poisson_mass(n, s, c, 3.0);
            assert!((a - 1.0).abs() < 1e-8, "n={n} s={s}: {a}");
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn calibration_matches_closed_form_and_refines() {
        for (n, s) in [(2, 0.5), (3, 0.75), (2, 0.3)] {
            let (c, res) = calibrate_riesz_constant(n, s, 4000);
            let exact = riesz_potential_constant(n, s);
            assert!((c - exact).abs() < 1e-8 * exact, "n={n} s={s}: {c} vs {exact}");
            assert!(res < 1e-8);
            let r1 = calibrate_riesz_constant(n, s, 40).1;
            let r2 = calibrate_riesz_constant(n, s, 80).1;
            let r3 = calibrate_riesz_constant(n, s, 160).1;
            assert!(r2 < r1 && r3 <= r2.max(1e-13), "{r1} {r2} {r3}");
        }
    }

    #[test]
    fn kernel_vanishes_on_boundary_and_image_form() {
        let p = make_params(3, 0.5, 0.25).unwrap();
        let pt = KernelPoint::new(vec![0.3, -0.2, 0.0], 0.7, vec![0.1, 0.4, 1.2]).unwrap();
        assert_eq!(green_kernel(KernelKind::SourceData, &pt, &p, 1.0).unwrap(), 0.0);
        let pt = KernelPoint::new(vec![0.3, -0.2, 0.5], 0.7, vec![0.1, 0.4, 1.2]).unwrap();
        let d2 = pt.dist2();
        let image = d2 + 4.0 * 0.5 * 1.2;
        let expect = 1.0 / d2 - 1.0 / image;
        let g = green_kernel(KernelKind::SourceData, &pt, &p, 1.0).unwrap();
        assert!((g - expect).abs() < 1e-14);
    }

    #[test]
    fn poisson_kernel_far_from_boundary() {
        let p = make_params(2, 0.4, 0.2).unwrap();
        let c = poisson_constant(2, 0.4);
        let pt = KernelPoint::new(vec![0.2, 1e6], 0.5, vec![-0.1, 1e6 + 0.3]).unwrap();
        let g = green_kernel(KernelKind::BoundaryData, &pt, &p, c).unwrap();
        let whole = c * 0.5f64.powf(0.8) * pt.dist2().powf(-(2.0 + 0.8) / 2.0);
        assert!((g - whole).abs() < 1e-9 * whole);
    }

    #[test]
    fn singular_point_is_rejected() {
        let p = make_params(2, 0.5, 0.25).unwrap();
        let pt = KernelPoint::new(vec![0.2, 1.0], 0.0, vec![0.2, 1.0]).unwrap();
        assert!(green_kernel(KernelKind::Trace, &pt, &p, 1.0).is_err());
        assert!(bound_margin(KernelKind::SourceData, &pt, 1.5, &p).is_err());
    }

    #[test]
    fn gradient_matches_differences() {
        let p = make_params(3, 0.6, 0.2).unwrap();
        let c = riesz_potential_constant(3, 0.6);
        let pt = KernelPoint::new(vec![0.3, -0.2, 0.5], 0.7, vec![0.1, 0.4, 1.2]).unwrap();
        let g = green_gradient(&pt, &p, c).unwrap();
        let h = 1e-6;
        for i in 0..4 {
            let mut a = pt.clone();
            let mut b = pt.clone();
            if i < 3 {
                a.y[i] += h;
                b.y[i] -= h;
            } else {
                a.z += h;
                b.z -= h;
            }
            let fd = (green_kernel(KernelKind::SourceData, &a, &p, c).unwrap()
                - green_kernel(KernelKind::SourceData, &b, &p, c).unwrap())
                / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7 * (1.0 + g[i].abs()), "component {i}");
        }
    }

    #[test]
    fn kelvin_of_constant_and_origin() {
        let p = make_params(2, 0.3, 0.1).unwrap();
        let k = kelvin(|_: &[f64]| 1.0, &p);
        let x = [0.3, 0.4, 1.2];
        let r = (0.09f64 + 0.16 + 1.44).sqrt();
        assert!((k.eval(&x).unwrap() - r.powf(0.6 - 2.0)).abs() < 1e-14);
        assert!(k.eval(&[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn level_lambda_basics() {
        let p = make_params(2, 0.5, 0.25).unwrap();
        let g = Arc::new(make_grid(&Domain::Rectangle { x: (-1.0, 1.0), y: (-1.0, 1.0) }, &[30, 30]).unwrap());
        let u = GridFunction::from_fn(g, |x, y| crate::spectral::bump(x.hypot(y))).unwrap();
        let full = lebesgue_norm(&u, p.two_star_s, 0.0);
        assert_eq!(level_lambda(&u, full, &p).unwrap(), 0.0);
        assert!(level_lambda(&u, 1.1 * full, &p).is_err());
        assert!(level_lambda(&u, 0.0, &p).is_err());
        let mut prev = f64::INFINITY;
        for f in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let l = level_lambda(&u, f * full, &p).unwrap();
            assert!(l < prev);
            let check = level_norm(&u, l, p.two_star_s);
            assert!((check - f * full).abs() < 1e-9 * full);
            prev = l;
        }
    }
}
