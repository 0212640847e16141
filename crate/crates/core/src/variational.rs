//! Quotient minimization by the Euler–Lagrange fixed point, concentration
//! diagnostics on domains containing the origin, and the Pohozaev ledger.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::extension::{power_integral, weighted_t_integral, ExtensionField};
use crate::grid::{make_grid, Domain, GridFunction};
use crate::params::FracParams;
use crate::special::{smooth_cutoff, smooth_cutoff_derivative};
use crate::spectral::{riesz_form, spectral_form, QuotientWeight, SpectralDecomposition};

/// Stopping rule of the fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElOptions {
    /// relative quotient decrease below which the iteration may stop
    pub tol: f64,
    /// the EL residual must also fall below `residual_factor · tol`
    pub residual_factor: f64,
    pub max_iter: usize,
}

impl ElOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            residual_factor: 10.0,
            max_iter: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub minimizer: GridFunction,
    pub quotient: f64,
    pub history: Vec<f64>,
    pub el_residual: f64,
    pub positivity_projections: usize,
    pub iterations: usize,
}

/// `|u|^{q−2}u·|x|^{power}` at every node.
fn nonlinearity(u: &GridFunction, weight: QuotientWeight, radii: &[f64]) -> GridFunction {
    let values = u
        .values
        .iter()
        .zip(radii)
        .map(|(v, r)| v.abs().powf(weight.q - 2.0) * v * r.powf(weight.power))
        .collect();
    GridFunction {
        grid: u.grid.clone(),
        values,
    }
}

/// `‖A^s u − μ g(u)‖/‖A^s u‖` with `μ = ⟨A^s u,u⟩/⟨g(u),u⟩`.
pub fn el_residual(dec: &SpectralDecomposition, u: &GridFunction, s: f64, weight: QuotientWeight) -> Result<f64> {
    let radii = u.grid.clamped_radii();
    let au = dec.apply_power(u, s)?;
    let g = nonlinearity(u, weight, &radii);
    let mu = au.inner(u)? / g.inner(u)?;
    let diff: Vec<f64> = au.values.iter().zip(&g.values).map(|(a, b)| a - mu * b).collect();
    let num = u.grid.inner(&diff, &diff).sqrt();
    Ok(num / au.norm_l2())
}

/// Hardy–Sobolev minimization: the EL map `u ↦ A^{−s}(|u|^{q−2}u|x|^{power})`
/// followed by normalization.
pub fn minimize_quotient(dec: &SpectralDecomposition, p: &FracParams, init: &GridFunction, tol: f64) -> Result<MinimizeResult> {
    minimize_with(dec, p.s, QuotientWeight::hardy_sobolev(p), init, ElOptions::new(tol))
}

pub fn minimize_with(
    dec: &SpectralDecomposition,
    s: f64,
    weight: QuotientWeight,
    init: &GridFunction,
    opts: ElOptions,
) -> Result<MinimizeResult> {
    if init.is_zero() {
        return Err(FracError::ZeroFunction);
    }
    let radii = init.grid.clamped_radii();
    let normalize = |v: GridFunction| -> Result<GridFunction> {
        let nrm = weight.norm(&v);
        if !(nrm > 0.0) {
            return Err(FracError::ZeroFunction);
        }
        Ok(v.scale(1.0 / nrm))
    };
    let mut projections = 0;
    let mut u = init.map(f64::abs);
    u = normalize(u)?;
    let mut q = spectral_form(dec, &u, s)?;
    let mut history = vec![q];
    let mut last_decrease = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let g = nonlinearity(&u, weight, &radii);
        let mut v = dec.apply_power(&g, -s)?;
        for x in v.values.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
                projections += 1;
            }
        }
        let v = normalize(v)?;
        let qn = spectral_form(dec, &v, s)?;
        if qn > q * (1.0 + 1e-12) {
            history.push(qn);
            return Err(FracError::NonMonotone {
                iteration: it,
                previous: q,
                current: qn,
                history,
            });
        }
        history.push(qn);
        last_decrease = (q - qn) / q;
        u = v;
        q = qn;
        if last_decrease < opts.tol {
            residual = el_residual(dec, &u, s, weight)?;
            if residual < opts.residual_factor * opts.tol {
                return Ok(MinimizeResult {
                    minimizer: u,
                    quotient: q,
                    history,
                    el_residual: residual,
                    positivity_projections: projections,
                    iterations: it,
                });
            }
        }
    }
    Err(FracError::MaxIterations {
        iterations: opts.max_iter,
        last_decrease,
        residual,
    })
}

/// Normalized weighted density `w_k r_k^{power}|u_k|^q` paired with `r_k`,
/// sorted by radius.
fn radial_density(u: &GridFunction, weight: QuotientWeight) -> Vec<(f64, f64)> {
    let w = u.grid.weights();
    let radii = u.grid.clamped_radii();
    let mut d: Vec<(f64, f64)> = u
        .values
        .iter()
        .zip(w.iter().zip(&radii))
        .map(|(v, (wk, r))| (*r, wk * r.powf(weight.power) * v.abs().powf(weight.q)))
        .collect();
    let total: f64 = d.iter().map(|x| x.1).sum();
    if total > 0.0 {
        for x in d.iter_mut() {
            x.1 /= total;
        }
    }
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    d
}

/// Radius enclosing half of the weighted mass, interpolated between nodes.
pub fn median_mass_radius(u: &GridFunction, weight: QuotientWeight) -> f64 {
    let d = radial_density(u, weight);
    let mut acc = 0.0;
    let mut prev_r = 0.0;
    for (r, m) in &d {
        if acc + m >= 0.5 {
            let frac = if *m > 0.0 { (0.5 - acc) / m } else { 1.0 };
            return prev_r + frac * (r - prev_r);
        }
        acc += m;
        prev_r = *r;
    }
    prev_r
}

/// `exp(Σ ρ_k log r_k)` for the normalized weighted density `ρ`.
pub fn geometric_mean_radius(u: &GridFunction, weight: QuotientWeight) -> f64 {
    radial_density(u, weight).iter().map(|(r, m)| m * r.ln()).sum::<f64>().exp()
}

// ---------------------------------------------------------------------------
// concentration at the origin

/// Weighted `2*_σ` mass profile of one refinement level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelProfile {
    pub resolution: usize,
    pub h: f64,
    pub quotient: f64,
    /// `riesz_form(u)/‖|x|^{σ−s}u‖²` of the normalized minimizer on a 4× torus
    pub riesz_quotient: f64,
    pub el_residual: f64,
    pub iterations: usize,
    pub median_mass_radius: f64,
    pub geometric_mean_radius: f64,
    /// mass in `|x| ≤ r` per probe radius
    pub mass_at_origin: Vec<f64>,
    /// mass in `|x| > r` per probe radius
    pub mass_at_infinity: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub params: FracParams,
    pub radii: Vec<f64>,
    pub levels: Vec<LevelProfile>,
    pub quotient_per_refinement: Vec<f64>,
    pub median_per_refinement: Vec<f64>,
    /// on the finest level
    pub median_mass_radius: f64,
}

impl ConcentrationReport {
    pub fn median_strictly_decreasing(&self) -> bool {
        self.median_per_refinement.windows(2).all(|w| w[1] < w[0])
    }

    pub fn quotient_nonincreasing(&self) -> bool {
        self.quotient_per_refinement.windows(2).all(|w| w[1] <= w[0])
    }

    /// `riesz ≤ spectral` on every level.
    pub fn riesz_below_quotient(&self) -> bool {
        self.levels.iter().all(|l| l.riesz_quotient <= l.quotient + 1e-9)
    }

    /// Mass in `r_i < |x| ≤ r_j` on level `level`.
    pub fn annulus_mass(&self, level: usize, i: usize, j: usize) -> f64 {
        let l = &self.levels[level];
        l.mass_at_origin[j] - l.mass_at_origin[i]
    }
}

/// Cumulative weighted mass inside each radius, and the complement.
pub fn mass_profile(u: &GridFunction, weight: QuotientWeight, radii: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = radial_density(u, weight);
    let inside: Vec<f64> = radii
        .iter()
        .map(|r| d.iter().take_while(|x| x.0 <= *r).map(|x| x.1).sum::<f64>())
        .collect();
    let outside = radii
        .iter()
        .map(|r| d.iter().skip_while(|x| x.0 <= *r).map(|x| x.1).sum::<f64>())
        .collect();
    (inside, outside)
}

/// Positive initial guess vanishing on the boundary of an interval or rectangle.
fn domain_bump(domain: &Domain) -> Result<(f64, f64, f64, f64)> {
    match *domain {
        Domain::Interval { lo, hi } if lo < 0.0 && hi > 0.0 => Ok((lo, hi, 0.0, 0.0)),
        Domain::Rectangle { x, y } if x.0 < 0.0 && x.1 > 0.0 && y.0 < 0.0 && y.1 > 0.0 => Ok((x.0, x.1, y.0, y.1)),
        _ => Err(FracError::InvalidArgument(
            "the origin must lie strictly inside an interval or rectangle".into(),
        )),
    }
}

/// Minimizes on `levels` successively doubled grids (starting at
/// `base_resolution` nodes per axis) and records how the weighted density
/// concentrates at the origin.
pub fn nonattainment_diagnostic(
    domain: &Domain,
    p: &FracParams,
    levels: usize,
    base_resolution: usize,
    opts: ElOptions,
) -> Result<ConcentrationReport> {
    let (a, b, c, d) = domain_bump(domain)?;
    let dim = match domain {
        Domain::Interval { .. } => 1,
        _ => 2,
    };
    if dim != p.n {
        return Err(FracError::InvalidArgument(format!(
            "domain dimension {dim} does not match n = {}",
            p.n
        )));
    }
    if levels == 0 {
        return Err(FracError::InvalidArgument("at least one refinement level is needed".into()));
    }
    let weight = QuotientWeight::hardy_sobolev(p);
    let extent = if dim == 1 { a.abs().min(b) } else { a.abs().min(b).min(c.abs()).min(d) };
    let radii: Vec<f64> = (0..=12).map(|k| extent * 2f64.powi(-k)).rev().collect();
    let runs = (0..levels)
        .into_par_iter()
        .map(|l| {
            let res = base_resolution << l;
            let shape = if dim == 1 { vec![res] } else { vec![res, res] };
            let grid = Arc::new(make_grid(domain, &shape)?);
            let dec = SpectralDecomposition::full(grid.clone())?;
            let init = GridFunction::from_fn(grid.clone(), |x, y| {
                let fx = (x - a) * (b - x);
                if dim == 1 { fx } else { fx * (y - c) * (d - y) }
            })?;
            let m = minimize_with(&dec, p.s, weight, &init, opts)?;
            let riesz = riesz_form(&m.minimizer, p.s, 4)? / weight.norm(&m.minimizer).powi(2);
            let (inside, outside) = mass_profile(&m.minimizer, weight, &radii);
            Ok(LevelProfile {
                resolution: res,
                h: grid.min_spacing(),
                quotient: m.quotient,
                riesz_quotient: riesz,
                el_residual: m.el_residual,
                iterations: m.iterations,
                median_mass_radius: median_mass_radius(&m.minimizer, weight),
                geometric_mean_radius: geometric_mean_radius(&m.minimizer, weight),
                mass_at_origin: inside,
                mass_at_infinity: outside,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcentrationReport {
        params: *p,
        quotient_per_refinement: runs.iter().map(|l| l.quotient).collect(),
        median_per_refinement: runs.iter().map(|l| l.median_mass_radius).collect(),
        median_mass_radius: runs.last().map(|l| l.median_mass_radius).unwrap_or(f64::NAN),
        radii,
        levels: runs,
    })
}

// ---------------------------------------------------------------------------
// Pohozaev ledger

/// Terms of the dilation identity `B₁ + … + B₅ = 0` for the extension of `u`
/// cut off near the origin by `η_ε = 1 − φ_ε`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PohozaevLedger {
    /// `B₁ = ∫ (−Δ)ˢu ⟨x,∇u⟩ η`, `B₂` boundary, `B₃ = −C_s∫∫t^{1−2s}|∇w|²η`,
    /// `B₄` after integration by parts, `B₅` the cutoff-gradient term
    pub b_terms: [f64; 5],
    /// `(C_s/2) ∫ t^{1−2s} ⟨x,n⟩ |∇_x w|²` over `∂Ω`
    pub boundary_term: f64,
    /// remainder side of the identity: `−B₁ − B₃ − B₄' − B₅`, equal to the
    /// boundary term when the identity balances
    pub cutoff_remainder: f64,
    pub eps: f64,
    /// `|B₁ + … + B₅|`
    pub imbalance: f64,
    /// `Σ|B_i|`, the scale the imbalance is measured against
    pub scale: f64,
    /// flux of the dilation field through `t = t_max`, dropped from the sum
    pub truncated_flux: f64,
    /// EL residual of `u` for the Hardy–Sobolev weight; the identity itself
    /// holds for any trace
    pub el_residual: f64,
}

/// Evaluates the ledger on an interval containing the origin. `eps` is raised
/// to `4h` when smaller; below `2h` the cutoff cannot be resolved.
pub fn pohozaev_terms(dec: &SpectralDecomposition, u: &GridFunction, w: &ExtensionField, p: &FracParams, eps: f64) -> Result<PohozaevLedger> {
    let grid = &u.grid;
    if grid.dim() != 1 {
        return Err(FracError::InvalidArgument("the Pohozaev ledger is implemented on intervals".into()));
    }
    if !Arc::ptr_eq(grid, &w.grid) && **grid != *w.grid {
        return Err(FracError::InvalidArgument("trace and extension live on different grids".into()));
    }
    let axis = &grid.axes[0];
    let (lo, hi, h) = (axis.lo, axis.hi, axis.h);
    if !(lo < 0.0 && hi > 0.0) {
        return Err(FracError::InvalidArgument("the interval must contain the origin".into()));
    }
    if !(eps >= 2.0 * h) {
        return Err(FracError::Resolution(format!("cutoff radius {eps} is below 2h = {}", 2.0 * h)));
    }
    let eps = eps.max(4.0 * h);
    if eps >= lo.abs().min(hi) {
        return Err(FracError::InvalidArgument(format!("cutoff radius {eps} reaches the boundary")));
    }
    let x = &axis.nodes;
    let nx = x.len();
    let c_s = p.c_s;
    let nf = p.n as f64;
    let s = w.s;
    let beta = 1.0 - 2.0 * s;
    let t = &w.t_nodes;
    let nt = t.len();
    let eta = |r: f64| 1.0 - smooth_cutoff(eps, r.abs());
    let deta = |r: f64| -smooth_cutoff_derivative(eps, r.abs()) * r.signum();
    let mids: Vec<f64> = (0..=nx).map(|i| lo + (i as f64 + 0.5) * h).collect();
    // cell integrals of the cutoff factors: the field is sampled, the cutoff is exact
    let breaks = [-eps, -0.5 * eps, 0.0, 0.5 * eps, eps];
    let cell = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| cutoff_cell_integral(a, b, &breaks, f);
    let xeta = |r: f64| r * deta(r);
    let mid_eta: Vec<f64> = mids.iter().map(|m| cell(m - 0.5 * h, m + 0.5 * h, &eta)).collect();
    let mid_xdeta: Vec<f64> = mids.iter().map(|m| cell(m - 0.5 * h, m + 0.5 * h, &xeta)).collect();
    let mid_deta: Vec<f64> = mids.iter().map(|m| cell(m - 0.5 * h, m + 0.5 * h, &deta)).collect();
    let node_eta: Vec<f64> = x.iter().map(|v| cell(v - 0.5 * h, v + 0.5 * h, &eta)).collect();
    let node_xdeta: Vec<f64> = x.iter().map(|v| cell(v - 0.5 * h, v + 0.5 * h, &xeta)).collect();
    let at = |v: &[f64], i: isize| if i < 0 || i as usize >= nx { 0.0 } else { v[i as usize] };
    // x-differences at cell midpoints, zero outside
    let dx: Vec<Vec<f64>> = w
        .values
        .iter()
        .map(|v| (0..=nx).map(|i| (at(v, i as isize) - at(v, i as isize - 1)) / h).collect())
        .collect();

    // per-t-node x integrals
    let mut gx_eta = vec![0.0; nt];
    let mut gx_xdeta = vec![0.0; nt];
    let mut bdry = vec![0.0; nt];
    for k in 0..nt {
        for i in 0..=nx {
            let d2 = dx[k][i] * dx[k][i];
            gx_eta[k] += d2 * mid_eta[i];
            gx_xdeta[k] += d2 * mid_xdeta[i];
        }
        let v = &w.values[k];
        let right = (4.0 * at(v, nx as isize - 1) - at(v, nx as isize - 2)) / (2.0 * h);
        let left = (4.0 * at(v, 0) - at(v, 1)) / (2.0 * h);
        bdry[k] = hi * right * right * eta(hi) + (-lo) * left * left * eta(lo);
    }
    let node_integral = |f: &[f64]| weighted_t_integral(t, f, s);

    // per-t-cell integrals with secant slopes in t
    let mut gt_eta = 0.0;
    let mut gt_xdeta = 0.0;
    let mut b5_t = 0.0;
    for k in 0..nt - 1 {
        let dt = t[k + 1] - t[k];
        let weight = power_integral(t[k], t[k + 1], beta);
        let tw = power_integral(t[k], t[k + 1], beta + 1.0);
        let (mut a_eta, mut a_xdeta, mut a_b5) = (0.0, 0.0, 0.0);
        for i in 0..nx {
            let wt = (w.values[k + 1][i] - w.values[k][i]) / dt;
            a_eta += wt * wt * node_eta[i];
            a_xdeta += wt * wt * node_xdeta[i];
        }
        for i in 0..=nx {
            let wt_mid = 0.5
                * ((at(&w.values[k + 1], i as isize) - at(&w.values[k], i as isize))
                    + (at(&w.values[k + 1], i as isize - 1) - at(&w.values[k], i as isize - 1)))
                / dt;
            let wx_mid = 0.5 * (dx[k][i] + dx[k + 1][i]);
            a_b5 += wx_mid * wt_mid * mid_deta[i];
        }
        gt_eta += a_eta * weight;
        gt_xdeta += a_xdeta * weight;
        b5_t += a_b5 * tw;
        if k == 0 {
            // w_t ~ t^{2s−1} below the first node
            gt_eta += a_eta * t[0].powf(beta) * t[0] / (2.0 * s);
            gt_xdeta += a_xdeta * t[0].powf(beta) * t[0] / (2.0 * s);
        }
    }

    let g_eta = node_integral(&gx_eta) + gt_eta;
    let g_xdeta = node_integral(&gx_xdeta) + gt_xdeta;
    let boundary_term = 0.5 * c_s * node_integral(&bdry);

    let fu = dec.apply_power(u, s)?;
    let du = u.gradient();
    let b1: f64 = (0..nx).map(|i| fu.values[i] * x[i] * du[i][0] * node_eta[i]).sum();
    let b2 = 2.0 * boundary_term;
    let b3 = -c_s * g_eta;
    let b4 = -boundary_term + 0.5 * c_s * ((nf - 2.0 * s + 2.0) * g_eta + g_xdeta);
    let b5 = -c_s * (node_integral(&gx_xdeta) + b5_t);
    let b_terms = [b1, b2, b3, b4, b5];
    let sum: f64 = b_terms.iter().sum();

    // flux of t^{1−2s}[w_t⟨X,∇w⟩ − t|∇w|²/2]η through the top of the box
    let k = nt - 1;
    let dt = t[k] - t[k - 1];
    let tk = t[k];
    let mut flux = 0.0;
    for i in 0..nx {
        let wt = (w.values[k][i] - w.values[k - 1][i]) / dt;
        let wx = 0.5 * (dx[k][i] + dx[k][i + 1]);
        flux += h * eta(x[i]) * (wt * (x[i] * wx + tk * wt) - 0.5 * tk * (wx * wx + wt * wt));
    }
    let truncated_flux = c_s * tk.powf(beta) * flux;

    Ok(PohozaevLedger {
        b_terms,
        boundary_term,
        cutoff_remainder: boundary_term - sum,
        eps,
        imbalance: sum.abs(),
        scale: b_terms.iter().map(|b| b.abs()).sum(),
        truncated_flux,
        el_residual: if u.is_zero() {
            0.0
        } else {
            el_residual(dec, u, s, QuotientWeight::hardy_sobolev(p))?
        },
    })
}

/// `∫_a^b f` with five-point Gauss–Legendre on each piece between the
/// breakpoints of a piecewise polynomial `f`.
fn cutoff_cell_integral(a: f64, b: f64, breaks: &[f64], f: &dyn Fn(f64) -> f64) -> f64 {
    const X: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
    const W: [f64; 5] = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
    let mut pts = vec![a];
    pts.extend(breaks.iter().filter(|&&c| c > a && c < b));
    pts.push(b);
    pts.windows(2)
        .map(|p| {
            let (c, r) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
            r * X.iter().zip(&W).map(|(x, w)| w * f(c + r * x)).sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{extend, graded_t_nodes};
    use crate::spectral::{random_bumps, rayleigh_quotient};
    use std::f64::consts::PI;

    fn interval(n: usize) -> (Arc<crate::grid::Grid>, SpectralDecomposition) {
        let g = Arc::new(make_grid(&Domain::Interval { lo: 0.0, hi: PI }, &[n]).unwrap());
        let dec = SpectralDecomposition::full(g.clone()).unwrap();
        (g, dec)
    }

    #[test]
    fn unit_weight_minimizer_beats_first_mode() {
        let p = FracParams::on_line(0.4, 0.2).unwrap();
        let (g, dec) = interval(96);
        let weight = QuotientWeight::sobolev(&p);
        let init = GridFunction::from_fn(g.clone(), |x, _| x * (PI - x)).unwrap();
        let m = minimize_with(&dec, p.s, weight, &init, ElOptions::new(1e-10)).unwrap();
        let phi1 = dec.phi(0).unwrap().abs();
        let q1 = crate::spectral::quotient_with(&dec, &phi1, p.s, weight).unwrap();
        assert!(m.quotient <= q1 * (1.0 + 1e-12));
        assert!(m.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        assert!(m.minimizer.values.iter().all(|v| *v >= 0.0));
        assert!((weight.norm(&m.minimizer) - 1.0).abs() < 1e-10);
        assert!(m.el_residual < 10.0 * 1e-10);
    }

    #[test]
    fn minimizer_beats_random_competitors() {
        let p = FracParams::on_line(0.4, 0.2).unwrap();
        let g = Arc::new(make_grid(&Domain::Interval { lo: 0.5, hi: 2.0 }, &[64]).unwrap());
        let dec = SpectralDecomposition::full(g.clone()).unwrap();
        let init = GridFunction::from_fn(g.clone(), |x, _| (x - 0.5) * (2.0 - x)).unwrap();
        let m = minimize_quotient(&dec, &p, &init, 1e-10).unwrap();
        for v in random_bumps(&g, 20, 7).unwrap() {
            assert!(m.quotient <= rayleigh_quotient(&dec, &v, &p).unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn zero_initial_guess_is_rejected() {
        let p = FracParams::on_line(0.4, 0.2).unwrap();
        let (g, dec) = interval(16);
        let z = GridFunction::zeros(g);
        assert!(matches!(minimize_quotient(&dec, &p, &z, 1e-8), Err(FracError::ZeroFunction)));
    }

    #[test]
    fn mass_profile_partitions_unity() {
        let p = FracParams::on_line(0.4, 0.2).unwrap();
        let g = Arc::new(make_grid(&Domain::Interval { lo: -1.0, hi: 1.0 }, &[64]).unwrap());
        let u = GridFunction::from_fn(g, |x, _| (1.0 - x * x) * (1.0 + x)).unwrap();
        let w = QuotientWeight::hardy_sobolev(&p);
        let radii = [0.1, 0.3, 0.6, 1.0];
        let (inside, outside) = mass_profile(&u, w, &radii);
        for k in 0..radii.len() {
            assert!((inside[k] + outside[k] - 1.0).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&inside[k]));
        }
        assert!(inside.windows(2).all(|x| x[1] >= x[0]));
        let med = median_mass_radius(&u, w);
        assert!(med > 0.0 && med < 1.0);
    }

    #[test]
    fn origin_outside_is_rejected() {
        let p = FracParams::on_line(0.4, 0.2).unwrap();
        let r = nonattainment_diagnostic(&Domain::Interval { lo: 0.1, hi: 1.0 }, &p, 2, 16, ElOptions::new(1e-8));
        assert!(matches!(r, Err(FracError::InvalidArgument(_))));
    }

    fn ledger_setup(n: usize) -> (SpectralDecomposition, GridFunction, ExtensionField, FracParams) {
        let p = FracParams::on_line(0.4, 0.2).unwrap();
        let g = Arc::new(make_grid(&Domain::Interval { lo: -1.0, hi: 1.0 }, &[n]).unwrap());
        let dec = SpectralDecomposition::full(g.clone()).unwrap();
        let u = GridFunction::from_fn(g.clone(), |x, _| (PI * x / 2.0).cos() + 0.2 * (PI * x).sin()).unwrap();
        let h = g.axes[0].h;
        let t = graded_t_nodes(dec.lambdas[0], *dec.lambdas.last().unwrap(), p.s, 1.0 + h).unwrap();
        let w = extend(&dec, &u, &p, &t).unwrap();
        (dec, u, w, p)
    }

    #[test]
    fn zero_field_gives_zero_ledger() {
        let (dec, u, mut w, p) = ledger_setup(32);
        for v in w.values.iter_mut() {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
        let z = u.scale(0.0);
        let led = pohozaev_terms(&dec, &z, &w, &p, 0.4).unwrap();
        assert!(led.b_terms.iter().all(|b| *b == 0.0));
        assert_eq!(led.imbalance, 0.0);
    }

    #[test]
    fn ledger_balances_and_boundary_term_is_positive() {
        let (dec, u, w, p) = ledger_setup(128);
        let led = pohozaev_terms(&dec, &u, &w, &p, 0.3).unwrap();
        assert!(led.boundary_term > 0.0);
        assert!(led.imbalance < 1e-3 * led.scale, "{led:?}");
        assert!((led.cutoff_remainder - led.boundary_term).abs() <= led.imbalance + 1e-15);
    }

    #[test]
    fn unresolved_cutoff_is_rejected() {
        let (dec, u, w, p) = ledger_setup(32);
        let h = u.grid.axes[0].h;
        assert!(matches!(pohozaev_terms(&dec, &u, &w, &p, h), Err(FracError::Resolution(_))));
        // between 2h and 4h the radius is raised to 4h
        let led = pohozaev_terms(&dec, &u, &w, &p, 3.0 * h).unwrap();
        assert!((led.eps - 4.0 * h).abs() < 1e-15);
    }
}
