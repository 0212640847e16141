//! Fourier–Bessel synthesis of the Stinga–Torrea extension, its weighted
//! energy and the conormal derivative at `t = 0`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{FracError, Result};
use crate::grid::{Grid, GridFunction};
use crate::params::FracParams;
use crate::special::extension_profile;
use crate::spectral::{DirichletOperator, SpectralDecomposition};

/// Extension `w(x, t)` sampled at the grid nodes and a graded set of `t`.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    pub grid: Arc<Grid>,
    pub t_nodes: Vec<f64>,
    /// `values[k]` holds `w(·, t_nodes[k])`
    pub values: Vec<Vec<f64>>,
    pub s: f64,
}

/// Argument beyond which the extension profile has fallen below 1e-14.
pub fn profile_cutoff(s: f64) -> f64 {
    let mut tau: f64 = 1.0;
    while extension_profile(s, tau) >= 1e-14 {
        tau += 0.25;
    }
    tau
}

/// Geometric `t` nodes `t_min r^k` with `t_min = 1e-4/√λ_max`, running until
/// the slowest mode has decayed below 1e-14.
pub fn graded_t_nodes(lambda_min: f64, lambda_max: f64, s: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(ratio > 1.0) {
        return Err(FracError::InvalidArgument(format!("grading ratio must exceed 1, got {ratio}")));
    }
    if !(lambda_min > 0.0 && lambda_max >= lambda_min) {
        return Err(FracError::InvalidArgument(format!(
            "eigenvalue range ({lambda_min}, {lambda_max}) is not positive"
        )));
    }
    let t_min = 1e-4 / lambda_max.sqrt();
    let t_max = profile_cutoff(s) / lambda_min.sqrt();
    let mut t = vec![t_min];
    while *t.last().unwrap() < t_max {
        let next = t.last().unwrap() * ratio;
        t.push(next);
    }
    Ok(t)
}

/// Default `t` nodes for a decomposition (ratio 1.15).
pub fn default_t_nodes(dec: &SpectralDecomposition, s: f64) -> Result<Vec<f64>> {
    let lo = dec.lambdas[0];
    let hi = *dec.lambdas.last().unwrap();
    graded_t_nodes(lo, hi, s, 1.15)
}

/// `w(x,t) = Σ_i ⟨u,φ_i⟩ θ_s(√λ_i t) φ_i(x)`.
pub fn extend(dec: &SpectralDecomposition, u: &GridFunction, p: &FracParams, t_nodes: &[f64]) -> Result<ExtensionField> {
    extend_order(dec, u, p.s, t_nodes)
}

pub fn extend_order(dec: &SpectralDecomposition, u: &GridFunction, s: f64, t_nodes: &[f64]) -> Result<ExtensionField> {
    if t_nodes.is_empty() {
        return Err(FracError::InvalidArgument("no t nodes".into()));
    }
    if t_nodes.iter().any(|t| !(*t > 0.0)) || t_nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FracError::InvalidArgument("t nodes must be positive and increasing".into()));
    }
    let coeffs = dec.coefficients(u)?;
    let roots: Vec<f64> = dec.lambdas.iter().map(|l| l.sqrt()).collect();
    let values = t_nodes
        .par_iter()
        .map(|&t| {
            let d: Vec<f64> = coeffs
                .iter()
                .zip(&roots)
                .map(|(c, r)| if *c == 0.0 { 0.0 } else { c * extension_profile(s, r * t) })
                .collect();
            dec.synthesize(&d).map(|f| f.values)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExtensionField {
        grid: dec.grid.clone(),
        t_nodes: t_nodes.to_vec(),
        values,
        s,
    })
}

impl ExtensionField {
    /// `w(·, t_min)`.
    pub fn trace(&self) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values[0].clone(),
        }
    }

    pub fn max_abs_per_t(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| v.iter().fold(0.0f64, |a, b| a.max(b.abs())))
            .collect()
    }

    /// Field restricted to every other `t` node, starting with the first.
    pub fn coarsened(&self) -> Self {
        let pick = |v: &[f64]| v.iter().step_by(2).cloned().collect::<Vec<_>>();
        Self {
            grid: self.grid.clone(),
            t_nodes: pick(&self.t_nodes),
            values: self.values.iter().step_by(2).cloned().collect(),
            s: self.s,
        }
    }
}

/// Weighted energy with its Richardson error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate {
    pub value: f64,
    /// `|E(t) − E(t on every other node)| / 3`
    pub error: f64,
    pub x_part: f64,
    pub t_part: f64,
}

/// `E_s[w] = ∫∫ t^{1−2s}|∇w|²` with the stencil energy in `x` and one-sided
/// differences in `t`.
pub fn extension_energy(w: &ExtensionField) -> Result<f64> {
    Ok(extension_energy_estimate(w)?.value)
}

pub fn extension_energy_estimate(w: &ExtensionField) -> Result<EnergyEstimate> {
    let fine = energy_parts(w)?;
    let coarse = if w.t_nodes.len() >= 5 {
        let c = energy_parts(&w.coarsened())?;
        ((fine.0 + fine.1) - (c.0 + c.1)).abs() / 3.0
    } else {
        f64::INFINITY
    };
    Ok(EnergyEstimate {
        value: fine.0 + fine.1,
        error: coarse,
        x_part: fine.0,
        t_part: fine.1,
    })
}

/// `∫_a^b t^β dt`.
pub(crate) fn power_integral(a: f64, b: f64, beta: f64) -> f64 {
    (b.powf(beta + 1.0) - a.powf(beta + 1.0)) / (beta + 1.0)
}

fn energy_parts(w: &ExtensionField) -> Result<(f64, f64)> {
    let op = DirichletOperator::new(w.grid.clone());
    let beta = 1.0 - 2.0 * w.s;
    let t = &w.t_nodes;
    let ex = w
        .values
        .par_iter()
        .map(|v| op.energy(v))
        .collect::<Result<Vec<f64>>>()?;
    // x part: linear interpolation of the stencil energy against the exact weight
    let mut x_part = ex[0] * t[0].powf(beta + 1.0) / (beta + 1.0);
    for k in 0..t.len() - 1 {
        let (a, b) = (t[k], t[k + 1]);
        let i0 = power_integral(a, b, beta);
        let i1 = power_integral(a, b, beta + 1.0);
        let slope = (ex[k + 1] - ex[k]) / (b - a);
        x_part += ex[k] * i0 + slope * (i1 - a * i0);
    }
    // t part: secant slopes per cell
    let mut t_part = 0.0;
    for k in 0..t.len() - 1 {
        let dt = t[k + 1] - t[k];
        let diff: Vec<f64> = w.values[k + 1]
            .iter()
            .zip(&w.values[k])
            .map(|(a, b)| (a - b) / dt)
            .collect();
        let d2 = w.grid.inner(&diff, &diff);
        t_part += d2 * power_integral(t[k], t[k + 1], beta);
        if k == 0 {
            // near 0 the integrand behaves like t^{2s−1}
            let g0 = t[0].powf(beta) * d2;
            t_part += g0 * t[0] / (2.0 * w.s);
        }
    }
    Ok((x_part, t_part))
}

/// `∫_0^∞ t^{1−2s} f dt` for node values `f(t_k)`: linear interpolation
/// against the exact weight, constant below the first node.
pub fn weighted_t_integral(t: &[f64], f: &[f64], s: f64) -> f64 {
    let beta = 1.0 - 2.0 * s;
    let mut acc = f[0] * t[0].powf(beta + 1.0) / (beta + 1.0);
    for k in 0..t.len() - 1 {
        let (a, b) = (t[k], t[k + 1]);
        let i0 = power_integral(a, b, beta);
        let i1 = power_integral(a, b, beta + 1.0);
        let slope = (f[k + 1] - f[k]) / (b - a);
        acc += f[k] * i0 + slope * (i1 - a * i0);
    }
    acc
}

/// Pointwise weighted energy `∫ t^{1−2s}(|∇_x w|² + w_t²) dt` at every node,
/// with centred differences in `x`.
pub fn energy_density(w: &ExtensionField) -> Vec<f64> {
    let beta = 1.0 - 2.0 * w.s;
    let t = &w.t_nodes;
    let grads: Vec<Vec<f64>> = w
        .values
        .par_iter()
        .map(|v| {
            let f = GridFunction {
                grid: w.grid.clone(),
                values: v.clone(),
            };
            f.gradient().iter().map(|g| g[0] * g[0] + g[1] * g[1]).collect()
        })
        .collect();
    let n = w.grid.len();
    let mut out = vec![0.0; n];
    for node in 0..n {
        let mut acc = grads[0][node] * t[0].powf(beta + 1.0) / (beta + 1.0);
        for k in 0..t.len() - 1 {
            let (a, b) = (t[k], t[k + 1]);
            let i0 = power_integral(a, b, beta);
            let i1 = power_integral(a, b, beta + 1.0);
            let slope = (grads[k + 1][node] - grads[k][node]) / (b - a);
            acc += grads[k][node] * i0 + slope * (i1 - a * i0);
            let dz = (w.values[k + 1][node] - w.values[k][node]) / (b - a);
            acc += dz * dz * i0;
            if k == 0 {
                acc += t[0].powf(beta) * dz * dz * t[0] / (2.0 * w.s);
            }
        }
        out[node] = acc;
    }
    out
}

/// `C_s ∂w/∂ν_s = −C_s lim t^{1−2s}∂_t w`, extrapolated from the three
/// smallest nodes. Differences are taken in the variable `t^{2s}`, which is
/// exact for the leading behaviour, and the two quotients are extrapolated
/// linearly in the next-order abscissa.
pub fn conormal_derivative(w: &ExtensionField, p: &FracParams) -> Result<GridFunction> {
    if w.t_nodes.len() < 3 {
        return Err(FracError::InvalidArgument(format!(
            "conormal derivative needs at least 3 t nodes, got {}",
            w.t_nodes.len()
        )));
    }
    let s = w.s;
    let t = &w.t_nodes;
    let ts = |x: f64| x.powf(2.0 * s);
    let quotient = |k: usize| -> (Vec<f64>, f64) {
        let den = (ts(t[k + 1]) - ts(t[k])) / (2.0 * s);
        let q = w.values[k + 1]
            .iter()
            .zip(&w.values[k])
            .map(|(a, b)| (a - b) / den)
            .collect();
        let zeta = (t[k + 1] * t[k + 1] - t[k] * t[k]) / (ts(t[k + 1]) - ts(t[k]));
        (q, zeta)
    };
    let (q0, z0) = quotient(0);
    let (q1, z1) = quotient(1);
    let values = q0
        .iter()
        .zip(&q1)
        .map(|(a, b)| {
            let lim = a - z0 * (b - a) / (z1 - z0);
            -p.c_s * lim
        })
        .collect();
    GridFunction::new(w.grid.clone(), values)
}
