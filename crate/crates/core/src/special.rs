//! Special functions: Gamma (Lanczos) and the modified Bessel function K_ν.

use std::f64::consts::PI;

use crate::error::{FracError, Result};

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function on the real line (poles at non-positive integers return NaN).
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x < 0.5 {
        // reflection
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
}

/// Natural logarithm of |Γ(x)| for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Surface measure of the unit sphere 𝕊^{d-1} ⊂ ℝ^d. For d = 1 this is the
/// counting measure of {−1, 1}.
pub fn unit_sphere_area(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    2.0 * PI.powf(half) / gamma(half)
}

/// Switch point between the series and the integral representation of K_ν.
const BESSEL_SWITCH: f64 = 2.0;

/// Modified Bessel function of the second kind K_ν(τ) for ν ∈ (0, 1), τ > 0.
///
/// Small arguments use the ascending series of I_{±ν} together with
/// K_ν = π (I_{−ν} − I_ν) / (2 sin πν). Larger arguments integrate
/// K_ν(τ) = ∫₀^∞ e^{−τ cosh θ} cosh(νθ) dθ with the trapezoid rule, which is
/// spectrally accurate for this analytic, doubly-exponentially decaying integrand.
pub fn bessel_k(nu: f64, tau: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(FracError::ParameterDomain(format!(
            "bessel order must lie in (0,1), got {nu}"
        )));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(FracError::InvalidArgument(format!(
            "bessel argument must be positive, got {tau}"
        )));
    }
    Ok(if tau <= BESSEL_SWITCH {
        bessel_k_series(nu, tau)
    } else {
        bessel_k_integral(nu, tau)
    })
}

pub(crate) fn bessel_i_series(order: f64, tau: f64) -> f64 {
    let half = 0.5 * tau;
    let q = half * half;
    // first term (τ/2)^order / Γ(order + 1)
    let mut term = half.powf(order) / gamma(order + 1.0);
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + order));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

pub(crate) fn bessel_k_series(nu: f64, tau: f64) -> f64 {
    let i_minus = bessel_i_series(-nu, tau);
    let i_plus = bessel_i_series(nu, tau);
    PI * (i_minus - i_plus) / (2.0 * (PI * nu).sin())
}

pub(crate) fn bessel_k_integral(nu: f64, tau: f64) -> f64 {
    // The integrand is e^{-τ} at θ = 0; stop once it falls 1e-18 below that.
    let step: f64 = 0.05;
    let log_cut = 18.0 * std::f64::consts::LN_10;
    let mut sum = 0.5 * (-tau).exp();
    let mut theta: f64 = step;
    loop {
        let expo = -tau * theta.cosh();
        let val = expo.exp() * (nu * theta).cosh();
        sum += val;
        if -expo - tau + -(nu * theta) > log_cut {
            break;
        }
        theta += step;
    }
    sum * step
}

/// The normalized extension profile θ_s(τ) = (2^{1−s}/Γ(s)) τ^s K_s(τ),
/// with θ_s(0) = 1 and exponential decay at infinity.
pub fn extension_profile(s: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return 1.0;
    }
    if tau > 700.0 {
        return 0.0;
    }
    let k = if tau <= BESSEL_SWITCH {
        bessel_k_series(s, tau)
    } else {
        bessel_k_integral(s, tau)
    };
    2f64.powf(1.0 - s) / gamma(s) * tau.powf(s) * k
}

/// C_s = 4^s Γ(1+s) / (2s Γ(1−s)).
pub fn extension_constant(s: f64) -> f64 {
    4f64.powf(s) * gamma(1.0 + s) / (2.0 * s * gamma(1.0 - s))
}

/// Cutoff `φ_r(ρ)`: 1 for `ρ ≤ r/2`, 0 for `ρ ≥ r`, quintic smoothstep between.
pub fn smooth_cutoff(r: f64, rho: f64) -> f64 {
    let x = ((rho - 0.5 * r) / (0.5 * r)).clamp(0.0, 1.0);
    1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

/// `dφ_r/dρ`.
pub fn smooth_cutoff_derivative(r: f64, rho: f64) -> f64 {
    let x = (rho - 0.5 * r) / (0.5 * r);
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    -30.0 * x * x * (1.0 - x) * (1.0 - x) / (0.5 * r)
}
