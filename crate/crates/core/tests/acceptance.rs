//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use frachs::extension::{default_t_nodes, extend, extend_order, extension_energy, graded_t_nodes};
use frachs::special::extension_constant;
use frachs::geometry::{correction_integrals, curvature_functionals, trial_quotient_sweep, BoundaryProfile};
use frachs::halfspace::{
    decay_certificate, gauged_profile, green_kernel, halfspace_minimizer, kelvin, kelvin_mapping_check,
    ls_residual, poisson_constant, riesz_potential_constant, KernelKind, KernelPoint, ReducedMinimizer,
};
use frachs::spectral::{random_bumps, riesz_form, spectral_form, SpectralDecomposition};
use frachs::variational::{nonattainment_diagnostic, pohozaev_terms, ElOptions};
use frachs::{bessel_k, gamma, make_grid, make_params, Domain, FracParams, GridFunction, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn interval(lo: f64, hi: f64, n: usize) -> Arc<frachs::Grid> {
    Arc::new(make_grid(&Domain::Interval { lo, hi }, &[n]).unwrap())
}

fn norm_identity() -> Result<Outcome> {
    let start = Instant::now();
    let grid = interval(0.0, PI, 200);
    let dec = SpectralDecomposition::full(grid.clone())?;
    let coeffs = [1.0, -0.6, 0.4, 0.25, -0.15];
    let mut c = vec![0.0; dec.count()];
    c[..5].copy_from_slice(&coeffs);
    let u = dec.synthesize(&c)?;
    let mut worst: f64 = 0.0;
    for s in [0.3, 0.5, 0.7] {
        let w = extend_order(&dec, &u, s, &default_t_nodes(&dec, s)?)?;
        let lhs = extension_constant(s) * extension_energy(&w)?;
        let rhs = spectral_form(&dec, &u, s)?;
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    let t = start.elapsed();
    outcome(
        worst <= 0.01 && t < Duration::from_secs(10),
        format!("max relative mismatch {worst:.2e} in {t:.2?}"),
    )
}

fn form_inequality() -> Result<Outcome> {
    let start = Instant::now();
    let grid = interval(0.0, PI, 255);
    let dec = SpectralDecomposition::full(grid.clone())?;
    let bumps = random_bumps(&grid, 50, 20240601)?;
    let mut min_gap = f64::INFINITY;
    let mut failures = 0;
    for s in [0.3, 0.5, 0.7] {
        for u in &bumps {
            let gap = spectral_form(&dec, u, s)? - riesz_form(u, s, 4)?;
            min_gap = min_gap.min(gap);
            if gap < -1e-9 || (u.norm_l2() >= 1e-3 && !(gap > 0.0)) {
                failures += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        failures == 0 && t < Duration::from_secs(30),
        format!("150 comparisons, {failures} violations, min gap {min_gap:.3e}, {t:.2?}"),
    )
}

fn bessel_kernel() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let tau = 0.01 * 2000f64.powf(k as f64 / 199.0);
        let exact = (PI / (2.0 * tau)).sqrt() * (-tau).exp();
        worst = worst.max((bessel_k(0.5, tau)? - exact).abs() / exact);
    }
    let nu = 0.5;
    let small = bessel_k(nu, 1e-3)? / (gamma(nu) * 2f64.powf(nu - 1.0) * 1e-3f64.powf(-nu));
    let large = bessel_k(nu, 25.0)? / ((PI / 50.0).sqrt() * (-25.0f64).exp());
    outcome(
        worst <= 1e-8 && (small - 1.0).abs() <= 0.01 && (large - 1.0).abs() <= 0.01,
        format!("closed-form error {worst:.1e}, small-τ ratio {small:.5}, large-τ ratio {large:.5}"),
    )
}

fn green_kernels() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sym: f64 = 0.0;
    let mut orders = Vec::new();
    let mut margin_ok = true;
    let mut worst_margin: f64 = 0.0;
    for (n, s) in [(2usize, 0.5), (3, 0.3), (2, 0.8)] {
        let p = make_params(n, s, 0.5 * s)?;
        let c = riesz_potential_constant(n, s);
        for _ in 0..200 {
            let y: Vec<f64> = (0..n).map(|i| if i + 1 == n { rng.gen_range(0.0..3.0) } else { rng.gen_range(-3.0..3.0) }).collect();
            let xi: Vec<f64> = (0..n).map(|i| if i + 1 == n { rng.gen_range(0.0..3.0) } else { rng.gen_range(-3.0..3.0) }).collect();
            let pt = KernelPoint::new(y, 0.0, xi)?;
            let a = green_kernel(KernelKind::Trace, &pt, &p, c)?;
            let b = green_kernel(KernelKind::Trace, &pt.swapped(), &p, c)?;
            sym = sym.max((a - b).abs() / a.abs().max(1e-300));
        }
        // L_s residual of the source kernel away from the pole
        let mut xi = vec![0.0; n];
        xi[n - 1] = 1.0;
        let g = |x: &[f64]| {
            let pt = KernelPoint { y: x[..n].to_vec(), z: x[n], xi: xi.clone() };
            green_kernel(KernelKind::SourceData, &pt, &p, c).unwrap()
        };
        let mut at = vec![0.4; n + 1];
        at[n - 1] = 1.6;
        at[n] = 0.7;
        let res: Vec<f64> = [0.08, 0.04, 0.02].iter().map(|&h| ls_residual(&g, &at, h, s).abs()).collect();
        orders.push((res[1] / res[2]).log2());
        // bound margins with the sharp constants C (4a)^𝔟
        for (kind, norm, a) in [
            (KernelKind::SourceData, c, (n as f64 - 2.0 * s) / 2.0),
            (KernelKind::BoundaryData, poisson_constant(n, s), (n as f64 + 2.0 * s) / 2.0),
        ] {
            for b in [0.0, 0.5, 1.0] {
                let bound = norm * (4.0 * a).powf(b);
                for _ in 0..1000 {
                    let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
                    let y: Vec<f64> = (0..n).map(|i| scale * if i + 1 == n { rng.gen_range(0.0..1.0) } else { rng.gen_range(-1.0..1.0) }).collect();
                    let xi: Vec<f64> = (0..n).map(|i| scale * if i + 1 == n { rng.gen_range(0.0..1.0) } else { rng.gen_range(-1.0..1.0) }).collect();
                    let pt = KernelPoint::new(y, scale * rng.gen_range(0.01..1.0), xi)?;
                    let (lhs, shape) = frachs::halfspace::bound_margin(kind, &pt, b, &p)?;
                    let ratio = lhs / (bound * shape);
                    if !ratio.is_finite() || ratio > 1.0 + 1e-10 {
                        margin_ok = false;
                    }
                    worst_margin = worst_margin.max(ratio);
                }
            }
        }
    }
    let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        sym <= 1e-12 && min_order >= 1.8 && margin_ok,
        format!("symmetry {sym:.1e}, L_s residual order {min_order:.2}, worst margin ratio {worst_margin:.3}"),
    )
}

fn kelvin_transform() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = make_params(2, 0.4, 0.2)?;
    let w = |x: &[f64]| (-(x[0] - 0.3).powi(2) - 0.5 * x[1] * x[1] - x[2]).exp() * (1.0 + x[0]);
    let once = kelvin(w, &p);
    let twice = kelvin(|x: &[f64]| once.value(x), &p);
    let mut inv: f64 = 0.0;
    for _ in 0..1000 {
        let x = [rng.gen_range(-2.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(0.05..2.0)];
        let a = w(&x);
        inv = inv.max((twice.eval(&x)? - a).abs() / a.abs().max(1e-300));
    }
    // L_s-harmonic profiles: z^{2s}, the source kernel, and a linear function
    let c = riesz_potential_constant(2, 0.4);
    let kernel = |x: &[f64]| {
        let pt = KernelPoint { y: x[..2].to_vec(), z: x[2], xi: vec![0.2, 0.5] };
        green_kernel(KernelKind::SourceData, &pt, &p, c).unwrap()
    };
    let zpow = |x: &[f64]| x[2].powf(0.8) * (1.0 + x[1]);
    let linear = |x: &[f64]| 1.0 + 2.0 * x[0] - x[1];
    let profiles: [&dyn Fn(&[f64]) -> f64; 3] = [&kernel, &zpow, &linear];
    let points = [[0.6, 0.9, 0.8], [-0.4, 1.3, 0.6], [0.9, 0.7, 1.1]];
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for f in profiles {
        for x in &points {
            let chk = kelvin_mapping_check(f, x, 0.05, &p)?;
            let slack = 1e-9 * (chk.lhs.abs() + chk.rhs.abs() + 1.0);
            if chk.residual > chk.fd_error + slack {
                ok = false;
            }
            worst = worst.max(chk.residual / (chk.fd_error + slack));
        }
    }
    outcome(
        inv <= 1e-12 && ok,
        format!("involution error {inv:.1e}, worst residual / fd error {worst:.3}"),
    )
}

fn halfspace_minimizer_check() -> Result<Outcome> {
    let start = Instant::now();
    let p = make_params(2, 0.5, 0.25)?;
    let m = halfspace_minimizer(&p, 20.0, 64, 1e-8)?;
    let big = halfspace_minimizer(&p, 40.0, 128, 1e-8)?;
    let monotone = m.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let positive = m.values.values.iter().all(|v| *v > 0.0);
    let a = decay_certificate(&m)?;
    let b = decay_certificate(&big)?;
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs());
    let dphi = rel(a.phi_constant, b.phi_constant);
    let dv = rel(a.v_constant, b.v_constant);
    let finite = a.phi_constant.is_finite() && a.v_constant.is_finite();
    let t = start.elapsed();
    outcome(
        monotone && positive && finite && dphi <= 0.15 && dv <= 0.15 && t < Duration::from_secs(300),
        format!(
            "{} iterations, Φ constant {:.4} vs {:.4}, 𝒱 constant {:.4} vs {:.4}, {t:.2?}",
            m.iterations, a.phi_constant, b.phi_constant, a.v_constant, b.v_constant
        ),
    )
}

fn nonattainment() -> Result<Outcome> {
    let start = Instant::now();
    let p = FracParams::on_line(0.4, 0.2)?;
    let r = nonattainment_diagnostic(&Domain::Interval { lo: -1.0, hi: 1.0 }, &p, 3, 64, ElOptions::new(1e-8))?;
    let t = start.elapsed();
    outcome(
        r.median_strictly_decreasing() && r.quotient_nonincreasing() && t < Duration::from_secs(120),
        format!("medians {}, quotients {:.4?}, {t:.2?}", sci(&r.median_per_refinement), r.quotient_per_refinement),
    )
}

fn pohozaev() -> Result<Outcome> {
    let p = FracParams::on_line(0.4, 0.2)?;
    let mut imb = Vec::new();
    let mut boundary_ok = true;
    for (l, n) in [64usize, 128, 256, 512].into_iter().enumerate() {
        let grid = interval(-1.0, 1.0, n);
        let dec = SpectralDecomposition::full(grid.clone())?;
        let u = GridFunction::from_fn(grid.clone(), |x, _| {
            (PI * x / 2.0).cos() + 0.3 * (1.5 * PI * x).cos() + 0.2 * (PI * x).sin()
        })?;
        let h = grid.axes[0].h;
        let t = graded_t_nodes(dec.lambdas[0], *dec.lambdas.last().unwrap(), p.s, 1.0 + h)?;
        let w = extend(&dec, &u, &p, &t)?;
        let led = pohozaev_terms(&dec, &u, &w, &p, 0.4 / 2f64.powi(l as i32))?;
        boundary_ok &= led.boundary_term >= 0.0;
        imb.push(led.imbalance);
    }
    let orders: Vec<f64> = imb.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let last = *orders.last().unwrap();
    outcome(
        last >= 1.0 && orders.iter().all(|o| *o > 0.0) && boundary_ok,
        format!("imbalances {}, observed orders {orders:.2?}", sci(&imb)),
    )
}

fn curvature() -> Result<Outcome> {
    let taus: Vec<f64> = (0..12).map(|k| 0.5 * 0.6f64.powi(k)).collect();
    let mut exact: f64 = 0.0;
    let mut ok = true;
    let mut alphas = Vec::new();
    for n in [2usize, 3] {
        let p = make_params(n, 0.5, 0.25)?;
        let par = BoundaryProfile::power_law(n, 2.0, 1.0, 1.0)?;
        let r = curvature_functionals(&par, &taus, &p)?;
        for (k, t) in taus.iter().enumerate() {
            exact = exact
                .max((r.f[k] + t * t).abs())
                .max((r.f1[k] - t.powi(4)).abs())
                .max((r.f2[k] - 4.0 * t * t).abs())
                .max((r.f3[k] - 2.0 * t).abs());
        }
        ok &= (r.alpha_hat - 2.0).abs() <= 0.05 && r.all_pass() && r.cauchy_schwarz_holds();
        alphas.push(r.alpha_hat);
        let convex = curvature_functionals(&BoundaryProfile::convex(n, 1.0, 1.0)?, &taus, &p)?;
        ok &= !convex.concave && convex.cauchy_schwarz_holds();
        for bp in [
            BoundaryProfile::power_law(n, 1.5, 1.0, 1.0)?,
            BoundaryProfile::power_law(n, 2.5, 0.5, 1.0)?,
            BoundaryProfile::power_log(n, 2.0, 1.0, 0.9)?,
            BoundaryProfile::flat(n, 1.0)?,
        ] {
            ok &= curvature_functionals(&bp, &taus, &p)?.cauchy_schwarz_holds();
        }
    }
    outcome(
        ok && exact <= 1e-10,
        format!("closed-form error {exact:.1e}, α̂ {alphas:.4?}"),
    )
}

fn gauged(p: &FracParams, res: usize) -> Result<ReducedMinimizer> {
    let m = halfspace_minimizer(p, 5.0, res, 1e-8)?;
    Ok(gauged_profile(&m, 0.25, 1e-9, 2000)?.minimizer)
}

fn correction() -> Result<Outcome> {
    let mut ok = true;
    let mut lines = Vec::new();
    for (s, sigma) in [(0.6, 0.3), (0.5, 0.25)] {
        let p = make_params(2, s, sigma)?;
        let a = correction_integrals(&gauged(&p, 64)?, &p, 2.0)?;
        let b = correction_integrals(&gauged(&p, 128)?, &p, 2.0)?;
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
        ok &= a.c1 > 0.0 && a.c2 > 0.0 && b.c1 > 0.0 && b.c2 > 0.0;
        ok &= rel(a.c1, b.c1) <= 0.1 && rel(a.c2, b.c2) <= 0.1;
        ok &= b.tail_slope < -1.0 && a.tail_slope < -1.0;
        lines.push(format!(
            "s={s}: c1 {:.4}→{:.4}, c2 {:.4}→{:.4}, tail slope {:.2}",
            a.c1, b.c1, a.c2, b.c2, b.tail_slope
        ));
    }
    outcome(ok, lines.join("; "))
}

fn trial_sweep() -> Result<Outcome> {
    let p = make_params(2, 0.5, 0.25)?;
    let eps = [0.2, 0.1, 0.05];
    let par = BoundaryProfile::power_law(2, 2.0, 1.0, 2.0)?;
    let flat = BoundaryProfile::flat(2, 2.0)?;
    let mut ok = true;
    let mut lines = Vec::new();
    for res in [64usize, 128] {
        let m = gauged(&p, res)?;
        let a = trial_quotient_sweep(&m, &par, &p, &eps, 1.0)?;
        let b = trial_quotient_sweep(&m, &flat, &p, &eps, 1.0)?;
        ok &= a.slope < 0.0 && b.slope.abs() <= 0.1 * a.slope.abs();
        lines.push(format!(
            "N={res}: paraboloid slope {:.4} ± {:.4}, flat slope {:.4} ± {:.4}",
            a.slope, a.slope_stderr, b.slope, b.slope_stderr
        ));
    }
    outcome(ok, lines.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("norm identity", norm_identity),
        ("form inequality", form_inequality),
        ("bessel kernel", bessel_kernel),
        ("green kernels", green_kernels),
        ("kelvin transform", kelvin_transform),
        ("half-space minimizer", halfspace_minimizer_check),
        ("non-attainment signature", nonattainment),
        ("pohozaev ledger", pohozaev),
        ("curvature functionals", curvature),
        ("correction integrals", correction),
        ("trial sweep", trial_sweep),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.1?}]",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
