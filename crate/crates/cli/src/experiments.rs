//! The named experiments. Each returns a report; numerical errors propagate.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use frachs::extension::{default_t_nodes, extend, extend_order, extension_energy, graded_t_nodes};
use frachs::geometry::{correction_integrals, curvature_functionals, trial_quotient_sweep, BoundaryProfile, ProfileKind};
use frachs::halfspace::{
    bound_margin, decay_certificate, gauged_profile, green_kernel, halfspace_minimizer, kelvin,
    kelvin_mapping_check, ls_residual, poisson_constant, riesz_potential_constant, KernelKind, KernelPoint,
    ReducedMinimizer,
};
use frachs::special::extension_constant;
use frachs::spectral::{random_bumps, riesz_form, spectral_form, SpectralDecomposition};
use frachs::variational::{nonattainment_diagnostic, pohozaev_terms, ElOptions};
use frachs::{bessel_k, gamma, make_grid, make_params, Domain, FracParams, Grid, GridFunction};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;
use crate::report::{Check, Report, Table};

type Outcome = Result<Report, CliError>;

pub fn run(cfg: &ExperimentConfig, seed: u64) -> Outcome {
    let kind = cfg.kind()?;
    let (checks, tables) = match kind {
        Experiment::FormInequality => form_inequality(cfg, seed)?,
        Experiment::NormIdentity => norm_identity(cfg)?,
        Experiment::GreenKernels => green_kernels(cfg, seed)?,
        Experiment::Kelvin => kelvin_experiment(cfg, seed)?,
        Experiment::HalfspaceMinimizer => halfspace(cfg)?,
        Experiment::Nonattainment => nonattainment(cfg)?,
        Experiment::Pohozaev => pohozaev(cfg)?,
        Experiment::Curvature => curvature(cfg)?,
        Experiment::TrialSweep => trial_sweep(cfg)?,
    };
    Ok(Report::new(kind.name(), seed, checks, tables))
}

type Parts = Result<(Vec<Check>, Vec<Table>), CliError>;

fn params(cfg: &ExperimentConfig, n: usize, s: f64, sigma: f64) -> Result<FracParams, CliError> {
    let p = cfg.params.unwrap_or(crate::config::ParamsConfig { n, s, sigma });
    if p.n == 1 {
        Ok(FracParams::on_line(p.s, p.sigma)?)
    } else {
        Ok(make_params(p.n, p.s, p.sigma)?)
    }
}

fn interval(domain: [f64; 2], n: usize) -> Result<Arc<Grid>, CliError> {
    Ok(Arc::new(make_grid(&Domain::Interval { lo: domain[0], hi: domain[1] }, &[n])?))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn form_inequality(cfg: &ExperimentConfig, seed: u64) -> Parts {
    let g = &cfg.grid;
    let grid = interval(g.domain.unwrap_or([0.0, PI]), g.resolution.unwrap_or(255))?;
    let dec = SpectralDecomposition::full(grid.clone())?;
    let bumps = random_bumps(&grid, g.samples.unwrap_or(50), seed)?;
    let torus = g.torus_factor.unwrap_or(4);
    let slack = cfg.tolerances.absolute.unwrap_or(1e-9);
    let mut table = Table::new("gaps", &["order", "sample", "l2_norm", "spectral", "riesz", "gap"]);
    let mut min_gap = f64::INFINITY;
    let mut strict = true;
    for s in g.orders.clone().unwrap_or(vec![0.3, 0.5, 0.7]) {
        for (k, u) in bumps.iter().enumerate() {
            let a = spectral_form(&dec, u, s)?;
            let b = riesz_form(u, s, torus)?;
            min_gap = min_gap.min(a - b);
            if u.norm_l2() >= 1e-3 && !(a > b) {
                strict = false;
            }
            table.push(vec![s, k as f64, u.norm_l2(), a, b, a - b]);
        }
    }
    Ok((
        vec![
            Check::at_least("min_gap", min_gap, -slack),
            Check::holds("strict_gap_for_nonsmall_norm", strict),
        ],
        vec![table],
    ))
}

fn norm_identity(cfg: &ExperimentConfig) -> Parts {
    let g = &cfg.grid;
    let grid = interval(g.domain.unwrap_or([0.0, PI]), g.resolution.unwrap_or(200))?;
    let dec = SpectralDecomposition::full(grid)?;
    let mut c = vec![0.0; dec.count()];
    for (k, v) in [1.0, -0.6, 0.4, 0.25, -0.15].into_iter().enumerate().take(dec.count()) {
        c[k] = v;
    }
    let u = dec.synthesize(&c)?;
    let tol = cfg.tolerances.relative.unwrap_or(0.01);
    let mut table = Table::new("identity", &["order", "extension_energy", "spectral_form", "relative_error"]);
    let mut worst: f64 = 0.0;
    for s in g.orders.clone().unwrap_or(vec![0.3, 0.5, 0.7]) {
        let w = extend_order(&dec, &u, s, &default_t_nodes(&dec, s)?)?;
        let lhs = extension_constant(s) * extension_energy(&w)?;
        let rhs = spectral_form(&dec, &u, s)?;
        worst = worst.max(rel(lhs, rhs));
        table.push(vec![s, lhs, rhs, rel(lhs, rhs)]);
    }
    // Bessel kernel against the closed form of order one half
    let mut bessel = Table::new("bessel", &["tau", "value", "closed_form", "relative_error"]);
    let mut bessel_err: f64 = 0.0;
    for k in 0..200 {
        let tau = 0.01 * 2000f64.powf(k as f64 / 199.0);
        let v = bessel_k(0.5, tau)?;
        let exact = (PI / (2.0 * tau)).sqrt() * (-tau).exp();
        bessel_err = bessel_err.max((v - exact).abs() / exact);
        bessel.push(vec![tau, v, exact, (v - exact).abs() / exact]);
    }
    let small = bessel_k(0.5, 1e-3)? / (gamma(0.5) * 2f64.powf(-0.5) * 1e-3f64.powf(-0.5));
    let large = bessel_k(0.5, 25.0)? / ((PI / 50.0).sqrt() * (-25.0f64).exp());
    Ok((
        vec![
            Check::at_most("max_relative_mismatch", worst, tol),
            Check::at_most("bessel_closed_form_error", bessel_err, 1e-8),
            Check::at_most("bessel_small_tau_ratio_deviation", (small - 1.0).abs(), 0.01),
            Check::at_most("bessel_large_tau_ratio_deviation", (large - 1.0).abs(), 0.01),
        ],
        vec![table, bessel],
    ))
}

fn sample_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|i| scale * if i + 1 == n { rng.gen_range(0.0..1.0) } else { rng.gen_range(-1.0..1.0) })
        .collect()
}

fn green_kernels(cfg: &ExperimentConfig, seed: u64) -> Parts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = params(cfg, 2, 0.5, 0.25)?;
    let (n, s) = (p.n, p.s);
    let samples = cfg.grid.samples.unwrap_or(1000);
    let c = riesz_potential_constant(n, s);
    let mut sym: f64 = 0.0;
    for _ in 0..samples {
        let pt = KernelPoint::new(sample_point(&mut rng, n, 3.0), 0.0, sample_point(&mut rng, n, 3.0))?;
        let a = green_kernel(KernelKind::Trace, &pt, &p, c)?;
        let b = green_kernel(KernelKind::Trace, &pt.swapped(), &p, c)?;
        sym = sym.max((a - b).abs() / a.abs().max(1e-300));
    }
    let mut xi = vec![0.0; n];
    xi[n - 1] = 1.0;
    let g = |x: &[f64]| {
        let pt = KernelPoint { y: x[..n].to_vec(), z: x[n], xi: xi.clone() };
        green_kernel(KernelKind::SourceData, &pt, &p, c).unwrap_or(f64::NAN)
    };
    let mut at = vec![0.4; n + 1];
    at[n - 1] = 1.6;
    at[n] = 0.7;
    let mut residuals = Table::new("ls_residual", &["h", "residual"]);
    let steps = [0.08, 0.04, 0.02, 0.01];
    let res: Vec<f64> = steps.iter().map(|&h| ls_residual(&g, &at, h, s).abs()).collect();
    for (h, r) in steps.iter().zip(&res) {
        residuals.push(vec![*h, *r]);
    }
    let order = (res[res.len() - 2] / res[res.len() - 1]).log2();
    let mut margins = Table::new("margins", &["kernel", "b", "max_ratio"]);
    let mut worst: f64 = 0.0;
    for (k, (kind, norm, a)) in [
        (KernelKind::SourceData, c, (n as f64 - 2.0 * s) / 2.0),
        (KernelKind::BoundaryData, poisson_constant(n, s), (n as f64 + 2.0 * s) / 2.0),
    ]
    .into_iter()
    .enumerate()
    {
        for b in [0.0, 0.5, 1.0] {
            let bound = norm * (4.0 * a).powf(b);
            let mut m: f64 = 0.0;
            for _ in 0..samples {
                let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
                let pt = KernelPoint::new(
                    sample_point(&mut rng, n, scale),
                    scale * rng.gen_range(0.01..1.0),
                    sample_point(&mut rng, n, scale),
                )?;
                let (lhs, shape) = bound_margin(kind, &pt, b, &p)?;
                let r = lhs / (bound * shape);
                m = if r.is_finite() { m.max(r) } else { f64::INFINITY };
            }
            worst = worst.max(m);
            margins.push(vec![k as f64, b, m]);
        }
    }
    Ok((
        vec![
            Check::at_most("trace_symmetry", sym, 1e-12),
            Check::at_least("ls_residual_order", order, cfg.tolerances.order.unwrap_or(1.8)),
            Check::at_most("bound_margin_ratio", worst, 1.0 + 1e-10),
        ],
        vec![residuals, margins],
    ))
}

fn kelvin_experiment(cfg: &ExperimentConfig, seed: u64) -> Parts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = params(cfg, 2, 0.4, 0.2)?;
    let n = p.n;
    let w = |x: &[f64]| {
        let r2: f64 = x[..n].iter().map(|v| v * v).sum();
        (-(r2) - x[n]).exp() * (1.0 + x[0])
    };
    let once = kelvin(w, &p);
    let twice = kelvin(|x: &[f64]| once.value(x), &p);
    let mut inv: f64 = 0.0;
    for _ in 0..cfg.grid.samples.unwrap_or(1000) {
        let mut x = sample_point(&mut rng, n, 2.0);
        x.push(rng.gen_range(0.05..2.0));
        let a = w(&x);
        inv = inv.max((twice.eval(&x)? - a).abs() / a.abs().max(1e-300));
    }
    let c = riesz_potential_constant(n, p.s);
    let mut xi = vec![0.2; n];
    xi[n - 1] = 0.5;
    let kernel = |x: &[f64]| {
        let pt = KernelPoint { y: x[..n].to_vec(), z: x[n], xi: xi.clone() };
        green_kernel(KernelKind::SourceData, &pt, &p, c).unwrap_or(f64::NAN)
    };
    let two_s = 2.0 * p.s;
    let zpow = |x: &[f64]| x[n].powf(two_s) * (1.0 + x[n - 1]);
    let linear = |x: &[f64]| 1.0 + 2.0 * x[0] - x[n - 1];
    let profiles: [&dyn Fn(&[f64]) -> f64; 3] = [&kernel, &zpow, &linear];
    let mut table = Table::new("mapping", &["profile", "point", "lhs", "rhs", "residual", "fd_error"]);
    let mut worst: f64 = 0.0;
    for (k, f) in profiles.into_iter().enumerate() {
        for j in 0..3 {
            let mut x = sample_point(&mut rng, n, 1.0);
            x[n - 1] += 0.5;
            x.push(rng.gen_range(0.5..1.2));
            let chk = kelvin_mapping_check(f, &x, 0.05, &p)?;
            let slack = 1e-9 * (chk.lhs.abs() + chk.rhs.abs() + 1.0);
            worst = worst.max(chk.residual / (chk.fd_error + slack));
            table.push(vec![k as f64, j as f64, chk.lhs, chk.rhs, chk.residual, chk.fd_error]);
        }
    }
    Ok((
        vec![
            Check::at_most("involution_error", inv, 1e-12),
            Check::at_most("mapping_residual_over_fd_error", worst, 1.0),
        ],
        vec![table],
    ))
}

fn halfspace(cfg: &ExperimentConfig) -> Parts {
    let p = params(cfg, 2, 0.5, 0.25)?;
    let g = &cfg.grid;
    let (radius, res) = (g.radius.unwrap_or(20.0), g.resolution.unwrap_or(64));
    let tol = cfg.tolerances.solver.unwrap_or(1e-8);
    let m = halfspace_minimizer(&p, radius, res, tol)?;
    let big = halfspace_minimizer(&p, 2.0 * radius, 2 * res, tol)?;
    let a = decay_certificate(&m)?;
    let b = decay_certificate(&big)?;
    let mut history = Table::new("history", &["iteration", "quotient"]);
    for (k, q) in m.history.iter().enumerate() {
        history.push(vec![k as f64, *q]);
    }
    let mut certs = Table::new("certificates", &["radius", "resolution", "phi_constant", "v_constant", "quotient"]);
    certs.push(vec![radius, res as f64, a.phi_constant, a.v_constant, m.quotient]);
    certs.push(vec![2.0 * radius, 2.0 * res as f64, b.phi_constant, b.v_constant, big.quotient]);
    let stab = cfg.tolerances.relative.unwrap_or(0.15);
    Ok((
        vec![
            Check::holds("history_nonincreasing", m.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))),
            Check::holds("iterate_positive", m.values.values.iter().all(|v| *v > 0.0)),
            Check::holds("certificates_finite", a.phi_constant.is_finite() && a.v_constant.is_finite()),
            Check::at_most("phi_constant_change", rel(a.phi_constant, b.phi_constant), stab),
            Check::at_most("v_constant_change", rel(a.v_constant, b.v_constant), stab),
        ],
        vec![history, certs],
    ))
}

fn nonattainment(cfg: &ExperimentConfig) -> Parts {
    let p = params(cfg, 1, 0.4, 0.2)?;
    let g = &cfg.grid;
    let [lo, hi] = g.domain.unwrap_or([-1.0, 1.0]);
    let r = nonattainment_diagnostic(
        &Domain::Interval { lo, hi },
        &p,
        g.levels.unwrap_or(3),
        g.resolution.unwrap_or(64),
        ElOptions::new(cfg.tolerances.solver.unwrap_or(1e-8)),
    )?;
    let mut table = Table::new(
        "levels",
        &["resolution", "h", "quotient", "riesz_quotient", "median_mass_radius", "el_residual"],
    );
    for l in &r.levels {
        table.push(vec![l.resolution as f64, l.h, l.quotient, l.riesz_quotient, l.median_mass_radius, l.el_residual]);
    }
    Ok((
        vec![
            Check::holds("median_strictly_decreasing", r.median_strictly_decreasing()),
            Check::holds("quotient_nonincreasing", r.quotient_nonincreasing()),
        ],
        vec![table],
    ))
}

fn pohozaev(cfg: &ExperimentConfig) -> Parts {
    let p = params(cfg, 1, 0.4, 0.2)?;
    let g = &cfg.grid;
    let [lo, hi] = g.domain.unwrap_or([-1.0, 1.0]);
    let base = g.resolution.unwrap_or(64);
    let eps0 = g.eps.as_ref().and_then(|e| e.first().copied()).unwrap_or(0.4);
    let mut table = Table::new(
        "ledger",
        &["resolution", "eps", "b1", "b2", "b3", "b4", "b5", "boundary_term", "imbalance", "scale"],
    );
    let mut imb = Vec::new();
    let mut boundary_ok = true;
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    for l in 0..g.levels.unwrap_or(4) {
        let n = base << l;
        let grid = interval([lo, hi], n)?;
        let dec = SpectralDecomposition::full(grid.clone())?;
        let u = GridFunction::from_fn(grid.clone(), |x, _| {
            let y = (x - mid) / half;
            (PI * y / 2.0).cos() + 0.3 * (1.5 * PI * y).cos() + 0.2 * (PI * y).sin()
        })?;
        let h = grid.axes[0].h;
        let t = graded_t_nodes(dec.lambdas[0], *dec.lambdas.last().unwrap(), p.s, 1.0 + h)?;
        let w = extend(&dec, &u, &p, &t)?;
        let led = pohozaev_terms(&dec, &u, &w, &p, eps0 / 2f64.powi(l as i32))?;
        boundary_ok &= led.boundary_term >= 0.0;
        imb.push(led.imbalance);
        let b = led.b_terms;
        table.push(vec![n as f64, led.eps, b[0], b[1], b[2], b[3], b[4], led.boundary_term, led.imbalance, led.scale]);
    }
    let order = if imb.len() >= 2 { (imb[imb.len() - 2] / imb[imb.len() - 1]).log2() } else { f64::NAN };
    Ok((
        vec![
            Check::at_least("imbalance_order", order, cfg.tolerances.order.unwrap_or(1.0)),
            Check::holds("boundary_term_nonnegative", boundary_ok),
        ],
        vec![table],
    ))
}

fn profile(cfg: &ExperimentConfig, n: usize, default: ProfileKind, r0: f64) -> Result<BoundaryProfile, CliError> {
    Ok(BoundaryProfile::from_kind(n, cfg.grid.profile.unwrap_or(default), r0)?)
}

fn curvature(cfg: &ExperimentConfig) -> Parts {
    let p = params(cfg, 2, 0.5, 0.25)?;
    let kind = cfg.grid.profile.unwrap_or(ProfileKind::PowerLaw { alpha: 2.0, coeff: 1.0 });
    let r0 = cfg.grid.radius.unwrap_or(if matches!(kind, ProfileKind::PowerLog { .. }) { 0.9 } else { 1.0 });
    let bp = profile(cfg, p.n, kind, r0)?;
    let samples = cfg.grid.samples.unwrap_or(12);
    let taus: Vec<f64> = (0..samples).map(|k| 0.5 * r0 * 0.6f64.powi(k as i32)).collect();
    let r = curvature_functionals(&bp, &taus, &p)?;
    let mut table = Table::new("averages", &["tau", "f", "f1", "f2", "f3"]);
    for k in 0..taus.len() {
        table.push(vec![taus[k], r.f[k], r.f1[k], r.f2[k], r.f3[k]]);
    }
    let mut checks = vec![
        Check::holds("cauchy_schwarz", r.cauchy_schwarz_holds()),
        Check::holds("concave", r.concave),
        Check::holds("rv_ok", r.rv_ok),
        Check::holds("cond_ok", r.cond_ok),
        Check::holds("f1_ok", r.f1_ok),
    ];
    if let ProfileKind::PowerLaw { alpha, .. } = kind {
        checks.push(Check::at_most("alpha_hat_error", (r.alpha_hat - alpha).abs(), 0.05));
    }
    if let ProfileKind::PowerLog { alpha, .. } = kind {
        checks.push(Check::at_most("alpha_hat_error", (r.alpha_hat - alpha).abs(), 0.15));
    }
    // the convex control must fail the concavity gate
    let control = curvature_functionals(&BoundaryProfile::convex(p.n, 1.0, r0)?, &taus, &p)?;
    checks.push(Check::holds("convex_control_rejected", !control.concave));
    Ok((checks, vec![table]))
}

fn gauged(p: &FracParams, radius: f64, res: usize, target: f64, tol: f64) -> Result<ReducedMinimizer, CliError> {
    let m = halfspace_minimizer(p, radius, res, tol)?;
    Ok(gauged_profile(&m, target, 1e-9, 2000)?.minimizer)
}

fn trial_sweep(cfg: &ExperimentConfig) -> Parts {
    let p = params(cfg, 2, 0.5, 0.25)?;
    let g = &cfg.grid;
    let radius = g.radius.unwrap_or(5.0);
    let res = g.resolution.unwrap_or(64);
    let target = g.gauge_radius.unwrap_or(0.25);
    let delta = g.delta.unwrap_or(1.0);
    let eps = g.eps.clone().unwrap_or(vec![0.2, 0.1, 0.05]);
    let alpha = g.alpha.unwrap_or(2.0);
    let tol = cfg.tolerances.solver.unwrap_or(1e-8);
    let stab = cfg.tolerances.relative.unwrap_or(0.1);
    let kind = g.profile.unwrap_or(ProfileKind::PowerLaw { alpha: 2.0, coeff: 1.0 });
    let bp = profile(cfg, p.n, kind, 2.0 * delta)?;
    let flat = BoundaryProfile::flat(p.n, 2.0 * delta)?;
    let mut checks = Vec::new();
    let mut sweep = Table::new("sweep", &["resolution", "profile", "eps", "quotient", "abscissa", "numerator", "denominator"]);
    let mut fits = Table::new("fits", &["resolution", "profile", "slope", "slope_stderr", "intercept"]);
    let mut corr = Table::new("corrections", &["resolution", "c1", "c1_error", "c2", "c2_error", "tail_slope"]);
    let mut c_prev: Option<(f64, f64)> = None;
    for level in [res, 2 * res] {
        let m = gauged(&p, radius, level, target, tol)?;
        let ci = correction_integrals(&m, &p, alpha)?;
        corr.push(vec![level as f64, ci.c1, ci.c1_error, ci.c2, ci.c2_error, ci.tail_slope]);
        checks.push(Check::above(&format!("c1_positive_{level}"), ci.c1, 0.0));
        checks.push(Check::above(&format!("c2_positive_{level}"), ci.c2, 0.0));
        checks.push(Check::below(&format!("tail_slope_{level}"), ci.tail_slope, -1.0));
        if let Some((c1, c2)) = c_prev {
            checks.push(Check::at_most("c1_refinement_change", rel(c1, ci.c1), stab));
            checks.push(Check::at_most("c2_refinement_change", rel(c2, ci.c2), stab));
        }
        c_prev = Some((ci.c1, ci.c2));
        let a = trial_quotient_sweep(&m, &bp, &p, &eps, delta)?;
        let b = trial_quotient_sweep(&m, &flat, &p, &eps, delta)?;
        for (k, rep) in [&a, &b].into_iter().enumerate() {
            for t in &rep.points {
                sweep.push(vec![level as f64, k as f64, t.eps, t.quotient, t.abscissa, t.numerator, t.denominator]);
            }
            fits.push(vec![level as f64, k as f64, rep.slope, rep.slope_stderr, rep.intercept]);
        }
        checks.push(Check::below(&format!("profile_slope_{level}"), a.slope, 0.0));
        checks.push(Check::at_most(&format!("flat_slope_ratio_{level}"), b.slope.abs() / a.slope.abs(), 0.1));
    }
    Ok((checks, vec![sweep, fits, corr]))
}
