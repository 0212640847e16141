"""Smoke test for the frachs extension module.

Build and install with
    maturin develop --release -m crates/python/Cargo.toml
then run `python python/smoke.py`.
"""

import math

import frachs


def main():
    p = frachs.FracParams(2, 0.5, 0.25)
    assert math.isclose(p.two_star_sigma, 2 * 2 / (2 - 0.5))
    assert math.isclose(p.y_frak, 0.5)

    try:
        frachs.FracParams(2, 0.3, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("sigma > s accepted")

    assert math.isclose(frachs.gamma(5.0), 24.0, rel_tol=1e-12)
    tau = 0.7
    closed = math.sqrt(math.pi / (2 * tau)) * math.exp(-tau)
    assert math.isclose(frachs.bessel_k(0.5, tau), closed, rel_tol=1e-10)

    sp = frachs.IntervalSpectrum(0.0, math.pi, 200)
    x = sp.nodes()
    u = [math.sin(t) - 0.5 * math.sin(3 * t) for t in x]
    for s in (0.3, 0.5, 0.7):
        a = sp.spectral_form(u, s)
        b = sp.extension_energy(u, s)
        assert abs(a - b) / a < 1e-2, (s, a, b)

    line = frachs.IntervalSpectrum(0.0, math.pi, 255)
    for v in line.random_bumps(10, 7):
        assert line.spectral_form(v, 0.5) >= line.riesz_form(v, 0.5) - 1e-9

    g = frachs.green_kernel_value("trace", [0.3, 0.9], 0.0, [-0.2, 0.4], p)
    h = frachs.green_kernel_value("trace", [-0.2, 0.4], 0.0, [0.3, 0.9], p)
    assert math.isclose(g, h, rel_tol=1e-12)

    na = frachs.nonattainment(frachs.FracParams(1, 0.4, 0.2), levels=3, base_resolution=32)
    assert na["median_strictly_decreasing"], na

    taus = [0.45 * 0.6**k for k in range(14)]
    cur = frachs.curvature(p, taus, alpha=2.0, r0=1.0)
    assert abs(cur["alpha_hat"] - 2.0) < 0.05 and cur["all_pass"], cur

    print("frachs smoke test passed")


if __name__ == "__main__":
    main()
