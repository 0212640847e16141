use frachs_py::frachs_module;
use pyo3::prelude::*;

fn run(code: &std::ffi::CStr) -> PyResult<()> {
    pyo3::append_to_inittab!(frachs_module);
    Python::initialize();
    Python::attach(|py| py.run(code, None, None))
}

#[test]
fn module_round_trip() {
    run(c"
import math, frachs
p = frachs.FracParams(3, 0.6, 0.3)
assert math.isclose(p.two_star_sigma, 6 / 2.4)
assert math.isclose(p.weight_exponent(), (0.3 - 0.6) * 6 / 2.4)
try:
    frachs.FracParams(1, 0.7, 0.2)
    raise AssertionError('s >= 1/2 accepted on the line')
except ValueError:
    pass
sp = frachs.IntervalSpectrum(0.0, math.pi, 100)
lam = sp.eigenvalues()
assert len(lam) == 100 and all(a < b for a, b in zip(lam, lam[1:]))
u = [math.sin(t) for t in sp.nodes()]
assert abs(sp.spectral_form(u, 0.5) - sum(v * v for v in u) * (math.pi / 101) * math.sqrt(lam[0])) < 1e-8
h = frachs.halfspace(frachs.FracParams(2, 0.5, 0.25), radius=10.0, resolution=24)
assert all(b <= a * (1 + 1e-12) for a, b in zip(h['history'], h['history'][1:]))
assert min(h['values']) > 0
")
    .unwrap();
}
