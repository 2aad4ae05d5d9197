import math

import numpy as np
import pytest

from gwemission import ConvergenceError, DomainError
from gwemission.quadrature import (
    QuadratureSpec,
    angular_integral,
    carrier_time_integral,
    gauss_panels,
    momentum_integral,
    radial_integral,
    time_integral,
)


def test_spec_validation():
    for kw in (dict(rel_tol=0.0), dict(max_subdivisions=0), dict(scheme="simpson"), dict(order=0)):
        with pytest.raises(DomainError):
            QuadratureSpec(**kw)


def test_gauss_panels_integrate_polynomials_exactly():
    x, w = gauss_panels(-1.0, 3.0, 3, 4)
    assert np.sum(w * x**7) == pytest.approx((3.0**8 - 1.0) / 8, rel=1e-14)


def test_time_integral_oscillatory():
    q = QuadratureSpec()
    val, err = time_integral(lambda tp: np.cos(7.0 * tp)[None, :], 3.0, 7.0, q)
    assert val[0] == pytest.approx(math.sin(21.0) / 7.0, rel=1e-12)
    assert err[0] <= 1e-10


def test_time_integral_zero_length():
    val, err = time_integral(lambda tp: np.ones((2, tp.size)), 0.0, 1.0, QuadratureSpec())
    assert val.shape == (2,) and np.all(val == 0)


def test_time_integral_fixed_scheme_has_no_estimate():
    q = QuadratureSpec(scheme="fixed-panel-gauss")
    val, err = time_integral(lambda tp: tp[None, :] ** 2, 2.0, 1.0, q)
    assert val[0] == pytest.approx(8.0 / 3.0, rel=1e-14)
    assert np.isnan(err[0])


def test_time_integral_budget_exhausted():
    q = QuadratureSpec(rel_tol=1e-15, abs_tol=1e-300, max_subdivisions=1, panels_per_period=1)
    with pytest.raises(ConvergenceError) as info:
        time_integral(lambda tp: np.cos(50.0 * tp)[None, :], 10.0, 1.0, q)
    assert info.value.error_estimate > 0


def test_carrier_time_integral_matches_reference():
    # mpmath value of int_0^2.5 exp(-0.3 i t) sin(t) dt
    q = QuadratureSpec()
    val, _ = carrier_time_integral(np.array([0.3]), 2.5, np.sin, 1.3, q)
    assert val[0] == pytest.approx(1.608577277802594558 - 0.744460618190765817j, rel=1e-12)


def test_carrier_time_integral_agrees_with_generic():
    q = QuadratureSpec()
    delta = np.linspace(-5.0, 5.0, 11)
    fast, _ = carrier_time_integral(delta, 4.0, np.sin, 6.0, q)
    slow, _ = time_integral(lambda tp: np.exp(-1j * delta[:, None] * tp) * np.sin(tp), 4.0, 6.0, q)
    assert np.allclose(fast, slow, rtol=1e-12, atol=1e-14)


def test_angular_integral_of_constant_is_sphere_area():
    q = QuadratureSpec()
    assert angular_integral(lambda th, ph: np.ones(np.broadcast(th, ph).shape), q) == pytest.approx(
        4 * math.pi, rel=1e-14)


def test_radial_integral_caps_at_physical_range():
    q = QuadratureSpec()
    res = radial_integral(lambda k: k * k, 5.0, 10.0, 1.0, q)
    assert res.capped and res.window == 5.0
    assert res.value == pytest.approx(1000.0 / 3.0, rel=1e-13)


def test_radial_integral_converges_before_cap():
    q = QuadratureSpec()
    res = radial_integral(lambda k: np.exp(-((k - 1e3) ** 2)), 1e3, 10.0, 1.0, q)
    assert not res.capped
    assert res.value == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_window_budget_exhausted():
    q = QuadratureSpec(max_subdivisions=1)
    with pytest.raises(ConvergenceError):
        radial_integral(lambda k: 1.0 / (1.0 + (k - 1e6) ** 2), 1e6, 10.0, 1.0, q)


def test_momentum_integral_gaussian_shell():
    q = QuadratureSpec()
    res = momentum_integral(lambda k, th, ph: np.exp(-((k - 100.0) ** 2)) / (k * k) + 0 * th * ph,
                            100.0, 10.0, 1.0, q)
    assert res.value == pytest.approx(4 * math.pi * math.sqrt(math.pi), rel=1e-12)
