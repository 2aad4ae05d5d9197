import math
import warnings

import numpy as np
import pytest

from gwemission import (
    AtomModel,
    DomainError,
    GwBackground,
    ModePoint,
    dn_gw,
    f_profile,
    g_pattern,
    n_flat,
    resolvability,
    sinc,
    spectrum_grid,
)
from gwemission.emission import densities_at_detuning


def test_sinc_values():
    assert sinc(0.0) == 1.0
    assert abs(sinc(math.pi)) < 1e-16
    assert sinc(math.pi / 2) == pytest.approx(2 / math.pi, rel=1e-15)


def test_sinc_series_branch_is_continuous():
    x = np.array([0.99e-4, 1.01e-4])
    assert np.allclose(sinc(x), np.sin(x) / x, rtol=1e-15, atol=0)
    assert sinc(1e-9) == pytest.approx(1.0 - 1e-18 / 6, rel=1e-16)


def test_f_profile_reference_value():
    # mpmath: sinc(pi/4) cos(pi/4) (1 - sinc(pi/2))
    assert f_profile(1.0, math.pi / 2, 1.0) == pytest.approx(0.2313350377982302573, rel=1e-14)


def test_f_profile_vanishes_on_carrier():
    for t in (0.3, 2.0, 17.0):
        assert f_profile(0.0, t, 1.3) == 0.0


def test_f_profile_rejects_negative_time():
    with pytest.raises(DomainError):
        f_profile(0.5, -1.0, 1.0)


def test_g_pattern_values():
    assert g_pattern(0.0, 0.0) == 1.0
    assert abs(g_pattern(math.pi, 0.7)) < 1e-30
    assert abs(g_pattern(math.pi / 2, math.pi / 4)) < 1e-16


def test_n_flat_reference_value():
    atom = AtomModel(1.0, 0.05)
    # mpmath evaluation of eps^2 t^2 sinc^2(delta t/2) / ((2 pi)^3 8 k)
    assert n_flat(ModePoint(1.5, 0.0, 0.0, 1.0), 3.0, atom) == pytest.approx(6.24378148706362342688e-6,
                                                                              rel=1e-14)


def test_n_flat_limits():
    atom = AtomModel(10.0, 0.05)
    m = ModePoint(10.0, 0.0, 0.0, 10.0)
    assert n_flat(m, 0.0, atom) == 0.0
    assert n_flat(m, 2.0, atom) == pytest.approx(0.05**2 * 4 / ((2 * math.pi) ** 3 * 80))
    t = 2.0
    zero = ModePoint(10.0 + 2 * math.pi / t, 0.0, 0.0, 10.0)
    assert n_flat(zero, t, atom) < 1e-35
    with pytest.raises(DomainError):
        n_flat(ModePoint(0.0, 0.0, 0.0, 10.0), 1.0, atom)


def test_dn_gw_reference_value():
    atom = AtomModel(1000.0, 0.01)
    gw = GwBackground(1e-6, 1.0)
    value = dn_gw(ModePoint(1003.0, 0.7, 0.3, 1000.0), 2.0, atom, gw)
    assert value == pytest.approx(6.00572285533635467709e-14, rel=1e-12)


def test_dn_gw_zero_strain_and_antisymmetry():
    atom = AtomModel(100.0, 0.01)
    assert dn_gw(ModePoint(101.0, 0.3, 0.2, 100.0), 2.0, atom, GwBackground(0.0)) == 0.0
    gw = GwBackground(1e-5)
    up = dn_gw(ModePoint(101.7, 0.3, 0.2, 100.0), 2.0, atom, gw)
    down = dn_gw(ModePoint(98.3, 0.3, 0.2, 100.0), 2.0, atom, gw)
    # the k/omega weight is absorbed by the 1/k of the prefactor
    assert up == pytest.approx(-down, rel=1e-12)


def test_densities_at_detuning_match_mode_form():
    atom = AtomModel(50.0, 0.02)
    gw = GwBackground(1e-6)
    delta = np.array([-2.0, 0.5, 3.0])
    flat, dn = densities_at_detuning(delta, 0.4, 0.9, 3.0, atom, gw)
    for d, fv, dv in zip(delta, flat, dn):
        m = ModePoint.from_detuning(d, 0.4, 0.9, 50.0)
        assert fv == pytest.approx(n_flat(m, 3.0, atom), rel=1e-13)
        assert dv == pytest.approx(dn_gw(m, 3.0, atom, gw), rel=1e-12)


def test_densities_at_detuning_keep_precision_at_optical_carrier():
    atom = AtomModel.from_linewidth(1e14, 1e-3)
    flat, _ = densities_at_detuning(np.array([2 * math.pi / 3.0]), 0.0, 0.0, 3.0, atom, GwBackground(0.0))
    # exactly on a sinc zero when delta is used directly
    assert flat[0] < 1e-30 * atom.epsilon**2


def test_spectrum_grid_ordering_and_consistency():
    atom = AtomModel(20.0, 0.01)
    gw = GwBackground(1e-6)
    dirs = [(0.0, 0.0), (math.pi / 2, math.pi / 2)]
    deltas = [-1.0, 0.0, 1.0]
    out = spectrum_grid(deltas, dirs, 2.0, atom, gw)
    assert len(out) == 6
    assert [s.mode.detuning for s in out[:3]] == pytest.approx(deltas)
    m = ModePoint.from_detuning(1.0, math.pi / 2, math.pi / 2, 20.0)
    assert out[5].dn_gw == dn_gw(m, 2.0, atom, gw)
    assert out[5].n_total == out[5].n_flat + out[5].dn_gw


def test_spectrum_grid_quadrupole_sign_flip():
    atom = AtomModel(20.0, 0.01)
    out = spectrum_grid([1.0], [(0.0, 0.0), (0.0, math.pi / 2)], math.pi, atom, GwBackground(1e-6))
    assert out[0].dn_gw == pytest.approx(-out[1].dn_gw, rel=1e-12)


def test_spectrum_grid_errors():
    atom = AtomModel(20.0, 0.01)
    with pytest.raises(DomainError):
        spectrum_grid([], [(0.0, 0.0)], 1.0, atom, GwBackground(0.0))
    with pytest.raises(DomainError, match="direction 0, detuning 1"):
        spectrum_grid([0.0, -30.0], [(0.0, 0.0)], 1.0, atom, GwBackground(0.0))


def test_spectrum_grid_warns_outside_first_order():
    atom = AtomModel(20.0, 0.01)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        gw = GwBackground(0.5)
    out = spectrum_grid([1.0], [(0.0, 0.0)], 2.0, atom, gw)
    assert len(out) == 1


@pytest.mark.parametrize("T,dom,spec_ok,ang_ok", [(100.0, 0.01, True, True), (1.0, 0.01, False, True),
                                                  (100.0, 4 * math.pi, True, False)])
def test_resolvability(T, dom, spec_ok, ang_ok):
    rep = resolvability(1.0, T, dom)
    assert (rep.spectral_ok, rep.angular_ok) == (spec_ok, ang_ok)
    assert rep.delta_k_min == pytest.approx(1.0 / T)


def test_resolvability_rejects_nonpositive():
    with pytest.raises(DomainError):
        resolvability(0.0, 1.0, 0.1)


def test_one_minus_sinc_is_accurate_near_zero():
    import mpmath
    from gwemission.emission import one_minus_sinc

    xs = np.array([1e-8, 1e-4, 3e-3, 0.5, 0.999, 1.0, 2.0, 10.0])
    with mpmath.workdps(40):
        ref = np.array([float(1 - mpmath.sin(mpmath.mpf(v)) / mpmath.mpf(v)) for v in xs])
    assert np.allclose(one_minus_sinc(xs), ref, rtol=4e-16, atol=0)
    assert one_minus_sinc(0.0) == 0.0
