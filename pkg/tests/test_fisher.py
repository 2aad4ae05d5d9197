import math

import numpy as np
import pytest

from gwemission import (
    AtomModel,
    DomainError,
    GwBackground,
    ModePoint,
    atoms_required,
    atoms_required_Q,
    cfi_density_bound,
    cfi_total_min,
    estimation_uncertainty,
    fisher_curve,
    optimal_times,
    qfi_total,
)
from gwemission.emission import f_profile, g_pattern, n_flat
from gwemission.fisher import exact, feasibility, figure2_unit


ATOM = AtomModel.from_linewidth(1e3, 1e-3)
GW = GwBackground(0.0, 1.0)


def test_figure2_reference_values():
    c = fisher_curve([math.pi / 2, 2 * math.pi], ATOM, GW)
    assert c.i_min[0] == pytest.approx(0.28539816339744830962, rel=1e-14)
    assert c.i_max[0] == pytest.approx(1.5707963267948966192, rel=1e-14)
    assert c.i_min[1] == pytest.approx(2 * math.pi, rel=1e-14)
    assert c.i_max[1] == pytest.approx(2 * math.pi, rel=1e-14)


def test_absolute_units_scale():
    t = 1.7
    c = fisher_curve([t], ATOM, GW, units="absolute", n_atoms=3)
    assert c.i_max[0] == pytest.approx(qfi_total(t, ATOM, GW, 3))
    assert c.i_min[0] == pytest.approx(3 * cfi_total_min(t, ATOM, GW))
    assert figure2_unit(ATOM, GW) == pytest.approx(1e-3 * 1e6 / 3)


def test_fisher_curve_rejects_bad_input():
    with pytest.raises(DomainError):
        fisher_curve([-1.0], ATOM, GW)
    with pytest.raises(DomainError):
        fisher_curve([1.0], ATOM, GW, units="bogus")


def test_cfi_density_equals_shot_noise_form():
    gw = GwBackground(1e-6)
    m = ModePoint(1001.3, 0.6, 0.2, 1e3)
    t = 2.2
    d_dn = (m.k / gw.omega) * f_profile(m.detuning, t, 1.0) * g_pattern(m.theta, m.phi) \
        * ATOM.epsilon**2 * t * t / ((2 * math.pi) ** 3 * 8 * m.k)
    assert cfi_density_bound(m, t, ATOM, gw) == pytest.approx(d_dn**2 / n_flat(m, t, ATOM), rel=1e-10)


def test_cfi_density_regular_at_carrier_zero():
    t = 2.0
    m = ModePoint.from_detuning(2 * math.pi / t, 0.0, 0.0, 1e3)
    v = cfi_density_bound(m, t, ATOM, GW)
    assert math.isfinite(v) and v > 0


def test_cfi_density_bound_domain():
    with pytest.raises(DomainError):
        cfi_density_bound(ModePoint(0.0, 0.0, 0.0, 1e3), 1.0, ATOM, GW)
    with pytest.raises(DomainError):
        cfi_density_bound(ModePoint(1e3, 0.0, 0.0, 1e3), -1.0, ATOM, GW)


def test_optimal_times():
    assert optimal_times(2.0, 3) == pytest.approx([math.pi, 2 * math.pi, 3 * math.pi])
    with pytest.raises(DomainError):
        optimal_times(1.0, 0)


def test_estimation_uncertainty():
    assert estimation_uncertainty(100, 4.0) == pytest.approx(0.05)
    with pytest.raises(DomainError):
        estimation_uncertainty(0, 1.0)
    with pytest.raises(DomainError):
        estimation_uncertainty(10, 0.0)


def test_feasibility_exact_numbers():
    assert atoms_required(1e-21, 1e14, 10) == 10**16
    assert atoms_required_Q(1e-21, 1e17) == 10**8
    assert exact(0.1) * 10 == 1


def test_feasibility_rounds_up():
    # 1/(A omega0/omega)^2 = 1/(3e-6)^2 is not an integer
    assert atoms_required(1e-7, 30.0, 1.0) == math.ceil(1 / 9e-12)


def test_feasibility_report():
    rep = feasibility(1e-21, 1e14, 10.0, 1e7, Q=1e17)
    d = rep.as_dict()
    assert d["N_min_freq"] == 10**16 and d["N_min_Q"] == 10**8
    assert d["optimal_times"] == pytest.approx([2 * math.pi / 10 * m for m in (1, 2, 3)])
    assert d["atomic_lifetime"] == pytest.approx(1e-7)
    assert d["lifetime_ratio_omega_over_gamma0"] == pytest.approx(1e-6)


def test_feasibility_angular_factor():
    rep = feasibility(1e-21, 1e14, 10.0, 1e7, angular_factor=2 * math.pi)
    assert rep.optimal_times[0] == pytest.approx(1 / 10.0)


def test_feasibility_rejects_zero_amplitude():
    with pytest.raises(DomainError):
        atoms_required(0.0, 1e14, 10)
