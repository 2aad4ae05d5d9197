"""Fisher information for estimating the GW strain from the emitted field.

Closed forms, with ``nbar = gamma0 t`` the mean photon number per atom:

    I_min(t) = nbar/3 (omega0/omega)^2 cos^2(omega t/2) [1 - sinc(omega t)]
    I_max(t) = nbar/3 (omega0/omega)^2 [1 - cos(omega t) sinc(omega t)]

The two coincide at ``t = 2 m pi / omega``. Independent atoms add
information, so every total takes an ``n_atoms`` multiplier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .emission import ResolvabilityReport, density_prefactor, g_pattern, one_minus_sinc, sideband_bracket
from .errors import DomainError
from .modes import ModePoint
from .params import AtomModel, GwBackground, mean_photons

UNITS = ("absolute", "figure2")


def cfi_density(k, theta, phi, t, omega0, epsilon, omega):
    """Array version of :func:`cfi_density_bound`."""
    k = np.asarray(k, dtype=float)
    ratio = sideband_bracket(k - omega0, t, omega) * g_pattern(theta, phi)
    return density_prefactor(k, t, epsilon) * (k / omega) ** 2 * ratio * ratio


def cfi_density_bound(mode: ModePoint, t: float, atom: AtomModel, gw: GwBackground) -> float:
    """Shot-noise lower bound on the classical Fisher information of mode ``k``.

    ``(d<dn>/dA)^2 / <n>`` with the Poisson variance at zeroth order in A. The
    ratio f/sinc is replaced by its reduced form, so carrier zeros are regular.
    """
    if mode.k <= 0:
        raise DomainError(f"density is singular at k = {mode.k!r}")
    if t < 0:
        raise DomainError("t must be >= 0")
    return float(cfi_density(mode.k, mode.theta, mode.phi, t, atom.omega0, atom.epsilon, gw.omega))


def _scale(t, atom, gw, n_atoms):
    return mean_photons(atom.gamma0, t, n_atoms) / 3.0 * (atom.omega0 / gw.omega) ** 2


def cfi_total_min(t, atom: AtomModel, gw: GwBackground, n_atoms=1):
    """Momentum-integrated CFI lower bound for a frequency- and angle-resolved count."""
    x = gw.omega * t
    return _scale(t, atom, gw, n_atoms) * math.cos(0.5 * x) ** 2 * one_minus_sinc(x)


def qfi_total(t, atom: AtomModel, gw: GwBackground, n_atoms=1):
    """Quantum Fisher information of the joint atom-field state."""
    x = gw.omega * t
    # 1 - cos(x) sinc(x) = 1 - sinc(2x)
    return _scale(t, atom, gw, n_atoms) * one_minus_sinc(2.0 * x)


def figure2_unit(atom: AtomModel, gw: GwBackground):
    """``(1/3)(gamma0/omega)(omega0/omega)^2``, the natural scale of both bounds."""
    return atom.gamma0 / gw.omega * (atom.omega0 / gw.omega) ** 2 / 3.0


@dataclass(frozen=True)
class FisherCurve:
    times: np.ndarray
    i_min: np.ndarray
    i_max: np.ndarray
    units: str = "figure2"

    def __post_init__(self):
        if self.units not in UNITS:
            raise DomainError(f"units must be one of {UNITS}, got {self.units!r}")
        if np.any(self.i_min < 0) or np.any(self.i_max - self.i_min < -1e-12 * np.abs(self.i_max)):
            raise DomainError("Fisher curve violates 0 <= I_min <= I_max")


def fisher_curve(omega_t, atom: AtomModel, gw: GwBackground, units="figure2", n_atoms=1):
    """Sample both bounds on a grid of phases ``omega t``."""
    omega_t = np.asarray(omega_t, dtype=float)
    if np.any(omega_t < 0):
        raise DomainError("omega t must be >= 0")
    times = omega_t / gw.omega
    i_min = np.array([cfi_total_min(t, atom, gw, n_atoms) for t in times])
    i_max = np.array([qfi_total(t, atom, gw, n_atoms) for t in times])
    if units == "figure2":
        unit = figure2_unit(atom, gw) * n_atoms
        i_min, i_max = i_min / unit, i_max / unit
    return FisherCurve(omega_t, i_min, i_max, units)


def optimal_times(omega, m_max):
    """Evolution times ``2 m pi / omega`` at which photon counting saturates the QFI."""
    if int(m_max) != m_max or m_max < 1:
        raise DomainError(f"m_max must be an integer >= 1, got {m_max!r}")
    if omega <= 0:
        raise DomainError("omega must be > 0")
    return [2.0 * math.pi * m / omega for m in range(1, int(m_max) + 1)]


def estimation_uncertainty(M, info):
    """Cramér-Rao uncertainty ``1/sqrt(M I)``."""
    if M < 1:
        raise DomainError(f"repetitions must be >= 1, got {M!r}")
    if not info > 0:
        raise DomainError(f"information must be > 0, got {info!r}")
    return 1.0 / math.sqrt(M * info)


def exact(x):
    """Exact rational value of ``x``; floats are read through their shortest repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"value must be finite, got {x!r}")
        return Fraction(repr(x))
    return Fraction(str(x))


def _ceil_inverse_square(x: Fraction) -> int:
    if x <= 0:
        raise DomainError("detection requirement is infinite for zero signal")
    return max(1, math.ceil(1 / (x * x)))


def atoms_required(amplitude, omega0, omega) -> int:
    """Atoms needed for ``delta A <= A`` at a coincidence time: ``(A omega0/omega)^-2``."""
    a, w0, w = exact(amplitude), exact(omega0), exact(omega)
    if w0 <= 0 or w <= 0:
        raise DomainError("frequencies must be > 0")
    return _ceil_inverse_square(a * w0 / w)


def atoms_required_Q(amplitude, Q) -> int:
    """Atom requirement when ``omega ~ gamma0``: ``(A Q)^-2``."""
    q = exact(Q)
    if q <= 0:
        raise DomainError("quality factor must be > 0")
    return _ceil_inverse_square(exact(amplitude) * q)


@dataclass(frozen=True)
class FeasibilityReport:
    n_min_freq: int
    n_min_q: int
    optimal_times: tuple
    lifetime_ratio: float
    lifetime_ok: bool
    atomic_lifetime: float
    resolvability: Optional[ResolvabilityReport] = None
    notes: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "N_min_freq": self.n_min_freq,
            "N_min_Q": self.n_min_q,
            "optimal_times": list(self.optimal_times),
            "lifetime_ratio_omega_over_gamma0": self.lifetime_ratio,
            "lifetime_status": "pass" if self.lifetime_ok else "warn",
            "atomic_lifetime": self.atomic_lifetime,
            "resolvability": None if self.resolvability is None else self.resolvability.as_dict(),
            **self.notes,
        }


def feasibility(amplitude, omega0, omega, gamma0, Q=None, m_max=3, resolvability=None, angular_factor=1.0):
    """Atom-number and lifetime requirements for detecting strain ``amplitude``.

    Inputs may be floats, ints, strings or Fractions and share one frequency
    unit. The atom counts depend only on ratios and use exact rational
    arithmetic. Times are ``1/(angular_factor * frequency)``, so pass
    ``2 pi`` for hertz input. ``Q`` defaults to ``omega0/gamma0``.
    """
    w0, w, g = exact(omega0), exact(omega), exact(gamma0)
    if g <= 0:
        raise DomainError("gamma0 must be > 0")
    q = w0 / g if Q is None else exact(Q)
    ratio = float(w / g)
    w_ang = float(w) * angular_factor
    return FeasibilityReport(
        n_min_freq=atoms_required(amplitude, w0, w),
        n_min_q=atoms_required_Q(amplitude, q),
        optimal_times=tuple(optimal_times(w_ang, m_max)),
        lifetime_ratio=ratio,
        lifetime_ok=ratio >= 1.0,
        atomic_lifetime=1.0 / (float(g) * angular_factor),
        resolvability=resolvability,
    )
