"""Closed-form photon-number densities and sideband observables.

Densities are per unit momentum-space volume d^3k. The flat part is

    n_flat = eps^2 t^2 / ((2 pi)^3 8 k) * sinc^2(delta t / 2)

and the GW correction is the same prefactor times ``A (k/omega) f g``. The
correction is always evaluated in factored form, never as a difference of
two nearly equal totals, so strains of 1e-21 keep full relative precision.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, PerturbativityWarning
from .modes import TWO_PI_CUBED, ModePoint
from .params import AtomModel, GwBackground

_SERIES_CUTOFF = 1e-4


def sinc(x):
    """Unnormalized sinc, ``sin(x)/x`` with ``sinc(0) = 1``."""
    xa = np.asarray(x, dtype=float)
    small = np.abs(xa) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, xa)
    x2 = xa * xa
    out = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)
    return float(out) if np.ndim(x) == 0 else out


def one_minus_sinc(x):
    """``1 - sin(x)/x`` without the cancellation near ``x = 0``."""
    xa = np.asarray(x, dtype=float)
    x2 = xa * xa
    # alternating series sum_{n>=1} (-1)^(n+1) x^(2n)/(2n+1)!; 12 terms reach eps for |x| < 1
    series = np.zeros_like(xa)
    term = np.ones_like(xa)
    for n in range(1, 13):
        term = term * x2 / ((2 * n) * (2 * n + 1))
        series = series + (term if n % 2 else -term)
    small = np.abs(xa) < 1.0
    safe = np.where(small, 1.0, xa)
    out = np.where(small, series, 1.0 - np.sin(safe) / safe)
    return float(out) if np.ndim(x) == 0 else out


def sideband_bracket(delta, t, omega):
    """``cos(omega t/2) (sinc[(delta-omega)t/2] - sinc[(delta+omega)t/2])``.

    This is ``f / sinc(delta t / 2)`` with the common factor cancelled, so it is
    regular at every zero of the carrier sinc.
    """
    delta = np.asarray(delta, dtype=float)
    return np.cos(0.5 * omega * t) * (
        sinc(0.5 * (delta - omega) * t) - sinc(0.5 * (delta + omega) * t)
    )


def f_profile(delta_k, t, omega):
    """Spectral shape of the GW correction."""
    if np.any(np.asarray(t) < 0):
        raise DomainError("t must be >= 0")
    out = sinc(0.5 * np.asarray(delta_k, dtype=float) * t) * sideband_bracket(delta_k, t, omega)
    return float(out) if np.ndim(out) == 0 else out


def g_pattern(theta, phi):
    """Angular shape of the GW correction, ``cos^2(theta/2) cos(2 phi)``."""
    out = np.cos(0.5 * np.asarray(theta)) ** 2 * np.cos(2.0 * np.asarray(phi))
    return float(out) if np.ndim(out) == 0 else out


def density_prefactor(k, t, epsilon):
    """``eps^2 t^2 / ((2 pi)^3 8 k)``, the peak of the flat density at fixed k."""
    return epsilon * epsilon * t * t / (TWO_PI_CUBED * 8.0 * k)


def flat_density(k, t, omega0, epsilon):
    """Array version of :func:`n_flat`; ``k`` may be any broadcastable array."""
    k = np.asarray(k, dtype=float)
    return density_prefactor(k, t, epsilon) * sinc(0.5 * (k - omega0) * t) ** 2


def gw_density_per_amplitude(k, theta, phi, t, omega0, epsilon, omega):
    """``d(dn)/dA``: the GW correction with the strain factored out."""
    k = np.asarray(k, dtype=float)
    # prefactor * (k/omega) simplifies to a k-independent amplitude
    scale = epsilon * epsilon * t * t / (TWO_PI_CUBED * 8.0 * omega)
    return scale * f_profile(k - omega0, t, omega) * g_pattern(theta, phi)


def gw_density(k, theta, phi, t, omega0, epsilon, amplitude, omega):
    return amplitude * gw_density_per_amplitude(k, theta, phi, t, omega0, epsilon, omega)


def densities_at_detuning(delta, theta, phi, t, atom: AtomModel, gw: GwBackground):
    """``(n_flat, dn_gw)`` on arrays of detunings, never forming ``k - omega0``.

    For an optical carrier ``omega0 + delta`` cannot carry ``delta`` to full
    precision, so the sinc arguments are taken from ``delta`` itself.
    """
    delta = np.asarray(delta, dtype=float)
    k = atom.omega0 + delta
    if np.any(k <= 0):
        raise DomainError("density is singular at k <= 0")
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"t must be finite and >= 0, got {t!r}")
    flat = density_prefactor(k, t, atom.epsilon) * sinc(0.5 * delta * t) ** 2
    scale = atom.epsilon**2 * t * t / (TWO_PI_CUBED * 8.0 * gw.omega)
    dn = gw.amplitude * scale * f_profile(delta, t, gw.omega) * g_pattern(theta, phi)
    return flat, dn


def _require(mode, t):
    if mode.k <= 0:
        raise DomainError(f"density is singular at k = {mode.k!r}")
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"t must be finite and >= 0, got {t!r}")


def n_flat(mode: ModePoint, t: float, atom: AtomModel) -> float:
    _require(mode, t)
    return float(flat_density(mode.k, t, atom.omega0, atom.epsilon))


def dn_gw(mode: ModePoint, t: float, atom: AtomModel, gw: GwBackground) -> float:
    _require(mode, t)
    return float(
        gw_density(mode.k, mode.theta, mode.phi, t, atom.omega0, atom.epsilon, gw.amplitude, gw.omega)
    )


@dataclass(frozen=True)
class EmissionSample:
    mode: ModePoint
    t: float
    n_flat: float
    dn_gw: float

    @property
    def n_total(self):
        return self.n_flat + self.dn_gw


def _sample(mode, t, atom, gw):
    nf = n_flat(mode, t, atom)
    dn = dn_gw(mode, t, atom, gw)
    # |f| < 2 and |g| <= 1
    bound = 2.0 * gw.amplitude * (mode.k / gw.omega) * density_prefactor(mode.k, t, atom.epsilon)
    if abs(dn) > bound:
        warnings.warn(f"GW correction {dn:g} exceeds first-order bound {bound:g}", PerturbativityWarning)
    return EmissionSample(mode, t, nf, dn)


def spectrum_grid(
    detunings: Sequence[float],
    directions: Sequence[tuple],
    t: float,
    atom: AtomModel,
    gw: GwBackground,
) -> list:
    """Evaluate the emission at every (direction, detuning) pair.

    Rows are ordered direction-major, detuning-minor.
    """
    if len(detunings) == 0 or len(directions) == 0:
        raise DomainError("spectrum grid needs at least one detuning and one direction")
    out = []
    for i, (theta, phi) in enumerate(directions):
        for j, delta in enumerate(detunings):
            try:
                mode = ModePoint.from_detuning(float(delta), float(theta), float(phi), atom.omega0)
                out.append(_sample(mode, t, atom, gw))
            except DomainError as exc:
                raise DomainError(f"grid point (direction {i}, detuning {j}): {exc}") from exc
    return out


@dataclass(frozen=True)
class ResolvabilityReport:
    delta_k_min: float
    spectral_ratio: float
    spectral_threshold: float
    spectral_ok: bool
    solid_angle: float
    angular_threshold: float
    angular_ok: bool

    @property
    def ok(self):
        return self.spectral_ok and self.angular_ok

    def as_dict(self):
        return {
            "delta_k_min": self.delta_k_min,
            "spectral_ratio": self.spectral_ratio,
            "spectral_threshold": self.spectral_threshold,
            "spectral_status": "pass" if self.spectral_ok else "warn",
            "solid_angle": self.solid_angle,
            "angular_threshold": self.angular_threshold,
            "angular_status": "pass" if self.angular_ok else "warn",
        }


def resolvability(t, T_collect, dOmega, spectral_threshold=10.0, angular_threshold=0.1):
    """Check that sidebands can be resolved spectrally and in angle.

    The spectral resolution is limited to ``1/T_collect`` while the sideband
    features have width ``~1/t``, so ``T_collect/t`` must be large.
    """
    for name, v in (("t", t), ("T_collect", T_collect), ("dOmega", dOmega)):
        if not math.isfinite(v) or v <= 0:
            raise DomainError(f"{name} must be finite and > 0, got {v!r}")
    ratio = T_collect / t
    return ResolvabilityReport(
        delta_k_min=1.0 / T_collect,
        spectral_ratio=ratio,
        spectral_threshold=spectral_threshold,
        spectral_ok=ratio >= spectral_threshold,
        solid_angle=dOmega,
        angular_threshold=angular_threshold,
        angular_ok=dOmega <= angular_threshold,
    )
