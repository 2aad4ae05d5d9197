"""Scalar-field mode functions on flat space and on the plane-GW background.

The GW-perturbed mode is the flat plane wave times the first-order envelope
``1 + i A C sin(omega (t - z))`` with ``C = (k/omega) cos^2(theta/2) cos(2 phi)``.
The Cartesian form of ``C``, ``(kx^2 - ky^2) / (2 omega (k - kz))``, has a
removable 0/0 at theta = 0; the spherical form is used everywhere and the
Cartesian one is kept as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .params import GwBackground

TWO_PI_CUBED = (2.0 * math.pi) ** 3


@dataclass(frozen=True)
class ModePoint:
    """Emitted-photon momentum ``(k, theta, phi)`` relative to a carrier ``omega0``.

    ``phi`` is reduced to [0, 2 pi).
    """

    k: float
    theta: float
    phi: float
    omega0: float

    def __post_init__(self):
        for name in ("k", "theta", "phi", "omega0"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.k < 0:
            raise DomainError(f"k must be >= 0, got {self.k!r}")
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta!r}")
        object.__setattr__(self, "phi", self.phi % (2.0 * math.pi))

    @classmethod
    def from_detuning(cls, delta, theta, phi, omega0):
        return cls(omega0 + delta, theta, phi, omega0)

    @property
    def detuning(self):
        return self.k - self.omega0

    @property
    def cartesian(self):
        st = math.sin(self.theta)
        return (
            self.k * st * math.cos(self.phi),
            self.k * st * math.sin(self.phi),
            self.k * math.cos(self.theta),
        )


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        for name in ("t", "x", "y", "z"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")


def _require_k(k):
    if k <= 0:
        raise DomainError(f"mode normalization is singular at k = {k!r}")


def mode_norm(k):
    """Klein-Gordon normalization ``1/sqrt((2 pi)^3 2k)`` of a plane-wave mode."""
    return 1.0 / np.sqrt(TWO_PI_CUBED * 2.0 * k)


def flat_mode(mode: ModePoint, p: SpacetimePoint) -> complex:
    _require_k(mode.k)
    kx, ky, kz = mode.cartesian
    phase = mode.k * p.t - (kx * p.x + ky * p.y + kz * p.z)
    return complex(np.exp(-1j * phase) * mode_norm(mode.k))


def coefficient(k, theta, phi, omega):
    """Array form of :func:`correction_coefficient`."""
    return (k / omega) * np.cos(0.5 * theta) ** 2 * np.cos(2.0 * phi)


def correction_coefficient(mode: ModePoint, gw: GwBackground) -> float:
    """First-order mode coefficient in its regular spherical form."""
    return float(coefficient(mode.k, mode.theta, mode.phi, gw.omega))


def cartesian_coefficient(mode: ModePoint, gw: GwBackground) -> float:
    """``(kx^2 - ky^2) / (2 omega (k - kz))``; undefined along +z."""
    kx, ky, kz = mode.cartesian
    denom = 2.0 * gw.omega * (mode.k - kz)
    if denom == 0.0:
        raise DomainError("Cartesian coefficient is 0/0 along the propagation axis")
    return (kx * kx - ky * ky) / denom


def envelope(k, theta, phi, retarded_time, gw: GwBackground):
    """Slowly varying factor multiplying the flat mode; retarded_time = t - z."""
    c = coefficient(k, theta, phi, gw.omega)
    return 1.0 + 1j * gw.amplitude * c * np.sin(gw.omega * retarded_time)


def gw_mode(mode: ModePoint, p: SpacetimePoint, gw: GwBackground) -> complex:
    env = envelope(mode.k, mode.theta, mode.phi, p.t - p.z, gw)
    return complex(env * flat_mode(mode, p))


def demodulated_mode_at_origin(k, theta, phi, t, omega0, gw: GwBackground):
    """``exp(i omega0 t) u_k(t, 0)`` for arrays of ``t``.

    The carrier phase is cancelled analytically, leaving ``exp(-i (k - omega0) t)``
    so that large ``omega0 t`` costs no precision.
    """
    return np.exp(-1j * (k - omega0) * t) * envelope(k, theta, phi, t, gw) * mode_norm(k)


def _second_differences(fn, x, h):
    out = []
    f0 = fn(x)
    for axis in range(4):
        e = np.zeros(4)
        e[axis] = h
        out.append((fn(x + e) - 2.0 * f0 + fn(x - e)) / (h * h))
    return out


def kg_residual(
    mode: ModePoint,
    p: SpacetimePoint,
    gw: GwBackground,
    step: float | None = None,
    richardson: int = 2,
    step_floor: float = 1e-6,
) -> float:
    """Magnitude of the first-order Klein-Gordon residual of :func:`gw_mode` at ``p``.

    Evaluates ``box_eta phi - A cos(omega (t - z)) (d_x^2 - d_y^2) phi`` with
    second-order central differences refined by ``richardson`` levels of
    Richardson extrapolation. ``step`` and ``step_floor`` are in units of 1/k;
    the default step of 0.1/k keeps roundoff below the O(A^2) signal down to
    A ~ 1e-4.
    """
    _require_k(mode.k)
    if step is None:
        step = 0.1
    if step <= 0:
        raise DomainError(f"step must be > 0, got {step!r}")
    if step < step_floor:
        raise DomainError(f"step {step:g}/k is below the cancellation floor {step_floor:g}/k")
    if richardson < 0:
        raise DomainError("richardson must be >= 0")

    kx, ky, kz = mode.cartesian
    kvec = np.array([kx, ky, kz])
    c = correction_coefficient(mode, gw)
    norm = mode_norm(mode.k)
    A, w = gw.amplitude, gw.omega

    def field(x):
        env = 1.0 + 1j * A * c * np.sin(w * (x[0] - x[3]))
        return env * np.exp(-1j * (mode.k * x[0] - kvec @ x[1:])) * norm

    x0 = np.array([p.t, p.x, p.y, p.z], dtype=float)
    background = A * math.cos(w * (p.t - p.z))

    def residual(h):
        dtt, dxx, dyy, dzz = _second_differences(field, x0, h)
        return -dtt + dxx + dyy + dzz - background * (dxx - dyy)

    h = step / mode.k
    table = [residual(h / 2**j) for j in range(richardson + 1)]
    for m in range(1, richardson + 1):
        f = 4.0**m
        table = [(f * table[j + 1] - table[j]) / (f - 1.0) for j in range(len(table) - 1)]
    return float(abs(table[0]))
