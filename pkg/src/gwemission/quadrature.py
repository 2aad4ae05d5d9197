"""Gauss-Legendre machinery for the numerical oracles.

Two kinds of integral appear:

* time integrals over [0, t] of integrands oscillating no faster than a
  known rate. Panels are sized so that every oscillation period holds at
  least ``panels_per_period`` of them;
* momentum integrals over a window of k centred on the carrier. The window
  starts at ``max(8 omega, 40/t)`` and doubles until the newly added shell is
  negligible, or until it spans the whole physical range ``0 < k <= 2 omega0``.

Chunk totals are combined with ``math.fsum`` and in-chunk reductions use
numpy's pairwise summation, so results do not depend on chunking or order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError

SCHEMES = ("adaptive-interval-halving", "fixed-panel-gauss")
_CHUNK = 1 << 21


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and rule sizes shared by every oracle.

    ``max_subdivisions`` bounds the number of refinement steps: interval
    halvings for time integrals and window doublings for momentum integrals.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-30
    max_subdivisions: int = 64
    scheme: str = "adaptive-interval-halving"
    order: int = 4
    panels_per_period: int = 20
    radial_order: int = 8
    radial_panels_per_period: int = 4
    angular_order: int = 8
    theta_panels: int = 2
    phi_panels: int = 4

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be > 0")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        for name in ("order", "panels_per_period", "radial_order", "radial_panels_per_period",
                     "angular_order", "theta_panels", "phi_panels"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1")


@lru_cache(maxsize=None)
def _legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def gauss_panels(a, b, n_panels, order):
    """Nodes and weights of ``n_panels`` equal Gauss-Legendre panels on [a, b]."""
    x, w = _legendre(order)
    edges = np.linspace(a, b, int(n_panels) + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def time_integral(integrand, t, max_rate, q: QuadratureSpec):
    """Integrate ``integrand(tp)`` over ``tp`` in [0, t].

    ``integrand`` maps a 1-D array of times to an array whose last axis runs
    over those times; the leading axes are integrated independently.
    ``max_rate`` is the fastest angular frequency present. Returns
    ``(values, error_estimate)``; the estimate is NaN for the fixed scheme.
    """
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0:
        probe = np.asarray(integrand(np.zeros(1)))
        z = np.zeros(probe.shape[:-1], dtype=probe.dtype)
        return z, np.zeros(z.shape)

    n = max(1, math.ceil(q.panels_per_period * max_rate * t / (2.0 * math.pi)))

    def rule(n_panels):
        nodes, weights = gauss_panels(0.0, t, n_panels, q.order)
        vals = np.asarray(integrand(nodes))
        return (vals * weights).sum(axis=-1), (np.abs(vals) * weights).sum(axis=-1)

    coarse, l1 = rule(n)
    if q.scheme == "fixed-panel-gauss":
        return coarse, np.full(np.shape(coarse), np.nan)

    for halvings in range(1, q.max_subdivisions + 1):
        fine, l1 = rule(2 * n)
        err = np.abs(fine - coarse)
        if np.all(err <= np.maximum(q.abs_tol, q.rel_tol * l1)):
            return fine, err
        n, coarse = 2 * n, fine
    raise ConvergenceError(
        f"time integral not converged after {q.max_subdivisions} halvings",
        error_estimate=float(np.max(err)),
    )


def carrier_time_integral(delta, t, envelope, max_rate, q: QuadratureSpec):
    """``int_0^t exp(-i delta t') envelope(t') dt'`` for a 1-D array of detunings.

    Same panels and acceptance test as :func:`time_integral`, specialised
    to an envelope that does not depend on ``delta``. The phase at node
    ``i`` of panel ``p`` is split as ``exp(-i delta p h) exp(-i delta h u_i)``.
    The panel factor is the product of two short exponential tables
    (``p = hi * B + lo``), so each detuning needs about ``2 sqrt(n)``
    complex exponentials instead of ``order * n``.
    """
    if t < 0:
        raise DomainError("t must be >= 0")
    delta = np.asarray(delta, dtype=float)
    if t == 0:
        return np.zeros(delta.shape, dtype=complex), np.zeros(delta.shape)
    x, w = _legendre(q.order)
    u = 0.5 * (x + 1.0)
    d = delta[:, None]

    def rule(n):
        h = t / n
        p = np.arange(n)
        env = np.asarray(envelope(p[:, None] * h + h * u[None, :]))
        weighted = env * (0.5 * h * w)[None, :]
        inner = np.exp(-1j * d * (h * u)[None, :]) @ weighted.T
        b = max(1, math.isqrt(n - 1) + 1)
        e_hi = np.exp(-1j * d * (h * b * np.arange((n + b - 1) // b))[None, :])
        e_lo = np.exp(-1j * d * (h * np.arange(b))[None, :])
        phase = (e_hi[:, :, None] * e_lo[:, None, :]).reshape(len(delta), -1)[:, :n]
        return np.einsum("ij,ij->i", phase, inner), float(np.abs(weighted).sum())

    n = max(1, math.ceil(q.panels_per_period * max_rate * t / (2.0 * math.pi)))
    coarse, l1 = rule(n)
    if q.scheme == "fixed-panel-gauss":
        return coarse, np.full(delta.shape, np.nan)
    for _ in range(q.max_subdivisions):
        fine, l1 = rule(2 * n)
        err = np.abs(fine - coarse)
        if np.all(err <= max(q.abs_tol, q.rel_tol * l1)):
            return fine, err
        n, coarse = 2 * n, fine
    raise ConvergenceError(
        f"time integral not converged after {q.max_subdivisions} halvings",
        error_estimate=float(np.max(err)),
    )


@dataclass(frozen=True)
class WindowResult:
    """Outcome of a momentum integral over a carrier-centred window."""

    value: object
    abs_value: object
    window: float
    capped: bool
    doublings: int
    tail_estimate: float
    n_nodes: int


def radial_panel_width(t, omega):
    # sinc((delta +- omega) t/2) has period 4 pi / t in delta
    if t > 0:
        return 4.0 * math.pi / t
    return 4.0 * math.pi / omega


def grow_window(segment, omega0, t, omega, q: QuadratureSpec, start=None):
    """Integrate over ``|k - omega0| <= W`` with ``W`` doubled until converged.

    ``segment(a, b)`` returns ``(signed, absolute, n_nodes)`` for k in [a, b]
    (values may be arrays sharing a shape). The window never extends below
    k = 0, so it is capped at ``W = omega0``; reaching the cap ends the
    growth. Otherwise the growth stops once the last shell's absolute
    contribution is below ``rel_tol`` of the running absolute total.
    """
    cap = omega0
    w = min(cap, max(8.0 * omega, 40.0 / t) if start is None else start)
    parts_signed, parts_abs = [], []
    s, a, nodes = segment(omega0 - w, omega0 + w)
    parts_signed.append(np.asarray(s, dtype=float))
    parts_abs.append(np.asarray(a, dtype=float))
    doublings = 0
    tail = math.inf
    capped = w >= cap
    while not capped:
        w_new = min(2.0 * w, cap)
        s1, a1, n1 = segment(omega0 + w, omega0 + w_new)
        s2, a2, n2 = segment(omega0 - w_new, omega0 - w)
        nodes += n1 + n2
        shell = np.asarray(a1, dtype=float) + np.asarray(a2, dtype=float)
        parts_signed += [np.asarray(s1, dtype=float), np.asarray(s2, dtype=float)]
        parts_abs += [np.asarray(a1, dtype=float), np.asarray(a2, dtype=float)]
        w = w_new
        doublings += 1
        capped = w >= cap
        total_abs = _fsum(parts_abs)
        tail = float(np.max(shell / np.maximum(total_abs, 1e-300)))
        if np.all(shell <= q.rel_tol * total_abs + q.abs_tol):
            break
        if not capped and doublings >= q.max_subdivisions:
            raise ConvergenceError(
                f"momentum window not converged after {doublings} doublings (W = {w:g})",
                error_estimate=tail,
            )
    return WindowResult(_fsum(parts_signed), _fsum(parts_abs), w, capped, doublings, tail, nodes)


def _fsum(parts):
    stacked = np.stack([np.atleast_1d(p) for p in parts])
    out = np.array([math.fsum(col) for col in stacked.reshape(len(parts), -1).T])
    out = out.reshape(np.atleast_1d(parts[0]).shape)
    return float(out[0]) if np.ndim(parts[0]) == 0 else out


def radial_nodes(a, b, t, omega, q: QuadratureSpec):
    if b <= a:
        return np.empty(0), np.empty(0)
    h = radial_panel_width(t, omega) / q.radial_panels_per_period
    return gauss_panels(a, b, max(1, math.ceil((b - a) / h)), q.radial_order)


def angular_nodes(q: QuadratureSpec):
    """Gauss nodes on the sphere; weights include the ``sin(theta)`` Jacobian."""
    th, wth = gauss_panels(0.0, math.pi, q.theta_panels, q.angular_order)
    ph, wph = gauss_panels(0.0, 2.0 * math.pi, q.phi_panels, q.angular_order)
    return th, wth * np.sin(th), ph, wph


def angular_integral(fn, q: QuadratureSpec):
    """Integrate ``fn(theta, phi)`` over the unit sphere."""
    th, wth, ph, wph = angular_nodes(q)
    vals = fn(th[:, None], ph[None, :])
    return float(np.sum(vals * wth[:, None] * wph[None, :]))


def radial_integral(fn, omega0, t, omega, q: QuadratureSpec, start=None):
    """Window integral of ``fn(k) dk`` (include any k^2 Jacobian in ``fn``)."""

    def segment(a, b):
        k, w = radial_nodes(a, b, t, omega, q)
        if k.size == 0:
            return 0.0, 0.0, 0
        v = np.asarray(fn(k)) * w
        return np.sum(v, axis=-1), np.sum(np.abs(v), axis=-1), k.size

    return grow_window(segment, omega0, t, omega, q, start)


def momentum_integral(fn, omega0, t, omega, q: QuadratureSpec, start=None):
    """Full tensor-product integral of ``fn(k, theta, phi) d^3k``.

    ``fn`` must broadcast over arrays shaped (nk, 1, 1), (1, ntheta, 1) and
    (1, 1, nphi).
    """
    th, wth, ph, wph = angular_nodes(q)
    wang = wth[:, None] * wph[None, :]
    per_k = th.size * ph.size
    step = max(1, _CHUNK // per_k)

    def segment(a, b):
        k, w = radial_nodes(a, b, t, omega, q)
        signed, absolute = [], []
        for i in range(0, k.size, step):
            kk, ww = k[i:i + step], w[i:i + step]
            vals = fn(kk[:, None, None], th[None, :, None], ph[None, None, :])
            weighted = vals * (ww * kk * kk)[:, None, None] * wang[None, :, :]
            signed.append(float(np.sum(weighted)))
            absolute.append(float(np.sum(np.abs(weighted))))
        return math.fsum(signed), math.fsum(absolute), k.size * per_k

    return grow_window(segment, omega0, t, omega, q, start)
