"""Physical parameters, derived atomic quantities and validity checks.

Frequencies are angular and times are their inverses. Nothing here fixes a
scale, but the rest of the package is normally driven with the GW frequency
set to one, so that omega0 is the ratio omega0/omega and t is the phase
omega*t.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

from .errors import DomainError, PerturbativityWarning


def _finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class GwBackground:
    """Plane, plus-polarized GW propagating along +z in the TT gauge.

    Parameters
    ----------
    amplitude : float
        Dimensionless strain, >= 0.
    omega : float
        Angular frequency, > 0.
    strain_warn : float
        Strain above which a :class:`PerturbativityWarning` is emitted.
    """

    amplitude: float
    omega: float = 1.0
    strain_warn: float = 1e-2

    def __post_init__(self):
        _finite("amplitude", self.amplitude)
        _finite("omega", self.omega)
        if self.amplitude < 0:
            raise DomainError(f"amplitude must be >= 0, got {self.amplitude!r}")
        if self.omega <= 0:
            raise DomainError(f"omega must be > 0, got {self.omega!r}")
        if self.amplitude > self.strain_warn:
            warnings.warn(
                f"strain {self.amplitude:g} exceeds {self.strain_warn:g}; "
                "first-order results may not hold",
                PerturbativityWarning,
                stacklevel=3,
            )

    @property
    def period(self):
        return 2.0 * math.pi / self.omega


def linewidth_from_coupling(epsilon, omega0):
    """Spontaneous decay rate eps^2 * omega0 / (8 pi)."""
    _finite("epsilon", epsilon)
    _finite("omega0", omega0)
    if omega0 <= 0:
        raise DomainError(f"omega0 must be > 0, got {omega0!r}")
    if epsilon < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon!r}")
    return epsilon * epsilon * omega0 / (8.0 * math.pi)


@dataclass(frozen=True)
class AtomModel:
    """Two-level atom with transition frequency ``omega0`` and coupling ``epsilon``.

    ``gamma0`` and ``quality_Q`` are derived on access and never stored.
    """

    omega0: float
    epsilon: float
    coupling_warn: float = 0.1

    def __post_init__(self):
        # validates omega0 > 0 and epsilon >= 0
        linewidth_from_coupling(self.epsilon, self.omega0)
        if self.epsilon > self.coupling_warn:
            warnings.warn(
                f"coupling {self.epsilon:g} exceeds {self.coupling_warn:g}; "
                "second-order perturbation theory may not hold",
                PerturbativityWarning,
                stacklevel=3,
            )

    @classmethod
    def from_linewidth(cls, omega0, gamma0, **kwargs):
        """Build the atom whose linewidth is ``gamma0``."""
        _finite("gamma0", gamma0)
        if omega0 <= 0:
            raise DomainError(f"omega0 must be > 0, got {omega0!r}")
        if gamma0 < 0:
            raise DomainError(f"gamma0 must be >= 0, got {gamma0!r}")
        return cls(omega0, math.sqrt(8.0 * math.pi * gamma0 / omega0), **kwargs)

    @property
    def gamma0(self):
        return linewidth_from_coupling(self.epsilon, self.omega0)

    @property
    def quality_Q(self):
        g = self.gamma0
        return math.inf if g == 0 else self.omega0 / g


def mean_photons(gamma0, t, n_atoms=1):
    """Expected number of photons emitted by ``n_atoms`` atoms up to time ``t``."""
    _finite("t", t)
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t!r}")
    if n_atoms < 0:
        raise DomainError(f"n_atoms must be >= 0, got {n_atoms!r}")
    return n_atoms * gamma0 * t


@dataclass(frozen=True)
class ValidityThresholds:
    strain: float = 1e-2
    coupling: float = 1e-1
    frequency_ratio: float = 10.0
    carrier_phase: float = 100.0
    photons_per_atom: float = 1.0
    amplified_strain: float = 1e-1


@dataclass(frozen=True)
class ValidityCheck:
    name: str
    value: float
    threshold: float
    # "max": value must not exceed threshold; "min": value must reach it
    kind: str
    passed: bool

    def as_dict(self):
        return {
            "name": self.name,
            "value": self.value,
            "threshold": self.threshold,
            "kind": self.kind,
            "status": "pass" if self.passed else "warn",
        }


@dataclass(frozen=True)
class ValidityReport:
    checks: tuple = field(default_factory=tuple)

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks)

    @property
    def warnings(self):
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self):
        return {"all_passed": self.all_passed, "checks": [c.as_dict() for c in self.checks]}


def _check(name, value, threshold, kind):
    passed = value <= threshold if kind == "max" else value >= threshold
    return ValidityCheck(name, float(value), float(threshold), kind, bool(passed))


def check_validity(
    gw: GwBackground,
    atom: AtomModel,
    t: float,
    k_probe: Optional[float] = None,
    thresholds: ValidityThresholds = ValidityThresholds(),
) -> ValidityReport:
    """Collect the approximations behind the first-order results into one report.

    Out-of-regime values produce warn entries, never exceptions. Only
    non-finite input is rejected. ``k_probe`` defaults to the carrier
    ``atom.omega0``.
    """
    if k_probe is None:
        k_probe = atom.omega0
    for name, v in (("t", t), ("k_probe", k_probe)):
        _finite(name, v)
    th = thresholds
    checks = (
        _check("strain", gw.amplitude, th.strain, "max"),
        _check("coupling", atom.epsilon, th.coupling, "max"),
        _check("frequency_ratio", atom.omega0 / gw.omega, th.frequency_ratio, "min"),
        _check("carrier_phase", atom.omega0 * t, th.carrier_phase, "min"),
        _check("photons_per_atom", atom.gamma0 * t, th.photons_per_atom, "max"),
        _check("amplified_strain", gw.amplitude * abs(k_probe) / gw.omega, th.amplified_strain, "max"),
    )
    return ValidityReport(checks)
