"""Gravitational-wave sidebands and Fisher information in spontaneous emission.

All formula-level quantities are expressed in natural units (hbar = c = 1).
Frequencies are angular. The library is homogeneous in these units, so the
usual choice is to measure every frequency in units of the GW frequency and
every time in units of its inverse (omega = 1).
"""

from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    EstimationError,
    PerturbativityWarning,
)
from .params import (
    AtomModel,
    GwBackground,
    ValidityReport,
    check_validity,
    linewidth_from_coupling,
    mean_photons,
)
from .modes import ModePoint, SpacetimePoint, correction_coefficient, flat_mode, gw_mode, kg_residual
from .emission import (
    EmissionSample,
    dn_gw,
    f_profile,
    g_pattern,
    n_flat,
    resolvability,
    sinc,
    spectrum_grid,
)
from .fisher import (
    FeasibilityReport,
    FisherCurve,
    atoms_required,
    atoms_required_Q,
    cfi_density_bound,
    cfi_total_min,
    estimation_uncertainty,
    fisher_curve,
    optimal_times,
    qfi_total,
)

__version__ = "0.1.0"
