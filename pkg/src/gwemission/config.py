"""Run configuration: INI file, flag overrides and conversion to internal units.

Frequencies are read in hertz unless ``angular = true``. Only ratios and the
phase ``omega t`` enter the physics, so the conversion matters only for a
time given in seconds: ``omega t = 2 pi nu t`` for hertz input.
"""

from __future__ import annotations

import configparser
import io
import math
import re
import warnings
from dataclasses import field, make_dataclass, replace
import numpy as np

from .errors import ConfigError, DomainError
from .params import AtomModel, GwBackground

_PI = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_number(text):
    """A float, optionally written as a multiple of pi (``2pi``, ``pi/2``, ``0.5pi``)."""
    s = str(text).strip()
    m = _PI.match(s)
    if m:
        coef = float(m.group(1)) if m.group(1) else 1.0
        div = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / div
    return float(s)


def parse_grid(text):
    """``start:stop:num`` (inclusive linspace) or a comma-separated list."""
    s = str(text).strip()
    if not s:
        raise ValueError("empty grid")
    if ":" in s:
        parts = s.split(":")
        if len(parts) != 3:
            raise ValueError("grid must be start:stop:num")
        num = int(parts[2])
        if num < 1:
            raise ValueError("grid needs at least one point")
        return np.linspace(parse_number(parts[0]), parse_number(parts[1]), num)
    out = np.array([parse_number(p) for p in s.split(",") if p.strip()])
    if out.size == 0:
        raise ValueError("empty grid")
    return out


def parse_directions(text):
    """``theta,phi; theta,phi; ...`` in radians."""
    out = []
    for item in str(text).split(";"):
        if not item.strip():
            continue
        parts = item.split(",")
        if len(parts) != 2:
            raise ValueError(f"direction {item.strip()!r} must be 'theta,phi'")
        out.append((parse_number(parts[0]), parse_number(parts[1])))
    if not out:
        raise ValueError("empty direction list")
    return out


def _bool(text):
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    s = str(text).strip()
    return None if s.lower() in ("", "none") else parse_number(s)


def _int(text):
    v = float(text) if re.search(r"[eE.]", str(text)) else int(text)
    if int(v) != v:
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def _grid_str(text):
    parse_grid(text)
    return str(text).strip()


def _dir_str(text):
    parse_directions(text)
    return str(text).strip()


# (section, key, parser, default); the attribute name is section_key
SCHEMA = [
    ("physics", "amplitude", parse_number, 1e-21),
    ("physics", "omega", parse_number, 10.0),
    ("physics", "omega0", parse_number, 1e14),
    ("physics", "gamma0", _opt_float, None),
    ("physics", "epsilon", _opt_float, None),
    ("physics", "omega_t", _opt_float, None),
    ("physics", "t", _opt_float, None),
    ("physics", "quality", _opt_float, None),
    ("physics", "angular", _bool, False),
    ("spectrum", "omega_t_grid", _grid_str, "0.25pi:2pi:8"),
    ("spectrum", "delta_over_omega", _grid_str, "-4:4:161"),
    ("spectrum", "directions", _dir_str, "0,0; pi/2,0; pi/2,pi/2; pi/2,pi/4"),
    ("spectrum", "f_omega_t_grid", _grid_str, "0.05pi:2pi:40"),
    ("spectrum", "f_delta_grid", _grid_str, "-4:4:161"),
    ("spectrum", "g_theta_grid", _grid_str, "0:pi:19"),
    ("spectrum", "g_phi_grid", _grid_str, "0:2pi:37"),
    ("fisher", "omega_t_max", parse_number, 8 * math.pi),
    ("fisher", "points", _int, 800),
    ("fisher", "units", str, "figure2"),
    ("feasibility", "m_max", _int, 3),
    ("feasibility", "collect_factor", parse_number, 100.0),
    ("feasibility", "solid_angle", parse_number, 0.01),
    ("quadrature", "rel_tol", parse_number, 1e-10),
    ("quadrature", "abs_tol", parse_number, 1e-30),
    ("quadrature", "max_subdivisions", _int, 64),
    ("quadrature", "scheme", str, "adaptive-interval-halving"),
    ("quadrature", "order", _int, 4),
    ("verify", "ratio", parse_number, 1e3),
    ("verify", "oracle_amplitude", parse_number, 1e-6),
    ("verify", "gamma0", parse_number, 1e-3),
    ("verify", "include_qfi", _bool, True),
    ("verify", "include_mc", _bool, True),
    ("verify", "mc_ensembles", _int, 400),
    ("montecarlo", "ratio", parse_number, 1e3),
    ("montecarlo", "amplitude", parse_number, 1e-6),
    ("montecarlo", "gamma0", parse_number, 1e-3),
    ("montecarlo", "omega_t", parse_number, 2 * math.pi),
    ("montecarlo", "n_atoms", _int, 10_000),
    ("montecarlo", "repetitions", _int, 100_000),
    ("montecarlo", "ensembles", _int, 200),
    ("montecarlo", "delta_width", parse_number, 0.025),
    ("montecarlo", "window", parse_number, 8.0),
    ("montecarlo", "n_theta", _int, 8),
    ("montecarlo", "n_phi", _int, 48),
    ("montecarlo", "write_bins", _bool, True),
    ("run", "seed", _int, 20240917),
    ("run", "threads", _int, 1),
    ("run", "out", str, "out"),
]
_SPEC = {f"{s}_{k}": (s, k, p, d) for s, k, p, d in SCHEMA}
# pairs where exactly one member may be set; a later layer setting one clears the other
EXCLUSIVE = (("physics_gamma0", "physics_epsilon"), ("physics_omega_t", "physics_t"))
DEFAULT_OMEGA_T = 2 * math.pi
DEFAULT_GAMMA0 = 1e-3


class _RunConfigMethods:
    @property
    def frequency_factor(self):
        return 1.0 if self.physics_angular else 2.0 * math.pi

    def internal(self):
        """``(gw, atom, omega_t)`` in units where the GW angular frequency is 1."""
        ratio = self.physics_omega0 / self.physics_omega
        gw = GwBackground(self.physics_amplitude, 1.0)
        if self.physics_epsilon is not None:
            atom = AtomModel(ratio, self.physics_epsilon)
        else:
            g = DEFAULT_GAMMA0 if self.physics_gamma0 is None else self.physics_gamma0
            atom = AtomModel.from_linewidth(ratio, g / self.physics_omega)
        if self.physics_t is not None:
            omega_t = self.physics_t * self.physics_omega * self.frequency_factor
        else:
            omega_t = DEFAULT_OMEGA_T if self.physics_omega_t is None else self.physics_omega_t
        return gw, atom, omega_t

    def to_ini(self):
        cp = configparser.ConfigParser(interpolation=None)
        for s, k, _, _ in SCHEMA:
            if not cp.has_section(s):
                cp.add_section(s)
            v = getattr(self, f"{s}_{k}")
            if v is None:
                continue
            cp.set(s, k, _format(v))
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


RunConfig = make_dataclass(
    "RunConfig",
    [(name, object, field(default=spec[3])) for name, spec in _SPEC.items()],
    bases=(_RunConfigMethods,),
    frozen=True,
)
RunConfig.__doc__ = "Every run setting, flattened to ``section_key`` attributes."


def _format(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_layer(mapping, origin):
    """Typed values from ``{"section.key": text}``; unknown keys are errors."""
    out = {}
    for path, text in mapping.items():
        name = path.replace(".", "_", 1)
        if name not in _SPEC:
            raise ConfigError(path, f"unknown setting (from {origin})")
        s, k, parser, _ = _SPEC[name]
        try:
            out[name] = parser(text) if isinstance(text, str) else text
        except (ValueError, TypeError) as exc:
            raise ConfigError(path, str(exc)) from exc
    for a, b in EXCLUSIVE:
        if out.get(a) is not None and out.get(b) is not None:
            raise ConfigError(_path(a), f"give either {_path(a)} or {_path(b)}, not both")
    return out


def _path(name):
    s, k, _, _ = _SPEC[name]
    return f"{s}.{k}"


def read_ini(text, origin="config"):
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(origin, str(exc)) from exc
    return {f"{s}.{k}": v for s in cp.sections() for k, v in cp.items(s)}


def build_config(*layers) -> RunConfig:
    """Merge ``(mapping, origin)`` layers, lowest precedence first, and validate."""
    values = {}
    for mapping, origin in layers:
        layer = _parse_layer(mapping, origin)
        for a, b in EXCLUSIVE:
            if layer.get(a) is not None:
                values.pop(b, None)
            if layer.get(b) is not None:
                values.pop(a, None)
        values.update(layer)
    cfg = RunConfig(**values)
    validate(cfg)
    return cfg


def load_config(text=None, overrides=None, env_out=None) -> RunConfig:
    """Defaults < file text < ``GWEMISSION_OUT`` < ``overrides`` (flags)."""
    layers = []
    if text is not None:
        layers.append((read_ini(text), "config file"))
    if env_out:
        layers.append(({"run.out": env_out}, "environment"))
    if overrides:
        layers.append((overrides, "command line"))
    return build_config(*layers)


def _positive(cfg, name, allow_zero=False):
    v = getattr(cfg, name)
    if not math.isfinite(v) or v < 0 or (v == 0 and not allow_zero):
        raise ConfigError(_path(name), f"must be {'>=' if allow_zero else '>'} 0, got {v!r}")


def validate(cfg: RunConfig):
    """Apply the parameter-model checks; raises :class:`ConfigError` with the field path."""
    for name in ("physics_omega", "physics_omega0", "fisher_omega_t_max", "verify_ratio",
                 "verify_gamma0", "montecarlo_ratio", "montecarlo_gamma0", "montecarlo_omega_t",
                 "montecarlo_delta_width", "montecarlo_window", "feasibility_collect_factor",
                 "feasibility_solid_angle", "quadrature_rel_tol", "quadrature_abs_tol"):
        _positive(cfg, name)
    for name in ("physics_amplitude", "verify_oracle_amplitude", "montecarlo_amplitude"):
        _positive(cfg, name, allow_zero=True)
    for name in ("fisher_points", "feasibility_m_max", "quadrature_max_subdivisions", "quadrature_order",
                 "verify_mc_ensembles", "montecarlo_n_atoms", "montecarlo_repetitions",
                 "montecarlo_ensembles", "montecarlo_n_theta", "montecarlo_n_phi", "run_threads"):
        if getattr(cfg, name) < 1:
            raise ConfigError(_path(name), "must be >= 1")
    if cfg.verify_oracle_amplitude > 1e-3:
        raise ConfigError("verify.oracle_amplitude", "finite differencing needs A <= 1e-3")
    if not 0 <= cfg.run_seed < 1 << 64:
        raise ConfigError("run.seed", "must lie in [0, 2^64)")
    if cfg.quadrature_scheme not in ("adaptive-interval-halving", "fixed-panel-gauss"):
        raise ConfigError("quadrature.scheme", f"unknown scheme {cfg.quadrature_scheme!r}")
    if cfg.fisher_units not in ("figure2", "absolute"):
        raise ConfigError("fisher.units", f"unknown units {cfg.fisher_units!r}")
    for name in ("physics_gamma0", "physics_epsilon", "physics_t", "physics_omega_t", "physics_quality"):
        v = getattr(cfg, name)
        if v is not None and (not math.isfinite(v) or v < 0):
            raise ConfigError(_path(name), f"must be finite and >= 0, got {v!r}")
    if cfg.physics_quality is not None and cfg.physics_quality == 0:
        raise ConfigError("physics.quality", "must be > 0")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            cfg.internal()
        except DomainError as exc:
            raise ConfigError("physics", str(exc)) from exc


def with_overrides(cfg: RunConfig, **values) -> RunConfig:
    out = replace(cfg, **values)
    validate(out)
    return out


__all__ = ["RunConfig", "load_config", "build_config", "read_ini", "parse_grid", "parse_directions",
           "parse_number", "validate", "with_overrides", "SCHEMA"]
