"""Command-line front end.

Every subcommand accepts the same flags; ``--set section.key=value`` reaches
any configuration entry. Precedence is flags > ``GWEMISSION_OUT`` (output
directory only) > ``--config`` file > built-in defaults.

Exit status: 0 success, 1 failed verification, 2 configuration error,
3 output error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config, parse_directions, parse_grid
from .emission import densities_at_detuning, f_profile, g_pattern, resolvability
from .errors import ConfigError, DomainError
from .fisher import feasibility, figure2_unit, fisher_curve, cfi_total_min, qfi_total
from .montecarlo import BinGrid, build_binned_model, crb_experiment, expected_total
from .params import AtomModel, GwBackground, check_validity
from .quadrature import QuadratureSpec
from .verify import VerifySettings, run_checks

ENV_OUT = "GWEMISSION_OUT"

# flag -> (config path, argparse kwargs)
FLAGS = {
    "--out": ("run.out", {"metavar": "DIR", "help": "output directory"}),
    "--seed": ("run.seed", {"metavar": "U64", "help": "random seed"}),
    "--threads": ("run.threads", {"metavar": "N", "help": "worker threads"}),
    "--rel-tol": ("quadrature.rel_tol", {"metavar": "F", "help": "quadrature relative tolerance"}),
    "--max-subdivisions": ("quadrature.max_subdivisions", {"metavar": "N", "help": "quadrature refinement limit"}),
    "--scheme": ("quadrature.scheme", {"metavar": "NAME", "help": "adaptive-interval-halving or fixed-panel-gauss"}),
    "--amplitude": ("physics.amplitude", {"metavar": "A", "help": "GW strain"}),
    "--omega": ("physics.omega", {"metavar": "F", "help": "GW frequency"}),
    "--omega0": ("physics.omega0", {"metavar": "F", "help": "atomic transition frequency"}),
    "--gamma0": ("physics.gamma0", {"metavar": "F", "help": "atomic linewidth (exclusive with --epsilon)"}),
    "--epsilon": ("physics.epsilon", {"metavar": "F", "help": "atom-field coupling (exclusive with --gamma0)"}),
    "--omega-t": ("physics.omega_t", {"metavar": "PHASE", "help": "evolution phase omega*t (exclusive with --time)"}),
    "--time": ("physics.t", {"metavar": "S", "help": "evolution time in seconds"}),
    "--quality": ("physics.quality", {"metavar": "Q", "help": "quality factor for the feasibility estimate"}),
    "--oracle-amplitude": ("verify.oracle_amplitude", {"metavar": "A", "help": "strain used by the oracle checks"}),
    "--ensembles": ("montecarlo.ensembles", {"metavar": "N", "help": "Monte Carlo ensembles"}),
    "--repetitions": ("montecarlo.repetitions", {"metavar": "M", "help": "repetitions per dataset"}),
    "--n-atoms": ("montecarlo.n_atoms", {"metavar": "N", "help": "atoms in the Monte Carlo sample"}),
}


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS, help="INI configuration file")
    p.add_argument("--angular", action="store_true", default=argparse.SUPPRESS,
                   help="input frequencies are angular rather than hertz")
    for flag, (_, kw) in FLAGS.items():
        p.add_argument(flag, default=argparse.SUPPRESS, **kw)
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", default=argparse.SUPPRESS,
                   help="override any configuration entry (repeatable)")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="gwemission", parents=[common],
                                     description="GW sidebands in spontaneous emission: spectra, Fisher "
                                                 "information, feasibility and numerical verification.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("spectrum", "emission spectra and the f/g shape grids"),
        ("fisher", "Fisher-information bounds over omega*t"),
        ("feasibility", "atom numbers and lifetime requirements"),
        ("verify", "run the oracle suite and the Monte Carlo CRB experiment"),
        ("montecarlo", "simulated photon-counting experiment"),
        ("validate-params", "report on the approximations behind the closed forms"),
    ):
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def config_from_args(args, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    ns = vars(args)
    overrides = {}
    for flag, (path, _) in FLAGS.items():
        key = flag[2:].replace("-", "_")
        if key in ns:
            overrides[path] = ns[key]
    if ns.get("angular"):
        overrides["physics.angular"] = "true"
    for item in ns.get("set", []):
        if "=" not in item:
            raise ConfigError("--set", f"expected SECTION.KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v
    text = None
    if "config" in ns:
        try:
            text = Path(ns["config"]).read_text()
        except OSError as exc:
            raise ConfigError("--config", str(exc)) from exc
    return load_config(text, overrides, environ.get(ENV_OUT))


def fmt(v):
    """17 significant digits in scientific notation; ints and strings verbatim."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".16e")
    return str(v)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    Path(path).write_bytes(("\n".join(lines) + "\n").encode())


def write_array_csv(path, header, array, fmt_spec="%.16e"):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, array, fmt=fmt_spec, delimiter=",", newline="\n")


def to_json(obj, indent=0):
    """Deterministic JSON with floats at 17 significant digits; NaN/inf become null."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}{to_json(str(k))}: {to_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        return "[\n" + ",\n".join(inner + to_json(v, indent + 1) for v in seq) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, (complex, np.complexfloating)):
        return to_json([obj.real, obj.imag], indent)
    s = str(obj).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{s}"'


def write_json(path, obj):
    Path(path).write_bytes((to_json(obj) + "\n").encode())


def _grid(cfg, field):
    try:
        return parse_grid(getattr(cfg, field))
    except ValueError as exc:
        raise ConfigError(field.replace("_", ".", 1), str(exc)) from exc


def _quadrature(cfg):
    try:
        return QuadratureSpec(rel_tol=cfg.quadrature_rel_tol, abs_tol=cfg.quadrature_abs_tol,
                              max_subdivisions=cfg.quadrature_max_subdivisions,
                              scheme=cfg.quadrature_scheme, order=cfg.quadrature_order)
    except DomainError as exc:
        raise ConfigError("quadrature", str(exc)) from exc


def cmd_spectrum(cfg: RunConfig, out: Path):
    gw, atom, _ = cfg.internal()
    phases = _grid(cfg, "spectrum_omega_t_grid")
    detunings = _grid(cfg, "spectrum_delta_over_omega")
    directions = parse_directions(cfg.spectrum_directions)
    if np.any(phases < 0):
        raise ConfigError("spectrum.omega_t_grid", "phases must be >= 0")
    rows = []
    for wt in phases:
        for theta, phi in directions:
            try:
                nf, dn = densities_at_detuning(detunings, theta, phi, wt, atom, gw)
            except DomainError as exc:
                raise ConfigError("spectrum", str(exc)) from exc
            rows += [(wt, d, theta, phi, a, b, a + b) for d, a, b in zip(detunings, nf, dn)]
    write_csv(out / "spectrum.csv",
              ["omega_t", "delta_over_omega", "theta", "phi", "n_flat", "dn_gw", "n_total"], rows)

    f_phases = _grid(cfg, "spectrum_f_omega_t_grid")
    f_det = _grid(cfg, "spectrum_f_delta_grid")
    rows = [(wt, d, v) for wt in f_phases for d, v in zip(f_det, f_profile(f_det, wt, 1.0))]
    write_csv(out / "fprofile.csv", ["omega_t", "delta_over_omega", "f"], rows)

    th = _grid(cfg, "spectrum_g_theta_grid")
    ph = _grid(cfg, "spectrum_g_phi_grid")
    rows = [(a, b, g_pattern(a, b)) for a in th for b in ph]
    write_csv(out / "gpattern.csv", ["theta", "phi", "g"], rows)
    return 0


def cmd_fisher(cfg: RunConfig, out: Path):
    gw, atom, _ = cfg.internal()
    n = cfg.fisher_points
    phases = cfg.fisher_omega_t_max * np.arange(1, n + 1) / n
    curve = fisher_curve(phases, atom, gw, units=cfg.fisher_units)
    units = cfg.fisher_units
    write_csv(out / "fisher.csv", ["omega_t", "i_min", "i_max", "units"],
              [(a, b, c, units) for a, b, c in zip(curve.times, curve.i_min, curve.i_max)])
    scale = 1.0 if units == "absolute" else figure2_unit(atom, gw)
    points = []
    m = 1
    while 2 * math.pi * m <= cfg.fisher_omega_t_max * (1 + 1e-12):
        wt = 2 * math.pi * m
        lo, hi = cfi_total_min(wt, atom, gw) / scale, qfi_total(wt, atom, gw) / scale
        points.append({"m": m, "omega_t": wt, "i_min": lo, "i_max": hi,
                       "relative_gap": abs(hi - lo) / hi})
        m += 1
    write_json(out / "fisher_meta.json", {
        "units": units,
        "unit_value": scale,
        "omega_t_max": cfg.fisher_omega_t_max,
        "points": n,
        "coincidence_points": points,
    })
    return 0


def cmd_feasibility(cfg: RunConfig, out: Path):
    gw, atom, wt = cfg.internal()
    gamma0 = cfg.physics_gamma0
    if gamma0 is None:
        gamma0 = atom.gamma0 * cfg.physics_omega
    res = resolvability(wt, cfg.feasibility_collect_factor * wt, cfg.feasibility_solid_angle)
    rep = feasibility(cfg.physics_amplitude, cfg.physics_omega0, cfg.physics_omega, gamma0,
                      Q=cfg.physics_quality, m_max=cfg.feasibility_m_max, resolvability=res,
                      angular_factor=cfg.frequency_factor)
    d = rep.as_dict()
    d["inputs"] = {"amplitude": cfg.physics_amplitude, "omega0": cfg.physics_omega0,
                   "omega": cfg.physics_omega, "gamma0": gamma0, "quality": cfg.physics_quality,
                   "angular": cfg.physics_angular}
    d["resolvability_note"] = "times in units of 1/omega"
    write_json(out / "feasibility.json", d)
    return 0


def verify_settings(cfg: RunConfig) -> VerifySettings:
    grid = BinGrid(delta_width=cfg.montecarlo_delta_width, window=cfg.montecarlo_window,
                   n_theta=cfg.montecarlo_n_theta, n_phi=cfg.montecarlo_n_phi)
    return VerifySettings(
        ratio=cfg.verify_ratio, gamma0=cfg.verify_gamma0, oracle_amplitude=cfg.verify_oracle_amplitude,
        quadrature=_quadrature(cfg), include_qfi=cfg.verify_include_qfi, include_mc=cfg.verify_include_mc,
        mc_ratio=cfg.montecarlo_ratio, mc_gamma0=cfg.montecarlo_gamma0, mc_amplitude=cfg.montecarlo_amplitude,
        mc_omega_t=cfg.montecarlo_omega_t, mc_atoms=cfg.montecarlo_n_atoms,
        mc_repetitions=cfg.montecarlo_repetitions, mc_ensembles=cfg.verify_mc_ensembles,
        mc_grid=grid, seed=cfg.run_seed,
    )


def cmd_verify(cfg: RunConfig, out: Path):
    result = run_checks(verify_settings(cfg), cfg.run_threads)
    write_json(out / "verify.json", result)
    for c in result["checks"]:
        print(f"{c['status'].upper():4s} {c['name']}")
    print(f"{result['n_checks'] - result['n_failed']}/{result['n_checks']} checks passed")
    return 0 if result["all_passed"] else 1


def cmd_montecarlo(cfg: RunConfig, out: Path):
    atom = AtomModel.from_linewidth(cfg.montecarlo_ratio, cfg.montecarlo_gamma0)
    gw = GwBackground(cfg.montecarlo_amplitude)
    grid = BinGrid(delta_width=cfg.montecarlo_delta_width, window=cfg.montecarlo_window,
                   n_theta=cfg.montecarlo_n_theta, n_phi=cfg.montecarlo_n_phi)
    wt = cfg.montecarlo_omega_t
    try:
        rep = crb_experiment(wt, atom, gw, cfg.montecarlo_n_atoms, cfg.montecarlo_repetitions,
                             cfg.montecarlo_ensembles, cfg.run_seed, grid, cfg.run_threads)
    except DomainError as exc:
        raise ConfigError("montecarlo", str(exc)) from exc
    model = build_binned_model(grid, wt, atom, gw, cfg.montecarlo_n_atoms)
    d = rep.as_dict()
    d["model"] = {"n_bins": model.n_bins, "merged": model.merged, "total_flat": model.total_flat,
                  "expected_total": expected_total(wt, atom, cfg.montecarlo_n_atoms),
                  "total_signal": model.total_signal, "information": model.information,
                  "omega_t": wt, "ratio": cfg.montecarlo_ratio, "gamma0": cfg.montecarlo_gamma0}
    d["estimates"] = rep.estimates.tolist()
    write_json(out / "montecarlo.json", d)
    if cfg.montecarlo_write_bins:
        c = model.cells[model.cell]
        arr = np.column_stack([np.arange(model.n_bins), model.cell, c, model.delta_lo, model.delta_hi,
                               model.mu, model.s])
        fmt_spec = ["%d", "%d"] + ["%.16e"] * 8
        write_array_csv(out / "mc_bins.csv", ["bin", "cell", "cos_theta_hi", "cos_theta_lo", "phi_lo",
                                              "phi_hi", "delta_lo", "delta_hi", "mu", "s"], arr, fmt_spec)
    return 0


def cmd_validate(cfg: RunConfig, out: Path):
    gw, atom, wt = cfg.internal()
    report = check_validity(gw, atom, wt)
    write_json(out / "validity.json", report.as_dict())
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'WARN'} {c.name} = {c.value:.6g} ({c.kind} {c.threshold:g})")
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "fisher": cmd_fisher,
    "feasibility": cmd_feasibility,
    "verify": cmd_verify,
    "montecarlo": cmd_montecarlo,
    "validate-params": cmd_validate,
}


def main(argv=None, environ=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args, environ)
        out = Path(cfg.run_out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            print(f"error: cannot create output directory {out}: {exc}", file=sys.stderr)
            return 3
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
