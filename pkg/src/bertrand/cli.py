"""Command-line front end: ``bertrand {simulate,verify,sweep,catalog}``.

Exit codes: 0 success (warnings allowed), 1 verification failure,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import logging
import math
import platform
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import scipy

from . import __version__
from .dynamics import IntegratorSettings, PhaseState, conserved, integrate
from .errors import BertrandError, ConfigError, StepFailure
from .orbits import (
    OrbitClass,
    apsidal_angle,
    chi,
    classify_orbit,
    fit_phi0,
    orbit_residual,
    radial_period,
    rrdot_series,
    state_from_constants,
    theta,
    turning_points,
)
from .runge_lenz import (
    branch_tracking,
    chebyshev_T,
    chebyshev_U,
    runge_lenz_series,
    tensor_series,
)
from .spaces import CATALOG, BertrandParams, example_catalog

log = logging.getLogger("bertrand")

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

CSV_HEADER = ["t", "q1", "q2", "q3", "p1", "p2", "p3", "r", "phi_unwrapped", "k",
              "E", "J2", "A1", "A2", "A3"]

# verification bounds; every report row carries the one it was judged against
BOUNDS = {
    "energy_drift": 1e-10,
    "angular_momentum_drift": 1e-10,
    "orbit_residual": 1e-6,
    "chi_theta_unit": 1e-7,
    "runge_lenz_norm": 1e-9,
    "runge_lenz_drift": 1e-6,
    "tensor_drift": 1e-6,
    "tensor_drift_high_order": 1e-5,
    "apsidal_angle": 1e-5,
}


@dataclass(frozen=True)
class InitialSpec:
    E: float
    J2: float
    r: Optional[float] = None
    inward: bool = True


@dataclass(frozen=True)
class RunConfig:
    params: BertrandParams
    initial: Union[PhaseState, InitialSpec]
    t_end: Optional[float] = None
    n_periods: Optional[float] = None
    rtol: float = 1e-12
    atol: float = 1e-12
    n_samples: int = 2001
    out: Optional[str] = None
    grid: Optional[dict] = None
    seed: int = 0
    raw: dict = field(default_factory=dict, compare=False, repr=False)


# --------------------------------------------------------------------------
# configuration


def _number(cfg, key, default=None, positive=False):
    if key not in cfg or cfg[key] is None:
        if default is None:
            return None
        return default
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(key, f"expected a number, got {val!r}")
    val = float(val)
    if not math.isfinite(val):
        raise ConfigError(key, "must be finite")
    if positive and val <= 0:
        raise ConfigError(key, "must be positive")
    return val


def _params_from(cfg) -> BertrandParams:
    fam = cfg.get("family")
    if fam not in ("type1", "type2"):
        raise ConfigError("family", f"expected 'type1' or 'type2', got {fam!r}")
    kw = {}
    for key in ("n", "m"):
        val = cfg.get(key, 1 if (key == "m" or fam == "type1") else 2)
        if isinstance(val, bool) or not isinstance(val, (int, float)) or int(val) != val or val < 1:
            raise ConfigError(key, f"expected a positive integer, got {val!r}")
        kw[key] = int(val)
    for key, default in (("K", 0.0), ("G", 0.0), ("amplitude", 1.0)):
        kw[key] = _number(cfg, key, default)
    if fam == "type2":
        kw["D"] = _number(cfg, "D", 0.0)
        br = cfg.get("branch", 1)
        if br not in (1, -1):
            raise ConfigError("branch", f"expected +1 or -1, got {br!r}")
        kw["branch"] = br
    if math.gcd(kw["n"], kw["m"]) != 1:
        raise ConfigError("n", f"n={kw['n']} and m={kw['m']} must be coprime")
    if kw["amplitude"] == 0:
        raise ConfigError("amplitude", "must be nonzero")
    try:
        params = BertrandParams(fam, **kw)
        params.domain
    except BertrandError as exc:
        raise ConfigError("family", str(exc)) from exc
    return params


def _initial_from(cfg):
    init = cfg.get("initial")
    if not isinstance(init, dict):
        raise ConfigError("initial", "missing or not an object")
    has_state = "q" in init or "p" in init
    has_consts = "E" in init or "J2" in init
    if has_state == has_consts:
        raise ConfigError("initial", "give exactly one of {q, p} or {E, J2, r, inward}")
    if has_state:
        vecs = []
        for key in ("q", "p"):
            v = init.get(key)
            if (not isinstance(v, list) or len(v) != 3
                    or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
                raise ConfigError(f"initial.{key}", "expected a list of three numbers")
            vecs.append(v)
        return PhaseState(*vecs)
    E = _number(init, "E")
    J2 = _number(init, "J2")
    if E is None:
        raise ConfigError("initial.E", "missing")
    if J2 is None or J2 < 0:
        raise ConfigError("initial.J2", "missing or negative")
    r = _number(init, "r", positive=True) if "r" in init else None
    inward = init.get("inward", True)
    if not isinstance(inward, bool):
        raise ConfigError("initial.inward", "expected true or false")
    return InitialSpec(E, J2, r, inward)


def parse_config(cfg: dict) -> RunConfig:
    """Validate a configuration mapping; raises :class:`ConfigError`."""
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be an object")
    params = _params_from(cfg)
    initial = _initial_from(cfg) if "grid" not in cfg or "initial" in cfg else None
    if "t_end" in cfg and "n_periods" in cfg:
        raise ConfigError("t_end", "give either t_end or n_periods, not both")
    t_end = _number(cfg, "t_end", positive=True)
    n_periods = _number(cfg, "n_periods")
    if n_periods is not None and n_periods < 0:
        raise ConfigError("n_periods", "must be nonnegative")
    if t_end is None and n_periods is None:
        n_periods = 10.0
    rtol = _number(cfg, "rtol", 1e-12, positive=True)
    atol = _number(cfg, "atol", 1e-12, positive=True)
    n_samples = cfg.get("n_samples", 2001)
    if isinstance(n_samples, bool) or not isinstance(n_samples, int) or n_samples < 2:
        raise ConfigError("n_samples", "expected an integer >= 2")
    out = cfg.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("out", "expected a path string")
    grid = cfg.get("grid")
    if grid is not None:
        _grid_axes(grid)
    seed = cfg.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed", "expected an integer")
    return RunConfig(params, initial, t_end, n_periods, rtol, atol, n_samples, out, grid, seed, cfg)


def _grid_axes(grid):
    if not isinstance(grid, dict):
        raise ConfigError("grid", "expected an object with E and J2 axes")
    axes = {}
    for key in ("E", "J2"):
        spec = grid.get(key)
        if isinstance(spec, list) and spec and all(isinstance(x, (int, float)) for x in spec):
            axes[key] = [float(x) for x in spec]
        elif isinstance(spec, dict) and {"start", "stop", "num"} <= set(spec):
            num = spec["num"]
            if not isinstance(num, int) or num < 1:
                raise ConfigError(f"grid.{key}.num", "expected a positive integer")
            axes[key] = [float(x) for x in np.linspace(spec["start"], spec["stop"], num)]
        else:
            raise ConfigError(f"grid.{key}", "expected a list or {start, stop, num}")
    return axes


def _set_dotted(cfg, key, value):
    parts = key.split(".")
    node = cfg
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(key, "cannot override inside a non-object value")
    node[parts[-1]] = value


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def assemble_config(args) -> dict:
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config", "top level must be an object")
    if getattr(args, "example", None):
        cfg.update(_example_params(args))
    _apply_run_flags(cfg, args)
    for item in getattr(args, "override", None) or []:
        if "=" not in item:
            raise ConfigError("override", f"expected KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        _set_dotted(cfg, key.strip(), _parse_value(val))
    if getattr(args, "out_dir", None):
        cfg["out"] = args.out_dir
    return cfg


def _apply_run_flags(cfg, args):
    for key in ("rtol", "atol", "seed"):
        if getattr(args, key, None) is not None:
            cfg[key] = getattr(args, key)
    for key, other in (("t_end", "n_periods"), ("n_periods", "t_end")):
        if getattr(args, key, None) is not None:
            cfg[key] = getattr(args, key)
            cfg.pop(other, None)
    energy, j2 = getattr(args, "energy", None), getattr(args, "j2", None)
    if energy is not None or j2 is not None:
        init = {"E": energy, "J2": j2, "inward": not getattr(args, "outward", False)}
        if getattr(args, "r_start", None) is not None:
            init["r"] = args.r_start
        cfg["initial"] = {k: v for k, v in init.items() if v is not None}


def _example_params(args) -> dict:
    kwargs = {"attractive": args.attractive}
    name = args.example
    if name == "constant-curvature":
        kwargs.update(kappa=args.kappa, kind=args.kind)
    elif name == "darboux-iii":
        kwargs["k"] = args.k
    elif name == "multifold-kepler":
        kwargs.update(a=args.a, b=args.b, n=args.n, m=args.m)
    try:
        ex = example_catalog(name, **kwargs)
    except BertrandError as exc:
        raise ConfigError("example", str(exc)) from exc
    return ex.params.as_dict()


# --------------------------------------------------------------------------
# commands


def _initial_state(config: RunConfig) -> PhaseState:
    init = config.initial
    if isinstance(init, PhaseState):
        return init
    params = config.params
    r = init.r
    if r is None:
        try:
            tp = turning_points(params, init.E, init.J2)
        except BertrandError as exc:
            raise ConfigError("initial", str(exc)) from exc
        if not tp.count:
            raise ConfigError("initial.r", "no turning radius to start from; give r")
        r = tp.radii[0]
    try:
        return state_from_constants(params, init.E, init.J2, r, init.inward)
    except BertrandError as exc:
        raise ConfigError("initial", str(exc)) from exc


def _settings(config: RunConfig) -> IntegratorSettings:
    return IntegratorSettings(rtol=config.rtol, atol=config.atol, n_samples=config.n_samples)


def _duration(config: RunConfig, state0: PhaseState):
    if config.t_end is not None:
        return config.t_end
    if config.n_periods == 0:
        return 0.0
    cs = conserved(config.params, state0)
    cls = classify_orbit(config.params, cs.E, cs.J2)
    if cls is not OrbitClass.BOUNDED_PERIODIC:
        raise ConfigError("n_periods", f"needs a bounded orbit, this one is {cls.value}")
    return config.n_periods * radial_period(config.params, cs.E, cs.J2)


def _versions():
    return {
        "bertrand": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def _safe_phi0(params, tr):
    try:
        return fit_phi0(params, tr).phi0
    except BertrandError:
        return 0.0


def trajectory_rows(params, tr):
    """CSV rows for a trajectory; A is NaN where it is undefined."""
    phi0 = _safe_phi0(params, tr)
    covers = branch_tracking(tr)
    try:
        A = runge_lenz_series(params, tr, phi0)
    except BertrandError:
        A = np.full((len(tr), 3), np.nan)
    rows = []
    for i in range(len(tr)):
        cs = conserved(params, tr.state(i))
        rows.append([tr.t[i], *tr.q[i], *tr.p[i], float(np.linalg.norm(tr.q[i])),
                     tr.phi_unwrapped[i], covers[i].k, cs.E, cs.J2, *A[i]])
    return rows


def _fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_trajectory_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _summary(params, state0, tr):
    cs = conserved(params, state0)
    cls = classify_orbit(params, cs.E, cs.J2)
    out = {
        "params": params.as_dict(),
        "E": cs.E,
        "L": [float(x) + 0.0 for x in cs.L],
        "J2": cs.J2,
        "classification": cls.value,
        "status": tr.status if tr is not None else "empty",
        "n_samples": len(tr) if tr is not None else 0,
        "apsidal_angle": None,
        "apsidal_expected": math.pi * params.m / params.n,
    }
    if tr is not None and cls is OrbitClass.BOUNDED_PERIODIC:
        try:
            ap = apsidal_angle(tr)
            out["apsidal_angle"] = ap.angle
            out["apsidal_uncertainty"] = ap.uncertainty
        except BertrandError:
            pass
    return out


def cmd_simulate(config: RunConfig, out_dir=None) -> dict:
    """Integrate one trajectory, write ``trajectory.csv`` and ``summary.json``."""
    params = config.params
    state0 = _initial_state(config)
    t_end = _duration(config, state0)
    tr = None
    if t_end > 0:
        tr = integrate(params, state0, t_end, _settings(config))
        if tr.chart_exit:
            log.warning("trajectory left the chart at t=%.6g", tr.t[-1])
    summary = _summary(params, state0, tr)
    out_dir = Path(out_dir or config.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out_dir / "trajectory.csv", trajectory_rows(params, tr) if tr else [])
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def _check(name, value, bound, skipped=None):
    if skipped:
        return {"name": name, "value": None, "bound": bound, "pass": True, "skipped": skipped}
    ok = value is not None and math.isfinite(value) and value <= bound
    return {"name": name, "value": value, "bound": bound, "pass": bool(ok)}


def verification_checks(params, tr) -> list:
    """Run the full check battery on one trajectory."""
    checks = []
    states = [tr.state(i) for i in range(len(tr))]
    sets = [conserved(params, s) for s in states]
    E0, L0 = sets[0].E, sets[0].L
    e_drift = max(abs(c.E - E0) for c in sets) / max(1.0, abs(E0))
    l_drift = max(float(np.max(np.abs(c.L - L0))) for c in sets)
    checks.append(_check("energy_drift", e_drift, BOUNDS["energy_drift"]))
    checks.append(_check("angular_momentum_drift", l_drift, BOUNDS["angular_momentum_drift"]))

    J2 = sets[0].J2
    radial = J2 == 0.0 or classify_orbit(params, E0, J2) is OrbitClass.RADIAL
    try:
        consts = fit_phi0(params, tr)
        checks.append(_check("orbit_residual", orbit_residual(params, tr, consts),
                             BOUNDS["orbit_residual"]))
        r2 = np.einsum("ij,ij->i", tr.q, tr.q)
        c = np.asarray(chi(params, r2, J2, E0))
        s = np.asarray(theta(params, rrdot_series(params, tr), r2, math.sqrt(J2), E0))
        unit = float(np.max(np.abs(c * c + s * s - 1.0)))
        cheb = float(np.max(np.abs(chebyshev_T(params.m, c) ** 2
                                   + (s * chebyshev_U(params.m - 1, c)) ** 2 - 1.0)))
        checks.append(_check("chi_theta_unit", max(unit, cheb), BOUNDS["chi_theta_unit"]))
        phi0 = consts.phi0
    except BertrandError as exc:
        checks.append(_check("orbit_residual", math.inf, BOUNDS["orbit_residual"]))
        log.warning("orbit checks failed: %s", exc)
        phi0 = None

    if phi0 is not None:
        try:
            A = runge_lenz_series(params, tr, phi0)
        except BertrandError as exc:
            log.warning("Runge-Lenz evaluation failed: %s", exc)
            A = None
    else:
        A = None
    rl_names = ("runge_lenz_norm", "runge_lenz_drift")
    tensor_bound = BOUNDS["tensor_drift"] if params.n <= 2 else BOUNDS["tensor_drift_high_order"]
    if radial:
        for name in rl_names:
            checks.append(_check(name, None, BOUNDS[name], skipped="radial"))
        checks.append(_check("tensor_drift", None, tensor_bound, skipped="radial"))
    elif A is None:
        for name in rl_names:
            checks.append(_check(name, math.inf, BOUNDS[name]))
        checks.append(_check("tensor_drift", math.inf, tensor_bound))
    else:
        checks.append(_check("runge_lenz_norm",
                             float(np.max(np.abs(np.linalg.norm(A, axis=1) - 1.0))),
                             BOUNDS["runge_lenz_norm"]))
        checks.append(_check("runge_lenz_drift", float(np.max(np.abs(A - A[0]))),
                             BOUNDS["runge_lenz_drift"]))
        try:
            T = tensor_series(params, tr, phi0)
            checks.append(_check("tensor_drift", float(np.max(np.abs(T - T[0]))), tensor_bound))
        except BertrandError as exc:
            checks.append(_check("tensor_drift", None, tensor_bound, skipped=str(exc)))

    cls = OrbitClass.RADIAL if radial else classify_orbit(params, E0, J2)
    if cls is OrbitClass.BOUNDED_PERIODIC:
        try:
            ap = apsidal_angle(tr)
            err = abs(ap.angle - math.pi * params.m / params.n)
            checks.append(_check("apsidal_angle", err, BOUNDS["apsidal_angle"]))
        except BertrandError as exc:
            checks.append(_check("apsidal_angle", None, BOUNDS["apsidal_angle"], skipped=str(exc)))
    else:
        checks.append(_check("apsidal_angle", None, BOUNDS["apsidal_angle"],
                             skipped=cls.value.lower()))
    return checks


def cmd_verify(config: RunConfig, out_dir=None) -> dict:
    """Integrate and run every check; returns the report dictionary."""
    params = config.params
    state0 = _initial_state(config)
    t_end = _duration(config, state0)
    if not t_end > 0:
        raise ConfigError("t_end", "verification needs a positive duration")
    tr = integrate(params, state0, t_end, _settings(config))
    checks = verification_checks(params, tr)
    report = {
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
        "params": params.as_dict(),
        "status": tr.status,
        "settings": {"rtol": config.rtol, "atol": config.atol, "t_end": t_end,
                     "n_samples": config.n_samples},
        "versions": _versions(),
    }
    out_dir = out_dir or config.out
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    return report


def _sweep_cell(task):
    params_dict, E, J2, rtol, atol, n_periods, n_samples = task
    params = BertrandParams(**params_dict)
    row = {"E": E, "J2": J2, "class": None, "apsidal": None, "apsidal_error": None,
           "energy_drift": None, "angular_momentum_drift": None, "closure": None,
           "error": None, "bound": BOUNDS["apsidal_angle"]}
    try:
        cls = classify_orbit(params, E, J2)
        row["class"] = cls.value
        if cls is OrbitClass.BOUNDED_PERIODIC:
            state0 = state_from_constants(params, E, J2, turning_points(params, E, J2).radii[0])
            T = radial_period(params, E, J2)
            tr = integrate(params, state0, n_periods * T,
                           IntegratorSettings(rtol=rtol, atol=atol, n_samples=n_samples))
            ap = apsidal_angle(tr)
            row["apsidal"] = ap.angle
            row["apsidal_error"] = abs(ap.angle - math.pi * params.m / params.n)
            sets = [conserved(params, tr.state(i)) for i in range(len(tr))]
            row["energy_drift"] = max(abs(c.E - sets[0].E) for c in sets) / max(1.0, abs(sets[0].E))
            row["angular_momentum_drift"] = max(
                float(np.max(np.abs(c.L - sets[0].L))) for c in sets)
            # azimuth 2 pi m is reached after n radial periods
            if n_periods >= params.n:
                end = tr.state_at(params.n * T)
                row["closure"] = float(np.linalg.norm(end.as_array() - state0.as_array()))
    except BertrandError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(config: RunConfig, jobs: int = 1, out_dir=None, n_periods: Optional[float] = None):
    """Classification and apsidal table over an ``(E, J2)`` grid."""
    if config.grid is None:
        raise ConfigError("grid", "sweep needs a grid with E and J2 axes")
    axes = _grid_axes(config.grid)
    periods = n_periods if n_periods is not None else max(2.0, float(config.params.n))
    if config.n_periods is not None and "n_periods" in config.raw:
        periods = max(config.n_periods, 2.0)
    tasks = [(config.params.as_dict(), E, J2, config.rtol, config.atol, periods, config.n_samples)
             for E in axes["E"] for J2 in axes["J2"]]
    random.Random(config.seed).shuffle(tasks)
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_cell, tasks))
    else:
        rows = [_sweep_cell(t) for t in tasks]
    rows.sort(key=lambda row: (row["E"], row["J2"]))
    for row in rows:
        row["params"] = config.params.as_dict()
    report = {"params": config.params.as_dict(), "expected_apsidal":
              math.pi * config.params.m / config.params.n, "rows": rows,
              "versions": _versions()}
    out_dir = out_dir or config.out
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "sweep.json").write_text(json.dumps(report, indent=2) + "\n")
        keys = ["E", "J2", "class", "apsidal", "apsidal_error", "bound", "energy_drift",
                "angular_momentum_drift", "closure", "error"]
        with open(Path(out_dir) / "sweep.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(keys)
            for row in rows:
                w.writerow(["" if row[k] is None else (_fmt(row[k]) if isinstance(row[k], float)
                                                       else row[k]) for k in keys])
    return report


def cmd_catalog() -> list:
    """Named examples with their parameter identifications."""
    entries = []
    defaults = {
        "constant-curvature": [{"kappa": 0.0, "kind": "kepler"},
                               {"kappa": 0.0, "kind": "oscillator"}],
        "darboux-iii": [{"k": 1.0}],
        "multifold-kepler": [{"a": 1.0, "b": 1.0, "n": 2, "m": 1}],
    }
    for name, (_, description) in CATALOG.items():
        for kw in defaults[name]:
            ex = example_catalog(name, **kw)
            entries.append({"name": name, "arguments": ex.arguments,
                            "identification": ex.identification,
                            "params": ex.params.as_dict(), "description": description})
    return entries


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--example", metavar="NAME", choices=sorted(CATALOG),
                        help="take family parameters from a catalogued example")
    common.add_argument("--override", metavar="KEY=VALUE", action="append", default=[],
                        help="set a (dotted) config key; VALUE is parsed as JSON")
    common.add_argument("--out-dir", metavar="PATH")
    common.add_argument("--jobs", type=int, default=1, metavar="N")
    common.add_argument("--kappa", type=float, default=0.0)
    common.add_argument("--kind", choices=("kepler", "oscillator"), default="kepler")
    common.add_argument("--k", type=float, default=1.0, help="Darboux III parameter")
    common.add_argument("--a", type=float, default=1.0)
    common.add_argument("--b", type=float, default=1.0)
    common.add_argument("--n", type=int, default=2)
    common.add_argument("--m", type=int, default=1)
    common.add_argument("--attractive", action="store_true",
                        help="negate the potential amplitude")
    run = common.add_argument_group("run settings (override the config file)")
    run.add_argument("--t-end", type=float, metavar="T")
    run.add_argument("--n-periods", type=float, metavar="N")
    run.add_argument("--rtol", type=float)
    run.add_argument("--atol", type=float)
    run.add_argument("--seed", type=int)
    run.add_argument("--energy", type=float, metavar="E")
    run.add_argument("--j2", type=float, metavar="J2", help="squared angular momentum")
    run.add_argument("--r-start", type=float, metavar="R")
    run.add_argument("--outward", action="store_true", help="start with outward radial momentum")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bertrand", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="integrate one trajectory")
    sub.add_parser("verify", parents=[common], help="run the verification battery")
    sub.add_parser("sweep", parents=[common], help="classify an (E, J2) grid")
    cat = sub.add_parser("catalog", help="list named examples")
    cat.add_argument("--json", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    if args.command == "catalog":
        entries = cmd_catalog()
        if args.json:
            print(json.dumps(entries, indent=2))
        else:
            for e in entries:
                print(f"{e['name']:<20} {json.dumps(e['arguments'])}")
                print(f"    {e['identification']}")
                print(f"    {e['description']}")
        return EXIT_OK
    try:
        config = parse_config(assemble_config(args))
        if args.command == "simulate":
            summary = cmd_simulate(config)
            print(json.dumps(summary, indent=2))
            return EXIT_OK
        if args.command == "verify":
            report = cmd_verify(config)
            print(json.dumps(report, indent=2))
            return EXIT_OK if report["pass"] else EXIT_VERIFY
        report = cmd_sweep(config, jobs=max(1, args.jobs))
        print(json.dumps(report, indent=2))
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepFailure, BertrandError, ArithmeticError) as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
