"""Closed-form orbit equations, turning points, apsidal angles, classification.

Every orbit in the invariant plane satisfies

    cos(n phi / m - phi0) = chi(r^2, J^2, E)

where, writing ``a`` for the potential amplitude and ``s`` for the type II
branch sign,

* type I:  ``chi = (a + J^2 u) / sqrt(a^2 + 2 J^2 (E - G) + K J^4)``,
  ``u = sqrt(r^-2 + K)``
* type II: ``chi = (J^2 (v + D) + 2G - 2E) / sqrt((2E - 2G - D J^2)^2 + 4 s a J^2 - K J^4)``,
  ``v = r^-2 (1 - D r^2 + s sqrt((1 - D r^2)^2 - K r^4))``

With ``a = +1`` these are the classical expressions; the amplitude is
carried through so that attractive potentials (``a = -1``) are covered too.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq

from .dynamics import (
    IntegratorSettings,
    PhaseState,
    Trajectory,
    conserved,
    integrate,
    velocity_map,
    _radial_kernel,
)
from .errors import (
    DegenerateOrbit,
    InsufficientData,
    InsufficientTurningPoints,
    NoSolution,
    RadialOrbit,
)
from .spaces import BertrandParams, potential, metric_coeff

log = logging.getLogger(__name__)

__all__ = [
    "OrbitConstants",
    "TurningPoints",
    "OrbitClass",
    "ApsidalMeasurement",
    "chi",
    "chi_d1",
    "theta",
    "orbit_residual",
    "fit_phi0",
    "turning_points",
    "solve_r_of_phi",
    "apsidal_angle",
    "classify_orbit",
    "radial_period",
    "state_from_constants",
    "bounded_state",
    "closure_distance",
    "rrdot_series",
]


@dataclass(frozen=True)
class OrbitConstants:
    E: float
    J2: float
    phi0: float = 0.0


class TurningPoints(NamedTuple):
    substitution_values: tuple
    radii: tuple
    count: int


class OrbitClass(str, enum.Enum):
    BOUNDED_PERIODIC = "BoundedPeriodic"
    CHART_ESCAPING = "ChartEscaping"
    CIRCULAR = "Circular"
    RADIAL = "Radial"
    EMPTY = "Empty"


class ApsidalMeasurement(NamedTuple):
    angle: float
    uncertainty: float
    count: int


# --------------------------------------------------------------------------
# chi and friends


def _w2(params: BertrandParams, J2, E):
    a, G, K = params.amplitude, params.G, params.K
    if params.is_type1:
        return a * a + 2.0 * J2 * (E - G) + K * J2 * J2
    D, s = params.D, params.branch
    return (2.0 * E - 2.0 * G - D * J2) ** 2 + 4.0 * s * a * J2 - K * J2 * J2


def _w2_scale(params, J2, E):
    a, G, K = params.amplitude, params.G, params.K
    if params.is_type1:
        return a * a + abs(2.0 * J2 * (E - G)) + abs(K) * J2 * J2
    D = params.D
    return (abs(2.0 * E - 2.0 * G) + abs(D) * J2) ** 2 + 4.0 * abs(a) * J2 + abs(K) * J2 * J2


def _w(params, J2, E):
    w2 = _w2(params, J2, E)
    if not w2 > 0:
        raise DegenerateOrbit(
            f"square-root argument {w2:.3e} <= 0: no (non-circular) orbit with E={E}, J2={J2}"
        )
    return math.sqrt(w2)


def _subst_parts(params, r2):
    """Substitution variable and its auxiliary radical for an ``r^2`` array."""
    r2 = np.asarray(r2, dtype=float)
    if params.is_type1:
        return np.sqrt(1.0 / r2 + params.K), None
    D, K, s = params.D, params.K, params.branch
    x = 1.0 / r2
    w = np.sqrt((x - D) ** 2 - K)
    return x - D + s * w, w


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def chi(params: BertrandParams, r2, J2, E):
    """Right-hand side of the orbit equation, ``cos(n phi / m - phi0)``."""
    W = _w(params, J2, E)
    sub, _ = _subst_parts(params, r2)
    if params.is_type1:
        return _out((params.amplitude + J2 * sub) / W)
    return _out((J2 * (sub + params.D) + 2.0 * params.G - 2.0 * E) / W)


def chi_d1(params: BertrandParams, r2, J2, E):
    """Partial derivative of :func:`chi` with respect to ``r^2``."""
    W = _w(params, J2, E)
    r2 = np.asarray(r2, dtype=float)
    sub, w = _subst_parts(params, r2)
    if params.is_type1:
        return _out(-J2 / (2.0 * r2 * r2 * sub * W))
    return _out(-J2 * sub / (params.branch * w * r2 * r2 * W))


def theta(params: BertrandParams, rrdot, r2, J, E):
    """``sin(n phi / m - phi0)`` from ``r rdot``, ``r^2``, ``J`` and ``E``.

    Equal to ``-2 rrdot (m r^2 / (n J)) chi_d1`` but evaluated with the
    ``1/J`` cancelled against the ``J^2`` inside ``chi_d1``, so ``J = 0``
    gives exactly zero.
    """
    J = float(J)
    W = _w(params, J * J, E)
    rrdot = np.asarray(rrdot, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    ratio = params.m / params.n
    sub, w = _subst_parts(params, r2)
    if params.is_type1:
        return _out(rrdot * ratio * J / (r2 * sub * W))
    return _out(2.0 * rrdot * ratio * J * sub / (params.branch * w * r2 * W))


def rrdot_series(params: BertrandParams, trajectory: Trajectory) -> np.ndarray:
    """``r rdot = q . v(q, p)`` at every sample."""
    q, p = trajectory.q, trajectory.p
    r2 = np.einsum("ij,ij->i", q, q)
    ih2 = np.array([_radial_kernel(params)(math.sqrt(x))[0] for x in r2])
    # q.v = q.p + (h^-2 - 1) q.p = h^-2 q.p
    return ih2 * np.einsum("ij,ij->i", q, p)


# --------------------------------------------------------------------------
# residuals and phase fitting


def orbit_residual(params: BertrandParams, trajectory: Trajectory,
                   constants: OrbitConstants) -> float:
    """Max over samples of ``|cos(n phi / m - phi0) - chi(r^2, J^2, E)|``.

    Returns ``inf`` (and logs why) if the constants admit no orbit.
    """
    r2 = np.einsum("ij,ij->i", trajectory.q, trajectory.q)
    try:
        rhs = chi(params, r2, constants.J2, constants.E)
    except DegenerateOrbit as exc:
        log.warning("orbit_residual: %s", exc)
        return math.inf
    lhs = np.cos(params.n * trajectory.phi_unwrapped / params.m - constants.phi0)
    res = np.abs(lhs - rhs)
    if not np.all(np.isfinite(res)):
        log.warning("orbit_residual: non-finite chi along trajectory")
        return math.inf
    return float(res.max())


def fit_phi0(params: BertrandParams, trajectory: Trajectory) -> OrbitConstants:
    """Orbit constants of a trajectory with ``phi0`` fitted in closed form.

    Each sample gives ``n phi / m - phi0 = atan2(Theta, chi)``; the circular
    mean of the per-sample estimates is returned.
    """
    if len(trajectory) == 0:
        raise InsufficientData("empty trajectory")
    cs = conserved(params, trajectory.state(0))
    E, J2 = cs.E, cs.J2
    r2 = np.einsum("ij,ij->i", trajectory.q, trajectory.q)
    c = np.asarray(chi(params, r2, J2, E))
    s = np.asarray(theta(params, rrdot_series(params, trajectory), r2, math.sqrt(J2), E))
    est = params.n * trajectory.phi_unwrapped / params.m - np.arctan2(s, c)
    z = np.mean(np.exp(1j * est))
    if abs(z) < 1e-12:
        raise InsufficientData("phase estimates cancel; cannot fit phi0")
    return OrbitConstants(E, J2, float(np.angle(z)))


# --------------------------------------------------------------------------
# turning points and inversion


def _radius_from_substitution(params, value):
    """Radius whose substitution variable equals ``value``, or ``None``."""
    if params.is_type1:
        if value < 0:
            return None
        x = value * value - params.K
    else:
        if value == 0:
            return None
        x = (value * value + 2.0 * params.D * value + params.K) / (2.0 * value)
    if not (x > 0 and math.isfinite(x)):
        return None
    r = 1.0 / math.sqrt(x)
    dom = params.domain
    tol = 1e-12 * r
    if r < dom.r_lo - tol or r > dom.r_hi + tol:
        return None
    if not params.is_type1:
        # the inverse formula is shared by both branches; keep the right one
        back, _ = _subst_parts(params, r * r)
        back = float(back)
        if not math.isfinite(back) or abs(back - value) > 1e-8 * max(1.0, abs(value)):
            return None
    return r


def turning_points(params: BertrandParams, E: float, J2: float) -> TurningPoints:
    """Roots of the radial quadratic in the substitution variable.

    Roots that do not correspond to a radius of the closed radial domain on
    the selected branch are dropped.
    """
    a, G = params.amplitude, params.G
    if J2 == 0:
        if params.is_type1:
            roots = [(E - G) / a]
        else:
            roots = [-params.branch * a / (E - G)] if E != G else []
    else:
        w2 = _w2(params, J2, E)
        if w2 < 0:
            raise DegenerateOrbit(f"negative discriminant {w2:.3e}: empty orbit")
        W = math.sqrt(w2)
        if params.is_type1:
            centre = -a / J2
        else:
            centre = (2.0 * (E - G) - params.D * J2) / J2
        roots = [centre - W / J2, centre + W / J2] if W > 0 else [centre]
    pairs = []
    for val in roots:
        r = _radius_from_substitution(params, val)
        if r is not None:
            pairs.append((r, val))
    pairs.sort()
    return TurningPoints(tuple(v for _, v in pairs), tuple(r for r, _ in pairs), len(pairs))


def _r_of_cos(params, E, J2, c):
    """Vectorised inversion of ``chi = c``; NaN where there is no solution."""
    W = _w(params, J2, E)
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if params.is_type1:
        vals = (c * W - params.amplitude) / J2
    else:
        vals = (c * W + 2.0 * (E - params.G)) / J2 - params.D
    out = np.full(c.shape, np.nan)
    for i, val in enumerate(vals):
        r = _radius_from_substitution(params, float(val))
        if r is not None:
            out[i] = r
    return out


def solve_r_of_phi(params: BertrandParams, constants: OrbitConstants, phi: float) -> float:
    """Radius on the orbit at azimuth ``phi``; raises :class:`NoSolution`."""
    if constants.J2 == 0:
        raise RadialOrbit("the azimuth is constant on radial orbits")
    c = math.cos(params.n * phi / params.m - constants.phi0)
    r = _r_of_cos(params, constants.E, constants.J2, c)[0]
    if not math.isfinite(r):
        raise NoSolution(f"cos(n phi/m - phi0) = {c:.6g} is not attained on this orbit")
    return float(r)


def radial_period(params: BertrandParams, E: float, J2: float, samples: int = 4096) -> float:
    """Time between consecutive pericentres of a bounded orbit.

    Uses ``d(n phi/m)/dt = n J / (m r^2)`` and the closed-form ``r(phi)``;
    the integrand is smooth and periodic, so the trapezoid rule converges
    geometrically.
    """
    if J2 <= 0:
        raise RadialOrbit("radial period via the orbit equation needs J > 0")
    psi = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    r = _r_of_cos(params, E, J2, np.cos(psi))
    if not np.all(np.isfinite(r)):
        raise NoSolution("orbit leaves the chart; no radial period")
    return float(params.m / (params.n * math.sqrt(J2)) * 2.0 * math.pi * np.mean(r * r))


def classify_orbit(params: BertrandParams, E: float, J2: float) -> OrbitClass:
    if J2 == 0:
        return OrbitClass.RADIAL
    try:
        tp = turning_points(params, E, J2)
    except DegenerateOrbit:
        return OrbitClass.EMPTY
    if abs(_w2(params, J2, E)) < 1e-12 * _w2_scale(params, J2, E):
        return OrbitClass.CIRCULAR if tp.count else OrbitClass.EMPTY

    def allowed(r):
        try:
            return abs(chi(params, r * r, J2, E)) <= 1.0
        except DegenerateOrbit:
            return False

    if tp.count == 2:
        lo, hi = tp.radii
        if allowed(0.5 * (lo + hi)):
            return OrbitClass.BOUNDED_PERIODIC
        return OrbitClass.CHART_ESCAPING
    if tp.count == 1:
        return OrbitClass.CHART_ESCAPING
    dom = params.domain
    hi = dom.r_hi if math.isfinite(dom.r_hi) else max(dom.r_lo, 1.0) * 1e3
    probes = np.linspace(dom.r_lo, hi, 202)[1:-1]
    if any(allowed(float(r)) for r in probes):
        return OrbitClass.CHART_ESCAPING
    return OrbitClass.EMPTY


# --------------------------------------------------------------------------
# trajectory-level measurements


def _turning_events(params, trajectory):
    """Times and unwrapped azimuths of radial turning points."""
    r = trajectory.r
    if len(r) < 3 or (r.max() - r.min()) <= 1e-9 * r.mean():
        return []
    f = rrdot_series(params, trajectory)
    # samples sitting on a turning point to roundoff count as events as-is
    flat = np.abs(f) <= 1e-12 * np.max(np.abs(f))
    sign = np.where(flat, 0.0, np.sign(f))
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    t = trajectory.t
    events = [(float(t[k]), float(trajectory.phi_unwrapped[k])) for k in np.nonzero(flat)[0]]

    def vertex(i):
        # vertex of the parabola through three r(t) samples
        j = min(max(i, 1), len(t) - 2)
        tt, rr = t[j - 1:j + 2], r[j - 1:j + 2]
        cr = np.polyfit(tt - tt[1], rr, 2)
        te = tt[1] - cr[1] / (2.0 * cr[0])
        cphi = np.polyfit(tt - tt[1], trajectory.phi_unwrapped[j - 1:j + 2], 2)
        return te, float(np.polyval(cphi, te - tt[1]))

    def g(tt):
        y = trajectory.dense(tt)
        return float(velocity_map(params, y[:3], y[3:6]) @ y[:3])

    for i in idx:
        if trajectory.dense is None:
            events.append(vertex(i))
            continue
        # the interpolant can disagree in sign with the stored samples when
        # r rdot is at roundoff level; widen once, then fall back
        for a, b in ((i, i + 1), (max(i - 1, 0), min(i + 2, len(t) - 1))):
            if g(t[a]) * g(t[b]) < 0:
                te = brentq(g, t[a], t[b], xtol=1e-14, rtol=1e-15)
                events.append((te, trajectory.phi_at(te)))
                break
        else:
            events.append(vertex(i))
    return sorted(events)


def apsidal_angle(trajectory: Trajectory) -> ApsidalMeasurement:
    """Azimuth swept between consecutive radial turning points.

    Returns the mean over all consecutive pairs with the spread as the
    uncertainty.  Needs at least two turning events.
    """
    events = _turning_events(trajectory.params, trajectory)
    if len(events) < 2:
        raise InsufficientTurningPoints(f"found {len(events)} radial turning events, need 2")
    phis = np.array([e[1] for e in events])
    d = np.diff(phis)
    spread = float(np.max(np.abs(d - d.mean()))) if len(d) > 1 else 0.0
    return ApsidalMeasurement(float(d.mean()), spread, len(events))


def state_from_constants(params: BertrandParams, E: float, J2: float, r: float,
                         inward: bool = True) -> PhaseState:
    """Planar state at radius ``r`` on the ``e1`` axis with energy ``E`` and ``J^2``.

    The radial momentum is solved from the energy relation; its sign is
    inward by default.
    """
    h2 = metric_coeff(params, r)
    V = potential(params, r)
    pr2 = h2 * (2.0 * (E - V) - J2 / (r * r))
    if pr2 < 0:
        if pr2 > -1e-12 * max(1.0, abs(E)):
            pr2 = 0.0
        else:
            raise NoSolution(f"E={E} is below the effective potential at r={r}")
    pr = math.sqrt(pr2) * (-1.0 if inward else 1.0)
    return PhaseState([r, 0.0, 0.0], [pr, math.sqrt(J2) / r, 0.0])


def bounded_state(params: BertrandParams, r_peri: float, r_apo: float):
    """Pericentre state of the orbit whose turning radii are ``r_peri < r_apo``.

    Returns ``(state, E, J2)``.  Raises :class:`NoSolution` if the potential
    does not increase from ``r_peri`` to ``r_apo`` (no such orbit).
    """
    V1, V2 = potential(params, r_peri), potential(params, r_apo)
    J2 = 2.0 * (V2 - V1) / (1.0 / r_peri ** 2 - 1.0 / r_apo ** 2)
    if not J2 > 0:
        raise NoSolution("potential does not increase between the requested radii")
    E = V1 + J2 / (2.0 * r_peri ** 2)
    return PhaseState([r_peri, 0.0, 0.0], [0.0, math.sqrt(J2) / r_peri, 0.0]), E, J2


def closure_distance(params: BertrandParams, state0: PhaseState,
                     settings: Optional[IntegratorSettings] = None) -> float:
    """Phase-space distance between ``state0`` and the state after ``n``
    radial periods (azimuth advance ``2 pi m``)."""
    cs = conserved(params, state0)
    T = radial_period(params, cs.E, cs.J2)
    tr = integrate(params, state0, params.n * T, settings, t_eval=[0.0, params.n * T])
    if tr.chart_exit:
        return math.inf
    end = np.concatenate([tr.q[-1], tr.p[-1]])
    return float(np.linalg.norm(end - state0.as_array()))
