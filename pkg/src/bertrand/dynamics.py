"""Hamiltonian flow on a Bertrand space in the global rectangular chart.

With ``r = |q|`` the Hamiltonian reads

    H = 1/2 (|p|^2 + (h(r)^-2 - 1) (q.p)^2 / r^2) + V(r)

whose kinetic term is position dependent, so the flow is integrated with an
adaptive explicit pair (DOP853) by default and an implicit midpoint rule as
the fixed-step symplectic alternative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, StepFailure
from .spaces import BertrandParams

__all__ = [
    "PhaseState",
    "ConservedSet",
    "IntegratorSettings",
    "Trajectory",
    "PlanarReduction",
    "hamiltonian",
    "eom",
    "velocity_map",
    "conserved",
    "rotate_to_plane",
    "plane_rotation",
    "integrate",
]


@dataclass(frozen=True)
class PhaseState:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.array(self.q, dtype=float).reshape(3))
        object.__setattr__(self, "p", np.array(self.p, dtype=float).reshape(3))

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.q))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_array(cls, y) -> "PhaseState":
        return cls(y[:3], y[3:6])

    def rotated(self, rotation) -> "PhaseState":
        return PhaseState(rotation @ self.q, rotation @ self.p)


class ConservedSet(NamedTuple):
    E: float
    L: np.ndarray
    J2: float


class PlanarReduction(NamedTuple):
    rotation: np.ndarray
    state: PhaseState
    radial: bool


@dataclass(frozen=True)
class IntegratorSettings:
    """Integrator configuration.

    ``method`` is ``"DOP853"`` (adaptive, order 8 with embedded 5/3 error
    estimators) or ``"implicit_midpoint"`` (symplectic, fixed ``step``).
    ``n_samples`` uniformly spaced output times are produced unless
    ``t_eval`` is given explicitly to :func:`integrate`.
    """

    rtol: float = 1e-12
    atol: float = 1e-12
    method: str = "DOP853"
    n_samples: int = 2001
    guard: float = 1e-9
    step: Optional[float] = None
    max_step: float = math.inf
    dense: bool = True

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.method not in ("DOP853", "implicit_midpoint"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class Trajectory:
    """Time-sampled integral curve with a continuous in-plane azimuth.

    ``phi_unwrapped`` is measured in the orbital plane selected by
    ``rotation`` (see :func:`plane_rotation`) and integrated alongside the
    flow, so it never jumps regardless of the sampling density.
    """

    params: BertrandParams
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    phi_unwrapped: np.ndarray
    rotation: np.ndarray
    settings: IntegratorSettings
    status: str = "ok"
    dense: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.t)

    def state(self, i) -> PhaseState:
        return PhaseState(self.q[i], self.p[i])

    @property
    def r(self) -> np.ndarray:
        return np.linalg.norm(self.q, axis=1)

    @property
    def chart_exit(self) -> bool:
        return self.status == "chart_exit"

    def state_at(self, t: float) -> PhaseState:
        """State at an arbitrary time from the dense interpolant."""
        if self.dense is None:
            raise ValueError("trajectory was integrated without dense output")
        y = self.dense(t)
        return PhaseState(y[:3], y[3:6])

    def phi_at(self, t: float) -> float:
        if self.dense is None:
            raise ValueError("trajectory was integrated without dense output")
        return float(self.dense(t)[6])


# --------------------------------------------------------------------------
# radial kernels in plain floats; the integrator calls these ~10^5 times


def _radial_kernel(params: BertrandParams):
    """Return ``f(r) -> (h^-2, d(h^-2)/dr, V, dV/dr)`` without domain checks."""
    scale = (params.n / params.m) ** 2
    K, G, amp = params.K, params.G, params.amplitude
    sqrt = math.sqrt
    if params.is_type1:
        def kernel(r):
            u = sqrt(1.0 / (r * r) + K)
            return scale * (1.0 + K * r * r), 2.0 * scale * K * r, amp * u + G, -amp / (r ** 3 * u)
        return kernel

    D, s = params.D, params.branch

    def kernel(r):
        r2 = r * r
        c = 1.0 - D * r2
        delta = c * c - K * r2 * r2
        sq = sqrt(delta)
        num = c + s * sq
        dc = -2.0 * D * r
        ddelta = 2.0 * c * dc - 4.0 * K * r2 * r
        dnum = dc + s * ddelta / (2.0 * sq)
        ih2 = 0.5 * scale * delta / num
        dih2 = 0.5 * scale * (ddelta * num - delta * dnum) / (num * num)
        v = num / r2
        w = sq / r2
        return ih2, dih2, G - s * amp / v, -2.0 * amp / (v * w * r2 * r)
    return kernel


def _require_domain(params, r):
    dom = params.domain
    if not (dom.r_lo < r < dom.r_hi) or not math.isfinite(r):
        raise DomainError(f"|q|={r} outside the radial domain ({dom.r_lo}, {dom.r_hi})")


def hamiltonian(params: BertrandParams, state: PhaseState) -> float:
    q, p = state.q, state.p
    r = float(np.linalg.norm(q))
    _require_domain(params, r)
    ih2, _, V, _ = _radial_kernel(params)(r)
    sigma = float(q @ p)
    return 0.5 * (float(p @ p) + (ih2 - 1.0) * sigma * sigma / (r * r)) + V


def velocity_map(params: BertrandParams, q, p) -> np.ndarray:
    """``qdot = p + (h^-2 - 1) (q.p / |q|^2) q``."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    # same operation order as the equations of motion, so the two agree bitwise
    r2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2]
    r = math.sqrt(r2)
    _require_domain(params, r)
    ih2 = _radial_kernel(params)(r)[0]
    sigma = q[0] * p[0] + q[1] * p[1] + q[2] * p[2]
    return p + ((ih2 - 1.0) / r2 * sigma) * q


def eom(params: BertrandParams, state: PhaseState):
    """Hamilton's equations; returns ``(dq/dt, dp/dt)``."""
    y = np.concatenate([state.q, state.p])
    _require_domain(params, float(np.linalg.norm(state.q)))
    dy = _make_rhs(params)(0.0, y)
    return dy[:3], dy[3:]


def _make_rhs(params, with_phase=False, rotation=None):
    kernel = _radial_kernel(params)
    sqrt = math.sqrt
    if rotation is not None:
        nz = rotation[2]
        nx, ny, nzz = float(nz[0]), float(nz[1]), float(nz[2])

    def rhs(t, y):
        q1, q2, q3, p1, p2, p3 = y[0], y[1], y[2], y[3], y[4], y[5]
        r2 = q1 * q1 + q2 * q2 + q3 * q3
        r = sqrt(r2)
        try:
            ih2, dih2, _, dV = kernel(r)
        except (ValueError, ZeroDivisionError):
            # trial stage outside the chart; NaN makes the solver reject the step
            return np.full(7 if with_phase else 6, np.nan)
        sigma = q1 * p1 + q2 * p2 + q3 * p3
        g = (ih2 - 1.0) / r2
        dg = dih2 / r2 - 2.0 * (ih2 - 1.0) / (r2 * r)
        gs = g * sigma
        radial = (0.5 * dg * sigma * sigma + dV) / r
        out = [
            p1 + gs * q1, p2 + gs * q2, p3 + gs * q3,
            -(gs * p1 + radial * q1), -(gs * p2 + radial * q2), -(gs * p3 + radial * q3),
        ]
        if with_phase:
            # angular velocity about the orbital normal: (q x p) . nhat / r^2
            lx = q2 * p3 - q3 * p2
            ly = q3 * p1 - q1 * p3
            lz = q1 * p2 - q2 * p1
            out.append((lx * nx + ly * ny + lz * nzz) / r2)
        return np.array(out)

    return rhs


def conserved(params: BertrandParams, state: PhaseState) -> ConservedSet:
    L = np.cross(state.q, state.p)
    return ConservedSet(hamiltonian(params, state), L, float(L @ L))


# --------------------------------------------------------------------------
# planar reduction


def _rotation_taking(a, b):
    """Proper rotation taking unit vector ``a`` onto unit vector ``b``."""
    v = np.cross(a, b)
    c = float(a @ b)
    s = float(np.linalg.norm(v))
    if s < 1e-15:
        if c > 0:
            return np.eye(3)
        # antiparallel: half-turn about any axis orthogonal to a
        axis = np.cross(a, [1.0, 0.0, 0.0])
        if np.linalg.norm(axis) < 1e-8:
            axis = np.cross(a, [0.0, 1.0, 0.0])
        axis /= np.linalg.norm(axis)
        return 2.0 * np.outer(axis, axis) - np.eye(3)
    k = v / s
    Kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + s * Kx + (1.0 - c) * (Kx @ Kx)


def plane_rotation(state: PhaseState):
    """Rotation sending ``L = q x p`` to ``+e3`` (or ``q`` to ``+e1`` if ``L = 0``).

    The result depends only on ``L`` when ``L != 0``, so it is constant along
    a trajectory.  Returns ``(rotation, radial_flag)``.
    """
    L = np.cross(state.q, state.p)
    nL = float(np.linalg.norm(L))
    scale = float(np.linalg.norm(state.q) * np.linalg.norm(state.p))
    if nL > 1e-14 * max(scale, 1e-300):
        return _rotation_taking(L / nL, np.array([0.0, 0.0, 1.0])), False
    q = state.q
    return _rotation_taking(q / np.linalg.norm(q), np.array([1.0, 0.0, 0.0])), True


def rotate_to_plane(state: PhaseState) -> PlanarReduction:
    """Rotate a state so that the motion lies in the plane ``q3 = 0``.

    The angular momentum ends up along ``+e3``, so the in-plane azimuth
    increases along the flow.  Radial states (``L = 0``) are rotated so that
    ``q`` lies on the ``+e1`` axis and flagged.
    """
    R, radial = plane_rotation(state)
    return PlanarReduction(R, state.rotated(R), radial)


# --------------------------------------------------------------------------
# integration


def _chart_events(params, guard):
    dom = params.domain
    lo = max(dom.r_lo * (1.0 + guard), guard)
    events = []

    def inner(t, y):
        return math.sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) - lo
    inner.terminal = True
    inner.direction = -1
    events.append(inner)
    if math.isfinite(dom.r_hi):
        hi = dom.r_hi * (1.0 - guard)

        def outer(t, y):
            return hi - math.sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])
        outer.terminal = True
        outer.direction = -1
        events.append(outer)
    return events


def integrate(params: BertrandParams, state0: PhaseState, t_end: float,
              settings: Optional[IntegratorSettings] = None, t_eval=None) -> Trajectory:
    """Integrate Hamilton's equations from ``state0`` over ``[0, t_end]``.

    The integration stops early with ``status == "chart_exit"`` when ``|q|``
    enters the guard band at a finite end of the radial domain.  Raises
    :class:`StepFailure` if the requested tolerance cannot be met.
    """
    settings = settings or IntegratorSettings()
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    r0 = state0.r
    _require_domain(params, r0)
    R, _ = plane_rotation(state0)
    planar_q = R @ state0.q
    phi0 = math.atan2(planar_q[1], planar_q[0])
    y0 = np.concatenate([state0.q, state0.p, [phi0]])
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, max(int(settings.n_samples), 2))
    t_eval = np.asarray(t_eval, dtype=float)

    if settings.method == "implicit_midpoint":
        return _integrate_midpoint(params, y0, t_end, settings, R, t_eval)

    rhs = _make_rhs(params, with_phase=True, rotation=R)
    sol = solve_ivp(
        rhs, (0.0, t_end), y0, method="DOP853", t_eval=t_eval,
        rtol=settings.rtol, atol=settings.atol, max_step=settings.max_step,
        events=_chart_events(params, settings.guard), dense_output=settings.dense,
    )
    if sol.status == -1:
        raise StepFailure(sol.message)
    status = "chart_exit" if sol.status == 1 else "ok"
    T, Y = sol.t, sol.y.T
    if status == "chart_exit":
        # close the record with the state at the guard crossing
        te = min(ev[0] for ev in sol.t_events if len(ev))
        if te > T[-1]:
            T = np.append(T, te)
            Y = np.vstack([Y, sol.sol(te)])
    return Trajectory(
        params=params, t=T, q=Y[:, :3].copy(), p=Y[:, 3:6].copy(),
        phi_unwrapped=Y[:, 6].copy(), rotation=R, settings=settings,
        status=status, dense=sol.sol,
    )


def _integrate_midpoint(params, y0, t_end, settings, R, t_eval):
    """Fixed-step implicit midpoint rule, solved by fixed-point iteration.

    Output samples are the grid points nearest below each requested time;
    the grid step is shrunk so that ``t_end`` is hit exactly.
    """
    h = settings.step or t_end / max(settings.n_samples - 1, 1)
    nsteps = max(int(math.ceil(t_end / h)), 1)
    h = t_end / nsteps
    rhs = _make_rhs(params, with_phase=True, rotation=R)
    dom = params.domain
    grid = np.empty((nsteps + 1, 7))
    grid[0] = y0
    y = y0.copy()
    for i in range(nsteps):
        k = rhs(0.0, y)
        for _ in range(100):
            k_new = rhs(0.0, y + 0.5 * h * k)
            if np.max(np.abs(k_new - k)) <= 1e-15 * (1.0 + np.max(np.abs(k_new))):
                k = k_new
                break
            k = k_new
        else:
            raise StepFailure(f"implicit midpoint iteration did not converge at step {i}")
        y = y + h * k
        r = math.sqrt(float(y[:3] @ y[:3]))
        if not (dom.r_lo < r < dom.r_hi):
            grid = grid[: i + 1]
            break
        grid[i + 1] = y
    times = np.arange(len(grid)) * h
    idx = np.clip(np.round(t_eval / h).astype(int), 0, len(grid) - 1)
    idx = np.unique(idx)
    status = "chart_exit" if len(grid) < nsteps + 1 else "ok"
    return Trajectory(
        params=params, t=times[idx], q=grid[idx, :3], p=grid[idx, 3:6],
        phi_unwrapped=grid[idx, 6], rotation=R, settings=settings, status=status,
    )
