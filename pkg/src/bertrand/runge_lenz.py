"""Generalised Runge-Lenz vector and the conserved rank-n tensor.

The orbit equation fixes ``exp(i (n phi - m phi0))`` as a function of
``(r^2, r rdot, J, E)`` through Chebyshev polynomials:

    cos(n phi - m phi0) = T_m(chi),   sin(n phi - m phi0) = Theta U_{m-1}(chi)

which determines ``phi`` only modulo ``2 pi / n``.  The ambiguity is removed
on an ``n``-fold cover whose sheets are the azimuth sectors
``[2 pi k / n, 2 pi (k+1) / n)`` of the orbital plane; a trajectory carries
its sheet index through the unwrapped azimuth.  With the phase fixed, the
unit vector

    A = cos(f) q / r + sin(f) q x (q x p) / (r J),   f = phi - m phi0 / n

is constant along the flow.  The symmetrised product of the ``n`` sheet
vectors is single valued on the base space.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import PhaseState, Trajectory, _radial_kernel, conserved, velocity_map
from .errors import InconsistentBranch, InsufficientCoverage
from .orbits import chi, fit_phi0, theta
from .spaces import BertrandParams

__all__ = [
    "CircleValue",
    "CoverIndex",
    "RungeLenzSample",
    "SymmetricTensor",
    "chebyshev_T",
    "chebyshev_U",
    "circle_map",
    "branch_index",
    "branch_tracking",
    "reconstruct_phase",
    "runge_lenz",
    "runge_lenz_series",
    "branch_vectors",
    "symmetrized_product",
    "conserved_tensor",
    "tensor_series",
]

TWO_PI = 2.0 * math.pi


def chebyshev_T(m: int, x):
    """Chebyshev polynomial of the first kind by three-term recurrence."""
    if m < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    t0, t1 = np.ones_like(x), x
    if m == 0:
        return _out(t0)
    for _ in range(m - 1):
        t0, t1 = t1, 2.0 * x * t1 - t0
    return _out(t1)


def chebyshev_U(d: int, x):
    """Chebyshev polynomial of the second kind by three-term recurrence."""
    if d < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    u0, u1 = np.ones_like(x), 2.0 * x
    if d == 0:
        return _out(u0)
    for _ in range(d - 1):
        u0, u1 = u1, 2.0 * x * u1 - u0
    return _out(u1)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class CircleValue:
    c: float
    s: float

    @property
    def norm(self) -> float:
        return math.hypot(self.c, self.s)


@dataclass(frozen=True)
class CoverIndex:
    """Sheet ``k`` of the ``n``-fold cover.

    ``phi`` optionally records the unwrapped azimuth the index was derived
    from; :func:`reconstruct_phase` uses it to settle samples lying within
    rounding distance of a sector boundary.
    """

    k: int
    n: int
    phi: Optional[float] = None

    def __post_init__(self):
        if self.n < 1 or not (0 <= self.k < self.n):
            raise InconsistentBranch(f"sheet index {self.k} invalid for an {self.n}-fold cover")

    def shifted(self, ell: int) -> "CoverIndex":
        """Sheet ``k + ell`` at the same base point."""
        phi = None if self.phi is None else self.phi + TWO_PI * ell / self.n
        return CoverIndex((self.k + ell) % self.n, self.n, phi)


@dataclass(frozen=True)
class RungeLenzSample:
    A: np.ndarray
    k: CoverIndex
    t: float = 0.0


@dataclass(frozen=True)
class SymmetricTensor:
    """Fully symmetric rank-``order`` tensor on R^3.

    Only the ``(order+1)(order+2)/2`` independent components are stored,
    one per multidegree ``(a, b, c)`` with ``a + b + c = order``, in the
    order given by :func:`multidegrees`.
    """

    order: int
    components: np.ndarray

    @staticmethod
    def multidegrees(order: int):
        return [(a, b, order - a - b) for a in range(order, -1, -1) for b in range(order - a, -1, -1)]

    def __getitem__(self, index):
        index = tuple(index)
        if len(index) != self.order:
            raise IndexError(f"expected {self.order} indices")
        deg = (index.count(0), index.count(1), index.count(2))
        return float(self.components[self.multidegrees(self.order).index(deg)])

    def full(self) -> np.ndarray:
        out = np.empty((3,) * self.order)
        for idx in itertools.product(range(3), repeat=self.order):
            out[idx] = self[idx]
        return out


# --------------------------------------------------------------------------


def circle_map(params: BertrandParams, rrdot, r2, J, E) -> CircleValue:
    """``(T_m(chi), Theta U_{m-1}(chi)) = exp(i (n phi - m phi0))``."""
    x = chi(params, r2, J * J, E)
    s = theta(params, rrdot, r2, J, E)
    m = params.m
    return CircleValue(float(chebyshev_T(m, x)), float(s * chebyshev_U(m - 1, x)))


def branch_index(trajectory: Trajectory, sample_index: int) -> CoverIndex:
    """Sheet containing sample ``sample_index``: ``floor(n phi / 2 pi) mod n``."""
    n = trajectory.params.n
    phi = float(trajectory.phi_unwrapped[sample_index])
    return CoverIndex(int(math.floor(n * phi / TWO_PI)) % n, n, phi)


def branch_tracking(trajectory: Trajectory) -> list:
    """Sheet index for every sample, in order."""
    n = trajectory.params.n
    phis = trajectory.phi_unwrapped
    ks = np.mod(np.floor(n * phis / TWO_PI).astype(np.int64), n)
    return [CoverIndex(int(k), n, float(phi)) for k, phi in zip(ks, phis)]


def reconstruct_phase(cv: CircleValue, k: CoverIndex, shift: float = 0.0, tol: float = 1e-6):
    """Recover ``(cos phi, sin phi)`` on sheet ``k`` from ``exp(i n phi)``.

    ``exp(i n phi) = (cv.c + i cv.s) exp(i shift)``.  Of the ``n`` roots the
    one inside sector ``k`` is returned; when ``k.phi`` is known the root
    closest to it is taken and checked against the sector instead, which
    keeps boundary samples on the sheet they were tracked on.
    """
    n = k.n
    z = complex(cv.c, cv.s) * complex(math.cos(shift), math.sin(shift))
    if not math.isfinite(abs(z)) or abs(abs(z) - 1.0) > tol:
        raise InconsistentBranch(f"|exp(i n phi)| = {abs(z):.12g} is not on the unit circle")
    base = math.atan2(z.imag, z.real) % TWO_PI
    if k.phi is None:
        phi = (base + TWO_PI * k.k) / n
    else:
        j = round((n * k.phi - base) / TWO_PI)
        phi = (base + TWO_PI * j) / n
        sector = n * phi / TWO_PI
        if int(math.floor(sector)) % n != k.k:
            edge = min(sector - math.floor(sector), math.ceil(sector) - sector)
            if edge > tol:
                raise InconsistentBranch(
                    f"root at phi={phi:.9g} lies outside sector {k.k} of {n}"
                )
    return math.cos(phi), math.sin(phi)


def _fradkin(q, p, J, cos_f, sin_f):
    r = float(np.linalg.norm(q))
    A = cos_f * q / r
    if J > 0:
        A = A + sin_f * np.cross(q, np.cross(q, p)) / (r * J)
    return A


def runge_lenz(params: BertrandParams, state: PhaseState, k: CoverIndex,
               phi0: float = 0.0, t: float = 0.0) -> RungeLenzSample:
    """Generalised Runge-Lenz vector at ``state`` on sheet ``k``.

    ``phi0`` is the orbit's phase constant measured in the plane frame that
    produced ``k``.  The formula is rotation invariant, so it is evaluated
    directly in the caller's frame.  At ``J = 0`` the transverse term is
    dropped (its limit is zero times a bounded factor).
    """
    q, p = state.q, state.p
    cs = conserved(params, state)
    J = math.sqrt(cs.J2)
    r2 = float(q @ q)
    rrdot = float(q @ velocity_map(params, q, p))
    cv = circle_map(params, rrdot, r2, J, cs.E)
    shift = params.m * phi0
    cphi, sphi = reconstruct_phase(cv, k, shift)
    offset = params.m * phi0 / params.n
    co, so = math.cos(offset), math.sin(offset)
    cos_f = cphi * co + sphi * so
    sin_f = sphi * co - cphi * so
    return RungeLenzSample(_fradkin(q, p, J, cos_f, sin_f), k, t)


def _batch(params, q, p, ks, hints, phi0, tol=1e-6):
    """Vectorised :func:`runge_lenz` over samples with sheet labels ``ks``."""
    n, m = params.n, params.m
    r2 = np.einsum("ij,ij->i", q, q)
    r = np.sqrt(r2)
    kernel = _radial_kernel(params)
    ih2, V = np.array([kernel(x)[0::2] for x in r]).T
    qp = np.einsum("ij,ij->i", q, p)
    E = 0.5 * (np.einsum("ij,ij->i", p, p) + (ih2 - 1.0) * qp * qp / r2) + V
    L = np.cross(q, p)
    J2 = np.einsum("ij,ij->i", L, L)
    J = np.sqrt(J2)
    x = np.array([chi(params, a, b, c) for a, b, c in zip(r2, J2, E)])
    th = np.array([theta(params, a, b, c, d) for a, b, c, d in zip(ih2 * qp, r2, J, E)])
    z = (chebyshev_T(m, x) + 1j * th * chebyshev_U(m - 1, x)) * np.exp(1j * m * phi0)
    if np.any(np.abs(np.abs(z) - 1.0) > tol):
        raise InconsistentBranch("exp(i n phi) is off the unit circle")
    base = np.mod(np.angle(z), TWO_PI)
    j = np.round((n * hints - base) / TWO_PI)
    phi = (base + TWO_PI * j) / n
    sector = n * phi / TWO_PI
    wrong = np.mod(np.floor(sector).astype(np.int64), n) != ks
    edge = np.minimum(sector - np.floor(sector), np.ceil(sector) - sector)
    if np.any(wrong & (edge > tol)):
        raise InconsistentBranch("reconstructed azimuth left its sector")
    f = phi - m * phi0 / n
    A = np.cos(f)[:, None] * q / r[:, None]
    trans = np.cross(q, L)
    safe = np.where(J > 0, r * J, 1.0)
    A += np.where(J[:, None] > 0, np.sin(f)[:, None] * trans / safe[:, None], 0.0)
    return A


def runge_lenz_series(params: BertrandParams, trajectory: Trajectory,
                      phi0: Optional[float] = None) -> np.ndarray:
    """``A`` at every sample, shape ``(N, 3)``; ``phi0`` is fitted if omitted."""
    if phi0 is None:
        phi0 = fit_phi0(params, trajectory).phi0
    n = params.n
    hints = trajectory.phi_unwrapped
    ks = np.mod(np.floor(n * hints / TWO_PI).astype(np.int64), n)
    return _batch(params, trajectory.q, trajectory.p, ks, hints, phi0)


def branch_vectors(params: BertrandParams, state: PhaseState, k: CoverIndex,
                   phi0: float = 0.0) -> list:
    """``A_k, A_{k+1}, ..., A_{k+n-1}`` at one base point."""
    return [runge_lenz(params, state, k.shifted(ell), phi0).A for ell in range(k.n)]


def symmetrized_product(vectors) -> SymmetricTensor:
    """Symmetric tensor with components ``A_1^(i_1) ... A_n^(i_n)``."""
    vectors = [np.asarray(v, dtype=float) for v in vectors]
    order = len(vectors)
    perms = list(itertools.permutations(range(order)))
    comps = []
    for a, b, c in SymmetricTensor.multidegrees(order):
        idx = (0,) * a + (1,) * b + (2,) * c
        total = 0.0
        for perm in perms:
            prod = 1.0
            for slot, which in zip(idx, perm):
                prod *= vectors[which][slot]
            total += prod
        comps.append(total / len(perms))
    return SymmetricTensor(order, np.array(comps))


def _check_coverage(trajectory):
    n = trajectory.params.n
    seen = {c.k for c in branch_tracking(trajectory)}
    if len(seen) < n:
        raise InsufficientCoverage(f"trajectory visits sheets {sorted(seen)} of {n}")


def conserved_tensor(params: BertrandParams, trajectory: Trajectory, sample: int = 0,
                     phi0: Optional[float] = None) -> SymmetricTensor:
    """Rank-``n`` invariant tensor evaluated at one trajectory sample."""
    _check_coverage(trajectory)
    if phi0 is None:
        phi0 = fit_phi0(params, trajectory).phi0
    k = branch_index(trajectory, sample)
    return symmetrized_product(branch_vectors(params, trajectory.state(sample), k, phi0))


def tensor_series(params: BertrandParams, trajectory: Trajectory,
                  phi0: Optional[float] = None) -> np.ndarray:
    """Tensor components at every sample, shape ``(N, (n+1)(n+2)/2)``."""
    _check_coverage(trajectory)
    if phi0 is None:
        phi0 = fit_phi0(params, trajectory).phi0
    n = params.n
    hints = trajectory.phi_unwrapped
    ks = np.mod(np.floor(n * hints / TWO_PI).astype(np.int64), n)
    sheets = [
        _batch(params, trajectory.q, trajectory.p, (ks + ell) % n,
               hints + TWO_PI * ell / n, phi0)
        for ell in range(n)
    ]
    return np.array([
        symmetrized_product([A[i] for A in sheets]).components
        for i in range(len(trajectory))
    ])
