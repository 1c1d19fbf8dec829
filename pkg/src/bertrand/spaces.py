"""Bertrand spaces: metric coefficient, radial domain, potentials and charts.

The Riemannian metric of a Bertrand space in adapted coordinates is

    ds^2 = h(r)^2 dr^2 + r^2 dOmega^2

with ``h(r)^2`` from one of two families:

* Type I   ``m^2 / (n^2 (1 + K r^2))``
* Type II  ``2 m^2 (1 - D r^2 + s sqrt(delta)) / (n^2 delta)`` with
  ``delta = (1 - D r^2)^2 - K r^4`` and ``s = +-1`` the branch sign.

Type I carries the intrinsic Kepler potential and type II the intrinsic
harmonic oscillator potential.  Every function here accepts scalars or numpy
arrays for ``r``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import (
    DomainError,
    EmptyDomain,
    OriginError,
    ParameterError,
    QuadratureFailure,
    SingularInner,
    UnknownExample,
)

__all__ = [
    "Family",
    "BertrandParams",
    "RadialDomain",
    "NamedExample",
    "metric_coeff",
    "radial_domain",
    "potential",
    "potential_derivative",
    "substitution",
    "inverse_metric_derivative",
    "h_profile",
    "intrinsic_potential",
    "radial_laplacian",
    "to_cartesian",
    "from_cartesian",
    "cartesian_metric",
    "example_catalog",
    "CATALOG",
]


class Family(str, enum.Enum):
    TYPE_I = "type1"
    TYPE_II = "type2"


class BertrandParams:
    """Immutable parameter set fixing both the metric and the potential.

    Use :meth:`type1` / :meth:`type2` rather than the constructor.  ``D`` and
    ``branch`` only exist for type II; reading them on a type I instance
    raises :class:`ParameterError`.
    """

    __slots__ = ("family", "n", "m", "K", "G", "amplitude", "_D", "_branch", "_domain")

    def __init__(self, family, n=1, m=1, K=0.0, D=None, branch=None, G=0.0, amplitude=1.0):
        family = Family(family)
        n, m = int(n), int(m)
        if n < 1 or m < 1:
            raise ParameterError(f"n and m must be positive, got n={n}, m={m}")
        if math.gcd(n, m) != 1:
            raise ParameterError(f"n and m must be coprime, got n={n}, m={m}")
        amplitude = float(amplitude)
        if amplitude == 0.0 or not math.isfinite(amplitude):
            raise ParameterError("amplitude must be finite and nonzero")
        if family is Family.TYPE_II:
            D = 0.0 if D is None else float(D)
            branch = 1 if branch is None else int(branch)
            if branch not in (1, -1):
                raise ParameterError(f"branch must be +1 or -1, got {branch}")
        else:
            D, branch = None, None
        s = object.__setattr__
        s(self, "family", family)
        s(self, "n", n)
        s(self, "m", m)
        s(self, "K", float(K))
        s(self, "G", float(G))
        s(self, "amplitude", amplitude)
        s(self, "_D", D)
        s(self, "_branch", branch)
        s(self, "_domain", None)

    @classmethod
    def type1(cls, n=1, m=1, K=0.0, G=0.0, amplitude=1.0):
        return cls(Family.TYPE_I, n=n, m=m, K=K, G=G, amplitude=amplitude)

    @classmethod
    def type2(cls, n=2, m=1, K=0.0, D=0.0, branch=1, G=0.0, amplitude=1.0):
        return cls(Family.TYPE_II, n=n, m=m, K=K, D=D, branch=branch, G=G, amplitude=amplitude)

    def __setattr__(self, name, value):
        raise AttributeError("BertrandParams is immutable")

    @property
    def D(self) -> float:
        if self._D is None:
            raise ParameterError("D is not defined for type I Bertrand spaces")
        return self._D

    @property
    def branch(self) -> int:
        if self._branch is None:
            raise ParameterError("branch is not defined for type I Bertrand spaces")
        return self._branch

    @property
    def is_type1(self) -> bool:
        return self.family is Family.TYPE_I

    @property
    def ratio(self) -> float:
        """n/m, the winding ratio of the orbit equation."""
        return self.n / self.m

    @property
    def domain(self) -> "RadialDomain":
        if self._domain is None:
            object.__setattr__(self, "_domain", radial_domain(self))
        return self._domain

    def replace(self, **changes) -> "BertrandParams":
        d = self.as_dict()
        d.update(changes)
        return BertrandParams(**d)

    def as_dict(self) -> dict:
        d = {
            "family": self.family.value,
            "n": self.n,
            "m": self.m,
            "K": self.K,
            "G": self.G,
            "amplitude": self.amplitude,
        }
        if not self.is_type1:
            d["D"] = self._D
            d["branch"] = self._branch
        return d

    def _key(self):
        return (self.family, self.n, self.m, self.K, self._D, self._branch, self.G, self.amplitude)

    def __eq__(self, other):
        if not isinstance(other, BertrandParams):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        items = ", ".join(f"{k}={v!r}" for k, v in self.as_dict().items())
        return f"BertrandParams({items})"

    def __getstate__(self):
        return self.as_dict()

    def __setstate__(self, state):
        fresh = BertrandParams(**state)
        for name in self.__slots__:
            object.__setattr__(self, name, getattr(fresh, name))


@dataclass(frozen=True)
class RadialDomain:
    """Open interval ``(r_lo, r_hi)``; ``r_hi`` may be ``inf``."""

    r_lo: float
    r_hi: float

    def contains(self, r) -> bool:
        r = np.asarray(r, dtype=float)
        return bool(np.all((r > self.r_lo) & (r < self.r_hi)))

    def interior_point(self) -> float:
        if math.isinf(self.r_hi):
            return self.r_lo + 1.0 if self.r_lo > 0 else 1.0
        return 0.5 * (self.r_lo + self.r_hi)


# --------------------------------------------------------------------------
# raw kernels (no domain checks)


def _type2_parts(params, r):
    r2 = r * r
    c = 1.0 - params._D * r2
    delta = c * c - params.K * r2 * r2
    return r2, c, delta


def _h2_raw(params, r):
    r = np.asarray(r, dtype=float)
    scale = (params.m / params.n) ** 2
    if params.is_type1:
        return scale / (1.0 + params.K * r * r)
    r2, c, delta = _type2_parts(params, r)
    with np.errstate(invalid="ignore", divide="ignore"):
        num = c + params._branch * np.sqrt(delta)
        return 2.0 * scale * num / delta


def _check(params, r):
    dom = params.domain
    r_arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r_arr)) or not dom.contains(r_arr):
        raise DomainError(f"r={r!r} outside the radial domain ({dom.r_lo}, {dom.r_hi})")
    return r_arr


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def metric_coeff(params: BertrandParams, r):
    """Return ``h(r)^2``; raises :class:`DomainError` outside the open domain."""
    r = _check(params, r)
    h2 = _h2_raw(params, r)
    if not np.all(np.isfinite(h2) & (h2 > 0)):
        raise DomainError(f"metric coefficient degenerates at r={r!r}")
    return _out(h2)


def h_profile(params: BertrandParams) -> Callable[[float], float]:
    """The function ``r -> h(r)`` (positive root of the metric coefficient)."""
    return lambda r: math.sqrt(metric_coeff(params, r))


def radial_domain(params: BertrandParams) -> RadialDomain:
    """Maximal open radial interval adjacent to the innermost valid region.

    Type II breakpoints are the positive roots (in ``y = r^2``) of the
    quadratic ``delta(y) = (D^2 - K) y^2 - 2 D y + 1``.  Between consecutive
    breakpoints the sign of the numerator cannot change (it would need
    ``K y^2 = 0``), so one probe per interval decides validity.
    """
    if params.is_type1:
        if params.K >= 0:
            return RadialDomain(0.0, math.inf)
        return RadialDomain(0.0, 1.0 / math.sqrt(-params.K))

    D, K = params._D, params.K
    a, b, c = D * D - K, -2.0 * D, 1.0
    roots = []
    if a == 0.0:
        if b != 0.0:
            roots.append(-c / b)
    else:
        disc = b * b - 4 * a * c
        if disc >= 0:
            qq = -0.5 * (b + math.copysign(math.sqrt(disc), b))
            roots.extend([qq / a, c / qq])
    ys = sorted({y for y in roots if y > 0 and math.isfinite(y)})
    edges = [0.0] + ys + [math.inf]
    for lo, hi in zip(edges[:-1], edges[1:]):
        probe = 0.5 * (lo + hi) if math.isfinite(hi) else (2.0 * lo + 1.0)
        h2 = _h2_raw(params, math.sqrt(probe))
        if np.isfinite(h2) and h2 > 0:
            return RadialDomain(math.sqrt(lo), math.sqrt(hi))
    raise EmptyDomain(f"no radius where the metric is positive for {params!r}")


def substitution(params: BertrandParams, r):
    """Orbit-equation substitution variable: ``u = sqrt(r^-2 + K)`` (type I)
    or ``v = r^-2 (1 - D r^2 + s sqrt(delta))`` (type II)."""
    r = _check(params, r)
    if params.is_type1:
        return _out(np.sqrt(1.0 / (r * r) + params.K))
    r2, c, delta = _type2_parts(params, r)
    return _out((c + params._branch * np.sqrt(delta)) / r2)


def potential(params: BertrandParams, r):
    r = _check(params, r)
    a, G = params.amplitude, params.G
    if params.is_type1:
        return _out(a * np.sqrt(1.0 / (r * r) + params.K) + G)
    r2, c, delta = _type2_parts(params, r)
    s = params._branch
    return _out(G - s * a * r2 / (c + s * np.sqrt(delta)))


def potential_derivative(params: BertrandParams, r):
    """Closed-form ``dV/dr``."""
    r = _check(params, r)
    a = params.amplitude
    if params.is_type1:
        u = np.sqrt(1.0 / (r * r) + params.K)
        return _out(-a / (r ** 3 * u))
    r2, c, delta = _type2_parts(params, r)
    w = np.sqrt(delta) / r2
    v = (c + params._branch * np.sqrt(delta)) / r2
    return _out(-2.0 * a / (v * w * r ** 3))


def inverse_metric_derivative(params: BertrandParams, r):
    """Closed-form ``d(h^-2)/dr``."""
    r = _check(params, r)
    scale = (params.n / params.m) ** 2
    if params.is_type1:
        return _out(2.0 * scale * params.K * r)
    r2, c, delta = _type2_parts(params, r)
    s = params._branch
    sq = np.sqrt(delta)
    dc = -2.0 * params._D * r
    ddelta = 2.0 * c * dc - 4.0 * params.K * r ** 3
    num = c + s * sq
    dnum = dc + s * ddelta / (2.0 * sq)
    return _out(0.5 * scale * (ddelta * num - delta * dnum) / (num * num))


# --------------------------------------------------------------------------
# profile-generic operations


def intrinsic_potential(h_profile, r, a, A, B, kind="kepler", tol=1e-12):
    """Intrinsic Kepler or oscillator potential built from a metric profile.

    Kepler:      ``A (I(r) + B)``
    Oscillator:  ``A (I(r) + B)^-2``

    where ``I(r) = int_a^r h(s) / s^2 ds`` is computed by adaptive
    Gauss-Kronrod quadrature.  Returns ``(value, abs_error)``.
    """
    kind = kind.lower()
    if kind not in ("kepler", "oscillator"):
        raise ValueError(f"kind must be 'kepler' or 'oscillator', got {kind!r}")
    val, err, info = integrate.quad(
        lambda s: h_profile(s) / (s * s), a, r,
        epsabs=min(tol, 1e-13), epsrel=1e-14, limit=200, full_output=True
    )[:3]
    if not math.isfinite(val) or err > tol:
        raise QuadratureFailure(f"quadrature error {err:.3e} exceeds {tol:.1e}")
    inner = val + B
    if kind == "kepler":
        return A * inner, abs(A) * err
    if abs(inner) <= max(err, 1e-14 * (abs(val) + abs(B))):
        raise SingularInner("oscillator potential undefined where the integral equals -B")
    value = A / inner ** 2
    return value, abs(2.0 * A / inner ** 3) * err


def radial_laplacian(h_profile, u_profile, r, rel_step=1e-3, domain=None):
    """Laplace-Beltrami operator applied to a radial function.

    Evaluates ``(1/(r^2 h)) d/dr ((r^2/h) du/dr)`` with the conservative
    three-point stencil, Richardson-extrapolated over steps ``delta`` and
    ``delta/2``.
    """
    r = float(r)
    delta = rel_step * r
    lo, hi = r - delta, r + delta
    if domain is not None and not (domain.r_lo < lo and hi < domain.r_hi):
        raise DomainError(f"stencil around r={r} leaves the domain")
    if lo <= 0:
        raise DomainError("stencil crosses the origin")

    def coeff(s):
        hs = h_profile(s)
        if not (math.isfinite(hs) and hs > 0):
            raise DomainError(f"h profile not positive at r={s}")
        return s * s / hs

    h0 = h_profile(r)
    if not (math.isfinite(h0) and h0 > 0):
        raise DomainError(f"h profile not positive at r={r}")
    u0 = u_profile(r)

    def stencil(d):
        plus = coeff(r + 0.5 * d) * (u_profile(r + d) - u0)
        minus = coeff(r - 0.5 * d) * (u0 - u_profile(r - d))
        return (plus - minus) / (d * d * r * r * h0)

    coarse, fine = stencil(delta), stencil(0.5 * delta)
    return (4.0 * fine - coarse) / 3.0


# --------------------------------------------------------------------------
# charts


def to_cartesian(r, theta, phi):
    """Rectangular coordinates ``(r cos(theta) cos(phi), r cos(theta) sin(phi), r sin(theta))``.

    ``theta`` is a latitude here: ``theta = pi/2`` is the positive q3 axis.
    """
    r, theta, phi = (np.asarray(x, dtype=float) for x in (r, theta, phi))
    ct = np.cos(theta)
    return np.stack([r * ct * np.cos(phi), r * ct * np.sin(phi), r * np.sin(theta)], axis=-1)


def from_cartesian(q):
    """Inverse of :func:`to_cartesian`; returns ``(r, theta, phi)``."""
    q = np.asarray(q, dtype=float)
    r = np.linalg.norm(q, axis=-1)
    if np.any(r == 0):
        raise OriginError("the origin has no spherical coordinates")
    theta = np.arctan2(q[..., 2], np.hypot(q[..., 0], q[..., 1]))
    phi = np.arctan2(q[..., 1], q[..., 0])
    return _out(r), _out(theta), _out(phi)


def cartesian_metric(params: BertrandParams, q):
    """Metric tensor in the rectangular chart: ``I + (h^2 - 1) qhat qhat^T``."""
    q = np.asarray(q, dtype=float)
    r = float(np.linalg.norm(q))
    h2 = metric_coeff(params, r)
    qh = q / r
    return np.eye(3) + (h2 - 1.0) * np.outer(qh, qh)


# --------------------------------------------------------------------------
# named examples


@dataclass(frozen=True)
class NamedExample:
    """A catalogued Bertrand space.

    ``transform`` maps rectangular ``q`` to the model's native coordinates
    ``Q``; ``conformal_factor`` gives the metric there as
    ``factor(Q) * |dQ|^2``.
    """

    name: str
    params: BertrandParams
    arguments: dict = field(default_factory=dict)
    identification: str = ""
    transform: Optional[Callable] = None
    conformal_factor: Optional[Callable] = None


def _radial_power_map(inner, power):
    def transform(q):
        q = np.asarray(q, dtype=float)
        r = np.linalg.norm(q)
        return inner(r) ** power * q / r
    return transform


def _constant_curvature(kappa=0.0, kind="kepler", attractive=False):
    kappa = float(kappa)
    amp = -1.0 if attractive else 1.0
    if kind == "kepler":
        params = BertrandParams.type1(n=1, m=1, K=0.0 - kappa, amplitude=amp)
        ident = f"type I, n = m = 1, K = -kappa = {0.0 - kappa:g}"
    elif kind == "oscillator":
        params = BertrandParams.type2(n=2, m=1, K=0.0, D=kappa, branch=1, amplitude=amp)
        ident = f"type II, n/m = 2, K = 0, D = kappa = {kappa:g}"
    else:
        raise UnknownExample(f"constant-curvature kind must be kepler or oscillator, got {kind!r}")
    return NamedExample("constant-curvature", params, {"kappa": kappa, "kind": kind}, ident)


def _darboux_iii(k=1.0, attractive=False):
    k = float(k)
    if k <= 0:
        raise UnknownExample("darboux-iii requires k > 0")
    params = BertrandParams.type2(
        n=2, m=1, K=4.0 / k ** 4, D=-2.0 / k ** 2, branch=1,
        amplitude=-1.0 if attractive else 1.0,
    )
    return NamedExample(
        "darboux-iii", params, {"k": k},
        f"type II, n/m = 2, K = 4/k^4 = {params.K:g}, D = -2/k^2 = {params.D:g}",
        transform=_radial_power_map(lambda r: 0.5 * (math.sqrt(k * k + 4 * r * r) - k), 0.5),
        conformal_factor=lambda Q: k + float(np.dot(Q, Q)),
    )


def _multifold_kepler(a=1.0, b=1.0, c=0.0, d=0.0, mu=1.0, n=2, m=1, attractive=False):
    a, b = float(a), float(b)
    if a <= 0 or b <= 0:
        raise UnknownExample("multifold-kepler requires a > 0 and b > 0")
    params = BertrandParams.type2(
        n=n, m=m, K=4.0 * b * b / a ** 4, D=-2.0 * b / a ** 2, branch=1,
        amplitude=-1.0 if attractive else 1.0,
    )
    beta = n / m

    def factor(Q):
        rho = float(np.linalg.norm(Q))
        return rho ** (beta - 2.0) * (a + b * rho ** beta)

    return NamedExample(
        "multifold-kepler", params,
        {"a": a, "b": b, "c": float(c), "d": float(d), "mu": float(mu), "n": n, "m": m},
        f"type II, n/m = {n}/{m}, K = 4 b^2/a^4 = {params.K:g}, D = -2b/a^2 = {params.D:g}",
        transform=_radial_power_map(
            lambda r: (math.sqrt(a * a + 4 * b * r * r) - a) / (2 * b), m / n
        ),
        conformal_factor=factor,
    )


CATALOG = {
    "constant-curvature": (
        _constant_curvature,
        "Space form of curvature kappa: Kepler (type I, n=m=1, K=-kappa) "
        "or oscillator (type II, n/m=2, K=0, D=kappa)",
    ),
    "darboux-iii": (
        _darboux_iii,
        "Darboux space of type III with parameter k: type II, n/m=2, K=4/k^4, D=-2/k^2; "
        "Q = ((sqrt(k^2+4r^2)-k)/2)^(1/2) qhat gives ds^2 = (k+|Q|^2)|dQ|^2",
    ),
    "multifold-kepler": (
        _multifold_kepler,
        "Multifold Kepler system (a, b, c, d, mu, n, m): type II, K=4b^2/a^4, D=-2b/a^2; "
        "Q = ((sqrt(a^2+4br^2)-a)/(2b))^(m/n) qhat gives "
        "ds^2 = |Q|^(n/m-2)(a+b|Q|^(n/m))|dQ|^2",
    ),
}


def example_catalog(name: str, **kwargs) -> NamedExample:
    """Look up a named example, e.g. ``example_catalog("darboux-iii", k=1)``."""
    key = name.lower().replace("_", "-")
    if key not in CATALOG:
        raise UnknownExample(f"unknown example {name!r}; known: {sorted(CATALOG)}")
    return CATALOG[key][0](**kwargs)
