"""How much accuracy the invariants need from the integrator.

Integrates one eccentric (1, 2) orbit for ten radial periods at a ladder of
tolerances and reports the energy, angular momentum and Runge-Lenz drifts.
The Runge-Lenz check is sharp: at 1e-3 it misses its 1e-6 bound by more
than three orders of magnitude.  Every drift scales with the tolerance, and
at 1e-12 the energy drift of an orbit like this one already sits above
1e-10.

    python demos/tolerance_budget.py
"""

import math

import numpy as np

from bertrand.dynamics import IntegratorSettings, conserved, integrate
from bertrand.errors import BertrandError
from bertrand.orbits import bounded_state, radial_period
from bertrand.runge_lenz import runge_lenz_series
from bertrand.spaces import BertrandParams


def drifts(params, tr):
    sets = [conserved(params, tr.state(i)) for i in range(len(tr))]
    e = max(abs(c.E - sets[0].E) for c in sets) / max(1.0, abs(sets[0].E))
    ell = max(float(np.max(np.abs(c.L - sets[0].L))) for c in sets)
    try:
        A = runge_lenz_series(params, tr)
        a = float(np.max(np.abs(A - A[0])))
    except BertrandError:
        a = math.inf
    return e, ell, a


def main():
    params = BertrandParams.type2(n=1, m=2, K=0.3, D=-0.4, amplitude=-1.0)
    state0, E, J2 = bounded_state(params, 0.9, 2.0)
    T = radial_period(params, E, J2)
    print(f"(n, m) = (1, 2), E = {E:.5f}, J2 = {J2:.5f}, 10 periods of {T:.3f}\n")
    print(f"{'tol':>7} {'energy':>10} {'L':>10} {'A':>10}")
    for tol in (1e-3, 1e-6, 1e-9, 1e-11, 1e-12, 1e-13):
        tr = integrate(params, state0, 10 * T, IntegratorSettings(rtol=tol, atol=tol))
        e, ell, a = drifts(params, tr)
        print(f"{tol:7.0e} {e:10.2e} {ell:10.2e} {a:10.2e}")


if __name__ == "__main__":
    main()
