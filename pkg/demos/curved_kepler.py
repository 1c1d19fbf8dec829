"""Kepler orbits on spaces of constant curvature.

The same pericentre and apocentre radii are used on a sphere (kappa > 0),
flat space and a hyperbolic space (kappa < 0).  On all three the orbit
closes after one radial period, the apsidal angle stays at pi, and the
Runge-Lenz direction built from the orbit constants does not move.

    python demos/curved_kepler.py
"""

import math

import numpy as np

from bertrand.dynamics import integrate
from bertrand.orbits import apsidal_angle, bounded_state, closure_distance, radial_period
from bertrand.runge_lenz import runge_lenz_series
from bertrand.spaces import example_catalog


def main():
    print(f"{'kappa':>6} {'E':>10} {'J2':>8} {'period':>9} {'apsidal - pi':>13} "
          f"{'closure':>9} {'A drift':>9}")
    for kappa in (0.5, 0.2, 0.0, -0.2, -0.5):
        params = example_catalog("constant-curvature", kappa=kappa, attractive=True).params
        state0, E, J2 = bounded_state(params, 0.5, 1.2)
        T = radial_period(params, E, J2)
        tr = integrate(params, state0, 4 * T)
        A = runge_lenz_series(params, tr)
        print(f"{kappa:6.2f} {E:10.5f} {J2:8.5f} {T:9.4f} "
              f"{apsidal_angle(tr).angle - math.pi:13.2e} "
              f"{closure_distance(params, state0):9.2e} "
              f"{np.max(np.abs(A - A[0])):9.2e}")

    # the axis itself: flat space puts it on the pericentre
    params = example_catalog("constant-curvature", kappa=0.0, attractive=True).params
    state0, _, _ = bounded_state(params, 0.5, 1.2)
    tr = integrate(params, state0, 1.0)
    print("\nflat-space axis", np.round(runge_lenz_series(params, tr)[0], 12),
          "pericentre direction", state0.q / state0.r)


if __name__ == "__main__":
    main()
