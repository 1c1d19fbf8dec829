"""Following a (n, m) = (3, 2) orbit around its three-sheeted cover.

The orbit equation only fixes exp(3 i phi), so the azimuth is known up to
a third of a turn.  Tracking which sector of width 2 pi / 3 the orbit sits
in picks the right cube root, and with it a single Runge-Lenz vector per
sheet.  The three vectors are each constant, and their symmetrised product
does not care which sheet is called the first.

    python demos/threefold_cover.py [--periods 6]
"""

import argparse
import math

import numpy as np

from bertrand.dynamics import IntegratorSettings, integrate
from bertrand.orbits import apsidal_angle, bounded_state, fit_phi0, radial_period
from bertrand.runge_lenz import (
    branch_index,
    branch_tracking,
    branch_vectors,
    runge_lenz_series,
    symmetrized_product,
    tensor_series,
)
from bertrand.spaces import BertrandParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--periods", type=float, default=6.0)
    args = ap.parse_args()

    params = BertrandParams.type2(n=3, m=2, K=0.2, D=0.1, amplitude=-1.0)
    state0, E, J2 = bounded_state(params, 0.5, 1.0)
    T = radial_period(params, E, J2)
    tr = integrate(params, state0, args.periods * T, IntegratorSettings(n_samples=3001))
    print(f"E = {E:.6f}, J2 = {J2:.6f}, radial period {T:.5f}")
    print(f"apsidal angle {apsidal_angle(tr).angle:.10f}  (2 pi / 3 = {2 * math.pi / 3:.10f})")

    ks = [c.k for c in branch_tracking(tr)]
    visits = [ks[0]] + [k for k, prev in zip(ks[1:], ks[:-1]) if k != prev]
    print("sheet sequence:", " ".join(map(str, visits)))

    A = runge_lenz_series(params, tr)
    print(f"A at t=0: {np.round(A[0], 10) + 0.0}, max drift {np.max(np.abs(A - A[0])):.2e}")

    phi0 = fit_phi0(params, tr).phi0
    state = tr.state(len(tr) // 2)
    k = branch_index(tr, len(tr) // 2)
    for shift in range(3):
        vecs = branch_vectors(params, state, k.shifted(shift), phi0)
        comps = symmetrized_product(vecs).components
        print(f"sheet origin {k.shifted(shift).k}: "
              f"first tensor components {np.round(comps[:4], 10) + 0.0}")

    T3 = tensor_series(params, tr, phi0)
    print(f"{T3.shape[1]} independent components, max drift {np.max(np.abs(T3 - T3[0])):.2e}")


if __name__ == "__main__":
    main()
