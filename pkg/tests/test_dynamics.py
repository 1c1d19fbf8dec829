import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from bertrand.dynamics import (
    IntegratorSettings,
    PhaseState,
    conserved,
    eom,
    hamiltonian,
    integrate,
    plane_rotation,
    rotate_to_plane,
    velocity_map,
)
from bertrand.errors import DomainError
from bertrand.orbits import radial_period, state_from_constants
from bertrand.spaces import BertrandParams, metric_coeff, potential

from configs import random_bounded
from oracles import finite_difference_gradient, spherical_hamiltonian

FAMILIES = [
    BertrandParams.type1(n=1, m=1, K=0.0),
    BertrandParams.type1(n=3, m=2, K=0.4, amplitude=-1.0),
    BertrandParams.type2(n=2, m=1, K=0.3, D=-0.2, branch=1),
    BertrandParams.type2(n=1, m=2, K=1.0, D=0.1, branch=-1, G=0.3, amplitude=-1.0),
]


def random_state(rng, params, r_max=0.9):
    hi = min(params.domain.r_hi, 2.0)
    q = rng.normal(size=3)
    q *= rng.uniform(0.2, r_max * hi) / np.linalg.norm(q)
    return PhaseState(q, rng.normal(size=3))


vec3 = st.lists(st.floats(-3, 3), min_size=3, max_size=3)


class TestHamiltonian:
    def test_worked_values(self):
        p = BertrandParams.type1()
        assert hamiltonian(p, PhaseState([0, 0, 1], [1, 0, 0])) == pytest.approx(1.5, abs=1e-15)
        assert hamiltonian(p, PhaseState([0, 0, 2], [0, 0, 0])) == pytest.approx(0.5, abs=1e-15)
        p12 = BertrandParams.type1(n=1, m=2)
        assert hamiltonian(p12, PhaseState([0, 0, 1], [0, 0, 1])) == pytest.approx(1.125, abs=1e-15)

    @pytest.mark.parametrize("params", FAMILIES)
    def test_matches_spherical_form(self, params, rng):
        for _ in range(20):
            s = random_state(rng, params)
            want = spherical_hamiltonian(metric_coeff(params, s.r), potential(params, s.r), s.q, s.p)
            assert hamiltonian(params, s) == pytest.approx(want, rel=1e-12, abs=1e-12)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            hamiltonian(BertrandParams.type1(K=-1.0), PhaseState([0, 0, 1.2], [0, 0, 0]))


class TestEquationsOfMotion:
    def test_kepler_point(self):
        dq, dp = eom(BertrandParams.type1(), PhaseState([0, 0, 1], [1, 0, 0]))
        np.testing.assert_allclose(dq, [1, 0, 0], atol=1e-15)
        np.testing.assert_allclose(dp, [0, 0, 1], atol=1e-15)

    @pytest.mark.parametrize("params", FAMILIES)
    def test_gradient_of_hamiltonian(self, params, rng):
        worst = 0.0
        for _ in range(25):
            s = random_state(rng, params)
            y = s.as_array()
            grad = finite_difference_gradient(
                lambda z: hamiltonian(params, PhaseState.from_array(z)), y, 1e-6)
            dq, dp = eom(params, s)
            worst = max(worst, np.max(np.abs(dq - grad[3:])), np.max(np.abs(dp + grad[:3])))
        assert worst < 1e-6

    @pytest.mark.parametrize("params", FAMILIES)
    def test_velocity_is_dq(self, params, rng):
        for _ in range(25):
            s = random_state(rng, params)
            dq, _ = eom(params, s)
            assert np.max(np.abs(dq - velocity_map(params, s.q, s.p))) < 1e-14


class TestVelocityMap:
    @given(vec3, vec3)
    def test_flat_identity(self, q, p):
        q = np.array(q)
        if np.linalg.norm(q) < 1e-3:
            q = q + 1.0
        np.testing.assert_allclose(velocity_map(BertrandParams.type1(), q, p), p, atol=1e-14)

    @given(st.floats(0.1, 0.9), st.floats(-2, 2))
    def test_orthogonal_momentum(self, r, a):
        params = BertrandParams.type2(n=3, m=2, K=0.5, D=0.2)
        q = np.array([r, 0.0, 0.0])
        p = np.array([0.0, a, -a])
        np.testing.assert_allclose(velocity_map(params, q, p), p, atol=1e-15)

    def test_worked_value(self):
        v = velocity_map(BertrandParams.type1(n=1, m=2), [0, 0, 1], [0, 0, 1])
        np.testing.assert_allclose(v, [0, 0, 0.25], atol=1e-15)


class TestConserved:
    def test_values(self):
        p = BertrandParams.type1()
        cs = conserved(p, PhaseState([1, 0, 0], [0, 1, 0]))
        np.testing.assert_array_equal(cs.L, [0, 0, 1])
        assert cs.J2 == 1.0
        assert conserved(p, PhaseState([1, 2, 3], [2, 4, 6])).J2 == 0.0

    def test_j2_is_l_dot_l(self, rng):
        p = FAMILIES[2]
        s = random_state(rng, p)
        cs = conserved(p, s)
        assert cs.J2 == float(cs.L @ cs.L)


class TestPlaneRotation:
    def test_planar_identity(self):
        s = PhaseState([1.0, 0.5, 0.0], [0.0, 1.0, 0.0])
        R, radial = plane_rotation(s)
        assert not radial
        np.testing.assert_allclose(R, np.eye(3), atol=1e-15)

    @settings(max_examples=50)
    @given(vec3, vec3)
    def test_angular_momentum_to_normal(self, q, p):
        q, p = np.array(q), np.array(p)
        L = np.cross(q, p)
        if np.linalg.norm(L) < 1e-3:
            return
        red = rotate_to_plane(PhaseState(q, p))
        Lr = red.rotation @ L
        assert np.max(np.abs(Lr[:2])) < 1e-14 * max(1.0, np.linalg.norm(L))
        assert Lr[2] > 0
        back = red.state.rotated(red.rotation.T)
        np.testing.assert_allclose(back.q, q, atol=1e-14)
        np.testing.assert_allclose(back.p, p, atol=1e-14)
        np.testing.assert_allclose(red.rotation @ red.rotation.T, np.eye(3), atol=1e-14)

    def test_radial_flag(self):
        red = rotate_to_plane(PhaseState([0.0, 2.0, 0.0], [0.0, -1.0, 0.0]))
        assert red.radial
        np.testing.assert_allclose(red.state.q, [2.0, 0.0, 0.0], atol=1e-15)


def kepler_perihelion():
    params = BertrandParams.type1(amplitude=-1.0)
    return params, state_from_constants(params, -0.375, 1.0, 2.0 / 3.0)


class TestIntegrate:
    def test_kepler_turning_radii(self):
        params, s0 = kepler_perihelion()
        tr = integrate(params, s0, 3 * radial_period(params, -0.375, 1.0))
        assert tr.status == "ok"
        assert tr.r.min() == pytest.approx(2 / 3, abs=1e-7)
        assert tr.r.max() == pytest.approx(2.0, abs=1e-7)
        assert np.all(np.diff(tr.t) > 0)
        assert np.all(np.abs(np.diff(tr.phi_unwrapped)) < math.pi)

    def test_repulsive_escape(self):
        tr = integrate(BertrandParams.type1(), PhaseState([0.3, 0.2, -0.1], [0, 0, 0]), 20.0)
        assert np.all(np.diff(tr.r) > 0)

    def test_conservation_ten_periods(self):
        params, s0 = kepler_perihelion()
        s0 = s0.rotated(Rotation.from_rotvec([0.3, -1.1, 0.7]).as_matrix())
        tr = integrate(params, s0, 10 * radial_period(params, -0.375, 1.0))
        sets = [conserved(params, tr.state(i)) for i in range(len(tr))]
        e = max(abs(c.E - sets[0].E) for c in sets) / max(1.0, abs(sets[0].E))
        dl = max(np.max(np.abs(c.L - sets[0].L)) for c in sets)
        assert e < 1e-10 and dl < 1e-10

    def test_planarity(self):
        params = BertrandParams.type2(n=3, m=2, K=0.2, D=0.1, amplitude=-1.0)
        s0 = state_from_constants(params, 1.0, 0.3, 0.6)
        tr = integrate(params, s0, 20.0)
        assert np.max(np.abs(tr.q[:, 2])) < 1e-12 and np.max(np.abs(tr.p[:, 2])) < 1e-12

    def test_time_reversal(self):
        params, s0 = kepler_perihelion()
        T = 2.3
        fwd = integrate(params, s0, T)
        end = fwd.state(-1)
        back = integrate(params, PhaseState(end.q, -end.p), T)
        np.testing.assert_allclose(back.q[-1], s0.q, atol=100 * 1e-12)
        np.testing.assert_allclose(-back.p[-1], s0.p, atol=100 * 1e-12)

    def test_rotation_equivariance(self, rng):
        for _ in range(10):
            params, s0, E, J2 = random_bounded("type1", rng, rotate=False)
            R = Rotation.random(random_state=rng).as_matrix()
            T = 2 * radial_period(params, E, J2)
            a = integrate(params, s0.rotated(R), T, t_eval=[0, T])
            b = integrate(params, s0, T, t_eval=[0, T])
            np.testing.assert_allclose(a.q[-1], R @ b.q[-1], atol=1e-9)
            np.testing.assert_allclose(a.p[-1], R @ b.p[-1], atol=1e-9)

    def test_chart_exit(self):
        params = BertrandParams.type1(K=-1.0)
        tr = integrate(params, PhaseState([0.5, 0, 0], [1.0, 0.3, 0]), 50.0)
        assert tr.chart_exit
        assert tr.r[-1] == pytest.approx(1.0, rel=1e-6)
        assert np.all(np.isfinite(tr.q))

    def test_phase_matches_azimuth(self):
        params, s0 = kepler_perihelion()
        tr = integrate(params, s0, 5.0)
        wrapped = np.arctan2(tr.q[:, 1], tr.q[:, 0])
        d = np.angle(np.exp(1j * (tr.phi_unwrapped - wrapped)))
        assert np.max(np.abs(d)) < 1e-10

    def test_dense_output(self):
        params, s0 = kepler_perihelion()
        tr = integrate(params, s0, 5.0)
        mid = tr.state_at(tr.t[10])
        np.testing.assert_allclose(mid.q, tr.q[10], atol=1e-13)

    def test_rejects_bad_input(self):
        params, s0 = kepler_perihelion()
        with pytest.raises(ValueError):
            integrate(params, s0, 0.0)
        with pytest.raises(DomainError):
            integrate(BertrandParams.type1(K=-1.0), PhaseState([2, 0, 0], [0, 1, 0]), 1.0)
        with pytest.raises(ValueError):
            IntegratorSettings(rtol=0.0)


class TestImplicitMidpoint:
    def test_bounded_energy_error(self):
        params = BertrandParams.type2(amplitude=-1.0)
        s0 = PhaseState([1.0, 0, 0], [0, 0.7, 0])
        tr = integrate(params, s0, 200.0,
                       IntegratorSettings(method="implicit_midpoint", step=0.01, n_samples=401))
        E = np.array([hamiltonian(params, tr.state(i)) for i in range(len(tr))])
        assert np.max(np.abs(E - E[0])) < 1e-4
        L = np.array([np.cross(tr.q[i], tr.p[i]) for i in range(len(tr))])
        # the midpoint rule preserves quadratic invariants such as L exactly
        assert np.max(np.abs(L - L[0])) < 1e-12

    def test_agrees_with_adaptive(self):
        params, s0 = kepler_perihelion()
        a = integrate(params, s0, 3.0, IntegratorSettings(method="implicit_midpoint", step=1e-4,
                                                          n_samples=4))
        b = integrate(params, s0, 3.0, t_eval=a.t)
        np.testing.assert_allclose(a.q, b.q, atol=1e-6)
