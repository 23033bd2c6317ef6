import numpy as np
import pytest

from gcnetlab.dynamics import (
    DroneParams,
    drone_cost,
    drone_derivative,
    drone_forces,
    drone_moments,
    euler_rate_matrix,
    rotation_body_to_world,
)
from gcnetlab.dynamics.drone import EUL, P, PROP, RATE, V
from gcnetlab.errors import GimbalLockError


def params(**over):
    base = dict(
        inertia=(1.2e-3, 1.4e-3, 2.2e-3),
        k_x=1e-5, k_y=1e-5, k_omega=8.1e-6, k_z=1e-5, k_h=5e-3,
        k_p=4e-6, k_pv=-8e-4, k_q=3.8e-6, k_qv=9e-4,
        k_r1=2e-5, k_r2=1e-7, k_rr=3e-4,
        tau=0.06, omega_min=100.0, omega_max=1100.0,
        mass=0.9,
    )
    base.update(over)
    return DroneParams(**base)


def zero_state():
    return np.zeros(16)


class TestRotation:
    def test_identity_at_zero(self):
        assert np.allclose(rotation_body_to_world((0.0, 0.0, 0.0)), np.eye(3))

    def test_orthogonal_unit_determinant(self):
        rng = np.random.default_rng(0)
        for lam in rng.uniform(-np.pi, np.pi, size=(10_000, 3)):
            r = rotation_body_to_world(lam)
            assert np.allclose(r.T @ r, np.eye(3), atol=1e-12)
            assert abs(np.linalg.det(r) - 1.0) < 1e-12

    def test_yaw_quarter_turn_maps_x_to_y(self):
        r = rotation_body_to_world((0.0, 0.0, np.pi / 2))
        assert np.allclose(r @ np.array([1.0, 0, 0]), [0.0, 1.0, 0.0], atol=1e-15)


class TestEulerRates:
    def test_identity_at_level_attitude(self):
        assert np.allclose(euler_rate_matrix((0.0, 0.0, 1.3)), np.eye(3))

    def test_gimbal_lock_raises(self):
        with pytest.raises(GimbalLockError):
            euler_rate_matrix((0.0, np.pi / 2, 0.0))

    def test_quarter_roll(self):
        q = euler_rate_matrix((np.pi / 2, 0.0, 0.0))
        expected = np.array([[1.0, 0, 0], [0, 0, -1.0], [0, 1.0, 0]])
        assert np.allclose(q, expected, atol=1e-15)

    def test_inverse_of_euler_to_body_map(self):
        # body rates from Euler rates: Omega = T(lam) lam_dot with
        # T = [[1, 0, -s_th], [0, c_ph, s_ph c_th], [0, -s_ph, c_ph c_th]]
        rng = np.random.default_rng(1)
        for _ in range(100):
            lam = rng.uniform(-1.2, 1.2, size=3)
            phi, theta, _ = lam
            t = np.array(
                [
                    [1.0, 0.0, -np.sin(theta)],
                    [0.0, np.cos(phi), np.sin(phi) * np.cos(theta)],
                    [0.0, -np.sin(phi), np.cos(phi) * np.cos(theta)],
                ]
            )
            assert np.allclose(euler_rate_matrix(lam) @ t, np.eye(3), atol=1e-12)


class TestForces:
    def test_planar_velocity_only_excites_kh(self):
        p = params()
        s = zero_state()
        s[V] = [1.0, 1.0, 0.0]  # level attitude: body velocity = world velocity
        f = drone_forces(s, p)
        assert np.allclose(f, [0.0, 0.0, -2.0 * p.k_h])

    def test_static_spin_gives_rotor_thrust(self):
        p = params()
        s = zero_state()
        s[PROP] = 500.0
        f = drone_forces(s, p)
        assert np.allclose(f, [0.0, 0.0, -4.0 * p.k_omega * 500.0**2])

    def test_hover_balance(self):
        p = params()
        w_hover = np.sqrt(p.mass * p.g / (4.0 * p.k_omega))
        s = zero_state()
        s[PROP] = w_hover
        f = drone_forces(s, p)
        assert np.isclose(f[2], -p.mass * p.g)
        dx = drone_derivative(s, np.full(4, 0.5), p)
        assert np.allclose(dx[V], 0.0, atol=1e-9)  # level hover: v_dot = g + F_z/m = 0


class TestMoments:
    def test_balanced_rotors_cancel(self):
        s = zero_state()
        s[PROP] = 400.0
        assert np.allclose(drone_moments(s, np.zeros(4), params()), 0.0)

    def test_single_rotor(self):
        p = params()
        w = 300.0
        s = zero_state()
        s[PROP] = [w, 0.0, 0.0, 0.0]
        m = drone_moments(s, np.zeros(4), p)
        assert np.allclose(m, [p.k_p * w**2, p.k_q * w**2, -p.k_r1 * w])

    def test_yaw_damping_sign(self):
        p = params()
        s = zero_state()
        s[RATE] = [0.0, 0.0, 2.0]
        m = drone_moments(s, np.zeros(4), p)
        assert m[2] == -p.k_rr * 2.0 < 0


class TestDerivative:
    def test_motor_lag_at_rest(self):
        p = params()
        s = zero_state()
        s[PROP] = p.omega_min
        dx = drone_derivative(s, np.zeros(4), p)
        assert np.allclose(dx[PROP], 0.0)

    def test_motor_lag_full_throttle(self):
        p = params()
        s = zero_state()
        s[PROP] = p.omega_min
        dx = drone_derivative(s, np.ones(4), p)
        assert np.allclose(dx[PROP], (p.omega_max - p.omega_min) / p.tau)

    def test_free_fall(self):
        p = params()
        dx = drone_derivative(zero_state(), np.zeros(4), p)
        assert np.allclose(dx[V], [0.0, 0.0, p.g])
        assert np.allclose(dx[P], 0.0)

    def test_external_moment_enters_rate_equation(self):
        p = params(m_ext=(1e-4, 0.0, 0.0))
        dx = drone_derivative(zero_state(), np.zeros(4), p)
        assert np.isclose(dx[RATE][0], 1e-4 / p.inertia[0])


class TestCost:
    def test_time_optimal_limit(self):
        times = np.linspace(0.0, 3.0, 50)
        controls = np.random.default_rng(0).uniform(size=(50, 4))
        assert np.isclose(drone_cost(times, controls, 0.0), 3.0)

    def test_energy_of_constant_full_throttle(self):
        times = np.linspace(0.0, 2.0, 40)
        controls = np.ones((40, 4))
        assert np.isclose(drone_cost(times, controls, 1.0), 8.0)

    def test_even_blend_of_zero_control(self):
        times = np.linspace(0.0, 10.0, 11)
        controls = np.zeros((11, 4))
        assert np.isclose(drone_cost(times, controls, 0.5), 5.0)
