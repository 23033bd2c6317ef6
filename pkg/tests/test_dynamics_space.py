import numpy as np
import pytest

from gcnetlab.dynamics import (
    ConstantPolicy,
    LandingParams,
    LandingSystem,
    TransferParams,
    TransferSystem,
    landing_derivative,
    propagate_closed_loop,
    rk4_integrate,
    rotating_energy,
    transfer_derivative,
)
from gcnetlab.errors import NonFiniteError, SingularStateError

LANDING = LandingParams(mu=1.0, omega=1.0, c1=0.1, isp=1.0, g0=1.0)
TRANSFER = TransferParams(mu=1.0, radius=1.0, gamma=0.1)
XHAT = np.array([1.0, 0.0, 0.0])


class TestLandingDerivative:
    def test_mass_flow_at_full_throttle(self):
        state = np.array([1.2, 0, 0, 0, 0, 0, 1.0])
        dx = landing_derivative(state, 1.0, XHAT, LANDING)
        assert np.isclose(dx[6], -LANDING.c1 / (LANDING.isp * LANDING.g0))

    def test_synchronous_radius_equilibrium(self):
        x_sync = (LANDING.mu / LANDING.omega**2) ** (1.0 / 3.0)
        state = np.array([x_sync, 0, 0, 0, 0, 0, 1.0])
        dx = landing_derivative(state, 0.0, XHAT, LANDING)
        assert np.allclose(dx, 0.0, atol=1e-14)

    def test_z_mirror_symmetry(self):
        rng = np.random.default_rng(0)
        state = np.concatenate([rng.uniform(0.5, 1.5, 3), rng.normal(0, 0.1, 3), [1.0]])
        mirrored = state.copy()
        mirrored[2] *= -1
        mirrored[5] *= -1
        a = landing_derivative(state, 0.0, XHAT, LANDING)
        b = landing_derivative(mirrored, 0.0, XHAT, LANDING)
        assert np.allclose(b[3:5], a[3:5])
        assert np.isclose(b[5], -a[5])

    def test_coriolis_signs(self):
        # moving along +y adds +2*omega*v_y to x acceleration
        state = np.array([1.0, 0, 0, 0.0, 0.3, 0, 1.0])
        base = np.array([1.0, 0, 0, 0.0, 0.0, 0, 1.0])
        d_moving = landing_derivative(state, 0.0, XHAT, LANDING)
        d_still = landing_derivative(base, 0.0, XHAT, LANDING)
        assert np.isclose(d_moving[3] - d_still[3], 2.0 * LANDING.omega * 0.3)

    def test_singularities(self):
        with pytest.raises(SingularStateError):
            landing_derivative(np.array([1, 0, 0, 0, 0, 0, 0.0]), 0.5, XHAT, LANDING)
        with pytest.raises(SingularStateError):
            landing_derivative(np.zeros(7) + np.array([0, 0, 0, 0, 0, 0, 1.0]), 0.0, XHAT, LANDING)


class TestTransferDerivative:
    def test_target_is_fixed_point(self):
        state = np.array([TRANSFER.radius, 0, 0, 0, 0, 0])
        coasting = TransferParams(mu=1.0, radius=1.0, gamma=1e-300)
        dx = transfer_derivative(state, np.zeros(3), coasting)
        assert np.allclose(dx, 0.0, atol=1e-14)

    def test_thrust_superposition(self):
        state = np.array([TRANSFER.radius, 0, 0, 0, 0, 0])
        dx = transfer_derivative(state, XHAT, TRANSFER)
        assert np.allclose(dx[3:], [TRANSFER.gamma, 0.0, 0.0], atol=1e-14)

    def test_matches_landing_acceleration_structure(self):
        # with u*c1/m = gamma, fixed mass, equal spin, the two fields agree
        rng = np.random.default_rng(3)
        for _ in range(50):
            r = rng.uniform(0.6, 1.8, 3)
            v = rng.normal(0, 0.3, 3)
            t_hat = r / np.linalg.norm(r)
            mass = rng.uniform(0.5, 2.0)
            u = rng.uniform(0.1, 1.0)
            gamma = u * LANDING.c1 / mass
            tp = TransferParams(mu=LANDING.mu, radius=(LANDING.mu / LANDING.omega**2) ** (1 / 3), gamma=gamma)
            assert np.isclose(tp.spin, LANDING.omega)
            d_transfer = transfer_derivative(np.concatenate([r, v]), t_hat, tp)
            d_landing = landing_derivative(np.concatenate([r, v, [mass]]), u, t_hat, LANDING)
            assert np.allclose(d_transfer[3:6], d_landing[3:6], atol=1e-13)


class TestRK4:
    def test_exponential_decay(self):
        times, states = rk4_integrate(lambda t, x: -x, np.array([1.0]), 0.0, 1.0, 1e-3)
        assert abs(states[-1, 0] - np.exp(-1.0)) < 1e-10
        assert times[-1] == 1.0

    def test_constant_field(self):
        times, states = rk4_integrate(lambda t, x: np.zeros(2), np.array([3.0, -1.0]), 0.0, 5.0, 0.1)
        assert np.all(states == states[0])

    def test_fourth_order_convergence(self):
        # smooth nonlinear problem: x' = x^2, x0=0.5 on [0,1], exact 1/(2-t)
        def rhs(t, x):
            return x**2

        exact = 1.0
        errs = []
        for dt in (0.02, 0.01, 0.005):
            _, states = rk4_integrate(rhs, np.array([0.5]), 0.0, 1.0, dt)
            errs.append(abs(states[-1, 0] - exact))
        order1 = np.log2(errs[0] / errs[1])
        order2 = np.log2(errs[1] / errs[2])
        assert 3.8 <= order1 <= 4.2
        assert 3.8 <= order2 <= 4.2

    def test_final_step_shortened(self):
        times, _ = rk4_integrate(lambda t, x: -x, np.array([1.0]), 0.0, 0.35, 0.1)
        assert np.isclose(times[-1], 0.35)
        assert len(times) == 5  # 0, .1, .2, .3, .35

    def test_nonfinite_abort_carries_time(self):
        def rhs(t, x):
            with np.errstate(over="ignore"):
                return np.array([1e155 * x[0] ** 3])

        with pytest.raises(NonFiniteError):
            rk4_integrate(rhs, np.array([1.0]), 0.0, 10.0, 0.5)


class TestJacobiDrift:
    @pytest.mark.parametrize("which", ["landing", "transfer"])
    def test_coasting_preserves_rotating_energy(self, which):
        if which == "landing":
            system = LandingSystem(LANDING)
            mu, spin = LANDING.mu, LANDING.omega
            x0 = np.array([1.1, 0.0, 0.02, 0.05, 0.85, 0.0, 1.0])
            policy = ConstantPolicy([0.0, 1.0, 0.0, 0.0])  # zero throttle
        else:
            system = TransferSystem(TransferParams(mu=1.0, radius=1.0, gamma=1e-300))
            mu, spin = 1.0, 1.0
            x0 = np.array([1.1, 0.0, 0.02, 0.05, 0.85, 0.0])
            policy = ConstantPolicy([1.0, 0.0, 0.0])
        period = 2 * np.pi
        traj = propagate_closed_loop(system, policy, x0, period, dt=period * 1e-4)
        c0 = rotating_energy(x0, mu, spin)
        drift = max(abs(rotating_energy(s, mu, spin) - c0) for s in traj.states[:: 100])
        assert drift / abs(c0) < 1e-8

    def test_rotating_circular_orbit_is_fixed_point_of_frame(self):
        # inertial circular orbit of radius R <-> stationary point in the frame
        system = TransferSystem(TransferParams(mu=1.0, radius=1.0, gamma=1e-300))
        x0 = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        period = 2 * np.pi
        traj = propagate_closed_loop(system, ConstantPolicy([1.0, 0, 0]), x0, period, dt=period * 1e-4)
        assert np.linalg.norm(traj.final_state[:3] - x0[:3]) < 1e-9


class TestClosedLoopPlumbing:
    def test_zero_horizon_returns_initial_state(self):
        system = TransferSystem(TRANSFER)
        x0 = np.array([1.2, 0.1, 0.0, 0.0, -0.1, 0.0])
        traj = propagate_closed_loop(system, ConstantPolicy(XHAT), x0, 0.0)
        assert np.array_equal(traj.final_state, x0)

    def test_direction_normalized_before_use(self):
        system = TransferSystem(TRANSFER)
        x0 = np.array([1.0, 0, 0, 0, 0, 0])
        big = propagate_closed_loop(system, ConstantPolicy([100.0, 0, 0]), x0, 0.5, dt=0.01)
        unit = propagate_closed_loop(system, ConstantPolicy([1.0, 0, 0]), x0, 0.5, dt=0.01)
        assert np.allclose(big.final_state, unit.final_state)

    def test_throttle_clamped(self):
        system = LandingSystem(LANDING)
        x0 = np.array([1.1, 0, 0, 0, 0, 0, 1.0])
        over = propagate_closed_loop(system, ConstantPolicy([7.0, 1, 0, 0]), x0, 0.5, dt=0.01)
        full = propagate_closed_loop(system, ConstantPolicy([1.0, 1, 0, 0]), x0, 0.5, dt=0.01)
        assert np.allclose(over.final_state, full.final_state)

    def test_non_finite_policy_aborts(self):
        system = TransferSystem(TRANSFER)
        x0 = np.array([1.0, 0, 0, 0, 0, 0])
        with pytest.raises(NonFiniteError):
            propagate_closed_loop(system, ConstantPolicy([np.nan, 0, 0]), x0, 1.0, dt=0.1)

    def test_zero_order_hold_differs_from_continuous(self):
        system = TransferSystem(TRANSFER)
        x0 = np.array([1.3, 0.2, 0.0, 0.0, -0.4, 0.0])

        def steering(t, state):
            return -state[3:6] - np.array([0.1, 0, 0])

        cont = propagate_closed_loop(system, steering, x0, 2.0, dt=0.01)
        held = propagate_closed_loop(system, steering, x0, 2.0, dt=0.01, hold_dt=0.5)
        assert not np.allclose(cont.final_state, held.final_state)
