"""Tests for the generic flow/bracket/scattering layer."""

import numpy as np
import pytest

from intlab.dynamics import (
    HamiltonianSystem,
    PhasePoint,
    Trajectory,
    extract_scattering,
    integrate_flow,
    invariant_drift,
    poisson_bracket_fd,
)
from intlab.errors import ConvergenceError, DomainError, StiffnessError


def free_system(n):
    return HamiltonianSystem(
        dim=n,
        hamiltonian=lambda x: 0.5 * float(np.dot(x.p, x.p)),
        grad=lambda x: (np.zeros(n), x.p.copy()),
        name="free",
    )


class TestPhasePoint:
    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            PhasePoint(np.zeros(2), np.zeros(3))

    def test_vector_roundtrip(self):
        x = PhasePoint([1.0, 2.0], [3.0, 4.0])
        y = PhasePoint.from_vector(x.to_vector())
        np.testing.assert_allclose(y.q, x.q)
        np.testing.assert_allclose(y.p, x.p)


class TestIntegrateFlow:
    def test_free_motion_is_linear(self):
        x0 = PhasePoint([1.0, -0.5], [0.3, 0.8])
        traj = integrate_flow(free_system(2), x0, (0.0, 5.0), tol=1e-10)
        for t, x in zip(traj.times, traj.states):
            np.testing.assert_allclose(x.q, x0.q + t * x0.p, atol=1e-9)
            np.testing.assert_allclose(x.p, x0.p, atol=1e-12)
        assert traj.status == "completed"

    def test_energy_recorded(self):
        x0 = PhasePoint([0.0], [2.0])
        traj = integrate_flow(free_system(1), x0, (0.0, 1.0), tol=1e-10)
        np.testing.assert_allclose(traj.invariants["energy"], 2.0, atol=1e-12)
        assert traj.energy_drift() < 1e-12

    def test_backward_span_gives_increasing_times(self):
        x0 = PhasePoint([1.0], [1.0])
        traj = integrate_flow(free_system(1), x0, (0.0, -3.0), tol=1e-10)
        assert traj.times[0] == pytest.approx(-3.0)
        assert traj.times[-1] == pytest.approx(0.0)
        assert np.all(np.diff(traj.times) > 0)
        # earliest sample is the far past of the flow
        np.testing.assert_allclose(traj.initial.q, x0.q - 3.0 * x0.p, atol=1e-9)

    def test_truncates_on_domain_exit(self):
        sys = HamiltonianSystem(
            dim=1,
            hamiltonian=lambda x: 0.5 * float(np.dot(x.p, x.p)),
            grad=lambda x: (np.zeros(1), x.p.copy()),
            domain_check=lambda x: x.q[0] > 0,
            boundary_margin=lambda x: float(x.q[0]),
            name="half-line",
        )
        traj = integrate_flow(sys, PhasePoint([1.0], [-1.0]), (0.0, 3.0), tol=1e-10)
        assert traj.status == "truncated"
        assert traj.times[-1] <= 1.0 + 1e-6
        assert all(x.q[0] > 0 for x in traj.states)

    def test_stiff_singularity_raises(self):
        # 1-d Kepler infall: the particle reaches the origin in finite time
        sys = HamiltonianSystem(
            dim=1,
            hamiltonian=lambda x: 0.5 * float(x.p[0] ** 2) - 1.0 / abs(x.q[0]),
            grad=lambda x: (
                np.array([np.sign(x.q[0]) / x.q[0] ** 2]),
                x.p.copy(),
            ),
            name="kepler-infall",
        )
        with pytest.raises((StiffnessError, DomainError)):
            integrate_flow(sys, PhasePoint([1.0], [0.0]), (0.0, 3.0), tol=1e-10)

    def test_rejects_bad_tolerance(self):
        with pytest.raises(DomainError):
            integrate_flow(free_system(1), PhasePoint([0.0], [1.0]), (0, 1), tol=0.0)

    def test_self_convergence(self):
        # halving the tolerance should at least halve the endpoint error
        from intlab.calogero import make_system

        sys = make_system(3, 1.0)
        x0 = PhasePoint([1.0, 0.0, -1.0], [1.0, -1.0, 1.0])
        ref = integrate_flow(sys, x0, (0.0, 4.0), tol=2.5e-8, n_samples=2)
        end_ref = ref.final.to_vector()

        def endpoint_error(tol):
            traj = integrate_flow(sys, x0, (0.0, 4.0), tol=tol, n_samples=2)
            return np.max(np.abs(traj.final.to_vector() - end_ref))

        assert endpoint_error(1e-7) >= 2.0 * endpoint_error(5e-8)


class TestPoissonBracketFd:
    def test_canonical_pairs(self):
        x = PhasePoint([0.4, -1.2], [0.9, 2.0])
        for i in range(2):
            for j in range(2):
                val = poisson_bracket_fd(
                    lambda y, i=i: y.q[i], lambda y, j=j: y.p[j], x
                )
                assert val == pytest.approx(1.0 if i == j else 0.0, abs=1e-8)

    def test_antisymmetry_on_same_observable(self):
        H = lambda y: 0.5 * float(np.dot(y.p, y.p)) + float(np.sum(np.cos(y.q)))
        x = PhasePoint([0.3, 0.7], [1.0, -0.2])
        assert poisson_bracket_fd(H, H, x) == pytest.approx(0.0, abs=1e-8)

    def test_polynomial_hand_value(self):
        # f = q1^2 p2, g = q2 p1: {f, g} = 2 q1 q2 p2 - q1^2 p1
        f = lambda y: y.q[0] ** 2 * y.p[1]
        g = lambda y: y.q[1] * y.p[0]
        x = PhasePoint([1.3, -0.6], [0.4, 2.1])
        want = 2 * 1.3 * (-0.6) * 2.1 - 1.3 ** 2 * 0.4
        assert poisson_bracket_fd(f, g, x) == pytest.approx(want, abs=1e-7)

    def test_canonical_matrix(self):
        rng = np.random.default_rng(6)
        x = PhasePoint(rng.normal(size=3), rng.normal(size=3))
        coords = [(lambda y, i=i: y.q[i]) for i in range(3)]
        coords += [(lambda y, i=i: y.p[i]) for i in range(3)]
        J = np.zeros((6, 6))
        for a in range(6):
            for b in range(6):
                J[a, b] = poisson_bracket_fd(coords[a], coords[b], x)
        want = np.block(
            [[np.zeros((3, 3)), np.eye(3)], [-np.eye(3), np.zeros((3, 3))]]
        )
        np.testing.assert_allclose(J, want, atol=1e-8)

    def test_retry_then_error(self):
        def spiky(y):
            if abs(y.q[0]) > 1e-12:
                raise DomainError("off the point")
            return 0.0

        with pytest.raises(DomainError):
            poisson_bracket_fd(spiky, lambda y: y.p[0], PhasePoint([0.0], [0.0]))


class TestExtractScattering:
    def run_free(self, q0, p0, T=40.0):
        sys = free_system(len(q0))
        x0 = PhasePoint(q0, p0)
        fwd = integrate_flow(sys, x0, (0.0, T), tol=1e-12)
        bwd = integrate_flow(sys, x0, (0.0, -T), tol=1e-12)
        return extract_scattering(fwd, bwd)

    def test_free_system_momenta(self):
        data = self.run_free([1.0, 0.0, -1.0], [0.5, -0.3, 1.2])
        np.testing.assert_allclose(data.theta_plus, [1.2, 0.5, -0.3], atol=1e-9)
        np.testing.assert_allclose(data.theta_minus, [-0.3, 0.5, 1.2], atol=1e-9)

    def test_free_system_phases(self):
        data = self.run_free([2.0, -2.0], [1.0, -1.0])
        np.testing.assert_allclose(data.lambda_plus, [2.0, -2.0], atol=1e-8)

    def test_not_asymptotic_rejected(self):
        # an oscillator never becomes free
        sys = HamiltonianSystem(
            dim=1,
            hamiltonian=lambda x: 0.5 * (x.p[0] ** 2 + 25.0 * x.q[0] ** 2),
            grad=lambda x: (25.0 * x.q, x.p.copy()),
            name="oscillator",
        )
        x0 = PhasePoint([1.0], [0.0])
        fwd = integrate_flow(sys, x0, (0.0, 20.0), tol=1e-10)
        bwd = integrate_flow(sys, x0, (0.0, -20.0), tol=1e-10)
        with pytest.raises(ConvergenceError):
            extract_scattering(fwd, bwd)


class TestInvariantDrift:
    def test_constant_family(self):
        traj = integrate_flow(
            free_system(1), PhasePoint([0.0], [1.0]), (0.0, 2.0), tol=1e-10
        )
        drift = invariant_drift(traj, {"const": lambda x: 1.0})
        assert drift["const"] == 0.0

    def test_position_is_not_conserved(self):
        traj = integrate_flow(
            free_system(1), PhasePoint([0.0], [1.0]), (0.0, 2.0), tol=1e-10
        )
        drift = invariant_drift(traj, {"q1": lambda x: x.q[0]})
        assert drift["q1"] == pytest.approx(2.0, abs=1e-8)

    def test_uses_stored_invariants(self):
        traj = integrate_flow(
            free_system(2),
            PhasePoint([1.0, 0.0], [0.2, -0.4]),
            (0.0, 3.0),
            tol=1e-10,
            invariant_family={"psum": lambda x: float(np.sum(x.p))},
        )
        drift = invariant_drift(traj)
        assert drift["psum"] <= 1e-12
        assert "energy" in drift


def test_trajectory_requires_increasing_times():
    x = PhasePoint([0.0], [0.0])
    with pytest.raises(DomainError):
        Trajectory(times=np.array([0.0, 0.0]), states=(x, x))
