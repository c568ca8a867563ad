"""Closed-loop reach-avoid loop: hold semantics, last-error mode, soundness."""

import numpy as np
import pytest

from symreach import (
    DisturbanceSpec,
    Layer,
    Network,
    Polyhedron,
    RAProblem,
    SymbolProvider,
    SZonotope,
    forward,
    verify,
    verify_last_error,
    with_initial_set,
)
from symreach import szono as sz
from symreach.errors import AbstractionError, ConfigError

from conftest import random_directions


def identity_net(n=1):
    return Network((Layer(np.eye(n), np.zeros(n), "linear"),))


def zero_net(n_in=1, n_out=1):
    return Network((Layer(np.zeros((n_out, n_in)), np.zeros(n_out), "linear"),))


def relu_net(shape, rng, scale=0.8):
    layers = []
    for k in range(len(shape) - 1):
        act = "linear" if k == len(shape) - 2 else "relu"
        layers.append(
            Layer(
                scale * rng.normal(size=(shape[k + 1], shape[k])),
                scale * rng.normal(size=shape[k + 1]),
                act,
            )
        )
    return Network(tuple(layers))


EVERYWHERE = Polyhedron.from_box([[-1e9, 1e9]])


class TestProblemValidation:
    def test_horizon_must_be_positive(self):
        with pytest.raises(ConfigError):
            RAProblem(SZonotope([0.0], [[1.0]], [1]), identity_net(), ["x1"], horizon=0)

    def test_hold_must_be_positive(self):
        with pytest.raises(ConfigError):
            RAProblem(SZonotope([0.0], [[1.0]], [1]), identity_net(), ["x1"], horizon=1, hold=0)

    def test_unknown_engine(self):
        with pytest.raises(ConfigError):
            RAProblem(
                SZonotope([0.0], [[1.0]], [1]), identity_net(), ["x1"], horizon=1, engine="exact"
            )

    def test_dynamics_count_must_match_state_dim(self):
        with pytest.raises(ConfigError):
            RAProblem(
                SZonotope([0.0, 0.0], np.eye(2), [1, 2]), identity_net(2), ["x1"], horizon=1
            )

    def test_controller_dim_mismatch(self):
        with pytest.raises(ConfigError):
            RAProblem(SZonotope([0.0], [[1.0]], [1]), identity_net(2), ["x1"], horizon=1)

    def test_avoid_sequence_length_checked(self):
        with pytest.raises(ConfigError):
            RAProblem(
                SZonotope([0.0], [[1.0]], [1]),
                identity_net(),
                ["x1"],
                horizon=3,
                avoid=[None, EVERYWHERE],
            )

    def test_with_initial_set(self, provider):
        p = RAProblem(SZonotope([0.0], [[1.0]], [1]), identity_net(), ["x1"], horizon=2)
        q = with_initial_set(p, SZonotope([5.0], [[0.5]], [9]))
        assert q.x0.c[0] == 5.0
        assert q.horizon == p.horizon and p.x0.c[0] == 0.0


class TestHoldCancellation:
    """x+ = -x + u with u = x held over two steps collapses back to X0."""

    def problem(self, hold):
        return RAProblem(
            x0=SZonotope([0.0], [[1.0]], [1]),
            network=identity_net(),
            dynamics=["-x1 + u1"],
            horizon=2,
            goal=EVERYWHERE,
            hold=hold,
        )

    def test_held_input_cancels_exactly(self, provider):
        res = verify(self.problem(hold=2), provider=provider)
        assert res.verified
        np.testing.assert_allclose(res.hulls[0], [[-1.0, 1.0]], atol=1e-15)
        np.testing.assert_allclose(res.hulls[1], [[0.0, 0.0]], atol=1e-15)
        np.testing.assert_allclose(res.hulls[2], [[-1.0, 1.0]], atol=1e-15)

    def test_refreshed_input_stays_at_zero(self, provider):
        res = verify(self.problem(hold=1), provider=provider)
        np.testing.assert_allclose(res.hulls[2], [[0.0, 0.0]], atol=1e-15)

    def test_naive_disturbance_model_blows_up(self, provider):
        """Same toy with u as an unrelated per-step disturbance: [-3, 3]."""
        p = RAProblem(
            x0=SZonotope([0.0], [[1.0]], [1]),
            network=zero_net(),
            dynamics=["-x1 + w1"],
            horizon=2,
            disturbance=DisturbanceSpec([1.0]),
            goal=EVERYWHERE,
        )
        res = verify(p, provider=provider)
        np.testing.assert_allclose(res.hulls[2], [[-3.0, 3.0]], atol=1e-15)


class TestVerify:
    def test_whole_space_goal_is_trivially_met(self, provider):
        p = RAProblem(SZonotope([0.0], [[1.0]], [1]), identity_net(), ["x1 + u1"], 3,
                      goal=EVERYWHERE)
        res = verify(p, provider=provider)
        assert res.verified and res.t_err is None
        assert len(res.sets) == 4
        assert res.symbol_counts[0] == 1

    def test_avoid_covering_initial_set(self, provider):
        p = RAProblem(
            SZonotope([0.0], [[1.0]], [1]),
            identity_net(),
            ["x1"],
            horizon=3,
            avoid=Polyhedron.from_box([[-2.0, 2.0]]),
        )
        res = verify(p, provider=provider)
        assert not res.verified
        assert res.t_err == 0
        assert len(res.sets) == 1  # stopped before the first step
        assert res.witness is res.sets[0]

    def test_goal_miss_reports_horizon(self, provider):
        p = RAProblem(
            SZonotope([0.0]), identity_net(), ["x1 + 1"], horizon=3,
            goal=Polyhedron.from_box([[100.0, 101.0]]),
        )
        res = verify(p, provider=provider)
        assert not res.verified and res.t_err == 3
        np.testing.assert_allclose(res.witness.c, [3.0])

    def test_avoid_checked_per_instant(self, provider):
        # x walks 0,1,2,3; the box [1.9, 2.1] is hit exactly at instant 2
        avoid = [None, None, Polyhedron.from_box([[1.9, 2.1]])]
        p = RAProblem(SZonotope([0.0]), identity_net(), ["x1 + 1"], 3, avoid=avoid)
        res = verify(p, provider=provider)
        assert res.t_err == 2
        assert len(res.sets) == 3

    def test_abstraction_error_carries_step_index(self, provider):
        p = RAProblem(
            SZonotope([1.0], [[0.5]], [1]),
            zero_net(),
            ["recip(x1) - 1"],
            horizon=3,
        )
        with pytest.raises(AbstractionError, match="^step 1:"):
            verify(p, provider=provider)


class TestVerifyLastError:
    def make(self, avoid, horizon, goal=None):
        return RAProblem(SZonotope([0.0]), identity_net(), ["x1 + 1"], horizon,
                         avoid=avoid, goal=goal)

    def test_reports_last_of_two_violations(self, provider):
        avoid = [None] * 6
        avoid[2] = Polyhedron.from_box([[1.9, 2.1]])
        avoid[5] = Polyhedron.from_box([[4.9, 5.1]])
        res = verify_last_error(self.make(avoid, 6), provider=provider)
        assert res.t_err == 5
        assert not res.verified
        assert len(res.sets) == 7  # no early stop
        np.testing.assert_allclose(res.witness.c, [5.0])

    def test_no_violation(self, provider):
        res = verify_last_error(self.make(None, 4, goal=EVERYWHERE), provider=provider)
        assert res.verified and res.t_err is None

    def test_goal_violation_reported_at_horizon(self, provider):
        res = verify_last_error(
            self.make(None, 3, goal=Polyhedron.from_box([[100.0, 101.0]])),
            provider=provider,
        )
        assert res.t_err == 3

    def test_cap_skips_later_checks(self, provider):
        avoid = [None] * 6
        avoid[5] = Polyhedron.from_box([[4.9, 5.1]])
        res = verify_last_error(self.make(avoid, 6, goal=Polyhedron.from_box([[-1.0, 1.0]])),
                                horizon_cap=3, provider=provider)
        assert res.verified  # neither instant 5 nor the goal is in scope
        assert len(res.sets) == 4

    def test_cap_instant_itself_is_checked(self, provider):
        avoid = [None] * 6
        avoid[3] = Polyhedron.from_box([[2.9, 3.1]])
        res = verify_last_error(self.make(avoid, 6), horizon_cap=3, provider=provider)
        assert res.t_err == 3


def linear_problem(rng, horizon=10, budget=30, hold=2, net=None):
    net = net or relu_net((2, 4, 1), rng)
    return RAProblem(
        x0=SZonotope([0.5, -0.2], 0.3 * np.eye(2), [1, 2]),
        network=net,
        dynamics=[
            "0.8*x1 + 0.1*x2 + 0.1*u1 + 0.02*w1",
            "-0.1*x1 + 0.85*x2 + 0.05*u1",
        ],
        horizon=horizon,
        disturbance=DisturbanceSpec([1.0]),
        symbol_budget=budget,
        hold=hold,
    )


def rollout(problem, x, rng):
    """One concrete closed-loop trajectory honoring the hold schedule."""
    traj = [np.asarray(x, dtype=float)]
    u = None
    for i in range(problem.horizon):
        if i % problem.hold == 0:
            u = forward(problem.network, traj[-1])
        w = None
        if problem.disturbance is not None:
            amp, ctr = problem.disturbance.amplitude, problem.disturbance.center
            w = ctr + amp * rng.uniform(-1, 1, size=amp.shape)
        from symreach import eval_concrete

        traj.append(np.array([eval_concrete(e, traj[-1], u, w) for e in problem.dynamics]))
    return np.array(traj)


class TestSoundness:
    def test_monte_carlo_rollouts_stay_inside(self):
        rng = np.random.default_rng(40)
        p = linear_problem(rng)
        res = verify(p, provider=SymbolProvider(start=10))
        dirs = random_directions(rng, 2, 20)
        sups = np.array([[sz.support(h, S) for h in dirs] for S in res.sets])
        for _ in range(200):
            x0 = sz.evaluate(p.x0, rng.uniform(-1, 1, size=2))
            traj = rollout(p, x0, rng)
            for t, xt in enumerate(traj):
                assert (dirs @ xt <= sups[t] + 1e-9).all()

    def test_protected_symbols_survive_reduction(self):
        rng = np.random.default_rng(41)
        p = linear_problem(rng, budget=8)  # tight enough to force reduction
        res = verify(p, provider=SymbolProvider(start=10), protect_ids=p.x0.ids)
        for S in res.sets:
            assert {1, 2} <= set(S.ids.tolist())
            assert S.order <= 8

    def test_budget_respected_without_protection(self):
        rng = np.random.default_rng(42)
        p = linear_problem(rng, budget=7)
        res = verify(p, provider=SymbolProvider(start=10))
        assert all(S.order <= 7 for S in res.sets)


class TestDeterminism:
    def test_bit_identical_reruns(self):
        rng = np.random.default_rng(43)
        net = relu_net((2, 4, 1), rng)
        runs = []
        for _ in range(2):
            p = linear_problem(np.random.default_rng(0), net=net)
            runs.append(verify(p, provider=SymbolProvider(start=0)))
        a, b = runs
        assert len(a.sets) == len(b.sets)
        for S, T in zip(a.sets, b.sets):
            assert np.array_equal(S.ids, T.ids)
            assert np.array_equal(S.c, T.c)
            assert np.array_equal(S.G, T.G)


class TestReductionOrder:
    def test_larger_budget_never_looser(self):
        """Nested budgets: the looser run support-dominates the tighter one."""
        rng = np.random.default_rng(44)
        net = relu_net((2, 4, 1), rng, scale=0.5)
        lin = Network((Layer(0.3 * np.ones((1, 2)), np.zeros(1), "linear"),))
        for controller in (lin, net):
            coarse = verify(
                linear_problem(rng, horizon=8, budget=6, net=controller),
                provider=SymbolProvider(start=10),
            )
            fine = verify(
                linear_problem(rng, horizon=8, budget=12, net=controller),
                provider=SymbolProvider(start=10),
            )
            dirs = random_directions(np.random.default_rng(45), 2, 20)
            for t in range(len(fine.sets)):
                for h in dirs:
                    assert sz.support(h, fine.sets[t]) <= sz.support(h, coarse.sets[t]) + 1e-9


class TestPolyEngine:
    def test_hold_cancellation_matches_affine(self, provider):
        p = RAProblem(
            x0=SZonotope([0.0], [[1.0]], [1]),
            network=identity_net(),
            dynamics=["-x1 + u1"],
            horizon=2,
            goal=EVERYWHERE,
            hold=2,
            engine="poly",
        )
        res = verify(p, provider=provider)
        assert res.verified
        np.testing.assert_allclose(res.hulls[2], [[-1.0, 1.0]], atol=1e-12)

    def test_monte_carlo_containment(self):
        rng = np.random.default_rng(46)
        net = relu_net((1, 3, 1), rng)
        p = RAProblem(
            x0=SZonotope([0.2], [[0.5]], [1]),
            network=net,
            dynamics=["0.9*x1 - 0.2*u1"],
            horizon=3,
            goal=EVERYWHERE,
            engine="poly",
        )
        res = verify(p, provider=SymbolProvider(start=10))
        for _ in range(300):
            traj = rollout(p, sz.evaluate(p.x0, rng.uniform(-1, 1, size=1)), rng)
            for t, xt in enumerate(traj):
                lo, hi = res.hulls[t][0]
                assert lo - 1e-9 <= xt[0] <= hi + 1e-9
