"""Random-walk mobility and the agent-based epidemic."""


import numpy as np
import pytest

from ris_sim.geometry import Window
from ris_sim.mobility_sim import (
    AbmConfig,
    AgentState,
    abm_step,
    random_walk_step,
    run_abm,
)


def _rng(seed=0):
    return np.random.default_rng(seed)


class TestRandomWalk:
    def test_displacement_bounded(self):
        window = Window("rectangle", half_extents=(1e6, 1e6))
        start = np.zeros((10_000, 2))
        moved = random_walk_step(start, window, _rng(1))
        d = np.hypot(moved[:, 0], moved[:, 1])
        assert d.max() <= 10.0 + 1e-9

    def test_mean_squared_displacement(self):
        # uniform distance on [0, 10]: E{d^2} = 100/3
        window = Window("rectangle", half_extents=(1e6, 1e6))
        start = np.zeros((1_000_000, 2))
        moved = random_walk_step(start, window, _rng(2))
        msd = np.mean(np.sum(moved**2, axis=1))
        assert msd == pytest.approx(100.0 / 3.0, rel=0.01)

    def test_reflection_keeps_points_inside_rectangle(self):
        window = Window("rectangle", half_extents=(15.0, 15.0))
        pts = window.sample_uniform(500, _rng(3))
        for step in range(20):
            pts = random_walk_step(pts, window, _rng(step + 10))
            assert window.contains(pts).all()

    def test_reflection_keeps_points_inside_disk(self):
        window = Window("disk", radius=12.0)
        pts = window.sample_uniform(500, _rng(4))
        for step in range(20):
            pts = random_walk_step(pts, window, _rng(step + 50))
            assert window.contains(pts).all()


def _state(positions, infected):
    return AgentState(np.asarray(positions, dtype=float), np.asarray(infected, dtype=bool))


class TestAbmStep:
    def test_population_conserved(self):
        cfg = AbmConfig(n_agents=50, x0=10, beta=0.3, mu=0.2, lambda_u=1e-3)
        window = cfg.resolve_window()
        state = _state(window.sample_uniform(50, _rng(5)), [True] * 10 + [False] * 40)
        for step in range(30):
            state, (s, x) = abm_step(state, cfg, _rng(step), window)
            assert s + x == 50

    def test_absorbing_state(self):
        cfg = AbmConfig(n_agents=20, x0=0, beta=1.0, mu=0.5, lambda_u=1e-2)
        window = cfg.resolve_window()
        state = _state(window.sample_uniform(20, _rng(6)), [False] * 20)
        for step in range(10):
            state, (_, x) = abm_step(state, cfg, _rng(step), window)
            assert x == 0

    def test_certain_infection_in_range(self):
        cfg = AbmConfig(n_agents=5, x0=1, beta=1.0, mu=0.0, r_i=10.0, lambda_u=1e-2)
        window = Window("rectangle", half_extents=(4.0, 4.0))
        state = _state(np.zeros((5, 2)), [True, False, False, False, False])
        state, (_, x) = abm_step(state, cfg, _rng(7), window)
        assert x == 5

    def test_no_transmission_without_beta(self):
        cfg = AbmConfig(n_agents=30, x0=10, beta=0.0, mu=0.3, lambda_u=1e-2)
        window = cfg.resolve_window()
        state = _state(window.sample_uniform(30, _rng(8)), [True] * 10 + [False] * 20)
        xs = [10]
        for step in range(40):
            state, (_, x) = abm_step(state, cfg, _rng(step), window)
            xs.append(x)
        assert all(b <= a for a, b in zip(xs, xs[1:]))
        assert xs[-1] == 0

    def test_monotone_coupling_in_beta(self):
        # same seed means identical pair/recovery/movement draws, so the
        # infected set under the larger beta dominates stepwise
        low = AbmConfig(n_agents=60, x0=5, beta=0.05, mu=0.1, lambda_u=5e-3, seed=3)
        high = AbmConfig(n_agents=60, x0=5, beta=0.25, mu=0.1, lambda_u=5e-3, seed=3)
        window = low.resolve_window()
        init = window.sample_uniform(60, _rng(9))
        infected0 = np.zeros(60, dtype=bool)
        infected0[:5] = True
        state_lo = _state(init.copy(), infected0.copy())
        state_hi = _state(init.copy(), infected0.copy())
        for step in range(60):
            rng_seed = np.random.SeedSequence((3, 0, step))
            state_lo, _ = abm_step(
                state_lo, low, np.random.Generator(np.random.PCG64(rng_seed)), window
            )
            state_hi, _ = abm_step(
                state_hi, high, np.random.Generator(np.random.PCG64(rng_seed)), window
            )
            assert np.all(state_hi.infected >= state_lo.infected)

    def test_sinr_driven_mode(self):
        cfg = AbmConfig(
            n_agents=12, x0=0, beta=0.0, mu=0.0, lambda_u=1e-3,
            mode="sinr_driven", sinr_threshold=0.5,
        )
        window = cfg.resolve_window()
        state = _state(window.sample_uniform(12, _rng(10)), [False] * 12)

        def sampler(positions, rng):
            # left half-plane agents fall below threshold
            return np.where(positions[:, 0] < 0.0, 0.1, 2.0)

        state, (s, x) = abm_step(state, cfg, _rng(11), window, sinr_sampler=sampler)
        assert s + x == 12
        assert x == int((state.infected).sum())

    def test_sinr_driven_requires_sampler(self):
        cfg = AbmConfig(n_agents=4, x0=0, lambda_u=1e-3, mode="sinr_driven")
        state = _state(np.zeros((4, 2)), [False] * 4)
        with pytest.raises(ValueError):
            abm_step(state, cfg, _rng(12))


class TestRunAbm:
    def test_no_seed_infections_stay_zero(self):
        cfg = AbmConfig(n_agents=40, x0=0, beta=0.5, mu=0.1, lambda_u=1e-2,
                        steps=20, ensemble_runs=5)
        _, _, mean_x, _ = run_abm(cfg)
        assert np.all(mean_x == 0.0)

    def test_deterministic(self):
        cfg = AbmConfig(n_agents=40, x0=5, beta=0.2, mu=0.1, lambda_u=5e-3,
                        steps=25, ensemble_runs=8, seed=77)
        t1, s1, x1, e1 = run_abm(cfg)
        t2, s2, x2, e2 = run_abm(cfg)
        assert np.array_equal(x1, x2)
        assert np.array_equal(e1, e2)

    def test_supercritical_growth(self):
        cfg = AbmConfig(n_agents=80, x0=5, beta=0.3, mu=0.02, lambda_u=1e-2,
                        steps=120, ensemble_runs=20, seed=5)
        _, _, mean_x, _ = run_abm(cfg)
        assert mean_x[-1] > 50.0

    def test_population_conserved_in_means(self):
        cfg = AbmConfig(n_agents=30, x0=3, beta=0.1, mu=0.1, lambda_u=1e-2,
                        steps=15, ensemble_runs=6)
        _, mean_s, mean_x, _ = run_abm(cfg)
        assert np.allclose(mean_s + mean_x, 30.0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AbmConfig(beta=1.5)
        with pytest.raises(ValueError):
            AbmConfig(x0=200, n_agents=100)
        with pytest.raises(ValueError):
            AbmConfig(lambda_u=None, window=None)
