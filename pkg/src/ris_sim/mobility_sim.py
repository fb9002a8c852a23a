"""Agent-based SIS simulation with random-walk mobility.

Agents live in a window, walk a uniform direction and a uniform distance per
step (reflected at the boundary), and swap between susceptible and infected.
Rate-driven mode uses per-contact Bernoulli infection trials and per-agent
recovery trials; SINR-driven mode thresholds each agent's instantaneous SINR
against a sampled radio field.

All randomness for a step comes from a generator derived from
(seed, run, step), with fixed-shape draws, so trajectories with the same
seed share their contact events exactly.  That makes the monotone coupling
in beta testable and keeps ensembles reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Window

__all__ = [
    "AbmConfig",
    "AgentState",
    "random_walk_step",
    "abm_step",
    "run_abm",
]

MAX_STEP_M = 10.0


@dataclass(frozen=True)
class AbmConfig:
    """Population, contact radius, per-step probabilities, and run length.

    Exactly one of ``window`` or ``lambda_u`` fixes the arena: given
    ``lambda_u``, a square window with area n_agents / lambda_u is built so
    the agent density matches.  ``x0`` agents start infected.
    """

    n_agents: int = 100
    x0: int = 5
    r_i: float = 10.0
    beta: float = 0.1
    mu: float = 0.1
    steps: int = 200
    seed: int = 0
    mode: str = "rate_driven"
    lambda_u: float | None = 1e-3
    window: Window | None = None
    ensemble_runs: int = 100
    sinr_threshold: float = 1e-2

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0 or not 0.0 <= self.mu <= 1.0:
            raise ValueError("beta and mu are per-step probabilities in [0, 1]")
        if not self.r_i > 0:
            raise ValueError("r_i must be positive")
        if not 0 <= self.x0 <= self.n_agents:
            raise ValueError("x0 must lie in [0, n_agents]")
        if self.mode not in ("rate_driven", "sinr_driven"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.window is None and self.lambda_u is None:
            raise ValueError("either window or lambda_u must be given")

    def resolve_window(self) -> Window:
        if self.window is not None:
            return self.window
        half = 0.5 * math.sqrt(self.n_agents / self.lambda_u)
        return Window("rectangle", half_extents=(half, half))


@dataclass
class AgentState:
    """Positions (n, 2) and a boolean infected mask."""

    positions: np.ndarray
    infected: np.ndarray

    @property
    def counts(self) -> tuple[int, int]:
        x = int(self.infected.sum())
        return self.positions.shape[0] - x, x


def _reflect_into(window: Window, pts: np.ndarray) -> np.ndarray:
    """Mirror points back across the boundary until they land inside."""
    out = pts.copy()
    if window.shape == "rectangle":
        for axis, h in enumerate(window.half_extents):
            # triangular fold with period 4h maps any reflected walk into [-h, h]
            y = np.mod(out[:, axis] + h, 4.0 * h)
            out[:, axis] = np.where(y <= 2.0 * h, y - h, 3.0 * h - y)
        return out
    r = np.hypot(out[:, 0], out[:, 1])
    mask = r > window.radius
    while np.any(mask):
        scale = (2.0 * window.radius - r[mask]) / r[mask]
        out[mask] *= scale[:, None]
        r = np.hypot(out[:, 0], out[:, 1])
        mask = r > window.radius
    return out


def random_walk_step(
    positions: np.ndarray, window: Window, rng: np.random.Generator
) -> np.ndarray:
    """Displace by a uniform direction in [0, 2pi) and distance in [0, 10] m,
    reflecting at the window boundary."""
    pts = np.atleast_2d(np.asarray(positions, dtype=float))
    n = pts.shape[0]
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    dist = rng.uniform(0.0, MAX_STEP_M, n)
    moved = pts + np.column_stack((dist * np.cos(theta), dist * np.sin(theta)))
    return _reflect_into(window, moved)


def _step_rng(seed: int, run: int, step: int) -> np.random.Generator:
    # step -1 (initial placement) maps to stream 0, step k to stream k+1
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, run, step + 1))))


def abm_step(
    state: AgentState,
    config: AbmConfig,
    rng: np.random.Generator,
    window: Window | None = None,
    sinr_sampler=None,
) -> tuple[AgentState, tuple[int, int]]:
    """One epoch: state transitions computed from the current configuration,
    applied in one shot, then every agent takes a walk step.

    Rate-driven: a susceptible agent runs one Bernoulli(beta) trial per
    infected neighbor within r_i; an infected agent recovers with
    probability mu.  Pair and recovery uniforms are drawn with fixed shape,
    which supports monotone coupling across beta values.

    SINR-driven: ``sinr_sampler(positions, rng)`` supplies per-agent SINRs
    and the infected set becomes {SINR < threshold} directly.
    """
    window = window or config.resolve_window()
    n = state.positions.shape[0]
    infected = state.infected

    if config.mode == "rate_driven":
        pair_u = rng.random((n, n))
        recover_u = rng.random(n)
        diff = state.positions[:, None, :] - state.positions[None, :, :]
        within = np.einsum("ijk,ijk->ij", diff, diff) <= config.r_i**2
        np.fill_diagonal(within, False)
        fires = (within & infected[None, :] & (pair_u < config.beta)).any(axis=1)
        recovers = infected & (recover_u < config.mu)
        # a firing contact overrides same-epoch recovery (no immunity), which
        # is also what keeps trajectories monotone under a shared seed when
        # beta grows
        new_infected = fires | (infected & ~recovers)
    else:
        if sinr_sampler is None:
            raise ValueError("sinr_driven mode needs a sinr_sampler")
        sinr = sinr_sampler(state.positions, rng)
        new_infected = np.asarray(sinr) < config.sinr_threshold

    new_positions = random_walk_step(state.positions, window, rng)
    new_state = AgentState(new_positions, new_infected)
    return new_state, new_state.counts


def run_abm(
    config: AbmConfig, sinr_sampler=None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Ensemble-averaged trajectory.

    Returns (t, mean_S, mean_X, stderr_X) over ``ensemble_runs`` independent
    runs; deterministic for a fixed config seed.
    """
    if config.steps < 1:
        raise ValueError("steps must be at least 1")
    window = config.resolve_window()
    x_series = np.empty((config.ensemble_runs, config.steps + 1))
    for run in range(config.ensemble_runs):
        init_rng = _step_rng(config.seed, run, -1)
        positions = window.sample_uniform(config.n_agents, init_rng)
        infected = np.zeros(config.n_agents, dtype=bool)
        infected[: config.x0] = True
        state = AgentState(positions, infected)
        x_series[run, 0] = config.x0
        for step in range(config.steps):
            rng = _step_rng(config.seed, run, step)
            state, (_, x) = abm_step(state, config, rng, window, sinr_sampler)
            x_series[run, step + 1] = x
    t = np.arange(config.steps + 1, dtype=float)
    mean_x = x_series.mean(axis=0)
    stderr_x = x_series.std(axis=0, ddof=1) / math.sqrt(config.ensemble_runs)
    return t, config.n_agents - mean_x, mean_x, stderr_x
