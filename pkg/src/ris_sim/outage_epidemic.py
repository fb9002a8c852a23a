"""Outage probabilities via the gamma-tail derivative series, infection and
recovery rates, interference propagation intensity, and the SIS dynamics.

The outage series treats the serving power as gamma distributed with an
integer (Erlang) shape; each term is a derivative at s = 1 of the product of
a noise factor and the interference transform, both extracted from one jet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .interference_analytic import LaplaceParams, transform_exponent_coeffs
from .power_analytic import GammaFit
from .special_functions import jet_compose_transform, jet_variable

__all__ = [
    "OutageParams",
    "SisParams",
    "RatesResult",
    "outage_transform_jet",
    "log_coverage",
    "outage_probability",
    "infection_rate",
    "recovery_rate",
    "propagation_intensity",
    "analytic_rates",
    "sis_ode_solve",
    "sis_equilibrium",
    "sis_logistic_solution",
]


@dataclass(frozen=True)
class OutageParams:
    """Inputs of the outage series.

    ``series_order`` is the integer gamma shape used by the truncated sum;
    take round(fit.shape) clamped to [1, 60] unless there is a reason not to.
    """

    fit: GammaFit
    threshold: float
    power_w: float
    sigma2_w: float
    laplace: LaplaceParams
    series_order: int = 0

    def __post_init__(self):
        if self.threshold < 0:
            raise ValueError("SINR threshold must be nonnegative")
        if self.power_w <= 0:
            raise ValueError("transmit power must be positive")
        if self.sigma2_w < 0:
            raise ValueError("noise power must be nonnegative")
        if self.series_order == 0:
            object.__setattr__(
                self, "series_order", max(1, min(60, round(self.fit.shape)))
            )
        if not 1 <= self.series_order <= 60:
            raise ValueError(
                f"series_order {self.series_order} outside [1, 60] "
                "(factorial conditioning)"
            )


@dataclass(frozen=True)
class SisParams:
    """Susceptible-infected-susceptible rates and population."""

    beta: float
    mu: float
    n_total: float
    x0: float

    def __post_init__(self):
        if self.beta < 0 or self.mu < 0:
            raise ValueError("rates must be nonnegative")
        if not 0 <= self.x0 <= self.n_total:
            raise ValueError("initial infected count must lie in [0, n_total]")


def _transform_coefficients(
    params: OutageParams, stage: str, form: str
) -> tuple[float, float, float, float, float]:
    """(noise, power_coeff, power_exponent, linear, constant) of the
    composite exponent after folding the transform argument s T / eta."""
    eta = params.fit.scale
    arg_scale = params.threshold / eta
    q_pow, q_lin, q_const = transform_exponent_coeffs(params.laplace, stage, form)
    two_over_alpha = 2.0 / params.laplace.alpha
    noise = params.threshold * params.sigma2_w / (params.power_w * eta)
    return noise, q_pow * arg_scale**two_over_alpha, two_over_alpha, q_lin * arg_scale, q_const


def outage_transform_jet(params: OutageParams, stage: str, form: str = "affine"):
    """Jet around s = 1 of exp(-s T sigma^2 / (P eta)) * L(s T / eta)."""
    noise, p_coeff, p_exp, lin, const = _transform_coefficients(params, stage, form)
    return jet_compose_transform(
        noise_coeff=noise,
        power_coeff=p_coeff,
        power_exponent=p_exp,
        linear_coeff=lin,
        constant_term=const,
        order=params.series_order - 1,
    )


def log_coverage(params: OutageParams, stage: str, form: str = "affine") -> float:
    """log of the truncated derivative series sum_{x<k} ((-1)^x/x!) F^(x)(1).

    The constant part of the exponent is factored out before the jet is
    exponentiated, so the alternating sum runs over same-sign terms with a
    unit leading coefficient.  That keeps the coverage usable far into the
    tail (noise exponents in the thousands) where forming 1 - P_o in
    probability space would lose everything to rounding.
    """
    if params.threshold == 0.0:
        return 0.0
    noise, p_coeff, p_exp, lin, const = _transform_coefficients(params, stage, form)
    level = noise + p_coeff + lin + const
    order = params.series_order - 1
    s = jet_variable(1.0, order)
    shifted = s * (-(noise + lin)) + (noise + lin)
    if p_coeff != 0.0:
        shifted = shifted - (s.pow(p_exp) - 1.0) * p_coeff
    jet = shifted.exp()
    signs = (-1.0) ** np.arange(params.series_order)
    series_sum = float(np.dot(signs, jet.coef))
    if not (math.isfinite(series_sum) and series_sum > 0.0):
        raise ArithmeticError("outage series produced a non-positive or non-finite sum")
    return min(0.0, math.log(series_sum) - level)


def outage_probability(params: OutageParams, stage: str, form: str = "affine") -> float:
    """P_o = 1 - sum_{x<k} ((-1)^x / x!) d^x/ds^x [noise(s) L(s T/eta)] at s=1.

    A zero threshold means outage below zero SINR, which is impossible, so
    the probability is 0 by definition (short-circuited; the affine form's
    constant offset would otherwise leak into this trivial case).
    """
    return -math.expm1(log_coverage(params, stage, form))


def infection_rate(p_o: float, p_o_prime: float) -> float:
    """beta = (1 - P_o) * P_o'."""
    _check_probability(p_o, "p_o")
    _check_probability(p_o_prime, "p_o_prime")
    return (1.0 - p_o) * p_o_prime


def recovery_rate(p_o: float, p_o_prime: float) -> float:
    """mu = P_o * (1 - P_o')."""
    _check_probability(p_o, "p_o")
    _check_probability(p_o_prime, "p_o_prime")
    return p_o * (1.0 - p_o_prime)


def propagation_intensity(p_o: float, p_o_prime: float) -> float:
    """R0 = beta / mu; +inf signals the supercritical-degenerate case mu = 0.

    Equal outage before and after movement yields exactly 1 (movement
    changes nothing), which also resolves the 0/0 endpoints.
    """
    beta = infection_rate(p_o, p_o_prime)
    mu = recovery_rate(p_o, p_o_prime)
    if p_o == p_o_prime:
        return 1.0
    if mu == 0.0:
        return math.inf
    return beta / mu


@dataclass(frozen=True)
class RatesResult:
    """Analytic outage pair and the epidemic rates derived from it."""

    p_o: float
    p_o_prime: float
    beta: float
    mu: float
    r0: float


def analytic_rates(params: OutageParams, form: str = "affine") -> RatesResult:
    """Full chain evaluated in coverage space.

    R0 = [cov_b (1 - cov_a)] / [(1 - cov_b) cov_a] stays well conditioned
    even where both outage probabilities round to 1; it agrees with
    propagation_intensity wherever the latter is representable.
    """
    lcb = log_coverage(params, "before", form)
    lca = log_coverage(params, "after", form)
    cov_b, cov_a = math.exp(lcb), math.exp(lca)
    p_o, p_o_prime = -math.expm1(lcb), -math.expm1(lca)
    beta = cov_b * p_o_prime
    mu = p_o * cov_a
    if lcb == lca:
        r0 = 1.0
    elif p_o == 0.0 or lcb - lca > 700.0:
        r0 = math.inf
    else:
        r0 = math.exp(lcb - lca) * p_o_prime / p_o
    return RatesResult(p_o, p_o_prime, beta, mu, r0)


def _check_probability(value: float, name: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def sis_ode_solve(
    p: SisParams, t_end: float, dt: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fixed-step RK4 for dX/dt = beta X (N - X) - mu X.

    Returns (t, S, X); S is reported as N - X, so the population is conserved
    exactly at every step.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    n_steps = int(round(t_end / dt))
    t = np.linspace(0.0, n_steps * dt, n_steps + 1)
    x = np.empty(n_steps + 1)
    x[0] = p.x0

    def rhs(xv: float) -> float:
        return p.beta * xv * (p.n_total - xv) - p.mu * xv

    for i in range(n_steps):
        xi = x[i]
        k1 = rhs(xi)
        k2 = rhs(xi + 0.5 * dt * k1)
        k3 = rhs(xi + 0.5 * dt * k2)
        k4 = rhs(xi + dt * k3)
        x[i + 1] = xi + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    return t, p.n_total - x, x


def sis_equilibrium(p: SisParams) -> float:
    """Stable infected level: max(0, N - mu/beta), or 0 when beta = 0."""
    if p.beta == 0.0:
        return 0.0
    return max(0.0, p.n_total - p.mu / p.beta)


def sis_logistic_solution(p: SisParams, t: np.ndarray) -> np.ndarray:
    """Closed-form trajectory of the SIS ODE (logistic in X).

    With r = beta*N - mu and K = N - mu/beta:
    X(t) = K X0 e^{rt} / (K + X0 (e^{rt} - 1)); the beta = 0 and r = 0
    degenerate cases reduce to pure decay and hyperbolic decay.
    """
    t = np.asarray(t, dtype=float)
    if p.x0 == 0.0:
        return np.zeros_like(t)
    if p.beta == 0.0:
        return p.x0 * np.exp(-p.mu * t)
    r = p.beta * p.n_total - p.mu
    if r == 0.0:
        return p.x0 / (1.0 + p.beta * p.x0 * t)
    k = r / p.beta
    em = np.exp(-r * t)
    return k * p.x0 / (k * em + p.x0 * (1.0 - em))
