"""Experiment configuration: one YAML tree covering every module, with
strict validation, round-trip serialization, and helpers that assemble the
per-module parameter objects.

CLI flags override file values; every override is logged by the CLI so runs
stay auditable.  All powers in the file are dBm; conversion to watts happens
here.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

from .channel import ChannelParams, pathloss_constant
from .geometry import TopologyConfig, Window
from .interference_analytic import REFLECTED_FORMS, LaplaceParams
from .mobility_sim import AbmConfig
from .montecarlo import LinkGeometry, SimulationSetup
from .outage_epidemic import OutageParams
from .power_analytic import gamma_fit_from_moments, s0_moments

__all__ = [
    "ConfigError",
    "SweepConfig",
    "ExperimentConfig",
    "dbm_to_watts",
    "load_config",
    "dump_config",
    "config_digest",
    "with_overrides",
]

SWEEP_AXES = ("power_dbm", "ue_density", "frequency_ghz", "ris_elements")
GROUP_AXES = ("bs_density", "ris_elements", None)


class ConfigError(ValueError):
    """Raised for malformed or inconsistent experiment configuration."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class SweepConfig:
    """One sweep axis per experiment, with an optional grouping axis.

    ``r_i_scales_with_wavelength`` applies only to frequency sweeps: the
    interference radius shrinks proportionally to the carrier wavelength
    from its value at ``reference_frequency_ghz``, reflecting the narrower
    interference exposure region at higher bands.
    """

    axis: str = "power_dbm"
    grid: tuple = (-20.0, -10.0, -5.0, 0.0, 10.0, 20.0, 30.0)
    group_by: str | None = None
    group_grid: tuple = ()
    r_i_scales_with_wavelength: bool = False
    reference_frequency_ghz: float = 1.0

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        if self.group_by not in GROUP_AXES:
            raise ConfigError(f"group_by must be one of {GROUP_AXES}, got {self.group_by!r}")
        if len(self.grid) == 0:
            raise ConfigError("sweep grid must be nonempty")
        if list(self.grid) != sorted(self.grid):
            raise ConfigError("sweep grid must be sorted ascending")
        if self.group_by is not None and len(self.group_grid) == 0:
            raise ConfigError("group_by set but group_grid empty")
        if self.reference_frequency_ghz <= 0:
            raise ConfigError("reference_frequency_ghz must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description."""

    seed: int = 12345
    trials: int = 100_000
    out_dir: str = "results"

    # deployment densities and radii
    lambda_b: float = 1e-5
    lambda_r: float = 1e-5
    lambda_u: float = 1e-2
    r_b: float = 50.0
    r_r: float = 10.0
    window_radius: float = 1000.0

    # radio parameters (powers in dBm; C overrides frequency when set)
    frequency_ghz: float = 3.0
    gain_tx: float = 1.0
    gain_rx: float = 1.0
    pathloss_const: float = 6.3326e-5
    alpha: float = 3.0
    m1: float = 2.0
    m2: float = 2.0
    n_elements: int = 200
    power_dbm: float = -5.0
    noise_dbm: float = -90.0
    sinr_threshold: float = 1e-2

    # representative serving-link geometry
    d_direct: float = 100.0
    d_bs_ris: float = 30.0
    d_ris_ue: float = 80.0

    # interference transform knobs
    d_min: float = 1.0
    d_max: float = 1000.0
    r_i: float = 10.0
    reflected_form: str = "affine"
    series_order: int = 0  # 0 = round the fitted gamma shape
    serving_mode: str = "pinned"

    # agent-based simulation
    abm_agents: int = 100
    abm_x0: int = 5
    abm_steps: int = 200
    abm_ensemble_runs: int = 100

    sweep: SweepConfig = field(default_factory=SweepConfig)

    def __post_init__(self):
        if self.reflected_form not in REFLECTED_FORMS:
            raise ConfigError(
                f"reflected_form must be one of {REFLECTED_FORMS}, got {self.reflected_form!r}"
            )
        if self.serving_mode not in ("pinned", "associated"):
            raise ConfigError(f"serving_mode must be pinned or associated, got {self.serving_mode!r}")
        if self.trials < 1:
            raise ConfigError("trials must be positive")

    # ---- derived parameter objects -------------------------------------

    @property
    def power_w(self) -> float:
        return dbm_to_watts(self.power_dbm)

    @property
    def sigma2_w(self) -> float:
        return dbm_to_watts(self.noise_dbm)

    def window(self) -> Window:
        return Window("disk", radius=self.window_radius)

    def topology_config(self) -> TopologyConfig:
        return TopologyConfig(
            lambda_b=self.lambda_b,
            lambda_r=self.lambda_r,
            lambda_u=self.lambda_u,
            r_b=self.r_b,
            r_r=self.r_r,
            seed=self.seed,
            window=self.window(),
        )

    def channel_params(self, frequency_ghz: float | None = None) -> ChannelParams:
        """Channel parameters; a frequency override recomputes the path-loss
        constant from the wavelength instead of scaling the configured one."""
        if frequency_ghz is None:
            c = self.pathloss_const
            freq = self.frequency_ghz * 1e9
        else:
            freq = frequency_ghz * 1e9
            c = pathloss_constant(freq, self.gain_tx, self.gain_rx)
        return ChannelParams(
            c=c,
            alpha=self.alpha,
            m1=self.m1,
            m2=self.m2,
            n_elements=self.n_elements,
            frequency=freq,
            gain_tx=self.gain_tx,
            gain_rx=self.gain_rx,
            power_w=self.power_w,
            sigma2_w=self.sigma2_w,
        )

    def laplace_params(self, **overrides) -> LaplaceParams:
        base = dict(
            lambda_b=self.lambda_b,
            lambda_r=self.lambda_r,
            lambda_u=self.lambda_u,
            c=self.pathloss_const,
            alpha=self.alpha,
            n_elements=self.n_elements,
            d_min=self.d_min,
            d_max=self.d_max,
            r_i=self.r_i,
        )
        base.update(overrides)
        return LaplaceParams(**base)

    def link_geometry(self) -> LinkGeometry:
        return LinkGeometry(self.d_direct, self.d_bs_ris, self.d_ris_ue)

    def serving_gamma_fit(self, c: float | None = None, n_elements: int | None = None):
        c = self.pathloss_const if c is None else c
        n = self.n_elements if n_elements is None else n_elements
        pl_d = c * self.d_direct ** (-self.alpha)
        pl_r = c * (self.d_bs_ris * self.d_ris_ue) ** (-self.alpha)
        return gamma_fit_from_moments(s0_moments(pl_d, pl_r, n, self.m1, self.m2))

    def outage_params(self, power_dbm: float | None = None, **laplace_overrides) -> OutageParams:
        c = laplace_overrides.get("c", self.pathloss_const)
        n = laplace_overrides.get("n_elements", self.n_elements)
        return OutageParams(
            fit=self.serving_gamma_fit(c=c, n_elements=n),
            threshold=self.sinr_threshold,
            power_w=dbm_to_watts(self.power_dbm if power_dbm is None else power_dbm),
            sigma2_w=self.sigma2_w,
            laplace=self.laplace_params(**laplace_overrides),
            series_order=self.series_order,
        )

    def simulation_setup(self, moved_mode: str = "network_field") -> SimulationSetup:
        return SimulationSetup(
            topology=self.topology_config(),
            channel=self.channel_params(),
            link=self.link_geometry(),
            threshold=self.sinr_threshold,
            r_i=self.r_i,
            serving_mode=self.serving_mode,
            moved_mode=moved_mode,
        )

    def abm_config(self, lambda_u: float | None = None, x0: int | None = None,
                   beta: float = 0.1, mu: float = 0.1) -> AbmConfig:
        return AbmConfig(
            n_agents=self.abm_agents,
            x0=self.abm_x0 if x0 is None else x0,
            r_i=self.r_i,
            beta=beta,
            mu=mu,
            steps=self.abm_steps,
            seed=self.seed,
            lambda_u=self.lambda_u if lambda_u is None else lambda_u,
            ensemble_runs=self.abm_ensemble_runs,
            sinr_threshold=self.sinr_threshold,
        )


def _to_plain(obj):
    if isinstance(obj, tuple):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _to_plain(v) for k, v in obj.items()}
    return obj


def dump_config(config: ExperimentConfig) -> str:
    data = asdict(config)
    data["sweep"] = asdict(config.sweep)
    return yaml.safe_dump(_to_plain(data), sort_keys=True)


def _from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a mapping")
    known = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    kwargs = dict(data)
    if "sweep" in kwargs and kwargs["sweep"] is not None:
        sw = kwargs["sweep"]
        sweep_known = {f.name for f in SweepConfig.__dataclass_fields__.values()}
        sweep_unknown = set(sw) - sweep_known
        if sweep_unknown:
            raise ConfigError(f"unknown sweep keys: {sorted(sweep_unknown)}")
        if "grid" in sw:
            sw = dict(sw, grid=tuple(sw["grid"]))
        if "group_grid" in sw and sw["group_grid"] is not None:
            sw = dict(sw, group_grid=tuple(sw["group_grid"]))
        kwargs["sweep"] = SweepConfig(**sw)
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None = None, text: str | None = None) -> ExperimentConfig:
    """Parse a YAML experiment file; defaults apply for absent keys."""
    if text is None:
        if path is None:
            return ExperimentConfig()
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML parse error: {exc}") from exc
    if data is None:
        return ExperimentConfig()
    return _from_dict(data)


def config_digest(config: ExperimentConfig) -> str:
    return hashlib.sha256(dump_config(config).encode()).hexdigest()[:16]


def with_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Dataclass replace with ConfigError on bad values."""
    try:
        return replace(config, **{k: v for k, v in overrides.items() if v is not None})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
