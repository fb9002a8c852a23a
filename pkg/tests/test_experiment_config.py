"""Configuration parsing, validation, and round-trip identity."""

import pytest

from ris_sim.experiment_config import (
    ConfigError,
    ExperimentConfig,
    SweepConfig,
    config_digest,
    dbm_to_watts,
    dump_config,
    load_config,
    with_overrides,
)


class TestLoading:
    def test_defaults(self):
        cfg = load_config(text="")
        assert cfg == ExperimentConfig()

    def test_roundtrip_identity(self):
        cfg = ExperimentConfig(
            seed=7, lambda_u=3e-3, power_dbm=-12.5,
            sweep=SweepConfig(axis="ue_density", grid=(1e-3, 1e-2)),
        )
        assert load_config(text=dump_config(cfg)) == cfg

    def test_roundtrip_of_default(self):
        cfg = ExperimentConfig()
        assert load_config(text=dump_config(cfg)) == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            load_config(text="bogus_key: 3\n")

    def test_unknown_sweep_key_rejected(self):
        with pytest.raises(ConfigError):
            load_config(text="sweep:\n  axis: power_dbm\n  grid: [1]\n  nope: 2\n")

    def test_bad_yaml(self):
        with pytest.raises(ConfigError):
            load_config(text="a: [unclosed")

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config(path="/nonexistent/file.yaml")


class TestValidation:
    def test_one_axis_only(self):
        with pytest.raises(ConfigError):
            SweepConfig(axis="both_of_them")

    def test_grid_must_be_sorted(self):
        with pytest.raises(ConfigError):
            SweepConfig(axis="ue_density", grid=(1e-2, 1e-3))

    def test_grid_must_be_nonempty(self):
        with pytest.raises(ConfigError):
            SweepConfig(axis="ue_density", grid=())

    def test_group_needs_grid(self):
        with pytest.raises(ConfigError):
            SweepConfig(axis="ue_density", grid=(1e-3,), group_by="bs_density")

    def test_reflected_form_checked(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(reflected_form="wrong")


class TestDerived:
    def test_dbm_conversion(self):
        assert dbm_to_watts(-90.0) == pytest.approx(1e-12)
        assert dbm_to_watts(30.0) == pytest.approx(1.0)

    def test_channel_params_frequency_override(self):
        cfg = ExperimentConfig()
        base = cfg.channel_params()
        assert base.c == cfg.pathloss_const
        doubled = cfg.channel_params(frequency_ghz=6.0)
        assert doubled.c == pytest.approx(base.c / 4.0, rel=0.01)

    def test_outage_params_auto_series_order(self):
        op = ExperimentConfig().outage_params()
        assert op.series_order == 6

    def test_digest_stable_and_sensitive(self):
        cfg = ExperimentConfig()
        assert config_digest(cfg) == config_digest(ExperimentConfig())
        assert config_digest(with_overrides(cfg, seed=99)) != config_digest(cfg)

    def test_with_overrides_ignores_none(self):
        cfg = ExperimentConfig()
        assert with_overrides(cfg, seed=None) == cfg
