"""Path loss, fading samplers, phase configuration, composite gains."""

import math

import numpy as np
import pytest

from ris_sim.channel import (
    ChannelParams,
    FadingRealization,
    PhaseConfig,
    composite_amplitude,
    interference_power_realization,
    pathloss_constant,
    pathloss_direct,
    pathloss_reflected,
    ris_phase_alignment,
    sample_fading,
    sample_nakagami,
    sample_rayleigh,
    serving_power_realization,
)
from ris_sim.geometry import NetworkTopology


def _rng(seed=0):
    return np.random.default_rng(seed)


class TestPathloss:
    def test_reference_constant_at_3ghz(self):
        c = pathloss_constant(3e9)
        assert c == pytest.approx(6.3326e-5, rel=0.01)

    def test_doubling_frequency_quarters(self):
        assert pathloss_constant(6e9) == pytest.approx(pathloss_constant(3e9) / 4, rel=1e-12)

    def test_gain_scaling(self):
        # C scales with the gain product: Gt*Gr = 4 quadruples it
        assert pathloss_constant(3e9, 2.0, 2.0) == pytest.approx(
            4.0 * pathloss_constant(3e9), rel=1e-12
        )
        assert pathloss_constant(3e9, 4.0, 4.0) == pytest.approx(
            16.0 * pathloss_constant(3e9), rel=1e-12
        )

    def test_invalid_frequency(self):
        with pytest.raises(ValueError):
            pathloss_constant(0.0)

    def test_direct_reference_distance(self):
        assert pathloss_direct(6.3326e-5, 1.0, 3.0) == 6.3326e-5

    def test_direct_value(self):
        assert pathloss_direct(6.3326e-5, 100.0, 3.0) == pytest.approx(6.3326e-11, rel=1e-12)

    def test_direct_power_law(self):
        assert pathloss_direct(1.0, 20.0, 3.0) == pytest.approx(
            pathloss_direct(1.0, 10.0, 3.0) / 8.0, rel=1e-12
        )

    def test_reflected_product(self):
        assert pathloss_reflected(6.3326e-5, 50.0, 20.0, 3.0) == pytest.approx(
            6.3326e-14, rel=1e-12
        )

    def test_reflected_symmetry(self):
        assert pathloss_reflected(1.0, 7.0, 3.0, 3.0) == pathloss_reflected(1.0, 3.0, 7.0, 3.0)

    def test_monotone_in_distance(self):
        d = np.linspace(1.0, 100.0, 25)
        vals = [pathloss_direct(1.0, float(x), 3.0) for x in d]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            pathloss_direct(1.0, 0.0, 3.0)
        with pytest.raises(ValueError):
            pathloss_reflected(1.0, 0.0, 5.0, 3.0)


class TestFadingSamplers:
    def test_rayleigh_moments(self):
        x = sample_rayleigh(_rng(1), size=1_000_000)
        assert x.mean() == pytest.approx(math.sqrt(math.pi / 4), rel=0.005)
        assert np.mean(x**2) == pytest.approx(1.0, rel=0.005)
        assert x.var() == pytest.approx(1 - math.pi / 4, rel=0.01)

    def test_nakagami_one_is_rayleigh(self):
        x = sample_nakagami(1.0, _rng(2), size=1_000_000)
        assert x.mean() == pytest.approx(math.sqrt(math.pi) / 2, rel=0.005)

    def test_nakagami_two_moments(self):
        x = sample_nakagami(2.0, _rng(3), size=1_000_000)
        assert x.mean() == pytest.approx(0.9399856, rel=0.005)
        assert np.mean(x**2) == pytest.approx(1.0, rel=0.005)

    def test_nakagami_domain(self):
        with pytest.raises(ValueError):
            sample_nakagami(0.3, _rng())


def _manual_fading(n, phases=None):
    phases = np.zeros(n) if phases is None else np.asarray(phases, dtype=float)
    return FadingRealization(
        g_direct=1.0,
        h_bs_ris=np.full(n, 0.9),
        h_ris_ue=np.full(n, 1.1),
        phases=phases,
    )


class TestPhaseAlignment:
    def test_zero_phases_zero_shifts(self):
        fading = _manual_fading(4)
        shifts = ris_phase_alignment(fading, PhaseConfig())
        assert np.allclose(shifts, 0.0)

    def test_ideal_coherence_is_scalar_sum(self):
        rng = _rng(4)
        params = ChannelParams()
        fading = sample_fading(params, rng)
        amp = composite_amplitude(1e-10, 1e-14, fading, PhaseConfig())
        expected = math.sqrt(1e-10) * fading.g_direct + math.sqrt(1e-14) * float(
            np.sum(fading.h_bs_ris * fading.h_ris_ue)
        )
        assert amp == pytest.approx(expected, rel=1e-12)

    def test_two_bit_rounding(self):
        fading = _manual_fading(1, phases=[-math.pi / 3.0])
        shifts = ris_phase_alignment(fading, PhaseConfig(mode="quantized", bits=2))
        assert shifts[0] == pytest.approx(math.pi / 2)

    def test_quantized_never_beats_ideal(self):
        params = ChannelParams(n_elements=64)
        rng = _rng(5)
        for _ in range(50):
            fading = sample_fading(params, rng)
            ideal = composite_amplitude(1e-10, 1e-14, fading, PhaseConfig())
            quant = composite_amplitude(
                1e-10, 1e-14, fading, PhaseConfig(mode="quantized", bits=2)
            )
            assert quant <= ideal + 1e-12 * ideal

    def test_bits_validation(self):
        with pytest.raises(ValueError):
            PhaseConfig(mode="quantized", bits=0)


class TestServingPower:
    def test_direct_only_when_no_reflection(self):
        fading = _manual_fading(3)
        s0 = serving_power_realization(4.0, 0.0, fading)
        assert s0 == pytest.approx(4.0 * fading.g_direct**2)

    def test_matches_closed_form_mean(self):
        # oracle below in power-analytic terms; 2e4 draws, 2% tolerance
        from ris_sim.power_analytic import s0_moments

        params = ChannelParams()
        pl_d = params.c * 100.0**-3
        pl_r = params.c * (30.0 * 80.0) ** -3
        rng = _rng(6)
        draws = [
            serving_power_realization(pl_d, pl_r, sample_fading(params, rng))
            for _ in range(20_000)
        ]
        expected = s0_moments(pl_d, pl_r, params.n_elements, params.m1, params.m2).mean
        assert np.mean(draws) == pytest.approx(expected, rel=0.02)

    def test_negative_gain_rejected(self):
        with pytest.raises(ValueError):
            serving_power_realization(-1.0, 0.0, _manual_fading(2))


def _one_bs_one_ris_topology():
    bs = np.array([[300.0, 0.0]])
    ris = np.array([[320.0, 0.0]])
    return NetworkTopology(
        bs, ris, np.array([0]), np.zeros((0, 2)), np.zeros(0, dtype=int), np.array([0])
    )


class TestInterferenceRealization:
    def test_empty_field_zero(self):
        topo = NetworkTopology(
            np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0, dtype=int),
            np.zeros((0, 2)), np.zeros(0, dtype=int), np.zeros(0, dtype=int),
        )
        assert interference_power_realization(topo, ChannelParams(), None, _rng()) == 0.0

    def test_single_bs_mean(self):
        bs = np.array([[250.0, 0.0]])
        topo = NetworkTopology(
            bs, np.zeros((0, 2)), np.zeros(0, dtype=int),
            np.zeros((0, 2)), np.zeros(0, dtype=int), np.array([-1]),
        )
        ch = ChannelParams()
        rng = _rng(7)
        vals = [interference_power_realization(topo, ch, None, rng) for _ in range(100_000)]
        expected = ch.c * 250.0**-3
        assert np.mean(vals) == pytest.approx(expected, rel=0.01)

    def test_reflected_mean_exact_mode(self):
        # Monte Carlo of the element-wise misaligned sums as the oracle for
        # the per-surface mean power N c^2 (d_ij d_jk)^(-alpha)
        topo = _one_bs_one_ris_topology()
        ch = ChannelParams()
        rng = _rng(8)
        vals = [
            interference_power_realization(topo, ch, None, rng, mode="exact")
            for _ in range(20_000)
        ]
        expected = ch.c * 300.0**-3 + ch.n_elements * ch.c**2 * (20.0 * 320.0) ** -3
        assert np.mean(vals) == pytest.approx(expected, rel=0.02)

    def test_exponential_mode_same_mean(self):
        topo = _one_bs_one_ris_topology()
        ch = ChannelParams()
        rng = _rng(9)
        vals = [interference_power_realization(topo, ch, None, rng) for _ in range(100_000)]
        expected = ch.c * 300.0**-3 + ch.n_elements * ch.c**2 * (20.0 * 320.0) ** -3
        assert np.mean(vals) == pytest.approx(expected, rel=0.02)

    def test_serving_exclusion(self):
        topo = _one_bs_one_ris_topology()
        ch = ChannelParams(n_elements=1)
        val = interference_power_realization(
            topo, ch, None, _rng(10), serving_bs_index=0
        )
        # the only BS is excluded; the surface term needs an interfering BS
        assert val == 0.0
