import math
from dataclasses import replace

import numpy as np
import pytest

from leosim.mimo import (
    MimoScenario,
    achievable_rate,
    build_channel,
    element_positions_km,
    equal_power_rate,
    sweep_rates,
    waterfill,
)

@pytest.fixture(scope="module")
def scenario():
    return MimoScenario()


class TestScenario:
    def test_antennas_partition(self):
        for n_s in (1, 2, 3, 4, 6):
            assert MimoScenario(num_satellites=n_s).antennas_per_satellite * n_s == 12

    def test_default_spacing_is_half_wavelength(self, scenario):
        assert scenario.rx_spacing_m == pytest.approx(7.4948e-3, rel=1e-4)

    def test_invalid_satellite_count(self):
        with pytest.raises(ValueError):
            MimoScenario(num_satellites=5)


class TestChannel:
    def test_shape(self, scenario):
        H = build_channel(replace(scenario, num_satellites=6))
        assert H.shape == (100, 12)
        assert np.all(np.isfinite(H))
        assert np.all(np.abs(H) > 0)

    def test_element_distance_extremes(self, scenario):
        rx, tx = element_positions_km(replace(scenario, num_satellites=6))
        dist = np.linalg.norm(rx[:, None, :] - tx[None, :, :], axis=2)
        # Nearest satellite sits 50 km along-track from the zenith; the
        # farthest 250 km, both on the orbital arc.
        assert dist.min() == pytest.approx(601.9, abs=0.5)
        assert 640.0 <= dist.max() <= 651.0

    def test_scalar_entry_amplitude_and_phase(self):
        sc = MimoScenario(num_satellites=1, gs_antennas=1, gs_element_gain_dbi=20.0)
        one = replace(sc)
        H = build_channel(one)
        rx, tx = element_positions_km(one)
        lam = one.wavelength_m
        # Independent recomputation for a spot-checked element pair.
        d_m = np.linalg.norm(rx[0] - tx[3]) * 1000.0
        expected_amp = lam / (4 * math.pi * d_m) * math.sqrt(10.0 ** (20.0 / 10.0))
        assert abs(H[0, 3]) == pytest.approx(expected_amp, rel=1e-12)
        expected_phase = (-2 * math.pi * d_m / lam) % (2 * math.pi)
        assert np.angle(H[0, 3]) % (2 * math.pi) == pytest.approx(expected_phase, abs=1e-6)


class TestWaterfill:
    def test_budget_and_nonnegativity(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            gains = rng.uniform(0.01, 10.0, size=rng.integers(1, 12))
            power = float(rng.uniform(0.1, 100.0))
            p = waterfill(gains, power)
            assert np.all(p >= 0)
            assert p.sum() == pytest.approx(power, rel=1e-9)

    def test_equal_gains_split_evenly(self):
        p = waterfill(np.full(4, 2.5), 8.0)
        np.testing.assert_allclose(p, 2.0, rtol=1e-12)

    def test_weak_mode_gets_nothing(self):
        p = waterfill(np.array([10.0, 1e-9]), 0.1)
        assert p[1] == 0.0
        assert p[0] == pytest.approx(0.1)

    def test_waterline_kkt(self):
        rng = np.random.default_rng(12)
        gains = rng.uniform(0.05, 5.0, size=8)
        power = 3.0
        p = waterfill(gains, power)
        active = p > 0
        waterline = p[active] + 1.0 / gains[active]
        assert np.ptp(waterline) < 1e-9 * waterline.mean()
        # Inactive modes would need a level above the waterline.
        if (~active).any():
            assert np.all(1.0 / gains[~active] >= waterline.mean() * (1 - 1e-12))


class TestAchievableRate:
    def test_scalar_channel_is_shannon(self):
        H = np.array([[0.5 + 0.1j]])
        noise_dbw = -120.0
        eirp_dbw = -60.0
        rate = achievable_rate(H, eirp_dbw, noise_dbw)
        snr = 10 ** (eirp_dbw / 10) * abs(H[0, 0]) ** 2 / 10 ** (noise_dbw / 10)
        assert rate == pytest.approx(math.log2(1 + snr), rel=1e-12)

    def test_log_det_consistency(self, scenario):
        H = build_channel(replace(scenario, num_satellites=3))
        noise_dbw = scenario.noise_power_dbw()
        power = 10 ** (35.0 / 10)
        sigma2 = 10 ** (noise_dbw / 10)
        u, s, vh = np.linalg.svd(H, full_matrices=False)
        p = waterfill(s**2 / sigma2, power)
        q = (vh.conj().T * p) @ vh
        eye = np.eye(H.shape[0])
        sign, logdet = np.linalg.slogdet(eye + H @ q @ H.conj().T / sigma2)
        assert sign > 0
        assert achievable_rate(H, 35.0, noise_dbw) == pytest.approx(
            logdet / math.log(2), rel=1e-9
        )
        assert np.trace(q).real == pytest.approx(power, rel=1e-9)

    def test_conjugate_transpose_same_rate(self, scenario):
        H = build_channel(replace(scenario, num_satellites=2))
        noise = scenario.noise_power_dbw()
        assert achievable_rate(H, 30.0, noise) == pytest.approx(
            achievable_rate(H.conj().T, 30.0, noise), rel=1e-9
        )

    def test_more_satellites_never_worse(self, scenario):
        noise = scenario.noise_power_dbw()
        for eirp in (30.0, 37.5, 45.0):
            rates = [
                achievable_rate(build_channel(replace(scenario, num_satellites=n)), eirp, noise)
                for n in (1, 2, 6)
            ]
            assert rates[0] <= rates[1] <= rates[2]


class TestSweep:
    def test_full_factorial(self, scenario):
        rows = sweep_rates(scenario, (1, 2, 3, 4, 6), (30.0, 35.0, 40.0))
        assert len(rows) == 15

    def test_rate_increases_with_eirp(self, scenario):
        rows = sweep_rates(scenario, (1, 3, 6), (30.0, 35.0, 40.0, 45.0))
        for n_s in (1, 3, 6):
            series = [r for r in rows if r[0] == n_s]
            rates = [r[2] for r in series]
            assert rates == sorted(rates)
            assert len(set(rates)) == len(rates)

    def test_rate_nondecreasing_in_satellite_count(self, scenario):
        rows = sweep_rates(scenario)
        by_eirp = {}
        for n_s, eirp, rate in rows:
            by_eirp.setdefault(eirp, []).append((n_s, rate))
        for eirp, series in by_eirp.items():
            series.sort()
            rates = [rate for _, rate in series]
            assert all(b >= a * (1 - 1e-9) for a, b in zip(rates, rates[1:]))

    def test_waterfilling_beats_equal_power(self, scenario):
        noise = scenario.noise_power_dbw()
        for n_s in (1, 2, 3, 4, 6):
            H = build_channel(replace(scenario, num_satellites=n_s))
            for eirp in (30.0, 37.5, 45.0):
                assert achievable_rate(H, eirp, noise) >= equal_power_rate(H, eirp, noise) - 1e-9

    def test_empty_sweep_rejected(self, scenario):
        with pytest.raises(ValueError):
            sweep_rates(scenario, (1, 2), ())
