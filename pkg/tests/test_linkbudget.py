import math

import numpy as np
import pytest

from leosim.geometry import LinkGeometry
from leosim.linkbudget import (
    db_to_linear,
    fspl_db,
    linear_to_db,
    link_rate,
    noise_power_dbw,
    rate_bps_for_distances,
)
from leosim.scenario import LinkBudgetTable


def geom(distance_km, visible=True):
    return LinkGeometry(distance_km=distance_km, visible=visible, relative_radial_speed_km_s=0.0)


class TestFspl:
    def test_reference_values(self):
        assert fspl_db(600.0, 20e9) == pytest.approx(174.03, abs=0.005)
        assert fspl_db(1075.1, 20e9) == pytest.approx(179.09, abs=0.01)

    def test_doubling_distance_adds_6db(self):
        assert fspl_db(1200.0, 20e9) - fspl_db(600.0, 20e9) == pytest.approx(6.02, abs=0.005)

    def test_array_input(self):
        values = fspl_db(np.array([600.0, 1200.0]), 20e9)
        assert values.shape == (2,)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            fspl_db(0.0, 20e9)
        with pytest.raises(ValueError):
            fspl_db(600.0, 0.0)


class TestNoise:
    def test_reference_values(self):
        assert noise_power_dbw(354.81, 400e6) == pytest.approx(-117.08, abs=0.005)
        assert noise_power_dbw(354.81, 1.0) == pytest.approx(-203.1, abs=0.005)

    def test_halving_bandwidth(self):
        delta = noise_power_dbw(354.81, 400e6) - noise_power_dbw(354.81, 200e6)
        assert delta == pytest.approx(3.01, abs=0.005)


class TestDbConversions:
    def test_round_trip(self):
        rng = np.random.default_rng(5)
        for value in rng.uniform(-250.0, 60.0, size=200):
            assert float(linear_to_db(db_to_linear(value))) == pytest.approx(value, rel=1e-12, abs=1e-12)


class TestLinkRate:
    def test_gsl_downlink_zenith(self):
        params = LinkBudgetTable().gsl_downlink()
        result = link_rate(geom(600.0), params)
        assert result.snr_or_sinr_db == pytest.approx(12.0, abs=0.05)
        assert result.achievable_rate_bps == pytest.approx(1.63e9, rel=0.005)

    def test_intra_plane_isl(self):
        params = LinkBudgetTable().isl()
        d = 2 * 6971.0 * math.sin(math.pi / 20)
        result = link_rate(geom(d), params)
        assert result.snr_or_sinr_db == pytest.approx(-3.2, abs=0.05)
        assert result.achievable_rate_bps == pytest.approx(0.23e9, rel=0.02)

    def test_interference_equal_to_noise_costs_3db(self):
        params = LinkBudgetTable().gsl_downlink()
        clean = link_rate(geom(600.0), params)
        noisy = link_rate(geom(600.0), params, interference_dbw=clean.noise_power_dbw)
        assert clean.snr_or_sinr_db - noisy.snr_or_sinr_db == pytest.approx(3.01, abs=0.005)

    def test_rate_consistent_with_sinr(self):
        params = LinkBudgetTable().isl()
        result = link_rate(geom(1234.5), params)
        expected = params.bandwidth_hz * math.log2(1 + 10 ** (result.snr_or_sinr_db / 10))
        assert result.achievable_rate_bps == pytest.approx(expected, rel=1e-9)

    def test_noise_is_ktb(self):
        params = LinkBudgetTable().isl()
        result = link_rate(geom(1000.0), params)
        assert result.noise_power_dbw == pytest.approx(
            noise_power_dbw(params.noise_temperature_k, params.bandwidth_hz), abs=1e-9
        )

    def test_invisible_link_rejected(self):
        with pytest.raises(ValueError):
            link_rate(geom(600.0, visible=False), LinkBudgetTable().isl())

    def test_rate_monotone_in_distance(self):
        params = LinkBudgetTable().isl()
        rates = [link_rate(geom(d), params).achievable_rate_bps for d in (500, 800, 1500, 3000, 6000)]
        assert rates == sorted(rates, reverse=True)
        assert len(set(rates)) == len(rates)

    def test_rate_monotone_in_eirp(self):
        from dataclasses import replace

        base = LinkBudgetTable().isl()
        rates = [
            link_rate(geom(1500.0), replace(base, eirp_density_dbw_mhz=e)).achievable_rate_bps
            for e in (0.0, 4.0, 8.0, 12.0)
        ]
        assert rates == sorted(rates)

    def test_sinr_never_exceeds_snr(self):
        params = LinkBudgetTable().isl()
        snr = link_rate(geom(1500.0), params).snr_or_sinr_db
        for interference in (-200.0, -150.0, -120.0, -100.0):
            sinr = link_rate(geom(1500.0), params, interference_dbw=interference).snr_or_sinr_db
            assert sinr < snr

    def test_vectorized_rates_match_link_rate(self):
        params = LinkBudgetTable().gsl_downlink()
        distances = np.array([600.0, 900.0, 1075.1])
        rates = rate_bps_for_distances(distances, params)
        for d, r in zip(distances, rates):
            assert r == pytest.approx(link_rate(geom(float(d)), params).achievable_rate_bps, rel=1e-12)
