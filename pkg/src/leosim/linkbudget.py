"""Free-space path loss, thermal noise, SNR/SINR, and Shannon rates.

Received power follows the standard budget: EIRP - FSPL - atmospheric losses
+ receive gain. Interference, when present, is treated as additional white
Gaussian noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import LinkGeometry
from .scenario import CONSTANTS, LinkBudgetParams, derived_eirp


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(linear):
    return 10.0 * np.log10(np.asarray(linear, dtype=float))


def fspl_db(distance_km, carrier_frequency_hz):
    """Free-space path loss 20 log10(4 pi d f / c), distance in km.

    Accepts scalars or numpy arrays.
    """
    d = np.asarray(distance_km, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance_km must be > 0")
    if carrier_frequency_hz <= 0:
        raise ValueError("carrier_frequency_hz must be > 0")
    value = 20.0 * np.log10(
        4.0 * np.pi * d * 1000.0 * carrier_frequency_hz / CONSTANTS.speed_of_light_m_s
    )
    return float(value) if np.isscalar(distance_km) else value


def noise_power_dbw(temperature_k: float, bandwidth_hz: float) -> float:
    """Thermal noise power 10 log10(k T B) in dBW."""
    if temperature_k <= 0 or bandwidth_hz <= 0:
        raise ValueError("temperature and bandwidth must be > 0")
    return 10.0 * math.log10(CONSTANTS.boltzmann_j_k * temperature_k * bandwidth_hz)


@dataclass(frozen=True)
class LinkBudgetResult:
    fspl_db: float
    received_power_dbw: float
    noise_power_dbw: float
    snr_or_sinr_db: float
    achievable_rate_bps: float
    spectral_efficiency_bps_hz: float
    interference_power_dbw: float | None = None


def received_power_dbw(
    distance_km: float, params: LinkBudgetParams, occupied_bandwidth_hz: float | None = None
) -> float:
    """Received signal power over the occupied bandwidth."""
    bandwidth = params.bandwidth_hz if occupied_bandwidth_hz is None else occupied_bandwidth_hz
    eirp = derived_eirp(params, bandwidth)
    return eirp - fspl_db(distance_km, params.carrier_frequency_hz) - params.path_loss_extra_db + params.rx_gain_dbi


def link_rate(
    geom: LinkGeometry,
    params: LinkBudgetParams,
    interference_dbw: float | None = None,
) -> LinkBudgetResult:
    """Achievable AWGN-capacity rate of a visible link over the full bandwidth."""
    if not geom.visible:
        raise ValueError("link is not visible")
    loss = fspl_db(geom.distance_km, params.carrier_frequency_hz)
    p_rx = received_power_dbw(geom.distance_km, params)
    noise = noise_power_dbw(params.noise_temperature_k, params.bandwidth_hz)
    if interference_dbw is None:
        sinr = p_rx - noise
    else:
        total = db_to_linear(noise) + db_to_linear(interference_dbw)
        sinr = p_rx - float(linear_to_db(total))
    se = math.log2(1.0 + 10.0 ** (sinr / 10.0))
    return LinkBudgetResult(
        fspl_db=loss,
        received_power_dbw=p_rx,
        noise_power_dbw=noise,
        snr_or_sinr_db=sinr,
        achievable_rate_bps=params.bandwidth_hz * se,
        spectral_efficiency_bps_hz=se,
        interference_power_dbw=interference_dbw,
    )


def rate_bps_for_distances(distances_km, params: LinkBudgetParams):
    """Vectorized interference-free rates for an array of distances."""
    d = np.asarray(distances_km, dtype=float)
    eirp = derived_eirp(params, params.bandwidth_hz)
    p_rx = eirp - fspl_db(d, params.carrier_frequency_hz) - params.path_loss_extra_db + params.rx_gain_dbi
    snr = p_rx - noise_power_dbw(params.noise_temperature_k, params.bandwidth_hz)
    return params.bandwidth_hz * np.log2(1.0 + 10.0 ** (snr / 10.0))
