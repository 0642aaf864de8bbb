"""Cooperative line-of-sight MIMO from a satellite trail formation to a
ground-station uniform linear array.

The channel uses exact per-element-pair spherical-wavefront distances: the
formation baseline (hundreds of km) makes the combined aperture's Rayleigh
distance far exceed the 600 km slant range, so no plane-wave factorization is
valid. Capacity is achieved by waterfilling the transmit power over the
channel's singular values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linkbudget import noise_power_dbw
from .scenario import CONSTANTS

TOTAL_TX_ANTENNAS = 12


@dataclass(frozen=True)
class MimoScenario:
    num_satellites: int = 6
    inter_satellite_distance_km: float = 100.0
    altitude_km: float = 600.0
    gs_antennas: int = 100
    gs_element_gain_dbi: float = 20.0
    gs_spacing_m: float | None = None  # None: half wavelength
    carrier_frequency_hz: float = 20e9
    tx_element_gain_dbi: float = 0.0
    bandwidth_hz: float = 400e6
    noise_temperature_k: float = 354.81

    def __post_init__(self) -> None:
        if self.num_satellites not in (1, 2, 3, 4, 6, 12):
            raise ValueError("num_satellites must divide the 12 transmit antennas")
        if self.gs_antennas < 1:
            raise ValueError("gs_antennas must be >= 1")

    @property
    def antennas_per_satellite(self) -> int:
        return TOTAL_TX_ANTENNAS // self.num_satellites

    @property
    def wavelength_m(self) -> float:
        return CONSTANTS.speed_of_light_m_s / self.carrier_frequency_hz

    @property
    def rx_spacing_m(self) -> float:
        if self.gs_spacing_m is not None:
            return self.gs_spacing_m
        return self.wavelength_m / 2.0

    def noise_power_dbw(self) -> float:
        return noise_power_dbw(self.noise_temperature_k, self.bandwidth_hz)


def element_positions_km(scenario: MimoScenario) -> tuple[np.ndarray, np.ndarray]:
    """(receive, transmit) element positions in km.

    The ground station sits on the Earth's surface with its array axis aligned
    with the satellites' ground trace; the satellites fly in trail formation
    along the orbital arc, centered on the station's zenith, each carrying a
    half-wavelength-spaced linear sub-array along-track.
    """
    re = CONSTANTS.earth_radius_km
    radius = re + scenario.altitude_km
    m = scenario.gs_antennas
    rx_offsets = (np.arange(m) - (m - 1) / 2.0) * scenario.rx_spacing_m / 1000.0
    rx = np.zeros((m, 3))
    rx[:, 0] = re
    rx[:, 2] = rx_offsets  # along the ground trace

    n_s = scenario.num_satellites
    n_t = scenario.antennas_per_satellite
    arc_offsets = (np.arange(n_s) - (n_s - 1) / 2.0) * scenario.inter_satellite_distance_km
    angles = arc_offsets / radius
    centers = np.stack(
        [radius * np.cos(angles), np.zeros(n_s), radius * np.sin(angles)], axis=1
    )
    tangents = np.stack(
        [-np.sin(angles), np.zeros(n_s), np.cos(angles)], axis=1
    )
    elem_offsets = (np.arange(n_t) - (n_t - 1) / 2.0) * (scenario.wavelength_m / 2.0) / 1000.0
    tx = (centers[:, None, :] + tangents[:, None, :] * elem_offsets[None, :, None]).reshape(
        n_s * n_t, 3
    )
    return rx, tx


def build_channel(scenario: MimoScenario) -> np.ndarray:
    """Complex channel matrix, rows = receive elements, cols = transmit elements.

    Entry amplitude is (lambda / 4 pi d) scaled by the element gains; entry
    phase is -2 pi d / lambda with d the exact element-pair distance.
    """
    rx, tx = element_positions_km(scenario)
    delta = rx[:, None, :] - tx[None, :, :]
    dist_m = np.sqrt(np.einsum("rtk,rtk->rt", delta, delta)) * 1000.0
    lam = scenario.wavelength_m
    gain_lin = 10.0 ** ((scenario.gs_element_gain_dbi + scenario.tx_element_gain_dbi) / 20.0)
    amplitude = lam / (4.0 * np.pi * dist_m) * gain_lin
    phase = -2.0 * np.pi * dist_m / lam
    return amplitude * np.exp(1j * phase)


def waterfill(gains: np.ndarray, total_power: float) -> np.ndarray:
    """Power allocation maximizing sum log2(1 + p_i g_i) subject to sum p <= P.

    gains are the per-mode SNR slopes s_i^2 / sigma^2. The exact waterline is
    found by sorting; the returned powers satisfy the budget to machine
    precision and are nonnegative.
    """
    g = np.asarray(gains, dtype=float)
    if total_power <= 0 or not np.any(g > 0):
        return np.zeros_like(g)
    order = np.argsort(-g)
    g_sorted = g[order]
    n_pos = int((g_sorted > 0).sum())
    inv = np.zeros_like(g_sorted)
    inv[:n_pos] = 1.0 / g_sorted[:n_pos]
    active, waterline = n_pos, 0.0
    for r in range(1, n_pos + 1):
        mu = (total_power + inv[:r].sum()) / r
        if r == n_pos or mu <= inv[r]:
            active, waterline = r, mu
            break
    powers_sorted = np.zeros_like(g_sorted)
    powers_sorted[:active] = waterline - inv[:active]
    powers_sorted = np.maximum(powers_sorted, 0.0)
    # Renormalize the active set so the budget holds exactly.
    used = powers_sorted.sum()
    if used > 0:
        powers_sorted *= total_power / used
    powers = np.zeros_like(g_sorted)
    powers[order] = powers_sorted
    return powers


def achievable_rate(H: np.ndarray, sum_eirp_dbw: float, noise_dbw: float) -> float:
    """Capacity in bit/s/Hz with the total transmit power waterfilled over the
    channel's singular values."""
    if not np.all(np.isfinite(H)):
        raise ValueError("channel matrix must be finite")
    total_power = 10.0 ** (sum_eirp_dbw / 10.0)
    sigma2 = 10.0 ** (noise_dbw / 10.0)
    s = np.linalg.svd(H, compute_uv=False)
    gains = s**2 / sigma2
    powers = waterfill(gains, total_power)
    return float(np.sum(np.log2(1.0 + powers * gains)))


def equal_power_rate(H: np.ndarray, sum_eirp_dbw: float, noise_dbw: float) -> float:
    """Rate with the power split uniformly over the transmit antennas."""
    total_power = 10.0 ** (sum_eirp_dbw / 10.0)
    sigma2 = 10.0 ** (noise_dbw / 10.0)
    s = np.linalg.svd(H, compute_uv=False)
    per_antenna = total_power / H.shape[1]
    return float(np.sum(np.log2(1.0 + per_antenna * s**2 / sigma2)))


def sweep_rates(
    scenario: MimoScenario,
    num_satellites_sweep: tuple[int, ...] = (1, 2, 3, 4, 6),
    sum_eirp_sweep_dbw: tuple[float, ...] = (30.0, 32.5, 35.0, 37.5, 40.0, 42.5, 45.0),
) -> list[tuple[int, float, float]]:
    """Full factorial (num_satellites, sum EIRP) -> rate, in bit/s/Hz."""
    if not sum_eirp_sweep_dbw:
        raise ValueError("sum EIRP sweep must be nonempty")
    from dataclasses import replace

    rows = []
    noise = scenario.noise_power_dbw()
    for n_s in num_satellites_sweep:
        sc = replace(scenario, num_satellites=n_s)
        H = build_channel(sc)
        for eirp in sum_eirp_sweep_dbw:
            rows.append((n_s, eirp, achievable_rate(H, eirp, noise)))
    return rows
