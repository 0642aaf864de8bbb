"""Closed-form propagation of circular Walker-star orbits.

Positions and velocities are expressed in an Earth-centered inertial frame
whose x axis points at ascending-node longitude 0 and whose z axis is the
rotation axis. Anomaly is measured from the ascending node; all planes share
the t=0 epoch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import (
    CONSTANTS,
    ConstellationConfig,
)


def orbital_period(altitude_km: float) -> float:
    """Circular orbital period in seconds at the given altitude."""
    if altitude_km < 0:
        raise ValueError("altitude_km must be >= 0")
    a_m = (CONSTANTS.earth_radius_km + altitude_km) * 1000.0
    return 2.0 * math.pi * math.sqrt(a_m**3 / CONSTANTS.gravitational_parameter_m3_s2)


def orbital_speed(altitude_km: float) -> float:
    """Circular orbital speed in km/s at the given altitude."""
    if altitude_km < 0:
        raise ValueError("altitude_km must be >= 0")
    a_m = (CONSTANTS.earth_radius_km + altitude_km) * 1000.0
    return math.sqrt(CONSTANTS.gravitational_parameter_m3_s2 / a_m) / 1000.0


def plane_angular_rate(altitude_km: float) -> float:
    """Mean motion in rad/s."""
    return 2.0 * math.pi / orbital_period(altitude_km)


@dataclass(frozen=True)
class SatelliteState:
    """Time-stamped inertial state of one satellite."""

    plane: int
    index: int
    time_s: float
    position_km: np.ndarray
    velocity_km_s: np.ndarray


def _plane_basis(node_longitude_deg: float, inclination_deg: float) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors (toward ascending node, toward anomaly +90 deg)."""
    node = math.radians(node_longitude_deg)
    inc = math.radians(inclination_deg)
    u = np.array([math.cos(node), math.sin(node), 0.0])
    w = np.array(
        [-math.sin(node) * math.cos(inc), math.cos(node) * math.cos(inc), math.sin(inc)]
    )
    return u, w


def satellite_state(config: ConstellationConfig, plane: int, index: int, t: float) -> SatelliteState:
    """State of satellite (plane, index) at time t, both indices 1-based."""
    radius = CONSTANTS.earth_radius_km + config.altitude_km(plane)
    rate = plane_angular_rate(config.altitude_km(plane))
    anomaly = (
        2.0 * math.pi * (index - 1) / config.sats_per_plane
        + math.radians(config.phase_offset_deg(plane))
        + rate * t
    )
    u, w = _plane_basis(config.node_longitude_deg(plane), config.inclination_deg)
    pos = radius * (math.cos(anomaly) * u + math.sin(anomaly) * w)
    vel = radius * rate * (-math.sin(anomaly) * u + math.cos(anomaly) * w)
    return SatelliteState(plane=plane, index=index, time_s=t, position_km=pos, velocity_km_s=vel)


def propagate(config: ConstellationConfig, t: float) -> list[SatelliteState]:
    """States of every satellite at time t, ordered by (plane, index)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    states = []
    for plane in range(1, config.num_planes + 1):
        for index in range(1, config.sats_per_plane + 1):
            states.append(satellite_state(config, plane, index, t))
    return states


def propagate_grid(
    config: ConstellationConfig, times: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized propagation over a time grid.

    Returns (positions, velocities) with shape (T, S, 3) in km and km/s, where
    satellite s = (plane - 1) * N + (index - 1), matching propagate() order.
    """
    times = np.asarray(times, dtype=float)
    n_t = times.shape[0]
    n = config.sats_per_plane
    total = config.total_satellites
    pos = np.empty((n_t, total, 3))
    vel = np.empty((n_t, total, 3))
    base_anomaly = 2.0 * np.pi * np.arange(n) / n
    for plane in range(1, config.num_planes + 1):
        radius = CONSTANTS.earth_radius_km + config.altitude_km(plane)
        rate = plane_angular_rate(config.altitude_km(plane))
        u, w = _plane_basis(config.node_longitude_deg(plane), config.inclination_deg)
        anomaly = (
            base_anomaly[None, :]
            + math.radians(config.phase_offset_deg(plane))
            + rate * times[:, None]
        )
        cos_a = np.cos(anomaly)
        sin_a = np.sin(anomaly)
        sl = slice((plane - 1) * n, plane * n)
        pos[:, sl, :] = radius * (cos_a[..., None] * u + sin_a[..., None] * w)
        vel[:, sl, :] = radius * rate * (-sin_a[..., None] * u + cos_a[..., None] * w)
    return pos, vel


def satellite_indices(config: ConstellationConfig) -> tuple[np.ndarray, np.ndarray]:
    """(plane_of, index_of) arrays, 1-based, for the flat satellite ordering."""
    planes = np.repeat(np.arange(1, config.num_planes + 1), config.sats_per_plane)
    indices = np.tile(np.arange(1, config.sats_per_plane + 1), config.num_planes)
    return planes, indices
