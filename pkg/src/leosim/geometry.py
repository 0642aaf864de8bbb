"""Pairwise link geometry: visibility, slant range, elevation, radial speed,
Doppler, coverage caps, ground-user sampling, pass profiles, and the
space-versus-fiber latency comparison.

All angles in degrees at the interfaces, all distances in km, speeds in km/s.
Elevation is measured against the geometric horizon of a spherical Earth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .orbits import SatelliteState, orbital_period
from .scenario import (
    CONSTANTS,
    EARTH_ROTATION_RATE_RAD_S,
    FIBER_SLOWDOWN_FACTOR,
)

_C_KM_S = CONSTANTS.speed_of_light_m_s / 1000.0


@dataclass(frozen=True)
class GroundTerminal:
    latitude_deg: float
    longitude_deg: float
    altitude_km: float = 0.0

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError("latitude_deg must lie in [-90, 90]")
        if not -180.0 <= self.longitude_deg < 180.0:
            raise ValueError("longitude_deg must lie in [-180, 180)")


@dataclass(frozen=True)
class LinkGeometry:
    """Geometry of one transmitter-receiver pair at one instant.

    relative_radial_speed_km_s is positive when the endpoints recede from
    each other. elevation_deg is None for space-to-space links.
    """

    distance_km: float
    visible: bool
    relative_radial_speed_km_s: float
    elevation_deg: float | None = None


@dataclass(frozen=True)
class PassProfile:
    """Sampled overflight of a ground terminal while above minimum elevation."""

    samples: tuple[tuple[float, float, float], ...]  # (t_s, elevation_deg, distance_km)
    start_s: float
    end_s: float
    beta_deg: float

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    @property
    def empty(self) -> bool:
        return not self.samples


def terminal_position_km(gt: GroundTerminal, rotation_angle_rad: float = 0.0) -> np.ndarray:
    """Inertial position of a ground terminal, optionally rotated about z."""
    lat = math.radians(gt.latitude_deg)
    lon = math.radians(gt.longitude_deg) + rotation_angle_rad
    radius = CONSTANTS.earth_radius_km + gt.altitude_km
    return radius * np.array(
        [math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)]
    )


def gsl_geometry(
    sat: SatelliteState,
    gt: GroundTerminal,
    min_elevation_deg: float,
    earth_rotation: bool = False,
) -> LinkGeometry:
    """Ground-to-satellite geometry at the satellite's time stamp.

    With earth_rotation the terminal is tied to the rotating Earth: its
    inertial longitude advances at the sidereal rate and its velocity is the
    rotational velocity; otherwise the terminal is static in the inertial
    frame.
    """
    if earth_rotation:
        angle = EARTH_ROTATION_RATE_RAD_S * sat.time_s
        gt_pos = terminal_position_km(gt, angle)
        gt_vel = np.cross(np.array([0.0, 0.0, EARTH_ROTATION_RATE_RAD_S]), gt_pos)
    else:
        gt_pos = terminal_position_km(gt)
        gt_vel = np.zeros(3)
    delta = sat.position_km - gt_pos
    distance = float(np.linalg.norm(delta))
    up = gt_pos / np.linalg.norm(gt_pos)
    elevation = math.degrees(math.asin(float(np.dot(delta, up)) / distance))
    radial = float(np.dot(sat.velocity_km_s - gt_vel, delta)) / distance
    return LinkGeometry(
        distance_km=distance,
        visible=elevation >= min_elevation_deg,
        relative_radial_speed_km_s=radial,
        elevation_deg=elevation,
    )


def segment_blocked(
    a: np.ndarray, b: np.ndarray, occlusion_radius_km: float
) -> bool:
    """True when the segment a-b passes through the sphere of the given radius."""
    ab = b - a
    denom = float(np.dot(ab, ab))
    if denom == 0.0:
        return False
    t = -float(np.dot(a, ab)) / denom
    if t <= 0.0 or t >= 1.0:
        return False
    closest = a + t * ab
    return float(np.linalg.norm(closest)) < occlusion_radius_km


def isl_geometry(
    a: SatelliteState,
    b: SatelliteState,
    occlusion_radius_km: float | None = None,
) -> LinkGeometry:
    """Inter-satellite geometry; visible when Earth does not block the path."""
    if a.time_s != b.time_s:
        raise ValueError("satellite states must share a time stamp")
    radius = CONSTANTS.earth_radius_km if occlusion_radius_km is None else occlusion_radius_km
    delta = a.position_km - b.position_km
    distance = float(np.linalg.norm(delta))
    radial = float(np.dot(a.velocity_km_s - b.velocity_km_s, delta)) / distance
    visible = not segment_blocked(a.position_km, b.position_km, radius)
    return LinkGeometry(
        distance_km=distance,
        visible=visible,
        relative_radial_speed_km_s=radial,
    )


def doppler_shift(relative_radial_speed_km_s: float, carrier_frequency_hz: float) -> float:
    """Doppler magnitude |v| * f_c / c in Hz."""
    return abs(relative_radial_speed_km_s) * 1000.0 * carrier_frequency_hz / CONSTANTS.speed_of_light_m_s


def propagation_delay_ms(distance_km: float) -> float:
    """One-way free-space propagation delay in milliseconds."""
    if distance_km < 0:
        raise ValueError("distance_km must be >= 0")
    return distance_km / _C_KM_S * 1000.0


def coverage_cap(altitude_km: float, min_elevation_deg: float) -> tuple[float, float]:
    """Earth-central half-angle (deg) and surface-area fraction of the
    coverage cap seen above the minimum elevation angle."""
    if altitude_km <= 0:
        raise ValueError("altitude_km must be > 0")
    if not 0.0 <= min_elevation_deg < 90.0:
        raise ValueError("min_elevation_deg must lie in [0, 90)")
    eps = math.radians(min_elevation_deg)
    r = CONSTANTS.earth_radius_km
    half_angle = math.acos(r / (r + altitude_km) * math.cos(eps)) - eps
    fraction = (1.0 - math.cos(half_angle)) / 2.0
    return math.degrees(half_angle), fraction


def slant_range_km(altitude_km: float, elevation_deg: float) -> float:
    """Slant range to a satellite at the given elevation angle."""
    r = CONSTANTS.earth_radius_km
    e = math.radians(elevation_deg)
    return math.sqrt((r + altitude_km) ** 2 - (r * math.cos(e)) ** 2) - r * math.sin(e)


def sample_users(
    count: int,
    center: GroundTerminal,
    half_angle_deg: float,
    seed: int,
) -> list[GroundTerminal]:
    """Points i.i.d. uniform by area on the spherical cap around ``center``.

    Deterministic for a given seed. Equivalent to a homogeneous Poisson point
    process on the cap conditioned on the point count.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        return []
    rng = np.random.default_rng(seed)
    cos_lam = math.cos(math.radians(half_angle_deg))
    cos_theta = rng.uniform(cos_lam, 1.0, size=count)
    sin_theta = np.sqrt(1.0 - cos_theta**2)
    azimuth = rng.uniform(0.0, 2.0 * math.pi, size=count)
    local = np.stack(
        [sin_theta * np.cos(azimuth), sin_theta * np.sin(azimuth), cos_theta], axis=1
    )
    # Rotate the cap pole (+z) onto the center direction.
    pole = terminal_position_km(center)
    pole = pole / np.linalg.norm(pole)
    z = np.array([0.0, 0.0, 1.0])
    if np.allclose(pole, z):
        points = local
    elif np.allclose(pole, -z):
        points = local * np.array([1.0, 1.0, -1.0])
    else:
        # Rodrigues rotation: v cos + (k x v) sin + k (k.v)(1 - cos)
        k = np.cross(z, pole)
        k = k / np.linalg.norm(k)
        angle = math.acos(float(np.clip(np.dot(z, pole), -1.0, 1.0)))
        cos_a, sin_a = math.cos(angle), math.sin(angle)
        points = local * cos_a + np.cross(k[None, :], local) * sin_a + np.outer(local @ k, k) * (1.0 - cos_a)
    lat = np.degrees(np.arcsin(np.clip(points[:, 2], -1.0, 1.0)))
    lon = np.degrees(np.arctan2(points[:, 1], points[:, 0]))
    lon = np.where(lon >= 180.0, lon - 360.0, lon)
    return [GroundTerminal(float(la), float(lo)) for la, lo in zip(lat, lon)]


def _pass_elevation_distance(
    radius_km: float, anomaly_rad: float, offset_rad: float
) -> tuple[float, float]:
    r = radius_km
    re = CONSTANTS.earth_radius_km
    cos_psi = math.cos(anomaly_rad) * math.cos(offset_rad)
    distance = math.sqrt(re * re + r * r - 2.0 * re * r * cos_psi)
    elevation = math.degrees(math.asin((r * cos_psi - re) / distance))
    return elevation, distance


def compute_pass(
    altitude_km: float,
    beta_deg: float,
    min_elevation_deg: float,
    step_s: float,
    earth_rotation: bool = True,
) -> PassProfile:
    """Overflight of an equatorial terminal by a polar-orbit satellite.

    beta is the longitude shift between the terminal and the orbital plane at
    the moment the satellite first clears the minimum elevation angle. With
    earth_rotation the terminal is carried eastward, away from the inertially
    fixed plane, so off-plane passes shorten compared to a static geometry.
    """
    if step_s <= 0:
        raise ValueError("step_s must be > 0")
    radius = CONSTANTS.earth_radius_km + altitude_km
    half_angle_deg, _ = coverage_cap(altitude_km, min_elevation_deg)
    lam = math.radians(half_angle_deg)
    beta = math.radians(beta_deg)
    ratio = math.cos(lam) / math.cos(beta) if math.cos(beta) > 0 else 2.0
    if ratio > 1.0:
        # The satellite never clears the minimum elevation for this offset.
        return PassProfile(samples=(), start_s=0.0, end_s=0.0, beta_deg=beta_deg)
    rate = 2.0 * math.pi / orbital_period(altitude_km)
    drift = EARTH_ROTATION_RATE_RAD_S if earth_rotation else 0.0
    rise_to_crossing = math.acos(ratio) / rate

    def elevation_at(t: float) -> float:
        anomaly = rate * (t - rise_to_crossing)
        offset = beta + drift * t
        elev, _ = _pass_elevation_distance(radius, anomaly, offset)
        return elev

    samples: list[tuple[float, float, float]] = []
    t = 0.0
    while True:
        anomaly = rate * (t - rise_to_crossing)
        offset = beta + drift * t
        elev, dist = _pass_elevation_distance(radius, anomaly, offset)
        if elev < min_elevation_deg - 1e-9:
            break
        samples.append((t, elev, dist))
        t += step_s
    # Refine the falling edge so the duration is independent of the step.
    lo = samples[-1][0] if samples else 0.0
    hi = t
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if elevation_at(mid) >= min_elevation_deg:
            lo = mid
        else:
            hi = mid
    end = 0.5 * (lo + hi)
    return PassProfile(samples=tuple(samples), start_s=0.0, end_s=end, beta_deg=beta_deg)


def fiber_vs_space_delay(
    great_circle_distance_km: float, space_path_length_km: float
) -> tuple[float, float]:
    """One-way latency (ms) through fiber along the ground path versus the
    free-space path, using the slowdown factor of light in fiber."""
    if great_circle_distance_km < 0 or space_path_length_km < 0:
        raise ValueError("distances must be >= 0")
    fiber_ms = great_circle_distance_km * FIBER_SLOWDOWN_FACTOR / _C_KM_S * 1000.0
    space_ms = space_path_length_km / _C_KM_S * 1000.0
    return fiber_ms, space_ms
