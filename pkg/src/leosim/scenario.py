"""Physical constants, configuration schema, validation, and deterministic seeding.

The configuration mirrors the standard parameter table for Ka-band LEO
constellations: a polar Walker star with per-plane altitude steps, EIRP-density
satellite transmitters, and fixed-power ground terminals.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace

SPEED_OF_LIGHT_M_S = 299792458.0
EARTH_RADIUS_KM = 6371.0
GRAVITATIONAL_PARAMETER_M3_S2 = 3.986004418e14
BOLTZMANN_J_K = 1.380649e-23
FIBER_SLOWDOWN_FACTOR = 1.47
# Sidereal rotation rate; used when ground terminals are tied to the rotating Earth.
EARTH_ROTATION_RATE_RAD_S = 7.2921150e-5

EIRP_DENSITY = "eirp_density"
FIXED_POWER = "fixed_power"


class ConfigError(ValueError):
    """Raised when a configuration file cannot be parsed or violates a bound."""


@dataclass(frozen=True)
class PhysicalConstants:
    speed_of_light_m_s: float = SPEED_OF_LIGHT_M_S
    earth_radius_km: float = EARTH_RADIUS_KM
    gravitational_parameter_m3_s2: float = GRAVITATIONAL_PARAMETER_M3_S2
    boltzmann_j_k: float = BOLTZMANN_J_K
    fiber_slowdown_factor: float = FIBER_SLOWDOWN_FACTOR

    def __post_init__(self) -> None:
        for name in (
            "speed_of_light_m_s",
            "earth_radius_km",
            "gravitational_parameter_m3_s2",
            "boltzmann_j_k",
            "fiber_slowdown_factor",
        ):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.fiber_slowdown_factor <= 1.0:
            raise ConfigError("fiber_slowdown_factor must be > 1")


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class ConstellationConfig:
    """Walker-star shape: P polar planes whose ascending nodes span 180 degrees."""

    num_planes: int
    sats_per_plane: int
    base_altitude_km: float = 600.0
    altitude_step_km: float = 10.0
    inclination_deg: float = 90.0
    min_elevation_deg: float = 30.0
    cross_seam_enabled: bool = False
    # In-plane anomaly offset per plane, degrees. Empty tuple means all zero.
    phase_offsets_deg: tuple[float, ...] = ()
    max_inter_degree: int = 1

    def __post_init__(self) -> None:
        if self.num_planes < 1:
            raise ConfigError(f"num_planes must be >= 1 (got {self.num_planes})")
        if self.sats_per_plane < 1:
            raise ConfigError(f"sats_per_plane must be >= 1 (got {self.sats_per_plane})")
        lowest = self.altitude_km(1)
        highest = self.altitude_km(self.num_planes)
        if lowest < 500.0 or highest > 2000.0:
            raise ConfigError(
                "plane altitudes must stay within [500, 2000] km "
                f"(got {lowest:g}..{highest:g})"
            )
        if not 0.0 < self.inclination_deg <= 180.0:
            raise ConfigError("inclination_deg must lie in (0, 180]")
        if not 0.0 <= self.min_elevation_deg < 90.0:
            raise ConfigError("min_elevation_deg must lie in [0, 90)")
        if self.phase_offsets_deg and len(self.phase_offsets_deg) != self.num_planes:
            raise ConfigError(
                "phase_offsets_deg must list one offset per plane "
                f"({self.num_planes} planes, got {len(self.phase_offsets_deg)})"
            )
        if self.max_inter_degree < 1:
            raise ConfigError("max_inter_degree must be >= 1")

    @property
    def total_satellites(self) -> int:
        return self.num_planes * self.sats_per_plane

    def altitude_km(self, plane: int) -> float:
        """Altitude of plane ``plane`` (1-based): base + step * (plane - 1)."""
        return self.base_altitude_km + self.altitude_step_km * (plane - 1)

    def node_longitude_deg(self, plane: int) -> float:
        """Ascending-node longitude 180 * (plane - 1) / P, spanning [0, 180)."""
        return 180.0 * (plane - 1) / self.num_planes

    def phase_offset_deg(self, plane: int) -> float:
        if not self.phase_offsets_deg:
            return 0.0
        return self.phase_offsets_deg[plane - 1]

    def is_seam_pair(self, plane_a: int, plane_b: int) -> bool:
        """The seam joins the two edge planes, which move in near-opposite directions."""
        lo, hi = min(plane_a, plane_b), max(plane_a, plane_b)
        return self.num_planes > 2 and lo == 1 and hi == self.num_planes


@dataclass(frozen=True)
class LinkBudgetParams:
    """Budget parameters for one link class.

    ``transmitter_kind`` selects how EIRP is derived: satellites are specified
    by an EIRP density over the occupied bandwidth, ground terminals by a fixed
    transmit power plus antenna gain.
    """

    carrier_frequency_hz: float
    bandwidth_hz: float
    transmitter_kind: str
    rx_gain_dbi: float
    eirp_density_dbw_mhz: float = 4.0
    tx_power_dbm: float = 33.0
    tx_gain_dbi: float = 0.0
    atmospheric_loss_db: float = 0.0
    scintillation_loss_db: float = 0.0
    noise_temperature_k: float = 354.81
    # Receive gain on the worst-case interference path. None means
    # omnidirectional reception (0 dBi); the interfering transmitter is
    # always treated as radiating its amplifier power isotropically.
    interference_rx_gain_dbi: float | None = None

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth_hz must be > 0")
        if self.noise_temperature_k <= 0:
            raise ConfigError("noise_temperature_k must be > 0")
        if self.atmospheric_loss_db < 0 or self.scintillation_loss_db < 0:
            raise ConfigError("losses must be >= 0")
        if self.transmitter_kind not in (EIRP_DENSITY, FIXED_POWER):
            raise ConfigError(
                f"transmitter_kind must be '{EIRP_DENSITY}' or '{FIXED_POWER}'"
            )

    @property
    def path_loss_extra_db(self) -> float:
        return self.atmospheric_loss_db + self.scintillation_loss_db


def derived_eirp(params: LinkBudgetParams, occupied_bandwidth_hz: float) -> float:
    """Total EIRP in dBW over the occupied bandwidth.

    EIRP-density transmitters scale with bandwidth; fixed-power transmitters
    radiate tx_power + tx_gain regardless of bandwidth.
    """
    if occupied_bandwidth_hz <= 0:
        raise ValueError("occupied_bandwidth_hz must be > 0")
    if params.transmitter_kind == EIRP_DENSITY:
        return params.eirp_density_dbw_mhz + 10.0 * math.log10(occupied_bandwidth_hz / 1e6)
    return (params.tx_power_dbm - 30.0) + params.tx_gain_dbi


@dataclass(frozen=True)
class LinkBudgetTable:
    """The scalar budget table from which per-class params are derived."""

    gsl_downlink_frequency_hz: float = 20e9
    gsl_uplink_frequency_hz: float = 30e9
    isl_frequency_hz: float = 30e9
    bandwidth_hz: float = 400e6
    eirp_density_dbw_mhz: float = 4.0
    sat_antenna_gain_dbi: float = 38.5
    ground_tx_power_dbm: float = 33.0
    ground_tx_gain_dbi: float = 43.2
    ground_rx_gain_dbi: float = 39.7
    atmospheric_loss_db: float = 0.5
    scintillation_loss_db: float = 0.3
    noise_temperature_k: float = 354.81
    interference_rx_gain_dbi: float | None = None

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth_hz must be > 0")
        if self.noise_temperature_k <= 0:
            raise ConfigError("noise_temperature_k must be > 0")
        if self.atmospheric_loss_db < 0 or self.scintillation_loss_db < 0:
            raise ConfigError("losses must be >= 0")

    def gsl_downlink(self) -> LinkBudgetParams:
        """Satellite to ground, Ka-band downlink. Atmospheric losses apply."""
        return LinkBudgetParams(
            carrier_frequency_hz=self.gsl_downlink_frequency_hz,
            bandwidth_hz=self.bandwidth_hz,
            transmitter_kind=EIRP_DENSITY,
            rx_gain_dbi=self.ground_rx_gain_dbi,
            eirp_density_dbw_mhz=self.eirp_density_dbw_mhz,
            tx_gain_dbi=self.sat_antenna_gain_dbi,
            atmospheric_loss_db=self.atmospheric_loss_db,
            scintillation_loss_db=self.scintillation_loss_db,
            noise_temperature_k=self.noise_temperature_k,
            interference_rx_gain_dbi=self.interference_rx_gain_dbi,
        )

    def gsl_uplink(self) -> LinkBudgetParams:
        """Ground to satellite, Ka-band uplink. Atmospheric losses apply."""
        return LinkBudgetParams(
            carrier_frequency_hz=self.gsl_uplink_frequency_hz,
            bandwidth_hz=self.bandwidth_hz,
            transmitter_kind=FIXED_POWER,
            rx_gain_dbi=self.sat_antenna_gain_dbi,
            tx_power_dbm=self.ground_tx_power_dbm,
            tx_gain_dbi=self.ground_tx_gain_dbi,
            atmospheric_loss_db=self.atmospheric_loss_db,
            scintillation_loss_db=self.scintillation_loss_db,
            noise_temperature_k=self.noise_temperature_k,
            interference_rx_gain_dbi=self.interference_rx_gain_dbi,
        )

    def isl(self) -> LinkBudgetParams:
        """Satellite to satellite. Space path: no atmospheric losses."""
        return LinkBudgetParams(
            carrier_frequency_hz=self.isl_frequency_hz,
            bandwidth_hz=self.bandwidth_hz,
            transmitter_kind=EIRP_DENSITY,
            rx_gain_dbi=self.sat_antenna_gain_dbi,
            eirp_density_dbw_mhz=self.eirp_density_dbw_mhz,
            tx_gain_dbi=self.sat_antenna_gain_dbi,
            noise_temperature_k=self.noise_temperature_k,
            interference_rx_gain_dbi=self.interference_rx_gain_dbi,
        )


EXPERIMENT_NAMES = (
    "fig3_delay_doppler",
    "fig4_rates",
    "fig5_pass",
    "fig6_mimo",
    "fig7_access",
    "passes",
    "topology_dump",
)

EXPERIMENT_ALIASES = {
    "fig3": "fig3_delay_doppler",
    "fig4": "fig4_rates",
    "fig5": "fig5_pass",
    "fig6": "fig6_mimo",
    "fig7": "fig7_access",
    "topology": "topology_dump",
}


@dataclass(frozen=True)
class ExperimentSpec:
    """Parameters shared by the experiment runners."""

    name: str = "fig3_delay_doppler"
    duration_s: float | None = None  # None: one period of the lowest plane
    step_s: float = 5.0
    seed: int = 0
    users: int = 100_000
    output_dir: str = "out"
    variants: tuple[tuple[int, int], ...] = ((7, 20), (12, 40))
    betas_deg: tuple[float, ...] = (0.0, 4.0)
    tx_powers_dbm: tuple[float, ...] = (30.0, 50.0)
    ofdma_k: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8)
    cdma_k: tuple[int, ...] = (1, 2, 4, 8)
    sum_eirp_sweep_dbw: tuple[float, ...] = (30.0, 32.5, 35.0, 37.5, 40.0, 42.5, 45.0)
    num_satellites_sweep: tuple[int, ...] = (1, 2, 3, 4, 6)
    pass_step_s: float = 1.0
    include_intra_interference: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if self.name not in EXPERIMENT_NAMES:
            raise ConfigError(
                f"experiment name must be one of {EXPERIMENT_NAMES} (got {self.name!r})"
            )
        if self.step_s <= 0:
            raise ConfigError("step_s must be > 0")
        if self.duration_s is not None and self.duration_s < self.step_s:
            raise ConfigError("duration_s must be >= step_s")
        if self.users < 0:
            raise ConfigError("users must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


_CONSTELLATION_ALIASES = {"p": "num_planes", "n": "sats_per_plane"}

_CONSTELLATION_KEYS = {
    "num_planes": int,
    "sats_per_plane": int,
    "base_altitude_km": float,
    "altitude_step_km": float,
    "inclination_deg": float,
    "min_elevation_deg": float,
    "cross_seam_enabled": bool,
    "phase_offsets_deg": tuple,
    "max_inter_degree": int,
}

_LINK_BUDGET_KEYS = {
    "gsl_downlink_frequency_hz": float,
    "gsl_uplink_frequency_hz": float,
    "isl_frequency_hz": float,
    "bandwidth_hz": float,
    "eirp_density_dbw_mhz": float,
    "sat_antenna_gain_dbi": float,
    "ground_tx_power_dbm": float,
    "ground_tx_gain_dbi": float,
    "ground_rx_gain_dbi": float,
    "atmospheric_loss_db": float,
    "scintillation_loss_db": float,
    "noise_temperature_k": float,
    "interference_rx_gain_dbi": float,
}

_EXPERIMENT_KEYS = {
    "name": str,
    "duration_s": float,
    "step_s": float,
    "seed": int,
    "users": int,
    "output_dir": str,
    "variants": tuple,
    "betas_deg": tuple,
    "tx_powers_dbm": tuple,
    "ofdma_k": tuple,
    "cdma_k": tuple,
    "sum_eirp_sweep_dbw": tuple,
    "num_satellites_sweep": tuple,
    "pass_step_s": float,
    "include_intra_interference": bool,
    "workers": int,
}


def _coerce_section(raw: dict, keys: dict, aliases: dict, section: str) -> dict:
    out: dict = {}
    for key, value in raw.items():
        name = str(key).lower()
        name = aliases.get(name, name)
        if name not in keys:
            raise ConfigError(f"unknown key '{key}' in section '{section}'")
        kind = keys[name]
        try:
            if kind is tuple:
                if name == "variants":
                    value = tuple((int(p), int(n)) for p, n in value)
                elif name in ("ofdma_k", "cdma_k", "num_satellites_sweep"):
                    value = tuple(int(v) for v in value)
                else:
                    value = tuple(float(v) for v in value)
            elif kind is bool:
                if not isinstance(value, bool):
                    raise TypeError("expected true/false")
                value = bool(value)
            elif value is None and name == "interference_rx_gain_dbi":
                pass
            elif value is None and name == "duration_s":
                pass
            else:
                value = kind(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for '{section}.{name}': {exc}") from exc
        out[name] = value
    return out


def parse_config(raw: dict) -> tuple[ConstellationConfig, LinkBudgetTable, ExperimentSpec]:
    """Build validated configuration objects from a parsed JSON mapping."""
    if not isinstance(raw, dict):
        raise ConfigError("top level of the configuration must be an object")
    for key in raw:
        if key not in ("constellation", "link_budget", "experiment"):
            raise ConfigError(f"unknown top-level section '{key}'")
    cons_raw = raw.get("constellation", {})
    cons = _coerce_section(cons_raw, _CONSTELLATION_KEYS, _CONSTELLATION_ALIASES, "constellation")
    if "num_planes" not in cons:
        raise ConfigError("constellation.num_planes (P) is required")
    if "sats_per_plane" not in cons:
        raise ConfigError("constellation.sats_per_plane (N) is required")
    constellation = ConstellationConfig(**cons)
    table = LinkBudgetTable(
        **_coerce_section(raw.get("link_budget", {}), _LINK_BUDGET_KEYS, {}, "link_budget")
    )
    experiment = ExperimentSpec(
        **_coerce_section(raw.get("experiment", {}), _EXPERIMENT_KEYS, {}, "experiment")
    )
    return constellation, table, experiment


def load_config(path: str) -> tuple[ConstellationConfig, LinkBudgetTable, ExperimentSpec]:
    """Load and validate a JSON configuration file.

    An empty file is treated as an empty object, after which the mandatory
    constellation shape keys are reported as missing.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not text.strip():
        raw: dict = {}
    else:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return parse_config(raw)


def serialize_config(
    constellation: ConstellationConfig,
    table: LinkBudgetTable,
    experiment: ExperimentSpec,
) -> dict:
    """Round-trippable plain-dict form of a configuration triple."""
    cons = {
        "num_planes": constellation.num_planes,
        "sats_per_plane": constellation.sats_per_plane,
        "base_altitude_km": constellation.base_altitude_km,
        "altitude_step_km": constellation.altitude_step_km,
        "inclination_deg": constellation.inclination_deg,
        "min_elevation_deg": constellation.min_elevation_deg,
        "cross_seam_enabled": constellation.cross_seam_enabled,
        "max_inter_degree": constellation.max_inter_degree,
    }
    if constellation.phase_offsets_deg:
        cons["phase_offsets_deg"] = list(constellation.phase_offsets_deg)
    lb = {
        "gsl_downlink_frequency_hz": table.gsl_downlink_frequency_hz,
        "gsl_uplink_frequency_hz": table.gsl_uplink_frequency_hz,
        "isl_frequency_hz": table.isl_frequency_hz,
        "bandwidth_hz": table.bandwidth_hz,
        "eirp_density_dbw_mhz": table.eirp_density_dbw_mhz,
        "sat_antenna_gain_dbi": table.sat_antenna_gain_dbi,
        "ground_tx_power_dbm": table.ground_tx_power_dbm,
        "ground_tx_gain_dbi": table.ground_tx_gain_dbi,
        "ground_rx_gain_dbi": table.ground_rx_gain_dbi,
        "atmospheric_loss_db": table.atmospheric_loss_db,
        "scintillation_loss_db": table.scintillation_loss_db,
        "noise_temperature_k": table.noise_temperature_k,
    }
    if table.interference_rx_gain_dbi is not None:
        lb["interference_rx_gain_dbi"] = table.interference_rx_gain_dbi
    exp = {
        "name": experiment.name,
        "step_s": experiment.step_s,
        "seed": experiment.seed,
        "users": experiment.users,
        "output_dir": experiment.output_dir,
        "variants": [list(v) for v in experiment.variants],
        "betas_deg": list(experiment.betas_deg),
        "tx_powers_dbm": list(experiment.tx_powers_dbm),
        "ofdma_k": list(experiment.ofdma_k),
        "cdma_k": list(experiment.cdma_k),
        "sum_eirp_sweep_dbw": list(experiment.sum_eirp_sweep_dbw),
        "num_satellites_sweep": list(experiment.num_satellites_sweep),
        "pass_step_s": experiment.pass_step_s,
        "include_intra_interference": experiment.include_intra_interference,
        "workers": experiment.workers,
    }
    if experiment.duration_s is not None:
        exp["duration_s"] = experiment.duration_s
    return {"constellation": cons, "link_budget": lb, "experiment": exp}


def config_hash(raw: dict) -> str:
    """Stable hash of a configuration dict for run manifests."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def derive_seed(seed: int, *labels) -> int:
    """Derive an independent sub-seed from the global seed and a task label.

    Stable across runs and execution order: sub-streams depend only on the
    label, never on scheduling.
    """
    text = str(seed) + "".join(f"|{label}" for label in labels)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def with_shape(config: ConstellationConfig, num_planes: int, sats_per_plane: int) -> ConstellationConfig:
    return replace(config, num_planes=num_planes, sats_per_plane=sats_per_plane, phase_offsets_deg=())
