"""Experiment runners: wire the physics modules into the named CSV reports.

Reports (file names match the report ids):
  fig3  p95 propagation delay and Doppler per link class and variant
  fig4  median/p95 interference-free rates per link class and variant
  fig5  spectral-efficiency time series over a ground-station pass
  fig6  cooperative-swarm MIMO rate versus sum EIRP
  fig7  effective inter-plane rates under OFDMA/CDMA resource allocation
plus raw pass profiles and an inter-plane topology dump.

Everything is deterministic for a fixed seed, including under multiprocessing:
tasks fan out over independent series and are reassembled in a fixed order.
"""

from __future__ import annotations

import json
import math
import multiprocessing
import os
import subprocess
from dataclasses import dataclass, replace

import numpy as np

from . import access
from .geometry import (
    GroundTerminal,
    compute_pass,
    coverage_cap,
    sample_users,
    terminal_position_km,
)
from .linkbudget import fspl_db, noise_power_dbw, rate_bps_for_distances
from .orbits import orbital_period, propagate_grid, satellite_indices
from .scenario import (
    CONSTANTS,
    FIXED_POWER,
    ConfigError,
    ConstellationConfig,
    ExperimentSpec,
    LinkBudgetTable,
    config_hash,
    derive_seed,
    serialize_config,
    with_shape,
)
from .mimo import MimoScenario, sweep_rates
from .topology import (
    contacts_from_matchings,
    match_snapshot_fast,
    matching_over_grid,
)

_C_KM_S = CONSTANTS.speed_of_light_m_s / 1000.0
LOW_SAMPLE_THRESHOLD = 100

GSL = "gsl"
GSL_DOWNLINK = "gsl_downlink"
GSL_UPLINK = "gsl_uplink"
INTRA_ISL = "intra_isl"
INTER_ISL = "inter_isl"
CROSS_SEAM_ISL = "cross_seam_isl"


def percentile(samples, q: float) -> float:
    """Nearest-rank percentile: value at rank ceil(q * n) of the sorted sample."""
    values = np.sort(np.asarray(samples, dtype=float).ravel())
    if values.size == 0:
        raise ValueError("percentile of an empty sample")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    rank = max(1, math.ceil(q * values.size))
    return float(values[rank - 1])


@dataclass(frozen=True)
class StatSummary:
    median: float
    p95: float
    mean: float
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("summary needs at least one sample")
        if self.p95 < self.median:
            raise ValueError("p95 cannot be below the median")

    @classmethod
    def of(cls, samples) -> "StatSummary":
        values = np.asarray(samples, dtype=float).ravel()
        return cls(
            median=percentile(values, 0.5),
            p95=percentile(values, 0.95),
            mean=float(values.mean()),
            count=int(values.size),
        )


def _candidate_satellites(
    config: ConstellationConfig, center: GroundTerminal, cap_half_angle_deg: float
) -> np.ndarray:
    """Flat indices of satellites whose ground track can reach the user cap.

    A satellite is visible from a cap point only if its plane's track passes
    within cap radius + coverage radius of the cap center; other planes can
    be skipped exactly.
    """
    planes, _ = satellite_indices(config)
    lat = math.radians(center.latitude_deg)
    lon = math.radians(center.longitude_deg)
    keep = []
    for plane in range(1, config.num_planes + 1):
        node = math.radians(config.node_longitude_deg(plane))
        # Distance from the center to the great circle through the poles at
        # this node longitude (valid for polar planes).
        if abs(config.inclination_deg - 90.0) < 1e-9:
            track_dist = abs(math.asin(math.cos(lat) * math.sin(lon - node)))
        else:
            track_dist = 0.0  # non-polar: no exact shortcut, keep the plane
        reach = math.radians(2.0 * cap_half_angle_deg + 0.2)
        if track_dist <= reach:
            keep.append(plane)
    mask = np.isin(planes, keep)
    return np.flatnonzero(mask)


def _ring_index_arrays(config: ConstellationConfig) -> tuple[np.ndarray, np.ndarray]:
    n = config.sats_per_plane
    a = np.arange(config.total_satellites)
    local = a % n
    b = a - local + (local + 1) % n
    return a, b


@dataclass(frozen=True)
class ClassSamples:
    """Samples of one link class: instantaneous values per (link, snapshot)
    plus the worst value each link contact has to tolerate."""

    distance_km: np.ndarray
    worst_distance_km: np.ndarray
    worst_radial_km_s: np.ndarray


@dataclass(frozen=True)
class VariantSamples:
    """Per-class samples of one (P, N) variant simulation."""

    num_planes: int
    sats_per_plane: int
    gsl: ClassSamples
    intra: ClassSamples
    inter: ClassSamples
    seam: ClassSamples


class _ContactTracker:
    """Accumulates per-contact worst distance and radial speed incrementally.

    One slot per tracked entity (ground user or link); a contact ends when
    the entity's partner changes or disappears.
    """

    def __init__(self, count: int) -> None:
        self._partner = np.full(count, -1, dtype=np.int64)
        self._worst_d = np.zeros(count)
        self._worst_v = np.zeros(count)
        self.distances: list[np.ndarray] = []
        self.radials: list[np.ndarray] = []

    def update(self, partner: np.ndarray, distance: np.ndarray, radial: np.ndarray) -> None:
        closed = (partner != self._partner) & (self._partner >= 0)
        if closed.any():
            self.distances.append(self._worst_d[closed].copy())
            self.radials.append(self._worst_v[closed].copy())
        fresh = partner != self._partner
        self._worst_d[fresh] = 0.0
        self._worst_v[fresh] = 0.0
        self._partner = partner.copy()
        active = partner >= 0
        np.maximum(self._worst_d, np.where(active, distance, 0.0), out=self._worst_d)
        np.maximum(self._worst_v, np.where(active, np.abs(radial), 0.0), out=self._worst_v)

    def finish(self) -> tuple[np.ndarray, np.ndarray]:
        open_contacts = self._partner >= 0
        if open_contacts.any():
            self.distances.append(self._worst_d[open_contacts].copy())
            self.radials.append(self._worst_v[open_contacts].copy())
        cat = lambda chunks: np.concatenate(chunks) if chunks else np.empty(0)
        return cat(self.distances), cat(self.radials)


def _variant_samples(args) -> VariantSamples:
    constellation, spec, p, n = args
    cfg = with_shape(constellation, p, n)
    duration = spec.duration_s or orbital_period(cfg.base_altitude_km)
    times = np.arange(0.0, duration, spec.step_s)
    pos, vel = propagate_grid(cfg, times)
    planes_of, _ = satellite_indices(cfg)
    re = CONSTANTS.earth_radius_km

    # Ground users, fixed once per experiment, on the coverage cap of the
    # lowest plane around the t=0 subsatellite point of satellite (1, 1).
    # Each covered user is served by its highest-elevation satellite.
    half_angle, _ = coverage_cap(cfg.base_altitude_km, cfg.min_elevation_deg)
    center = GroundTerminal(0.0, 0.0)
    users = sample_users(spec.users, center, half_angle, derive_seed(spec.seed, "users", p, n))
    gsl_d_chunks: list[np.ndarray] = []
    tracker = _ContactTracker(len(users))
    if users:
        u_pos = np.stack([terminal_position_km(u) for u in users])
        u_unit = u_pos / re
        cand = _candidate_satellites(cfg, center, half_angle)
        sat_r2 = np.einsum("sk,sk->s", pos[0, cand], pos[0, cand])
        sin_min = math.sin(math.radians(cfg.min_elevation_deg))
        for ti in range(times.size):
            s_pos = pos[ti, cand]
            dot = u_unit @ s_pos.T
            d = np.sqrt(np.maximum(sat_r2[None, :] + re * re - 2.0 * re * dot, 1e-12))
            ratio = (dot - re) / d
            visible = ratio >= sin_min
            has = visible.any(axis=1)
            ratio = np.where(visible, ratio, -np.inf)
            best = np.argmax(ratio, axis=1)
            serving = np.where(has, cand[best], -1)
            dist = d[np.arange(len(users)), best]
            delta = s_pos[best] - u_pos
            vrad = np.einsum("mk,mk->m", vel[ti, cand][best], delta) / dist
            tracker.update(serving, dist, vrad)
            if has.any():
                gsl_d_chunks.append(dist[has])
    gsl_worst_d, gsl_worst_v = tracker.finish()
    gsl = ClassSamples(
        distance_km=np.concatenate(gsl_d_chunks) if gsl_d_chunks else np.empty(0),
        worst_distance_km=gsl_worst_d,
        worst_radial_km_s=gsl_worst_v,
    )

    # Intra-plane ring links: rigid geometry, one contact spanning the horizon.
    ring_a, ring_b = _ring_index_arrays(cfg)
    delta = pos[:, ring_a, :] - pos[:, ring_b, :]
    intra_d = np.sqrt(np.einsum("tsk,tsk->ts", delta, delta))
    dvel = vel[:, ring_a, :] - vel[:, ring_b, :]
    intra_v = np.einsum("tsk,tsk->ts", dvel, delta) / intra_d
    intra = ClassSamples(
        distance_km=intra_d.ravel(),
        worst_distance_km=intra_d.max(axis=0),
        worst_radial_km_s=np.abs(intra_v).max(axis=0),
    )

    # Inter-plane links from the per-snapshot greedy matching; contacts merge
    # consecutive snapshots in which a pair stays matched.
    matchings = matching_over_grid(cfg, pos)
    inter_d: list[float] = []
    seam_d: list[float] = []
    for ti, links in enumerate(matchings):
        for a, b, dist in links:
            seam = cfg.is_seam_pair(int(planes_of[a]), int(planes_of[b]))
            (seam_d if seam else inter_d).append(dist)
    windows = contacts_from_matchings(matchings, times, spec.step_s)
    inter_wd: list[float] = []
    inter_wv: list[float] = []
    seam_wd: list[float] = []
    seam_wv: list[float] = []
    for (a, b), spans in sorted(windows.items()):
        seam = cfg.is_seam_pair(int(planes_of[a]), int(planes_of[b]))
        for w0, w1 in spans:
            dvec = pos[w0:w1, a] - pos[w0:w1, b]
            d = np.linalg.norm(dvec, axis=1)
            vrad = np.abs(np.einsum("wk,wk->w", vel[w0:w1, a] - vel[w0:w1, b], dvec) / d)
            (seam_wd if seam else inter_wd).append(float(d.max()))
            (seam_wv if seam else inter_wv).append(float(vrad.max()))

    inter = ClassSamples(
        distance_km=np.array(inter_d),
        worst_distance_km=np.array(inter_wd),
        worst_radial_km_s=np.array(inter_wv),
    )
    seam = ClassSamples(
        distance_km=np.array(seam_d),
        worst_distance_km=np.array(seam_wd),
        worst_radial_km_s=np.array(seam_wv),
    )
    return VariantSamples(num_planes=p, sats_per_plane=n, gsl=gsl, intra=intra, inter=inter, seam=seam)


def _doppler_khz(radial_km_s: np.ndarray, carrier_hz: float) -> np.ndarray:
    return np.abs(radial_km_s) * 1000.0 * carrier_hz / CONSTANTS.speed_of_light_m_s / 1e3


def _delay_ms(distance_km: np.ndarray) -> np.ndarray:
    return distance_km / _C_KM_S * 1e3


def _map_tasks(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=min(workers, len(tasks))) as pool:
        return pool.map(fn, tasks)


def run_fig3(
    constellation: ConstellationConfig, table: LinkBudgetTable, spec: ExperimentSpec
) -> tuple[list[str], list[list]]:
    """p95 delay and Doppler per link class for each constellation variant.

    Every link contact contributes the worst delay and Doppler it has to
    tolerate; percentiles are taken across contacts. GSL Doppler is quoted at
    the uplink carrier (the higher of the two GSL bands).
    """
    header = [
        "p",
        "n",
        "link_class",
        "carrier_ghz",
        "p95_delay_ms",
        "p95_doppler_khz",
        "samples",
        "low_sample_flag",
    ]
    tasks = [(constellation, spec, p, n) for p, n in spec.variants]
    rows: list[list] = []
    for samples in _map_tasks(_variant_samples, tasks, spec.workers):
        f_gsl = table.gsl_uplink_frequency_hz
        f_isl = table.isl_frequency_hz
        classes = [
            (GSL, f_gsl, samples.gsl),
            (INTRA_ISL, f_isl, samples.intra),
            (INTER_ISL, f_isl, samples.inter),
            (CROSS_SEAM_ISL, f_isl, samples.seam),
        ]
        for name, carrier, cls in classes:
            if cls.worst_distance_km.size == 0:
                continue
            count = int(cls.worst_distance_km.size)
            rows.append(
                [
                    samples.num_planes,
                    samples.sats_per_plane,
                    name,
                    carrier / 1e9,
                    percentile(_delay_ms(cls.worst_distance_km), 0.95),
                    percentile(_doppler_khz(cls.worst_radial_km_s, carrier), 0.95),
                    count,
                    int(count < LOW_SAMPLE_THRESHOLD),
                ]
            )
    return header, rows


def run_fig4(
    constellation: ConstellationConfig, table: LinkBudgetTable, spec: ExperimentSpec
) -> tuple[list[str], list[list]]:
    """Median and p95 interference-free achievable rates per link class."""
    header = [
        "p",
        "n",
        "link_class",
        "carrier_ghz",
        "median_rate_mbps",
        "p95_rate_mbps",
        "samples",
        "low_sample_flag",
    ]
    tasks = [(constellation, spec, p, n) for p, n in spec.variants]
    rows: list[list] = []
    for samples in _map_tasks(_variant_samples, tasks, spec.workers):
        down = table.gsl_downlink()
        up = table.gsl_uplink()
        isl = table.isl()
        classes = [
            (GSL_DOWNLINK, down, samples.gsl.distance_km),
            (GSL_UPLINK, up, samples.gsl.distance_km),
            (INTRA_ISL, isl, samples.intra.distance_km),
            (INTER_ISL, isl, samples.inter.distance_km),
            (CROSS_SEAM_ISL, isl, samples.seam.distance_km),
        ]
        for name, params, dists in classes:
            if dists.size == 0:
                continue
            rates = rate_bps_for_distances(dists, params) / 1e6
            summary = StatSummary.of(rates)
            rows.append(
                [
                    samples.num_planes,
                    samples.sats_per_plane,
                    name,
                    params.carrier_frequency_hz / 1e9,
                    summary.median,
                    summary.p95,
                    summary.count,
                    int(summary.count < LOW_SAMPLE_THRESHOLD),
                ]
            )
    return header, rows


def _pass_series(args) -> list[list]:
    constellation, table, spec, beta, ptx = args
    profile = compute_pass(
        constellation.base_altitude_km,
        beta,
        constellation.min_elevation_deg,
        spec.pass_step_s,
        earth_rotation=True,
    )
    params = replace(
        table.gsl_downlink(),
        transmitter_kind=FIXED_POWER,
        tx_power_dbm=ptx,
        tx_gain_dbi=table.sat_antenna_gain_dbi,
    )
    noise = noise_power_dbw(params.noise_temperature_k, params.bandwidth_hz)
    rows = []
    for t, elev, dist in profile.samples:
        snr = (
            (params.tx_power_dbm - 30.0)
            + params.tx_gain_dbi
            - fspl_db(dist, params.carrier_frequency_hz)
            - params.path_loss_extra_db
            + params.rx_gain_dbi
            - noise
        )
        se = math.log2(1.0 + 10.0 ** (snr / 10.0))
        rows.append([beta, ptx, t, elev, dist, se])
    return rows


def run_fig5(
    constellation: ConstellationConfig, table: LinkBudgetTable, spec: ExperimentSpec
) -> tuple[list[str], list[list]]:
    """Downlink spectral efficiency during one pass, per beta and Tx power.

    The pass experiment sweeps a fixed transmit power with the satellite
    antenna gain as transmit gain instead of the EIRP-density rule.
    """
    header = ["beta_deg", "tx_power_dbm", "t_s", "elevation_deg", "distance_km", "se_bps_hz"]
    tasks = [
        (constellation, table, spec, beta, ptx)
        for beta in spec.betas_deg
        for ptx in spec.tx_powers_dbm
    ]
    rows: list[list] = []
    for series in _map_tasks(_pass_series, tasks, spec.workers):
        rows.extend(series)
    return header, rows


def run_fig6(
    constellation: ConstellationConfig, table: LinkBudgetTable, spec: ExperimentSpec
) -> tuple[list[str], list[list]]:
    """Cooperative trail-formation MIMO rates over the sum-EIRP sweep."""
    header = ["n_s", "sum_eirp_dbw", "rate_bps_hz"]
    scenario = MimoScenario(
        altitude_km=constellation.base_altitude_km,
        carrier_frequency_hz=table.gsl_downlink_frequency_hz,
        bandwidth_hz=table.bandwidth_hz,
        noise_temperature_k=table.noise_temperature_k,
    )
    rows = [
        list(row)
        for row in sweep_rates(scenario, spec.num_satellites_sweep, spec.sum_eirp_sweep_dbw)
    ]
    return header, rows


def _fig7_variant(args) -> list[list]:
    constellation, table, spec, p, n = args
    cfg = with_shape(constellation, p, n)
    duration = spec.duration_s or orbital_period(cfg.base_altitude_km)
    times = np.arange(0.0, duration, spec.step_s)
    pos, _ = propagate_grid(cfg, times)
    planes_of, indices_of = satellite_indices(cfg)
    matchings = matching_over_grid(cfg, pos)
    windows = contacts_from_matchings(matchings, times, spec.step_s)
    window_at: dict[tuple[int, int, int], tuple[int, int]] = {}
    for pair, spans in windows.items():
        for w0, w1 in spans:
            for i in range(w0, w1):
                window_at[(pair[0], pair[1], i)] = (w0, w1)

    params = table.isl()
    model = access.InterferenceWindowModel(pos, params)
    acc: dict[tuple[str, int], list[np.ndarray]] = {}
    for ti in range(times.size):
        links = []
        # Every matched pair carries one directed stream per direction; both
        # need a resource, and a satellite jams its own co-resource receptions.
        # Zero outage: the desired signal is taken at the pair's largest
        # separation over the contact window.
        for a, b, _dist in matchings[ti]:
            w0, w1 = window_at[(a, b, ti)]
            pair_key = (int(planes_of[a]), int(indices_of[a]), int(planes_of[b]), int(indices_of[b]))
            d_wc = model.max_distance_km(a, b, w0, w1)
            links.append(
                access.LinkInstance(
                    tx=a, rx=b, key=pair_key + (0,), window_start=w0, window_end=w1, distance_km=d_wc
                )
            )
            links.append(
                access.LinkInstance(
                    tx=b, rx=a, key=pair_key + (1,), window_start=w0, window_end=w1, distance_km=d_wc
                )
            )
        if not links:
            continue
        rates = access.snapshot_scheme_rates(
            links, tuple(spec.ofdma_k), tuple(spec.cdma_k), table.bandwidth_hz, model
        )
        for key, values in rates.items():
            acc.setdefault(key, []).append(values)

    rows = []
    for kind in (access.OFDMA, access.CDMA):
        ks = spec.ofdma_k if kind == access.OFDMA else spec.cdma_k
        for k in ks:
            series = acc.get((kind, k))
            if series is None:
                continue
            values = np.concatenate(series)
            rows.append(
                [
                    k,
                    kind,
                    p,
                    n,
                    float(values.mean()),
                    percentile(values, 0.05),
                    percentile(values, 0.95),
                ]
            )
    return rows


def run_fig7(
    constellation: ConstellationConfig, table: LinkBudgetTable, spec: ExperimentSpec
) -> tuple[list[str], list[list]]:
    """Expected zero-outage inter-plane rates per scheme and resource count."""
    header = ["k", "scheme", "p", "n", "mean_rate_bps", "p5_rate_bps", "p95_rate_bps"]
    tasks = [(constellation, table, spec, p, n) for p, n in spec.variants]
    rows: list[list] = []
    for variant_rows in _map_tasks(_fig7_variant, tasks, spec.workers):
        rows.extend(variant_rows)
    return header, rows


def run_passes(
    constellation: ConstellationConfig, table: LinkBudgetTable, spec: ExperimentSpec
) -> tuple[list[str], list[list]]:
    """Raw pass elevation/distance profiles for each longitude shift."""
    header = ["beta_deg", "t_s", "elevation_deg", "distance_km"]
    rows: list[list] = []
    for beta in spec.betas_deg:
        profile = compute_pass(
            constellation.base_altitude_km,
            beta,
            constellation.min_elevation_deg,
            spec.pass_step_s,
            earth_rotation=True,
        )
        for t, elev, dist in profile.samples:
            rows.append([beta, t, elev, dist])
    return header, rows


def run_topology_dump(
    constellation: ConstellationConfig, table: LinkBudgetTable, spec: ExperimentSpec
) -> tuple[list[str], list[list]]:
    """Matched inter-plane links per snapshot with their rates."""
    header = ["time", "plane_a", "sat_a", "plane_b", "sat_b", "distance_km", "rate_bps"]
    cfg = constellation
    duration = spec.duration_s or orbital_period(cfg.base_altitude_km)
    times = np.arange(0.0, duration, spec.step_s)
    pos, _ = propagate_grid(cfg, times)
    planes_of, indices_of = satellite_indices(cfg)
    params = table.isl()
    rows: list[list] = []
    for ti in range(times.size):
        links = match_snapshot_fast(cfg, pos[ti])
        if not links:
            continue
        dists = np.array([dist for _, _, dist in links])
        rates = rate_bps_for_distances(dists, params)
        for (a, b, dist), rate in zip(links, rates):
            rows.append(
                [
                    float(times[ti]),
                    int(planes_of[a]),
                    int(indices_of[a]),
                    int(planes_of[b]),
                    int(indices_of[b]),
                    dist,
                    float(rate),
                ]
            )
    return header, rows


_RUNNERS = {
    "fig3_delay_doppler": (run_fig3, "fig3.csv"),
    "fig4_rates": (run_fig4, "fig4.csv"),
    "fig5_pass": (run_fig5, "fig5.csv"),
    "fig6_mimo": (run_fig6, "fig6.csv"),
    "fig7_access": (run_fig7, "fig7.csv"),
    "passes": (run_passes, "passes.csv"),
    "topology_dump": (run_topology_dump, "topology.csv"),
}


def format_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".10g")
    return str(value)


def write_csv(path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_cell(v) for v in row) + "\n")


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=10,
        )
    except (OSError, subprocess.TimeoutExpired):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 else "unknown"


def run_experiment(
    name: str,
    constellation: ConstellationConfig,
    table: LinkBudgetTable,
    spec: ExperimentSpec,
    out_dir,
) -> dict:
    """Run one experiment, write its CSV and the run manifest; returns the
    manifest dict."""
    if name not in _RUNNERS:
        raise ConfigError(f"unknown experiment '{name}'")
    runner, filename = _RUNNERS[name]
    header, rows = runner(constellation, table, spec)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, filename)
    write_csv(path, header, rows)
    manifest = {
        "config_hash": config_hash(serialize_config(constellation, table, spec)),
        "seed": spec.seed,
        "git_describe": _git_describe(),
        "files": {filename: len(rows)},
    }
    with open(os.path.join(out_dir, "run.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
