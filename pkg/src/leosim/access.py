"""Orthogonal resource allocation over matched inter-plane links and
zero-outage effective rates under worst-case interference.

Two schemes share one allocation structure: OFDMA splits the band into K
subcarriers (EIRP shrinks with subcarrier bandwidth because the EIRP density
is fixed), CDMA spreads over the full band with K orthogonal Walsh codes and
suppresses residual co-code interference by the spreading factor.

Each matched pair carries two directed streams, one per direction, and every
stream gets a resource. Interference is worst-case in two senses: antennas are
treated as omnidirectional on the interference path (a transmitter radiates
its amplifier power toward everyone, a victim picks it up at 0 dBi), and each
co-resource transmitter is placed at its minimum visible distance to the
victim over the link's contact window. A node therefore jams its own
receptions whenever a resource carries both a transmission and a reception of
the same satellite; the allocation has to keep them apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard

from .linkbudget import fspl_db, noise_power_dbw
from .scenario import CONSTANTS, LinkBudgetParams, derived_eirp

OFDMA = "ofdma"
CDMA = "cdma"

_MIN_DISTANCE_KM = 1e-6  # numerical floor; keeps co-located couplings finite


@dataclass(frozen=True)
class AccessScheme:
    kind: str
    num_resources: int
    total_bandwidth_hz: float

    def __post_init__(self) -> None:
        if self.kind not in (OFDMA, CDMA):
            raise ValueError(f"kind must be '{OFDMA}' or '{CDMA}'")
        if self.num_resources < 1:
            raise ValueError("num_resources must be >= 1")
        if self.total_bandwidth_hz <= 0:
            raise ValueError("total_bandwidth_hz must be > 0")
        if self.kind == CDMA and self.num_resources & (self.num_resources - 1):
            raise ValueError("CDMA spreading factor must be a power of two")

    @property
    def subcarrier_bandwidth_hz(self) -> float:
        return self.total_bandwidth_hz / self.num_resources

    @property
    def spreading_factor(self) -> int:
        return self.num_resources


def walsh_codes(length: int) -> np.ndarray:
    """Orthogonal Walsh codes of the given power-of-two length, one per row."""
    if length < 1 or length & (length - 1):
        raise ValueError("Walsh code length must be a power of two")
    return hadamard(length)


@dataclass(frozen=True)
class LinkInstance:
    """One directed transmission of a matched inter-plane pair at one snapshot.

    tx/rx are flat satellite indices; key identifies the stream as
    (plane_a, index_a, plane_b, index_b, direction) and fixes the canonical
    allocation order; [window_start, window_end) are the snapshot indices of
    the contact interval this snapshot belongs to; distance_km is the pair
    separation carrying the desired signal (the contact-window maximum for
    zero-outage rates).
    """

    tx: int
    rx: int
    key: tuple
    window_start: int
    window_end: int
    distance_km: float


@dataclass(frozen=True)
class ResourceAllocation:
    scheme: AccessScheme
    assignment: tuple[int, ...]  # resource index per link, aligned with the link list


class InterferenceWindowModel:
    """Worst-case coupling between satellites over contact windows.

    Wraps the position grid of one simulation horizon and caches, per
    (receiver, window), the minimum visible distance to every potential
    transmitter converted to a linear received power at the full-band EIRP
    with omnidirectional interference antennas. The per-resource scaling
    (1/K for both schemes) happens downstream.
    """

    def __init__(
        self,
        positions_km: np.ndarray,
        params: LinkBudgetParams,
        occlusion_radius_km: float | None = None,
    ) -> None:
        self._pos = positions_km
        self._params = params
        self._radius = (
            CONSTANTS.earth_radius_km if occlusion_radius_km is None else occlusion_radius_km
        )
        self._eirp_full_dbw = derived_eirp(params, params.bandwidth_hz)
        rx_gain = params.interference_rx_gain_dbi
        # Omnidirectional worst case: the interferer radiates its amplifier
        # power (EIRP minus its antenna gain) isotropically; the victim
        # receives it at 0 dBi unless configured otherwise.
        self._coupling_gain_db = (0.0 if rx_gain is None else rx_gain) - params.tx_gain_dbi
        self._coupling_cache: dict[tuple[int, int, int], np.ndarray] = {}
        self._span_cache: dict[tuple[int, int, int, int], float] = {}

    @property
    def params(self) -> LinkBudgetParams:
        return self._params

    def min_visible_distances_km(self, rx: int, w0: int, w1: int) -> np.ndarray:
        """Minimum distance from every satellite to ``rx`` over the window,
        counting only instants with a clear line of sight (inf otherwise)."""
        a = self._pos[w0:w1, rx, :]  # (W, 3)
        b = self._pos[w0:w1, :, :]  # (W, S, 3)
        ab = b - a[:, None, :]
        dist2 = np.einsum("wsk,wsk->ws", ab, ab)
        denom = np.where(dist2 == 0.0, 1.0, dist2)
        t = -np.einsum("wk,wsk->ws", a, ab) / denom
        closest = a[:, None, :] + t[..., None] * ab
        blocked = (
            (t > 0.0)
            & (t < 1.0)
            & (np.einsum("wsk,wsk->ws", closest, closest) < self._radius**2)
        )
        dist = np.sqrt(dist2)
        dist = np.where(blocked, np.inf, dist)
        out = dist.min(axis=0)
        return np.maximum(out, _MIN_DISTANCE_KM)

    def coupling_row(self, rx: int, w0: int, w1: int) -> np.ndarray:
        """Linear worst-case received interference power (W) from each
        satellite's transmitter over the given window."""
        key = (rx, w0, w1)
        row = self._coupling_cache.get(key)
        if row is None:
            dmin = self.min_visible_distances_km(rx, w0, w1)
            finite = np.isfinite(dmin)
            power = np.zeros_like(dmin)
            if finite.any():
                loss = fspl_db(dmin[finite], self._params.carrier_frequency_hz)
                power[finite] = 10.0 ** (
                    (self._eirp_full_dbw + self._coupling_gain_db - loss) / 10.0
                )
            row = power
            self._coupling_cache[key] = row
        return row

    def received_signal_w(self, distance_km: float) -> float:
        """Linear desired signal power over the full bandwidth; the desired
        path keeps the full transmit and receive gains."""
        p = (
            self._eirp_full_dbw
            - fspl_db(max(distance_km, _MIN_DISTANCE_KM), self._params.carrier_frequency_hz)
            + self._params.rx_gain_dbi
        )
        return 10.0 ** (p / 10.0)

    def max_distance_km(self, a: int, b: int, w0: int, w1: int) -> float:
        """Largest separation of a matched pair over its contact window; the
        zero-outage rate carries the desired signal at this distance."""
        key = (a, b, w0, w1)
        value = self._span_cache.get(key)
        if value is None:
            delta = self._pos[w0:w1, a, :] - self._pos[w0:w1, b, :]
            value = float(np.linalg.norm(delta, axis=1).max())
            self._span_cache[key] = value
        return value

    def noise_full_w(self) -> float:
        return 10.0 ** (
            noise_power_dbw(self._params.noise_temperature_k, self._params.bandwidth_hz) / 10.0
        )


def _link_rows(links: list[LinkInstance], model: InterferenceWindowModel) -> list[np.ndarray]:
    return [model.coupling_row(l.rx, l.window_start, l.window_end) for l in links]


def _greedy_assign(
    links: list[LinkInstance],
    rows: list[np.ndarray],
    num_resources: int,
) -> tuple[int, ...]:
    """Canonical-order greedy: each stream takes the resource with the least
    worst-case interference so far (maximum worst-case SINR), ties toward the
    lowest index.

    Streams are processed in link-identity order. An exposure-ranked order
    degenerates here: with omnidirectional worst-case coupling every stream's
    exposure is dominated by its own node's co-located transmitters, and the
    identity order builds the alternating resource pattern that keeps a
    node's transmissions away from its receptions.
    """
    order = sorted(range(len(links)), key=lambda i: links[i].key)
    assignment = [-1] * len(links)
    bin_txs: list[list[int]] = [[] for _ in range(num_resources)]
    for i in order:
        row = rows[i]
        best_k, best_interf = 0, math.inf
        for resource in range(num_resources):
            txs = bin_txs[resource]
            interf = float(row[np.array(txs, dtype=np.intp)].sum()) if txs else 0.0
            if interf < best_interf:
                best_k, best_interf = resource, interf
        assignment[i] = best_k
        bin_txs[best_k].append(links[i].tx)
    return tuple(assignment)


def allocate(
    links: list[LinkInstance],
    scheme: AccessScheme,
    model: InterferenceWindowModel,
) -> ResourceAllocation:
    """Greedy resource assignment; deterministic and shared by both schemes
    at equal K (the per-resource scaling affects signal and interference
    alike, so the argmax never differs)."""
    rows = _link_rows(links, model)
    assignment = _greedy_assign(links, rows, scheme.num_resources)
    return ResourceAllocation(scheme=scheme, assignment=assignment)


def _co_interference_w(
    links: list[LinkInstance],
    rows: list[np.ndarray],
    assignment: tuple[int, ...],
    num_resources: int,
) -> np.ndarray:
    """Linear co-resource interference per link at full-band EIRP (before the
    shared 1/K per-resource scaling)."""
    assign = np.asarray(assignment)
    txs = np.array([l.tx for l in links], dtype=np.intp)
    out = np.empty(len(links))
    members = [np.flatnonzero(assign == r) for r in range(num_resources)]
    for i, row in enumerate(rows):
        co = members[assignment[i]]
        co = co[co != i]
        out[i] = float(row[txs[co]].sum()) if co.size else 0.0
    return out


def worst_case_interference(
    i: int,
    links: list[LinkInstance],
    allocation: ResourceAllocation,
    model: InterferenceWindowModel,
) -> float:
    """Worst-case received interference power of link i in dBW.

    OFDMA: co-subcarrier transmitters at their per-subcarrier EIRP. CDMA:
    co-code transmitters at full EIRP suppressed by the spreading factor.
    Both reduce to the full-band sum divided by K. Returns -inf when the link
    has its resource to itself.
    """
    rows = _link_rows(links, model)
    totals = _co_interference_w(links, rows, allocation.assignment, allocation.scheme.num_resources)
    scaled = totals[i] / allocation.scheme.num_resources
    if scaled <= 0.0:
        return -math.inf
    return 10.0 * math.log10(scaled)


def _rates_from_components(
    scheme: AccessScheme,
    signal_w: np.ndarray,
    noise_w: float,
    interference_w: np.ndarray,
) -> np.ndarray:
    k = scheme.num_resources
    if scheme.kind == OFDMA:
        # Signal, noise, and interference all scale by 1/K on a subcarrier.
        sinr = signal_w / (noise_w + interference_w)
    else:
        sinr = signal_w / (noise_w + interference_w / k)
    return scheme.total_bandwidth_hz / k * np.log2(1.0 + sinr)


def effective_rates(
    links: list[LinkInstance],
    allocation: ResourceAllocation,
    model: InterferenceWindowModel,
) -> np.ndarray:
    """Zero-outage rates in bit/s for every link under the allocation."""
    rows = _link_rows(links, model)
    interference = _co_interference_w(
        links, rows, allocation.assignment, allocation.scheme.num_resources
    )
    signal = np.array([model.received_signal_w(l.distance_km) for l in links])
    return _rates_from_components(allocation.scheme, signal, model.noise_full_w(), interference)


def effective_rate(
    i: int,
    links: list[LinkInstance],
    allocation: ResourceAllocation,
    model: InterferenceWindowModel,
) -> float:
    """Zero-outage rate of link i in bit/s under its allocation."""
    return float(effective_rates(links, allocation, model)[i])


def snapshot_scheme_rates(
    links: list[LinkInstance],
    ofdma_k: tuple[int, ...],
    cdma_k: tuple[int, ...],
    bandwidth_hz: float,
    model: InterferenceWindowModel,
) -> dict[tuple[str, int], np.ndarray]:
    """Effective rates of one snapshot for every scheme and K.

    Shares the coupling rows and per-K assignments between the schemes;
    results are identical to calling allocate + effective_rates per scheme,
    just without recomputing the shared pieces.
    """
    rows = _link_rows(links, model)
    signal = np.array([model.received_signal_w(l.distance_km) for l in links])
    noise = model.noise_full_w()
    out: dict[tuple[str, int], np.ndarray] = {}
    for k in sorted(set(ofdma_k) | set(cdma_k)):
        assignment = _greedy_assign(links, rows, k)
        interference = _co_interference_w(links, rows, assignment, k)
        if k in ofdma_k:
            scheme = AccessScheme(kind=OFDMA, num_resources=k, total_bandwidth_hz=bandwidth_hz)
            out[(OFDMA, k)] = _rates_from_components(scheme, signal, noise, interference)
        if k in cdma_k:
            scheme = AccessScheme(kind=CDMA, num_resources=k, total_bandwidth_hz=bandwidth_hz)
            out[(CDMA, k)] = _rates_from_components(scheme, signal, noise, interference)
    return out
