"""Two-tier HetNet scenario model: topology, association vectors, load regimes.

Base stations are indexed 0..J-1 with the B macro cells (sub-6 GHz) first and
the S small cells (mmWave) after them.  UEs are indexed 0..K-1.  A UE that is
not served by any BS carries the explicit sentinel ``UNASSOCIATED``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

UNASSOCIATED = -1


class LoadScenario(enum.Enum):
    UNDERLOAD = "underload"
    CRITICAL_LOAD = "critical_load"
    OVERLOAD = "overload"


@dataclass(frozen=True)
class BaseStation:
    """One BS: position in meters, antenna count, transmit power, carrier.

    ``upa_shape`` gives the (rows, cols) of the uniform planar array for
    mmWave cells; sub-6 cells use a plain antenna count and leave it None.
    """

    position: tuple[float, float]
    n_antennas: int
    tx_power_w: float
    carrier_hz: float
    upa_shape: tuple[int, int] | None = None

    def __post_init__(self):
        if self.n_antennas < 1:
            raise ValueError("BS needs at least one antenna")
        if self.tx_power_w <= 0:
            raise ValueError("transmit power must be positive")
        if self.upa_shape is not None:
            r, c = self.upa_shape
            if r * c != self.n_antennas:
                raise ValueError("upa_shape inconsistent with antenna count")


@dataclass(frozen=True)
class UserEquipment:
    """One UE: position, mmWave array geometry and requested stream count.

    The sub-6 module is always a single antenna.  The stream count is capped
    by the number of mmWave antenna elements.
    """

    position: tuple[float, float]
    mmwave_upa_shape: tuple[int, int] = (2, 2)
    n_streams: int = 1

    @property
    def n_mmwave_antennas(self) -> int:
        r, c = self.mmwave_upa_shape
        return r * c

    def __post_init__(self):
        if not 1 <= self.n_streams <= self.n_mmwave_antennas:
            raise ValueError(
                f"stream count {self.n_streams} outside 1..{self.n_mmwave_antennas}"
            )


@dataclass(frozen=True)
class Topology:
    """Static scenario: BS/UE placement, quotas and the deployment area."""

    mcbs_list: tuple[BaseStation, ...]
    scbs_list: tuple[BaseStation, ...]
    ue_list: tuple[UserEquipment, ...]
    quota: tuple[int, ...]
    area: tuple[float, float]

    def __post_init__(self):
        if len(self.quota) != self.n_bs:
            raise ValueError("quota vector length must equal the number of BSs")
        if any(q < 1 for q in self.quota):
            raise ValueError("every quota must be at least 1")
        w, h = self.area
        for node in (*self.mcbs_list, *self.scbs_list, *self.ue_list):
            x, y = node.position
            if not (0.0 <= x <= w and 0.0 <= y <= h):
                raise ValueError(f"position {node.position} outside area {self.area}")

    @property
    def n_mcbs(self) -> int:
        return len(self.mcbs_list)

    @property
    def n_scbs(self) -> int:
        return len(self.scbs_list)

    @property
    def n_bs(self) -> int:
        return len(self.mcbs_list) + len(self.scbs_list)

    @property
    def n_ue(self) -> int:
        return len(self.ue_list)

    @property
    def total_quota(self) -> int:
        return sum(self.quota)

    def is_mmwave(self, j: int) -> bool:
        if not 0 <= j < self.n_bs:
            raise IndexError(f"BS index {j} out of range 0..{self.n_bs - 1}")
        return j >= self.n_mcbs

    def bs(self, j: int) -> BaseStation:
        if not 0 <= j < self.n_bs:
            raise IndexError(f"BS index {j} out of range 0..{self.n_bs - 1}")
        if j < self.n_mcbs:
            return self.mcbs_list[j]
        return self.scbs_list[j - self.n_mcbs]

    def scbs_index(self, j: int) -> int:
        """Map an absolute BS index to its position in scbs_list."""
        if not self.is_mmwave(j):
            raise IndexError(f"BS {j} is not a small cell")
        return j - self.n_mcbs

    @cached_property
    def bs_positions(self) -> np.ndarray:
        return np.array([self.bs(j).position for j in range(self.n_bs)])

    @cached_property
    def ue_positions(self) -> np.ndarray:
        return np.array([ue.position for ue in self.ue_list])

    def distance(self, k: int, j: int) -> float:
        (ux, uy), (bx, by) = self.ue_list[k].position, self.bs(j).position
        return math.hypot(ux - bx, uy - by)


def validate_association(beta, topo: Topology) -> str | None:
    """Check uniqueness and per-BS load constraints for an association vector.

    Returns None when the vector is valid, otherwise a message naming the
    first violated constraint.  Uniqueness is structural here (one entry per
    UE), so the checks are value range and quota.
    """
    beta = np.asarray(beta)
    if beta.shape != (topo.n_ue,):
        raise ValueError(f"beta has shape {beta.shape}, expected ({topo.n_ue},)")
    for k, b in enumerate(beta):
        if b != UNASSOCIATED and not 0 <= b < topo.n_bs:
            return f"UE {k} associated with unknown BS index {b}"
    for j in range(topo.n_bs):
        load = int(np.count_nonzero(beta == j))
        if load > topo.quota[j]:
            return f"BS {j} load {load} exceeds quota {topo.quota[j]}"
    return None


def activation_set(beta, j: int, n_bs: int) -> list[int]:
    """UEs currently served by BS j, ascending.  Empty when nobody is."""
    if not 0 <= j < n_bs:
        raise IndexError(f"BS index {j} out of range 0..{n_bs - 1}")
    beta = np.asarray(beta)
    return [int(k) for k in np.flatnonzero(beta == j)]


def unassociated_set(beta) -> list[int]:
    beta = np.asarray(beta)
    return [int(k) for k in np.flatnonzero(beta == UNASSOCIATED)]


def classify_load(topo: Topology, n_ue: int) -> LoadScenario:
    """Classify K against the total quota: under, critical, or overload."""
    if n_ue < 0:
        raise ValueError("UE count cannot be negative")
    total = topo.total_quota
    if n_ue < total:
        return LoadScenario.UNDERLOAD
    if n_ue == total:
        return LoadScenario.CRITICAL_LOAD
    return LoadScenario.OVERLOAD


@dataclass(frozen=True)
class TopologyParams:
    """Knobs for the default scenario builder (paper-style deployment)."""

    area_m: tuple[float, float] = (500.0, 500.0)
    n_mcbs: int = 1
    n_scbs: int = 4
    mcbs_quota: int = 15
    scbs_quota: int = 5
    n_ue: int = 35
    mcbs_antennas: int = 64
    scbs_upa: tuple[int, int] = (8, 8)
    ue_upa: tuple[int, int] = (2, 2)
    ue_streams: int = 2
    mcbs_power_dbm: float = 40.0
    scbs_power_dbm: float = 30.0
    sub6_carrier_hz: float = 1.8e9
    mmwave_carrier_hz: float = 28e9
    scbs_ring_frac: float = 0.35


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def build_topology(rng: np.random.Generator, params: TopologyParams) -> Topology:
    """One scenario realization: fixed BS grid, K uniform i.i.d. UE positions.

    Macro cells sit at the area center (spread on a small inner ring if there
    is more than one); small cells sit on a ring around the center.  UE
    placement is the fixed-count analogue of a PPP draw over the area.
    """
    w, h = params.area_m
    cx, cy = w / 2.0, h / 2.0
    ring = params.scbs_ring_frac * min(w, h)

    mcbs = []
    for b in range(params.n_mcbs):
        if params.n_mcbs == 1:
            pos = (cx, cy)
        else:
            ang = 2.0 * math.pi * b / params.n_mcbs
            pos = (cx + 0.3 * ring * math.cos(ang), cy + 0.3 * ring * math.sin(ang))
        mcbs.append(
            BaseStation(
                position=pos,
                n_antennas=params.mcbs_antennas,
                tx_power_w=dbm_to_watt(params.mcbs_power_dbm),
                carrier_hz=params.sub6_carrier_hz,
            )
        )

    scbs = []
    r, c = params.scbs_upa
    for s in range(params.n_scbs):
        ang = 2.0 * math.pi * s / max(params.n_scbs, 1)
        pos = (cx + ring * math.cos(ang), cy + ring * math.sin(ang))
        scbs.append(
            BaseStation(
                position=pos,
                n_antennas=r * c,
                tx_power_w=dbm_to_watt(params.scbs_power_dbm),
                carrier_hz=params.mmwave_carrier_hz,
                upa_shape=(r, c),
            )
        )

    ues = tuple(
        UserEquipment(
            position=(float(x), float(y)),
            mmwave_upa_shape=params.ue_upa,
            n_streams=params.ue_streams,
        )
        for x, y in zip(rng.uniform(0.0, w, params.n_ue), rng.uniform(0.0, h, params.n_ue))
    )

    quota = (params.mcbs_quota,) * params.n_mcbs + (params.scbs_quota,) * params.n_scbs
    return Topology(
        mcbs_list=tuple(mcbs),
        scbs_list=tuple(scbs),
        ue_list=ues,
        quota=quota,
        area=params.area_m,
    )
