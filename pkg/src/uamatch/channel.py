"""Per-pair channel generation.

Sub-6 GHz links are i.i.d. circularly-symmetric Gaussian vectors; mmWave
links use a clustered model (C clusters, L rays each) with uniform planar
array responses at both ends.  Large-scale gain is a log-distance path-loss
model with a distance-driven LoS draw; it is stored separately from the
small-scale matrix and folded in downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .netmodel import Topology

SUB6 = "sub6"
MMWAVE = "mmwave"


def default_cluster_gains(n_clusters: int) -> np.ndarray:
    """Exponentially decaying cluster powers, normalized so they sum to C."""
    g = np.exp(-0.5 * np.arange(n_clusters))
    return g * (n_clusters / g.sum())


@dataclass(frozen=True)
class ClusterParams:
    """Clustered mmWave channel configuration.

    ``cluster_gains`` defaults to an exponentially decaying profile summing
    to C, which keeps the expected squared Frobenius norm of the channel at
    N*M.  ``ray_phases`` attaches an i.i.d. uniform phase to every ray
    (disable it to get the deterministic single-ray outer product).
    """

    n_clusters: int = 5
    n_rays: int = 10
    cluster_gains: tuple[float, ...] | None = None
    ray_spread_deg: float = 5.0
    ray_phases: bool = True

    def __post_init__(self):
        if self.n_clusters < 1 or self.n_rays < 1:
            raise ValueError("need at least one cluster and one ray")
        if self.cluster_gains is not None:
            if len(self.cluster_gains) != self.n_clusters:
                raise ValueError("cluster_gains length must equal n_clusters")
            if any(g <= 0 for g in self.cluster_gains):
                raise ValueError("cluster gains must be positive")

    def gains(self) -> np.ndarray:
        if self.cluster_gains is not None:
            return np.asarray(self.cluster_gains, dtype=float)
        return default_cluster_gains(self.n_clusters)


def upa_response(azimuth: float, elevation: float, rows: int, cols: int) -> np.ndarray:
    """Response vector of a uniform planar array at half-wavelength spacing.

    Element (m, n) has phase pi*(m*sin(el)*cos(az) + n*sin(el)*sin(az));
    the flat vector is row-major over (m, n).  All entries are unit modulus.
    """
    if rows < 1 or cols < 1:
        raise ValueError("array dimensions must be positive")
    m = np.arange(rows)[:, None]
    n = np.arange(cols)[None, :]
    se = math.sin(elevation)
    phase = math.pi * (m * se * math.cos(azimuth) + n * se * math.sin(azimuth))
    return np.exp(1j * phase).reshape(rows * cols)


def _draw_ray_angles(rng: np.random.Generator, params: ClusterParams):
    """Cluster-center angles with per-ray Laplacian offsets, per array side.

    Returns (az, el) arrays of shape (C, L) for one side of the link.
    """
    c, l = params.n_clusters, params.n_rays
    spread = math.radians(params.ray_spread_deg)
    az_c = rng.uniform(-math.pi, math.pi, size=(c, 1))
    el_c = rng.uniform(-math.pi / 2, math.pi / 2, size=(c, 1))
    az = az_c + rng.laplace(0.0, spread, size=(c, l))
    el = el_c + rng.laplace(0.0, spread, size=(c, l))
    return az, el


def gen_mmwave_channel(
    rng: np.random.Generator,
    params: ClusterParams,
    ue_shape: tuple[int, int],
    bs_shape: tuple[int, int],
) -> np.ndarray:
    """Draw one clustered mmWave channel matrix of shape (N_k, M_j).

    H = 1/sqrt(CL) * sum_c sum_l sqrt(gamma_c) a_ue(az,el) a_bs(az,el)^H,
    with independent arrival/departure angles per ray and (by default) an
    i.i.d. uniform phase per ray.
    """
    c, l = params.n_clusters, params.n_rays
    gains = params.gains()
    n_k = ue_shape[0] * ue_shape[1]
    m_j = bs_shape[0] * bs_shape[1]

    az_ue, el_ue = _draw_ray_angles(rng, params)
    az_bs, el_bs = _draw_ray_angles(rng, params)
    if params.ray_phases:
        phases = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, size=(c, l)))
    else:
        phases = np.ones((c, l), dtype=complex)

    h = np.zeros((n_k, m_j), dtype=complex)
    for ci in range(c):
        amp = math.sqrt(gains[ci])
        for li in range(l):
            a_ue = upa_response(az_ue[ci, li], el_ue[ci, li], *ue_shape)
            a_bs = upa_response(az_bs[ci, li], el_bs[ci, li], *bs_shape)
            h += amp * phases[ci, li] * np.outer(a_ue, a_bs.conj())
    return h / math.sqrt(c * l)


def gen_sub6_channel(rng: np.random.Generator, n_antennas: int) -> np.ndarray:
    """I.i.d. CN(0,1) row channel between a macro cell and a UE, shape (M,)."""
    if n_antennas < 1:
        raise ValueError("need at least one antenna")
    re = rng.standard_normal(n_antennas)
    im = rng.standard_normal(n_antennas)
    return (re + 1j * im) / math.sqrt(2.0)


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance path loss: PL_dB = ref + 20*log10(f_GHz) + 10*n*log10(d_m).

    Exponents are per tier and LoS state; LoS probability decays as
    exp(-d/los_decay_m) for mmWave and is 1 for sub-6.
    """

    ref_db: float = 32.4
    mmwave_los_exp: float = 2.0
    mmwave_nlos_exp: float = 3.2
    sub6_los_exp: float = 2.0
    sub6_nlos_exp: float = 3.5
    los_decay_m: float = 150.0


def los_probability(distance: float, tier: str, params: PathLossParams) -> float:
    if tier == SUB6:
        return 1.0
    return math.exp(-distance / params.los_decay_m)


def path_loss_db(distance: float, carrier_hz: float, los: bool, tier: str,
                 params: PathLossParams) -> float:
    if distance <= 0:
        raise ValueError("distance must be positive")
    if tier == MMWAVE:
        exp = params.mmwave_los_exp if los else params.mmwave_nlos_exp
    elif tier == SUB6:
        exp = params.sub6_los_exp if los else params.sub6_nlos_exp
    else:
        raise ValueError(f"unknown tier {tier!r}")
    f_ghz = carrier_hz / 1e9
    return params.ref_db + 20.0 * math.log10(f_ghz) + 10.0 * exp * math.log10(distance)


def large_scale_gain(rng: np.random.Generator, distance: float, carrier_hz: float,
                     tier: str, params: PathLossParams) -> tuple[float, bool]:
    """Draw the LoS state and return (linear power gain, los)."""
    los = bool(rng.random() < los_probability(distance, tier, params))
    pl = path_loss_db(distance, carrier_hz, los, tier, params)
    return 10.0 ** (-pl / 10.0), los


THERMAL_NOISE_DBM_HZ = -174.0


@dataclass(frozen=True)
class ChannelParams:
    """Everything needed to realize channels and noise for one scenario."""

    cluster: ClusterParams = field(default_factory=ClusterParams)
    pathloss: PathLossParams = field(default_factory=PathLossParams)
    noise_figure_db: float = 10.0
    sub6_bandwidth_hz: float = 20e6
    mmwave_bandwidth_hz: float = 100e6

    def noise_power_w(self, tier: str) -> float:
        bw = self.sub6_bandwidth_hz if tier == SUB6 else self.mmwave_bandwidth_hz
        dbm = THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bw) + self.noise_figure_db
        return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class ChannelRealization:
    """Small-scale matrix plus separately-kept large-scale gain and LoS flag.

    ``matrix`` is (N_k, M_j) for mmWave pairs and (M_j,) for sub-6 pairs.
    """

    matrix: np.ndarray
    large_scale_gain: float
    los: bool

    def __post_init__(self):
        if self.large_scale_gain <= 0:
            raise ValueError("large-scale gain must be positive")

    def weighted(self) -> np.ndarray:
        """The matrix with sqrt(gain) folded in."""
        return math.sqrt(self.large_scale_gain) * self.matrix


class ChannelSet:
    """All (UE, BS) channel realizations for one scenario draw."""

    def __init__(self, topo: Topology, sub6, mmwave):
        self.topo = topo
        self._sub6 = sub6          # [k][b] -> ChannelRealization
        self._mmwave = mmwave      # [k][s] -> ChannelRealization

    def get(self, k: int, j: int) -> ChannelRealization:
        if self.topo.is_mmwave(j):
            return self._mmwave[k][self.topo.scbs_index(j)]
        return self._sub6[k][j]


def generate_channels(rng: np.random.Generator, topo: Topology,
                      params: ChannelParams) -> ChannelSet:
    sub6 = []
    mmwave = []
    for k, ue in enumerate(topo.ue_list):
        row_s, row_m = [], []
        for j in range(topo.n_bs):
            bs = topo.bs(j)
            d = max(topo.distance(k, j), 1.0)
            tier = MMWAVE if topo.is_mmwave(j) else SUB6
            gain, los = large_scale_gain(rng, d, bs.carrier_hz, tier, params.pathloss)
            if tier == SUB6:
                mat = gen_sub6_channel(rng, bs.n_antennas)
                row_s.append(ChannelRealization(mat, gain, los))
            else:
                mat = gen_mmwave_channel(
                    rng, params.cluster, ue.mmwave_upa_shape, bs.upa_shape
                )
                row_m.append(ChannelRealization(mat, gain, los))
        sub6.append(row_s)
        mmwave.append(row_m)
    return ChannelSet(topo, sub6, mmwave)
