"""Preference-list construction for both sides of the matching game.

Three builders mirror the usual information regimes: instantaneous rates
(needs an association vector to fix everyone else), channel Frobenius norms
(association independent), and quantized CQI reports.  All three produce the
same value for the UE side and the BS side of a pair.

Ties always break toward the lower index, and pairs can be left off both
lists (out-of-range BSs), which makes some UE lists shorter than J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beamrate import RateContext
from .channel import ChannelSet


@dataclass(frozen=True)
class PreferenceLists:
    """Ordered preferences plus the raw values they were built from.

    Values are (K, J) arrays; NaN marks a pair that is on neither list.
    Lists are descending in value with ties broken by ascending index.
    """

    ue_values: np.ndarray
    bs_values: np.ndarray
    ue_lists: tuple[tuple[int, ...], ...]
    bs_lists: tuple[tuple[int, ...], ...]

    @property
    def n_ue(self) -> int:
        return self.ue_values.shape[0]

    @property
    def n_bs(self) -> int:
        return self.ue_values.shape[1]

    def ue_rank(self, k: int) -> dict[int, int]:
        return {j: r for r, j in enumerate(self.ue_lists[k])}

    def bs_rank(self, j: int) -> dict[int, int]:
        return {k: r for r, k in enumerate(self.bs_lists[j])}


def _ordered(values: np.ndarray) -> tuple[int, ...]:
    """Indices of the finite entries, by descending value then ascending index."""
    idx = [i for i in range(len(values)) if not np.isnan(values[i])]
    return tuple(sorted(idx, key=lambda i: (-values[i], i)))


def from_values(ue_values: np.ndarray, bs_values: np.ndarray | None = None,
                include: np.ndarray | None = None) -> PreferenceLists:
    """Build both sides' lists from raw value matrices.

    ``include`` is an optional (K, J) bool mask; excluded pairs drop off both
    lists.  When ``bs_values`` is omitted the UE values are shared.
    """
    ue_values = np.asarray(ue_values, dtype=float).copy()
    bs_values = ue_values.copy() if bs_values is None else np.asarray(bs_values, dtype=float).copy()
    if ue_values.shape != bs_values.shape:
        raise ValueError("value matrices must share a shape")
    if include is not None:
        include = np.asarray(include, dtype=bool)
        ue_values[~include] = np.nan
        bs_values[~include] = np.nan
    ue_lists = tuple(_ordered(ue_values[k]) for k in range(ue_values.shape[0]))
    bs_lists = tuple(_ordered(bs_values[:, j]) for j in range(ue_values.shape[1]))
    return PreferenceLists(ue_values, bs_values, ue_lists, bs_lists)


def build_by_rate(beta0, ctx: RateContext,
                  include: np.ndarray | None = None) -> PreferenceLists:
    """Rank by instantaneous rates computed with everyone else fixed at beta0."""
    table = ctx.rate_table(beta0)
    return from_values(table, include=include)


def build_by_channel_norm(channels: ChannelSet,
                          include: np.ndarray | None = None) -> PreferenceLists:
    """Rank by Frobenius norm of the large-scale-weighted channel matrix."""
    topo = channels.topo
    vals = np.zeros((topo.n_ue, topo.n_bs))
    for k in range(topo.n_ue):
        for j in range(topo.n_bs):
            vals[k, j] = np.linalg.norm(channels.get(k, j).weighted())
    return from_values(vals, include=include)


def sinr_to_cqi(sinr_db: float, min_db: float = -6.0, step_db: float = 2.0,
                levels: int = 15) -> int:
    """Uniform SINR quantizer onto integer CQI levels, clamped to 1..levels."""
    raw = 1 + math.floor((sinr_db - min_db) / step_db)
    return min(max(raw, 1), levels)


def build_by_cqi(sinr_table: np.ndarray, min_db: float = -6.0, step_db: float = 2.0,
                 levels: int = 15, include: np.ndarray | None = None) -> PreferenceLists:
    """Rank by CQI values quantized from a linear-SINR table."""
    sinr = np.asarray(sinr_table, dtype=float)
    vals = np.zeros_like(sinr)
    for k in range(sinr.shape[0]):
        for j in range(sinr.shape[1]):
            db = 10.0 * math.log10(sinr[k, j]) if sinr[k, j] > 0 else -math.inf
            vals[k, j] = sinr_to_cqi(db, min_db, step_db, levels)
    return from_values(vals, include=include)


def sinr_include_mask(sinr_table: np.ndarray, floor_db: float | None) -> np.ndarray | None:
    """Mask of in-range pairs: SINR at or above the floor.  None disables it."""
    if floor_db is None:
        return None
    sinr = np.asarray(sinr_table, dtype=float)
    floor_lin = 10.0 ** (floor_db / 10.0)
    return sinr >= floor_lin
