"""Multi-game matching: repeated rounds of one game with a best-vector tracker.

The first game ranks by channel norms; every following round rebuilds both
sides' preference lists from the instantaneous rates induced by the previous
round's association vector and plays the game again.  A central tracker
keeps the utility-maximizing vector seen across rounds and returns it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beamrate import RateContext
from .games import EA_PLU_RA, GAME_RUNNERS, GameInput
from .prefs import build_by_channel_norm, from_values


@dataclass(frozen=True)
class MultiGameConfig:
    n_rounds: int = 10
    inner_game: str = EA_PLU_RA
    early_exit: bool = False

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ValueError("need at least one round")
        if self.inner_game not in GAME_RUNNERS:
            raise ValueError(f"unknown inner game {self.inner_game!r}")


@dataclass
class TrackerState:
    """Best association vector seen so far plus the per-round utility history."""

    best_beta: np.ndarray
    best_utility: float
    history: list = field(default_factory=list)


def tracker_update(state: TrackerState, beta, utility: float) -> TrackerState:
    """Record one round; the best vector is replaced only on strict improvement."""
    state.history.append(float(utility))
    if utility > state.best_utility:
        state.best_utility = float(utility)
        state.best_beta = np.asarray(beta).copy()
    return state


def run_multigame(cfg: MultiGameConfig, ctx: RateContext, quota=None,
                  include=None) -> tuple[np.ndarray, TrackerState]:
    """Play cfg.n_rounds games, rebuilding rate lists from each round's vector.

    Returns the utility-maximizing association vector and the tracker state
    (history holds one utility per round; ties keep the earlier round).
    """
    if quota is None:
        quota = ctx.topo.quota
    inner = GAME_RUNNERS[cfg.inner_game]

    lists = build_by_channel_norm(ctx.channels, include=include)
    res = inner(GameInput(lists, tuple(quota)))
    beta = res.beta
    u = ctx.sum_rate_utility(beta)
    state = TrackerState(best_beta=beta.copy(), best_utility=float(u), history=[float(u)])

    prev = beta
    for _ in range(1, cfg.n_rounds):
        table = ctx.rate_table(prev)
        lists = from_values(table, include=include)
        res = inner(GameInput(lists, tuple(quota)))
        nxt = res.beta
        tracker_update(state, nxt, ctx.sum_rate_utility(nxt))
        if cfg.early_exit and np.array_equal(nxt, prev):
            break
        prev = nxt
    return state.best_beta, state
