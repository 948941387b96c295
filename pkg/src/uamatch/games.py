"""Distributed matching games for user association.

All four games run as synchronous rounds: every UE still seeking service
applies in the same sub-slot, BSs answer, and the next round starts.  The
deferred-acceptance game holds per-BS waiting lists and finalizes nothing
until it terminates; the early-acceptance games let a BS accept or reject
each applicant on the spot.  EA variants differ in preference-list updating
(PLU: associated UEs leave BS lists, full BSs broadcast and leave UE lists)
and reapplication (RA: rejected UEs cycle through their updated list).

Every game records a full message trace: perUE application counts, the
iteration each UE got its association, and the total iteration count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .netmodel import UNASSOCIATED
from .prefs import PreferenceLists

APPLICATION = "application"
ACCEPT = "accept"
REJECT = "reject"
WAITLIST = "waitlist"
QUOTA_EXHAUSTED = "quota_exhausted"

BROADCAST = -1  # ue field of a quota-exhausted broadcast

DA = "da"
EA_BASE = "ea_base"
EA_PLU = "ea_plu"
EA_PLU_RA = "ea_plu_ra"


class Event(NamedTuple):
    iteration: int
    kind: str
    ue: int
    bs: int


@dataclass
class GameTrace:
    events: list
    n_appl: np.ndarray
    assoc_iter: np.ndarray  # -1 for UEs that never associate
    n_iter: int

    def iteration_events(self, n: int) -> list:
        return [e for e in self.events if e.iteration == n]

    def event_log_lines(self):
        return [f"{e.iteration}\t{e.kind}\t{e.ue}\t{e.bs}" for e in self.events]


@dataclass
class GameResult:
    beta: np.ndarray
    unassociated: tuple[int, ...]
    trace: GameTrace


@dataclass(frozen=True)
class GameInput:
    """Preference lists plus quotas; the whole input of one game."""

    prefs: PreferenceLists
    quota: tuple[int, ...]

    def __post_init__(self):
        if len(self.quota) != self.prefs.n_bs:
            raise ValueError("quota length must match the number of BSs")
        if any(q < 1 for q in self.quota):
            raise ValueError("quotas must be positive")

    @property
    def n_ue(self) -> int:
        return self.prefs.n_ue

    @property
    def n_bs(self) -> int:
        return self.prefs.n_bs


def write_event_log(trace: GameTrace, path) -> None:
    """Line-oriented dump: iteration, message type, ue, bs (tab separated)."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in trace.event_log_lines():
            fh.write(line + "\n")


def _finish(beta, n_appl, assoc_iter, events, n_iter):
    beta = np.asarray(beta)
    unassoc = tuple(int(k) for k in np.flatnonzero(beta == UNASSOCIATED))
    trace = GameTrace(events, np.asarray(n_appl), np.asarray(assoc_iter), n_iter)
    return GameResult(beta, unassoc, trace)


def run_da(inp: GameInput) -> GameResult:
    """Deferred acceptance with per-BS waiting lists.

    Each round, every rejected UE applies to the next BS on its list; a BS
    pools new applicants with its waiting list, keeps its q_j most preferred
    and rejects the rest (which may push out earlier entries).  Associations
    are only fixed by the final waiting lists, so every associated UE's
    association iteration is the last one.
    """
    k_n, j_n = inp.n_ue, inp.n_bs
    ue_lists = inp.prefs.ue_lists
    bs_rank = [inp.prefs.bs_rank(j) for j in range(j_n)]

    beta = np.full(k_n, UNASSOCIATED, dtype=int)
    n_appl = np.zeros(k_n, dtype=int)
    assoc_iter = np.full(k_n, -1, dtype=int)
    events: list[Event] = []

    pointer = [0] * k_n
    rejected = {k for k in range(k_n) if ue_lists[k]}
    waitlist: list[list[int]] = [[] for _ in range(j_n)]
    n = 0

    while rejected:
        n += 1
        apps: dict[int, list[int]] = {}
        for k in sorted(rejected):
            j = ue_lists[k][pointer[k]]
            pointer[k] += 1
            n_appl[k] += 1
            events.append(Event(n, APPLICATION, k, j))
            apps.setdefault(j, []).append(k)

        rejected = set()
        for j in sorted(apps):
            newcomers = apps[j]
            pool = waitlist[j] + newcomers
            ranked = sorted(
                (k for k in pool if k in bs_rank[j]), key=lambda k: bs_rank[j][k]
            )
            keep = ranked[:inp.quota[j]]
            losers = [k for k in pool if k not in keep]
            waitlist[j] = keep
            for k in newcomers:
                if k in keep:
                    events.append(Event(n, WAITLIST, k, j))
            for k in losers:
                events.append(Event(n, REJECT, k, j))
                if pointer[k] < len(ue_lists[k]):
                    rejected.add(k)

    for j in range(j_n):
        for k in waitlist[j]:
            beta[k] = j
            assoc_iter[k] = n
            events.append(Event(n, ACCEPT, k, j))
    return _finish(beta, n_appl, assoc_iter, events, n)


def run_ea_base(inp: GameInput) -> GameResult:
    """Early acceptance without list updates or reapplication.

    An applicant is accepted iff it sits in the top q_j of the BS's original
    list and the BS has quota left; same-round applicants are served in the
    BS's preference order.  Rejected UEs simply move down their list, so the
    game ends within J rounds.
    """
    k_n, j_n = inp.n_ue, inp.n_bs
    ue_lists = inp.prefs.ue_lists
    bs_rank = [inp.prefs.bs_rank(j) for j in range(j_n)]
    top = [frozenset(inp.prefs.bs_lists[j][: inp.quota[j]]) for j in range(j_n)]
    quota_left = list(inp.quota)

    beta = np.full(k_n, UNASSOCIATED, dtype=int)
    n_appl = np.zeros(k_n, dtype=int)
    assoc_iter = np.full(k_n, -1, dtype=int)
    events: list[Event] = []

    pointer = [0] * k_n
    seeking = {k for k in range(k_n) if ue_lists[k]}
    n = 0

    while seeking:
        n += 1
        apps: dict[int, list[int]] = {}
        for k in sorted(seeking):
            j = ue_lists[k][pointer[k]]
            pointer[k] += 1
            n_appl[k] += 1
            events.append(Event(n, APPLICATION, k, j))
            apps.setdefault(j, []).append(k)

        seeking = set()
        for j in sorted(apps):
            order = sorted(apps[j], key=lambda k: (bs_rank[j].get(k, math.inf), k))
            for k in order:
                if k in top[j] and quota_left[j] > 0:
                    quota_left[j] -= 1
                    beta[k] = j
                    assoc_iter[k] = n
                    events.append(Event(n, ACCEPT, k, j))
                else:
                    events.append(Event(n, REJECT, k, j))
                    if pointer[k] < len(ue_lists[k]):
                        seeking.add(k)
    return _finish(beta, n_appl, assoc_iter, events, n)


class _LiveLists:
    """Mutable preference state shared by the PLU games."""

    def __init__(self, inp: GameInput):
        self.bs_live = [list(lst) for lst in inp.prefs.bs_lists]
        self.bs_pos = [
            {k: r for r, k in enumerate(lst)} for lst in self.bs_live
        ]
        self.quota_left = list(inp.quota)

    def bs_accepts(self, j: int, k: int) -> bool:
        """k is within the top quota_left entries of j's current list."""
        if self.quota_left[j] <= 0:
            return False
        pos = self.bs_pos[j].get(k)
        return pos is not None and pos < self.quota_left[j]

    def take(self, j: int, k: int) -> bool:
        """Consume one slot of j for k; True if j just ran out of quota."""
        self.quota_left[j] -= 1
        self._remove_from_bs(j, k)
        return self.quota_left[j] == 0

    def remove_ue_everywhere(self, k: int):
        for j in range(len(self.bs_live)):
            self._remove_from_bs(j, k)

    def _remove_from_bs(self, j: int, k: int):
        pos = self.bs_pos[j].pop(k, None)
        if pos is None:
            return
        del self.bs_live[j][pos]
        for kk in self.bs_pos[j]:
            if self.bs_pos[j][kk] > pos:
                self.bs_pos[j][kk] -= 1


def run_ea_plu(inp: GameInput) -> GameResult:
    """Early acceptance with preference-list updating, no reapplication.

    Acceptance tests run against the updated BS list and current quota.
    Associated UEs leave every BS list; a BS that runs out of quota
    broadcasts and is skipped (at no application cost) by every UE.
    """
    k_n, j_n = inp.n_ue, inp.n_bs
    ue_lists = inp.prefs.ue_lists
    bs_rank = [inp.prefs.bs_rank(j) for j in range(j_n)]
    live = _LiveLists(inp)
    dead: set[int] = set()

    beta = np.full(k_n, UNASSOCIATED, dtype=int)
    n_appl = np.zeros(k_n, dtype=int)
    assoc_iter = np.full(k_n, -1, dtype=int)
    events: list[Event] = []

    pointer = [0] * k_n
    seeking = {k for k in range(k_n) if ue_lists[k]}
    n = 0

    while seeking:
        # choose targets, skipping quota-exhausted BSs at no cost
        targets: dict[int, int] = {}
        exhausted = []
        for k in sorted(seeking):
            while pointer[k] < len(ue_lists[k]) and ue_lists[k][pointer[k]] in dead:
                pointer[k] += 1
            if pointer[k] >= len(ue_lists[k]):
                exhausted.append(k)
            else:
                targets[k] = ue_lists[k][pointer[k]]
                pointer[k] += 1
        seeking.difference_update(exhausted)
        if not targets:
            break

        n += 1
        apps: dict[int, list[int]] = {}
        for k, j in targets.items():
            n_appl[k] += 1
            events.append(Event(n, APPLICATION, k, j))
            apps.setdefault(j, []).append(k)

        accepted = []
        newly_dead = []
        for j in sorted(apps):
            order = sorted(apps[j], key=lambda k: (bs_rank[j].get(k, math.inf), k))
            for k in order:
                if live.bs_accepts(j, k):
                    beta[k] = j
                    assoc_iter[k] = n
                    events.append(Event(n, ACCEPT, k, j))
                    accepted.append(k)
                    if live.take(j, k):
                        newly_dead.append(j)
                else:
                    events.append(Event(n, REJECT, k, j))

        for k in accepted:
            live.remove_ue_everywhere(k)
        for j in newly_dead:
            dead.add(j)
            events.append(Event(n, QUOTA_EXHAUSTED, BROADCAST, j))

        # rejected UEs with entries left stay in; dead-only tails fall out
        # at the next round's skip pass
        seeking = {
            k for k in targets
            if beta[k] == UNASSOCIATED and pointer[k] < len(ue_lists[k])
        }
    return _finish(beta, n_appl, assoc_iter, events, n)


def run_ea_plu_ra(inp: GameInput) -> GameResult:
    """Early acceptance with list updating and cyclic reapplication.

    Rejected UEs keep cycling through their updated preference list until
    accepted or the list empties (every listed BS ran out of quota).
    """
    k_n, j_n = inp.n_ue, inp.n_bs
    bs_rank = [inp.prefs.bs_rank(j) for j in range(j_n)]
    live = _LiveLists(inp)
    ue_live = [list(lst) for lst in inp.prefs.ue_lists]
    cursor = [0] * k_n

    beta = np.full(k_n, UNASSOCIATED, dtype=int)
    n_appl = np.zeros(k_n, dtype=int)
    assoc_iter = np.full(k_n, -1, dtype=int)
    events: list[Event] = []

    seeking = {k for k in range(k_n) if ue_live[k]}
    n = 0
    max_rounds = 2 * j_n * k_n + j_n + k_n + 16

    while seeking:
        targets: dict[int, int] = {}
        emptied = [k for k in seeking if not ue_live[k]]
        for k in emptied:
            seeking.discard(k)
        for k in sorted(seeking):
            cursor[k] %= len(ue_live[k])
            targets[k] = ue_live[k][cursor[k]]
        if not targets:
            break

        n += 1
        if n > max_rounds:
            raise RuntimeError("reapplication game failed to terminate")
        apps: dict[int, list[int]] = {}
        for k, j in targets.items():
            n_appl[k] += 1
            events.append(Event(n, APPLICATION, k, j))
            apps.setdefault(j, []).append(k)

        accepted = []
        rejected = []
        newly_dead = []
        for j in sorted(apps):
            order = sorted(apps[j], key=lambda k: (bs_rank[j].get(k, math.inf), k))
            for k in order:
                if live.bs_accepts(j, k):
                    beta[k] = j
                    assoc_iter[k] = n
                    events.append(Event(n, ACCEPT, k, j))
                    accepted.append(k)
                    if live.take(j, k):
                        newly_dead.append(j)
                else:
                    events.append(Event(n, REJECT, k, j))
                    rejected.append(k)

        for k in accepted:
            live.remove_ue_everywhere(k)
            seeking.discard(k)

        # prune dead BSs from UE lists, keeping cursors on the same element
        for j in newly_dead:
            events.append(Event(n, QUOTA_EXHAUSTED, BROADCAST, j))
            for k in range(k_n):
                if beta[k] != UNASSOCIATED:
                    continue
                try:
                    pos = ue_live[k].index(j)
                except ValueError:
                    continue
                del ue_live[k][pos]
                if pos < cursor[k]:
                    cursor[k] -= 1

        # rejected UEs advance past the BS they just tried (cyclically)
        for k in rejected:
            if not ue_live[k]:
                continue
            t = targets[k]
            if t in ue_live[k]:
                cursor[k] = (ue_live[k].index(t) + 1) % len(ue_live[k])
            else:
                cursor[k] %= len(ue_live[k])
    return _finish(beta, n_appl, assoc_iter, events, n)


GAME_RUNNERS = {
    DA: run_da,
    EA_BASE: run_ea_base,
    EA_PLU: run_ea_plu,
    EA_PLU_RA: run_ea_plu_ra,
}


def is_stable(beta, prefs: PreferenceLists, quota) -> tuple[bool, tuple[int, int] | None]:
    """Check for blocking pairs; returns (stable, witness-or-None).

    A pair (k, j) blocks when both list each other, k strictly prefers j to
    its current situation, and j either has spare quota or strictly prefers
    k to one of its current members.
    """
    beta = np.asarray(beta)
    k_n = prefs.n_ue
    members: dict[int, list[int]] = {}
    for k, b in enumerate(beta):
        if b != UNASSOCIATED:
            members.setdefault(int(b), []).append(k)
    bs_rank = [prefs.bs_rank(j) for j in range(prefs.n_bs)]

    for k in range(k_n):
        rank = prefs.ue_rank(k)
        cur = rank.get(int(beta[k]), math.inf)
        for j in prefs.ue_lists[k]:
            if rank[j] >= cur:
                break
            if k not in bs_rank[j]:
                continue
            cell = members.get(j, [])
            if len(cell) < quota[j]:
                return False, (k, j)
            if any(bs_rank[j][k] < bs_rank[j].get(m, math.inf) for m in cell):
                return False, (k, j)
    return True, None
