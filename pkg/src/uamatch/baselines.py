"""Comparison association schemes: max-SINR, random, and a centralized
greedy-swap hill climb standing in for worst-connection-swapping.
"""

from __future__ import annotations

import numpy as np

from .beamrate import RateContext, empty_beta
from .netmodel import UNASSOCIATED


def max_sinr_association(sinr_table: np.ndarray, quota) -> np.ndarray:
    """Each UE targets its highest-SINR BS; overloading UEs are dropped.

    At an over-subscribed BS the q_j strongest applicants stay and the rest
    become unassociated (no diversion to a second choice).  Ties keep the
    lower index on both sides.
    """
    sinr = np.asarray(sinr_table, dtype=float)
    k_n, j_n = sinr.shape
    beta = np.full(k_n, UNASSOCIATED, dtype=int)
    targets = np.argmax(sinr, axis=1)  # first max wins ties
    for j in range(j_n):
        applicants = [k for k in range(k_n) if targets[k] == j]
        applicants.sort(key=lambda k: (-sinr[k, j], k))
        for k in applicants[: quota[j]]:
            beta[k] = j
    return beta


def random_association(rng: np.random.Generator, n_bs: int, n_ue: int,
                       quota) -> np.ndarray:
    """Uniform BS draw per UE; quota overflow dropped (lowest indexes kept)."""
    draws = rng.integers(0, n_bs, size=n_ue)
    beta = np.full(n_ue, UNASSOCIATED, dtype=int)
    for j in range(n_bs):
        applicants = [k for k in range(n_ue) if draws[k] == j]
        for k in applicants[: quota[j]]:
            beta[k] = j
    return beta


def centralized_swap(ctx: RateContext, max_sweeps: int | None = None,
                     beta0: np.ndarray | None = None) -> np.ndarray:
    """Greedy worst-first swap hill climb on the sum-rate utility.

    Starting from the max-SINR association, repeatedly take the UE with the
    lowest current rate (unassociated UEs count as rate 0), try moving it to
    every other BS - displacing that BS's weakest member into the mover's
    old slot when at quota - and commit the best strictly improving
    reassignment.  Stops when no move of any UE improves the utility.
    """
    topo = ctx.topo
    k_n, j_n = topo.n_ue, topo.n_bs
    if beta0 is None:
        beta = max_sinr_association(ctx.sinr_table(empty_beta(k_n)), topo.quota)
    else:
        beta = np.asarray(beta0).copy()
    if max_sweeps is None:
        max_sweeps = 10 * max(k_n, 1)

    utility = ctx.sum_rate_utility(beta)
    for _ in range(max_sweeps):
        rates = ctx.per_ue_rates(beta)
        order = sorted(range(k_n), key=lambda k: (rates[k], k))
        best_gain = 0.0
        best_beta = None
        committed = False
        for k in order:
            for j in range(j_n):
                if j == beta[k]:
                    continue
                cand = beta.copy()
                cell = [m for m in range(k_n) if beta[m] == j]
                if len(cell) >= topo.quota[j]:
                    weakest = min(cell, key=lambda m: (rates[m], m))
                    cand[weakest] = beta[k]  # into the mover's old slot
                cand[k] = j
                u = ctx.sum_rate_utility(cand)
                if u > utility and u - utility > best_gain:
                    best_gain = u - utility
                    best_beta = cand
            if best_beta is not None:
                beta = best_beta
                utility += best_gain
                committed = True
                break  # re-rank and start the next sweep from the new worst
        if not committed:
            break
    return beta


def brute_force_optimal(ctx: RateContext) -> tuple[np.ndarray, float]:
    """Enumerate every feasible association vector; only for tiny scenarios."""
    topo = ctx.topo
    k_n, j_n = topo.n_ue, topo.n_bs
    best_beta = empty_beta(k_n)
    best_u = ctx.sum_rate_utility(best_beta)

    def rec(k, beta, loads):
        nonlocal best_beta, best_u
        if k == k_n:
            u = ctx.sum_rate_utility(beta)
            if u > best_u:
                best_u = u
                best_beta = beta.copy()
            return
        beta[k] = UNASSOCIATED
        rec(k + 1, beta, loads)
        for j in range(j_n):
            if loads[j] < topo.quota[j]:
                beta[k] = j
                loads[j] += 1
                rec(k + 1, beta, loads)
                loads[j] -= 1
                beta[k] = UNASSOCIATED

    rec(0, empty_beta(k_n), [0] * j_n)
    return best_beta, best_u
