"""Shared test utilities: independent oracles and small-instance generators.

The rate oracle is a literal term-by-term transcription of the per-tier rate
formulas (explicit inverse and determinant, recomputed effective channels),
kept deliberately separate from the library's cached evaluation path.  The
textbook deferred-acceptance oracle proposes one free UE at a time, which is
a different execution order than the library's synchronous rounds; both must
land on the same (unique) UE-optimal stable matching.
"""

from __future__ import annotations

import math

import numpy as np

from uamatch.channel import SUB6, ChannelParams
from uamatch.netmodel import UNASSOCIATED, Topology, TopologyParams, build_topology
from uamatch.channel import generate_channels
from uamatch.beamrate import build_rate_context
from uamatch.prefs import PreferenceLists, from_values


def oracle_rate(k, j, beta, topo, channels, beams, chan_params: ChannelParams):
    """Literal transcription of the instantaneous-rate formulas for member k of cell j."""
    beta = np.asarray(beta)
    assert beta[k] == j, "oracle evaluates true members only"
    k_n = topo.n_ue

    def members(i):
        return [l for l in range(k_n) if beta[l] == i]

    def share(i):
        m = len(members(i))
        return topo.bs(i).tx_power_w / m if m else topo.bs(i).tx_power_w

    if topo.is_mmwave(j):
        n0 = chan_params.noise_power_w("mmwave")
        sj = topo.scbs_index(j)
        w = beams.mm_combiner[k][sj]

        def eff(i, l):
            h = channels.get(k, i).weighted()
            f = beams.mm_precoder[l][topo.scbs_index(i)]
            return w.conj().T @ h @ f

        v = n0 * (w.conj().T @ w)
        for l in members(j):
            if l == k:
                continue
            e = eff(j, l)
            v = v + share(j) * (e @ e.conj().T)
        for i in range(topo.n_mcbs, topo.n_bs):
            if i == j:
                continue
            for l in members(i):
                e = eff(i, l)
                v = v + share(i) * (e @ e.conj().T)
        ekk = eff(j, k)
        nk = ekk.shape[0]
        mat = np.eye(nk) + np.linalg.inv(v) @ (share(j) * (ekk @ ekk.conj().T))
        return float(np.log2(np.linalg.det(mat).real))

    n0 = chan_params.noise_power_w(SUB6)
    h = channels.get(k, j).weighted()
    v = n0
    for l in members(j):
        if l == k:
            continue
        v += share(j) * abs(h @ beams.sub6_precoder[l][j]) ** 2
    for i in range(topo.n_mcbs):
        if i == j:
            continue
        hki = channels.get(k, i).weighted()
        for l in members(i):
            v += share(i) * abs(hki @ beams.sub6_precoder[l][i]) ** 2
    sig = share(j) * abs(h @ beams.sub6_precoder[k][j]) ** 2
    return math.log2(1.0 + sig / v)


def textbook_da(ue_lists, bs_lists, quota, n_ue, n_bs):
    """One-proposal-at-a-time hospital/residents deferred acceptance."""
    bs_rank = [{k: r for r, k in enumerate(bs_lists[j])} for j in range(n_bs)]
    held = [[] for _ in range(n_bs)]
    nxt = [0] * n_ue
    free = list(range(n_ue))
    while free:
        k = free.pop(0)
        if nxt[k] >= len(ue_lists[k]):
            continue
        j = ue_lists[k][nxt[k]]
        nxt[k] += 1
        if k not in bs_rank[j]:
            free.append(k)
            continue
        held[j].append(k)
        held[j].sort(key=lambda x: bs_rank[j][x])
        if len(held[j]) > quota[j]:
            out = held[j].pop()
            free.append(out)
    beta = np.full(n_ue, UNASSOCIATED, dtype=int)
    for j in range(n_bs):
        for k in held[j]:
            beta[k] = j
    return beta


def random_full_input(rng, n_ue, n_bs, symmetric=False):
    """Random full-length preference lists on both sides."""
    ue_vals = rng.random((n_ue, n_bs))
    bs_vals = ue_vals if symmetric else rng.random((n_ue, n_bs))
    return from_values(ue_vals, bs_vals)


def random_quota(rng, n_bs, total):
    """Positive integer quota vector summing to ``total``."""
    assert total >= n_bs
    cuts = np.sort(rng.choice(np.arange(1, total), size=n_bs - 1, replace=False))
    parts = np.diff(np.concatenate([[0], cuts, [total]]))
    return tuple(int(p) for p in parts)


def table_one_inputs():
    """The two-player example: metric values alpha(A)=4, alpha(B)=3, beta(A)=3, beta(B)=1."""
    values = np.array([[4.0, 3.0], [3.0, 1.0]])
    return from_values(values), (1, 1)


def tiny_scenario(seed=0, n_ue=3, n_scbs=1, ue_streams=1, mcbs_quota=2, scbs_quota=2):
    """A small full scenario for rate math tests (B=1, small arrays)."""
    params = TopologyParams(
        area_m=(200.0, 200.0),
        n_scbs=n_scbs,
        mcbs_quota=mcbs_quota,
        scbs_quota=scbs_quota,
        n_ue=n_ue,
        mcbs_antennas=4,
        scbs_upa=(2, 2),
        ue_upa=(2, 1),
        ue_streams=ue_streams,
        scbs_ring_frac=0.3,
    )
    rng = np.random.default_rng(seed)
    topo = build_topology(rng, params)
    chan_params = ChannelParams()
    channels = generate_channels(rng, topo, chan_params)
    ctx = build_rate_context(topo, channels, chan_params)
    return topo, channels, ctx, chan_params


def random_valid_beta(rng, topo):
    """A random feasible association vector (some UEs may stay out)."""
    beta = np.full(topo.n_ue, UNASSOCIATED, dtype=int)
    loads = [0] * topo.n_bs
    for k in range(topo.n_ue):
        j = int(rng.integers(-1, topo.n_bs))
        if j >= 0 and loads[j] < topo.quota[j]:
            beta[k] = j
            loads[j] += 1
    return beta
