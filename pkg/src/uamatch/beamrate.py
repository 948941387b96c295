"""Beamformers, effective channels, association-dependent rates and SINR.

The rate of a UE depends on the whole association vector: transmit power is
split equally among a BS's members and interference sums run over the
activation sets of same-tier BSs.  ``RateContext`` precomputes every pairwise
effective-channel Gram once per scenario so that repeated rate evaluations
under different association vectors are cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import MMWAVE, SUB6, ChannelParams, ChannelSet
from .netmodel import UNASSOCIATED, Topology

_LN2 = math.log(2.0)


@dataclass
class BeamformerSet:
    """Per-pair precoders and combiners.

    sub6_precoder[k][b]: matched filter, shape (M_b,), unit norm.
    mm_precoder[k][s]:   top-n_k right singular vectors of H_{k,s}, (M_s, n_k).
    mm_combiner[k][s]:   top-n_k left singular vectors, (N_k, n_k).
    """

    sub6_precoder: list
    mm_precoder: list
    mm_combiner: list


def compute_beamformers(channels: ChannelSet) -> BeamformerSet:
    topo = channels.topo
    n_mc, n_sc = topo.n_mcbs, topo.n_scbs
    sub6_pre, mm_pre, mm_comb = [], [], []
    for k, ue in enumerate(topo.ue_list):
        row_f, row_fm, row_w = [], [], []
        for b in range(n_mc):
            h = channels.get(k, b).matrix
            nrm = np.linalg.norm(h)
            if nrm == 0.0:
                f = np.zeros(h.shape[0], dtype=complex)
                f[0] = 1.0
            else:
                f = h.conj() / nrm
            row_f.append(f)
        nk = ue.n_streams
        for s in range(n_sc):
            hm = channels.get(k, n_mc + s).matrix
            if np.linalg.norm(hm) == 0.0:
                fm = np.eye(hm.shape[1], dtype=complex)[:, :nk]
                w = np.eye(hm.shape[0], dtype=complex)[:, :nk]
            else:
                u, _, vh = np.linalg.svd(hm)
                fm = vh[:nk].conj().T
                w = u[:, :nk]
            row_fm.append(fm)
            row_w.append(w)
        sub6_pre.append(row_f)
        mm_pre.append(row_fm)
        mm_comb.append(row_w)
    return BeamformerSet(sub6_pre, mm_pre, mm_comb)


def effective_channel(k: int, l: int, j: int, channels: ChannelSet,
                      beams: BeamformerSet) -> np.ndarray:
    """Effective channel at UE k from BS j transmitting with UE l's precoder.

    l == k gives the direct effective channel.  Shape is (n_k, n_l); sub-6
    pairs come back as a (1, 1) matrix.  Large-scale gain is folded in.
    """
    topo = channels.topo
    h = channels.get(k, j).weighted()
    if topo.is_mmwave(j):
        s = topo.scbs_index(j)
        w = beams.mm_combiner[k][s]
        f = beams.mm_precoder[l][s]
        if w.shape[0] != h.shape[0] or f.shape[0] != h.shape[1]:
            raise ValueError("combiner/precoder dimensions do not match BS j's band")
        return w.conj().T @ h @ f
    f = beams.sub6_precoder[l][j]
    if f.shape[0] != h.shape[0]:
        raise ValueError("precoder dimensions do not match BS j's band")
    return np.array([[h @ f]])


class RateContext:
    """Precomputed effective-channel Grams plus rate/SINR evaluation.

    Rates follow the equal-power-split convention: P_{k,j} = P_j / |K_j|.
    Evaluating a pair (k, j) with beta_k != j uses the hypothetical-switch
    convention: UE k is moved into BS j's activation set (and counted in the
    power split); if j is at quota, j's weakest current member (lowest
    instantaneous rate, ties to the lower index) is displaced first.
    """

    def __init__(self, topo: Topology, channels: ChannelSet, beams: BeamformerSet,
                 chan_params: ChannelParams):
        self.topo = topo
        self.channels = channels
        self.beams = beams
        self.noise_sub6 = chan_params.noise_power_w(SUB6)
        self.noise_mm = chan_params.noise_power_w(MMWAVE)
        self.powers = [topo.bs(j).tx_power_w for j in range(topo.n_bs)]
        self.streams = [ue.n_streams for ue in topo.ue_list]
        self._precompute()

    # -- precomputation -------------------------------------------------

    def _precompute(self):
        topo = self.topo
        n_mc, n_sc, n_ue = topo.n_mcbs, topo.n_scbs, topo.n_ue
        ch, beams = self.channels, self.beams

        # sub-6: squared effective gains |h_{k,b} f_{l,b}|^2, one (K, K) per macro
        self.g2_sub6 = []
        for b in range(n_mc):
            rows = np.stack([ch.get(k, b).weighted() for k in range(n_ue)])
            cols = np.stack([beams.sub6_precoder[l][b] for l in range(n_ue)], axis=1)
            hf = rows @ cols
            self.g2_sub6.append(np.abs(hf) ** 2)

        # mmWave: Gram of W_{k,sj}^H H_{k,si} F_{l,si} for every (sj, si, k, l)
        off = np.concatenate([[0], np.cumsum(self.streams)]).astype(int)
        uniform = len(set(self.streams)) == 1
        self.grams_mm = {}
        for sj in range(n_sc):
            for si in range(n_sc):
                i_abs = n_mc + si
                rows = np.concatenate(
                    [beams.mm_combiner[k][sj].conj().T @ ch.get(k, i_abs).weighted()
                     for k in range(n_ue)],
                    axis=0,
                )
                fcat = np.concatenate(
                    [beams.mm_precoder[l][si] for l in range(n_ue)], axis=1
                )
                eff = rows @ fcat
                if uniform and n_ue:
                    nu = self.streams[0]
                    e4 = eff.reshape(n_ue, nu, n_ue, nu)
                    self.grams_mm[(sj, si)] = np.einsum(
                        "kalb,kclb->klac", e4, np.conj(e4)
                    )
                else:
                    blocks = [
                        [None] * n_ue for _ in range(n_ue)
                    ]
                    for k in range(n_ue):
                        ek = eff[off[k]:off[k + 1]]
                        for l in range(n_ue):
                            blk = ek[:, off[l]:off[l + 1]]
                            blocks[k][l] = blk @ blk.conj().T
                    self.grams_mm[(sj, si)] = blocks

    # -- association bookkeeping ----------------------------------------

    def _activation_info(self, beta):
        members = [[] for _ in range(self.topo.n_bs)]
        for k, b in enumerate(beta):
            if b != UNASSOCIATED:
                members[int(b)].append(k)
        share = [
            self.powers[j] / len(members[j]) if members[j] else self.powers[j]
            for j in range(self.topo.n_bs)
        ]
        return members, share

    def hypothetical_beta(self, k: int, j: int, beta) -> np.ndarray:
        """Association vector with UE k switched into BS j.

        Others' associations stay fixed; if j is already at quota, its
        weakest member by current rate is displaced to keep quota feasible.
        """
        beta = np.asarray(beta)
        out = beta.copy()
        if beta[k] == j:
            return out
        members = [m for m in range(len(beta)) if beta[m] == j]
        if len(members) >= self.topo.quota[j]:
            rates = [self._member_rate(m, j, beta) for m in members]
            out[members[int(np.argmin(rates))]] = UNASSOCIATED
        out[k] = j
        return out

    # -- core rate math ---------------------------------------------------

    def _interference_sub6(self, k, j, members, share):
        v = self.noise_sub6
        for b in range(self.topo.n_mcbs):
            g2 = self.g2_sub6[b]
            for l in members[b]:
                if b == j and l == k:
                    continue
                v += share[b] * g2[k, l]
        return v

    def _interference_mm(self, k, sj, members, share):
        n_mc = self.topo.n_mcbs
        v = self.noise_mm * np.eye(self.streams[k], dtype=complex)
        for si in range(self.topo.n_scbs):
            i_abs = n_mc + si
            blocks = self.grams_mm[(sj, si)]
            for l in members[i_abs]:
                if i_abs == n_mc + sj and l == k:
                    continue
                v = v + share[i_abs] * blocks[k][l]
        return v

    def _member_rate(self, k, j, beta, members=None, share=None) -> float:
        """Instantaneous rate of member k in cell j (requires beta_k == j)."""
        if members is None:
            members, share = self._activation_info(beta)
        if self.topo.is_mmwave(j):
            sj = self.topo.scbs_index(j)
            v = self._interference_mm(k, sj, members, share)
            sig = share[j] * self.grams_mm[(sj, sj)][k][k]
            s0, ld0 = np.linalg.slogdet(v)
            s1, ld1 = np.linalg.slogdet(v + sig)
            if s0.real <= 0.0 or s1.real <= 0.0:
                raise ArithmeticError("interference covariance is not positive definite")
            return max((ld1 - ld0) / _LN2, 0.0)
        v = self._interference_sub6(k, j, members, share)
        if v <= 0.0:
            raise ArithmeticError("interference-plus-noise power is not positive")
        sig = share[j] * self.g2_sub6[j][k, k]
        return math.log2(1.0 + sig / v)

    # -- public surface ---------------------------------------------------

    def instantaneous_rate(self, k: int, j: int, beta) -> float:
        """Rate of UE k at BS j in bps/Hz under the hypothetical-switch rule."""
        b2 = self.hypothetical_beta(k, j, beta)
        return self._member_rate(k, j, b2)

    def rate_table(self, beta) -> np.ndarray:
        """(K, J) hypothetical rates for every pair under one base vector."""
        beta = np.asarray(beta)
        topo = self.topo
        members, share = self._activation_info(beta)
        weakest = {}
        for j in range(topo.n_bs):
            if members[j] and len(members[j]) >= topo.quota[j]:
                rates = [self._member_rate(m, j, beta, members, share)
                         for m in members[j]]
                weakest[j] = members[j][int(np.argmin(rates))]
        out = np.zeros((topo.n_ue, topo.n_bs))
        for k in range(topo.n_ue):
            for j in range(topo.n_bs):
                if beta[k] == j:
                    out[k, j] = self._member_rate(k, j, beta, members, share)
                    continue
                b2 = beta.copy()
                if j in weakest:
                    b2[weakest[j]] = UNASSOCIATED
                b2[k] = j
                out[k, j] = self._member_rate(k, j, b2)
        return out

    def sum_rate_utility(self, beta) -> float:
        """Sum of members' rates; unassociated UEs contribute nothing."""
        beta = np.asarray(beta)
        members, share = self._activation_info(beta)
        total = 0.0
        for k, b in enumerate(beta):
            if b != UNASSOCIATED:
                total += self._member_rate(k, int(b), beta, members, share)
        return total

    def per_ue_rates(self, beta) -> np.ndarray:
        """Rate of each UE at its serving BS (0 for unassociated)."""
        beta = np.asarray(beta)
        members, share = self._activation_info(beta)
        out = np.zeros(len(beta))
        for k, b in enumerate(beta):
            if b != UNASSOCIATED:
                out[k] = self._member_rate(k, int(b), beta, members, share)
        return out

    def received_sinr(self, k: int, j: int, beta) -> float:
        """Scalar SINR of pair (k, j): mmWave links use ||W*HF||_F^2 / tr(V)."""
        b2 = self.hypothetical_beta(k, j, beta)
        members, share = self._activation_info(b2)
        if self.topo.is_mmwave(j):
            sj = self.topo.scbs_index(j)
            v = self._interference_mm(k, sj, members, share)
            sig = share[j] * np.trace(self.grams_mm[(sj, sj)][k][k]).real
            return sig / np.trace(v).real
        v = self._interference_sub6(k, j, members, share)
        sig = share[j] * self.g2_sub6[j][k, k]
        return sig / v

    def sinr_table(self, beta) -> np.ndarray:
        out = np.zeros((self.topo.n_ue, self.topo.n_bs))
        for k in range(self.topo.n_ue):
            for j in range(self.topo.n_bs):
                out[k, j] = self.received_sinr(k, j, beta)
        return out


def empty_beta(n_ue: int) -> np.ndarray:
    return np.full(n_ue, UNASSOCIATED, dtype=int)


def build_rate_context(topo: Topology, channels: ChannelSet,
                       chan_params: ChannelParams,
                       beams: BeamformerSet | None = None) -> RateContext:
    if beams is None:
        beams = compute_beamformers(channels)
    return RateContext(topo, channels, beams, chan_params)
