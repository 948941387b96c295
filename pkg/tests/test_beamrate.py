import math

import numpy as np
import pytest

from helpers import oracle_rate, random_valid_beta, tiny_scenario

from uamatch.beamrate import (
    build_rate_context,
    compute_beamformers,
    effective_channel,
    empty_beta,
)
from uamatch.channel import ChannelParams, generate_channels
from uamatch.netmodel import UNASSOCIATED, TopologyParams, build_topology


@pytest.fixture(scope="module")
def tiny():
    return tiny_scenario(seed=1, n_ue=3)


class TestBeamformers:
    def test_rank_one_svd_recovers_factors(self):
        topo, channels, ctx, _ = tiny_scenario(seed=2, n_ue=1)
        beams = ctx.beams
        # overwrite one mmWave channel with a rank-1 outer product
        rng = np.random.default_rng(0)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        h = 3.0 * np.outer(u, v.conj())
        uu, ss, vh = np.linalg.svd(h)
        f = vh[:1].conj().T
        w = uu[:, :1]
        assert abs(abs((w.conj().T @ h @ f)[0, 0]) - 3.0) < 1e-12
        # the library picks the same subspace (top singular pair)
        assert np.allclose(np.abs(w.conj().T @ u[:, None]), 1.0, atol=1e-12)

    def test_sub6_matched_filter_unit_norm(self, tiny):
        topo, channels, ctx, _ = tiny
        for k in range(topo.n_ue):
            f = ctx.beams.sub6_precoder[k][0]
            assert np.linalg.norm(f) == pytest.approx(1.0)

    def test_effective_gain_equals_top_singular_values(self, tiny):
        topo, channels, ctx, _ = tiny
        beams = ctx.beams
        for k in range(topo.n_ue):
            j = topo.n_mcbs  # first small cell
            h = channels.get(k, j).matrix
            svals = np.sqrt(np.sort(np.linalg.eigvalsh(h @ h.conj().T))[::-1])
            eff = beams.mm_combiner[k][0].conj().T @ h @ beams.mm_precoder[k][0]
            got = np.abs(np.diag(eff))
            assert np.allclose(got, svals[: len(got)], atol=1e-9)

    def test_combiner_columns_orthonormal(self, tiny):
        topo, channels, ctx, _ = tiny
        w = ctx.beams.mm_combiner[0][0]
        assert np.allclose(w.conj().T @ w, np.eye(w.shape[1]), atol=1e-12)


class TestEffectiveChannel:
    def test_shapes(self, tiny):
        topo, channels, ctx, _ = tiny
        e = effective_channel(0, 1, topo.n_mcbs, channels, ctx.beams)
        n0 = topo.ue_list[0].n_streams
        n1 = topo.ue_list[1].n_streams
        assert e.shape == (n0, n1)
        es = effective_channel(0, 1, 0, channels, ctx.beams)
        assert es.shape == (1, 1)

    def test_direct_effective_positive_diagonal(self, tiny):
        topo, channels, ctx, _ = tiny
        e = effective_channel(2, 2, topo.n_mcbs, channels, ctx.beams)
        assert np.all(np.abs(np.diag(e)) > 0)

    def test_orthogonal_precoder_nulls_channel(self):
        topo, channels, ctx, _ = tiny_scenario(seed=3, n_ue=2)
        h = channels.get(0, topo.n_mcbs).weighted()
        # a precoder in the nullspace of H's row space
        _, _, vh = np.linalg.svd(h)
        null_vec = vh[-1].conj().T[:, None]
        w = ctx.beams.mm_combiner[0][0]
        assert np.linalg.norm(w.conj().T @ h @ null_vec) < 1e-10


class TestRates:
    def test_single_pair_rate_one_when_snr_is_one(self):
        # log2(1 + 1) with the signal power equal to the noise floor
        topo, channels, ctx, chan_params = tiny_scenario(seed=4, n_ue=1)
        beta = np.array([0])
        g2 = ctx.g2_sub6[0][0, 0]
        p = topo.bs(0).tx_power_w
        snr = p * g2 / ctx.noise_sub6
        rate = ctx.instantaneous_rate(0, 0, beta)
        assert rate == pytest.approx(math.log2(1 + snr), rel=1e-12)

    def test_interference_free_scalar_reduction(self):
        topo, channels, ctx, chan_params = tiny_scenario(seed=5, n_ue=1, ue_streams=1)
        j = topo.n_mcbs
        beta = np.array([j])
        sig = (topo.bs(j).tx_power_w * ctx.grams_mm[(0, 0)][0][0]).reshape(())
        expected = math.log2(1 + sig.real / ctx.noise_mm)
        assert ctx.instantaneous_rate(0, j, beta) == pytest.approx(expected, rel=1e-12)

    def test_symmetric_channels_equal_rates(self):
        # two UEs with identical channels at one macro get identical rates
        topo, channels, ctx, _ = tiny_scenario(seed=6, n_ue=2)
        for row in (ctx.g2_sub6[0],):
            row[1, :] = row[0, :]
            row[:, 1] = row[:, 0]
        beta = np.array([0, 0])
        r0 = ctx.instantaneous_rate(0, 0, beta)
        r1 = ctx.instantaneous_rate(1, 0, beta)
        assert r0 == pytest.approx(r1, rel=1e-9)

    def test_matches_term_by_term_oracle(self):
        rng = np.random.default_rng(123)
        for trial in range(12):
            topo, channels, ctx, chan_params = tiny_scenario(
                seed=100 + trial, n_ue=4, n_scbs=2, ue_streams=2,
                mcbs_quota=2, scbs_quota=2,
            )
            beta = random_valid_beta(rng, topo)
            for k in range(topo.n_ue):
                j = int(beta[k])
                if j == UNASSOCIATED:
                    continue
                got = ctx.instantaneous_rate(k, j, beta)
                want = oracle_rate(k, j, beta, topo, channels, ctx.beams, chan_params)
                assert got == pytest.approx(want, rel=1e-9)

    def test_rates_finite_nonnegative(self):
        rng = np.random.default_rng(77)
        topo, channels, ctx, _ = tiny_scenario(seed=42, n_ue=5, n_scbs=2)
        beta = random_valid_beta(rng, topo)
        table = ctx.rate_table(beta)
        assert np.all(np.isfinite(table))
        assert np.all(table >= 0)


class TestAssociationDependence:
    def test_interference_changes_with_other_associations(self):
        topo, channels, ctx, _ = tiny_scenario(seed=9, n_ue=3, mcbs_quota=3)
        lone = np.array([0, UNASSOCIATED, UNASSOCIATED])
        crowded = np.array([0, 0, 0])
        r_lone = ctx.instantaneous_rate(0, 0, lone)
        r_crowded = ctx.instantaneous_rate(0, 0, crowded)
        # power split plus intra-cell interference must reduce the rate
        assert r_crowded < r_lone

    def test_unchanged_activation_sets_give_identical_rates(self):
        topo, channels, ctx, _ = tiny_scenario(seed=10, n_ue=3, mcbs_quota=3)
        beta = np.array([0, 0, UNASSOCIATED])
        r1 = ctx.instantaneous_rate(0, 0, beta)
        r2 = ctx.instantaneous_rate(0, 0, beta.copy())
        assert r1 == r2

    def test_cross_tier_isolation(self):
        topo, channels, ctx, _ = tiny_scenario(seed=11, n_ue=3, mcbs_quota=3, scbs_quota=3)
        j_mm = topo.n_mcbs
        base = np.array([0, UNASSOCIATED, UNASSOCIATED])
        other_tier = np.array([0, j_mm, j_mm])
        assert ctx.instantaneous_rate(0, 0, base) == pytest.approx(
            ctx.instantaneous_rate(0, 0, other_tier), rel=1e-12
        )


class TestHypothetical:
    def test_full_cell_displaces_weakest(self):
        topo, channels, ctx, _ = tiny_scenario(seed=12, n_ue=3, mcbs_quota=1)
        beta = np.array([0, UNASSOCIATED, UNASSOCIATED])
        b2 = ctx.hypothetical_beta(1, 0, beta)
        assert b2[1] == 0
        assert b2[0] == UNASSOCIATED  # displaced: cell was at quota 1

    def test_room_left_keeps_everyone(self):
        topo, channels, ctx, _ = tiny_scenario(seed=13, n_ue=3, mcbs_quota=2)
        beta = np.array([0, UNASSOCIATED, UNASSOCIATED])
        b2 = ctx.hypothetical_beta(1, 0, beta)
        assert b2[0] == 0 and b2[1] == 0

    def test_power_split_counts_hypothetical_member(self):
        topo, channels, ctx, _ = tiny_scenario(seed=14, n_ue=2, mcbs_quota=2)
        beta = np.array([0, UNASSOCIATED])
        # UE 1 evaluated at BS 0 shares power with the resident UE 0
        r_joining = ctx.instantaneous_rate(1, 0, beta)
        alone = np.array([UNASSOCIATED, 0])
        r_alone = ctx.instantaneous_rate(1, 0, alone)
        assert r_joining < r_alone


class TestSinr:
    def test_no_interference_matches_rate(self):
        topo, channels, ctx, _ = tiny_scenario(seed=15, n_ue=1)
        beta = np.array([0])
        sinr = ctx.received_sinr(0, 0, beta)
        rate = ctx.instantaneous_rate(0, 0, beta)
        assert rate == pytest.approx(math.log2(1 + sinr), rel=1e-12)

    def test_monotone_decreasing_in_interference(self):
        # doubling the interfering cell's power must cut SINR by at most half
        topo, channels, ctx, chan_params = tiny_scenario(
            seed=16, n_ue=2, n_scbs=2, ue_streams=1, scbs_quota=1
        )
        j1, j2 = topo.n_mcbs, topo.n_mcbs + 1
        beta = np.array([j1, j2])
        s1 = ctx.received_sinr(0, j1, beta)

        boosted = [bs for bs in topo.scbs_list]
        from dataclasses import replace
        boosted[1] = replace(boosted[1], tx_power_w=2 * boosted[1].tx_power_w)
        topo2 = replace(topo, scbs_list=tuple(boosted))
        ctx2 = build_rate_context(topo2, channels, chan_params, beams=ctx.beams)
        s2 = ctx2.received_sinr(0, j1, beta)
        assert s1 / 2 <= s2 < s1

    def test_sinr_ordering_matches_rate_ordering_single_stream(self):
        rng = np.random.default_rng(55)
        topo, channels, ctx, _ = tiny_scenario(seed=17, n_ue=4, n_scbs=2, ue_streams=1)
        beta = random_valid_beta(rng, topo)
        sinr = ctx.sinr_table(beta)
        rate = ctx.rate_table(beta)
        for k in range(topo.n_ue):
            assert np.array_equal(np.argsort(sinr[k]), np.argsort(rate[k]))


class TestSumRate:
    def test_all_unassociated_is_zero(self, tiny):
        topo, channels, ctx, _ = tiny
        assert ctx.sum_rate_utility(empty_beta(topo.n_ue)) == 0.0

    def test_matches_per_ue_sum(self, tiny):
        topo, channels, ctx, _ = tiny
        rng = np.random.default_rng(18)
        beta = random_valid_beta(rng, topo)
        total = sum(
            ctx.instantaneous_rate(k, int(beta[k]), beta)
            for k in range(topo.n_ue) if beta[k] != UNASSOCIATED
        )
        assert ctx.sum_rate_utility(beta) == pytest.approx(total, rel=1e-12)
