"""Unit tests for BP, MAP over the BEC and the ML oracle."""

import numpy as np
import pytest

from polarbench.bp_decoder import (
    TrellisGraph,
    bp_decode,
    bp_decode_detailed,
    cyclic_trellises,
    map_decode_bec,
    ml_oracle,
)
from polarbench.channels import (
    ChannelParam,
    SoftBlock,
    channel_sample,
    stack_soft_blocks,
    trial_rng,
)
from polarbench.config import Config
from polarbench.construction import (
    CodeSpec,
    construct_arikan,
    construct_rm,
    dual_code,
    encode,
    enumerate_codewords,
)
from polarbench.exceptions import InvalidInputError, OracleRefusedError
from polarbench.polar_core import polar_transform
from polarbench.sc_decoder import sc_decode_genie_batch


def random_u(code, rng):
    u = code.frozen_block.copy()
    info = list(code.information)
    u[info] = rng.integers(0, 2, size=len(info), dtype=np.uint8)
    return u


def erasure_patterns(N):
    """Every erasure pattern of a length-N block, one per row."""
    return ((np.arange(1 << N)[:, None] >> np.arange(N)) & 1).astype(bool)


def small_codes(n):
    """Arikan (BEC 0.5) and RM codes of every nonzero dimension at length 2^n."""
    N = 1 << n
    for k in range(1, N + 1):
        yield construct_arikan(ChannelParam("bec", 0.5), n, k / N)
        yield construct_rm(n, k / N)


class TestTrellis:
    """Test suite for trellis graphs."""

    def test_cyclic_trellises(self):
        """Test the cyclic rotations, identity first."""
        assert cyclic_trellises(3) == [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
        assert cyclic_trellises(0) == [()]

    def test_every_trellis_computes_the_transform(self):
        """Test that any section order realizes the same generator."""
        rng = np.random.default_rng(2)
        u = rng.integers(0, 2, size=(4, 16), dtype=np.uint8)
        for perm in cyclic_trellises(4) + [(3, 1, 0, 2)]:
            assert np.array_equal(TrellisGraph(4, perm).apply(u), polar_transform(u))

    def test_rejects_non_permutation(self):
        """Test validation of the section permutation."""
        with pytest.raises(InvalidInputError):
            TrellisGraph(3, (0, 0, 1))

    def test_z_pairs(self):
        """Test that every section pairs j with j | 2^h."""
        graph = TrellisGraph(3, (0, 1, 2))
        for s in range(3):
            j, k = graph.z_pairs(s)
            assert len(j) == 4
            assert np.all(k - j == 1 << graph.section_bit(s))


class TestBpDecode:
    """Test suite for bp_decode."""

    def setup_method(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(21)
        self.code = construct_arikan(ChannelParam("bec", 0.5), 6, 0.5)

    def test_noiseless_bec(self):
        """Test that an unerased codeword decodes to u."""
        u = random_u(self.code, self.rng)
        obs = SoftBlock.from_bits(encode(self.code, u))
        result = bp_decode_detailed(self.code, obs)
        assert np.array_equal(result.bits, u)
        assert result.resolved.all()

    def test_noiseless_bsc(self):
        """Test decoding of unflipped BSC LLRs."""
        u = random_u(self.code, self.rng)
        x = encode(self.code, u)
        obs = SoftBlock((1.0 - 2.0 * x) * np.log(0.95 / 0.05))
        assert np.array_equal(bp_decode(self.code, obs), u)

    def test_multi_trellis_noiseless(self):
        """Test that multi-trellis BP decodes an unerased codeword."""
        u = random_u(self.code, self.rng)
        obs = SoftBlock.from_bits(encode(self.code, u))
        assert np.array_equal(bp_decode(self.code, obs, cyclic_trellises(6)), u)

    def test_u_first_schedule_random_blocks(self):
        """Test that both schedules reach the same BEC fixed point up to n = 10."""
        channel = ChannelParam("bec", 0.5)
        for n in range(4, 11):
            code = construct_arikan(channel, n, 0.5)
            blocks = [
                channel_sample(channel, encode(code, random_u(code, self.rng)), trial_rng(4, n, t))
                for t in range(10)
            ]
            obs = stack_soft_blocks(blocks)
            for trellises in (None, cyclic_trellises(n)):
                a = bp_decode_detailed(code, obs, trellises, schedule="x-first")
                b = bp_decode_detailed(code, obs, trellises, schedule="u-first")
                assert np.array_equal(a.bits, b.bits)
                assert np.array_equal(a.resolved, b.resolved)

    def test_llr_mode_runs_every_requested_round(self):
        """Test that an explicit round limit is always swept in full."""
        channel = ChannelParam("bawgn", 0.97865)
        codewords = [encode(self.code, random_u(self.code, self.rng)) for _ in range(40)]
        blocks = [channel_sample(channel, x, trial_rng(9, t)) for t, x in enumerate(codewords)]
        obs = stack_soft_blocks(blocks)
        result = bp_decode_detailed(self.code, obs, max_rounds=30)
        assert np.all(result.rounds == 30)
        never_settles = Config()
        never_settles.BP_STABLE_ROUNDS = 10**9
        full = bp_decode_detailed(
            self.code, obs, max_rounds=30, config=never_settles, early_stop=True
        )
        assert np.array_equal(result.bits, full.bits)

    def test_early_stop_without_round_limit(self):
        """Test that the default limit stops once hard decisions settle."""
        x = encode(self.code, random_u(self.code, self.rng))
        obs = SoftBlock((1.0 - 2.0 * x) * 4.0)
        result = bp_decode_detailed(self.code, obs)
        assert int(np.max(result.rounds)) < Config.BP_MAX_ROUNDS
        forced = bp_decode_detailed(self.code, obs, early_stop=False)
        assert int(np.max(forced.rounds)) == Config.BP_MAX_ROUNDS
        assert np.array_equal(result.bits, forced.bits)

    def test_unknown_schedule(self):
        """Test that an unknown schedule raises."""
        obs = SoftBlock.from_bits(np.zeros(64))
        with pytest.raises(InvalidInputError):
            bp_decode(self.code, obs, schedule="random")

    def test_dual_code(self):
        """Test BP on a dual-orientation code."""
        dual = dual_code(self.code)
        u = random_u(dual, self.rng)
        obs = SoftBlock.from_bits(encode(dual, u))
        assert np.array_equal(bp_decode(dual, obs), u)

    def test_erased_information_stays_unresolved(self):
        """Test that a fully erased block leaves information bits unresolved."""
        obs = SoftBlock.from_bits(np.zeros(64), np.ones(64, dtype=bool))
        result = bp_decode_detailed(self.code, obs)
        info = list(self.code.information)
        assert not result.resolved[info].any()
        assert not result.bits[info].any()


class TestMapAndMl:
    """Test suite for map_decode_bec and ml_oracle."""

    def setup_method(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(5)
        self.code = construct_rm(4, 0.3125)

    def test_map_noiseless(self):
        """Test that MAP recovers u from an unerased codeword."""
        u = random_u(self.code, self.rng)
        result = map_decode_bec(self.code, SoftBlock.from_bits(encode(self.code, u)))
        assert not result.ambiguous
        assert result.rank == self.code.K
        assert np.array_equal(result.bits, u)

    def test_map_all_erased_is_ambiguous(self):
        """Test that MAP gives up when nothing is observed."""
        obs = SoftBlock.from_bits(np.zeros(16), np.ones(16, dtype=bool))
        result = map_decode_bec(self.code, obs)
        assert result.ambiguous
        assert result.bits is None
        assert result.rank == 0

    def test_map_recovers_erasures_below_distance(self):
        """Test that fewer than d_min erasures never defeat MAP."""
        u = random_u(self.code, self.rng)
        x = encode(self.code, u)
        erasures = np.zeros(16, dtype=bool)
        erasures[[0, 5, 9]] = True
        result = map_decode_bec(self.code, SoftBlock.from_bits(x, erasures))
        assert np.array_equal(result.bits, u)

    def test_map_dual_code(self):
        """Test MAP on a dual-orientation code."""
        dual = dual_code(construct_rm(4, 0.6875))
        u = random_u(dual, self.rng)
        result = map_decode_bec(dual, SoftBlock.from_bits(encode(dual, u)))
        assert np.array_equal(result.bits, u)

    def test_map_needs_bec(self):
        """Test that MAP over the BEC rejects LLR observations."""
        with pytest.raises(InvalidInputError):
            map_decode_bec(self.code, SoftBlock(np.ones(16)))

    def test_map_inconsistent(self):
        """Test that observations outside the code raise."""
        code = CodeSpec(n=1, frozen=(0, 1))
        with pytest.raises(InvalidInputError):
            map_decode_bec(code, SoftBlock.from_bits(np.array([1, 0])))

    def test_ml_noiseless(self):
        """Test that the oracle returns u on a clean BSC observation."""
        u = random_u(self.code, self.rng)
        x = encode(self.code, u)
        obs = SoftBlock((1.0 - 2.0 * x) * 2.0)
        assert np.array_equal(ml_oracle(self.code, obs), u)

    def test_ml_agrees_with_map_on_bec(self):
        """Test that ML equals MAP whenever MAP is unambiguous."""
        channel = ChannelParam("bec", 0.4)
        for t in range(20):
            u = random_u(self.code, self.rng)
            obs = channel_sample(channel, encode(self.code, u), trial_rng(6, t))
            result = map_decode_bec(self.code, obs)
            if not result.ambiguous:
                assert np.array_equal(ml_oracle(self.code, obs), result.bits)

    def test_ml_tie_takes_smallest_u(self):
        """Test that a fully erased block returns the all-zero message."""
        obs = SoftBlock.from_bits(np.zeros(16), np.ones(16, dtype=bool))
        assert not ml_oracle(self.code, obs).any()

    def test_ml_refuses_large_codes(self):
        """Test the information-size limit."""
        code = construct_rm(5, 0.75)
        with pytest.raises(OracleRefusedError):
            ml_oracle(code, SoftBlock(np.ones(32)))


class TestExhaustiveSmallCodes:
    """Exhaustive checks over every erasure pattern of short codes."""

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_schedules_reach_same_fixed_point(self, n):
        """Test that both schedules agree on every erasure pattern."""
        N = 1 << n
        patterns = erasure_patterns(N)
        obs = SoftBlock.from_bits(np.zeros(patterns.shape), patterns)
        for code in small_codes(n):
            for trellises in (None, cyclic_trellises(n)):
                a = bp_decode_detailed(code, obs, trellises, schedule="x-first")
                b = bp_decode_detailed(code, obs, trellises, schedule="u-first")
                assert np.array_equal(a.bits, b.bits)
                assert np.array_equal(a.resolved, b.resolved)

    def test_bp_never_loses_to_sc_and_sometimes_wins(self):
        """Test single-trellis BP against genie SC on every pattern at n = 3."""
        n, N = 3, 8
        patterns = erasure_patterns(N)
        obs = SoftBlock.from_bits(np.zeros(patterns.shape), patterns)
        truth = np.zeros(patterns.shape, np.uint8)
        bp_only = 0
        for code in small_codes(n):
            info = list(code.information)
            sc_fails = sc_decode_genie_batch(code, obs, truth)[:, info].any(axis=1)
            bp = bp_decode_detailed(code, obs)
            bp_fails = ~bp.resolved[:, info].all(axis=1)
            assert not bp.bits[~bp_fails].any()
            assert not np.any(bp_fails & ~sc_fails)
            bp_only += int(np.count_nonzero(sc_fails & ~bp_fails))
        assert bp_only > 0

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_map_ambiguous_iff_several_codewords_match(self, n):
        """Test MAP ambiguity against brute-force codeword counting."""
        N = 1 << n
        for code in list(small_codes(n)) + [dual_code(c) for c in small_codes(n)]:
            if code.K == 0:
                continue
            words = enumerate_codewords(code)
            for erased in erasure_patterns(N):
                known = ~erased
                matches = int(np.count_nonzero(~words[:, known].any(axis=1)))
                result = map_decode_bec(code, SoftBlock.from_bits(np.zeros(N), erased))
                assert result.ambiguous == (matches >= 2)
                if not result.ambiguous:
                    assert not result.bits.any()
