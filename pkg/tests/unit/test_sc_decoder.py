"""Unit tests for successive cancellation decoding."""

import numpy as np
import pytest

from polarbench.channels import ChannelParam, SoftBlock, channel_sample, trial_rng
from polarbench.construction import (
    CodeSpec,
    construct_arikan,
    construct_rm,
    dual_code,
    encode,
    z_profile_bec,
)
from polarbench.exceptions import InvalidInputError
from polarbench.sc_decoder import (
    decoding_order,
    sc_decode,
    sc_decode_detailed,
    sc_decode_genie,
    sc_decode_genie_batch,
    sc_source_decode,
)


def random_u(code, rng):
    u = code.frozen_block.copy()
    info = list(code.information)
    u[info] = rng.integers(0, 2, size=len(info), dtype=np.uint8)
    return u


class TestDecodingOrder:
    """Test suite for decoding_order."""

    def test_standard_order(self):
        """Test the bit-reversed visiting order."""
        assert decoding_order(2).tolist() == [0, 2, 1, 3]

    def test_dual_order(self):
        """Test the reversed bit-reversed visiting order."""
        assert decoding_order(2, "dual").tolist() == [3, 1, 2, 0]

    def test_unknown_order(self):
        """Test that unknown orders raise."""
        with pytest.raises(InvalidInputError):
            decoding_order(2, "zigzag")


class TestScDecode:
    """Test suite for sc_decode and sc_decode_detailed."""

    def setup_method(self):
        """Set up test fixtures."""
        self.rng = np.random.default_rng(12)
        self.code = construct_arikan(ChannelParam("bec", 0.5), 6, 0.5)

    def test_noiseless_bec(self):
        """Test that an unerased codeword decodes to u."""
        u = random_u(self.code, self.rng)
        obs = SoftBlock.from_bits(encode(self.code, u))
        assert np.array_equal(sc_decode(self.code, obs), u)

    def test_noiseless_bsc(self):
        """Test decoding from finite BSC LLRs without flips."""
        u = random_u(self.code, self.rng)
        x = encode(self.code, u)
        obs = SoftBlock((1.0 - 2.0 * x) * np.log(0.9 / 0.1))
        assert np.array_equal(sc_decode(self.code, obs), u)

    def test_high_snr_bawgn(self):
        """Test decoding from a low-noise BAWGN observation."""
        u = random_u(self.code, self.rng)
        x = encode(self.code, u)
        obs = channel_sample(ChannelParam("bawgn", 0.25), x, trial_rng(1))
        assert np.array_equal(sc_decode(self.code, obs), u)

    def test_nonzero_frozen_values(self):
        """Test that frozen positions carry the code's frozen values."""
        code = self.code.with_frozen_values([1] * len(self.code.frozen))
        u = random_u(code, self.rng)
        obs = SoftBlock.from_bits(encode(code, u))
        decoded = sc_decode(code, obs)
        assert np.array_equal(decoded, u)
        assert np.all(decoded[list(code.frozen)] == 1)

    def test_dual_code(self):
        """Test dual-order SC on a dual-orientation code."""
        dual = dual_code(self.code)
        u = random_u(dual, self.rng)
        obs = SoftBlock.from_bits(encode(dual, u))
        assert np.array_equal(sc_decode(dual, obs), u)

    def test_tie_decides_zero_unresolved(self):
        """Test that a fully erased block gives 0 on unresolved information bits."""
        code = construct_arikan(ChannelParam("bec", 0.5), 2, 0.25)
        obs = SoftBlock.from_bits(np.zeros(4), np.ones(4, dtype=bool))
        result = sc_decode_detailed(code, obs)
        assert result.bits.tolist() == [0, 0, 0, 0]
        assert not result.resolved[3]

    def test_batch_matches_single(self):
        """Test that batched decoding agrees with block-by-block decoding."""
        channel = ChannelParam("bec", 0.3)
        blocks = []
        for t in range(6):
            x = encode(self.code, random_u(self.code, self.rng))
            blocks.append(channel_sample(channel, x, trial_rng(3, t)))
        values = np.stack([b.values for b in blocks])
        erasures = np.stack([b.erasures for b in blocks])
        batch = sc_decode(self.code, SoftBlock(values, erasures))
        for t, obs in enumerate(blocks):
            assert np.array_equal(batch[t], sc_decode(self.code, obs))

    def test_wrong_length(self):
        """Test that observations must have length N."""
        with pytest.raises(InvalidInputError):
            sc_decode(self.code, SoftBlock(np.zeros(32)))


class TestGenieSc:
    """Test suite for genie-aided SC."""

    def test_noiseless_has_no_errors(self):
        """Test that no bit is in error without erasures."""
        code = CodeSpec(n=3)
        report = sc_decode_genie(code, SoftBlock.from_bits(np.zeros(8)), np.zeros(8))
        assert report.first_error_index is None
        assert not report.per_bit_error_flags.any()

    def test_rejects_truth_off_frozen_values(self):
        """Test that the truth must agree with the frozen values."""
        code = construct_rm(2, 0.5)
        truth = np.ones(4, dtype=np.uint8)
        with pytest.raises(InvalidInputError):
            sc_decode_genie(code, SoftBlock.from_bits(np.zeros(4)), truth)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_erasure_rates_match_z_profile(self, n):
        """Test that exact per-bit genie erasure probabilities equal the Z profile."""
        N = 1 << n
        code = CodeSpec(n=n)
        patterns = ((np.arange(1 << N)[:, None] >> np.arange(N)) & 1).astype(bool)
        obs = SoftBlock.from_bits(np.zeros(patterns.shape), patterns)
        flags = sc_decode_genie_batch(code, obs, np.zeros(patterns.shape, np.uint8))
        erased = patterns.sum(axis=1)
        # Flag counts per number of erasures, then one weight per count
        counts = np.stack([flags[erased == k].sum(axis=0) for k in range(N + 1)])
        for eps in np.arange(1, 10) / 10.0:
            k = np.arange(N + 1)
            weights = eps**k * (1.0 - eps) ** (N - k)
            exact = weights @ counts
            assert np.allclose(exact, z_profile_bec(eps, n).values, rtol=0.0, atol=1e-12)


class TestScSourceDecode:
    """Test suite for SC source decoding."""

    def test_zero_syndrome_gives_zero_block(self):
        """Test that the all-zero syndrome decodes to the all-zero source block."""
        code = construct_arikan(ChannelParam("bsc", 0.11), 5, 0.6, method="bhattacharyya")
        syndrome = np.zeros(len(code.frozen), np.uint8)
        estimate = sc_source_decode(code, syndrome, np.log(0.89 / 0.11))
        assert not estimate.any()

    def test_syndrome_length_checked(self):
        """Test that the syndrome must have |F| bits."""
        code = construct_rm(3, 0.5)
        with pytest.raises(InvalidInputError):
            sc_source_decode(code, np.zeros(3, np.uint8), 1.0)
