"""Unit tests for compression, Slepian-Wolf, quantization and Wyner-Ziv coding."""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from polarbench.channels import (
    PERMUTATION_STREAM,
    ChannelParam,
    bernoulli_block,
    binary_entropy,
    ternary_source_block,
    trial_rng,
)
from polarbench.construction import CodeSpec, construct_arikan, construct_rm, encode
from polarbench.exceptions import InvalidInputError
from polarbench.source_codecs import (
    MAX_PERMUTATION_BITS,
    CompressedBlock,
    PermutationFamily,
    compress,
    compress_batch,
    decompress,
    erasure_quantize,
    erasure_quantizer_code,
    hamming_quantize,
    hamming_quantizer_code,
    nesting_report,
    prior_llr,
    quantizer_crossover,
    rate_distortion,
    read_compressed,
    slepian_wolf_decode,
    slepian_wolf_encode,
    slepian_wolf_rates,
    syndrome,
    write_compressed,
    wyner_ziv_decode,
    wyner_ziv_encode,
    wyner_ziv_envelope,
    wyner_ziv_rate,
)


def source_code(n=8, rate=0.7, p=0.11):
    return construct_arikan(ChannelParam("bsc", p), n, 1.0 - rate, method="bhattacharyya")


class TestLossless:
    """Test suite for syndrome compression with permutations."""

    def setup_method(self):
        """Set up test fixtures."""
        self.code = source_code()
        self.family = PermutationFamily(m=2, seed=7, n=8)

    def test_syndrome_zero_on_codewords(self):
        """Test that codewords have zero syndrome."""
        rng = np.random.default_rng(1)
        u = self.code.frozen_block.copy()
        u[list(self.code.information)] = rng.integers(0, 2, self.code.K, dtype=np.uint8)
        assert not syndrome(self.code, encode(self.code, u)).any()

    def test_prior_llr(self):
        """Test the Bernoulli prior LLR and its limits."""
        assert prior_llr(0.5) == 0.0
        assert prior_llr(0.0) == float("inf")
        with pytest.raises(InvalidInputError):
            prior_llr(1.5)

    def test_family_prefix(self):
        """Test that member 0 is the identity and smaller families are prefixes."""
        small = PermutationFamily(m=1, seed=7, n=8)
        assert np.array_equal(self.family.permutation(0), np.arange(256))
        assert np.array_equal(self.family.permutation(1), small.permutation(1))
        assert len(self.family) == 4

    def test_family_streams_differ_from_trial_streams(self):
        """Test that permutations do not reuse the (seed, point, trial) streams."""
        for k in range(1, 4):
            tagged = trial_rng(7, PERMUTATION_STREAM, 8, k).permutation(256)
            assert np.array_equal(self.family.permutation(k), tagged)
            untagged = trial_rng(7, 8, k).permutation(256)
            assert not np.array_equal(self.family.permutation(k), untagged)

    def test_family_bounds(self):
        """Test validation of m and of the permutation index."""
        with pytest.raises(InvalidInputError):
            PermutationFamily(m=MAX_PERMUTATION_BITS + 1, seed=0, n=3)
        with pytest.raises(InvalidInputError):
            self.family.permutation(4)

    def test_successful_blocks_round_trip(self):
        """Test that every block flagged successful decompresses exactly."""
        x = bernoulli_block(0.05, (20, 256), trial_rng(3))
        blocks = compress_batch(self.code, x, 0.11, self.family)
        assert any(b.success for b in blocks)
        for row, block in zip(x, blocks):
            if block.success:
                assert np.array_equal(decompress(self.code, block, 0.11, self.family), row)

    def test_compressed_rate(self):
        """Test (|F| + m) / N."""
        block = compress(self.code, np.zeros(256, np.uint8), 0.11, self.family)
        assert block.success
        assert block.perm_index == 0
        assert block.rate == pytest.approx((len(self.code.frozen) + 2) / 256)

    def test_more_permutations_never_hurt(self):
        """Test that failures are monotone in m for the same blocks."""
        x = bernoulli_block(0.11, (40, 256), trial_rng(4))
        failures = []
        for m in range(3):
            family = PermutationFamily(m=m, seed=7, n=8)
            failures.append(sum(not b.success for b in compress_batch(self.code, x, 0.11, family)))
        assert failures[0] >= failures[1] >= failures[2]

    def test_compress_rejects_batch(self):
        """Test that compress takes one block."""
        with pytest.raises(InvalidInputError):
            compress(self.code, np.zeros((2, 256), np.uint8), 0.11, self.family)

    def test_family_must_match_code(self):
        """Test that the family block length must match the code."""
        with pytest.raises(InvalidInputError):
            compress(self.code, np.zeros(256, np.uint8), 0.11, PermutationFamily(0, 1, 7))

    def test_file_round_trip(self):
        """Test the binary compressed-block format."""
        block = CompressedBlock(
            syndrome=np.array([1, 0, 1] + [0] * (len(self.code.frozen) - 3), np.uint8),
            perm_index=3,
            m=2,
            n=8,
        )
        with tempfile.TemporaryDirectory() as tmp:
            path = str(Path(tmp) / "x.pbz")
            write_compressed(path, block)
            loaded = read_compressed(path, self.code)
        assert loaded.perm_index == 3
        assert loaded.m == 2
        assert np.array_equal(loaded.syndrome, block.syndrome)

    def test_read_rejects_mismatched_code(self):
        """Test that the header must match the code."""
        block = compress(self.code, np.zeros(256, np.uint8), 0.11, self.family)
        with tempfile.TemporaryDirectory() as tmp:
            path = str(Path(tmp) / "x.pbz")
            write_compressed(path, block)
            with pytest.raises(InvalidInputError):
                read_compressed(path, construct_rm(8, 0.5))
            Path(path).write_bytes(b"\x00\x01")
            with pytest.raises(InvalidInputError):
                read_compressed(path, self.code)


class TestSlepianWolf:
    """Test suite for the Slepian-Wolf corner point."""

    def test_decode_recovers_y(self):
        """Test recovery of y from x and the syndrome of y."""
        code = source_code()
        rng = trial_rng(5)
        x = bernoulli_block(0.5, 256, rng)
        y = x ^ bernoulli_block(0.02, 256, rng)
        syn = slepian_wolf_encode(code, y)
        assert np.array_equal(slepian_wolf_decode(code, x, syn, 0.11), y)

    def test_matches_lossless_on_noise(self):
        """Test that SW decoding succeeds exactly when the noise compresses losslessly."""
        code = source_code()
        rng = trial_rng(6)
        x = bernoulli_block(0.5, (30, 256), rng)
        z = bernoulli_block(0.11, (30, 256), rng)
        y = x ^ z
        decoded = slepian_wolf_decode(code, x, slepian_wolf_encode(code, y), 0.11)
        sw_ok = np.all(decoded == y, axis=1)
        family = PermutationFamily(0, 1, 8)
        lossless_ok = [b.success for b in compress_batch(code, z, 0.11, family)]
        assert sw_ok.tolist() == lossless_ok

    def test_rates(self):
        """Test the corner-point rate pair."""
        code = construct_rm(3, 0.5)
        assert slepian_wolf_rates(code) == (1.0, 0.5)


class TestQuantization:
    """Test suite for erasure and Hamming quantization."""

    def test_erasure_quantizer_code(self):
        """Test that the quantizer is a dual code of rate 1 - rate."""
        dual = erasure_quantizer_code(0.5, 6, 0.25)
        assert dual.orientation == "dual"
        assert dual.rate == pytest.approx(0.75)

    def test_erasure_quantize_success_is_certified(self):
        """Test that success means zero distortion on unerased symbols."""
        dual = erasure_quantizer_code(0.5, 8, 0.3)
        s = ternary_source_block(0.5, (50, 256), trial_rng(7))
        result = erasure_quantize(dual, s)
        assert result.success.any()
        for row, rec, ok in zip(s, result.reconstruction, result.success):
            known = row != 2
            assert ok == bool(np.all(rec[known] == row[known]))

    def test_erasure_quantize_all_erased(self):
        """Test that an all-erased source always succeeds."""
        dual = erasure_quantizer_code(0.5, 4, 0.25)
        result = erasure_quantize(dual, np.full(16, 2, np.int8))
        assert result.success
        assert result.distortion == 0.0

    def test_erasure_quantize_rejects_symbols(self):
        """Test that only 0, 1 and 2 are accepted."""
        dual = erasure_quantizer_code(0.5, 2, 0.25)
        with pytest.raises(InvalidInputError):
            erasure_quantize(dual, np.array([0, 1, 3, 0]))

    def test_crossover(self):
        """Test 1 - h2(p) = h2(D)."""
        assert quantizer_crossover(0.11) == pytest.approx(0.11, abs=1e-3)
        p = quantizer_crossover(0.2)
        assert 1.0 - binary_entropy(p) == pytest.approx(binary_entropy(0.2))

    def test_hamming_quantize(self):
        """Test that the average distortion stays near the design point."""
        dual = hamming_quantizer_code(0.2, 8, method="bhattacharyya")
        assert dual.rate == pytest.approx(1.0 - binary_entropy(0.2), abs=1.0 / 256)
        x = bernoulli_block(0.5, (40, 256), trial_rng(8))
        result = hamming_quantize(dual, x, 0.2)
        assert np.array_equal(result.reconstruction, encode(dual, result.bits))
        assert 0.1 < float(np.mean(result.distortion)) < 0.3

    def test_hamming_quantize_rejects_distortion(self):
        """Test the (0, 1/2) range of D."""
        with pytest.raises(InvalidInputError):
            hamming_quantizer_code(0.6, 4)


class TestRates:
    """Test suite for rate-distortion curves."""

    def test_rate_distortion(self):
        """Test R(D) = 1 - h2(D) and its zero tail."""
        assert rate_distortion(0.11) == pytest.approx(0.5, abs=1e-3)
        assert rate_distortion(0.6) == 0.0

    def test_wyner_ziv_envelope(self):
        """Test that the envelope lies below the curve, is zero from p on and decreases."""
        p = 0.3
        points = [0.02, 0.05, 0.1, 0.15, 0.2, 0.25]
        values = [wyner_ziv_envelope(D, p) for D in points]
        for D, v in zip(points, values):
            assert v <= wyner_ziv_rate(D, p) + 1e-12
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert wyner_ziv_envelope(0.3, p) == 0.0
        assert wyner_ziv_envelope(0.01, p) == pytest.approx(wyner_ziv_rate(0.01, p))

    def test_envelope_rejects_bad_crossover(self):
        """Test the [0, 1/2] range of p."""
        with pytest.raises(InvalidInputError):
            wyner_ziv_envelope(0.1, 0.7)


class TestWynerZiv:
    """Test suite for nested Wyner-Ziv coding."""

    def test_nesting_report(self):
        """Test payload positions for nested and non-nested pairs."""
        source = CodeSpec(n=2, frozen=(0,), orientation="dual")
        channel = CodeSpec(n=2, frozen=(0, 1), orientation="dual")
        report = nesting_report(source, channel)
        assert report.nested
        assert report.payload_positions == (1,)
        assert report.surcharge_bits == 0
        wide = CodeSpec(n=2, frozen=(0, 2), orientation="dual")
        report = nesting_report(wide, channel)
        assert not report.nested
        assert report.violations == (2,)
        assert report.payload_positions == (1, 2)

    def test_encode_decode_without_noise(self):
        """Test that identical side information reproduces the reconstruction."""
        code_s = hamming_quantizer_code(0.2, 6, method="bhattacharyya")
        code_c = construct_arikan(ChannelParam("bsc", 0.3), 6, 0.05, method="bhattacharyya")
        x = bernoulli_block(0.5, 64, trial_rng(9))
        payload, quantized = wyner_ziv_encode(code_s, code_c, x, 0.2)
        estimate = wyner_ziv_decode(code_c, payload, quantized.reconstruction, 0.0)
        assert np.array_equal(estimate, quantized.reconstruction)
        assert payload.rate == pytest.approx(len(payload.positions) / 64)
