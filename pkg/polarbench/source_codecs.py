"""Source coding with polar codes.

Lossless syndrome compression with a permutation retry, the Slepian-Wolf
corner point, erasure quantization, Bernoulli-Hamming quantization and the
nested Wyner-Ziv scheme. Every codec accepts a single block of shape (N,) or
a batch of shape (B, N).
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Optional, Tuple

import numpy as np
from loguru import logger
from scipy import optimize

from .channels import (
    ERASURE_SYMBOL,
    PERMUTATION_STREAM,
    ChannelParam,
    SoftBlock,
    binary_entropy,
    binary_entropy_inverse,
    bsc_convolution,
    erasure_distortion,
    hamming_distortion,
    trial_rng,
)
from .config import Config
from .construction import (
    CodeSpec,
    align_orientation,
    construct_arikan,
    dual_code,
    encode,
)
from .exceptions import InvalidInputError
from .polar_core import pack_bits, unpack_bits
from .sc_decoder import sc_decode_detailed, sc_quantize_dual, sc_source_decode

HEADER_DTYPE = np.dtype("<u4")
HEADER_FIELDS = 4
MAX_PERMUTATION_BITS = 16


def prior_llr(p: float) -> float:
    """log((1 - p) / p) with the infinite limits at p = 0 and p = 1."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"Bernoulli parameter must lie in [0, 1], got {p}")
    if p == 0.0:
        return float("inf")
    if p == 1.0:
        return float("-inf")
    return float(np.log((1.0 - p) / p))


def syndrome(code: CodeSpec, x: np.ndarray) -> np.ndarray:
    """Frozen coordinates of the inverse transform of x; zero exactly on codewords."""
    bits = np.asarray(x, dtype=np.uint8)
    if bits.shape[-1] != code.N:
        raise InvalidInputError(f"Expected blocks of length {code.N}, got {bits.shape[-1]}")
    return encode(code, bits)[..., list(code.frozen)]


@dataclass
class PermutationFamily:
    """2^m index permutations shared by encoder and decoder; member 0 is the identity.

    Member k >= 1 is drawn from the stream (seed, PERMUTATION_STREAM, n, k)
    alone, so a family with more bits starts with every member of a family with fewer.
    """

    m: int
    seed: int
    n: int
    permutations: List[np.ndarray] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if not 0 <= self.m <= MAX_PERMUTATION_BITS:
            raise InvalidInputError(
                f"Permutation bits must lie in [0, {MAX_PERMUTATION_BITS}], got {self.m}"
            )
        N = 1 << self.n
        self.permutations = [np.arange(N)] + [
            trial_rng(self.seed, PERMUTATION_STREAM, self.n, k).permutation(N)
            for k in range(1, 1 << self.m)
        ]
        for perm in self.permutations:
            perm.setflags(write=False)

    def __len__(self) -> int:
        return len(self.permutations)

    def permutation(self, index: int) -> np.ndarray:
        if not 0 <= index < len(self.permutations):
            raise InvalidInputError(
                f"Permutation index {index} outside [0, {len(self.permutations)})"
            )
        return self.permutations[index]


@dataclass
class CompressedBlock:
    """Syndrome of the permuted source block plus the permutation that made it decodable."""

    syndrome: np.ndarray
    perm_index: int
    m: int
    n: int
    success: bool = True

    @property
    def rate(self) -> float:
        return (int(self.syndrome.size) + self.m) / float(1 << self.n)


def _check_family(code: CodeSpec, family: PermutationFamily) -> None:
    if family.n != code.n:
        raise InvalidInputError(f"Permutation family is for n={family.n}, code has n={code.n}")


def compress_batch(
    code: CodeSpec,
    x: np.ndarray,
    p: float,
    family: PermutationFamily,
    config: Optional[Config] = None,
) -> List[CompressedBlock]:
    """Compress each row of x, trying the family's permutations in order.

    A row is done at the first permutation whose syndrome SC-decodes back to
    the permuted row. Rows that never round-trip keep the identity syndrome
    and are flagged as failures.
    """
    _check_family(code, family)
    rows = np.atleast_2d(np.asarray(x, dtype=np.uint8))
    if rows.shape[-1] != code.N:
        raise InvalidInputError(f"Expected blocks of length {code.N}, got {rows.shape[-1]}")
    llr = prior_llr(p)
    batch = rows.shape[0]
    chosen = np.full(batch, -1, dtype=np.int64)
    syndromes = syndrome(code, rows)
    pending = np.arange(batch)
    for k in range(len(family)):
        if pending.size == 0:
            break
        permuted = rows[pending][:, family.permutation(k)]
        syn = syndrome(code, permuted)
        decoded = sc_source_decode(code, syn, llr, config)
        ok = np.all(decoded == permuted, axis=1)
        chosen[pending[ok]] = k
        syndromes[pending[ok]] = syn[ok]
        pending = pending[~ok]
    if pending.size:
        logger.debug("{} of {} blocks failed every permutation", pending.size, batch)
    return [
        CompressedBlock(
            syndrome=syndromes[b],
            perm_index=max(int(chosen[b]), 0),
            m=family.m,
            n=code.n,
            success=bool(chosen[b] >= 0),
        )
        for b in range(batch)
    ]


def compress(
    code: CodeSpec,
    x: np.ndarray,
    p: float,
    family: PermutationFamily,
    config: Optional[Config] = None,
) -> CompressedBlock:
    """Compress one Ber(p) source block; see compress_batch."""
    bits = np.asarray(x, dtype=np.uint8)
    if bits.ndim != 1:
        raise InvalidInputError("compress takes one block; use compress_batch for batches")
    return compress_batch(code, bits, p, family, config)[0]


def decompress(
    code: CodeSpec,
    c: CompressedBlock,
    p: float,
    family: PermutationFamily,
    config: Optional[Config] = None,
) -> np.ndarray:
    """SC source decoding of the syndrome followed by the inverse permutation."""
    _check_family(code, family)
    if c.n != code.n or c.syndrome.size != len(code.frozen):
        raise InvalidInputError("Compressed block does not match the code")
    perm = family.permutation(c.perm_index)
    permuted = sc_source_decode(code, c.syndrome, prior_llr(p), config)
    x = np.empty_like(permuted)
    x[perm] = permuted
    return x


def write_compressed(path: str, block: CompressedBlock) -> None:
    """Header of four little-endian uint32 (n, m, perm_index, |F|), then the packed syndrome."""
    header = np.array(
        [block.n, block.m, block.perm_index, block.syndrome.size], dtype=HEADER_DTYPE
    )
    Path(path).write_bytes(header.tobytes() + pack_bits(block.syndrome))


def read_compressed(path: str, code: CodeSpec) -> CompressedBlock:
    data = Path(path).read_bytes()
    header_size = HEADER_FIELDS * HEADER_DTYPE.itemsize
    if len(data) < header_size:
        raise InvalidInputError(f"{path}: truncated header")
    n, m, perm_index, frozen = (int(v) for v in np.frombuffer(data[:header_size], HEADER_DTYPE))
    if n != code.n or frozen != len(code.frozen):
        raise InvalidInputError(
            f"{path}: header (n={n}, |F|={frozen}) does not match the code "
            f"(n={code.n}, |F|={len(code.frozen)})"
        )
    if perm_index >= 1 << m:
        raise InvalidInputError(f"{path}: perm_index {perm_index} needs more than {m} bits")
    payload = data[header_size:]
    if len(payload) != (frozen + 7) // 8:
        raise InvalidInputError(f"{path}: expected {(frozen + 7) // 8} syndrome bytes")
    return CompressedBlock(
        syndrome=unpack_bits(payload, frozen), perm_index=perm_index, m=m, n=n, success=True
    )


def slepian_wolf_encode(code: CodeSpec, y: np.ndarray) -> np.ndarray:
    return syndrome(code, y)


def slepian_wolf_decode(
    code: CodeSpec,
    x: np.ndarray,
    syn: np.ndarray,
    p: float,
    config: Optional[Config] = None,
) -> np.ndarray:
    """Recover y from the uncompressed x and the syndrome of y.

    The syndrome of z = x ^ y is syn ^ syndrome(x); SC source decoding under
    Ber(p) estimates z and y = x ^ z.
    """
    xb = np.asarray(x, dtype=np.uint8)
    noise_syndrome = np.asarray(syn, dtype=np.uint8) ^ syndrome(code, xb)
    z_hat = sc_source_decode(code, noise_syndrome, prior_llr(p), config)
    return xb ^ z_hat


def slepian_wolf_rates(code: CodeSpec) -> Tuple[float, float]:
    """Rate pair (R_X, R_Y) at the corner point."""
    return 1.0, len(code.frozen) / float(code.N)


@dataclass
class QuantizationResult:
    """u chosen by the quantizer, its reconstruction and the per-block distortion."""

    bits: np.ndarray
    reconstruction: np.ndarray
    distortion: Any
    success: Any = True


def _ternary_target(s: np.ndarray) -> SoftBlock:
    symbols = np.asarray(s, dtype=np.int8)
    if np.any((symbols < 0) | (symbols > ERASURE_SYMBOL)):
        raise InvalidInputError("Ternary source symbols must be 0, 1 or 2 (erased)")
    signs = np.where(symbols == ERASURE_SYMBOL, 0, 1 - 2 * symbols).astype(np.int8)
    return SoftBlock.from_ternary(signs)


def erasure_quantize(
    dual: CodeSpec, s: np.ndarray, config: Optional[Config] = None
) -> QuantizationResult:
    """Quantize a ternary source with a dual code; success means zero erasure distortion.

    Each success is certified by recomputing the distortion of the reconstruction.
    """
    symbols = np.asarray(s, dtype=np.int8)
    if symbols.shape[-1] != dual.N:
        raise InvalidInputError(f"Expected blocks of length {dual.N}, got {symbols.shape[-1]}")
    u = sc_quantize_dual(dual, _ternary_target(symbols), config)
    reconstruction = encode(dual, u)
    distortion = erasure_distortion(symbols, reconstruction)
    success = np.asarray(distortion) == 0
    return QuantizationResult(
        bits=u,
        reconstruction=reconstruction,
        distortion=distortion,
        success=bool(success) if success.ndim == 0 else success,
    )


def hamming_quantize(
    dual: CodeSpec, x: np.ndarray, D: float, config: Optional[Config] = None
) -> QuantizationResult:
    """Quantize binary blocks under Hamming distortion against the Ber(D) test channel."""
    if not 0.0 < D < 0.5:
        raise InvalidInputError(f"Design distortion must lie in (0, 1/2), got {D}")
    bits = np.asarray(x, dtype=np.uint8)
    if bits.shape[-1] != dual.N:
        raise InvalidInputError(f"Expected blocks of length {dual.N}, got {bits.shape[-1]}")
    target = SoftBlock((1.0 - 2.0 * bits) * np.log((1.0 - D) / D))
    u = sc_quantize_dual(dual, target, config)
    reconstruction = encode(dual, u)
    return QuantizationResult(
        bits=u, reconstruction=reconstruction, distortion=hamming_distortion(bits, reconstruction)
    )


def erasure_quantizer_code(eps: float, n: int, rate: float) -> CodeSpec:
    """Dual of the BEC(1 - eps) code of channel rate ``rate``; quantizer rate 1 - rate."""
    if not 0.0 <= rate < eps:
        logger.warning("erasure quantizer channel rate {} is not below eps={}", rate, eps)
    return dual_code(construct_arikan(ChannelParam("bec", 1.0 - eps), n, rate))


def quantizer_crossover(D: float) -> float:
    """The p with 1 - h2(p) = h2(D)."""
    return binary_entropy_inverse(1.0 - float(binary_entropy(D)))


def hamming_quantizer_code(
    D: float,
    n: int,
    method: str = "genie",
    trials: Optional[int] = None,
    seed: Optional[int] = None,
) -> CodeSpec:
    """Dual of the BSC(p) code of rate 1 - h2(p), p = h2^-1(1 - h2(D)); rate 1 - h2(D)."""
    if not 0.0 < D < 0.5:
        raise InvalidInputError(f"Design distortion must lie in (0, 1/2), got {D}")
    p = quantizer_crossover(D)
    code = construct_arikan(
        ChannelParam("bsc", p), n, float(binary_entropy(D)), method, trials, seed
    )
    logger.debug("hamming quantizer D={} p={:.6f} n={} free={}", D, p, n, len(code.frozen))
    return dual_code(code)


def rate_distortion(D: float) -> float:
    """R(D) = 1 - h2(D) of the Ber(1/2) source, 0 from D = 1/2 on."""
    if D < 0:
        raise InvalidInputError("Distortion must be non-negative")
    return 0.0 if D >= 0.5 else 1.0 - float(binary_entropy(D))


def wyner_ziv_rate(D: float, p: float) -> float:
    """h2(D * p) - h2(D)."""
    return float(binary_entropy(bsc_convolution(D, p))) - float(binary_entropy(D))


def _entropy_slope(x: float) -> float:
    return float(np.log2((1.0 - x) / x))


def _envelope_tangent(p: float) -> float:
    """Distortion where the line through (p, 0) touches h2(D * p) - h2(D)."""
    edge = 1e-12

    def gap(d: float) -> float:
        slope = (1.0 - 2.0 * p) * _entropy_slope(bsc_convolution(d, p)) - _entropy_slope(d)
        return wyner_ziv_rate(d, p) + slope * (p - d)

    lo, hi = edge, p - edge
    if hi <= lo or gap(hi) <= 0:
        return p
    return float(optimize.brentq(gap, lo, hi, xtol=1e-14))


def wyner_ziv_envelope(D: float, p: float) -> float:
    """Lower convex envelope of h2(D * p) - h2(D) and the point (D = p, rate 0)."""
    if not 0.0 <= p <= 0.5:
        raise InvalidInputError(f"Side-information crossover must lie in [0, 1/2], got {p}")
    if D < 0:
        raise InvalidInputError("Distortion must be non-negative")
    if p == 0.0 or D >= p:
        return 0.0
    d_c = _envelope_tangent(p)
    if D <= d_c:
        return wyner_ziv_rate(D, p)
    return wyner_ziv_rate(d_c, p) * (p - D) / (p - d_c)


@dataclass
class NestingReport:
    """How the source code's frozen set sits inside the channel code's."""

    nested: bool
    violations: Tuple[int, ...]
    payload_positions: Tuple[int, ...]
    base_bits: int

    @property
    def surcharge_bits(self) -> int:
        return len(self.violations)


def nesting_report(code_s: CodeSpec, code_c: CodeSpec) -> NestingReport:
    """Compare F_s with the channel code's frozen set in the source code's orientation."""
    aligned = align_orientation(code_c, code_s.orientation)
    f_s, f_c = set(code_s.frozen), set(aligned.frozen)
    base = sorted(f_c - f_s)
    violations = tuple(sorted(f_s - f_c))
    if violations:
        logger.warning(
            "source frozen set is not nested in the channel frozen set: {} extra bits",
            len(violations),
        )
    return NestingReport(
        nested=not violations,
        violations=violations,
        payload_positions=tuple(sorted(base + list(violations))),
        base_bits=len(base),
    )


def wyner_ziv_codes(
    D: float,
    p: float,
    n: int,
    backoff: float = 0.0,
    method: str = "genie",
    trials: Optional[int] = None,
    seed: Optional[int] = None,
) -> Tuple[CodeSpec, CodeSpec]:
    """Source code for distortion D and channel code for BSC(D * p).

    The channel code has rate 1 - h2(D * p) - backoff.
    """
    code_s = hamming_quantizer_code(D, n, method, trials, seed)
    q = bsc_convolution(D, p)
    rate = min(1.0, max(0.0, 1.0 - float(binary_entropy(q)) - backoff))
    code_c = construct_arikan(ChannelParam("bsc", q), n, rate, method, trials, seed)
    return code_s, code_c


@dataclass
class WynerZivPayload:
    """Bits of u on the payload positions, one row per block for batches."""

    bits: np.ndarray
    positions: Tuple[int, ...]
    n: int
    distortion: float
    measured_distortion: Any = None
    report: Optional[NestingReport] = None

    @property
    def rate(self) -> float:
        """Transmitted bits per source bit, surcharge included."""
        return len(self.positions) / float(1 << self.n)


def wyner_ziv_encode(
    code_s: CodeSpec,
    code_c: CodeSpec,
    x: np.ndarray,
    D: float,
    config: Optional[Config] = None,
) -> Tuple[WynerZivPayload, QuantizationResult]:
    """Quantize x with the source code and send u on F_c minus F_s (plus any violations)."""
    report = nesting_report(code_s, code_c)
    quantized = hamming_quantize(code_s, x, D, config)
    payload = WynerZivPayload(
        bits=quantized.bits[..., list(report.payload_positions)],
        positions=report.payload_positions,
        n=code_s.n,
        distortion=D,
        measured_distortion=quantized.distortion,
        report=report,
    )
    return payload, quantized


def wyner_ziv_decode(
    code_c: CodeSpec,
    payload: WynerZivPayload,
    y: np.ndarray,
    p: float,
    use_measured_distortion: bool = False,
    orientation: str = "dual",
    config: Optional[Config] = None,
) -> np.ndarray:
    """Estimate the reconstruction from the payload and side information y.

    SC decodes with frozen set F_c plus the payload positions; payload
    positions take the transmitted bits and the rest of F_c takes 0. The
    observations are y through BSC(D * p), with the measured D on request.
    """
    aligned = align_orientation(code_c, orientation)
    side = np.asarray(y, dtype=np.uint8)
    frozen = sorted(set(aligned.frozen) | set(payload.positions))
    decoder_code = CodeSpec(n=aligned.n, frozen=tuple(frozen), orientation=orientation)
    blocks = np.zeros(side.shape, dtype=np.uint8)
    blocks[..., list(payload.positions)] = payload.bits
    D = payload.distortion
    if use_measured_distortion and payload.measured_distortion is not None:
        D = np.asarray(payload.measured_distortion, dtype=np.float64)
        logger.debug("wyner-ziv decoder uses measured distortion")
    q = np.clip(bsc_convolution(D, p), 1e-12, 0.5)
    magnitude = np.log((1.0 - q) / q)
    if np.ndim(magnitude):
        magnitude = np.asarray(magnitude)[..., None]
    obs = SoftBlock((1.0 - 2.0 * side) * magnitude)
    result = sc_decode_detailed(decoder_code, obs, frozen_blocks=blocks, config=config)
    return result.codeword
