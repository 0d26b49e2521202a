"""Channel and source models, soft observations, entropy and distortion utilities."""

from dataclasses import dataclass
from typing import Any, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, optimize, special

from .exceptions import InvalidInputError

CHANNEL_KINDS = ("bec", "bsc", "bawgn")

# Third symbol of a ternary source block
ERASURE_SYMBOL = 2

Shape = Union[int, Tuple[int, ...]]

# Leading stream keys of the non-trial streams; sweep point indices stay below 2^32
CONSTRUCTION_STREAM = 1 << 32
PERMUTATION_STREAM = (1 << 32) + 1


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the stream identified by (seed, *key)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class ChannelParam:
    """A symmetric binary-input channel: BEC(eps), BSC(p) or BAWGN(sigma)."""

    kind: str
    value: float

    def __post_init__(self) -> None:
        if self.kind not in CHANNEL_KINDS:
            raise InvalidInputError(
                f"Unknown channel kind '{self.kind}', expected one of {', '.join(CHANNEL_KINDS)}"
            )
        if self.kind == "bawgn":
            if not self.value > 0:
                raise InvalidInputError(f"BAWGN sigma must be positive, got {self.value}")
        elif not 0.0 <= self.value <= 1.0:
            raise InvalidInputError(f"{self.kind.upper()} parameter must lie in [0, 1]")

    @classmethod
    def parse(cls, text: str) -> "ChannelParam":
        """Parse ``kind:value``, e.g. ``bec:0.5`` or ``bawgn:0.97865``."""
        kind, sep, value = text.strip().partition(":")
        if not sep:
            raise InvalidInputError(f"Channel must look like kind:value, got '{text}'")
        try:
            return cls(kind.lower(), float(value))
        except ValueError as e:
            if isinstance(e, InvalidInputError):
                raise
            raise InvalidInputError(f"Bad channel parameter in '{text}'") from e

    def __str__(self) -> str:
        return f"{self.kind}:{self.value:g}"

    @property
    def bhattacharyya(self) -> float:
        """Bhattacharyya parameter Z(W) of the channel."""
        if self.kind == "bec":
            return self.value
        if self.kind == "bsc":
            return float(2.0 * np.sqrt(self.value * (1.0 - self.value)))
        return float(np.exp(-1.0 / (2.0 * self.value**2)))

    @property
    def capacity(self) -> float:
        return capacity(self)


@dataclass
class SoftBlock:
    """Soft observations of a block, one LLR log(Pr(y|0)/Pr(y|1)) per position.

    BEC-derived blocks also carry an ``erasures`` mask; unerased positions then
    hold +inf or -inf and erased positions hold 0. Leading axes are a batch.
    """

    values: np.ndarray
    erasures: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.erasures is not None:
            self.erasures = np.asarray(self.erasures, dtype=bool)
            if self.erasures.shape != self.values.shape:
                raise InvalidInputError("Erasure mask and values must have the same shape")

    @property
    def is_bec(self) -> bool:
        return self.erasures is not None

    @property
    def length(self) -> int:
        return int(self.values.shape[-1])

    def ternary(self) -> np.ndarray:
        """Erasure-exact view: +1 (bit 0 known), -1 (bit 1 known), 0 (erased)."""
        signs = np.sign(self.values).astype(np.int8)
        if self.erasures is not None:
            signs[self.erasures] = 0
        return signs

    def hard_decisions(self) -> np.ndarray:
        """Sign decisions, 0 for non-negative values."""
        return (self.values < 0).astype(np.uint8)

    @classmethod
    def from_ternary(cls, ternary: np.ndarray) -> "SoftBlock":
        t = np.asarray(ternary, dtype=np.int8)
        values = np.where(t > 0, np.inf, np.where(t < 0, -np.inf, 0.0))
        return cls(values=values, erasures=t == 0)

    @classmethod
    def from_bits(cls, bits: np.ndarray, erasures: Optional[np.ndarray] = None) -> "SoftBlock":
        """Noiseless BEC observation of ``bits``, optionally with an erasure mask."""
        b = np.asarray(bits, dtype=np.uint8)
        mask = np.zeros(b.shape, dtype=bool) if erasures is None else np.asarray(erasures, bool)
        values = np.where(b == 0, np.inf, -np.inf)
        values[mask] = 0.0
        return cls(values=values, erasures=mask)

    def __getitem__(self, item: Any) -> "SoftBlock":
        erasures = None if self.erasures is None else self.erasures[item]
        return SoftBlock(values=self.values[item], erasures=erasures)


def stack_soft_blocks(blocks: Sequence[SoftBlock]) -> SoftBlock:
    """Stack single-block observations into one batch along a new leading axis."""
    values = np.stack([b.values for b in blocks])
    if all(b.erasures is not None for b in blocks):
        return SoftBlock(values, np.stack([b.erasures for b in blocks]))  # type: ignore[misc]
    return SoftBlock(values)


def _bpsk(x: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(x, dtype=np.float64)


def channel_sample(channel: ChannelParam, x: np.ndarray, rng: np.random.Generator) -> SoftBlock:
    """Pass the block(s) ``x`` through independent uses of ``channel``."""
    bits = np.asarray(x, dtype=np.uint8)
    if channel.kind == "bec":
        erased = rng.random(bits.shape) < channel.value
        return SoftBlock.from_bits(bits, erased)
    if channel.kind == "bsc":
        p = channel.value
        flips = (rng.random(bits.shape) < p).astype(np.uint8)
        received = bits ^ flips
        if p == 0.0:
            magnitude = np.inf
        elif p == 1.0:
            magnitude = -np.inf
        else:
            magnitude = float(np.log((1.0 - p) / p))
        return SoftBlock(values=_bpsk(received) * magnitude)
    sigma = channel.value
    y = _bpsk(bits) + sigma * rng.standard_normal(bits.shape)
    return SoftBlock(values=2.0 * y / sigma**2)


def bernoulli_block(p: float, length: Shape, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. Ber(p) bits."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"Bernoulli parameter must lie in [0, 1], got {p}")
    return (rng.random(length) < p).astype(np.uint8)


def ternary_source_block(eps: float, length: Shape, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. symbols over {0, 1, ERASURE_SYMBOL} with Pr(*) = eps and 0/1 equally likely."""
    if not 0.0 <= eps <= 1.0:
        raise InvalidInputError(f"Erasure probability must lie in [0, 1], got {eps}")
    erased = rng.random(length) < eps
    bits = (rng.random(length) < 0.5).astype(np.int8)
    return np.where(erased, np.int8(ERASURE_SYMBOL), bits).astype(np.int8)


def binary_entropy(p: Any) -> Any:
    """h2(p) in bits."""
    p = np.asarray(p, dtype=np.float64)
    if np.any((p < 0) | (p > 1)):
        raise InvalidInputError("Binary entropy needs p in [0, 1]")
    h = (special.entr(p) + special.entr(1.0 - p)) / np.log(2.0)
    return float(h) if h.ndim == 0 else h


def binary_entropy_inverse(h: float) -> float:
    """The p in [0, 1/2] with h2(p) = h."""
    if not 0.0 <= h <= 1.0:
        raise InvalidInputError(f"Entropy must lie in [0, 1], got {h}")
    if h == 0.0:
        return 0.0
    if h == 1.0:
        return 0.5
    return float(optimize.brentq(lambda p: binary_entropy(p) - h, 0.0, 0.5, xtol=1e-15))


def bsc_convolution(a: float, b: float) -> float:
    """Crossover of two cascaded BSCs: a(1-b) + (1-a)b."""
    return a * (1.0 - b) + (1.0 - a) * b


def capacity(channel: ChannelParam) -> float:
    """Capacity in bits per channel use."""
    if channel.kind == "bec":
        return 1.0 - channel.value
    if channel.kind == "bsc":
        return 1.0 - float(binary_entropy(channel.value))
    sigma = channel.value

    def integrand(y: float) -> float:
        density = np.exp(-((y - 1.0) ** 2) / (2 * sigma**2)) / (sigma * np.sqrt(2 * np.pi))
        return float(density * np.logaddexp(0.0, -2.0 * y / sigma**2) / np.log(2.0))

    loss, _ = integrate.quad(integrand, 1.0 - 12 * sigma, 1.0 + 12 * sigma, limit=200)
    return 1.0 - loss


def empirical_mutual_information(
    channel: ChannelParam, samples: int, rng: np.random.Generator
) -> float:
    """Monte Carlo estimate of I(X;Y) for uniform input, from the LLRs."""
    x = bernoulli_block(0.5, samples, rng)
    obs = channel_sample(channel, x, rng)
    signed = obs.values * _bpsk(x)
    with np.errstate(over="ignore"):
        loss = np.logaddexp(0.0, -signed) / np.log(2.0)
    return float(1.0 - np.mean(loss))


def _check_lengths(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[-1] != b.shape[-1]:
        raise InvalidInputError(f"Length mismatch: {a.shape[-1]} vs {b.shape[-1]}")


def hamming_distortion(a: np.ndarray, b: np.ndarray) -> Any:
    """Fraction of positions where a and b differ (per block for batches)."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    _check_lengths(a, b)
    d = np.mean(a != b, axis=-1)
    return float(d) if np.ndim(d) == 0 else d


def erasure_distortion(s: np.ndarray, b: np.ndarray) -> Any:
    """Fraction of unerased source positions that the reconstruction gets wrong."""
    s = np.asarray(s, dtype=np.int8)
    b = np.asarray(b, dtype=np.uint8)
    _check_lengths(s, b)
    d = np.mean((s != ERASURE_SYMBOL) & (s != b.astype(np.int8)), axis=-1)
    return float(d) if np.ndim(d) == 0 else d
