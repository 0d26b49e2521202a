"""Code construction: frozen-set rules, Z-parameter profiles, duals and minimum distance."""

import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

try:
    import jsonschema
except ImportError:
    jsonschema = None  # type: ignore[assignment]

from .channels import (
    CONSTRUCTION_STREAM,
    ChannelParam,
    channel_sample,
    stack_soft_blocks,
    trial_rng,
)
from .config import Config
from .exceptions import InvalidInputError, OracleRefusedError
from .polar_core import index_weights, polar_transform, transpose_transform

RULES = ("arikan", "rm", "explicit")
ORIENTATIONS = ("primal", "dual")
CONSTRUCTION_METHODS = ("genie", "bhattacharyya")

CODESPEC_SCHEMA_PATH = Path(__file__).parent / "core" / "codespec.schema.json"


@dataclass(frozen=True)
class CodeSpec:
    """One polar (or RM) code: block exponent, frozen set and frozen values.

    ``frozen`` is kept sorted ascending and ``frozen_values`` is aligned with it.
    A ``dual`` orientation code uses the transposed generator and is decoded in
    the dual order.
    """

    n: int
    frozen: Tuple[int, ...] = ()
    frozen_values: Tuple[int, ...] = field(default=())
    rule: str = "explicit"
    orientation: str = "primal"

    def __post_init__(self) -> None:
        if self.n < 0:
            raise InvalidInputError(f"Block exponent must be non-negative, got {self.n}")
        frozen = tuple(int(i) for i in self.frozen)
        values = tuple(int(v) for v in self.frozen_values) or (0,) * len(frozen)
        if len(values) != len(frozen):
            raise InvalidInputError("frozen_values must have one entry per frozen index")
        if len(set(frozen)) != len(frozen):
            raise InvalidInputError("Frozen indices must be distinct")
        if any(not 0 <= i < self.N for i in frozen):
            raise InvalidInputError(f"Frozen index outside [0, {self.N})")
        if any(v not in (0, 1) for v in values):
            raise InvalidInputError("Frozen values must be bits")
        if self.rule not in RULES:
            raise InvalidInputError(f"Unknown rule '{self.rule}'")
        if self.orientation not in ORIENTATIONS:
            raise InvalidInputError(f"Unknown orientation '{self.orientation}'")
        order = sorted(range(len(frozen)), key=lambda k: frozen[k])
        object.__setattr__(self, "frozen", tuple(frozen[k] for k in order))
        object.__setattr__(self, "frozen_values", tuple(values[k] for k in order))

    @classmethod
    def from_information(
        cls,
        n: int,
        information: Iterable[int],
        rule: str = "explicit",
        orientation: str = "primal",
    ) -> "CodeSpec":
        info = set(int(i) for i in information)
        frozen = tuple(i for i in range(1 << n) if i not in info)
        return cls(n=n, frozen=frozen, rule=rule, orientation=orientation)

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def K(self) -> int:
        return self.N - len(self.frozen)

    @property
    def rate(self) -> float:
        return self.K / self.N

    @property
    def information(self) -> Tuple[int, ...]:
        frozen = set(self.frozen)
        return tuple(i for i in range(self.N) if i not in frozen)

    @property
    def frozen_mask(self) -> np.ndarray:
        mask = np.zeros(self.N, dtype=bool)
        mask[list(self.frozen)] = True
        return mask

    @property
    def frozen_block(self) -> np.ndarray:
        """Length-N block holding the frozen values on F and 0 elsewhere."""
        block = np.zeros(self.N, dtype=np.uint8)
        block[list(self.frozen)] = self.frozen_values
        return block

    def with_frozen_values(self, values: Sequence[int]) -> "CodeSpec":
        return CodeSpec(self.n, self.frozen, tuple(values), self.rule, self.orientation)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "frozen": list(self.frozen),
            "frozen_values": list(self.frozen_values),
            "rule": self.rule,
            "orientation": self.orientation,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CodeSpec":
        validate_codespec_document(data)
        try:
            return cls(
                n=int(data["n"]),
                frozen=tuple(data["frozen"]),
                frozen_values=tuple(data.get("frozen_values") or ()),
                rule=data.get("rule", "explicit"),
                orientation=data.get("orientation", "primal"),
            )
        except (KeyError, TypeError) as e:
            raise InvalidInputError(f"Malformed CodeSpec document: {e}") from e

    @classmethod
    def from_json(cls, text: str) -> "CodeSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidInputError(f"CodeSpec is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise InvalidInputError("CodeSpec JSON must be an object")
        return cls.from_dict(data)


@lru_cache(maxsize=1)
def _codespec_schema() -> Dict[str, Any]:
    with open(CODESPEC_SCHEMA_PATH, "r") as f:
        result = json.load(f)
        return result if isinstance(result, dict) else {}


def validate_codespec_document(data: Dict[str, Any]) -> None:
    """Check a CodeSpec document against codespec.schema.json."""
    if jsonschema is None:
        return
    try:
        jsonschema.validate(data, _codespec_schema())
    except jsonschema.exceptions.ValidationError as e:
        raise InvalidInputError(f"CodeSpec schema validation error: {e.message}") from e


def save_codespec(code: CodeSpec, path: str) -> None:
    Path(path).write_text(code.to_json() + "\n")


def load_codespec(path: str) -> CodeSpec:
    return CodeSpec.from_json(Path(path).read_text())


def encode(code: CodeSpec, u: np.ndarray) -> np.ndarray:
    """Map u-blocks to codewords with the generator of the code's orientation."""
    if code.orientation == "dual":
        return transpose_transform(u)
    return polar_transform(u)


@dataclass
class ZProfile:
    """Per-index Z parameters of one orientation, seeded with ``init``."""

    values: np.ndarray
    init: float
    orientation: str = "primal"

    @property
    def n(self) -> int:
        return int(self.values.size).bit_length() - 1


def z_profile_bec(eps: float, n: int, orientation: str = "primal") -> ZProfile:
    """Z recursion over the bits of each index, least significant bit first.

    Primal: a one bit squares Z, a zero bit maps Z to 1 - (1 - Z)^2. The dual
    recursion swaps the two cases. Seeded with the erasure probability ``eps``
    the primal entries are the exact per-bit erasure probabilities of SC
    decoding in the standard order, and the dual entries those of dual-order
    SC on the transposed generator.

    Z and 1 - Z are carried side by side and updated by products only, so
    both keep full relative precision near 0 and near 1.
    """
    if not 0.0 <= eps <= 1.0:
        raise InvalidInputError(f"Erasure probability must lie in [0, 1], got {eps}")
    if orientation not in ORIENTATIONS:
        raise InvalidInputError(f"Unknown orientation '{orientation}'")
    idx = np.arange(1 << n)
    z = np.full(1 << n, float(eps))
    zc = np.full(1 << n, 1.0 - float(eps))
    square_on = 1 if orientation == "primal" else 0
    for k in range(n):
        square = ((idx >> k) & 1) == square_on
        z, zc = (
            np.where(square, z * z, z * (1.0 + zc)),
            np.where(square, zc * (1.0 + z), zc * zc),
        )
    return ZProfile(values=z, init=float(eps), orientation=orientation)


def _z_profile_bound(z0: float, n: int) -> np.ndarray:
    """Bhattacharyya-bound recursion: 2Z - Z^2 on a zero bit, Z^2 on a one bit."""
    idx = np.arange(1 << n)
    z = np.full(1 << n, float(z0))
    for k in range(n):
        bit = (idx >> k) & 1
        z = np.where(bit == 1, z * z, np.minimum(1.0, 2.0 * z - z * z))
    return z


def _genie_error_rates(channel: ChannelParam, n: int, trials: int, seed: int) -> np.ndarray:
    """Per-bit first-decision error frequencies of genie-aided SC, all-zero codeword."""
    from .sc_decoder import sc_decode_genie_batch

    N = 1 << n
    rate1 = CodeSpec(n=n)
    batch = Config().batch_size(N)
    errors = np.zeros(N, dtype=np.int64)
    zeros = np.zeros(N, dtype=np.uint8)
    for start in range(0, trials, batch):
        stop = min(trials, start + batch)
        obs = stack_soft_blocks(
            [
                channel_sample(channel, zeros, trial_rng(seed, CONSTRUCTION_STREAM, n, t))
                for t in range(start, stop)
            ]
        )
        truth = np.zeros((stop - start, N), dtype=np.uint8)
        errors += sc_decode_genie_batch(rate1, obs, truth).sum(axis=0)
    return errors / float(trials)


@lru_cache(maxsize=64)
def _reliability_scores(
    channel: ChannelParam, n: int, method: str, trials: int, seed: int
) -> Tuple[float, ...]:
    if channel.kind == "bec":
        return tuple(z_profile_bec(channel.value, n).values.tolist())
    if method == "bhattacharyya":
        return tuple(_z_profile_bound(channel.bhattacharyya, n).tolist())
    if method != "genie":
        raise InvalidInputError(
            f"Unknown construction method '{method}', expected one of {CONSTRUCTION_METHODS}"
        )
    logger.debug("genie construction for {} n={} trials={} seed={}", channel, n, trials, seed)
    return tuple(_genie_error_rates(channel, n, trials, seed).tolist())


def reliability_scores(
    channel: ChannelParam,
    n: int,
    method: str = "genie",
    trials: Optional[int] = None,
    seed: Optional[int] = None,
) -> np.ndarray:
    """Per-index score, lower is better: exact Z on the BEC, otherwise per ``method``."""
    trials = Config.CONSTRUCTION_TRIALS if trials is None else trials
    seed = Config.default_seed() if seed is None else seed
    if trials < 1:
        raise InvalidInputError("Construction needs at least one trial")
    return np.array(_reliability_scores(channel, n, method, trials, seed))


def reliability_order(
    channel: ChannelParam,
    n: int,
    method: str = "genie",
    trials: Optional[int] = None,
    seed: Optional[int] = None,
) -> np.ndarray:
    """All indices, best first; equal scores put the higher index first."""
    scores = reliability_scores(channel, n, method, trials, seed)
    idx = np.arange(1 << n)
    return np.lexsort((-idx, scores))


def _information_size(n: int, rate: float) -> int:
    if not 0.0 <= rate <= 1.0:
        raise InvalidInputError(f"Rate must lie in [0, 1], got {rate}")
    return int(np.floor((1 << n) * rate + 1e-9))


def construct_arikan(
    channel: ChannelParam,
    n: int,
    rate: float,
    method: str = "genie",
    trials: Optional[int] = None,
    seed: Optional[int] = None,
) -> CodeSpec:
    """Information set = the floor(2^n rate) most reliable indices for ``channel``.

    BEC codes use the exact Z profile. BSC and BAWGN codes use Monte Carlo
    genie-aided SC (``method="genie"``) or the Bhattacharyya bound recursion
    (``method="bhattacharyya"``). Codes of increasing rate are nested.
    """
    k = _information_size(n, rate)
    order = reliability_order(channel, n, method, trials, seed)
    code = CodeSpec.from_information(n, order[:k].tolist(), rule="arikan")
    logger.debug("arikan code {} n={} K={}", channel, n, k)
    return code


def construct_rm(n: int, rate: float) -> CodeSpec:
    """Information set = the floor(2^n rate) indices of largest weight.

    Equal weights put the larger index first.
    """
    k = _information_size(n, rate)
    weights = index_weights(n)
    idx = np.arange(1 << n)
    order = np.lexsort((-idx, -weights))
    return CodeSpec.from_information(n, order[:k].tolist(), rule="rm")


def dual_code(code: CodeSpec) -> CodeSpec:
    """Swap frozen and information roles and flip the orientation.

    The dual's frozen values are zero, so dual(dual(c)) == c for zero-frozen c.
    """
    orientation = "dual" if code.orientation == "primal" else "primal"
    return CodeSpec.from_information(code.n, code.frozen, rule=code.rule, orientation=orientation)


def reflect_code(code: CodeSpec) -> CodeSpec:
    """The same code on reversed coordinates, expressed in the other orientation."""
    last = code.N - 1
    orientation = "dual" if code.orientation == "primal" else "primal"
    return CodeSpec(
        n=code.n,
        frozen=tuple(last - i for i in code.frozen),
        frozen_values=code.frozen_values,
        rule=code.rule,
        orientation=orientation,
    )


def align_orientation(code: CodeSpec, orientation: str) -> CodeSpec:
    return code if code.orientation == orientation else reflect_code(code)


def min_distance(code: CodeSpec) -> int:
    """min over information indices of 2^wt(i)."""
    info = code.information
    if not info:
        raise InvalidInputError("Minimum distance of a code with empty information set")
    weights = index_weights(code.n)[list(info)]
    if code.orientation == "dual":
        weights = code.n - weights
    return int(1 << int(weights.min()))


def message_blocks(code: CodeSpec, start: int, stop: int) -> np.ndarray:
    """u-blocks for messages start..stop-1; I[0] carries the most significant message bit."""
    k = code.K
    info = np.array(code.information, dtype=np.int64)
    messages = np.arange(start, stop, dtype=np.int64)[:, None]
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)[None, :]
    u = np.tile(code.frozen_block, (stop - start, 1))
    if k:
        u[:, info] = ((messages >> shifts) & 1).astype(np.uint8)
    return u


def enumerate_codewords(
    code: CodeSpec,
    limit: int = Config.ML_ORACLE_MAX_K,
    start: int = 0,
    stop: Optional[int] = None,
) -> np.ndarray:
    """Codewords of messages start..stop-1 (all 2^K by default), in message order."""
    k = code.K
    if k > limit:
        raise OracleRefusedError(k, limit)
    stop = (1 << k) if stop is None else min(stop, 1 << k)
    return encode(code, message_blocks(code, start, stop))


def brute_force_min_distance(code: CodeSpec) -> int:
    """Minimum nonzero codeword weight by exhaustive enumeration."""
    if not code.information:
        raise InvalidInputError("Minimum distance of a code with empty information set")
    words = enumerate_codewords(code.with_frozen_values((0,) * len(code.frozen)))
    weights = words.sum(axis=1)
    return int(weights[weights > 0].min())


def min_distance_census_bound(n: int, k: int) -> int:
    """Largest d_min any polar code with k information bits can have: 2^t for the
    weight t with sum_{i>t} C(n,i) < k <= sum_{i>=t} C(n,i)."""
    if not 1 <= k <= (1 << n):
        raise InvalidInputError(f"Information size must lie in [1, 2^{n}]")
    above = 0
    for t in range(n, -1, -1):
        if above < k <= above + comb(n, t):
            return 1 << t
        above += comb(n, t)
    return 1


def min_distance_bound_check(n: int, rate: float) -> bool:
    """Check d_min of the RM-rule code against 2^ceil(n/2) (rate > 1/2) or the census bound."""
    if not rate > 0:
        raise InvalidInputError("Rate must be positive")
    code = construct_rm(n, rate)
    d = min_distance(code)
    if rate > 0.5:
        return d <= 1 << ((n + 1) // 2)
    return d <= min_distance_census_bound(n, code.K)


def sc_block_error_bounds(code: CodeSpec, eps: float) -> Tuple[float, float]:
    """(max, sum) of exact SC bit erasure probabilities over the information set."""
    if not code.information:
        return 0.0, 0.0
    z = z_profile_bec(eps, code.n, code.orientation).values[list(code.information)]
    return float(z.max()), float(min(1.0, z.sum()))


def map_erasure_lower_bound(code: CodeSpec, eps: float) -> float:
    """eps^d_min: erasing the support of a minimum-weight codeword defeats MAP."""
    return float(eps ** min_distance(code))


def erasure_quantization_failure_bound(code: CodeSpec, eps: float) -> float:
    """Sum over I of Z(1 - eps) for the BEC(1 - eps) code whose dual quantizes."""
    z = z_profile_bec(1.0 - eps, code.n, code.orientation).values[list(code.information)]
    return float(min(1.0, z.sum()))
