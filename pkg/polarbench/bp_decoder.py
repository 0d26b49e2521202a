"""Belief propagation on the polar trellis, multi-trellis BP, MAP over the BEC and an ML oracle.

Trellis levels run from 0 (u side) to n (x side). Section s joins level s to
level s + 1 with N/2 Z-shaped subgraphs pairing j and j' = j | 2^h, where h is
the index bit the section acts on. A section permutation lists those bits
starting from the x side, so the identity (0, 1, ..., n-1) puts bit 0 next to
the channel. That is the trellis standard-order SC decodes on.

BEC observations run erasure-exact ternary messages (+1, -1, 0 = erased)
to the fixed point. Other channels run LLR messages for a bounded number of
rounds.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .channels import SoftBlock
from .config import Config
from .construction import CodeSpec, enumerate_codewords, message_blocks, reflect_code
from .exceptions import InvalidInputError, OracleRefusedError
from .gf2 import gf2_solve
from .sc_decoder import _batched, _boxplus

SCHEDULES = ("x-first", "u-first")


def cyclic_trellises(n: int) -> List[Tuple[int, ...]]:
    """The n cyclic rotations of (0, ..., n-1), identity first."""
    if n < 0:
        raise InvalidInputError(f"Block exponent must be non-negative, got {n}")
    if n == 0:
        return [()]
    return [tuple((k + s) % n for k in range(n)) for s in range(n)]


@dataclass(frozen=True)
class TrellisGraph:
    """n sections of Z subgraphs in the order given by ``section_permutation``."""

    n: int
    section_permutation: Tuple[int, ...]

    def __post_init__(self) -> None:
        perm = tuple(int(b) for b in self.section_permutation)
        if sorted(perm) != list(range(self.n)):
            raise InvalidInputError(f"{perm} is not a permutation of range({self.n})")
        object.__setattr__(self, "section_permutation", perm)

    @property
    def N(self) -> int:
        return 1 << self.n

    def section_bit(self, s: int) -> int:
        """Index bit acted on by section s (s = 0 touches the u side)."""
        return self.section_permutation[self.n - 1 - s]

    def z_pairs(self, s: int) -> Tuple[np.ndarray, np.ndarray]:
        """The N/2 (j, j') pairs of section s."""
        h = self.section_bit(s)
        idx = np.arange(self.N)
        j = idx[((idx >> h) & 1) == 0]
        return j, j | (1 << h)

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Run u through the sections from the u side to the x side."""
        v = np.array(u, dtype=np.uint8, copy=True)
        for s in range(self.n):
            top, bottom = _pair_views(v, self.section_bit(s))
            top ^= bottom
        return v


def _pair_views(arr: np.ndarray, h: int) -> Tuple[np.ndarray, np.ndarray]:
    view = arr.reshape(arr.shape[:-1] + (-1, 2, 1 << h))
    return view[..., 0, :], view[..., 1, :]


@dataclass
class MessageState:
    """Left (toward u) and right (toward x) messages at every level of one trellis."""

    left: np.ndarray
    right: np.ndarray
    rounds: int = 0

    @classmethod
    def empty(cls, n: int, batch: int, N: int, dtype: type) -> "MessageState":
        shape = (n + 1, batch, N)
        return cls(left=np.zeros(shape, dtype=dtype), right=np.zeros(shape, dtype=dtype))


@dataclass
class BpResult:
    bits: np.ndarray
    resolved: np.ndarray
    rounds: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


class _Messages:
    """Check (f) and variable (plus) operations of one message alphabet."""

    def __init__(self, ternary: bool, clip: float) -> None:
        self.ternary = ternary
        self.clip = clip
        self.dtype: type = np.int8 if ternary else np.float64

    def f(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a * b if self.ternary else _boxplus(a, b)

    def plus(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.ternary:
            return np.sign(a + b).astype(np.int8)
        return np.clip(a + b, -self.clip, self.clip)


class _BpEngine:
    def __init__(
        self,
        code: CodeSpec,
        trellises: Sequence[TrellisGraph],
        ops: _Messages,
        schedule: str,
    ) -> None:
        self.code = code
        self.trellises = list(trellises)
        self.ops = ops
        self.schedule = schedule

    def _update_left(self, st: MessageState, trellis: TrellisGraph, s: int) -> bool:
        ops = self.ops
        h = trellis.section_bit(s)
        lr_j, lr_k = _pair_views(st.left[s + 1], h)
        rl_j, rl_k = _pair_views(st.right[s], h)
        out_j, out_k = _pair_views(st.left[s], h)
        new_j = ops.f(lr_j, ops.plus(lr_k, rl_k))
        new_k = ops.plus(ops.f(rl_j, lr_j), lr_k)
        changed = bool(np.any(new_j != out_j) or np.any(new_k != out_k))
        out_j[...] = new_j
        out_k[...] = new_k
        return changed

    def _update_right(self, st: MessageState, trellis: TrellisGraph, s: int) -> bool:
        ops = self.ops
        h = trellis.section_bit(s)
        lr_j, lr_k = _pair_views(st.left[s + 1], h)
        rl_j, rl_k = _pair_views(st.right[s], h)
        out_j, out_k = _pair_views(st.right[s + 1], h)
        new_j = ops.f(rl_j, ops.plus(lr_k, rl_k))
        new_k = ops.plus(ops.f(rl_j, lr_j), rl_k)
        changed = bool(np.any(new_j != out_j) or np.any(new_k != out_k))
        out_j[...] = new_j
        out_k[...] = new_k
        return changed

    def round(self, st: MessageState, trellis: TrellisGraph) -> bool:
        n = trellis.n
        changed = False
        left_pass = [lambda s=s: self._update_left(st, trellis, s) for s in range(n - 1, -1, -1)]
        right_pass = [lambda s=s: self._update_right(st, trellis, s) for s in range(n)]
        passes = left_pass + right_pass if self.schedule == "x-first" else right_pass + left_pass
        for update in passes:
            changed |= update()
        st.rounds += 1
        return changed

    def _exchange(
        self, states: List[MessageState], t: int, prior: np.ndarray, channel: np.ndarray
    ) -> bool:
        ops = self.ops
        n = self.trellises[t].n
        u_side, x_side = prior, channel
        for other, st in enumerate(states):
            if other != t:
                u_side = ops.plus(u_side, st.left[0])
                x_side = ops.plus(x_side, st.right[n])
        mine = states[t]
        changed = bool(np.any(mine.right[0] != u_side) or np.any(mine.left[n] != x_side))
        mine.right[0] = u_side
        mine.left[n] = x_side
        return changed

    def belief(self, states: List[MessageState], prior: np.ndarray) -> np.ndarray:
        total = prior
        for st in states:
            total = self.ops.plus(total, st.left[0])
        return total

    def run(
        self,
        prior: np.ndarray,
        channel: np.ndarray,
        max_rounds: int,
        stable_rounds: Optional[int],
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Sweep up to ``max_rounds`` times; ``stable_rounds=None`` always runs them all."""
        n = self.code.n
        batch, N = channel.shape
        states = [MessageState.empty(n, batch, N, self.ops.dtype) for _ in self.trellises]
        info = ~self.code.frozen_mask
        final = np.zeros((batch, N), dtype=self.ops.dtype)
        done = np.zeros(batch, dtype=bool)
        rounds = np.zeros(batch, dtype=np.int64)
        previous: Optional[np.ndarray] = None
        streak = np.zeros(batch, dtype=np.int64)
        for r in range(max_rounds):
            changed = False
            for t, trellis in enumerate(self.trellises):
                changed |= self._exchange(states, t, prior, channel)
                changed |= self.round(states[t], trellis)
            total = self.belief(states, prior)
            rounds[~done] = r + 1
            if self.ops.ternary:
                final = total
                if not changed:
                    break
                continue
            if stable_rounds is None:
                continue
            hard = (total < 0) & info
            if previous is not None:
                same = np.all(hard == previous, axis=1)
                streak = np.where(same, streak + 1, 0)
            previous = hard
            newly = (~done) & (streak >= stable_rounds)
            final[newly] = total[newly]
            done |= newly
            if done.all():
                break
        else:
            if self.ops.ternary:
                logger.warning("BEC BP hit the round limit {} before its fixed point", max_rounds)
        if not self.ops.ternary:
            final[~done] = self.belief(states, prior)[~done]
            if stable_rounds is not None and not done.all():
                logger.debug("{} of {} BP trials did not settle", int((~done).sum()), batch)
        return final, rounds


def _chunk_size(config: Config, n: int, N: int, copies: int) -> int:
    return max(1, (config.BATCH_ELEMENTS * 8) // ((n + 1) * N * copies))


def bp_decode_detailed(
    code: CodeSpec,
    obs: SoftBlock,
    trellises: Optional[Sequence[Sequence[int]]] = None,
    max_rounds: Optional[int] = None,
    schedule: str = "x-first",
    config: Optional[Config] = None,
    early_stop: Optional[bool] = None,
) -> BpResult:
    """BP with frozen bits as permanent priors; returns decisions and resolution mask.

    ``schedule="x-first"`` sweeps sections from the x side to the u side and
    back; ``"u-first"`` starts from the u side.

    LLR mode runs exactly ``max_rounds`` sweeps. Without ``max_rounds`` it
    runs up to ``BP_MAX_ROUNDS`` and stops a block once its hard decisions
    held for ``BP_STABLE_ROUNDS`` sweeps; ``early_stop`` overrides that choice.
    """
    config = config or Config()
    if schedule not in SCHEDULES:
        raise InvalidInputError(f"Unknown schedule '{schedule}'")
    if code.orientation == "dual":
        # Same code on reversed coordinates, primal orientation
        mirrored = reflect_code(code)
        result = bp_decode_detailed(
            mirrored, obs[..., ::-1], trellises, max_rounds, schedule, config, early_stop
        )
        return BpResult(result.bits[..., ::-1], result.resolved[..., ::-1], result.rounds)
    batch_obs, single = _batched(obs)
    n, N = code.n, code.N
    if batch_obs.length != N:
        raise InvalidInputError(f"Expected observations of length {N}")
    graphs = [TrellisGraph(n, tuple(p)) for p in (trellises or [tuple(range(n))])]
    if not graphs:
        raise InvalidInputError("BP needs at least one trellis")
    ternary = batch_obs.is_bec
    ops = _Messages(ternary, config.LLR_CLIP)
    if ternary:
        channel_all = batch_obs.ternary()
        prior_row = np.where(code.frozen_mask, 1 - 2 * code.frozen_block.astype(np.int8), 0)
        limit = max_rounds or config.BP_BEC_MAX_ROUNDS
    else:
        channel_all = np.clip(batch_obs.values, -config.LLR_CLIP, config.LLR_CLIP)
        signs = 1.0 - 2.0 * code.frozen_block
        prior_row = np.where(code.frozen_mask, signs * config.LLR_CLIP, 0.0)
        limit = max_rounds or config.BP_MAX_ROUNDS
    prior_row = prior_row.astype(ops.dtype)
    engine = _BpEngine(code, graphs, ops, schedule)
    if early_stop is None:
        early_stop = max_rounds is None
    stable = config.BP_STABLE_ROUNDS if early_stop else None
    total = channel_all.shape[0]
    step = _chunk_size(config, n, N, len(graphs))
    beliefs, rounds = [], []
    for start in range(0, total, step):
        chunk = channel_all[start : start + step]
        prior = np.broadcast_to(prior_row, chunk.shape).astype(ops.dtype)
        belief, used = engine.run(prior, chunk.astype(ops.dtype), limit, stable)
        beliefs.append(belief)
        rounds.append(used)
    belief = np.concatenate(beliefs) if beliefs else np.zeros((0, N), ops.dtype)
    bits = np.where(code.frozen_mask, code.frozen_block, (belief < 0).astype(np.uint8))
    resolved = code.frozen_mask | (belief != 0)
    used_rounds = np.concatenate(rounds) if rounds else np.zeros(0, np.int64)
    result = BpResult(bits.astype(np.uint8), resolved, used_rounds)
    if single:
        return BpResult(result.bits[0], result.resolved[0], result.rounds)
    return result


def bp_decode(
    code: CodeSpec,
    obs: SoftBlock,
    trellises: Optional[Sequence[Sequence[int]]] = None,
    max_rounds: Optional[int] = None,
    schedule: str = "x-first",
    config: Optional[Config] = None,
    early_stop: Optional[bool] = None,
) -> np.ndarray:
    """Hard decisions on u after BP over one or more trellises."""
    return bp_decode_detailed(code, obs, trellises, max_rounds, schedule, config, early_stop).bits


@dataclass
class MapBecSystem:
    """x_j = sum_i G[i, j] u_i for every unerased j, unknowns the information bits."""

    matrix: np.ndarray
    rhs: np.ndarray
    unknowns: Tuple[int, ...]


@dataclass
class MapDecodeResult:
    bits: Optional[np.ndarray]
    ambiguous: bool
    rank: int


def _generator_entries(code: CodeSpec, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    r = rows[:, None]
    c = cols[None, :]
    if code.orientation == "dual":
        return ((r & c) == r).astype(np.uint8)
    return ((r & c) == c).astype(np.uint8)


def map_system(code: CodeSpec, obs: SoftBlock) -> MapBecSystem:
    """Linear system over GF(2) for one BEC observation."""
    if not obs.is_bec or obs.values.ndim != 1:
        raise InvalidInputError("MAP over the BEC needs a single BEC observation block")
    if obs.length != code.N:
        raise InvalidInputError(f"Expected observations of length {code.N}")
    t = obs.ternary()
    known = np.flatnonzero(t != 0)
    x_known = (t[known] < 0).astype(np.uint8)
    info = np.array(code.information, dtype=np.int64)
    frozen = np.array(code.frozen, dtype=np.int64)
    matrix = _generator_entries(code, info, known).T
    offset = np.zeros(known.size, dtype=np.uint8)
    if frozen.size and known.size:
        values = np.array(code.frozen_values, dtype=np.int64)
        offset = (values @ _generator_entries(code, frozen, known) % 2).astype(np.uint8)
    return MapBecSystem(matrix=matrix, rhs=x_known ^ offset, unknowns=tuple(code.information))


def map_decode_bec(code: CodeSpec, obs: SoftBlock) -> MapDecodeResult:
    """Exact MAP block decision on the BEC: the unique consistent u, or ambiguous."""
    system = map_system(code, obs)
    solution, rank, consistent = gf2_solve(system.matrix, system.rhs)
    if not consistent:
        raise InvalidInputError("Observations are inconsistent with every codeword")
    if solution is None:
        return MapDecodeResult(bits=None, ambiguous=True, rank=rank)
    bits = code.frozen_block.copy()
    bits[list(system.unknowns)] = solution
    return MapDecodeResult(bits=bits, ambiguous=False, rank=rank)


def ml_oracle(code: CodeSpec, obs: SoftBlock, config: Optional[Config] = None) -> np.ndarray:
    """Exhaustive maximum-likelihood u; ties go to the lexicographically smallest u.

    BEC observations score a codeword by its disagreements with the unerased
    positions, other channels by the correlation sum((1 - 2x) * llr).
    Codewords are scored ``ML_ORACLE_CHUNK`` at a time.
    """
    config = config or Config()
    if code.K > config.ML_ORACLE_MAX_K:
        raise OracleRefusedError(code.K, config.ML_ORACLE_MAX_K)
    if obs.values.ndim != 1 or obs.length != code.N:
        raise InvalidInputError(f"Expected one observation block of length {code.N}")
    if obs.is_bec:
        t = obs.ternary()
        known = t != 0
        target = (t < 0).astype(np.uint8)
    else:
        llr = np.clip(obs.values, -config.LLR_CLIP, config.LLR_CLIP)
    best_message, best_score = 0, -np.inf
    total = 1 << code.K
    for start in range(0, total, config.ML_ORACLE_CHUNK):
        stop = min(total, start + config.ML_ORACLE_CHUNK)
        words = enumerate_codewords(code, config.ML_ORACLE_MAX_K, start, stop)
        if obs.is_bec:
            scores = -np.count_nonzero((words != target) & known, axis=1).astype(np.float64)
        else:
            scores = (1.0 - 2.0 * words) @ llr
        k = int(np.argmax(scores))
        if scores[k] > best_score:
            best_message, best_score = start + k, float(scores[k])
    return message_blocks(code, best_message, best_message + 1)[0]
