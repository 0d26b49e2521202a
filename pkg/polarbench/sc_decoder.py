"""Successive cancellation decoding in O(N log N).

The decoder works in a "layout" where the bits are visited left to right: position k
of the layout holds code index ``decoding_order(n, order)[k]``. Because
G2^(x)n commutes with bit reversal, standard-order SC on the generator is
natural-order SC on the bit-reversed layout. The dual order on the transposed
generator additionally reverses the index order. Both permutations are
involutions.

Two kernels share the recursion: an LLR kernel (exact box-plus) and an
erasure-exact ternary kernel for BEC observations with values +1 (bit 0
known), -1 (bit 1 known) and 0 (erased). Ties decide 0.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .channels import SoftBlock
from .config import Config
from .construction import CodeSpec
from .exceptions import InvalidInputError
from .polar_core import bit_reversal_permutation, polar_transform

ORDERS = ("standard", "dual")


def decoding_order(n: int, order: str = "standard") -> np.ndarray:
    """Code indices in the order SC decides them: pi(0..N-1) or pi(N-1..0)."""
    pi = bit_reversal_permutation(n)
    if order == "standard":
        return np.array(pi)
    if order == "dual":
        return (1 << n) - 1 - pi
    raise InvalidInputError(f"Unknown decoding order '{order}'")


@dataclass
class ScResult:
    """Decisions of one SC pass, all arrays indexed by code index."""

    bits: np.ndarray
    codeword: np.ndarray
    resolved: np.ndarray
    genie_errors: Optional[np.ndarray] = None


@dataclass
class GenieReport:
    """Per-bit errors of genie-aided SC, earlier decisions forced to the truth."""

    first_error_index: Optional[int]
    per_bit_error_flags: np.ndarray


def _boxplus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact 2 atanh(tanh(a/2) tanh(b/2)) in a form that stays finite."""
    return (
        np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        + np.log1p(np.exp(-np.abs(a + b)))
        - np.log1p(np.exp(-np.abs(a - b)))
    )


class ScContext:
    """Working state for SC decoding one code over a batch of observations."""

    def __init__(
        self, code: CodeSpec, order: Optional[str] = None, config: Optional[Config] = None
    ) -> None:
        natural = "dual" if code.orientation == "dual" else "standard"
        order = order or natural
        if order not in ORDERS:
            raise InvalidInputError(f"Unknown decoding order '{order}'")
        if order != natural:
            raise InvalidInputError(
                f"A {code.orientation} code is decoded in the {natural} order, not '{order}'"
            )
        self.code = code
        self.order = order
        self.config = config or Config()
        self.perm = decoding_order(code.n, order)
        self._mask = code.frozen_mask[self.perm]
        self.llr_tree: List[np.ndarray] = []
        self.decisions: Optional[np.ndarray] = None
        self._vals = np.zeros((0, code.N), dtype=np.uint8)
        self._truth: Optional[np.ndarray] = None
        self._resolved = np.zeros((0, code.N), dtype=bool)
        self._errors = np.zeros((0, code.N), dtype=bool)
        self._ternary = False

    def _to_layout(self, arr: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(arr[..., self.perm])

    def _from_layout(self, arr: np.ndarray) -> np.ndarray:
        out = np.empty_like(arr)
        out[..., self.perm] = arr
        return out

    def run(
        self,
        obs: SoftBlock,
        frozen_blocks: Optional[np.ndarray] = None,
        truth: Optional[np.ndarray] = None,
    ) -> ScResult:
        """Decode a batch of observations of shape (B, N).

        ``frozen_blocks`` (B, N) overrides the code's frozen values per trial;
        ``truth`` (B, N) switches on genie mode.
        """
        N = self.code.N
        if obs.values.ndim != 2 or obs.length != N:
            raise InvalidInputError(f"Expected observations of shape (B, {N})")
        batch = obs.values.shape[0]
        self._ternary = obs.is_bec
        if self._ternary:
            top = self._to_layout(obs.ternary())
            dtype: type = np.int8
        else:
            clip = self.config.LLR_CLIP
            top = self._to_layout(np.clip(obs.values, -clip, clip))
            dtype = np.float64
        if frozen_blocks is None:
            frozen_blocks = np.broadcast_to(self.code.frozen_block, (batch, N))
        self._vals = self._to_layout(np.asarray(frozen_blocks, dtype=np.uint8))
        self._truth = None if truth is None else self._to_layout(np.asarray(truth, np.uint8))
        self._resolved = np.ones((batch, N), dtype=bool)
        self._errors = np.zeros((batch, N), dtype=bool)
        self.llr_tree = [top.astype(dtype, copy=False)] + [
            np.zeros((batch, N >> d), dtype=dtype) for d in range(1, self.code.n + 1)
        ]
        u, x = self._node(0, 0)
        self.decisions = self._from_layout(u)
        return ScResult(
            bits=self.decisions,
            codeword=self._from_layout(x),
            resolved=self._from_layout(self._resolved),
            genie_errors=None if truth is None else self._from_layout(self._errors),
        )

    def _node(self, depth: int, lo: int) -> Tuple[np.ndarray, np.ndarray]:
        L = self.llr_tree[depth]
        M = L.shape[-1]
        if self._mask[lo : lo + M].all():
            u = np.array(self._vals[:, lo : lo + M])
            return u, (polar_transform(u) if M > 1 else u)
        if M == 1:
            return self._leaf(lo, L[:, 0])
        h = M // 2
        a, b = L[:, :h], L[:, h:]
        child = self.llr_tree[depth + 1]
        child[...] = a * b if self._ternary else _boxplus(a, b)
        u1, x1 = self._node(depth + 1, lo)
        if self._ternary:
            sign = (1 - 2 * x1.astype(np.int8)).astype(np.int8)
            child[...] = np.sign(b + sign * a)
        else:
            child[...] = b + (1.0 - 2.0 * x1) * a
        u2, x2 = self._node(depth + 1, lo + h)
        return np.concatenate([u1, u2], axis=1), np.concatenate([x1 ^ x2, x2], axis=1)

    def _leaf(self, k: int, msg: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if self._mask[k]:
            u = self._vals[:, k].copy()
        else:
            u = (msg < 0).astype(np.uint8)
            self._resolved[:, k] = msg != 0
            if self._truth is not None:
                t = self._truth[:, k]
                self._errors[:, k] = (u != t) | (msg == 0)
                u = t.copy()
        u = u[:, None]
        return u, u


def _batched(obs: SoftBlock) -> Tuple[SoftBlock, bool]:
    if obs.values.ndim == 1:
        erasures = None if obs.erasures is None else obs.erasures[None, :]
        return SoftBlock(obs.values[None, :], erasures), True
    return obs, False


def sc_decode_detailed(
    code: CodeSpec,
    obs: SoftBlock,
    frozen_blocks: Optional[np.ndarray] = None,
    config: Optional[Config] = None,
) -> ScResult:
    """SC decisions plus codeword estimate and the per-bit resolution mask.

    A bit is resolved when its decision message was not a tie; on the BEC an
    unresolved information bit means SC had to guess.
    """
    batch, single = _batched(obs)
    if frozen_blocks is not None and single:
        frozen_blocks = np.asarray(frozen_blocks)[None, :]
    result = ScContext(code, config=config).run(batch, frozen_blocks=frozen_blocks)
    if single:
        return ScResult(result.bits[0], result.codeword[0], result.resolved[0])
    return result


def sc_decode(code: CodeSpec, obs: SoftBlock, config: Optional[Config] = None) -> np.ndarray:
    """Decide u in the code's SC order; frozen positions always carry the frozen values."""
    return sc_decode_detailed(code, obs, config=config).bits


def sc_decode_genie_batch(code: CodeSpec, obs: SoftBlock, truth: np.ndarray) -> np.ndarray:
    """Per-bit genie error flags for a batch, shape (B, N); ties count as errors."""
    batch, single = _batched(obs)
    truth = np.asarray(truth, dtype=np.uint8)
    if single:
        truth = truth[None, :]
    flags = ScContext(code).run(batch, truth=truth).genie_errors
    assert flags is not None
    return flags[0] if single else flags


def sc_decode_genie(code: CodeSpec, obs: SoftBlock, truth: np.ndarray) -> GenieReport:
    """Genie-aided SC on one block: each decision is judged, then forced to the truth."""
    frozen = code.frozen_block
    if np.any(np.asarray(truth)[code.frozen_mask] != frozen[code.frozen_mask]):
        raise InvalidInputError("Genie truth disagrees with the code's frozen values")
    flags = sc_decode_genie_batch(code, obs, truth)
    order = decoding_order(code.n, ScContext(code).order)
    first = next((int(i) for i in order if flags[i]), None)
    return GenieReport(first_error_index=first, per_bit_error_flags=flags)


def syndrome_frozen_blocks(code: CodeSpec, syndrome: np.ndarray) -> np.ndarray:
    """Spread syndrome bits (aligned with code.frozen) over full-length blocks."""
    syn = np.asarray(syndrome, dtype=np.uint8)
    if syn.shape[-1] != len(code.frozen):
        raise InvalidInputError(f"Syndrome must have {len(code.frozen)} bits")
    blocks = np.zeros(syn.shape[:-1] + (code.N,), dtype=np.uint8)
    blocks[..., list(code.frozen)] = syn
    return blocks


def constant_observation(prior_llr: float, shape: Tuple[int, ...]) -> SoftBlock:
    """All-zero observed word with the given per-position LLR."""
    if np.isinf(prior_llr):
        return SoftBlock.from_ternary(np.full(shape, 1 if prior_llr > 0 else -1, np.int8))
    return SoftBlock(np.full(shape, float(prior_llr)))


def sc_source_decode(
    code: CodeSpec, syndrome: np.ndarray, prior_llr: float, config: Optional[Config] = None
) -> np.ndarray:
    """Estimate the source block(s) whose syndrome is given, under a Ber(p) prior.

    SC runs with the syndrome as frozen values and every observation equal to
    ``prior_llr`` = log((1-p)/p); the estimate is the resulting codeword.
    """
    blocks = syndrome_frozen_blocks(code, syndrome)
    obs = constant_observation(prior_llr, blocks.shape)
    return sc_decode_detailed(code, obs, frozen_blocks=blocks, config=config).codeword


def sc_quantize_dual(
    dual: CodeSpec, target: SoftBlock, config: Optional[Config] = None
) -> np.ndarray:
    """Dual-order SC against soft evidence about the source word; returns u.

    Frozen positions take the frozen values (zero); free positions take the
    hard SC decision. The reconstruction is ``encode(dual, u)``.
    """
    if dual.orientation != "dual":
        raise InvalidInputError("sc_quantize_dual needs a dual-orientation code")
    return sc_decode_detailed(dual, target, config=config).bits
