"""Seeded Monte Carlo experiments over channel and source coding schemes.

Every trial draws its randomness from ``trial_rng(seed, point, trial)``, where
``point`` indexes the (n, rate, parameter) sweep grid. Decoders and ``m``
values evaluated at the same point therefore see identical realizations.
Trials are decoded in fixed-size batches that may run on a thread pool; the
reduction is in trial order, so results do not depend on the thread count.
"""

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..bp_decoder import bp_decode_detailed, cyclic_trellises, map_decode_bec, ml_oracle
from ..channels import (
    ChannelParam,
    SoftBlock,
    bernoulli_block,
    channel_sample,
    hamming_distortion,
    stack_soft_blocks,
    ternary_source_block,
    trial_rng,
)
from ..config import Config
from ..construction import CodeSpec, construct_arikan, construct_rm, encode
from ..exceptions import ConfigError, InvalidInputError
from ..sc_decoder import sc_decode_detailed
from ..source_codecs import (
    PermutationFamily,
    compress_batch,
    erasure_quantize,
    erasure_quantizer_code,
    hamming_quantize,
    hamming_quantizer_code,
    nesting_report,
    slepian_wolf_decode,
    slepian_wolf_encode,
    wyner_ziv_codes,
    wyner_ziv_decode,
    wyner_ziv_encode,
)
from .stats import confidence_interval

CHANNEL_SCHEMES = {
    "channel-sc": "sc",
    "channel-bp": "bp",
    "channel-bp-multi": "bp-multi",
    "channel-map-bec": "map-bec",
    "channel-ml-oracle": "ml",
}
SOURCE_SCHEMES = ("lossless", "slepian-wolf", "erasure-quant", "hamming-quant", "wyner-ziv")
SCHEMES = tuple(CHANNEL_SCHEMES) + SOURCE_SCHEMES
DECODERS = tuple(CHANNEL_SCHEMES.values())

# Channel kind each source scheme's parameter is read as
SOURCE_CHANNEL_KIND = {
    "lossless": "bsc",
    "slepian-wolf": "bsc",
    "erasure-quant": "bec",
    "hamming-quant": "bsc",
    "wyner-ziv": "bsc",
}


@dataclass
class ExperimentConfig:
    """One experiment: a scheme and the explicit sweep lists it runs over.

    ``rates`` is the channel code rate for channel schemes and erasure
    quantization, and the source rate (|F| + m)/N for lossless and
    Slepian-Wolf coding. ``channel_params`` holds the channel parameter, the
    source crossover p, the erasure probability, the design distortion
    (hamming-quant) or the side-information crossover (wyner-ziv).
    ``distortions`` is the Wyner-Ziv design distortion sweep.
    """

    scheme: str
    n: List[int]
    rates: List[float] = field(default_factory=lambda: [0.5])
    rule: str = "arikan"
    channel_kind: str = "bec"
    channel_params: List[float] = field(default_factory=lambda: [0.5])
    m: List[int] = field(default_factory=lambda: [0])
    distortions: List[float] = field(default_factory=lambda: [0.2])
    trials: int = 1000
    seed: int = Config.DEFAULT_SEED
    max_rounds: int = Config.BP_MAX_ROUNDS
    construction_method: str = "genie"
    construction_trials: int = Config.CONSTRUCTION_TRIALS
    backoff: float = 0.0
    use_measured_distortion: bool = False
    source_bias: float = 0.5

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(
                f"Unknown scheme '{self.scheme}', expected one of {', '.join(SCHEMES)}"
            )
        if self.trials < 1:
            raise InvalidInputError(f"Trials must be at least 1, got {self.trials}")
        for name in ("n", "rates", "channel_params", "m", "distortions"):
            values = getattr(self, name)
            if isinstance(values, (int, float)):
                values = [values]
                setattr(self, name, values)
            if not list(values):
                raise ConfigError(f"Sweep '{name}' must not be empty")
        if self.rule not in ("arikan", "rm"):
            raise ConfigError(f"Unknown rule '{self.rule}'")
        if self.scheme in SOURCE_CHANNEL_KIND:
            self.channel_kind = SOURCE_CHANNEL_KIND[self.scheme]
        if self.scheme == "channel-map-bec" and self.channel_kind != "bec":
            raise ConfigError("The map-bec decoder needs a BEC channel")
        for value in self.channel_params:
            ChannelParam(self.channel_kind, float(value))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown experiment fields: {', '.join(unknown)}")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def points(self) -> List[Tuple[int, Any, float]]:
        """The sweep grid as (n, axis value, channel parameter); its index keys the RNG."""
        if self.scheme == "hamming-quant":
            axis: Sequence[Any] = [None]
        elif self.scheme == "wyner-ziv":
            axis = self.distortions
        else:
            axis = self.rates
        return [
            (int(n), a, float(c))
            for n, a, c in itertools.product(self.n, axis, self.channel_params)
        ]


@dataclass
class TrialSummary:
    """Failure count, estimate and 95% interval for one sweep point and decoder."""

    scheme: str
    n: int
    rate: float
    rule: str
    channel_kind: str
    channel_param: float
    decoder: str
    trials: int
    failures: int
    p_hat: float
    ci_low: float
    ci_high: float
    seed: int
    mean_distortion: Optional[float] = None
    distortion_std: Optional[float] = None
    wall_time: float = 0.0
    point_index: int = 0
    failure_flags: np.ndarray = field(
        default_factory=lambda: np.zeros(0, dtype=bool), repr=False, compare=False
    )

    @classmethod
    def from_flags(
        cls,
        flags: np.ndarray,
        distortions: Optional[np.ndarray] = None,
        **labels: Any,
    ) -> "TrialSummary":
        trials = int(flags.size)
        failures = int(np.count_nonzero(flags))
        low, high = confidence_interval(failures, trials)
        mean = std = None
        if distortions is not None and distortions.size:
            mean = float(np.mean(distortions))
            std = float(np.std(distortions))
        return cls(
            trials=trials,
            failures=failures,
            p_hat=failures / trials,
            ci_low=low,
            ci_high=high,
            mean_distortion=mean,
            distortion_std=std,
            failure_flags=np.asarray(flags, dtype=bool),
            **labels,
        )


@dataclass
class PairedComparison:
    """Per-decoder summaries at one point plus counts of (A fails, B succeeds) trials."""

    point: Tuple[int, Any, float]
    summaries: List[TrialSummary]
    dominance: Dict[Tuple[str, str], int]

    def violations(self, better: str, worse: str) -> int:
        """Trials where ``better`` failed although ``worse`` succeeded."""
        return self.dominance[(better, worse)]


# Per-batch result: failure flags and optional per-trial distortion
BatchResult = Tuple[np.ndarray, Optional[np.ndarray]]


def _build_channel_code(
    cfg: ExperimentConfig, n: int, rate: float, channel: ChannelParam
) -> CodeSpec:
    if cfg.rule == "rm":
        return construct_rm(n, rate)
    return construct_arikan(
        channel, n, rate, cfg.construction_method, cfg.construction_trials, cfg.seed
    )


def _channel_realizations(
    code: CodeSpec, channel: ChannelParam, seed: int, point: int, trials: range
) -> Tuple[np.ndarray, SoftBlock]:
    """Uniform information bits, their codewords and channel outputs, one trial per row."""
    info = list(code.information)
    truth = np.tile(code.frozen_block, (len(trials), 1))
    blocks = []
    for row, t in enumerate(trials):
        rng = trial_rng(seed, point, t)
        truth[row, info] = rng.integers(0, 2, size=len(info), dtype=np.uint8)
        blocks.append(channel_sample(channel, encode(code, truth[row]), rng))
    return truth, stack_soft_blocks(blocks)


def _decode_failures(
    decoder: str,
    code: CodeSpec,
    truth: np.ndarray,
    obs: SoftBlock,
    cfg: ExperimentConfig,
    config: Config,
) -> np.ndarray:
    """Block failure per trial: a wrong or unresolved information bit."""
    info = ~code.frozen_mask
    if decoder == "sc":
        result = sc_decode_detailed(code, obs, config=config)
        bits, resolved = result.bits, result.resolved
    elif decoder in ("bp", "bp-multi"):
        trellises = cyclic_trellises(code.n) if decoder == "bp-multi" else None
        bp = bp_decode_detailed(code, obs, trellises, cfg.max_rounds, config=config)
        bits, resolved = bp.bits, bp.resolved
    elif decoder == "map-bec":
        flags = np.zeros(truth.shape[0], dtype=bool)
        for row in range(truth.shape[0]):
            map_result = map_decode_bec(code, obs[row])
            flags[row] = map_result.ambiguous or not np.array_equal(map_result.bits, truth[row])
        return flags
    elif decoder == "ml":
        decided = np.stack([ml_oracle(code, obs[row], config) for row in range(truth.shape[0])])
        return np.any(decided != truth, axis=1)
    else:
        raise ConfigError(f"Unknown decoder '{decoder}', expected one of {', '.join(DECODERS)}")
    wrong = (bits != truth) | ~resolved
    return np.any(wrong & info, axis=1)


def _batches(total: int, size: int) -> List[range]:
    return [range(start, min(total, start + size)) for start in range(0, total, size)]


def _run_batches(
    work: Callable[[range], Any], trials: int, block_length: int, config: Config
) -> List[Any]:
    batches = _batches(trials, config.batch_size(block_length))
    if config.threads <= 1 or len(batches) <= 1:
        return [work(b) for b in batches]
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        return list(pool.map(work, batches))


def _concat(results: List[BatchResult]) -> BatchResult:
    flags = np.concatenate([r[0] for r in results])
    parts = [r[1] for r in results if r[1] is not None]
    return flags, (np.concatenate(parts) if parts else None)


class _PointRunner:
    """Runs the trials of one sweep point for one scheme."""

    def __init__(
        self, cfg: ExperimentConfig, config: Config, code: Optional[CodeSpec] = None
    ) -> None:
        self.cfg = cfg
        self.config = config
        self.code = code

    def _rng(self, index: int, trial: int) -> np.random.Generator:
        return trial_rng(self.cfg.seed, index, trial)

    def labels(self, index: int, n: int, rate: float, param: float, decoder: str) -> Dict[str, Any]:
        return {
            "scheme": self.cfg.scheme,
            "n": n,
            "rate": float(rate),
            "rule": self.cfg.rule,
            "channel_kind": self.cfg.channel_kind,
            "channel_param": param,
            "decoder": decoder,
            "seed": self.cfg.seed,
            "point_index": index,
        }

    def channel(
        self, index: int, point: Tuple[int, Any, float], decoders: Sequence[str]
    ) -> List[TrialSummary]:
        n, rate, param = point
        channel = ChannelParam(self.cfg.channel_kind, param)
        code = self.code or _build_channel_code(self.cfg, n, float(rate), channel)
        if "ml" in decoders and code.K > self.config.ML_ORACLE_MAX_K:
            raise ConfigError(
                f"ML oracle needs |I| <= {self.config.ML_ORACLE_MAX_K}, "
                f"point n={n} rate={rate} has {code.K}"
            )

        def work(trials: range) -> List[np.ndarray]:
            truth, obs = _channel_realizations(code, channel, self.cfg.seed, index, trials)
            return [
                _decode_failures(d, code, truth, obs, self.cfg, self.config) for d in decoders
            ]

        started = time.perf_counter()
        per_batch = _run_batches(work, self.cfg.trials, code.N, self.config)
        elapsed = time.perf_counter() - started
        summaries = []
        for k, decoder in enumerate(decoders):
            flags = np.concatenate([batch[k] for batch in per_batch])
            summary = TrialSummary.from_flags(flags, **self.labels(index, n, rate, param, decoder))
            summary.wall_time = elapsed
            summaries.append(summary)
        return summaries

    def lossless(self, index: int, point: Tuple[int, Any, float]) -> List[TrialSummary]:
        n, source_rate, p = point
        N = 1 << n
        summaries = []
        for m in self.cfg.m:
            channel_rate = 1.0 - float(source_rate) + m / N
            code = construct_arikan(
                ChannelParam("bsc", p), n, min(1.0, max(0.0, channel_rate)),
                self.cfg.construction_method, self.cfg.construction_trials, self.cfg.seed,
            )
            family = PermutationFamily(m=int(m), seed=self.cfg.seed, n=n)

            def work(trials: range) -> BatchResult:
                x = np.stack([bernoulli_block(p, N, self._rng(index, t)) for t in trials])
                blocks = compress_batch(code, x, p, family, self.config)
                return np.array([not b.success for b in blocks]), None

            summaries.append(self._summarize(work, N, index, n, source_rate, p, f"sc-m{m}"))
        return summaries

    def slepian_wolf(self, index: int, point: Tuple[int, Any, float]) -> List[TrialSummary]:
        n, source_rate, p = point
        N = 1 << n
        code = construct_arikan(
            ChannelParam("bsc", p), n, min(1.0, max(0.0, 1.0 - float(source_rate))),
            self.cfg.construction_method, self.cfg.construction_trials, self.cfg.seed,
        )

        def work(trials: range) -> BatchResult:
            xs, ys = [], []
            for t in trials:
                rng = self._rng(index, t)
                x = bernoulli_block(0.5, N, rng)
                xs.append(x)
                ys.append(x ^ bernoulli_block(p, N, rng))
            x_rows, y_rows = np.stack(xs), np.stack(ys)
            syn = slepian_wolf_encode(code, y_rows)
            y_hat = slepian_wolf_decode(code, x_rows, syn, p, self.config)
            return np.any(y_hat != y_rows, axis=1), None

        return [self._summarize(work, N, index, n, source_rate, p, "sc")]

    def erasure_quant(self, index: int, point: Tuple[int, Any, float]) -> List[TrialSummary]:
        n, rate, eps = point
        N = 1 << n
        dual = erasure_quantizer_code(eps, n, float(rate))

        def work(trials: range) -> BatchResult:
            s = np.stack([ternary_source_block(eps, N, self._rng(index, t)) for t in trials])
            result = erasure_quantize(dual, s, self.config)
            return ~np.asarray(result.success, dtype=bool), np.asarray(result.distortion)

        return [self._summarize(work, N, index, n, rate, eps, "sc-dual")]

    def hamming_quant(self, index: int, point: Tuple[int, Any, float]) -> List[TrialSummary]:
        n, _, D = point
        N = 1 << n
        dual = hamming_quantizer_code(
            D, n, self.cfg.construction_method, self.cfg.construction_trials, self.cfg.seed
        )
        bias = self.cfg.source_bias

        def work(trials: range) -> BatchResult:
            x = np.stack([bernoulli_block(bias, N, self._rng(index, t)) for t in trials])
            result = hamming_quantize(dual, x, D, self.config)
            distortion = np.asarray(result.distortion)
            return distortion > D, distortion

        return [self._summarize(work, N, index, n, dual.rate, D, "sc-dual:dist>D")]

    def wyner_ziv(self, index: int, point: Tuple[int, Any, float]) -> List[TrialSummary]:
        n, D, p = point
        N = 1 << n
        code_s, code_c = wyner_ziv_codes(
            float(D), p, n, self.cfg.backoff, self.cfg.construction_method,
            self.cfg.construction_trials, self.cfg.seed,
        )

        def work(trials: range) -> BatchResult:
            xs, ys = [], []
            for t in trials:
                rng = self._rng(index, t)
                x = bernoulli_block(0.5, N, rng)
                xs.append(x)
                ys.append(x ^ bernoulli_block(p, N, rng))
            x_rows, y_rows = np.stack(xs), np.stack(ys)
            payload, quantized = wyner_ziv_encode(code_s, code_c, x_rows, float(D), self.config)
            estimate = wyner_ziv_decode(
                code_c, payload, y_rows, p, self.cfg.use_measured_distortion, config=self.config
            )
            failed = np.any(estimate != quantized.reconstruction, axis=1)
            return failed, np.asarray(hamming_distortion(estimate, x_rows))

        rate = len(nesting_report(code_s, code_c).payload_positions) / N
        return [self._summarize(work, N, index, n, rate, p, f"sc-dual:D={float(D):g}")]

    def _summarize(
        self,
        work: Callable[[range], BatchResult],
        N: int,
        index: int,
        n: int,
        rate: float,
        param: float,
        decoder: str,
    ) -> TrialSummary:
        started = time.perf_counter()
        flags, distortions = _concat(_run_batches(work, self.cfg.trials, N, self.config))
        summary = TrialSummary.from_flags(
            flags, distortions, **self.labels(index, n, rate, param, decoder)
        )
        summary.wall_time = time.perf_counter() - started
        return summary


def _check_code_override(cfg: ExperimentConfig, code: Optional[CodeSpec]) -> None:
    if code is None:
        return
    if cfg.scheme not in CHANNEL_SCHEMES:
        raise ConfigError("An explicit code only applies to channel schemes")
    if any(int(n) != code.n for n in cfg.n):
        raise InvalidInputError(f"Sweep n={cfg.n} does not match the code (n={code.n})")


def run_experiment(
    cfg: ExperimentConfig, config: Optional[Config] = None, code: Optional[CodeSpec] = None
) -> List[TrialSummary]:
    """Run every sweep point of ``cfg``; one TrialSummary per point (and per m for lossless).

    Channel schemes decode ``code`` at every point when it is given instead of
    constructing one per (n, rate).
    """
    config = config or Config(seed=cfg.seed)
    _check_code_override(cfg, code)
    runner = _PointRunner(cfg, config, code)
    summaries: List[TrialSummary] = []
    for index, point in enumerate(cfg.points()):
        logger.debug("{} point {} {}", cfg.scheme, index, point)
        if cfg.scheme in CHANNEL_SCHEMES:
            summaries.extend(runner.channel(index, point, [CHANNEL_SCHEMES[cfg.scheme]]))
        elif cfg.scheme == "lossless":
            summaries.extend(runner.lossless(index, point))
        elif cfg.scheme == "slepian-wolf":
            summaries.extend(runner.slepian_wolf(index, point))
        elif cfg.scheme == "erasure-quant":
            summaries.extend(runner.erasure_quant(index, point))
        elif cfg.scheme == "hamming-quant":
            summaries.extend(runner.hamming_quant(index, point))
        else:
            summaries.extend(runner.wyner_ziv(index, point))
    return summaries


def paired_compare(
    cfg: ExperimentConfig,
    decoders: Sequence[str],
    config: Optional[Config] = None,
    code: Optional[CodeSpec] = None,
) -> List[PairedComparison]:
    """Feed identical channel realizations to every decoder at every sweep point."""
    if cfg.scheme not in CHANNEL_SCHEMES:
        raise ConfigError("Paired comparison needs a channel scheme")
    if not decoders:
        raise ConfigError("Paired comparison needs at least one decoder")
    for decoder in decoders:
        if decoder not in DECODERS:
            raise ConfigError(f"Unknown decoder '{decoder}', expected one of {', '.join(DECODERS)}")
        if decoder == "map-bec" and cfg.channel_kind != "bec":
            raise ConfigError("The map-bec decoder needs a BEC channel")
    config = config or Config(seed=cfg.seed)
    _check_code_override(cfg, code)
    runner = _PointRunner(cfg, config, code)
    comparisons = []
    for index, point in enumerate(cfg.points()):
        summaries = runner.channel(index, point, list(decoders))
        dominance = {
            (a.decoder, b.decoder): int(np.count_nonzero(a.failure_flags & ~b.failure_flags))
            for a in summaries
            for b in summaries
            if a is not b
        }
        comparisons.append(PairedComparison(point=point, summaries=summaries, dominance=dominance))
    return comparisons
