"""polarbench Command Line Interface using Click."""

import sys
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional, Sequence, Tuple

import click
import numpy as np

from polarbench import __version__
from polarbench.bp_decoder import bp_decode_detailed, cyclic_trellises, map_decode_bec, ml_oracle
from polarbench.channels import (
    ERASURE_SYMBOL,
    ChannelParam,
    SoftBlock,
    bernoulli_block,
    channel_sample,
    hamming_distortion,
    ternary_source_block,
    trial_rng,
)
from polarbench.config import Config
from polarbench.construction import (
    CONSTRUCTION_METHODS,
    ORIENTATIONS,
    CodeSpec,
    brute_force_min_distance,
    construct_arikan,
    construct_rm,
    dual_code,
    encode,
    load_codespec,
    min_distance,
    min_distance_census_bound,
    save_codespec,
    z_profile_bec,
)
from polarbench.core import ExperimentResolver
from polarbench.core.resolver import SCALES
from polarbench.exceptions import ConfigError, InvalidInputError, OracleRefusedError
from polarbench.log_setup import configure_logging
from polarbench.sc_decoder import sc_decode_detailed
from polarbench.simulation import (
    ExperimentConfig,
    TrialSummary,
    append_csv,
    paired_compare,
    run_experiment,
    summaries_to_csv,
)
from polarbench.simulation.engine import CHANNEL_SCHEMES, DECODERS
from polarbench.source_codecs import (
    MAX_PERMUTATION_BITS,
    PermutationFamily,
    compress,
    decompress,
    erasure_quantize,
    erasure_quantizer_code,
    hamming_quantize,
    hamming_quantizer_code,
    read_compressed,
    slepian_wolf_decode,
    slepian_wolf_encode,
    slepian_wolf_rates,
    wyner_ziv_codes,
    wyner_ziv_decode,
    wyner_ziv_encode,
    wyner_ziv_envelope,
    wyner_ziv_rate,
    write_compressed,
)

# Errors caused by the arguments rather than by the run
USAGE_ERRORS = (click.UsageError, ConfigError, InvalidInputError, OracleRefusedError)

SCHEME_FOR_DECODER = {decoder: scheme for scheme, decoder in CHANNEL_SCHEMES.items()}
CHAIN = ("sc", "bp", "bp-multi", "map-bec")


class PolarBenchGroup(click.Group):
    """Click group whose usage errors exit with status 1."""

    def make_context(self, *args: Any, **kwargs: Any) -> click.Context:
        try:
            return super().make_context(*args, **kwargs)
        except click.UsageError as e:
            e.exit_code = 1
            raise

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = 1
            raise


class ChannelType(click.ParamType):
    """``kind:value`` channel argument, e.g. bec:0.5, bsc:0.11 or bawgn:0.97865."""

    name = "channel"

    def convert(self, value: Any, param: Any, ctx: Any) -> ChannelParam:
        if isinstance(value, ChannelParam):
            return value
        try:
            return ChannelParam.parse(str(value))
        except InvalidInputError as e:
            self.fail(str(e), param, ctx)


CHANNEL = ChannelType()


def _fail(e: Exception) -> NoReturn:
    click.echo(f"❌ Error: {str(e)}", err=True)
    sys.exit(1 if isinstance(e, USAGE_ERRORS) else 2)


def _runtime(seed: Optional[int] = None) -> Config:
    ctx = click.get_current_context()
    threads = (ctx.find_root().obj or {}).get("threads")
    return Config(seed=seed, threads=threads)


def _seed(seed: Optional[int]) -> int:
    return Config.default_seed() if seed is None else seed


def _read_lines(path: str) -> List[str]:
    """Non-empty lines of a text file, ``#`` comments skipped."""
    lines = [line.strip() for line in Path(path).read_text().splitlines()]
    return [line for line in lines if line and not line.startswith("#")]


def _parse_bits(line: str, length: Optional[int] = None) -> np.ndarray:
    text = "".join(line.split())
    if not text or set(text) - set("01"):
        raise InvalidInputError(f"Expected a line of 0/1 characters, got '{line[:40]}'")
    bits = (np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")).astype(np.uint8)
    if length is not None and bits.size != length:
        raise InvalidInputError(f"Expected {length} bits per line, got {bits.size}")
    return bits


def _read_blocks(path: str, length: int) -> np.ndarray:
    lines = _read_lines(path)
    if not lines:
        raise InvalidInputError(f"{path} holds no blocks")
    return np.stack([_parse_bits(line, length) for line in lines])


def _read_single_block(path: str, length: int) -> np.ndarray:
    blocks = _read_blocks(path, length)
    if blocks.shape[0] != 1:
        raise InvalidInputError(f"{path} must hold exactly one block, found {blocks.shape[0]}")
    return blocks[0]


def _format_bits(bits: np.ndarray, unresolved: Optional[np.ndarray] = None) -> str:
    chars = np.where(np.asarray(bits) == 1, "1", "0")
    if unresolved is not None:
        chars = np.where(unresolved, "?", chars)
    return "".join(chars.tolist())


def _hard_llr(channel: Optional[ChannelParam]) -> float:
    """LLR magnitude of a hard 0/1 symbol observed through ``channel``."""
    if channel is None or channel.kind == "bec":
        return float("inf")
    p = float(np.clip(channel.value, 1e-12, 0.5))
    return float(np.log((1.0 - p) / p))


def _parse_observation(line: str, length: int, channel: Optional[ChannelParam]) -> SoftBlock:
    """'0'/'1'/'?' lines are hard (erasure) symbols, BAWGN lines whitespace-separated LLRs."""
    text = "".join(line.split())
    hard = channel is None or channel.kind != "bawgn"
    if hard and text and not set(text) - set("01?"):
        if len(text) != length:
            raise InvalidInputError(f"Expected {length} symbols per line, got {len(text)}")
        codes = np.frombuffer(text.encode(), dtype=np.uint8)
        erased = codes == ord("?")
        bits = (codes == ord("1")).astype(np.uint8)
        magnitude = _hard_llr(channel)
        if np.isinf(magnitude):
            return SoftBlock.from_bits(bits, erased)
        if erased.any():
            raise InvalidInputError("'?' symbols need a BEC channel")
        return SoftBlock((1.0 - 2.0 * bits) * magnitude)
    try:
        values = np.array(line.split(), dtype=np.float64)
    except ValueError as e:
        raise InvalidInputError(f"Cannot parse observation line '{line[:40]}'") from e
    if values.size != length:
        raise InvalidInputError(f"Expected {length} LLRs per line, got {values.size}")
    return SoftBlock(values)


def _format_observation(obs: SoftBlock, channel: ChannelParam) -> str:
    if obs.is_bec:
        t = obs.ternary()
        return "".join(np.where(t == 0, "?", np.where(t < 0, "1", "0")).tolist())
    if channel.kind == "bsc":
        return _format_bits(obs.hard_decisions())
    return " ".join(format(float(v), ".6g") for v in obs.values)


def _read_ternary_source(path: str, length: int) -> np.ndarray:
    """One line of '0', '1' and '?' (erased) symbols."""
    lines = _read_lines(path)
    if len(lines) != 1:
        raise InvalidInputError(f"{path} must hold exactly one block")
    text = "".join(lines[0].split())
    if len(text) != length or set(text) - set("01?"):
        raise InvalidInputError(f"Expected {length} symbols from '0', '1', '?'")
    codes = np.frombuffer(text.encode(), dtype=np.uint8)
    return np.where(codes == ord("?"), ERASURE_SYMBOL, codes - ord("0")).astype(np.int8)


def _emit(lines: Sequence[str], output: Optional[str], what: str) -> None:
    text = "\n".join(lines) + "\n"
    if output:
        Path(output).write_text(text)
        click.echo(f"✅ {what} written to: {output}", err=True)
    else:
        click.echo(text, nl=False)


def _describe_code(code: CodeSpec) -> str:
    d_min = str(min_distance(code)) if code.information else "-"
    return f"rate={code.rate:.6g} |F|={len(code.frozen)} d_min={d_min}"


def _build_code(
    code_path: Optional[str],
    n: Optional[int],
    rate: Optional[float],
    rule: str,
    channel: Optional[ChannelParam],
    method: str = "genie",
    construction_trials: Optional[int] = None,
    seed: Optional[int] = None,
) -> CodeSpec:
    if code_path:
        return load_codespec(code_path)
    if n is None or rate is None:
        raise click.UsageError("Give --code or both --n and --rate")
    if rule == "rm":
        return construct_rm(n, rate)
    if channel is None:
        raise click.UsageError("The arikan rule needs --channel")
    return construct_arikan(channel, n, rate, method, construction_trials, seed)


def _echo_summaries(summaries: Sequence[TrialSummary]) -> None:
    for s in summaries:
        click.echo(
            f"📊 {s.scheme} {s.decoder} n={s.n} rate={s.rate:.4g} param={s.channel_param:g}: "
            f"{s.failures}/{s.trials} failures, p={s.p_hat:.3e} "
            f"[{s.ci_low:.3e}, {s.ci_high:.3e}]",
            err=True,
        )


def _report_invalid(result: Dict[str, Any]) -> NoReturn:
    click.echo("❌ Experiment is invalid:", err=True)
    for issue in result["issues"]:
        click.echo(f"   • {issue}", err=True)
    sys.exit(1)


@click.group(cls=PolarBenchGroup)
@click.version_option(version=__version__, prog_name="polarbench")
@click.option("-v", "--verbose", is_flag=True, help="Log debug messages to stderr")
@click.option(
    "--threads",
    type=click.IntRange(min=1),
    default=Config.DEFAULT_THREADS,
    show_default=True,
    help="Worker threads for Monte Carlo batches",
)
@click.pass_context
def cli(ctx: click.Context, verbose: bool, threads: int) -> None:
    """polarbench CLI - polar codes for channel and source coding.

    Quick Start:
        1. Build a code: polarbench construct --channel bec:0.5 --n 10 --rate 0.4 -o code.json
        2. Simulate it: polarbench simulate --code code.json --decoder bp --channel bec:0.5
        3. Reproduce a sweep: polarbench preset --figure fig4 --scale small --out results

    Command Groups:
        Codes:          construct, zprofile, mindist
        Channel coding: encode, decode, simulate, compare
        Source coding:  compress, decompress, sw, quantize, wz
        Experiments:    preset, list-presets, validate-config
    """
    configure_logging("DEBUG" if verbose else "WARNING")
    ctx.obj = {"threads": threads}


@cli.command()
@click.option("--channel", type=CHANNEL, default="bec:0.5", show_default=True)
@click.option("--n", "n", type=click.IntRange(0, 24), required=True, help="Block exponent")
@click.option("--rate", type=click.FloatRange(0.0, 1.0), required=True)
@click.option("--rule", type=click.Choice(["arikan", "rm"]), default="arikan", show_default=True)
@click.option(
    "--method", type=click.Choice(CONSTRUCTION_METHODS), default="genie", show_default=True
)
@click.option("--construction-trials", type=click.IntRange(min=1), help="Genie Monte Carlo trials")
@click.option("--seed", type=int, help="Seed for the genie construction")
@click.option("--dual", is_flag=True, help="Write the dual code instead")
@click.option("-o", "--out", type=click.Path(), help="CodeSpec JSON path (defaults to stdout)")
def construct(
    channel: ChannelParam,
    n: int,
    rate: float,
    rule: str,
    method: str,
    construction_trials: Optional[int],
    seed: Optional[int],
    dual: bool,
    out: Optional[str],
) -> None:
    """Construct a polar (Arikan rule) or RM-rule code and write its CodeSpec.

    Examples:
        polarbench construct --channel bec:0.5 --n 3 --rate 0.5 --rule rm
        polarbench construct --channel bsc:0.11 --n 10 --rate 0.45 -o code.json
    """
    try:
        code = _build_code(None, n, rate, rule, channel, method, construction_trials, seed)
        if dual:
            code = dual_code(code)
        if out:
            save_codespec(code, out)
            click.echo(f"✅ CodeSpec written to: {out}", err=True)
        else:
            click.echo(code.to_json())
        click.echo(f"📐 {_describe_code(code)}", err=True)
    except Exception as e:
        _fail(e)


@cli.command(name="encode")
@click.argument("input_file", type=click.Path(exists=True))
@click.option("--code", "code_path", type=click.Path(exists=True), required=True)
@click.option("--channel", type=CHANNEL, help="Pass each codeword through this channel")
@click.option("--seed", type=int, help="Seed for the channel noise")
@click.option("-o", "--output", type=click.Path(), help="Output file path (defaults to stdout)")
def encode_blocks(
    input_file: str,
    code_path: str,
    channel: Optional[ChannelParam],
    seed: Optional[int],
    output: Optional[str],
) -> None:
    """Encode message lines (K bits each) into codewords or channel observations.

    Observation lines use '?' for BEC erasures, received bits for the BSC and
    LLRs for the BAWGN channel.

    Examples:
        polarbench encode messages.txt --code code.json -o codewords.txt
        polarbench encode messages.txt --code code.json --channel bec:0.5 -o obs.txt
    """
    try:
        code = load_codespec(code_path)
        messages = _read_blocks(input_file, code.K)
        u = np.tile(code.frozen_block, (messages.shape[0], 1))
        u[:, list(code.information)] = messages
        words = encode(code, u)
        if channel is None:
            lines = [_format_bits(w) for w in words]
        else:
            s = _seed(seed)
            lines = [
                _format_observation(channel_sample(channel, w, trial_rng(s, row)), channel)
                for row, w in enumerate(words)
            ]
        _emit(lines, output, "Encoded blocks")
        click.echo(f"🔒 Encoded {len(lines)} blocks of {code.K} bits", err=True)
    except Exception as e:
        _fail(e)


def _decode_line(
    code: CodeSpec, obs: SoftBlock, decoder: str, rounds: Optional[int], config: Config
) -> Tuple[np.ndarray, np.ndarray]:
    """u decisions and the unresolved mask for one observation block."""
    if decoder == "sc":
        sc = sc_decode_detailed(code, obs, config=config)
        return sc.bits, ~sc.resolved
    if decoder in ("bp", "bp-multi"):
        trellises = cyclic_trellises(code.n) if decoder == "bp-multi" else None
        bp = bp_decode_detailed(code, obs, trellises, rounds, config=config)
        return bp.bits, ~bp.resolved
    if decoder == "map-bec":
        result = map_decode_bec(code, obs)
        if result.ambiguous or result.bits is None:
            return code.frozen_block, ~code.frozen_mask
        return result.bits, np.zeros(code.N, dtype=bool)
    return ml_oracle(code, obs, config), np.zeros(code.N, dtype=bool)


@cli.command()
@click.argument("input_file", type=click.Path(exists=True))
@click.option("--code", "code_path", type=click.Path(exists=True), required=True)
@click.option("--decoder", type=click.Choice(DECODERS), default="sc", show_default=True)
@click.option("--channel", type=CHANNEL, help="Channel the observations came through")
@click.option("--rounds", type=click.IntRange(min=1), help="BP round limit")
@click.option("-o", "--output", type=click.Path(), help="Output file path (defaults to stdout)")
def decode(
    input_file: str,
    code_path: str,
    decoder: str,
    channel: Optional[ChannelParam],
    rounds: Optional[int],
    output: Optional[str],
) -> None:
    """Decode observation lines back to message bits ('?' marks unresolved bits).

    Examples:
        polarbench decode obs.txt --code code.json --decoder bp-multi
        polarbench decode obs.txt --code code.json --decoder sc --channel bsc:0.11
    """
    try:
        code = load_codespec(code_path)
        if decoder == "map-bec" and channel is not None and channel.kind != "bec":
            raise ConfigError("The map-bec decoder needs a BEC channel")
        config = _runtime()
        info = list(code.information)
        lines, unresolved_blocks = [], 0
        for line in _read_lines(input_file):
            obs = _parse_observation(line, code.N, channel)
            bits, unresolved = _decode_line(code, obs, decoder, rounds, config)
            unresolved_blocks += int(np.any(unresolved[info]))
            lines.append(_format_bits(bits[info], unresolved[info]))
        if not lines:
            raise InvalidInputError(f"{input_file} holds no blocks")
        _emit(lines, output, "Decoded messages")
        click.echo(
            f"🔍 Decoded {len(lines)} blocks with {decoder}, "
            f"{unresolved_blocks} with unresolved bits",
            err=True,
        )
    except Exception as e:
        _fail(e)


@cli.command()
@click.option("--config", "config_file", type=click.Path(exists=True), help="Experiment file")
@click.option("--code", "code_path", type=click.Path(exists=True), help="CodeSpec JSON to decode")
@click.option("--n", "n_values", type=click.IntRange(0, 24), multiple=True, help="Block exponent")
@click.option("--rate", "rates", type=click.FloatRange(0.0, 1.0), multiple=True)
@click.option("--rule", type=click.Choice(["arikan", "rm"]), default="arikan", show_default=True)
@click.option("--decoder", type=click.Choice(DECODERS), default="sc", show_default=True)
@click.option("--channel", type=CHANNEL, help="Channel, e.g. bec:0.5")
@click.option("--trials", type=click.IntRange(min=1), help="Trials per point [default: 1000]")
@click.option("--seed", type=int, help="Base seed of the per-trial streams")
@click.option("--rounds", type=click.IntRange(min=1), help="BP round limit")
@click.option("--method", type=click.Choice(CONSTRUCTION_METHODS), default="genie")
@click.option("--construction-trials", type=click.IntRange(min=1))
@click.option("--csv", "csv_path", type=click.Path(), help="Append rows here (defaults to stdout)")
def simulate(
    config_file: Optional[str],
    code_path: Optional[str],
    n_values: Tuple[int, ...],
    rates: Tuple[float, ...],
    rule: str,
    decoder: str,
    channel: Optional[ChannelParam],
    trials: Optional[int],
    seed: Optional[int],
    rounds: Optional[int],
    method: str,
    construction_trials: Optional[int],
    csv_path: Optional[str],
) -> None:
    """Monte Carlo block error (or source coding failure) rates with 95% intervals.

    \b
    A trial counts as a failure when:
      channel-*      an information bit is wrong or left unresolved
      lossless       all 2^m permuted attempts fail to reproduce the block
      slepian-wolf   the recovered block differs from the source
      erasure-quant  the reconstruction disagrees with an unerased symbol
      hamming-quant  the block's Hamming distortion exceeds D (sc-dual:dist>D)
      wyner-ziv      the decoder misses the quantizer's reconstruction

    Examples:
        polarbench simulate --n 10 --rate 0.4 --decoder bp --channel bec:0.5 --trials 10000
        polarbench simulate --code code.json --decoder sc --channel bawgn:0.97865
        polarbench simulate --config experiment.yaml --csv results.csv
    """
    try:
        code: Optional[CodeSpec] = None
        overrides: Dict[str, Any] = {
            k: v
            for k, v in {
                "trials": trials,
                "seed": seed,
                "max_rounds": rounds,
                "construction_trials": construction_trials,
            }.items()
            if v is not None
        }
        if config_file:
            result = ExperimentResolver().resolve_and_validate(
                config=overrides or None, config_path=config_file
            )
            if result["status"] != "valid":
                _report_invalid(result)
            document = dict(result["resolved_config"])
        else:
            if channel is None:
                raise click.UsageError("--channel is required without --config")
            if code_path:
                code = load_codespec(code_path)
                n_values, rates = (code.n,), (code.rate,)
                rule = code.rule if code.rule != "explicit" else rule
            elif not n_values or not rates:
                raise click.UsageError("Give --code or both --n and --rate")
            document = {
                "scheme": SCHEME_FOR_DECODER[decoder],
                "n": list(n_values),
                "rates": list(rates),
                "rule": rule,
                "channel_kind": channel.kind,
                "channel_params": [channel.value],
                "trials": 1000,
                "construction_method": method,
                **overrides,
            }
        document.setdefault("seed", _seed(None))
        cfg = ExperimentConfig.from_dict(document)
        summaries = run_experiment(cfg, _runtime(cfg.seed), code=code)
        if csv_path:
            append_csv(csv_path, summaries)
            click.echo(f"✅ {len(summaries)} rows appended to: {csv_path}", err=True)
        else:
            click.echo(summaries_to_csv(summaries), nl=False)
        _echo_summaries(summaries)
    except Exception as e:
        _fail(e)


@cli.command()
@click.option("--figure", required=True, help="Preset id, see list-presets")
@click.option("--scale", type=click.Choice(SCALES), default="small", show_default=True)
@click.option(
    "--out", "out_dir", type=click.Path(file_okay=False), default=".", show_default=True
)
@click.option("--trials", type=click.IntRange(min=1), help="Override the preset's trial count")
@click.option("--seed", type=int, help="Base seed of the per-trial streams")
def preset(
    figure: str, scale: str, out_dir: str, trials: Optional[int], seed: Optional[int]
) -> None:
    """Run every sweep of a preset and write <out>/<figure>-<scale>.csv.

    Examples:
        polarbench preset --figure fig4 --scale small --out results
        polarbench preset --figure fig6R --scale paper --out results
    """
    try:
        overrides: Dict[str, Any] = {"seed": _seed(seed)}
        if trials is not None:
            overrides["trials"] = trials
        documents = ExperimentResolver().resolve_preset(figure, scale, overrides)
        summaries: List[TrialSummary] = []
        for number, document in enumerate(documents, start=1):
            cfg = ExperimentConfig.from_dict(document)
            click.echo(f"🚀 Run {number}/{len(documents)}: {cfg.scheme}", err=True)
            summaries.extend(run_experiment(cfg, _runtime(cfg.seed)))
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        path = Path(out_dir) / f"{figure}-{scale}.csv"
        path.write_text(summaries_to_csv(summaries))
        _echo_summaries(summaries)
        click.echo(f"✅ {len(summaries)} rows written to: {path}", err=True)
    except Exception as e:
        _fail(e)


@cli.command()
@click.option("--code", "code_path", type=click.Path(exists=True), help="CodeSpec JSON to decode")
@click.option("--n", "n_values", type=click.IntRange(0, 24), multiple=True)
@click.option("--rate", "rates", type=click.FloatRange(0.0, 1.0), multiple=True)
@click.option("--rule", type=click.Choice(["arikan", "rm"]), default="arikan", show_default=True)
@click.option("--channel", type=CHANNEL, default="bec:0.5", show_default=True)
@click.option(
    "--decoders",
    type=click.Choice(DECODERS),
    multiple=True,
    help="Decoders to pair [default: sc, bp, bp-multi and map-bec on the BEC]",
)
@click.option("--trials", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--seed", type=int)
@click.option("--rounds", type=click.IntRange(min=1), help="BP round limit")
@click.option("--csv", "csv_path", type=click.Path(), help="Also append the rows here")
def compare(
    code_path: Optional[str],
    n_values: Tuple[int, ...],
    rates: Tuple[float, ...],
    rule: str,
    channel: ChannelParam,
    decoders: Tuple[str, ...],
    trials: int,
    seed: Optional[int],
    rounds: Optional[int],
    csv_path: Optional[str],
) -> None:
    """Run several decoders on identical channel realizations and count dominance breaks.

    Examples:
        polarbench compare --n 10 --rate 0.4 --channel bec:0.5 --trials 10000
        polarbench compare --code code.json --channel bsc:0.11 --decoders sc --decoders bp
    """
    try:
        code = load_codespec(code_path) if code_path else None
        if code is not None:
            n_values, rates = (code.n,), (code.rate,)
            rule = code.rule if code.rule != "explicit" else rule
        elif not n_values or not rates:
            raise click.UsageError("Give --code or both --n and --rate")
        if not decoders:
            decoders = tuple(d for d in CHAIN if d != "map-bec" or channel.kind == "bec")
        document: Dict[str, Any] = {
            "scheme": SCHEME_FOR_DECODER[decoders[0]],
            "n": list(n_values),
            "rates": list(rates),
            "rule": rule,
            "channel_kind": channel.kind,
            "channel_params": [channel.value],
            "trials": trials,
            "seed": _seed(seed),
        }
        if rounds is not None:
            document["max_rounds"] = rounds
        cfg = ExperimentConfig.from_dict(document)
        comparisons = paired_compare(cfg, decoders, _runtime(cfg.seed), code=code)
        for comparison in comparisons:
            n, rate, param = comparison.point
            click.echo(f"\n📋 n={n} rate={rate:g} {channel.kind}:{param:g}")
            for s in comparison.summaries:
                click.echo(
                    f"   • {s.decoder:<9} {s.failures}/{s.trials} p={s.p_hat:.3e} "
                    f"[{s.ci_low:.3e}, {s.ci_high:.3e}]"
                )
            for weaker, stronger in zip(decoders, decoders[1:]):
                count = comparison.violations(stronger, weaker)
                mark = "✅" if count == 0 else "⚠️ "
                click.echo(f"   {mark} {stronger} failed where {weaker} succeeded: {count}")
        if csv_path:
            append_csv(csv_path, [s for c in comparisons for s in c.summaries])
            click.echo(f"✅ Rows appended to: {csv_path}", err=True)
    except Exception as e:
        _fail(e)


@cli.command(name="compress")
@click.argument("input_file", type=click.Path(exists=True))
@click.option("--code", "code_path", type=click.Path(exists=True), required=True)
@click.option("--p", "p", type=click.FloatRange(0.0, 0.5), required=True, help="Source bias")
@click.option(
    "--m", "m", type=click.IntRange(0, MAX_PERMUTATION_BITS), default=0, show_default=True
)
@click.option("--seed", type=int, help="Seed of the shared permutation family")
@click.option("-o", "--output", type=click.Path(), required=True, help="Compressed block path")
def compress_cmd(
    input_file: str, code_path: str, p: float, m: int, seed: Optional[int], output: str
) -> None:
    """Compress one Ber(p) source block to its syndrome plus m permutation bits.

    Examples:
        polarbench compress block.txt --code code.json --p 0.11 --m 2 -o block.pbc
    """
    try:
        code = load_codespec(code_path)
        x = _read_single_block(input_file, code.N)
        family = PermutationFamily(m=m, seed=_seed(seed), n=code.n)
        block = compress(code, x, p, family, _runtime())
        write_compressed(output, block)
        click.echo(
            f"✅ Compressed {code.N} bits to {block.syndrome.size} + {m} bits "
            f"(rate {block.rate:.4g}) in: {output}"
        )
        if not block.success:
            click.echo(
                "⚠️  No permutation made the block decodable; decompression will not be exact",
                err=True,
            )
    except Exception as e:
        _fail(e)


@cli.command(name="decompress")
@click.argument("input_file", type=click.Path(exists=True))
@click.option("--code", "code_path", type=click.Path(exists=True), required=True)
@click.option("--p", "p", type=click.FloatRange(0.0, 0.5), required=True, help="Source bias")
@click.option("--seed", type=int, help="Seed of the shared permutation family")
@click.option("-o", "--output", type=click.Path(), help="Output file path (defaults to stdout)")
def decompress_cmd(
    input_file: str, code_path: str, p: float, seed: Optional[int], output: Optional[str]
) -> None:
    """Recover a source block from a compressed file.

    Examples:
        polarbench decompress block.pbc --code code.json --p 0.11 -o block.txt
    """
    try:
        code = load_codespec(code_path)
        block = read_compressed(input_file, code)
        family = PermutationFamily(m=block.m, seed=_seed(seed), n=code.n)
        x = decompress(code, block, p, family, _runtime())
        _emit([_format_bits(x)], output, "Source block")
    except Exception as e:
        _fail(e)


@cli.command()
@click.argument("x_file", type=click.Path(exists=True))
@click.argument("y_file", type=click.Path(exists=True))
@click.option("--code", "code_path", type=click.Path(exists=True), required=True)
@click.option("--p", "p", type=click.FloatRange(0.0, 0.5), required=True, help="X-Y crossover")
@click.option("-o", "--output", type=click.Path(), help="Output file path (defaults to stdout)")
def sw(x_file: str, y_file: str, code_path: str, p: float, output: Optional[str]) -> None:
    """Slepian-Wolf corner point: send x whole and y as a syndrome, recover y.

    Examples:
        polarbench sw x.txt y.txt --code code.json --p 0.11
    """
    try:
        code = load_codespec(code_path)
        x = _read_single_block(x_file, code.N)
        y = _read_single_block(y_file, code.N)
        syn = slepian_wolf_encode(code, y)
        y_hat = slepian_wolf_decode(code, x, syn, p, _runtime())
        rate_x, rate_y = slepian_wolf_rates(code)
        _emit([_format_bits(y_hat)], output, "Recovered y")
        click.echo(f"📐 R_X={rate_x:.4g} R_Y={rate_y:.4g} ({syn.size} syndrome bits)", err=True)
        wrong = int(np.count_nonzero(y_hat != y))
        if wrong:
            click.echo(f"⚠️  Recovered y differs in {wrong} positions", err=True)
        else:
            click.echo("✅ Recovered y exactly", err=True)
    except Exception as e:
        _fail(e)


@cli.command()
@click.option("--kind", type=click.Choice(["erasure", "hamming"]), required=True)
@click.option("--n", "n", type=click.IntRange(0, 24), required=True)
@click.option("--eps", type=click.FloatRange(0.0, 1.0), help="Erasure probability (erasure)")
@click.option("--rate", type=click.FloatRange(0.0, 1.0), help="Channel code rate (erasure)")
@click.option(
    "--distortion", type=click.FloatRange(0.0, 0.5), help="Design distortion D (hamming)"
)
@click.option("--input", "input_file", type=click.Path(exists=True), help="Source block file")
@click.option("--seed", type=int, help="Seed for a random source block and the construction")
@click.option("--method", type=click.Choice(CONSTRUCTION_METHODS), default="genie")
@click.option("--construction-trials", type=click.IntRange(min=1))
@click.option("-o", "--output", type=click.Path(), help="Output file path (defaults to stdout)")
def quantize(
    kind: str,
    n: int,
    eps: Optional[float],
    rate: Optional[float],
    distortion: Optional[float],
    input_file: Optional[str],
    seed: Optional[int],
    method: str,
    construction_trials: Optional[int],
    output: Optional[str],
) -> None:
    """Quantize a source block with the dual of a polar code (dual-order SC).

    Erasure sources use '?' for erased symbols. Without --input a random
    source block is drawn.

    Examples:
        polarbench quantize --kind erasure --n 10 --eps 0.6 --rate 0.5
        polarbench quantize --kind hamming --n 11 --distortion 0.2 --input x.txt
    """
    try:
        N = 1 << n
        s = _seed(seed)
        rng = trial_rng(s, n)
        if kind == "erasure":
            if eps is None or rate is None:
                raise click.UsageError("--kind erasure needs --eps and --rate")
            dual = erasure_quantizer_code(eps, n, rate)
            source = (
                _read_ternary_source(input_file, N)
                if input_file
                else ternary_source_block(eps, N, rng)
            )
            result = erasure_quantize(dual, source, _runtime())
            status = "✅ Zero distortion" if result.success else "⚠️  Quantization failed"
            click.echo(f"{status}: {int(result.distortion)} mismatches", err=True)
        else:
            if distortion is None:
                raise click.UsageError("--kind hamming needs --distortion")
            dual = hamming_quantizer_code(distortion, n, method, construction_trials, s)
            source = (
                _read_single_block(input_file, N) if input_file else bernoulli_block(0.5, N, rng)
            )
            result = hamming_quantize(dual, source, distortion, _runtime())
            click.echo(
                f"📏 Distortion {float(result.distortion):.4f} (design {distortion:g})", err=True
            )
        click.echo(f"📐 Quantizer rate {dual.rate:.4g}", err=True)
        _emit([_format_bits(result.reconstruction)], output, "Reconstruction")
    except Exception as e:
        _fail(e)


@cli.command()
@click.option("--distortion", type=click.FloatRange(0.0, 0.5), required=True, help="Design D")
@click.option(
    "--p", "p", type=click.FloatRange(0.0, 0.5), required=True, help="Side-info crossover"
)
@click.option("--n", "n", type=click.IntRange(1, 24), required=True)
@click.option("--backoff", type=click.FloatRange(0.0, 1.0), default=0.0, show_default=True)
@click.option("--blocks", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--seed", type=int)
@click.option("--measured", is_flag=True, help="Decode with the measured distortion")
@click.option("--method", type=click.Choice(CONSTRUCTION_METHODS), default="genie")
@click.option("--construction-trials", type=click.IntRange(min=1))
def wz(
    distortion: float,
    p: float,
    n: int,
    backoff: float,
    blocks: int,
    seed: Optional[int],
    measured: bool,
    method: str,
    construction_trials: Optional[int],
) -> None:
    """Wyner-Ziv coding of a Ber(1/2) source with side information through a BSC(p).

    Examples:
        polarbench wz --distortion 0.1 --p 0.3 --n 11 --blocks 100
    """
    try:
        s = _seed(seed)
        N = 1 << n
        code_s, code_c = wyner_ziv_codes(distortion, p, n, backoff, method, construction_trials, s)
        rows = [trial_rng(s, 0, t) for t in range(blocks)]
        x = np.stack([bernoulli_block(0.5, N, rng) for rng in rows])
        y = x ^ np.stack([bernoulli_block(p, N, rng) for rng in rows])
        payload, quantized = wyner_ziv_encode(code_s, code_c, x, distortion, _runtime())
        estimate = wyner_ziv_decode(code_c, payload, y, p, measured, config=_runtime())
        failures = int(np.count_nonzero(np.any(estimate != quantized.reconstruction, axis=1)))
        achieved = np.asarray(hamming_distortion(estimate, x), dtype=np.float64)
        report = payload.report
        assert report is not None
        click.echo(
            f"📐 Payload rate {payload.rate:.4f} ({len(payload.positions)} bits per block)"
        )
        click.echo(
            f"   • limit {wyner_ziv_rate(distortion, p):.4f}, "
            f"envelope {wyner_ziv_envelope(distortion, p):.4f}"
        )
        if report.nested:
            click.echo("✅ Source frozen set is nested in the channel frozen set")
        else:
            click.echo(f"⚠️  Nesting violated: {report.surcharge_bits} surcharge bits")
        click.echo(f"📏 Mean distortion {float(achieved.mean()):.4f} (design {distortion:g})")
        click.echo(f"🔍 Decoder disagreed with the encoder on {failures}/{blocks} blocks")
    except Exception as e:
        _fail(e)


@cli.command()
@click.option(
    "--eps", type=click.FloatRange(0.0, 1.0), required=True, help="BEC erasure probability"
)
@click.option("--n", "n", type=click.IntRange(0, 24), required=True)
@click.option("--orientation", type=click.Choice(ORIENTATIONS), default="primal", show_default=True)
@click.option("-o", "--output", type=click.Path(), help="Output file path (defaults to stdout)")
def zprofile(eps: float, n: int, orientation: str, output: Optional[str]) -> None:
    """Exact per-index SC erasure probabilities on the BEC, one 'index z' line each.

    Examples:
        polarbench zprofile --eps 0.5 --n 3
        polarbench zprofile --eps 0.4 --n 10 --orientation dual -o z.txt
    """
    try:
        profile = z_profile_bec(eps, n, orientation)
        lines = [f"{i}\t{format(float(z), '.6g')}" for i, z in enumerate(profile.values)]
        _emit(lines, output, "Z profile")
    except Exception as e:
        _fail(e)


@cli.command()
@click.option("--code", "code_path", type=click.Path(exists=True), help="CodeSpec JSON")
@click.option("--n", "n", type=click.IntRange(0, 24))
@click.option("--rate", type=click.FloatRange(0.0, 1.0))
@click.option("--rule", type=click.Choice(["arikan", "rm"]), default="rm", show_default=True)
@click.option("--channel", type=CHANNEL, default="bec:0.5", show_default=True)
@click.option("--brute", is_flag=True, help="Also enumerate all codewords (K <= 20)")
def mindist(
    code_path: Optional[str],
    n: Optional[int],
    rate: Optional[float],
    rule: str,
    channel: ChannelParam,
    brute: bool,
) -> None:
    """Minimum distance of a code from its information indices.

    Examples:
        polarbench mindist --n 10 --rate 0.5 --rule rm
        polarbench mindist --code code.json --brute
    """
    try:
        code = _build_code(code_path, n, rate, rule, channel)
        d = min_distance(code)
        click.echo(f"📏 d_min = {d} (K={code.K}, N={code.N})")
        bound = min_distance_census_bound(code.n, code.K)
        click.echo(f"   • largest d_min with K={code.K}: {bound}")
        if brute:
            exhaustive = brute_force_min_distance(code)
            mark = "✅" if exhaustive == d else "⚠️ "
            click.echo(f"{mark} enumeration gives {exhaustive}")
    except Exception as e:
        _fail(e)


@cli.command(name="validate-config")
@click.argument("config_file", type=click.Path(exists=True))
@click.option("--preset", "preset_name", help="Validate on top of a preset")
@click.option("--scale", type=click.Choice(SCALES), default="small", show_default=True)
def validate_config(config_file: str, preset_name: Optional[str], scale: str) -> None:
    """Validate an experiment file (YAML or JSON).

    Examples:
        polarbench validate-config experiment.yaml
        polarbench validate-config overrides.yaml --preset fig4
    """
    try:
        result = ExperimentResolver().resolve_and_validate(
            config_path=config_file, preset=preset_name, scale=scale
        )

        if result["status"] == "valid":
            click.echo("✅ Experiment is valid")
            click.echo(f"📄 {result['explanation']}")

            if result["issues"]:
                click.echo("\n⚠️  Warnings:")
                for issue in result["issues"]:
                    click.echo(f"   • {issue}")
        else:
            click.echo("❌ Experiment is invalid")
            click.echo(f"📄 {result['explanation']}")

            if result["issues"]:
                click.echo("\n🚨 Issues:")
                for issue in result["issues"]:
                    click.echo(f"   • {issue}")

            sys.exit(1)

    except Exception as e:
        _fail(e)


@cli.command(name="list-presets")
def list_presets() -> None:
    """List the bundled experiment presets."""
    try:
        descriptions = ExperimentResolver().preset_descriptions()
        if not descriptions:
            click.echo("📭 No presets found")
            return

        click.echo(f"📋 Found {len(descriptions)} presets:\n")
        for name, description in descriptions.items():
            click.echo(f"• {name}")
            click.echo(f"  {description}")

    except Exception as e:
        _fail(e)


def main() -> None:
    """Main entry point for CLI."""
    cli()


if __name__ == "__main__":
    main()
