"""Integration tests: decoder dominance on the BEC and reproducible output."""

import pytest

from polarbench.construction import construct_arikan, sc_block_error_bounds
from polarbench.channels import ChannelParam
from polarbench.core import ExperimentResolver
from polarbench.simulation import (
    ExperimentConfig,
    paired_compare,
    run_experiment,
    summaries_to_csv,
)

CHAIN = ["map-bec", "bp-multi", "bp", "sc"]


class TestBecDominance:
    """Per-trial nesting of decoder failures on shared BEC realizations."""

    def setup_method(self):
        """Set up test fixtures."""
        self.cfg = ExperimentConfig(
            scheme="channel-sc",
            n=[6],
            rates=[0.4, 0.5],
            channel_params=[0.5],
            trials=300,
            seed=17,
        )

    def test_failures_are_nested(self):
        """Test MAP <= multi-trellis BP <= BP <= SC trial by trial."""
        for comparison in paired_compare(self.cfg, CHAIN):
            for stronger, weaker in zip(CHAIN, CHAIN[1:]):
                assert comparison.violations(stronger, weaker) == 0
            by_decoder = {s.decoder: s.failures for s in comparison.summaries}
            assert by_decoder["map-bec"] <= by_decoder["bp-multi"] <= by_decoder["bp"]
            assert by_decoder["bp"] <= by_decoder["sc"]

    def test_rm_rule_nesting(self):
        """Test that the nesting also holds for RM-rule codes."""
        cfg = ExperimentConfig(scheme="channel-sc", n=[5], rule="rm", trials=200, seed=4)
        for comparison in paired_compare(cfg, CHAIN):
            for stronger, weaker in zip(CHAIN, CHAIN[1:]):
                assert comparison.violations(stronger, weaker) == 0

    def test_sc_block_error_within_bounds(self):
        """Test that SC block erasure lies between max Z and sum Z over I."""
        trials = 4000
        cfg = ExperimentConfig(scheme="channel-sc", n=[5], rates=[0.3], trials=trials, seed=9)
        summary = run_experiment(cfg)[0]
        code = construct_arikan(ChannelParam("bec", 0.5), 5, 0.3)
        low, high = sc_block_error_bounds(code, 0.5)
        slack = 3.0 * (0.25 / trials) ** 0.5
        assert low - slack <= summary.p_hat <= high + slack


class TestReproducibleOutput:
    """Identical runs produce identical CSV text."""

    def test_identical_csv(self):
        """Test that two runs with one seed give byte-identical CSV."""
        cfg = ExperimentConfig(
            scheme="channel-bp", n=[5], rates=[0.3, 0.5], channel_params=[0.4], trials=120, seed=8
        )
        assert summaries_to_csv(run_experiment(cfg)) == summaries_to_csv(run_experiment(cfg))

    def test_different_seeds_differ(self):
        """Test that the seed is reflected in the output."""
        base = dict(scheme="channel-sc", n=[5], trials=50)
        a = summaries_to_csv(run_experiment(ExperimentConfig(seed=1, **base)))
        b = summaries_to_csv(run_experiment(ExperimentConfig(seed=2, **base)))
        assert a != b


@pytest.mark.slow
class TestPresetAcceptance:
    """Small-scale preset runs: the decoder ordering shows in the estimates."""

    def test_bec_decoders_preset(self):
        """Test MAP <= BP-multi <= BP <= SC block error along the small BEC sweep."""
        documents = ExperimentResolver().resolve_preset("fig4", "small", {"trials": 2000})
        by_scheme = {}
        for document in documents:
            cfg = ExperimentConfig.from_dict(document)
            by_scheme[cfg.scheme] = run_experiment(cfg)
        order = ["channel-map-bec", "channel-bp-multi", "channel-bp", "channel-sc"]
        for stronger, weaker in zip(order, order[1:]):
            for a, b in zip(by_scheme[stronger], by_scheme[weaker]):
                assert a.failures <= b.failures
                assert a.ci_low <= b.ci_low and a.ci_high <= b.ci_high

    def test_rm_beats_arikan_under_map(self):
        """Test that RM-rule codes are never significantly worse than Arikan codes under MAP."""
        documents = ExperimentResolver().resolve_preset("fig3", "small", {"trials": 2000})
        results = {}
        for document in documents:
            cfg = ExperimentConfig.from_dict(document)
            results[cfg.rule] = run_experiment(cfg)
        for rm, arikan in zip(results["rm"], results["arikan"]):
            assert rm.ci_low <= arikan.ci_high
        assert sum(s.failures for s in results["rm"]) < sum(s.failures for s in results["arikan"])

    def test_bp_beats_sc_on_bawgn(self):
        """Test BP block error below SC with disjoint intervals on BAWGN(0.97865), N = 1024."""
        cfg = ExperimentConfig(
            scheme="channel-sc",
            n=[10],
            rates=[0.4],
            channel_kind="bawgn",
            channel_params=[0.97865],
            trials=3000,
            construction_trials=20000,
        )
        comparison = paired_compare(cfg, ["bp", "sc"])[0]
        by_decoder = {s.decoder: s for s in comparison.summaries}
        bp, sc = by_decoder["bp"], by_decoder["sc"]
        assert bp.ci_high < sc.ci_low
        assert 0.1 < bp.p_hat < sc.p_hat < 0.45
