"""Tests for the CLI interface."""

import json
import tempfile
from pathlib import Path

import yaml
from click.testing import CliRunner

from polarbench.cli.main import cli


class TestCLICommands:
    """Test all CLI commands."""

    def setup_method(self):
        """Set up test fixtures."""
        self.runner = CliRunner()
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def teardown_method(self):
        """Remove temporary files."""
        self.tmp.cleanup()

    def _construct(self, *args):
        path = str(self.dir / "code.json")
        result = self.runner.invoke(cli, ["construct", *args, "-o", path])
        assert result.exit_code == 0, result.output
        return path

    def test_cli_version(self):
        """Test CLI version display."""
        result = self.runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert "0.1.0" in result.output
        assert "polarbench" in result.output

    def test_cli_help(self):
        """Test CLI help."""
        result = self.runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        assert "polarbench CLI" in result.output
        for command in ["construct", "simulate", "compare", "compress", "wz", "preset"]:
            assert command in result.output

    def test_construct_rm(self):
        """Test the RM-rule example code written to a file."""
        path = self._construct("--channel", "bec:0.5", "--n", "3", "--rate", "0.5", "--rule", "rm")
        data = json.loads(Path(path).read_text())
        assert data["frozen"] == [0, 1, 2, 4]
        assert data["rule"] == "rm"

    def test_construct_to_stdout(self):
        """Test that the CodeSpec JSON goes to stdout without -o."""
        result = self.runner.invoke(cli, ["construct", "--n", "2", "--rate", "0.25"])
        assert result.exit_code == 0
        assert '"frozen"' in result.output
        assert "d_min=4" in result.output

    def test_construct_dual(self):
        """Test the --dual flag."""
        path = self._construct("--n", "3", "--rate", "0.5", "--rule", "rm", "--dual")
        data = json.loads(Path(path).read_text())
        assert data["orientation"] == "dual"
        assert data["frozen"] == [3, 5, 6, 7]

    def test_bad_channel(self):
        """Test that a malformed channel exits with status 1."""
        result = self.runner.invoke(
            cli, ["construct", "--channel", "foo:1", "--n", "3", "--rate", "0.5"]
        )
        assert result.exit_code == 1

    def test_missing_option(self):
        """Test that a missing required option exits with status 1."""
        result = self.runner.invoke(cli, ["construct", "--n", "3"])
        assert result.exit_code == 1

    def test_encode_decode_round_trip(self):
        """Test that noiseless codewords decode back to the messages."""
        code = self._construct("--n", "4", "--rate", "0.5")
        messages = self.dir / "messages.txt"
        messages.write_text("10110010\n# comment\n00000001\n")
        words = self.dir / "words.txt"
        result = self.runner.invoke(
            cli, ["encode", str(messages), "--code", code, "-o", str(words)]
        )
        assert result.exit_code == 0, result.output
        assert len(words.read_text().split()) == 2

        decoded = self.dir / "decoded.txt"
        for decoder in ["sc", "bp", "bp-multi", "map-bec", "ml"]:
            result = self.runner.invoke(
                cli,
                ["decode", str(words), "--code", code, "--decoder", decoder, "-o", str(decoded)],
            )
            assert result.exit_code == 0, result.output
            assert decoded.read_text().split() == ["10110010", "00000001"]

    def test_decode_erasures(self):
        """Test decoding a BEC observation with '?' symbols."""
        code = self._construct("--n", "3", "--rate", "0.5", "--rule", "rm")
        obs = self.dir / "obs.txt"
        obs.write_text("????????\n")
        result = self.runner.invoke(cli, ["decode", str(obs), "--code", code, "--decoder", "bp"])
        assert result.exit_code == 0
        assert "????" in result.output

    def test_encode_through_channel(self):
        """Test that channel observations are written in the channel's format."""
        code = self._construct("--n", "3", "--rate", "0.5", "--rule", "rm")
        messages = self.dir / "messages.txt"
        messages.write_text("1010\n")
        result = self.runner.invoke(
            cli, ["encode", str(messages), "--code", code, "--channel", "bec:1.0", "--seed", "1"]
        )
        assert result.exit_code == 0
        assert "????????" in result.output

    def test_decode_map_needs_bec(self):
        """Test that map-bec with a BSC channel exits with status 1."""
        code = self._construct("--n", "3", "--rate", "0.5", "--rule", "rm")
        obs = self.dir / "obs.txt"
        obs.write_text("00000000\n")
        result = self.runner.invoke(
            cli,
            ["decode", str(obs), "--code", code, "--decoder", "map-bec", "--channel", "bsc:0.1"],
        )
        assert result.exit_code == 1
        assert "BEC" in result.output

    def test_simulate_csv(self):
        """Test a small simulation appended to a CSV file."""
        csv_path = self.dir / "results.csv"
        args = ["simulate", "--n", "4", "--rate", "0.5", "--decoder", "bp", "--channel", "bec:0.5"]
        args += ["--trials", "50", "--seed", "3", "--csv", str(csv_path)]
        result = self.runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        lines = csv_path.read_text().strip().split("\n")
        assert lines[0].startswith("scheme,n,rate")
        assert lines[1].startswith("channel-bp,4,0.5,arikan,bec,0.5,bp,50,")

    def test_simulate_zero_trials(self):
        """Test that --trials 0 exits with status 1."""
        result = self.runner.invoke(
            cli, ["simulate", "--n", "4", "--rate", "0.5", "--channel", "bec:0.5", "--trials", "0"]
        )
        assert result.exit_code == 1

    def test_simulate_map_with_bsc(self):
        """Test that map-bec on a BSC exits with status 1."""
        args = ["simulate", "--n", "4", "--rate", "0.5", "--decoder", "map-bec"]
        result = self.runner.invoke(cli, args + ["--channel", "bsc:0.1"])
        assert result.exit_code == 1

    def test_simulate_ml_refused(self):
        """Test that the ML oracle refusal exits with status 1."""
        result = self.runner.invoke(
            cli,
            ["simulate", "--n", "6", "--rate", "0.5", "--decoder", "ml", "--channel", "bec:0.5"],
        )
        assert result.exit_code == 1

    def test_simulate_with_code_file(self):
        """Test simulating an explicit code."""
        code = self._construct("--n", "4", "--rate", "0.5", "--rule", "rm")
        result = self.runner.invoke(
            cli, ["simulate", "--code", code, "--channel", "bec:0.3", "--trials", "20"]
        )
        assert result.exit_code == 0, result.output
        assert "channel-sc,4,0.5,rm" in result.output

    def test_simulate_config_file(self):
        """Test simulating an experiment file."""
        config = self.dir / "experiment.yaml"
        config.write_text(
            yaml.dump({"scheme": "channel-sc", "n": [4], "rates": [0.25, 0.5], "trials": 20})
        )
        result = self.runner.invoke(cli, ["simulate", "--config", str(config)])
        assert result.exit_code == 0, result.output
        assert result.output.count("channel-sc,4,") == 2

    def test_simulate_invalid_config_file(self):
        """Test that an invalid experiment file exits with status 1."""
        config = self.dir / "experiment.yaml"
        config.write_text(yaml.dump({"scheme": "channel-sc", "n": [4], "trials": -3}))
        result = self.runner.invoke(cli, ["simulate", "--config", str(config)])
        assert result.exit_code == 1
        assert "invalid" in result.output

    def test_compare(self):
        """Test paired comparison output on the BEC."""
        result = self.runner.invoke(
            cli, ["compare", "--n", "4", "--rate", "0.5", "--trials", "50", "--seed", "1"]
        )
        assert result.exit_code == 0, result.output
        assert "bp failed where sc succeeded: 0" in result.output
        assert "map-bec failed where bp-multi succeeded: 0" in result.output

    def test_compress_decompress_round_trip(self):
        """Test compressing and recovering a sparse source block."""
        code = self._construct(
            "--channel", "bsc:0.11", "--n", "4", "--rate", "0.25", "--method", "bhattacharyya"
        )
        block = self.dir / "block.txt"
        block.write_text("0000000000000000\n")
        packed = self.dir / "block.pbc"
        args = ["compress", str(block), "--code", code, "--p", "0.11", "--m", "1"]
        args += ["-o", str(packed)]
        result = self.runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        assert packed.exists()
        result = self.runner.invoke(cli, ["decompress", str(packed), "--code", code, "--p", "0.11"])
        assert result.exit_code == 0, result.output
        assert "0000000000000000" in result.output

    def test_sw(self):
        """Test Slepian-Wolf recovery of y equal to x."""
        code = self._construct(
            "--channel", "bsc:0.11", "--n", "4", "--rate", "0.5", "--method", "bhattacharyya"
        )
        x = self.dir / "x.txt"
        x.write_text("1011001110001111\n")
        result = self.runner.invoke(cli, ["sw", str(x), str(x), "--code", code, "--p", "0.05"])
        assert result.exit_code == 0, result.output
        assert "1011001110001111" in result.output

    def test_quantize_erasure(self):
        """Test erasure quantization of an all-erased block."""
        source = self.dir / "s.txt"
        source.write_text("????????\n")
        args = ["quantize", "--kind", "erasure", "--n", "3", "--eps", "0.5", "--rate", "0.25"]
        result = self.runner.invoke(cli, args + ["--input", str(source)])
        assert result.exit_code == 0, result.output
        assert "Zero distortion" in result.output

    def test_quantize_missing_options(self):
        """Test that erasure quantization needs --eps and --rate."""
        result = self.runner.invoke(cli, ["quantize", "--kind", "erasure", "--n", "3"])
        assert result.exit_code == 1

    def test_zprofile(self):
        """Test the exact Z profile lines."""
        result = self.runner.invoke(cli, ["zprofile", "--eps", "0.5", "--n", "2"])
        assert result.exit_code == 0
        lines = result.output.strip().split("\n")
        assert lines == ["0\t0.9375", "1\t0.4375", "2\t0.5625", "3\t0.0625"]

    def test_mindist(self):
        """Test minimum distance of an RM-rule code with enumeration."""
        result = self.runner.invoke(cli, ["mindist", "--n", "3", "--rate", "0.5", "--brute"])
        assert result.exit_code == 0, result.output
        assert "d_min = 4" in result.output
        assert "enumeration gives 4" in result.output

    def test_list_presets(self):
        """Test listing presets."""
        result = self.runner.invoke(cli, ["list-presets"])
        assert result.exit_code == 0
        assert "fig4" in result.output
        assert "fig6R" in result.output

    def test_validate_config(self):
        """Test validating valid and invalid experiment files."""
        good = self.dir / "good.yaml"
        good.write_text(yaml.dump({"scheme": "channel-bp", "n": [8]}))
        result = self.runner.invoke(cli, ["validate-config", str(good)])
        assert result.exit_code == 0
        assert "✅ Experiment is valid" in result.output

        bad = self.dir / "bad.yaml"
        bad.write_text(yaml.dump({"scheme": "channel-bp", "n": [8], "rates": [2.0]}))
        result = self.runner.invoke(cli, ["validate-config", str(bad)])
        assert result.exit_code == 1
        assert "❌ Experiment is invalid" in result.output

    def test_validate_config_with_preset(self):
        """Test validating overrides on top of a preset."""
        overrides = self.dir / "overrides.yaml"
        overrides.write_text(yaml.dump({"trials": 100}))
        result = self.runner.invoke(cli, ["validate-config", str(overrides), "--preset", "fig3"])
        assert result.exit_code == 0
        assert "fig3" in result.output

    def test_preset_run(self):
        """Test running a preset at a reduced trial count."""
        out = self.dir / "results"
        args = ["preset", "--figure", "fig3", "--scale", "small", "--out", str(out)]
        args += ["--trials", "5"]
        result = self.runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        lines = (out / "fig3-small.csv").read_text().strip().split("\n")
        assert len(lines) == 1 + 6

    def test_preset_unknown(self):
        """Test that an unknown preset exits with status 1."""
        result = self.runner.invoke(cli, ["preset", "--figure", "fig99", "--out", str(self.dir)])
        assert result.exit_code == 1
