"""Experiment configuration validation module."""

import json
from pathlib import Path
from typing import Any, Dict, List, Tuple

try:
    import jsonschema
except ImportError:
    jsonschema = None  # type: ignore[assignment]

from ..channels import ChannelParam
from ..config import Config
from ..exceptions import InvalidInputError

# Schemes whose channel parameter is fixed to one channel family
SCHEME_CHANNEL_KIND = {
    "channel-map-bec": "bec",
    "lossless": "bsc",
    "slepian-wolf": "bsc",
    "erasure-quant": "bec",
    "hamming-quant": "bsc",
    "wyner-ziv": "bsc",
}


class ExperimentValidator:
    """Validates experiment documents against the schema and performs integrity checks."""

    def __init__(self) -> None:
        self.schema = self._load_schema()

    def _load_schema(self) -> Dict[str, Any]:
        """Load the experiment schema."""
        schema_path = Path(__file__).parent / "experiment.schema.json"
        try:
            with open(schema_path, "r") as f:
                result = json.load(f)
                return result if isinstance(result, dict) else {}
        except FileNotFoundError:
            return {}

    def validate_schema(self, config: Dict) -> Tuple[bool, List[str]]:
        """Validate an experiment document against the JSON schema.

        Returns:
            Tuple of (is_valid, list_of_errors)
        """
        if not self.schema:
            return True, ["Warning: Schema not found, skipping schema validation"]

        if jsonschema is None:
            return True, ["Warning: jsonschema package not installed, skipping schema validation"]

        try:
            jsonschema.validate(config, self.schema)
            return True, []
        except jsonschema.exceptions.ValidationError as e:
            return False, [f"Schema validation error: {e.message}"]

    def check_channel(self, config: Dict) -> List[str]:
        """Decoder/channel pairing and parameter ranges."""
        issues = []
        scheme = config.get("scheme", "")
        kind = SCHEME_CHANNEL_KIND.get(scheme, config.get("channel_kind", "bec"))
        if scheme in SCHEME_CHANNEL_KIND and config.get("channel_kind") not in (None, kind):
            if scheme == "channel-map-bec":
                issues.append("The map-bec decoder needs a BEC channel")
            else:
                issues.append(
                    f"Warning: {scheme} reads channel_params as {kind} parameters, "
                    f"channel_kind '{config.get('channel_kind')}' is ignored"
                )
        for value in config.get("channel_params", []):
            try:
                ChannelParam(kind, float(value))
            except InvalidInputError as e:
                issues.append(str(e))
        return issues

    def check_ml_oracle(self, config: Dict) -> List[str]:
        if config.get("scheme") != "channel-ml-oracle":
            return []
        issues = []
        for n in config.get("n", []):
            for rate in config.get("rates", []):
                k = int((1 << n) * rate + 1e-9)
                if k > Config.ML_ORACLE_MAX_K:
                    issues.append(
                        f"ML oracle needs |I| <= {Config.ML_ORACLE_MAX_K}, n={n} rate={rate} "
                        f"gives {k}"
                    )
        return issues

    def check_source_parameters(self, config: Dict) -> List[str]:
        issues = []
        scheme = config.get("scheme")
        params = config.get("channel_params", [])
        if scheme == "wyner-ziv":
            for p in params:
                if p > 0.5:
                    issues.append(f"Side-information crossover {p} exceeds 1/2")
                for D in config.get("distortions", []):
                    if D >= p:
                        issues.append(
                            f"Warning: distortion {D} is not below p={p}; no payload is needed"
                        )
        if scheme == "hamming-quant":
            for D in params:
                if not 0.0 < D < 0.5:
                    issues.append(f"Design distortion must lie in (0, 1/2), got {D}")
        if scheme == "erasure-quant":
            for eps in params:
                for rate in config.get("rates", []):
                    if rate >= eps:
                        issues.append(
                            f"Warning: channel rate {rate} is not below eps={eps}; "
                            "quantization will mostly fail"
                        )
        if scheme == "lossless":
            for n in config.get("n", []):
                for m in config.get("m", []):
                    for rate in config.get("rates", []):
                        if m / float(1 << n) > rate:
                            issues.append(
                                f"Source rate {rate} cannot carry {m} permutation bits at n={n}"
                            )
        return issues

    def validate_integrity(self, config: Dict) -> Tuple[bool, List[str]]:
        """Perform integrity checks on an experiment document.

        Returns:
            Tuple of (is_valid, list_of_issues)
        """
        all_issues: List[str] = []
        all_issues.extend(self.check_channel(config))
        all_issues.extend(self.check_ml_oracle(config))
        all_issues.extend(self.check_source_parameters(config))

        method = config.get("construction_method", "genie")
        if method == "genie" and config.get("construction_trials", 100000) < 1000:
            all_issues.append(
                "Warning: fewer than 1000 construction trials give a noisy frozen set"
            )

        if config.get("rule") == "rm" and config.get("scheme") not in (
            None,
            "channel-sc",
            "channel-bp",
            "channel-bp-multi",
            "channel-map-bec",
            "channel-ml-oracle",
        ):
            all_issues.append("Warning: the rm rule only applies to channel schemes")

        errors = [i for i in all_issues if not i.startswith("Warning:")]
        return len(errors) == 0, all_issues

    def validate(self, config: Dict) -> Dict:
        """Perform full validation of an experiment document.

        Returns:
            Dictionary with validation results:
                - valid: bool indicating if config is valid
                - schema_valid: bool for schema validation
                - integrity_valid: bool for integrity checks
                - errors: list of error messages
                - warnings: list of warning messages
        """
        errors: List[str] = []
        warnings: List[str] = []

        schema_valid, schema_issues = self.validate_schema(config)
        for issue in schema_issues:
            (warnings if issue.startswith("Warning:") else errors).append(issue)

        integrity_valid, integrity_issues = self.validate_integrity(config)

        # Separate warnings from errors
        for issue in integrity_issues:
            if issue.startswith("Warning:"):
                warnings.append(issue)
            else:
                errors.append(issue)

        return {
            "valid": not errors,
            "schema_valid": schema_valid,
            "integrity_valid": integrity_valid,
            "errors": errors,
            "warnings": warnings,
        }
