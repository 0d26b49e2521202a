"""Experiment resolver that merges defaults, presets, user files and overrides."""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from loguru import logger

from ..config import Config
from ..exceptions import ConfigError
from .validator import ExperimentValidator

SCALES = ("small", "paper")


class ExperimentResolver:
    """Resolves and validates experiment documents from multiple sources."""

    # Default experiment values
    DEFAULTS: Dict[str, Any] = {
        "rates": [0.5],
        "rule": "arikan",
        "channel_kind": "bec",
        "channel_params": [0.5],
        "m": [0],
        "distortions": [0.2],
        "trials": 1000,
        "max_rounds": Config.BP_MAX_ROUNDS,
        "construction_method": "genie",
        "construction_trials": Config.CONSTRUCTION_TRIALS,
        "backoff": 0.0,
        "use_measured_distortion": False,
        "source_bias": 0.5,
    }

    def __init__(self, presets_path: Optional[str] = None):
        """Initialize resolver.

        Args:
            presets_path: YAML file with presets (defaults to the bundled presets.yaml)
        """
        self.presets_path = (
            Path(presets_path) if presets_path else Path(__file__).parent / "presets.yaml"
        )
        self.validator = ExperimentValidator()
        self.presets = self._load_presets()

    def _load_presets(self) -> Dict[str, Dict]:
        """Load available experiment presets."""
        if not self.presets_path.exists():
            return {}

        try:
            with open(self.presets_path, "r") as f:
                data = yaml.safe_load(f) or {}
            return data if isinstance(data, dict) else {}
        except Exception as e:
            logger.warning("Could not load presets: {}", e)
            return {}

    def preset_descriptions(self) -> Dict[str, str]:
        return {name: str(p.get("description", "")) for name, p in self.presets.items()}

    def _deep_merge(self, base: Dict, override: Dict) -> Dict:
        """Deep merge two dictionaries, with override taking precedence."""
        result = base.copy()

        for key, value in override.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = value

        return result

    def _scale_block(self, preset: str, scale: str) -> Dict[str, Any]:
        if preset not in self.presets:
            raise ConfigError(
                f"Unknown preset '{preset}', expected one of {', '.join(sorted(self.presets))}"
            )
        if scale not in SCALES:
            raise ConfigError(f"Unknown scale '{scale}', expected one of {', '.join(SCALES)}")
        block = self.presets[preset].get(scale)
        if not isinstance(block, dict):
            raise ConfigError(f"Preset '{preset}' has no '{scale}' scale")
        return block

    def load_user_config(self, config_path: str) -> Dict[str, Any]:
        """Load an experiment document from a YAML or JSON file."""
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"Experiment file not found: {config_path}")
        try:
            with open(path, "r") as f:
                if path.suffix == ".json":
                    result = json.load(f)
                else:
                    result = yaml.safe_load(f)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ConfigError(f"Could not parse {config_path}: {e}") from e
        if not isinstance(result, dict):
            raise ConfigError(f"{config_path} must hold a mapping")
        return result

    def resolve_and_validate(
        self,
        config: Optional[Dict] = None,
        config_path: Optional[str] = None,
        preset: Optional[str] = None,
        scale: str = "small",
    ) -> Dict:
        """Resolve and validate one experiment document from all sources.

        Layers: DEFAULTS, then the preset's base block at ``scale``, then the
        user file, then ``config``. A ``preset`` (and ``scale``) key inside
        the user file selects the preset when none is passed.

        Returns:
            Dictionary with:
                - status: 'valid' or 'invalid'
                - resolved_config: Fully merged experiment document
                - issues: List of validation errors/warnings
                - explanation: Human-readable summary
        """
        resolved = dict(self.DEFAULTS)
        user_config: Dict[str, Any] = {}
        explanation_parts = []

        try:
            if config_path:
                user_config = self.load_user_config(config_path)
                explanation_parts.append(f"Loaded experiment from {config_path}")
            preset = preset or user_config.get("preset")
            scale = user_config.get("scale", scale)
            user_config = {k: v for k, v in user_config.items() if k not in ("preset", "scale")}

            # Layer 1: preset base block
            if preset:
                base = self._scale_block(preset, scale).get("base", {})
                resolved = self._deep_merge(resolved, base)
                explanation_parts.insert(0, f"Using preset '{preset}' at {scale} scale")
        except ConfigError as e:
            return {
                "status": "invalid",
                "resolved_config": {},
                "issues": [str(e)],
                "explanation": str(e),
            }

        # Layer 2: user file, Layer 3: direct overrides
        resolved = self._deep_merge(resolved, user_config)
        if config:
            resolved = self._deep_merge(resolved, config)
            explanation_parts.append("Using provided overrides")

        validation_result = self.validator.validate(resolved)

        if validation_result["valid"]:
            explanation_parts.append("Experiment is valid")
        else:
            explanation_parts.append("Experiment has errors")

        return {
            "status": "valid" if validation_result["valid"] else "invalid",
            "resolved_config": resolved if validation_result["valid"] else {},
            "issues": validation_result["errors"] + validation_result["warnings"],
            "explanation": ". ".join(explanation_parts) + ".",
        }

    def resolve_preset(
        self, preset: str, scale: str = "small", overrides: Optional[Dict] = None
    ) -> List[Dict[str, Any]]:
        """Validated experiment documents for every run of a preset.

        Raises:
            ConfigError: unknown preset or scale, or a run that does not validate
        """
        block = self._scale_block(preset, scale)
        base = self._deep_merge(self.DEFAULTS, block.get("base", {}))
        documents = []
        for run in block.get("runs") or [{}]:
            document = self._deep_merge(base, run or {})
            if overrides:
                document = self._deep_merge(document, overrides)
            result = self.validator.validate(document)
            if not result["valid"]:
                raise ConfigError(
                    f"Preset '{preset}' run is invalid: {'; '.join(result['errors'])}"
                )
            documents.append(document)
        return documents
