"""Experiment configuration and validation modules."""

from .resolver import ExperimentResolver
from .validator import ExperimentValidator

__all__ = ["ExperimentResolver", "ExperimentValidator"]
