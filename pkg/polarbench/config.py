"""Runtime settings shared by decoders, construction and the simulation engine."""

import os
from typing import Optional

from loguru import logger


class Config:
    """Numeric defaults with optional per-instance overrides."""

    # Soft values are clipped to this magnitude inside LLR-domain kernels
    LLR_CLIP = 500.0

    DEFAULT_SEED = 20090501
    SEED_ENV_VAR = "POLARBENCH_SEED"

    # BP decoding
    BP_MAX_ROUNDS = 60
    BP_STABLE_ROUNDS = 2
    BP_BEC_MAX_ROUNDS = 10_000

    # Monte Carlo genie construction
    CONSTRUCTION_TRIALS = 100_000

    ML_ORACLE_MAX_K = 20
    ML_ORACLE_CHUNK = 4096

    # Upper bound on trials * block length held in memory by one decoding batch
    BATCH_ELEMENTS = 1 << 19
    DEFAULT_THREADS = 1

    def __init__(
        self,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
        batch_elements: Optional[int] = None,
        bp_max_rounds: Optional[int] = None,
        construction_trials: Optional[int] = None,
    ) -> None:
        """Initialize settings, falling back to the class defaults."""
        self.seed = seed if seed is not None else self.default_seed()
        self.threads = max(1, threads if threads is not None else self.DEFAULT_THREADS)
        if batch_elements is not None:
            self.BATCH_ELEMENTS = batch_elements
        if bp_max_rounds is not None:
            self.BP_MAX_ROUNDS = bp_max_rounds
        if construction_trials is not None:
            self.CONSTRUCTION_TRIALS = construction_trials

    @classmethod
    def default_seed(cls) -> int:
        """Seed used when none is given: the POLARBENCH_SEED variable or the fixed constant."""
        raw = os.environ.get(cls.SEED_ENV_VAR)
        if raw:
            try:
                return int(raw)
            except ValueError:
                logger.warning("ignoring non-integer {}={!r}", cls.SEED_ENV_VAR, raw)
        return cls.DEFAULT_SEED

    def batch_size(self, block_length: int) -> int:
        """Number of trials decoded together for blocks of the given length."""
        return max(1, self.BATCH_ELEMENTS // max(1, block_length))
