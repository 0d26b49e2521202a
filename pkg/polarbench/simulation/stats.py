"""Binomial confidence intervals."""

from typing import Tuple

import numpy as np
from scipy import stats

from ..exceptions import InvalidInputError


def confidence_interval(failures: int, trials: int, level: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for failures / trials.

    The bounds are exact at the edges: 0 failures give a lower bound of 0
    and ``trials`` failures an upper bound of 1.
    """
    if trials <= 0:
        raise InvalidInputError(f"Confidence interval needs at least one trial, got {trials}")
    if not 0 <= failures <= trials:
        raise InvalidInputError(f"Failures must lie in [0, {trials}], got {failures}")
    if not 0.0 < level < 1.0:
        raise InvalidInputError(f"Confidence level must lie in (0, 1), got {level}")
    z = float(stats.norm.ppf(0.5 + level / 2.0))
    p_hat = failures / trials
    z2n = z * z / trials
    center = (p_hat + z2n / 2.0) / (1.0 + z2n)
    half = z / (1.0 + z2n) * np.sqrt(p_hat * (1.0 - p_hat) / trials + z2n / (4.0 * trials))
    low = 0.0 if failures == 0 else max(0.0, float(center - half))
    high = 1.0 if failures == trials else min(1.0, float(center + half))
    return low, high
