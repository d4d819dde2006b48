"""Real-coded variation operators on the [0, 1] box: SBX and polynomial mutation."""

from typing import Tuple

import numpy as np

from ..utils.error_handler import UsageError
from .seeding import SeedLike, make_rng

LOWER = 0.0
UPPER = 1.0


def spread_factor(u: np.ndarray, eta: float) -> np.ndarray:
    """SBX spread factor beta for uniform draws ``u`` in [0, 1)."""
    u = np.asarray(u, dtype=np.float64)
    exponent = 1.0 / (eta + 1.0)
    contracting = (2.0 * u) ** exponent
    with np.errstate(divide="ignore"):
        expanding = (1.0 / (2.0 * (1.0 - u))) ** exponent
    return np.where(u <= 0.5, contracting, expanding)


def sbx_spread_cdf(beta: np.ndarray, eta: float) -> np.ndarray:
    """Analytic CDF of the SBX spread factor."""
    beta = np.asarray(beta, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return np.where(
            beta <= 1.0,
            0.5 * beta ** (eta + 1.0),
            1.0 - 0.5 * beta ** -(eta + 1.0),
        )


def sbx_crossover(
    a: np.ndarray, b: np.ndarray, eta: float, seed: SeedLike
) -> Tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover, one spread factor per gene, children clipped to [0, 1].

    Children are written as midpoint -/+ half the spread so identical parents
    reproduce themselves exactly.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise UsageError(f"parents differ in length: {a.shape} vs {b.shape}")
    rng = make_rng(seed)
    beta = spread_factor(rng.random(a.shape), eta)

    mid = 0.5 * (a + b)
    half = 0.5 * beta * (b - a)
    c1 = np.clip(mid - half, LOWER, UPPER)
    c2 = np.clip(mid + half, LOWER, UPPER)
    return c1, c2


def polynomial_mutation(g: np.ndarray, eta_m: float, p_gene: float, seed: SeedLike) -> np.ndarray:
    """Bounded polynomial mutation applied to each gene with probability ``p_gene``."""
    if not 0.0 <= p_gene <= 1.0:
        raise UsageError(f"p_gene must lie in [0, 1], got {p_gene}")
    g = np.asarray(g, dtype=np.float64)
    rng = make_rng(seed)
    # both draws happen for every gene so the stream layout does not depend on p_gene
    mask = rng.random(g.shape) < p_gene
    u = rng.random(g.shape)

    span = UPPER - LOWER
    delta_l = (g - LOWER) / span
    delta_r = (UPPER - g) / span
    power = 1.0 / (eta_m + 1.0)

    low_val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - delta_l) ** (eta_m + 1.0)
    high_val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - delta_r) ** (eta_m + 1.0)
    with np.errstate(invalid="ignore"):
        delta_q = np.where(u < 0.5, low_val**power - 1.0, 1.0 - high_val**power)

    mutated = np.clip(g + delta_q * span, LOWER, UPPER)
    return np.where(mask, mutated, g)
