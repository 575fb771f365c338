"""Latin hypercube sampling with a maximin improvement pass."""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError


def lhs(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """One random Latin hypercube sample of n points in [0, 1]^d.

    Each margin gets exactly one point per width-1/n stratum, placed
    uniformly at random within its cell.
    """
    if n < 1 or d < 1:
        raise InvalidArgumentError("lhs requires n >= 1 and d >= 1")
    cells = np.column_stack([rng.permutation(n) for _ in range(d)])
    return (cells + rng.random((n, d))) / n


def maximin_lhs(
    n: int, d: int, rng: np.random.Generator, n_candidates: int = 20
) -> np.ndarray:
    """Best of ``n_candidates`` random LHS designs by minimum pairwise distance."""
    best, best_score = None, -np.inf
    for _ in range(n_candidates):
        cand = lhs(n, d, rng)
        if n == 1:
            return cand
        d2 = np.sum((cand[:, None, :] - cand[None, :, :]) ** 2, axis=-1)
        score = np.min(d2[np.triu_indices(n, k=1)])
        if score > best_score:
            best, best_score = cand, score
    return best
