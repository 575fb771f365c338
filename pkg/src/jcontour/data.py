"""Shared observation history: aligned design and response matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

# Two inputs closer than this (Euclidean) are considered duplicates.
MIN_SEPARATION = 1e-6


@dataclass(frozen=True)
class Dataset:
    """Aligned design matrix ``X`` (n x d, unit cube) and responses ``Y`` (n x R).

    Rows of ``X`` and ``Y`` correspond one-to-one.  The functions being
    emulated are deterministic, so duplicate inputs are rejected: they carry
    no information.
    """

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        if X.size == 0:
            X = X.reshape(0, max(X.shape[-1], 1) if X.ndim == 2 else 1)
        if Y.size == 0:
            Y = Y.reshape(0, max(Y.shape[-1], 1) if Y.ndim == 2 else 1)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        if X.shape[0] != Y.shape[0]:
            raise InvalidArgumentError(
                f"X has {X.shape[0]} rows but Y has {Y.shape[0]}"
            )
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise InvalidArgumentError("non-finite entries in X or Y")
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise InvalidArgumentError("X entries must lie in [0, 1]")
        if X.shape[0] > 1:
            d2 = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1)
            iu = np.triu_indices(X.shape[0], k=1)
            if np.any(d2[iu] < MIN_SEPARATION**2):
                raise InvalidArgumentError("duplicate design points in X")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def R(self) -> int:
        return self.Y.shape[1]

    def append(self, x, y) -> "Dataset":
        """Return a new Dataset with one observation added."""
        x = np.asarray(x, dtype=float).reshape(1, -1)
        y = np.asarray(y, dtype=float).reshape(1, -1)
        if self.n == 0:
            return Dataset(x, y)
        return Dataset(np.vstack([self.X, x]), np.vstack([self.Y, y]))

    @classmethod
    def empty(cls, d: int, R: int) -> "Dataset":
        return cls(np.empty((0, d)), np.empty((0, R)))
