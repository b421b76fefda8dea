"""Detector interface: fit on a subject's templates, score queries.

Higher scores mean more likely genuine. Every detector is deterministic
given its constructor arguments (including seed) and the fit data.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np


class Detector(ABC):
    @abstractmethod
    def fit(self, templates: np.ndarray) -> "Detector":
        """Train on an (m, d) matrix of normalized template vectors."""

    @abstractmethod
    def score(self, query: np.ndarray) -> float:
        """Anomaly score of one (d,) query vector; higher = more genuine."""

    def score_all(self, queries: np.ndarray) -> np.ndarray:
        return np.array([self.score(q) for q in np.atleast_2d(queries)])


def as_matrix(templates: np.ndarray) -> np.ndarray:
    x = np.asarray(templates, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"expected a non-empty (m, d) template matrix, got shape {x.shape}")
    return x
