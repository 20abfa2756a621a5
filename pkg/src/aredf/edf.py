"""Empirical distribution functions and their symmetrized form."""

from __future__ import annotations

import numpy as np

__all__ = ["EdfView", "ks_distance"]


class EdfView:
    """Immutable sorted-sample view; evaluation counts points <= x."""

    __slots__ = ("sorted_sample", "n")

    def __init__(self, sample):
        arr = np.sort(np.asarray(sample, dtype=float))
        if arr.size == 0:
            raise ValueError("empty sample")
        self.sorted_sample = arr
        self.n = int(arr.size)

    def evaluate(self, x):
        return np.searchsorted(self.sorted_sample, x, side="right") / self.n

    def symmetrized(self, x):
        """(F(x) + 1 - F(-x)) / 2, ordered so S(0) = 1/2 holds exactly."""
        x = np.asarray(x, dtype=float)
        return 0.5 * (self.evaluate(x) - self.evaluate(-x)) + 0.5


def ks_distance(view, dist):
    """sup_x |F_n(x) - G(x)|, evaluated exactly at the jump points."""
    c = np.asarray(dist.cdf(view.sorted_sample), dtype=float)
    n = view.n
    after = np.arange(1, n + 1) / n
    before = np.arange(0, n) / n
    return float(max(np.max(after - c), np.max(c - before)))
