"""Estimation-error metrics.

``mse`` follows the tracking literature's Monte Carlo convention used here:
the run-average of the Euclidean error norm ``||xhat - x||`` (no square).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def error_norms(estimates: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """``||xhat[k, s] - x[k]||`` for estimates ``(K, J, m)`` and truth ``(K, m)``."""
    return np.linalg.norm(estimates - truth[:, None, :], axis=-1)


def consensus_error(estimates: np.ndarray) -> np.ndarray:
    """Mean pairwise disagreement ``1/(J(J-1)) sum_{s,j} ||xhat_s - xhat_j||`` per step.

    ``estimates`` is ``(K, J, m)``; a single node has zero disagreement.
    """
    K, J, _ = estimates.shape
    if J < 2:
        return np.zeros(K)
    diff = estimates[:, :, None, :] - estimates[:, None, :, :]
    return np.linalg.norm(diff, axis=-1).sum(axis=(1, 2)) / (J * (J - 1))


@dataclass
class MetricSeries:
    """Per-step metrics of one estimator: ``mse`` is ``(K, J)``, ``acee`` is ``(K,)``."""

    mse: np.ndarray
    acee: np.ndarray
    runs: int = 1
    averaged_over_runs: bool = True

    def time_averaged_mse(self, node: int = 0) -> float:
        return float(self.mse[:, node].mean())

    def time_averaged_acee(self) -> float:
        return float(self.acee.mean())
