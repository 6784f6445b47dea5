"""Ground-truth trajectories and noisy sensor measurements."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..models import SensorModel
from .config import ScenarioConfig

TRUTH_STREAM = 0
MEASUREMENT_STREAM = 1


def stream_rng(master_seed: int, run: int, stream: int) -> np.random.Generator:
    """Generator for one (run, stream) pair; independent of how many runs exist."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, run, stream]))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def rotation(degrees: float) -> np.ndarray:
    a = np.deg2rad(degrees)
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Truth:
    """True states ``x_0..x_K`` and the same path without process noise."""

    states: np.ndarray
    nominal: np.ndarray


def generate_truth(cfg: ScenarioConfig, seed=None, *, noise: bool | None = None) -> Truth:
    """Propagate the initial true state through the dynamics for ``cfg.steps`` scans.

    At a turn step the velocity ``(vx, vy)`` of the state just reached is
    rotated counter-clockwise by the turn angle, keeping its magnitude.
    Process noise follows ``cfg.truth_noise`` unless ``noise`` overrides it.
    """
    noise = cfg.truth_noise if noise is None else noise
    F, Q = cfg.system.F, cfg.system.Q
    K, m = cfg.steps, cfg.system.dim
    turns = dict(cfg.turns)
    if noise:
        w = _rng(seed).multivariate_normal(np.zeros(m), Q, size=K, method="eigh")
    else:
        w = np.zeros((K, m))

    states = np.empty((K + 1, m))
    nominal = np.empty((K + 1, m))
    states[0] = nominal[0] = cfg.initial_truth
    for k in range(1, K + 1):
        states[k] = F @ states[k - 1] + w[k - 1]
        nominal[k] = F @ nominal[k - 1]
        if k in turns:
            rot = rotation(turns[k])
            states[k, 2:4] = rot @ states[k, 2:4]
            nominal[k, 2:4] = rot @ nominal[k, 2:4]
    return Truth(states, nominal)


def generate_measurements(
    states: np.ndarray,
    sensors: Sequence[SensorModel],
    seed=None,
    *,
    noise: str = "gaussian",
    zero_noise: bool = False,
) -> np.ndarray:
    """Measure each state in ``states`` with every sensor.

    Returns ``(K, J, n)``: ``y[k, s] = H_s states[k] + v[k, s]``. Noise is
    zero-mean with covariance ``R_s``, independent across steps and nodes;
    ``uniform`` noise has the same covariance as the Gaussian option.
    """
    states = np.atleast_2d(np.asarray(states, dtype=float))
    K, J = states.shape[0], len(sensors)
    dims = {s.meas_dim for s in sensors}
    if len(dims) != 1:
        raise ValueError(f"all sensors must share one measurement dimension, got {sorted(dims)}")
    n = dims.pop()
    clean = np.stack([states @ s.H.T for s in sensors], axis=1)
    if zero_noise:
        return clean
    rng = _rng(seed)
    if noise == "gaussian":
        z = rng.standard_normal((K, J, n))
    elif noise == "uniform":
        z = rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=(K, J, n))
    else:
        raise ValueError(f"unknown noise kind {noise!r}")
    chol = np.array([np.linalg.cholesky(s.R) for s in sensors])
    return clean + np.einsum("sij,ksj->ksi", chol, z)
