"""Linear-Gaussian system and sensor models, and the stacked WLS form.

All matrices are dense float64 arrays. Objects are frozen after
construction and their arrays are marked read-only, so they can be shared
freely between threads and processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class ModelError(ValueError):
    """A model matrix has the wrong shape or violates a covariance property."""


def _frozen(a, ndim: int, name: str) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.ndim == 0 and ndim == 2:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 0 and ndim == 1:
        arr = arr.reshape(1)
    if arr.ndim != ndim:
        raise ModelError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


def is_symmetric(a: np.ndarray) -> bool:
    """Symmetry up to ``1e-9 * (1 + max|a|)``."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = 1.0 + (np.max(np.abs(a)) if a.size else 0.0)
    return bool(np.max(np.abs(a - a.T), initial=0.0) <= 1e-9 * scale)


def is_positive_definite(a: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return False
    return True


def is_positive_semidefinite(a: np.ndarray) -> bool:
    # Cholesky with a relative jitter accepts singular PSD matrices.
    a = np.asarray(a, dtype=float)
    jitter = 1e-12 * (1.0 + np.max(np.abs(a), initial=0.0))
    return is_positive_definite(a + jitter * np.eye(a.shape[0]))


class DegenerateError(ArithmeticError):
    """A matrix that must be inverted is singular or not positive definite."""


def matvec(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``a @ v`` over leading batch axes.

    Single and batched calls run the same reduction loop, which keeps the
    centralized and distributed paths bitwise comparable.
    """
    return np.einsum("...ij,...j->...i", a, v)


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def spd_inv(a: np.ndarray) -> np.ndarray:
    """Inverse of a (stack of) symmetric positive definite matrices.

    Goes through the Cholesky factor, so a non-PD input raises
    :class:`DegenerateError` instead of returning garbage.
    """
    try:
        c = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise DegenerateError(f"matrix is not positive definite: {exc}") from None
    # Rounding can leave a tiny positive pivot on an exactly singular matrix.
    pivots = np.diagonal(c, axis1=-2, axis2=-1) ** 2
    if np.any(pivots.min(axis=-1) <= 1e-14 * pivots.max(axis=-1)):
        raise DegenerateError("matrix is numerically singular")
    c_inv = np.linalg.inv(c)
    return np.swapaxes(c_inv, -1, -2) @ c_inv


def check_covariance(a: np.ndarray, name: str, *, definite: bool = True) -> None:
    """Raise :class:`ModelError` naming the matrix and the failed check."""
    if not is_symmetric(a):
        raise ModelError(f"{name} not symmetric")
    ok = is_positive_definite(a) if definite else is_positive_semidefinite(a)
    if not ok:
        kind = "positive definite" if definite else "positive semidefinite"
        raise ModelError(f"{name} not {kind}")


@dataclass(frozen=True)
class SystemModel:
    """Dynamics ``x[k+1] = F x[k] + w[k]`` with ``Cov(w) = Q``."""

    F: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "F", _frozen(self.F, 2, "F"))
        object.__setattr__(self, "Q", _frozen(self.Q, 2, "Q"))

    @property
    def dim(self) -> int:
        return self.F.shape[0]

    @classmethod
    def constant_velocity(cls, scan_time: float, Q) -> SystemModel:
        """2-D constant-velocity model with state ``[px, py, vx, vy]``."""
        F = np.eye(4)
        F[0, 2] = F[1, 3] = scan_time
        return cls(F, Q)


@dataclass(frozen=True)
class SensorModel:
    """Linear sensor ``y = H x + v`` with ``Cov(v) = R``."""

    H: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "H", _frozen(self.H, 2, "H"))
        object.__setattr__(self, "R", _frozen(self.R, 2, "R"))

    @property
    def meas_dim(self) -> int:
        return self.H.shape[0]

    def information(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(H^T R^-1 H, H^T R^-1)``, the sensor's information terms."""
        ht_rinv = self.H.T @ spd_inv(self.R)
        return symmetrize(ht_rinv @ self.H), ht_rinv


@dataclass(frozen=True)
class StateEstimate:
    """State mean with its information matrix (inverse error covariance)."""

    mean: np.ndarray
    info: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(self.mean, 1, "mean"))
        object.__setattr__(self, "info", _frozen(self.info, 2, "info"))
        if self.info.shape != (self.mean.size, self.mean.size):
            raise ModelError(
                f"info shape {self.info.shape} does not match mean length {self.mean.size}"
            )

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def cov(self) -> np.ndarray:
        return spd_inv(self.info)

    def validate(self, name: str = "info") -> StateEstimate:
        check_covariance(self.info, name)
        return self

    @classmethod
    def from_covariance(cls, mean, cov) -> StateEstimate:
        return cls(mean, spd_inv(np.asarray(cov, dtype=float)))


@dataclass(frozen=True)
class ModelBundle:
    system: SystemModel
    sensors: tuple[SensorModel, ...]

    @property
    def dim(self) -> int:
        return self.system.dim


def validate_models(
    sys: SystemModel | ModelBundle, sensors: Sequence[SensorModel] | None = None
) -> ModelBundle:
    """Check dimensions and covariance properties of a system/sensor set.

    Q must be symmetric PSD (PD is not required: the time update only needs
    ``F P F^T + Q`` to be invertible). Every R must be symmetric PD. A
    :class:`ModelBundle` may be passed alone and is re-validated.
    """
    if isinstance(sys, ModelBundle):
        sys, sensors = sys.system, sys.sensors
    sensors = tuple(sensors or ())
    if not sensors:
        raise ModelError("at least one sensor is required")
    m = sys.F.shape[0]
    if sys.F.shape != (m, m):
        raise ModelError(f"F must be square, got {sys.F.shape}")
    if sys.Q.shape != (m, m):
        raise ModelError(f"Q shape {sys.Q.shape} does not match state dimension {m}")
    check_covariance(sys.Q, "Q", definite=False)
    for i, sensor in enumerate(sensors):
        n = sensor.H.shape[0]
        if sensor.H.shape[1] != m:
            raise ModelError(
                f"H (sensor {i}) has {sensor.H.shape[1]} columns, state dimension is {m}"
            )
        if sensor.R.shape != (n, n):
            raise ModelError(f"R (sensor {i}) shape {sensor.R.shape}, expected {(n, n)}")
        check_covariance(sensor.R, "R")
    return ModelBundle(sys, sensors)


@dataclass(frozen=True)
class StackedWlsProblem:
    """Prior and measurements stacked as one WLS problem.

    ``obs = design @ x + noise`` with ``Cov(noise)^-1 = weight``; the first
    ``m`` rows carry the prior mean with identity design.
    """

    obs: np.ndarray
    design: np.ndarray
    weight: np.ndarray
    blocks: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "obs", _frozen(self.obs, 1, "obs"))
        object.__setattr__(self, "design", _frozen(self.design, 2, "design"))
        object.__setattr__(self, "weight", _frozen(self.weight, 2, "weight"))
        p = self.obs.size
        if self.design.shape[0] != p or self.weight.shape != (p, p):
            raise ModelError(
                f"inconsistent stacked shapes: obs {p}, design {self.design.shape}, "
                f"weight {self.weight.shape}"
            )
        if self.blocks and sum(self.blocks) != p:
            raise ModelError(f"block sizes {self.blocks} do not sum to {p}")

    @property
    def noise_mean(self) -> np.ndarray:
        return np.zeros(self.obs.size)

    @property
    def noise_cov(self) -> np.ndarray:
        return spd_inv(self.weight)

    def cost(self, x) -> float:
        """Weighted squared residual ``(obs - design x)^T weight (obs - design x)``."""
        r = self.obs - self.design @ np.asarray(x, dtype=float)
        return float(r @ self.weight @ r)


def _block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i : i + k, i : i + k] = b
        i += k
    return out


def stack_wls(
    prior: StateEstimate,
    sensors: Sequence[SensorModel],
    measurements: Sequence,
) -> StackedWlsProblem:
    """Stack ``[prior.mean; y_1; ...; y_J]`` against ``[I; H_1; ...; H_J]``.

    The weight is ``blkdiag(prior.info, R_1^-1, ..., R_J^-1)``.
    """
    sensors = list(sensors)
    ys = [np.atleast_1d(np.asarray(y, dtype=float)) for y in measurements]
    if len(ys) != len(sensors):
        raise ModelError(f"{len(sensors)} sensors but {len(ys)} measurements")
    m = prior.dim
    for i, (sensor, y) in enumerate(zip(sensors, ys)):
        if sensor.H.shape[1] != m:
            raise ModelError(f"H (sensor {i}) has {sensor.H.shape[1]} columns, expected {m}")
        if y.shape != (sensor.meas_dim,):
            raise ModelError(
                f"measurement {i} has shape {y.shape}, expected ({sensor.meas_dim},)"
            )
    obs = np.concatenate([prior.mean, *ys])
    design = np.vstack([np.eye(m), *(s.H for s in sensors)])
    weight = _block_diag([np.asarray(prior.info), *(spd_inv(s.R) for s in sensors)])
    blocks = (m, *(s.meas_dim for s in sensors))
    return StackedWlsProblem(obs, design, weight, blocks)
