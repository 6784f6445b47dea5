"""Centralized information filter and its WLS equivalent.

The centralized filter sees every sensor's measurement at each step. It is
the benchmark the distributed estimator is compared against and the oracle
it must reproduce in the limit of many consensus iterations.

The array kernels (``*_arrays``) work on estimates stacked along a leading
axis. The distributed estimator calls the same kernels, so a one-node
network reproduces the centralized filter bit for bit.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .models import (
    DegenerateError,
    SensorModel,
    StackedWlsProblem,
    StateEstimate,
    SystemModel,
    matvec,
    spd_inv,
    symmetrize,
)


def sensor_information(sensors: Sequence[SensorModel]) -> tuple[np.ndarray, np.ndarray]:
    """Stack ``H_s^T R_s^-1 H_s`` as ``(J, m, m)`` and ``H_s^T R_s^-1`` as ``(J, m, n)``.

    All sensors must share the measurement dimension ``n``.
    """
    pairs = [s.information() for s in sensors]
    return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])


def sensor_terms(
    sensors: Sequence[SensorModel], measurements: Sequence
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sensor information terms ``A_s = H^T R^-1 H``, ``b_s = H^T R^-1 y``.

    Returns arrays of shape ``(J, m, m)`` and ``(J, m)``.
    """
    if len(sensors) != len(measurements):
        raise ValueError(f"{len(sensors)} sensors but {len(measurements)} measurements")
    A, b = [], []
    for sensor, y in zip(sensors, measurements):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if y.shape != (sensor.meas_dim,):
            raise ValueError(f"measurement shape {y.shape}, expected ({sensor.meas_dim},)")
        a_s, ht_rinv = sensor.information()
        A.append(a_s)
        b.append(matvec(ht_rinv, y))
    return np.array(A), np.array(b)


def update_arrays(prior_mean, prior_info, A_total, b_total):
    normal = prior_info + A_total
    try:
        normal_inv = spd_inv(normal)
    except DegenerateError:
        raise DegenerateError("updated information matrix is singular") from None
    mean = matvec(normal_inv, b_total + matvec(prior_info, prior_mean))
    return mean, symmetrize(normal)


def predict_arrays(mean, info, F, Q):
    pred_mean = matvec(F, mean)
    cov = symmetrize(F @ spd_inv(info) @ F.T + Q)
    try:
        pred_info = spd_inv(cov)
    except DegenerateError:
        raise DegenerateError("predicted covariance F P F^T + Q is singular") from None
    return pred_mean, symmetrize(pred_info)


def information_update(
    prior: StateEstimate, A_total: np.ndarray, b_total: np.ndarray
) -> StateEstimate:
    """Measurement update given the summed information terms."""
    mean, info = update_arrays(
        prior.mean[None], prior.info[None], np.asarray(A_total)[None], np.asarray(b_total)[None]
    )
    return StateEstimate(mean[0], info[0])


def cif_measurement_update(
    prior: StateEstimate, sensors: Sequence[SensorModel], measurements: Sequence
) -> StateEstimate:
    """Fuse all sensors' measurements into ``prior``.

    ``info' = info + sum_s H_s^T R_s^-1 H_s`` and
    ``mean' = info'^-1 (info mean + sum_s H_s^T R_s^-1 y_s)``. The sums are
    accumulated per sensor; the stacked matrices are never built.
    """
    if not len(sensors):
        return prior
    A, b = sensor_terms(sensors, measurements)
    return information_update(prior, A.sum(axis=0), b.sum(axis=0))


def cif_time_update(post: StateEstimate, sys: SystemModel) -> StateEstimate:
    """Propagate through ``F``: ``mean' = F mean``, ``info' = (F info^-1 F^T + Q)^-1``."""
    mean, info = predict_arrays(post.mean[None], post.info[None], sys.F, sys.Q)
    return StateEstimate(mean[0], info[0])


def wls_solve(problem: StackedWlsProblem) -> StateEstimate:
    """Minimize the weighted residual of a stacked problem in closed form."""
    hw = problem.design.T @ problem.weight
    normal = symmetrize(hw @ problem.design)
    try:
        normal_inv = spd_inv(normal)
    except DegenerateError:
        raise DegenerateError("WLS normal matrix is singular") from None
    return StateEstimate(normal_inv @ (hw @ problem.obs), normal)


def run_cif(
    prior: StateEstimate,
    sys: SystemModel,
    sensors: Sequence[SensorModel],
    measurements: Iterable[Sequence],
) -> list[StateEstimate]:
    """Filter a measurement sequence starting from the step-1 prediction.

    ``measurements`` yields, per step, one vector per sensor. Returns the
    posterior estimate of each step.
    """
    out = []
    pred = prior
    for ys in measurements:
        post = cif_measurement_update(pred, sensors, ys)
        out.append(post)
        pred = cif_time_update(post, sys)
    return out
