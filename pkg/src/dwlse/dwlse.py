"""Distributed WLS estimator: one filter per network node.

Each time step every node

1. builds its local cost from its own measurement and its own prediction,
   with the prior term down-weighted by ``1/J``;
2. runs ``admm_iters`` ADMM rounds with its neighbors starting from its
   prediction, and takes the final iterate as its state estimate;
3. runs ``ac_iters`` average-consensus rounds on ``H_s^T R_s^-1 H_s`` and sets
   ``info = J * S_s + prediction_info``;
4. predicts forward through the shared dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cif import predict_arrays, sensor_terms
from .consensus import AdmmProblemTerms, AdmmResult, ac_run, admm_run, check_epsilon
from .models import (
    DegenerateError,
    ModelError,
    SensorModel,
    StateEstimate,
    SystemModel,
    check_covariance,
    symmetrize,
)
from .network import NetworkTopology, max_degree


@dataclass(frozen=True)
class DwlseConfig:
    rho: float
    admm_iters: int
    ac_iters: int
    epsilon: float
    dual_uses_current_x: bool = False

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.admm_iters < 1:
            raise ValueError(f"admm_iters must be >= 1, got {self.admm_iters}")
        if self.ac_iters < 0:
            raise ValueError(f"ac_iters must be >= 0, got {self.ac_iters}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @classmethod
    def for_topology(
        cls, topo: NetworkTopology, rho: float, admm_iters: int, ac_iters: int,
        ac_rate: float = 0.65, **kw,
    ) -> DwlseConfig:
        """Config with ``epsilon = ac_rate / D_max``."""
        d_max = max_degree(topo)
        return cls(rho, admm_iters, ac_iters, ac_rate / d_max if d_max else ac_rate, **kw)


@dataclass(frozen=True)
class DwlseNode:
    id: int
    estimate: StateEstimate
    prediction: StateEstimate


def dwlse_init(
    node_count: int,
    mean,
    info,
    sys: SystemModel | None = None,
) -> list[DwlseNode]:
    """Identical starting nodes.

    With ``sys`` the given pair is an initial posterior and the prediction
    is one time update away. Without it the pair is already the prediction
    for the first measurement step (both fields hold it).
    """
    if node_count < 1:
        raise ValueError("node_count must be at least 1")
    est = StateEstimate(mean, info).validate("initial info")
    pred = est if sys is None else dwlse_predict_estimate(est, sys)
    return [DwlseNode(s, est, pred) for s in range(node_count)]


def dwlse_predict_estimate(estimate: StateEstimate, sys: SystemModel) -> StateEstimate:
    mean, info = predict_arrays(estimate.mean[None], estimate.info[None], sys.F, sys.Q)
    return StateEstimate(mean[0], info[0])


def dwlse_predict(node: DwlseNode, sys: SystemModel) -> DwlseNode:
    """Refresh the node's prediction from its current estimate."""
    return DwlseNode(node.id, node.estimate, dwlse_predict_estimate(node.estimate, sys))


@dataclass
class StepArrays:
    """Outcome of one step for all nodes, stacked along axis 0."""

    post_mean: np.ndarray
    post_info: np.ndarray
    pred_mean: np.ndarray
    pred_info: np.ndarray
    admm: AdmmResult


def step_arrays(
    pred_mean: np.ndarray,
    pred_info: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    topo: NetworkTopology,
    sys: SystemModel,
    cfg: DwlseConfig,
) -> StepArrays:
    """One estimator step on stacked arrays (``A``, ``b`` are the local sensor terms)."""
    J = topo.node_count
    check_epsilon(topo, cfg.epsilon)
    terms = AdmmProblemTerms(A, b, pred_info, pred_mean, cfg.rho)
    res = admm_run(
        terms, topo, pred_mean, cfg.admm_iters, dual_uses_current_x=cfg.dual_uses_current_x
    )
    S = ac_run(topo, A, cfg.epsilon, cfg.ac_iters) if cfg.ac_iters else A
    post_info = symmetrize(J * S + pred_info)
    try:
        np.linalg.cholesky(post_info)
    except np.linalg.LinAlgError:
        bad = [s for s in range(J) if np.linalg.eigvalsh(post_info[s]).min() <= 0]
        raise DegenerateError(f"fused information matrix not positive definite at nodes {bad}") from None
    post_mean = res.x
    nxt_mean, nxt_info = predict_arrays(post_mean, post_info, sys.F, sys.Q)
    return StepArrays(post_mean, post_info, nxt_mean, nxt_info, res)


def dwlse_step(
    nodes: Sequence[DwlseNode],
    topo: NetworkTopology,
    sensors: Sequence[SensorModel],
    measurements: Sequence,
    sys: SystemModel,
    cfg: DwlseConfig,
) -> list[DwlseNode]:
    """Advance every node by one measurement step.

    ``sensors[s]`` and ``measurements[s]`` belong to node ``s``. The returned
    nodes hold the new estimate and the prediction for the next step.
    """
    J = topo.node_count
    if not len(nodes) == len(sensors) == len(measurements) == J:
        raise ModelError(
            f"need one node, sensor and measurement per network node ({J}); got "
            f"{len(nodes)}, {len(sensors)}, {len(measurements)}"
        )
    A, b = sensor_terms(sensors, measurements)
    pred_mean = np.array([n.prediction.mean for n in nodes])
    pred_info = np.array([n.prediction.info for n in nodes])
    out = step_arrays(pred_mean, pred_info, A, b, topo, sys, cfg)
    return [
        DwlseNode(
            n.id,
            StateEstimate(out.post_mean[s], out.post_info[s]),
            StateEstimate(out.pred_mean[s], out.pred_info[s]),
        )
        for s, n in enumerate(nodes)
    ]


def check_nodes(nodes: Sequence[DwlseNode]) -> None:
    for n in nodes:
        check_covariance(n.estimate.info, f"estimate info (node {n.id})")
        check_covariance(n.prediction.info, f"prediction info (node {n.id})")
