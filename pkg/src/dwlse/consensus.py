"""ADMM consensus iteration and average consensus over a network.

Node quantities are stored stacked along the first axis (one row per node)
and every iteration is a synchronous map: all nodes read the previous
snapshot and write a new one, so the result does not depend on the order
in which nodes are evaluated. Neighbor sums are products with the adjacency
or Laplacian matrix; they only ever combine one-hop neighbors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .models import (
    DegenerateError,
    ModelError,
    check_covariance,
    matvec,
    spd_inv,
)
from .network import NetworkTopology, max_degree

DIVERGENCE_LIMIT = 1e12


class DivergenceError(ArithmeticError):
    def __init__(self, rho: float, iteration: int):
        super().__init__(
            f"ADMM iterate exceeded {DIVERGENCE_LIMIT:g} at iteration {iteration}; "
            f"penalty rho={rho:g} is likely mis-tuned"
        )
        self.rho = rho
        self.iteration = iteration


@dataclass(frozen=True)
class AdmmProblemTerms:
    """Local cost data of every node for one ADMM solve.

    Node ``s`` minimizes ``||y_s - H_s x||^2_{R_s^-1} + (1/J)||x - prior_mean_s||^2_{prior_info_s}``,
    represented by ``A[s] = H_s^T R_s^-1 H_s`` and ``b[s] = H_s^T R_s^-1 y_s``.
    """

    A: np.ndarray
    b: np.ndarray
    prior_info: np.ndarray
    prior_mean: np.ndarray
    rho: float

    def __post_init__(self):
        J, m = np.shape(self.b)
        if np.shape(self.A) != (J, m, m) or np.shape(self.prior_info) != (J, m, m):
            raise ModelError("A and prior_info must have shape (J, m, m)")
        if np.shape(self.prior_mean) != (J, m):
            raise ModelError("prior_mean must have shape (J, m)")
        if not self.rho > 0:
            raise ModelError(f"rho must be positive, got {self.rho}")

    @property
    def node_count(self) -> int:
        return self.b.shape[0]

    @property
    def dim(self) -> int:
        return self.b.shape[1]

    def validate(self) -> AdmmProblemTerms:
        for s in range(self.node_count):
            check_covariance(self.A[s], f"A[{s}]", definite=False)
            check_covariance(self.prior_info[s], f"prior_info[{s}]")
        return self

    def centralized_solution(self) -> np.ndarray:
        """Minimizer of the summed local costs (the network-wide WLS estimate)."""
        J = self.node_count
        normal = self.A.sum(axis=0) + self.prior_info.sum(axis=0) / J
        rhs = self.b.sum(axis=0) + matvec(self.prior_info, self.prior_mean).sum(axis=0) / J
        return np.linalg.solve(normal, rhs)


class AdmmNodeState(NamedTuple):
    x: np.ndarray
    lam: np.ndarray


@dataclass(frozen=True)
class AdmmState:
    """Snapshot of all nodes: local iterates ``x`` and aggregate multipliers ``lam``."""

    x: np.ndarray
    lam: np.ndarray

    def node(self, s: int) -> AdmmNodeState:
        return AdmmNodeState(self.x[s], self.lam[s])

    @classmethod
    def initial(cls, x0: np.ndarray) -> AdmmState:
        x0 = np.array(x0, dtype=float)
        return cls(x0, np.zeros_like(x0))


def tuned_rho(terms: AdmmProblemTerms, topo: NetworkTopology) -> float:
    """Penalty ``trace(mean_s A_s) / (2 D_max)``, a brisk default for desk-scale problems."""
    d_max = max(max_degree(topo), 1)
    return float(np.trace(terms.A.mean(axis=0))) / (2.0 * d_max)


def _x_operator(terms: AdmmProblemTerms, topo: NetworkTopology):
    """Per-node inverse system matrix and the iteration-invariant part of the rhs."""
    J, m = terms.node_count, terms.dim
    if topo.node_count != J:
        raise ModelError(f"topology has {topo.node_count} nodes, terms have {J}")
    scaled_info = terms.prior_info / J
    deg = topo.degrees.astype(float)
    system = (2.0 * terms.rho * deg)[:, None, None] * np.eye(m) + terms.A + scaled_info
    try:
        system_inv = spd_inv(system)
    except DegenerateError:
        raise DegenerateError("per-node ADMM system matrix is singular") from None
    const = terms.b + matvec(scaled_info, terms.prior_mean)
    return system_inv, const


def _x_step(system_inv, const, adj, deg, rho, x, lam):
    neighbor_sum = deg[:, None] * x + adj @ x
    return matvec(system_inv, const - 2.0 * lam + rho * neighbor_sum)


def admm_x_update(
    terms: AdmmProblemTerms, topo: NetworkTopology, state: AdmmState
) -> np.ndarray:
    """Primal update of every node from the previous snapshot.

    ``x_s = [2 rho J_s I + A_s + Omega_s/J]^-1
    [b_s + Omega_s xhat_s / J - 2 lam_s + rho sum_j (x_s + x_j)]``
    """
    system_inv, const = _x_operator(terms, topo)
    adj = topo.adjacency.astype(float)
    return _x_step(system_inv, const, adj, topo.degrees.astype(float), terms.rho, state.x, state.lam)


def admm_lambda_update(topo: NetworkTopology, state: AdmmState, rho: float) -> np.ndarray:
    """Dual update ``lam_s + (rho/2) sum_j (x_s - x_j)`` for every node."""
    return state.lam + 0.5 * rho * (topo.laplacian @ state.x)


def edge_midpoints(topo: NetworkTopology, x: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
    """Auxiliary edge variables ``z_sj = (x_s + x_j) / 2`` (diagnostic only)."""
    return {(s, j): 0.5 * (x[s] + x[j]) for s, j in topo.edges()}


def disagreement(topo: NetworkTopology, x: np.ndarray) -> float:
    """``sum_s sum_{j in N(s)} ||x_s - x_j||`` over ordered neighbor pairs."""
    s, j = np.nonzero(topo.adjacency)
    return float(np.linalg.norm(x[s] - x[j], axis=1).sum())


@dataclass
class AdmmResult:
    x: np.ndarray
    lam: np.ndarray
    iterations: int
    history: list[AdmmState] | None = None
    trace: list[tuple[int, int, float, float]] = field(default_factory=list)


def admm_run(
    terms: AdmmProblemTerms,
    topo: NetworkTopology,
    x0: np.ndarray | None = None,
    iterations: int = 1,
    *,
    keep_history: bool = False,
    reference: np.ndarray | None = None,
    dual_uses_current_x: bool = False,
) -> AdmmResult:
    """Run ``iterations`` synchronous ADMM rounds from ``x0`` with zero multipliers.

    By default both updates of round ``l`` read only round ``l-1`` values:
    the multipliers advance from ``x^{l-1}`` while the primal step uses
    ``lam^{l-1}``. With ``dual_uses_current_x`` the multipliers are instead
    advanced from the fresh ``x^l`` (standard decentralized ADMM ordering).

    ``x0`` defaults to each node's prior mean. When ``reference`` is given,
    ``trace`` collects ``(l, s, ||x_s^l - reference||, sum_j ||x_s^l - x_j^l||)``.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    system_inv, const = _x_operator(terms, topo)
    adj = topo.adjacency.astype(float)
    deg = topo.degrees.astype(float)
    lap = topo.laplacian
    rho = terms.rho
    half_rho = 0.5 * rho

    x = np.array(terms.prior_mean if x0 is None else x0, dtype=float)
    lam = np.zeros_like(x)
    history = [AdmmState(x, lam)] if keep_history else None
    result = AdmmResult(x, lam, iterations, history)
    if reference is not None:
        _record(result.trace, 0, x, reference, adj)

    for l in range(1, iterations + 1):
        if dual_uses_current_x:
            x = _x_step(system_inv, const, adj, deg, rho, x, lam)
            lam = lam + half_rho * (lap @ x)
        else:
            x, lam = (
                _x_step(system_inv, const, adj, deg, rho, x, lam),
                lam + half_rho * (lap @ x),
            )
        if not np.all(np.abs(x) <= DIVERGENCE_LIMIT):
            raise DivergenceError(rho, l)
        if keep_history:
            history.append(AdmmState(x, lam))
        if reference is not None:
            _record(result.trace, l, x, reference, adj)

    result.x, result.lam = x, lam
    return result


def _record(rows, l, x, reference, adj):
    err = np.linalg.norm(x - reference, axis=1)
    diff = np.linalg.norm(x[:, None, :] - x[None, :, :], axis=-1)
    dis = (adj * diff).sum(axis=1)
    rows.extend((l, s, float(err[s]), float(dis[s])) for s in range(x.shape[0]))


def write_trace_csv(trace, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "node", "error", "disagreement"])
        for l, s, err, dis in trace:
            w.writerow([l, s, repr(err), repr(dis)])


def check_epsilon(topo: NetworkTopology, epsilon: float) -> None:
    d_max = max_degree(topo)
    upper = 1.0 / d_max if d_max else np.inf
    if not 0.0 < epsilon < upper:
        raise ValueError(f"epsilon={epsilon} outside (0, 1/D_max) = (0, {upper:g})")


def ac_step(topo: NetworkTopology, values: np.ndarray, epsilon: float) -> np.ndarray:
    """One average-consensus round ``S_s + eps sum_j (S_j - S_s)``.

    ``values`` is stacked per node along axis 0; trailing axes are arbitrary.
    """
    check_epsilon(topo, epsilon)
    values = np.asarray(values, dtype=float)
    return values - epsilon * np.tensordot(topo.laplacian, values, axes=1)


def ac_run(
    topo: NetworkTopology, initial: np.ndarray, epsilon: float, iterations: int
) -> np.ndarray:
    """Apply :func:`ac_step` ``iterations`` times; nodes approach the network mean."""
    check_epsilon(topo, epsilon)
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    values = np.array(initial, dtype=float)
    lap = topo.laplacian
    for _ in range(iterations):
        values = values - epsilon * np.tensordot(lap, values, axes=1)
    return values
