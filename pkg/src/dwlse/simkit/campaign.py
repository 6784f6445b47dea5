"""Monte Carlo campaigns comparing the distributed and centralized estimators."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Sequence

import numpy as np

from ..cif import predict_arrays, sensor_information, update_arrays
from ..dwlse import DwlseConfig, step_arrays
from ..models import matvec, validate_models
from ..network import NetworkTopology, generate_geometric
from .config import ScenarioConfig
from .metrics import MetricSeries, consensus_error, error_norms
from .simulate import (
    MEASUREMENT_STREAM,
    TRUTH_STREAM,
    Truth,
    generate_measurements,
    generate_truth,
    stream_rng,
)

log = logging.getLogger(__name__)


class CampaignError(RuntimeError):
    pass


def build_topology(cfg: ScenarioConfig) -> NetworkTopology:
    net = cfg.network
    return generate_geometric(net.nodes, net.radius, net.region, net.seed)


def build_dwlse_config(cfg: ScenarioConfig, topo: NetworkTopology) -> DwlseConfig:
    d = cfg.dwlse
    return DwlseConfig.for_topology(topo, d.rho, d.admm_iters, d.ac_iters, d.ac_rate)


@dataclass
class RunOutput:
    truth: Truth
    measurements: np.ndarray
    dwlse: np.ndarray
    dwlse_info: np.ndarray
    cif: np.ndarray
    min_eig: np.ndarray
    max_asym: np.ndarray


def simulate_run(
    cfg: ScenarioConfig, topo: NetworkTopology, dcfg: DwlseConfig, run: int
) -> RunOutput:
    """One Monte Carlo run; both estimators see the same measurement array."""
    sensors = cfg.sensors()
    J, K, m = topo.node_count, cfg.steps, cfg.system.dim
    truth = generate_truth(cfg, stream_rng(cfg.master_seed, run, TRUTH_STREAM))
    Y = generate_measurements(
        truth.states[1:], sensors, stream_rng(cfg.master_seed, run, MEASUREMENT_STREAM),
        noise=cfg.noise, zero_noise=cfg.zero_noise,
    )
    A, ht_rinv = sensor_information(sensors)
    b_all = matvec(ht_rinv[None], Y)

    init = cfg.initial_estimate
    mean0, info0 = init.mean[None], init.info[None]
    if not cfg.initial_is_prediction:
        mean0, info0 = predict_arrays(mean0, info0, cfg.system.F, cfg.system.Q)
    d_mean, d_info = np.repeat(mean0, J, axis=0), np.repeat(info0, J, axis=0)
    c_mean, c_info = mean0, info0
    A_total = A.sum(axis=0)[None]

    est = np.empty((K, J, m))
    est_info = np.empty((K, J, m, m))
    cif = np.empty((K, m))
    min_eig = np.empty((K, J))
    max_asym = np.empty((K, J))
    for k in range(K):
        try:
            out = step_arrays(d_mean, d_info, A, b_all[k], topo, cfg.system, dcfg)
        except (ArithmeticError, ValueError) as exc:
            raise CampaignError(f"DWLSE failed in run {run}, step {k + 1}: {exc}") from exc
        est[k], est_info[k] = out.post_mean, out.post_info
        min_eig[k] = np.linalg.eigvalsh(out.post_info)[:, 0]
        max_asym[k] = np.abs(out.post_info - np.swapaxes(out.post_info, -1, -2)).max(axis=(1, 2))
        d_mean, d_info = out.pred_mean, out.pred_info
        try:
            c_post, c_post_info = update_arrays(c_mean, c_info, A_total, b_all[k].sum(axis=0)[None])
            c_mean, c_info = predict_arrays(c_post, c_post_info, cfg.system.F, cfg.system.Q)
        except ArithmeticError as exc:
            raise CampaignError(f"CIF failed in run {run}, step {k + 1}: {exc}") from exc
        cif[k] = c_post[0]
    return RunOutput(truth, Y, est, est_info, cif, min_eig, max_asym)


@dataclass
class CampaignResult:
    dwlse: MetricSeries
    cif: MetricSeries
    topology: NetworkTopology
    config: DwlseConfig
    first_run: RunOutput
    min_eig: np.ndarray
    max_asym: np.ndarray

    @property
    def series(self) -> dict[str, MetricSeries]:
        return {"dwlse": self.dwlse, "cif": self.cif}


def run_campaign(
    cfg: ScenarioConfig,
    *,
    admm_iters: int | None = None,
    runs: int | None = None,
    workers: int = 1,
    topology: NetworkTopology | None = None,
) -> CampaignResult:
    """Run ``cfg.runs`` Monte Carlo runs and average the metrics.

    Run ``r`` draws its noise from streams seeded by ``(master_seed, r)``, so
    results do not depend on ``workers`` and adding runs leaves earlier runs
    untouched. Aggregation is a sum in run order.
    """
    if admm_iters is not None:
        cfg = cfg.with_changes(dwlse={"admm_iters": admm_iters})
    if runs is not None:
        cfg = cfg.with_changes(runs=runs)
    validate_models(cfg.system, cfg.sensors())
    topo = topology or build_topology(cfg)
    dcfg = build_dwlse_config(cfg, topo)
    M, K, J = cfg.runs, cfg.steps, topo.node_count
    log.info("campaign: %d runs, %d steps, %d nodes, L=%d", M, K, J, dcfg.admm_iters)

    job = partial(simulate_run, cfg, topo, dcfg)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            outputs = pool.map(job, range(M))
            result = _aggregate(outputs, M, K, J)
    else:
        result = _aggregate(map(job, range(M)), M, K, J)
    first, sums = result
    return CampaignResult(
        dwlse=MetricSeries(sums["d_mse"] / M, sums["d_acee"] / M, M),
        cif=MetricSeries(np.repeat(sums["c_mse"][:, None] / M, J, axis=1), np.zeros(K), M),
        topology=topo,
        config=dcfg,
        first_run=first,
        min_eig=sums["min_eig"],
        max_asym=sums["max_asym"],
    )


def _aggregate(outputs, M, K, J):
    sums = {
        "d_mse": np.zeros((K, J)),
        "d_acee": np.zeros(K),
        "c_mse": np.zeros(K),
        "min_eig": np.full((K, J), np.inf),
        "max_asym": np.zeros((K, J)),
    }
    first = None
    for r, out in enumerate(outputs):
        if first is None:
            first = out
        x = out.truth.states[1:]
        sums["d_mse"] += error_norms(out.dwlse, x)
        sums["d_acee"] += consensus_error(out.dwlse)
        sums["c_mse"] += np.linalg.norm(out.cif - x, axis=-1)
        np.minimum(sums["min_eig"], out.min_eig, out=sums["min_eig"])
        np.maximum(sums["max_asym"], out.max_asym, out=sums["max_asym"])
        log.debug("run %d/%d done", r + 1, M)
    return first, sums


@dataclass(frozen=True)
class SweepRow:
    admm_iters: int
    estimator: str
    avg_mse: float
    avg_acee: float


def sweep_iterations(
    cfg: ScenarioConfig,
    iters: Sequence[int],
    *,
    node: int = 0,
    workers: int = 1,
    runs: int | None = None,
) -> list[SweepRow]:
    """Time-averaged MSE (at ``node``) and ACEE for each ADMM iteration count."""
    if not len(iters):
        raise ValueError("iteration list is empty")
    topo = build_topology(cfg)
    rows = []
    for L in iters:
        res = run_campaign(cfg, admm_iters=int(L), runs=runs, workers=workers, topology=topo)
        for name, series in res.series.items():
            rows.append(
                SweepRow(int(L), name, series.time_averaged_mse(node), series.time_averaged_acee())
            )
    return rows
