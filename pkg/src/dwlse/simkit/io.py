"""CSV outputs. Values are plain decimals (never exponent notation), UTF-8, with a header row."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .campaign import SweepRow
from .metrics import MetricSeries


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return np.format_float_positional(float(x), unique=True, trim="-")


def _write(path, header, rows: Iterable) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def write_mse(path, series: Mapping[str, MetricSeries]) -> Path:
    """Rows ``(step, node, estimator, value)``, steps counted from 1."""
    def rows():
        for name, s in series.items():
            K, J = s.mse.shape
            for k in range(K):
                for j in range(J):
                    yield k + 1, j, name, s.mse[k, j]
    return _write(path, ["step", "node", "estimator", "value"], rows())


def write_acee(path, series: Mapping[str, MetricSeries]) -> Path:
    def rows():
        for name, s in series.items():
            for k, v in enumerate(s.acee):
                yield k + 1, name, v
    return _write(path, ["step", "estimator", "value"], rows())


def write_sweep(path, rows: Iterable[SweepRow]) -> Path:
    return _write(
        path,
        ["L", "estimator", "avg_mse", "avg_acee"],
        ((r.admm_iters, r.estimator, r.avg_mse, r.avg_acee) for r in rows),
    )


def write_truth(path, states: np.ndarray) -> Path:
    """Rows ``(step, px, py, vx, vy)`` from step 0; other state sizes get ``x0..``."""
    m = states.shape[1]
    cols = ["px", "py", "vx", "vy"] if m == 4 else [f"x{i}" for i in range(m)]
    return _write(path, ["step", *cols], ((k, *x) for k, x in enumerate(states)))


def write_estimates(path, means: np.ndarray, infos: np.ndarray) -> Path:
    """Per-step, per-node dump ``(step, node, x0.., trace_info)`` of ``(K, J, m)`` estimates."""
    K, J, m = means.shape
    traces = np.trace(infos, axis1=-2, axis2=-1)

    def rows():
        for k in range(K):
            for s in range(J):
                yield (k + 1, s, *means[k, s], traces[k, s])
    return _write(path, ["step", "node", *(f"x{i}" for i in range(m)), "trace_info"], rows())


def read_csv(path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
