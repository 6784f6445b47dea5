"""Scenario description and its key/value file format.

A scenario file is INI-style, one section per sub-structure::

    [scenario]   scan_time, steps, runs, master_seed
    [system]     transition (``constant_velocity`` or a matrix), process_noise
    [sensor]     H, R, noise (``gaussian`` | ``uniform``)
    [sensor.3]   optional per-node override of H and/or R
    [truth]      initial_state, process_noise (bool), turns ("step:degrees, ...")
    [estimator]  initial_mean, initial_covariance, initial_is_prediction
    [network]    nodes, radius, region ("width height"), seed
    [dwlse]      rho, admm_iters, ac_iters, ac_rate (epsilon = ac_rate / D_max)

Matrices are written row by row, rows separated by ``;`` and entries by
whitespace or commas. ``diag(a, b, ...)`` is accepted for diagonal matrices.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from ..models import SensorModel, StateEstimate, SystemModel, spd_inv

NOISE_KINDS = ("gaussian", "uniform")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkSpec:
    nodes: int = 20
    radius: float = 2000.0
    region: tuple[float, float] = (10_000.0, 8_000.0)
    seed: int = 1


@dataclass(frozen=True)
class DwlseSettings:
    rho: float = 0.002
    admm_iters: int = 20
    ac_iters: int = 10
    ac_rate: float = 0.65


@dataclass(frozen=True)
class ScenarioConfig:
    scan_time: float
    steps: int
    system: SystemModel
    sensor: SensorModel
    initial_truth: np.ndarray
    initial_estimate: StateEstimate
    turns: tuple[tuple[int, float], ...] = ()
    network: NetworkSpec = field(default_factory=NetworkSpec)
    dwlse: DwlseSettings = field(default_factory=DwlseSettings)
    runs: int = 100
    master_seed: int = 0
    sensor_overrides: dict[int, SensorModel] = field(default_factory=dict)
    initial_is_prediction: bool = True
    truth_noise: bool = True
    noise: str = "gaussian"
    zero_noise: bool = False

    def __post_init__(self):
        object.__setattr__(self, "initial_truth", np.array(self.initial_truth, dtype=float))
        object.__setattr__(
            self, "turns", tuple((int(k), float(a)) for k, a in self.turns)
        )
        if self.steps < 1:
            raise ScenarioError("steps must be >= 1")
        if self.runs < 1:
            raise ScenarioError("runs must be >= 1")
        ks = [k for k, _ in self.turns]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ScenarioError(f"turn steps must be strictly increasing: {ks}")
        if ks and not (0 <= ks[0] and ks[-1] < self.steps):
            raise ScenarioError(f"turn steps must lie in [0, {self.steps}): {ks}")
        if self.noise not in NOISE_KINDS:
            raise ScenarioError(f"noise must be one of {NOISE_KINDS}, got {self.noise!r}")
        m = self.system.dim
        if self.initial_truth.shape != (m,) or self.initial_estimate.dim != m:
            raise ScenarioError("initial state dimensions do not match the system model")
        if self.turns and m != 4:
            raise ScenarioError("turns require the 4-state [px, py, vx, vy] layout")
        bad = [s for s in self.sensor_overrides if not 0 <= s < self.network.nodes]
        if bad:
            raise ScenarioError(f"sensor overrides for unknown nodes {bad}")

    def sensors(self) -> list[SensorModel]:
        return [self.sensor_overrides.get(s, self.sensor) for s in range(self.network.nodes)]

    def with_changes(self, **changes) -> ScenarioConfig:
        """Copy with top-level fields replaced; ``dwlse`` and ``network`` accept dicts."""
        for key, cls_value in (("dwlse", self.dwlse), ("network", self.network)):
            if isinstance(changes.get(key), dict):
                changes[key] = replace(cls_value, **changes[key])
        return replace(self, **changes)


# --- text format ----------------------------------------------------------

_DIAG = re.compile(r"^\s*diag\s*\((.*)\)\s*$", re.IGNORECASE)


def parse_vector(text: str) -> np.ndarray:
    return np.array([float(t) for t in re.split(r"[\s,]+", text.strip()) if t])


def parse_matrix(text: str) -> np.ndarray:
    m = _DIAG.match(text)
    if m:
        return np.diag(parse_vector(m.group(1)))
    rows = [parse_vector(r) for r in text.split(";") if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ScenarioError(f"ragged or empty matrix: {text!r}")
    return np.array(rows)


def format_vector(v) -> str:
    return " ".join(repr(float(x)) for x in np.asarray(v).ravel())


def format_matrix(a) -> str:
    a = np.asarray(a, dtype=float)
    if a.shape[0] == a.shape[1] and np.count_nonzero(a - np.diag(np.diag(a))) == 0:
        return f"diag({', '.join(repr(float(x)) for x in np.diag(a))})"
    return "; ".join(format_vector(row) for row in a)


def parse_turns(text: str) -> tuple[tuple[int, float], ...]:
    turns = []
    for item in re.split(r"[,\s]+", text.strip()):
        if item:
            step, _, deg = item.partition(":")
            if not deg:
                raise ScenarioError(f"turn {item!r} must be step:degrees")
            turns.append((int(step), float(deg)))
    return tuple(turns)


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ScenarioError(f"not a boolean: {text!r}")


def loads_scenario(text: str) -> ScenarioConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
        sc, sy, se, tr, es = (cp[k] for k in ("scenario", "system", "sensor", "truth", "estimator"))
        scan_time = float(sc["scan_time"])
        transition = sy.get("transition", "constant_velocity").strip()
        Q = parse_matrix(sy["process_noise"])
        if transition == "constant_velocity":
            system = SystemModel.constant_velocity(scan_time, Q)
        else:
            system = SystemModel(parse_matrix(transition), Q)
        sensor = SensorModel(parse_matrix(se["H"]), parse_matrix(se["R"]))
        overrides = {}
        for name in cp.sections():
            if name.startswith("sensor."):
                sec = cp[name]
                overrides[int(name.split(".", 1)[1])] = SensorModel(
                    parse_matrix(sec["H"]) if "H" in sec else sensor.H,
                    parse_matrix(sec["R"]) if "R" in sec else sensor.R,
                )
        mean = parse_vector(es["initial_mean"])
        if "initial_info" in es:
            info = parse_matrix(es["initial_info"])
        else:
            info = spd_inv(parse_matrix(es["initial_covariance"]))
        net = NetworkSpec()
        if cp.has_section("network"):
            nw = cp["network"]
            region = tuple(parse_vector(nw["region"])) if "region" in nw else net.region
            net = NetworkSpec(
                int(nw.get("nodes", net.nodes)),
                float(nw.get("radius", net.radius)),
                (float(region[0]), float(region[1])),
                int(nw.get("seed", net.seed)),
            )
        dw = DwlseSettings()
        if cp.has_section("dwlse"):
            d = cp["dwlse"]
            dw = DwlseSettings(
                float(d.get("rho", dw.rho)),
                int(d.get("admm_iters", dw.admm_iters)),
                int(d.get("ac_iters", dw.ac_iters)),
                float(d.get("ac_rate", dw.ac_rate)),
            )
        return ScenarioConfig(
            scan_time=scan_time,
            steps=int(sc["steps"]),
            system=system,
            sensor=sensor,
            initial_truth=parse_vector(tr["initial_state"]),
            initial_estimate=StateEstimate(mean, info),
            turns=parse_turns(tr.get("turns", "")),
            network=net,
            dwlse=dw,
            runs=int(sc.get("runs", "100")),
            master_seed=int(sc.get("master_seed", "0")),
            sensor_overrides=overrides,
            initial_is_prediction=_bool(es.get("initial_is_prediction", "true")),
            truth_noise=_bool(tr.get("process_noise", "true")),
            noise=se.get("noise", "gaussian").strip(),
            zero_noise=_bool(se.get("zero_noise", "false")),
        )
    except (KeyError, configparser.Error) as exc:
        raise ScenarioError(f"bad scenario file: {exc}") from None


def dumps_scenario(cfg: ScenarioConfig) -> str:
    lines = [
        "[scenario]",
        f"scan_time = {cfg.scan_time!r}",
        f"steps = {cfg.steps}",
        f"runs = {cfg.runs}",
        f"master_seed = {cfg.master_seed}",
        "",
        "[system]",
        f"transition = {format_matrix(cfg.system.F)}",
        f"process_noise = {format_matrix(cfg.system.Q)}",
        "",
        "[sensor]",
        f"H = {format_matrix(cfg.sensor.H)}",
        f"R = {format_matrix(cfg.sensor.R)}",
        f"noise = {cfg.noise}",
        f"zero_noise = {str(cfg.zero_noise).lower()}",
        "",
    ]
    for s, sensor in sorted(cfg.sensor_overrides.items()):
        lines += [f"[sensor.{s}]", f"H = {format_matrix(sensor.H)}", f"R = {format_matrix(sensor.R)}", ""]
    turns = ", ".join(f"{k}:{a!r}" for k, a in cfg.turns)
    net, dw = cfg.network, cfg.dwlse
    lines += [
        "[truth]",
        f"initial_state = {format_vector(cfg.initial_truth)}",
        f"process_noise = {str(cfg.truth_noise).lower()}",
        f"turns = {turns}",
        "",
        "[estimator]",
        f"initial_mean = {format_vector(cfg.initial_estimate.mean)}",
        f"initial_info = {format_matrix(cfg.initial_estimate.info)}",
        f"initial_is_prediction = {str(cfg.initial_is_prediction).lower()}",
        "",
        "[network]",
        f"nodes = {net.nodes}",
        f"radius = {net.radius!r}",
        f"region = {net.region[0]!r} {net.region[1]!r}",
        f"seed = {net.seed}",
        "",
        "[dwlse]",
        f"rho = {dw.rho!r}",
        f"admm_iters = {dw.admm_iters}",
        f"ac_iters = {dw.ac_iters}",
        f"ac_rate = {dw.ac_rate!r}",
        "",
    ]
    return "\n".join(lines)


def load_scenario(path) -> ScenarioConfig:
    """Load a scenario file; bare names resolve to the bundled scenarios."""
    p = Path(path)
    if not p.exists():
        bundled = resources.files("dwlse") / "scenarios" / f"{p.name.removesuffix('.ini')}.ini"
        if not bundled.is_file():
            raise ScenarioError(f"no scenario file {path}")
        return loads_scenario(bundled.read_text(encoding="utf-8"))
    return loads_scenario(p.read_text(encoding="utf-8"))


def tracking20() -> ScenarioConfig:
    """The bundled 20-node, 100-scan tracking scenario."""
    return load_scenario("tracking20")
