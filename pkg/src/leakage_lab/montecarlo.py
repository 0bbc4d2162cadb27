"""Monte Carlo estimation of logical error rates with early stopping.

Trials are grouped into fixed-size batches.  Batch ``b`` of rate point ``i``
draws from ``SeedSequence((master_seed, i, b))``, so a trial's outcome is a
function of (config, index) alone and aggregate counts do not depend on how
many workers ran the batches.  Early stopping is decided after whole
batches in index order.
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.stats import norm

from .circuit import compile_circuit, sample
from .codes import build_code
from .decoder_graph import fault_catalog, graph_from_catalog
from .matching import Decoder
from .pauli_frame import LeakModel, NoiseParams
from .schedules import LRU, Style, build_schedule

CSV_COLUMNS = ("family", "geometry", "d", "leak_model", "lru", "p", "p_leak", "p_depol", "trials",
               "failures_x", "failures_z", "failures_any", "p_L", "ci_low", "ci_high", "seed")


@dataclass(frozen=True)
class ExperimentConfig:
    """One code/schedule/noise family swept over total physical rates ``p_values``.

    Each p is split as ``p_leak = ratio * p_depol`` with ``p_leak + p_depol = p``.
    ``relax`` picks the relaxation rate: ``"leak"`` sets p_relax = p_leak and
    ``"depol"`` sets p_relax = p_depol.
    """

    family: str = "SubspaceSurface"
    geometry: str = "Rotated"
    d: int = 3
    lru: str = "SwapLR"
    style: str = "SerialXZ"
    leak_model: str = "MS"
    p_values: tuple = (1e-3,)
    ratio: float = 1.0
    relax: str = "leak"
    trials_cap: int = 10**6
    failures_target: int = 200
    master_seed: int = 0
    batch_size: int = 10_000
    cycles: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "p_values", tuple(float(p) for p in self.p_values))
        object.__setattr__(self, "lru", LRU(self.lru).value)
        object.__setattr__(self, "style", Style(self.style).value)
        object.__setattr__(self, "leak_model", LeakModel(self.leak_model).value)
        if self.failures_target < 1:
            raise ValueError("failures_target must be at least 1")
        if self.trials_cap < self.failures_target:
            raise ValueError("trials_cap must be at least failures_target")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.relax not in ("leak", "depol"):
            raise ValueError("relax must be 'leak' or 'depol'")
        if self.ratio < 0:
            raise ValueError("ratio must be non-negative")
        if not self.p_values or any(not 0.0 <= p <= 1.0 for p in self.p_values):
            raise ValueError("p_values must be a non-empty list of rates in [0, 1]")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @property
    def n_cycles(self) -> int:
        return self.cycles if self.cycles is not None else self.d

    def noise(self, p: float) -> NoiseParams:
        base = NoiseParams.from_total(p, self.ratio, self.leak_model)
        if self.relax == "depol":
            return base.scaled(p_relax=base.p_depol)
        return base

    def to_dict(self) -> dict:
        out = asdict(self)
        out["p_values"] = list(self.p_values)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**data)


@dataclass(frozen=True)
class TrialOutcome:
    failed_x: bool
    failed_z: bool

    @property
    def failed(self) -> bool:
        return self.failed_x or self.failed_z


@dataclass
class SimRow:
    p: float
    p_leak: float
    p_depol: float
    trials: int
    failures_x: int
    failures_z: int
    failures_any: int
    p_L: float
    ci_low: float
    ci_high: float
    wall_time: float
    upper_bound_only: bool = False


@dataclass
class SimResult:
    config: ExperimentConfig
    rows: list
    metadata: dict = field(default_factory=dict)

    def csv_rows(self) -> list:
        c = self.config
        return [{"family": c.family, "geometry": c.geometry, "d": c.d, "leak_model": c.leak_model,
                 "lru": c.lru, "p": r.p, "p_leak": r.p_leak, "p_depol": r.p_depol, "trials": r.trials,
                 "failures_x": r.failures_x, "failures_z": r.failures_z, "failures_any": r.failures_any,
                 "p_L": r.p_L, "ci_low": r.ci_low, "ci_high": r.ci_high, "seed": c.master_seed}
                for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(self.csv_rows())
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"metadata": {**self.metadata, "config": self.config.to_dict()},
                "rows": [asdict(r) for r in self.rows]}


def wilson_interval(failures: int, trials: int, confidence: float = 0.95) -> tuple:
    if trials <= 0:
        return 0.0, 1.0
    z = norm.ppf(0.5 + confidence / 2)
    phat = failures / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * np.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == trials else min(1.0, centre + half)
    return float(lo), float(hi)


# ---------------------------------------------------------------------------
# per-configuration pipeline


@dataclass
class _Pipeline:
    circuit: object
    decoders: dict | None


@lru_cache(maxsize=32)
def _compiled(family, geometry, d, lru, style, leak_model, cycles):
    layout = build_code(family, geometry, d)
    schedule = build_schedule(layout, lru, style)
    catalog = fault_catalog(layout, schedule, leak_model, cycles)
    return layout, catalog


def _pipeline(config: ExperimentConfig, p: float) -> _Pipeline:
    _, catalog = _compiled(config.family, config.geometry, config.d, config.lru, config.style,
                           config.leak_model, config.n_cycles)
    noise = config.noise(p)
    if noise.p_leak == 0 and noise.p_depol == 0:
        return _Pipeline(catalog.circuit, None)
    decs = {et: Decoder(graph_from_catalog(catalog, noise, et)) for et in ("X", "Z")}
    return _Pipeline(catalog.circuit, decs)


def batch_rng(config: ExperimentConfig, p_index: int, batch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((config.master_seed, p_index, batch)))


def simulate_batch(config: ExperimentConfig, p_index: int, batch: int, pipeline: _Pipeline | None = None):
    """Failure flags (x, z) of every trial in one batch."""
    p = config.p_values[p_index]
    pipe = pipeline or _pipeline(config, p)
    noise = config.noise(p)
    n = config.batch_size
    if pipe.decoders is None:
        return np.zeros(n, bool), np.zeros(n, bool)
    syn = sample(pipe.circuit, noise, n, batch_rng(config, p_index, batch))
    flags = []
    for et in ("X", "Z"):
        dets, obs = syn.dense(et)
        pred = pipe.decoders[et].decode_batch(dets)
        flags.append((pred != obs).any(axis=1))
    return flags[0], flags[1]


def run_trial(config: ExperimentConfig, trial_index: int, p_index: int = 0) -> TrialOutcome:
    """Outcome of one trial: the corresponding column of its batch."""
    if trial_index < 0:
        raise ValueError("trial_index must be non-negative")
    b, col = divmod(trial_index, config.batch_size)
    fx, fz = simulate_batch(config, p_index, b)
    return TrialOutcome(bool(fx[col]), bool(fz[col]))


def _worker_batch(args):
    config, p_index, batch, oracle = args
    if oracle is not None:
        return oracle(batch_rng(config, p_index, batch), config.batch_size, config.p_values[p_index])
    return simulate_batch(config, p_index, batch, _pipeline_cached(config, p_index))


_PIPES: dict = {}


def _pipeline_cached(config: ExperimentConfig, p_index: int) -> _Pipeline:
    key = (config.family, config.geometry, config.d, config.lru, config.style, config.leak_model,
           config.n_cycles, config.noise(config.p_values[p_index]))
    if key not in _PIPES:
        if len(_PIPES) > 16:
            _PIPES.clear()
        _PIPES[key] = _pipeline(config, config.p_values[p_index])
    return _PIPES[key]


def default_workers() -> int:
    env = os.environ.get("LEAKAGE_LAB_WORKERS")
    return max(1, int(env)) if env else 1


def run_experiment(config: ExperimentConfig, workers: int | None = None, oracle=None,
                   progress=None) -> SimResult:
    """Run every p point until ``failures_target`` failures or ``trials_cap`` trials.

    ``oracle(rng, shots, p) -> (fail_x, fail_z)`` replaces the circuit
    simulation, which is how the estimator is tested on known rates.
    ``progress(row)`` is called after each finished point.
    """
    workers = workers or default_workers()
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    rows = []
    try:
        for i, p in enumerate(config.p_values):
            t0 = time.perf_counter()
            fx = fz = fa = trials = 0
            batch = 0
            done = False
            while not done:
                jobs = [(config, i, b, oracle) for b in range(batch, batch + (workers if pool else 1))]
                results = pool.map(_worker_batch, jobs) if pool else map(_worker_batch, jobs)
                for bx, bz in results:
                    take = min(config.batch_size, config.trials_cap - trials)
                    bx, bz = np.asarray(bx[:take], bool), np.asarray(bz[:take], bool)
                    fx += int(bx.sum())
                    fz += int(bz.sum())
                    fa += int((bx | bz).sum())
                    trials += take
                    batch += 1
                    if fa >= config.failures_target or trials >= config.trials_cap:
                        done = True
                        break
            noise = config.noise(p)
            lo, hi = wilson_interval(fa, trials)
            row = SimRow(p, noise.p_leak, noise.p_depol, trials, fx, fz, fa, fa / trials, lo, hi,
                         time.perf_counter() - t0, upper_bound_only=fa == 0)
            rows.append(row)
            if progress is not None:
                progress(row)
    finally:
        if pool is not None:
            pool.shutdown()
    layout = build_code(config.family, config.geometry, config.d)
    meta = {"n_data": layout.n_data, "k": layout.k, "distance": layout.distance,
            "cycles": config.n_cycles, "per": "window"}
    return SimResult(config, rows, meta)


def no_lru_sanity(distances=(3, 5, 7), p_values=(1e-3,), leak_model="MS", trials_cap=10**5,
                  failures_target=200, master_seed=0, family="SubspaceSurface", geometry="Rotated",
                  batch_size=10_000) -> list:
    """p_L with and without leakage when no LRU is used and p_d = p_r = 100 p_leak.

    Returns one dict per (leakage on/off, d, p).
    """
    table = []
    for leak_on in (False, True):
        for d in distances:
            cfg = ExperimentConfig(family, geometry, d, "None", "SerialXZ", leak_model, tuple(p_values),
                                   ratio=0.01 if leak_on else 0.0, relax="depol", trials_cap=trials_cap,
                                   failures_target=failures_target, master_seed=master_seed,
                                   batch_size=batch_size)
            for r in run_experiment(cfg).rows:
                table.append({"leakage": leak_on, "d": d, "p": r.p, "trials": r.trials,
                              "failures": r.failures_any, "p_L": r.p_L, "ci_low": r.ci_low,
                              "ci_high": r.ci_high})
    return table


def write_result(result: SimResult, directory, stem: str = "results") -> tuple:
    os.makedirs(directory, exist_ok=True)
    csv_path = os.path.join(directory, f"{stem}.csv")
    json_path = os.path.join(directory, f"{stem}.json")
    with open(csv_path, "w") as f:
        f.write(result.to_csv())
    with open(json_path, "w") as f:
        json.dump(result.to_json(), f, indent=2)
    return csv_path, json_path


def with_p(config: ExperimentConfig, p_values) -> ExperimentConfig:
    return replace(config, p_values=tuple(p_values))
