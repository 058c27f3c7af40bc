"""Experiment orchestration: configs, pipelines, timing, and file formats.

An experiment is described by one JSON document (see ``configs/``) and runs
in three stages that mirror the CLI subcommands: ``simulate`` records a
trajectory dataset, ``train`` fits one transport map per requested window
size, and ``run`` replays fresh truth trajectories through every selected
filter, writing per-time metric rows and a summary. ``bench`` times the
online step of each method and ``evaluate`` recomputes summaries from rows.
"""

from __future__ import annotations

import csv
import json
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .exceptions import InvalidInputError
from .filters import (
    KalmanState,
    ObservationWindow,
    OTPFState,
    ParticleEnsemble,
    enkf_step,
    kalman_step,
    linear_gaussian_spec,
    otddf_online_step,
    otpf_step,
    sir_step,
)
from .metrics import median_heuristic_bandwidth, mmd
from .models import (
    LinearModelParams,
    Lorenz63Params,
    StateSpaceModel,
    TrajectoryDataset,
    make_linear_model,
    make_lorenz63_model,
    save_dataset,
    simulate_trajectories,
)
from .ot_core import TrainConfig, TrainedTransportMap, load_map, save_map, train

METHODS = ("kf", "enkf", "sir", "otpf", "otddf")
# fixed stream indices so adding/removing methods never reshuffles seeds
_STREAM_INDEX = {"enkf": 1, "sir": 2, "otpf": 3, "otddf": 4, "reference": 5, "truth": 99}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelConfig:
    kind: str  # "linear" or "lorenz63"
    params: dict = field(default_factory=dict)

    def build_params(self):
        if self.kind == "linear":
            return LinearModelParams(**self.params)
        if self.kind == "lorenz63":
            return Lorenz63Params(**self.params)
        raise InvalidInputError(f"unknown model kind {self.kind!r}")

    def build(self) -> StateSpaceModel:
        params = self.build_params()
        return make_linear_model(params) if self.kind == "linear" else make_lorenz63_model(params)


@dataclass(frozen=True)
class DatasetConfig:
    n_trajectories: int = 1000
    t_f: int = 100
    seed: int = 0


@dataclass(frozen=True)
class TrainSpec:
    """Training hyperparameters shared by all requested window sizes.

    ``burn_in="auto"`` places the slice flush with the recorded horizon
    (t0 = t_f - w), so every window trains on the latest possible data.
    ``k_outer`` may be a single count or a tuple aligned with ``windows``
    (wider windows typically need a larger budget).
    """

    windows: tuple = (10,)
    burn_in: object = "auto"
    batch_size: int = 64
    lr_f: float = 1e-3
    lr_T: float = 5e-4
    k_inner: int = 10
    k_outer: object = 2000
    f_blocks: int = 1
    f_width: int = 64
    T_blocks: int = 2
    T_width: int = 48
    activation: str = "relu"
    avg_tail: float = 0.0
    seed: int = 0

    def k_outer_for(self, window: int) -> int:
        if isinstance(self.k_outer, (list, tuple)):
            if len(self.k_outer) != len(self.windows):
                raise InvalidInputError("per-window k_outer must align with the windows tuple")
            return int(self.k_outer[self.windows.index(window)])
        return int(self.k_outer)

    def config_for(self, window: int, t_f: int) -> TrainConfig:
        burn_in = t_f - window if self.burn_in == "auto" else int(self.burn_in)
        map_seed = int(np.random.SeedSequence(self.seed, spawn_key=(window,)).generate_state(1)[0])
        return TrainConfig(
            window=window,
            burn_in=burn_in,
            batch_size=self.batch_size,
            lr_f=self.lr_f,
            lr_T=self.lr_T,
            k_inner=self.k_inner,
            k_outer=self.k_outer_for(window),
            f_blocks=self.f_blocks,
            f_width=self.f_width,
            T_blocks=self.T_blocks,
            T_width=self.T_width,
            activation=self.activation,
            avg_tail=self.avg_tail,
            seed=map_seed,
        )


@dataclass(frozen=True)
class OnlineConfig:
    n_particles: int = 1000
    t_run: int = 150
    replications: int = 10
    seed: int = 0
    methods: tuple = ("kf", "enkf", "sir", "otddf")
    metrics_from: object = "auto"  # "auto": first time every trained window is warmed up
    otpf_k_outer: int = 64
    otpf_k_inner: int = 10
    otpf_batch_size: int = 64


@dataclass(frozen=True)
class MetricsConfig:
    """``reference_n_particles`` sizes the reference filter itself;
    ``mmd_eval_points`` caps the subsample of reference particles each MMD
    evaluation runs against (the kernel statistic is quadratic in it)."""

    kinds: tuple = ("mse",)
    reference_n_particles: int = 10000
    mmd_eval_points: int = 2000


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    model: ModelConfig
    dataset: DatasetConfig = DatasetConfig()
    train: TrainSpec = TrainSpec()
    online: OnlineConfig = OnlineConfig()
    metrics: MetricsConfig = MetricsConfig()
    output_dir: str = "results"

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["train"]["windows"] = list(self.train.windows)
        if isinstance(self.train.k_outer, tuple):
            doc["train"]["k_outer"] = list(self.train.k_outer)
        doc["online"]["methods"] = list(self.online.methods)
        doc["metrics"]["kinds"] = list(self.metrics.kinds)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        model = ModelConfig(**doc.pop("model"))
        dataset = DatasetConfig(**doc.pop("dataset", {}))
        train_doc = dict(doc.pop("train", {}))
        train_doc["windows"] = tuple(train_doc.get("windows", (10,)))
        if isinstance(train_doc.get("k_outer"), list):
            train_doc["k_outer"] = tuple(train_doc["k_outer"])
        train_spec = TrainSpec(**train_doc)
        online_doc = dict(doc.pop("online", {}))
        online_doc["methods"] = tuple(online_doc.get("methods", ("kf", "enkf", "sir", "otddf")))
        online = OnlineConfig(**online_doc)
        metrics_doc = dict(doc.pop("metrics", {}))
        metrics_doc["kinds"] = tuple(metrics_doc.get("kinds", ("mse",)))
        metrics = MetricsConfig(**metrics_doc)
        return cls(model=model, dataset=dataset, train=train_spec, online=online, metrics=metrics, **doc)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def save_config(config: ExperimentConfig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")
    return path


def thread_count(n_jobs: int) -> int:
    """Worker count for replication parallelism, capped by OTDDF_THREADS."""
    cap = os.environ.get("OTDDF_THREADS")
    workers = min(n_jobs, os.cpu_count() or 1)
    if cap is not None:
        workers = max(1, min(workers, int(cap)))
    return workers


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------


def append_manifest(out_dir, command: str, entry: dict) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "manifest.json"
    doc = []
    if path.exists():
        with open(path) as fh:
            doc = json.load(fh)
    doc.append({"command": command, **entry})
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# stage 1: simulate
# ---------------------------------------------------------------------------


def run_simulate(config: ExperimentConfig, out_dir, seed: int | None = None) -> Path:
    """Record the training dataset; writes CSV + metadata and a manifest entry."""
    out_dir = Path(out_dir)
    ds_seed = config.dataset.seed if seed is None else seed
    model = config.model.build()
    dataset = simulate_trajectories(model, config.dataset.n_trajectories, config.dataset.t_f, seed=ds_seed)
    csv_path = save_dataset(dataset, out_dir / "dataset.csv")
    append_manifest(
        out_dir,
        "simulate",
        {"config": config.to_dict(), "seed": ds_seed, "outputs": [csv_path.name, csv_path.with_suffix(".meta.json").name]},
    )
    return csv_path


# ---------------------------------------------------------------------------
# stage 2: train maps
# ---------------------------------------------------------------------------


def run_train(
    config: ExperimentConfig,
    dataset: TrajectoryDataset,
    out_dir=None,
    windows: Sequence[int] | None = None,
) -> Dict[int, TrainedTransportMap]:
    """Train one map per window size; optionally persist maps and loss curves."""
    windows = tuple(windows) if windows is not None else config.train.windows
    maps: Dict[int, TrainedTransportMap] = {}
    outputs = []
    for w in windows:
        cfg = config.train.config_for(w, dataset.horizon)
        tmap = train(dataset, cfg)
        maps[w] = tmap
        if out_dir is not None:
            out_dir = Path(out_dir)
            map_path = save_map(tmap, out_dir / f"map_w{w}.json")
            loss_path = out_dir / f"loss_w{w}.csv"
            with open(loss_path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["outer_iter", "loss_T", "loss_f"])
                hist = tmap.history
                for i in range(len(hist["iteration"])):
                    writer.writerow([hist["iteration"][i], _fmt(hist["loss_T"][i]), _fmt(hist["loss_f"][i])])
            outputs += [map_path.name, loss_path.name]
    if out_dir is not None:
        append_manifest(out_dir, "train", {"config": config.to_dict(), "windows": list(windows), "outputs": outputs})
    return maps


def load_maps(paths: Sequence) -> Dict[int, TrainedTransportMap]:
    maps = {}
    for p in paths:
        tmap = load_map(p)
        maps[tmap.window] = tmap
    return maps


# ---------------------------------------------------------------------------
# stage 3: online runs with metrics
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _stream(seed: int, rep: int, name: str, window: int = 0) -> np.random.Generator:
    key = (rep, _STREAM_INDEX[name], window) if name == "otddf" else (rep, _STREAM_INDEX[name])
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _simulate_truth(model: StateSpaceModel, t_run: int, rng: np.random.Generator):
    n, m = model.state_dim, model.obs_dim
    states = np.empty((t_run + 1, n))
    observations = np.empty((t_run, m))
    states[0] = model.x0_sampler(rng)
    for t in range(1, t_run + 1):
        states[t] = model.transition(states[t - 1], rng.standard_normal(n))
        observations[t - 1] = model.observation(states[t], rng.standard_normal(m))
    return states, observations


def _initial_ensemble(model: StateSpaceModel, n_particles: int, rng: np.random.Generator) -> ParticleEnsemble:
    particles = np.stack([model.x0_sampler(rng) for _ in range(n_particles)])
    return ParticleEnsemble.uniform(particles)


def _run_reference(config, model, truth_obs, rep) -> Dict[int, np.ndarray]:
    """Large-N importance-resampling reference posterior at metric times,
    subsampled to mmd_eval_points per time for tractable kernel statistics."""
    rng = _stream(config.online.seed, rep, "reference")
    n_ref = config.metrics.reference_n_particles
    ens = _initial_ensemble(model, n_ref, rng)
    metrics_from = resolve_metrics_from(config)
    keep = min(config.metrics.mmd_eval_points, n_ref)
    out = {}
    for t, y in enumerate(truth_obs, start=1):
        ens = sir_step(ens, y, model, rng)
        if t >= metrics_from:
            idx = rng.choice(n_ref, size=keep, replace=False) if keep < n_ref else slice(None)
            out[t] = ens.particles[idx]
    return out


def resolve_metrics_from(config: ExperimentConfig) -> int:
    """First time index at which metrics are recorded: every trained window
    must have filled (burn-in plus window), so all methods are compared on
    the same footing."""
    if config.online.metrics_from != "auto":
        return int(config.online.metrics_from)
    if "otddf" not in config.online.methods or not config.train.windows:
        return 1
    t_f = config.dataset.t_f
    starts = []
    for w in config.train.windows:
        burn_in = t_f - w if config.train.burn_in == "auto" else int(config.train.burn_in)
        starts.append(burn_in + w)
    return max(starts)


def _otpf_train_config(config: ExperimentConfig) -> TrainConfig:
    return TrainConfig(
        window=1,
        burn_in=0,
        batch_size=min(config.online.otpf_batch_size, config.online.n_particles),
        lr_f=config.train.lr_f,
        lr_T=config.train.lr_T,
        k_inner=config.online.otpf_k_inner,
        k_outer=config.online.otpf_k_outer,
        f_blocks=config.train.f_blocks,
        f_width=config.train.f_width,
        T_blocks=config.train.T_blocks,
        T_width=config.train.T_width,
        activation=config.train.activation,
        seed=0,
    )


def _run_replication(
    config: ExperimentConfig,
    model: StateSpaceModel,
    maps: Dict[int, TrainedTransportMap],
    methods: Sequence[str],
    rep: int,
    bandwidth: Optional[float],
    truth: Optional[tuple] = None,
) -> List[dict]:
    online = config.online
    metrics_from = resolve_metrics_from(config)
    want_mse = "mse" in config.metrics.kinds
    want_mmd = "mmd" in config.metrics.kinds

    if truth is None:
        truth_states, truth_obs = _simulate_truth(model, online.t_run, _stream(online.seed, rep, "truth"))
    else:
        truth_states, truth_obs = truth

    reference = _run_reference(config, model, truth_obs, rep) if want_mmd else {}

    rows: List[dict] = []

    def record(t, method, ensemble=None, mean=None):
        frac = None
        if ensemble is not None:
            mean = ensemble.mean()
            frac = float(ensemble.weights @ (ensemble.particles[:, 0] > 0))
        row = {"t": t, "method": method, "rep": rep, "mean": np.asarray(mean, dtype=float), "frac_pos0": frac, "mse": None, "mmd": None}
        if t >= metrics_from:
            if want_mse:
                row["mse"] = float(np.sum((row["mean"] - truth_states[t]) ** 2))
            if want_mmd and ensemble is not None and t in reference:
                row["mmd"] = mmd(ensemble.particles, reference[t], bandwidth)
        rows.append(row)

    if "kf" in methods:
        if config.model.kind != "linear":
            raise InvalidInputError("the Kalman baseline applies to the linear model only")
        spec = linear_gaussian_spec(config.model.build_params())
        state = KalmanState(np.zeros(model.state_dim), np.eye(model.state_dim))
        for t, y in enumerate(truth_obs, start=1):
            state = kalman_step(spec, state, y)
            record(t, "kf", mean=state.mean)

    if "enkf" in methods:
        rng = _stream(online.seed, rep, "enkf")
        ens = _initial_ensemble(model, online.n_particles, rng)
        for t, y in enumerate(truth_obs, start=1):
            ens = enkf_step(ens, y, model, rng)
            record(t, "enkf", ensemble=ens)

    if "sir" in methods:
        rng = _stream(online.seed, rep, "sir")
        ens = _initial_ensemble(model, online.n_particles, rng)
        for t, y in enumerate(truth_obs, start=1):
            ens = sir_step(ens, y, model, rng)
            record(t, "sir", ensemble=ens)

    if "otpf" in methods:
        rng = _stream(online.seed, rep, "otpf")
        ens = _initial_ensemble(model, online.n_particles, rng)
        otpf_state = OTPFState()
        otpf_cfg = _otpf_train_config(config)
        for t, y in enumerate(truth_obs, start=1):
            ens = otpf_step(ens, y, model, otpf_cfg, rng, otpf_state)
            record(t, "otpf", ensemble=ens)

    if "otddf" in methods:
        for w, tmap in sorted(maps.items()):
            rng = _stream(online.seed, rep, "otddf", window=w)
            window = ObservationWindow(w, model.obs_dim)
            label = f"otddf_w{w}"
            for t, y in enumerate(truth_obs, start=1):
                window.push(y)
                if window.is_full:
                    ens = otddf_online_step(tmap, window, online.n_particles, rng)
                    record(t, label, ensemble=ens)

    return rows


def run_online(
    config: ExperimentConfig,
    maps: Dict[int, TrainedTransportMap] | None = None,
    out_dir=None,
    methods: Sequence[str] | None = None,
    seed: int | None = None,
    dataset: TrajectoryDataset | None = None,
):
    """Run every selected filter over fresh (or recorded) truth trajectories.

    Returns (rows, summary); when ``out_dir`` is set, also writes
    ``results.csv`` and ``summary.json`` plus a manifest entry. When a
    ``dataset`` is supplied its first ``replications`` trajectories are used
    as the truth instead of fresh simulations.
    """
    t_start = time.perf_counter()
    methods = tuple(methods) if methods is not None else config.online.methods
    maps = maps or {}
    if seed is not None:
        config = replace(config, online=replace(config.online, seed=seed))
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise InvalidInputError(f"unknown methods {unknown}; choose from {METHODS}")
    if "otddf" in methods and not maps:
        raise InvalidInputError("the transport-map filter needs at least one trained map")
    model = config.model.build()

    truths = None
    if dataset is not None:
        if dataset.n_trajectories < config.online.replications or dataset.horizon < config.online.t_run:
            raise InvalidInputError("dataset too small for the requested replications / run length")
        truths = [
            (traj.states[: config.online.t_run + 1], traj.observations[: config.online.t_run])
            for traj in dataset.trajectories[: config.online.replications]
        ]

    bandwidth = None
    if "mmd" in config.metrics.kinds:
        # one bandwidth per experiment, from the first replication's reference posterior
        if truths is not None:
            first_obs = truths[0][1]
        else:
            _, first_obs = _simulate_truth(model, config.online.t_run, _stream(config.online.seed, 0, "truth"))
        pool = np.concatenate(list(_run_reference(config, model, first_obs, 0).values()))
        bandwidth = median_heuristic_bandwidth(pool, seed=config.online.seed)

    reps = range(config.online.replications)
    workers = thread_count(config.online.replications)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool_exec:
            futures = [
                pool_exec.submit(
                    _run_replication, config, model, maps, methods, r, bandwidth,
                    truths[r] if truths is not None else None,
                )
                for r in reps
            ]
            all_rows = [row for fut in futures for row in fut.result()]
    else:
        all_rows = [
            row
            for r in reps
            for row in _run_replication(config, model, maps, methods, r, bandwidth, truths[r] if truths is not None else None)
        ]

    all_rows.sort(key=lambda row: (row["rep"], row["method"], row["t"]))
    summary = summarize_rows(all_rows, config.metrics.kinds)
    summary.update(
        {
            "name": config.name,
            "metrics_from": resolve_metrics_from(config),
            "bandwidth": bandwidth,
            "budget": {
                "k_outer": config.train.k_outer,
                "otpf_k_outer": config.online.otpf_k_outer,
                "replications": config.online.replications,
                "n_particles": config.online.n_particles,
                "reference_n_particles": config.metrics.reference_n_particles if "mmd" in config.metrics.kinds else None,
            },
            "runtime_seconds": time.perf_counter() - t_start,
        }
    )

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = write_results_csv(all_rows, model.state_dim, config.metrics.kinds, out_dir / "results.csv")
        with open(out_dir / "summary.json", "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
        append_manifest(
            out_dir,
            "run",
            {"config": config.to_dict(), "methods": list(methods), "outputs": [csv_path.name, "summary.json"]},
        )
    return all_rows, summary


def write_results_csv(rows: List[dict], state_dim: int, kinds: Sequence[str], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ["t", "method", "rep"] + [f"mean_{i}" for i in range(state_dim)] + ["frac_pos0"] + list(kinds)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            rec = [row["t"], row["method"], row["rep"]] + [_fmt(v) for v in row["mean"]]
            rec.append("" if row["frac_pos0"] is None else _fmt(row["frac_pos0"]))
            for kind in kinds:
                rec.append("" if row[kind] is None else _fmt(row[kind]))
            writer.writerow(rec)
    return path


def read_results_csv(path) -> List[dict]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        mean_cols = [c for c in reader.fieldnames if c.startswith("mean_")]
        kinds = [c for c in reader.fieldnames if c in ("mse", "mmd")]
        for rec in reader:
            row = {
                "t": int(rec["t"]),
                "method": rec["method"],
                "rep": int(rec["rep"]),
                "mean": np.array([float(rec[c]) for c in mean_cols]),
                "frac_pos0": float(rec["frac_pos0"]) if rec["frac_pos0"] else None,
            }
            for kind in ("mse", "mmd"):
                row[kind] = float(rec[kind]) if kind in kinds and rec[kind] else None
            rows.append(row)
    return rows


def summarize_rows(rows: List[dict], kinds: Sequence[str]) -> dict:
    """Time-averaged metrics per method and replication, plus cross-rep stats."""
    per_method: dict = {}
    collected: dict = {}
    for row in rows:
        for kind in list(kinds) + ["frac_pos0"]:
            v = row.get(kind)
            if v is not None:
                collected.setdefault((row["method"], kind), {}).setdefault(row["rep"], []).append(v)
    for (method, kind), by_rep in sorted(collected.items()):
        reps = sorted(by_rep)
        avgs = [float(np.mean(by_rep[r])) for r in reps]
        entry = per_method.setdefault(method, {})
        entry[f"{kind}_time_avg_per_rep"] = avgs
        entry[f"{kind}_time_avg_mean"] = float(np.mean(avgs))
        entry[f"{kind}_time_avg_std"] = float(np.std(avgs))
    return {"per_method": per_method}


def evaluate_results(results_csv, out_path=None) -> dict:
    """Recompute the summary from a per-time results CSV."""
    rows = read_results_csv(results_csv)
    kinds = [k for k in ("mse", "mmd") if any(row.get(k) is not None for row in rows)]
    summary = summarize_rows(rows, kinds)
    if out_path is not None:
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    return summary


# ---------------------------------------------------------------------------
# stage 4: timing benchmark
# ---------------------------------------------------------------------------


@dataclass
class BenchReport:
    step_seconds: Dict[str, float]
    step_counts: Dict[str, int]
    n_particles: int
    train_seconds: Optional[float]
    hardware: str

    def to_dict(self) -> dict:
        return asdict(self)


def run_bench(
    config: ExperimentConfig,
    tmap: TrainedTransportMap,
    out_dir=None,
    methods: Sequence[str] | None = None,
    n_steps: int = 120,
    train_seconds: float | None = None,
) -> BenchReport:
    """Mean wall-clock per online step at matched particle count.

    The clock covers only the step call; the first ``window`` observations
    warm the transport filter's buffer untimed.
    """
    if n_steps < 100:
        raise InvalidInputError("benchmark requires at least 100 timed steps")
    methods = tuple(methods) if methods is not None else tuple(m for m in config.online.methods if m != "kf")
    model = config.model.build()
    n_p = config.online.n_particles
    warmup = tmap.window
    _, obs = _simulate_truth(model, warmup + n_steps, _stream(config.online.seed, 0, "truth"))

    seconds: Dict[str, float] = {}
    counts: Dict[str, int] = {}
    for method in methods:
        rng = _stream(config.online.seed, 0, method if method != "otddf" else "otddf", window=tmap.window if method == "otddf" else 0)
        elapsed = 0.0
        timed = 0
        if method == "otddf":
            window = ObservationWindow(tmap.window, model.obs_dim)
            for t, y in enumerate(obs, start=1):
                window.push(y)
                if not window.is_full:
                    continue
                tic = time.perf_counter()
                otddf_online_step(tmap, window, n_p, rng)
                elapsed += time.perf_counter() - tic
                timed += 1
        else:
            ens = _initial_ensemble(model, n_p, rng)
            otpf_state, otpf_cfg = OTPFState(), _otpf_train_config(config)
            for t, y in enumerate(obs, start=1):
                tic = time.perf_counter()
                if method == "enkf":
                    ens = enkf_step(ens, y, model, rng)
                elif method == "sir":
                    ens = sir_step(ens, y, model, rng)
                elif method == "otpf":
                    ens = otpf_step(ens, y, model, otpf_cfg, rng, otpf_state)
                else:
                    raise InvalidInputError(f"cannot benchmark method {method!r}")
                if t > warmup:
                    elapsed += time.perf_counter() - tic
                    timed += 1
        seconds[method] = elapsed / timed
        counts[method] = timed

    report = BenchReport(
        step_seconds=seconds,
        step_counts=counts,
        n_particles=n_p,
        train_seconds=train_seconds,
        hardware=f"{platform.machine()}, {os.cpu_count()} cpus, {platform.python_implementation()} {platform.python_version()}",
    )
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "bench.json", "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
        append_manifest(out_dir, "bench", {"config": config.to_dict(), "outputs": ["bench.json"]})
    return report
