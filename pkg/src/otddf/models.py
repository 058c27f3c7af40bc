"""Benchmark state-space models, trajectory simulation, and recorded datasets.

Two benchmark systems are provided:

* a 2-d linear system whose dynamics matrix is a rotation, observed either
  through the first coordinate (linear) or its square (quadratic, which makes
  the posterior bimodal);
* the chaotic Lorenz-63 system discretized with Euler-Maruyama, observed
  through its first coordinate.

All randomness flows through explicit standard-normal noise arrays or seeded
`numpy.random.Generator` streams, so every operation here is reproducible
bit-exactly. Datasets persist as CSV plus a JSON metadata sidecar.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List

import numpy as np

from .exceptions import InvalidInputError, InvalidWindowError, NumericalOverflowError
from .validation import as_float_array, check_count, trajectory_seed

OBSERVATION_KINDS = ("linear", "quadratic")

# Noise-free Lorenz-63 coordinates of one of the two spiral fixed points;
# the default initial sampler perturbs around it and relies on burn-in.
_LORENZ_FIXED_POINT = None  # computed lazily from params


@dataclass(frozen=True)
class LinearModelParams:
    """Rotation dynamics with shared state/observation noise level.

    ``alpha`` in (0, 1] sets the rotation angle; ``sigma`` is the standard
    deviation of both the process and observation noise.
    """

    alpha: float = 0.9
    sigma: float = float(np.sqrt(0.1))
    observation_kind: str = "linear"

    def __post_init__(self):
        if not abs(self.alpha) <= 1.0:
            raise InvalidInputError(f"alpha must satisfy |alpha| <= 1, got {self.alpha}")
        if self.observation_kind not in OBSERVATION_KINDS:
            raise InvalidInputError(
                f"observation_kind must be one of {OBSERVATION_KINDS}, got {self.observation_kind!r}"
            )

    @property
    def dynamics_matrix(self) -> np.ndarray:
        a = self.alpha
        b = float(np.sqrt(1.0 - a * a))
        return np.array([[a, b], [-b, a]])


@dataclass(frozen=True)
class Lorenz63Params:
    sigma_l: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    dt: float = 0.01
    process_noise_std: float = 0.2  # default 2*sqrt(dt)
    obs_noise_var: float = 0.1

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidInputError(f"dt must be > 0, got {self.dt}")
        if not self.obs_noise_var > 0:
            raise InvalidInputError(f"obs_noise_var must be > 0, got {self.obs_noise_var}")


@dataclass(frozen=True)
class StateSpaceModel:
    """A simulable hidden-Markov model.

    ``transition`` and ``observation`` take (state, standard-normal noise)
    and are vectorized over leading axes; given identical noise they are
    deterministic. ``observation_mean`` is the noise-free sensor map h, and
    ``obs_noise_std`` its additive noise level (used by filters that assume
    a Gaussian likelihood).
    """

    name: str
    state_dim: int
    obs_dim: int
    transition: Callable[[np.ndarray, np.ndarray], np.ndarray]
    observation: Callable[[np.ndarray, np.ndarray], np.ndarray]
    observation_mean: Callable[[np.ndarray], np.ndarray]
    obs_noise_std: float
    x0_sampler: Callable[[np.random.Generator], np.ndarray]


@dataclass(frozen=True)
class Trajectory:
    """One recorded run: states at t = 0..t_f, observations at t = 1..t_f."""

    states: np.ndarray  # (t_f + 1, state_dim)
    observations: np.ndarray  # (t_f, obs_dim)

    def __post_init__(self):
        if self.states.shape[0] != self.observations.shape[0] + 1:
            raise InvalidInputError(
                f"states/observations length mismatch: {self.states.shape[0]} vs {self.observations.shape[0]}"
            )

    @property
    def horizon(self) -> int:
        return self.observations.shape[0]


@dataclass(frozen=True)
class TrajectoryDataset:
    """Independent recorded trajectories; the algorithm's only model knowledge."""

    trajectories: List[Trajectory]
    model_name: str
    seed: int

    def __post_init__(self):
        horizons = {traj.horizon for traj in self.trajectories}
        state_dims = {traj.states.shape[1] for traj in self.trajectories}
        obs_dims = {traj.observations.shape[1] for traj in self.trajectories}
        if len(horizons) > 1 or len(state_dims) > 1 or len(obs_dims) > 1:
            raise InvalidInputError("all trajectories must share t_f and dimensions")

    @property
    def n_trajectories(self) -> int:
        return len(self.trajectories)

    @property
    def horizon(self) -> int:
        return self.trajectories[0].horizon

    @property
    def state_dim(self) -> int:
        return self.trajectories[0].states.shape[1]

    @property
    def obs_dim(self) -> int:
        return self.trajectories[0].observations.shape[1]

    def stacked_states(self) -> np.ndarray:
        """(J, t_f + 1, n) view of all state paths."""
        return np.stack([traj.states for traj in self.trajectories])

    def stacked_observations(self) -> np.ndarray:
        """(J, t_f, m) view of all observation paths."""
        return np.stack([traj.observations for traj in self.trajectories])


def linear_step(x, params: LinearModelParams, noise) -> np.ndarray:
    """One step of the rotation dynamics: A x + sigma * noise."""
    x = as_float_array(x, "x")
    noise = as_float_array(noise, "noise")
    if x.shape[-1] != 2 or noise.shape[-1] != 2:
        raise InvalidInputError(f"linear_step expects 2-vectors, got {x.shape} and {noise.shape}")
    return x @ params.dynamics_matrix.T + params.sigma * noise


def lorenz63_step(x, params: Lorenz63Params, noise) -> np.ndarray:
    """One Euler-Maruyama step: x + dt*f(x) + process_noise_std*sqrt(dt)*noise."""
    x = as_float_array(x, "x")
    noise = as_float_array(noise, "noise")
    if x.shape[-1] != 3 or noise.shape[-1] != 3:
        raise InvalidInputError(f"lorenz63_step expects 3-vectors, got {x.shape} and {noise.shape}")
    if not np.all(np.isfinite(x)):
        raise NumericalOverflowError("non-finite state entering lorenz63_step")
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    drift = np.stack(
        [
            params.sigma_l * (x2 - x1),
            x1 * (params.rho - x3) - x2,
            x1 * x2 - params.beta * x3,
        ],
        axis=-1,
    )
    out = x + params.dt * drift + params.process_noise_std * np.sqrt(params.dt) * noise
    if not np.all(np.isfinite(out)):
        raise NumericalOverflowError("lorenz63_step produced a non-finite state")
    return out


def observe(x, model: StateSpaceModel, noise) -> np.ndarray:
    """Noisy sensor reading h(x) + obs_noise_std * noise for the given model."""
    x = as_float_array(x, "x")
    if x.shape[-1] != model.state_dim:
        raise InvalidInputError(f"state has trailing dim {x.shape[-1]}, model expects {model.state_dim}")
    return model.observation(x, as_float_array(noise, "noise"))


def _linear_observation_mean(kind: str) -> Callable[[np.ndarray], np.ndarray]:
    if kind == "linear":
        return lambda x: x[..., :1]
    return lambda x: x[..., :1] ** 2


def make_linear_model(params: LinearModelParams | None = None) -> StateSpaceModel:
    """Rotation dynamics observed through x[0] (or its square)."""
    params = params or LinearModelParams()
    h = _linear_observation_mean(params.observation_kind)

    def transition(x, noise):
        return linear_step(x, params, noise)

    def observation(x, noise):
        noise = as_float_array(noise, "noise")
        if noise.shape[-1] != 1:
            raise InvalidInputError(f"observation noise must have trailing dim 1, got {noise.shape}")
        return h(np.asarray(x, dtype=float)) + params.sigma * noise

    return StateSpaceModel(
        name=f"linear-{params.observation_kind}",
        state_dim=2,
        obs_dim=1,
        transition=transition,
        observation=observation,
        observation_mean=h,
        obs_noise_std=params.sigma,
        x0_sampler=lambda rng: rng.standard_normal(2),
    )


def make_lorenz63_model(params: Lorenz63Params | None = None) -> StateSpaceModel:
    """Euler-Maruyama Lorenz-63 observed through its first coordinate."""
    params = params or Lorenz63Params()
    obs_std = float(np.sqrt(params.obs_noise_var))
    # Spiral fixed point (+sqrt(beta*(rho-1)), same, rho-1): initial states are
    # drawn around it and the burn-in carries them onto the attractor.
    c = float(np.sqrt(params.beta * (params.rho - 1.0)))
    anchor = np.array([c, c, params.rho - 1.0])

    def transition(x, noise):
        return lorenz63_step(x, params, noise)

    def observation(x, noise):
        x = as_float_array(x, "x")
        noise = as_float_array(noise, "noise")
        if noise.shape[-1] != 1:
            raise InvalidInputError(f"observation noise must have trailing dim 1, got {noise.shape}")
        return x[..., :1] + obs_std * noise

    return StateSpaceModel(
        name="lorenz63",
        state_dim=3,
        obs_dim=1,
        transition=transition,
        observation=observation,
        observation_mean=lambda x: x[..., :1],
        obs_noise_std=obs_std,
        x0_sampler=lambda rng: anchor + rng.standard_normal(3),
    )


def simulate_trajectories(
    model: StateSpaceModel,
    n_trajectories: int,
    t_f: int,
    x0_sampler: Callable[[np.random.Generator], np.ndarray] | None = None,
    seed: int = 0,
) -> TrajectoryDataset:
    """Simulate independent recorded trajectories of length t_f.

    Trajectory j consumes only its own stream, seeded by the splittable pair
    (seed, j): first the initial state, then the process-noise block, then
    the observation-noise block. Stepping is vectorized across trajectories,
    which is bit-identical to simulating them one at a time.
    """
    J = check_count(n_trajectories, "n_trajectories")
    t_f = check_count(t_f, "t_f")
    sample_x0 = x0_sampler or model.x0_sampler
    n, m = model.state_dim, model.obs_dim

    x0 = np.empty((J, n))
    proc = np.empty((J, t_f, n))
    obsn = np.empty((J, t_f, m))
    for j in range(J):
        rng = np.random.default_rng(trajectory_seed(seed, j))
        x0[j] = np.asarray(sample_x0(rng), dtype=float)
        proc[j] = rng.standard_normal((t_f, n))
        obsn[j] = rng.standard_normal((t_f, m))

    states = np.empty((J, t_f + 1, n))
    observations = np.empty((J, t_f, m))
    states[:, 0] = x0
    for t in range(1, t_f + 1):
        states[:, t] = model.transition(states[:, t - 1], proc[:, t - 1])
        observations[:, t - 1] = model.observation(states[:, t], obsn[:, t - 1])

    trajectories = [Trajectory(states[j].copy(), observations[j].copy()) for j in range(J)]
    return TrajectoryDataset(trajectories=trajectories, model_name=model.name, seed=seed)


def extract_training_slice(dataset: TrajectoryDataset, t0: int, w: int):
    """Per trajectory, pull the base state X_{t0}, the terminal state
    X_{t0+w}, and the observation window (Y_{t0+1}, ..., Y_{t0+w}) flattened
    oldest-first into a length w*m vector.

    Returns arrays of shape (J, n), (J, n), (J, w*m).
    """
    if t0 < 0 or w < 1:
        raise InvalidWindowError(f"need t0 >= 0 and w >= 1, got t0={t0}, w={w}")
    if t0 + w > dataset.horizon:
        raise InvalidWindowError(
            f"window [t0+1, t0+w] = [{t0 + 1}, {t0 + w}] exceeds horizon t_f={dataset.horizon}"
        )
    states = dataset.stacked_states()
    obs = dataset.stacked_observations()
    base = states[:, t0].copy()
    terminal = states[:, t0 + w].copy()
    # observations array index t-1 holds Y_t, so Y_{t0+1}..Y_{t0+w} live at rows t0..t0+w-1
    windows = obs[:, t0 : t0 + w].reshape(dataset.n_trajectories, -1).copy()
    return base, terminal, windows


# ---------------------------------------------------------------------------
# persistence: CSV of rows (traj, t, x..., y...) plus a JSON metadata sidecar
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def metadata_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".meta.json")


def save_dataset(dataset: TrajectoryDataset, csv_path) -> Path:
    """Write the dataset CSV and its metadata sidecar; returns the CSV path.

    Values are serialized with 17 significant digits so loading reproduces
    them exactly. Observation columns are empty at t = 0.
    """
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    n, m = dataset.state_dim, dataset.obs_dim
    header = ["traj", "t"] + [f"x_{i}" for i in range(n)] + [f"y_{i}" for i in range(m)]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for j, traj in enumerate(dataset.trajectories):
            for t in range(traj.horizon + 1):
                row = [str(j), str(t)] + [_fmt(v) for v in traj.states[t]]
                if t == 0:
                    row += [""] * m
                else:
                    row += [_fmt(v) for v in traj.observations[t - 1]]
                writer.writerow(row)
    meta = {
        "model": dataset.model_name,
        "n": n,
        "m": m,
        "J": dataset.n_trajectories,
        "t_f": dataset.horizon,
        "seed": dataset.seed,
    }
    with open(metadata_path(csv_path), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return csv_path


def load_dataset(csv_path) -> TrajectoryDataset:
    """Load a dataset written by :func:`save_dataset`."""
    csv_path = Path(csv_path)
    with open(metadata_path(csv_path)) as fh:
        meta = json.load(fh)
    n, m, J, t_f = meta["n"], meta["m"], meta["J"], meta["t_f"]
    states = np.empty((J, t_f + 1, n))
    observations = np.empty((J, t_f, m))
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = ["traj", "t"] + [f"x_{i}" for i in range(n)] + [f"y_{i}" for i in range(m)]
        if header != expected:
            raise InvalidInputError(f"unexpected dataset header {header}")
        for row in reader:
            j, t = int(row[0]), int(row[1])
            states[j, t] = [float(v) for v in row[2 : 2 + n]]
            if t > 0:
                observations[j, t - 1] = [float(v) for v in row[2 + n : 2 + n + m]]
    trajectories = [Trajectory(states[j], observations[j]) for j in range(J)]
    return TrajectoryDataset(trajectories=trajectories, model_name=meta["model"], seed=meta["seed"])
