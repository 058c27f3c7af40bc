"""Online inference engines.

The transport-map filter pushes recorded base states through the trained map
conditioned on a sliding observation window. Baselines for comparison: the
exact Kalman filter (linear-Gaussian ground truth), a stochastic ensemble
Kalman filter with perturbed observations, a sequential importance resampling
particle filter with systematic resampling, and an online transport filter
that re-solves the max-min problem at every step using the model simulator.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .exceptions import (
    DegenerateWeightsError,
    InvalidInputError,
    WindowNotReadyError,
)
from .models import LinearModelParams, StateSpaceModel
from .ot_core import (
    SolverState,
    TrainConfig,
    TrainedTransportMap,
    TrainingPairs,
    init_solver_state,
    run_max_min,
)
from .validation import SeedLike, as_generator, check_count, check_weights

_COV_JITTER = 1e-8


@dataclass(frozen=True)
class ParticleEnsemble:
    """Equally- or importance-weighted state samples approximating a posterior."""

    particles: np.ndarray  # (N, state_dim)
    weights: np.ndarray  # (N,) simplex vector

    def __post_init__(self):
        p = np.asarray(self.particles, dtype=float)
        if p.ndim != 2:
            raise InvalidInputError(f"particles must be (N, state_dim), got shape {p.shape}")
        object.__setattr__(self, "particles", p)
        object.__setattr__(self, "weights", check_weights(self.weights, p.shape[0]))

    @classmethod
    def uniform(cls, particles: np.ndarray) -> "ParticleEnsemble":
        particles = np.asarray(particles, dtype=float)
        n = particles.shape[0]
        return cls(particles, np.full(n, 1.0 / n))

    @property
    def size(self) -> int:
        return self.particles.shape[0]

    def mean(self) -> np.ndarray:
        return self.weights @ self.particles


@dataclass(frozen=True)
class KalmanState:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mean, dtype=float)
        p = np.asarray(self.covariance, dtype=float)
        if p.shape != (m.size, m.size):
            raise InvalidInputError(f"covariance shape {p.shape} does not match mean size {m.size}")
        if np.linalg.norm(p - p.T) > 1e-10:
            raise InvalidInputError("covariance must be symmetric within 1e-10")
        if np.linalg.eigvalsh(p).min() < -1e-10:
            raise InvalidInputError("covariance must be positive semidefinite within 1e-10")
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "covariance", p)


@dataclass(frozen=True)
class LinearGaussianSpec:
    """Matrices of a linear-Gaussian model: x' = A x + w, y = H x + v."""

    transition_matrix: np.ndarray
    process_cov: np.ndarray
    obs_matrix: np.ndarray
    obs_cov: np.ndarray


def linear_gaussian_spec(params: LinearModelParams) -> LinearGaussianSpec:
    """Kalman matrices for the rotation benchmark; linear observations only."""
    if params.observation_kind != "linear":
        raise InvalidInputError("Kalman filtering requires the linear observation kind")
    s2 = params.sigma**2
    return LinearGaussianSpec(
        transition_matrix=params.dynamics_matrix,
        process_cov=s2 * np.eye(2),
        obs_matrix=np.array([[1.0, 0.0]]),
        obs_cov=np.array([[s2]]),
    )


class ObservationWindow:
    """Ring buffer of the most recent observations, flattened oldest-first
    in the same layout the training slices use."""

    def __init__(self, window_size: int, obs_dim: int):
        self.window_size = check_count(window_size, "window_size")
        self.obs_dim = check_count(obs_dim, "obs_dim")
        self._buf: deque = deque(maxlen=window_size)

    def push(self, y) -> None:
        y = np.asarray(y, dtype=float).ravel()
        if y.size != self.obs_dim:
            raise InvalidInputError(f"observation has {y.size} entries, expected {self.obs_dim}")
        self._buf.append(y)

    def __len__(self) -> int:
        return len(self._buf)

    @property
    def is_full(self) -> bool:
        return len(self._buf) == self.window_size

    def flatten(self) -> np.ndarray:
        if not self.is_full:
            raise WindowNotReadyError(
                f"window holds {len(self._buf)} of {self.window_size} observations"
            )
        return np.concatenate(list(self._buf))


# ---------------------------------------------------------------------------
# transport-map filter, online stage
# ---------------------------------------------------------------------------


def otddf_online_step(
    tmap: TrainedTransportMap,
    window: ObservationWindow | np.ndarray,
    n_particles: int,
    seed: SeedLike,
) -> ParticleEnsemble:
    """Draw base states from the recorded pool (uniformly, with replacement)
    and push them through the trained map under the current window.

    Stateless: the output depends only on (map, window contents, N, seed).
    """
    n_particles = check_count(n_particles, "n_particles")
    flat = window.flatten() if isinstance(window, ObservationWindow) else np.asarray(window, dtype=float).ravel()
    rng = as_generator(seed)
    idx = rng.integers(0, tmap.base_pool.shape[0], size=n_particles)
    return ParticleEnsemble.uniform(tmap.push(tmap.base_pool[idx], flat))


# ---------------------------------------------------------------------------
# Kalman filter
# ---------------------------------------------------------------------------


def kalman_step(spec: LinearGaussianSpec, state: KalmanState, y) -> KalmanState:
    a, q, h, r = spec.transition_matrix, spec.process_cov, spec.obs_matrix, spec.obs_cov
    m_pred = a @ state.mean
    p_pred = a @ state.covariance @ a.T + q
    innov = np.atleast_1d(np.asarray(y, dtype=float)) - h @ m_pred
    s = h @ p_pred @ h.T + r
    try:
        gain = np.linalg.solve(s.T, (p_pred @ h.T).T).T
    except np.linalg.LinAlgError as exc:
        raise InvalidInputError(f"singular innovation covariance: {exc}") from exc
    m_new = m_pred + gain @ innov
    p_new = (np.eye(m_pred.size) - gain @ h) @ p_pred
    p_new = 0.5 * (p_new + p_new.T)
    return KalmanState(m_new, p_new)


def kalman_filter(spec: LinearGaussianSpec, observations: Sequence, prior: KalmanState) -> List[KalmanState]:
    """Predict/update recursion; returns the posterior after each observation."""
    states = []
    state = prior
    for y in observations:
        state = kalman_step(spec, state, y)
        states.append(state)
    return states


# ---------------------------------------------------------------------------
# ensemble Kalman filter (stochastic, perturbed observations)
# ---------------------------------------------------------------------------


def enkf_step(ensemble: ParticleEnsemble, y, model: StateSpaceModel, seed: SeedLike) -> ParticleEnsemble:
    """Propagate, then update every particle against its own perturbed copy
    of the observation using sample cross- and observation-covariances."""
    if ensemble.size == 0:
        raise InvalidInputError("ensemble must be nonempty")
    rng = as_generator(seed)
    n, m = model.state_dim, model.obs_dim
    x = model.transition(ensemble.particles, rng.standard_normal((ensemble.size, n)))
    y_pred = model.observation_mean(x)
    perturb = model.obs_noise_std * rng.standard_normal((ensemble.size, m))

    x_anom = x - x.mean(axis=0)
    y_anom = y_pred - y_pred.mean(axis=0)
    denom = max(ensemble.size - 1, 1)
    cov_xy = x_anom.T @ y_anom / denom
    cov_yy = y_anom.T @ y_anom / denom + model.obs_noise_std**2 * np.eye(m)
    try:
        gain = np.linalg.solve(cov_yy.T, cov_xy.T).T
    except np.linalg.LinAlgError:
        gain = np.linalg.solve((cov_yy + _COV_JITTER * np.eye(m)).T, cov_xy.T).T
    innovation = np.asarray(y, dtype=float).reshape(1, m) + perturb - y_pred
    return ParticleEnsemble.uniform(x + innovation @ gain.T)


# ---------------------------------------------------------------------------
# SIR particle filter
# ---------------------------------------------------------------------------


def systematic_resample(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Indices drawn by systematic resampling (one uniform offset)."""
    n = weights.size
    positions = (rng.random() + np.arange(n)) / n
    return np.searchsorted(np.cumsum(weights), positions).clip(max=n - 1)


def sir_step(ensemble: ParticleEnsemble, y, model: StateSpaceModel, seed: SeedLike) -> ParticleEnsemble:
    """Propagate, weight by the Gaussian observation likelihood, and
    systematic-resample back to uniform weights. Weights are accumulated in
    log space; a fully degenerate weight vector raises."""
    if ensemble.size == 0:
        raise InvalidInputError("ensemble must be nonempty")
    if model.obs_noise_std <= 0:
        raise DegenerateWeightsError("observation noise is zero; likelihood is degenerate")
    rng = as_generator(seed)
    n = model.state_dim
    x = model.transition(ensemble.particles, rng.standard_normal((ensemble.size, n)))
    resid = np.asarray(y, dtype=float).reshape(1, -1) - model.observation_mean(x)
    log_w = -0.5 * np.sum((resid / model.obs_noise_std) ** 2, axis=1) + np.log(ensemble.weights)
    norm = logsumexp(log_w)
    if not np.isfinite(norm):
        raise DegenerateWeightsError("all particle weights underflowed to zero")
    w = np.exp(log_w - norm)
    idx = systematic_resample(w, rng)
    return ParticleEnsemble.uniform(x[idx])


# ---------------------------------------------------------------------------
# online transport particle filter (per-step max-min solve)
# ---------------------------------------------------------------------------


@dataclass
class OTPFState:
    """Carried solver state so consecutive steps warm-start each other."""

    solver: Optional[SolverState] = None


def otpf_step(
    ensemble: ParticleEnsemble,
    y,
    model: StateSpaceModel,
    config: TrainConfig,
    seed: SeedLike,
    state: OTPFState | None = None,
) -> ParticleEnsemble:
    """One online step: propagate particles, simulate paired observations,
    fit a single-observation transport map with the (reduced) budget in
    ``config``, and push the propagated particles through it at the actual
    observation. Passing ``state`` reuses the previous step's networks.
    """
    if ensemble.size == 0:
        raise InvalidInputError("ensemble must be nonempty")
    if config.window != 1:
        raise InvalidInputError("online transport steps condition on a single observation; use window=1")
    rng = as_generator(seed)
    n, m = model.state_dim, model.obs_dim
    x_prop = model.transition(ensemble.particles, rng.standard_normal((ensemble.size, n)))
    y_sim = model.observation(x_prop, rng.standard_normal((ensemble.size, m)))
    sigma = rng.permutation(ensemble.size)
    pairs = TrainingPairs(base=x_prop[sigma], terminal=x_prop, windows=y_sim, permutation=sigma)

    if state is None:
        state = OTPFState()
    if state.solver is None:
        state.solver = init_solver_state(n, m, config, rng.integers(0, 2**63 - 1))
    run_max_min(pairs, config, state.solver, rng)
    pushed = state.solver.T_net.forward(
        np.concatenate([x_prop, np.broadcast_to(np.asarray(y, dtype=float).reshape(1, m), (ensemble.size, m))], axis=1)
    )
    return ParticleEnsemble.uniform(pushed)
