"""Scikit-learn style front end for the transport-map filter.

``fit`` consumes a recorded :class:`~otddf.models.TrajectoryDataset` and
learns the conditional transport map offline; ``predict`` then runs the
online stage over a fresh observation sequence, and ``sample`` exposes the
raw conditional ensembles. Hyperparameters follow the estimator contract
(declared in ``__init__``, introspectable via ``get_params``), so the filter
composes with model-selection tooling.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .exceptions import InvalidInputError
from .filters import ObservationWindow, otddf_online_step
from .models import TrajectoryDataset
from .ot_core import TrainConfig, TrainedTransportMap, train
from .validation import SeedLike, check_count


class OTDataDrivenFilter(BaseEstimator):
    """Nonlinear filter learned offline from recorded trajectories.

    Parameters mirror the offline training loop: ``window`` is the number of
    most recent observations conditioned on, ``burn_in`` the training slice
    offset ("auto" places the slice at the end of the recorded horizon), and
    the remaining arguments control the networks and the optimizer.
    """

    def __init__(
        self,
        window: int = 10,
        burn_in="auto",
        batch_size: int = 64,
        lr_f: float = 1e-3,
        lr_T: float = 5e-4,
        k_inner: int = 10,
        k_outer: int = 2000,
        f_blocks: int = 1,
        f_width: int = 64,
        T_blocks: int = 2,
        T_width: int = 48,
        activation: str = "relu",
        n_particles: int = 1000,
        random_state: int = 0,
    ):
        self.window = window
        self.burn_in = burn_in
        self.batch_size = batch_size
        self.lr_f = lr_f
        self.lr_T = lr_T
        self.k_inner = k_inner
        self.k_outer = k_outer
        self.f_blocks = f_blocks
        self.f_width = f_width
        self.T_blocks = T_blocks
        self.T_width = T_width
        self.activation = activation
        self.n_particles = n_particles
        self.random_state = random_state

    def _train_config(self, horizon: int) -> TrainConfig:
        burn_in = horizon - self.window if self.burn_in == "auto" else int(self.burn_in)
        return TrainConfig(
            window=self.window,
            burn_in=burn_in,
            batch_size=self.batch_size,
            lr_f=self.lr_f,
            lr_T=self.lr_T,
            k_inner=self.k_inner,
            k_outer=self.k_outer,
            f_blocks=self.f_blocks,
            f_width=self.f_width,
            T_blocks=self.T_blocks,
            T_width=self.T_width,
            activation=self.activation,
            seed=self.random_state,
        )

    def fit(self, X: TrajectoryDataset, y=None) -> "OTDataDrivenFilter":
        """Learn the transport map from a recorded trajectory dataset."""
        if not isinstance(X, TrajectoryDataset):
            raise InvalidInputError(f"fit expects a TrajectoryDataset, got {type(X).__name__}")
        self.map_: TrainedTransportMap = train(X, self._train_config(X.horizon))
        self.state_dim_ = X.state_dim
        self.obs_dim_ = X.obs_dim
        return self

    def _check_fitted(self) -> TrainedTransportMap:
        if not hasattr(self, "map_"):
            raise NotFittedError("this filter has not been fitted; call fit first")
        return self.map_

    def sample(self, window_obs, n_particles: int | None = None, seed: SeedLike = 0) -> np.ndarray:
        """Conditional ensemble for one full observation window (w, m) or (w*m,)."""
        tmap = self._check_fitted()
        n = check_count(n_particles if n_particles is not None else self.n_particles, "n_particles")
        return otddf_online_step(tmap, np.asarray(window_obs, dtype=float), n, seed).particles

    def predict(self, observations, n_particles: int | None = None, seed: SeedLike = 0) -> np.ndarray:
        """Posterior-mean state estimates for a (t_run, m) observation sequence.

        Row t-1 estimates the state after observation t; rows before the
        window first fills are NaN.
        """
        tmap = self._check_fitted()
        obs = np.asarray(observations, dtype=float)
        if obs.ndim == 1:
            obs = obs[:, None]
        if obs.shape[1] != self.obs_dim_:
            raise InvalidInputError(f"observations have dim {obs.shape[1]}, expected {self.obs_dim_}")
        n = check_count(n_particles if n_particles is not None else self.n_particles, "n_particles")
        root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        step_seeds = root.spawn(obs.shape[0])
        window = ObservationWindow(self.window, self.obs_dim_)
        out = np.full((obs.shape[0], self.state_dim_), np.nan)
        for t, y in enumerate(obs, start=1):
            window.push(y)
            if window.is_full:
                out[t - 1] = otddf_online_step(tmap, window, n, step_seeds[t - 1]).mean()
        return out
