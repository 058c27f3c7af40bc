"""Conditional transport-map learning via adversarial max-min training.

Given recorded trajectories, a pair of residual networks is trained on an
empirical objective: a scalar critic f(x, y) and a map T(x, y) that pushes
base states forward so that, conditioned on an observation window y, the
transported samples match the distribution of terminal states. Training
alternates k_inner Adam steps on the map with one Adam step on the critic,
exactly mirroring the batch objectives

    map:    mean_i [ 1/2 ||x_base_i - T_i||^2 - f(T_i, y_i) ]
    critic: mean_i [ -f(x_term_i, y_i) + f(T_i, y_i) ]

with T_i = T(x_base_i, y_i) and base states decoupled from the windows by a
random permutation. Everything runs in float64 numpy with handwritten
reverse-mode gradients, so training is deterministic given the seed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from .exceptions import InvalidInputError, TrainingDivergedError
from .models import TrajectoryDataset, extract_training_slice
from .validation import SeedLike, as_generator, check_count, check_positive

MAP_FORMAT_TAG = "otddf-map-v1"

ACTIVATIONS = ("relu", "tanh")


# ---------------------------------------------------------------------------
# residual networks
# ---------------------------------------------------------------------------


@dataclass
class ResidualNetwork:
    """MLP trunk with identity-skip residual blocks and affine adapters.

    Layout of the flat parameter vector: input adapter (W, b), then per block
    two width-by-width affine layers (W1, b1, W2, b2), then output adapter.
    A block computes h + W2 @ act(W1 @ h + b1) + b2. When ``x_skip`` is set,
    the first ``output_dim`` input coordinates are added to the output, so a
    zero output adapter makes the network the identity in x.
    """

    input_dim: int
    output_dim: int
    width: int
    n_blocks: int
    activation: str = "relu"
    x_skip: bool = False
    params: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise InvalidInputError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        if self.x_skip and self.output_dim > self.input_dim:
            raise InvalidInputError("x_skip requires output_dim <= input_dim")
        expected = self.param_count(self.input_dim, self.output_dim, self.width, self.n_blocks)
        if self.params.size == 0:
            self.params = np.zeros(expected)
        elif self.params.shape != (expected,):
            raise InvalidInputError(f"parameter vector has {self.params.size} entries, expected {expected}")

    @staticmethod
    def param_count(input_dim: int, output_dim: int, width: int, n_blocks: int) -> int:
        return (
            width * input_dim
            + width
            + n_blocks * (2 * width * width + 2 * width)
            + output_dim * width
            + output_dim
        )

    @classmethod
    def initialize(
        cls,
        input_dim: int,
        output_dim: int,
        width: int,
        n_blocks: int,
        rng: np.random.Generator,
        activation: str = "relu",
        x_skip: bool = False,
        identity_output: bool = False,
    ) -> "ResidualNetwork":
        """Fan-in scaled uniform init; optionally zero the output adapter so
        an x-skip network starts as the identity in x."""
        net = cls(input_dim, output_dim, width, n_blocks, activation, x_skip)
        params = np.empty(net.params.shape)
        for w_view, b_view in net._layers(params):
            bound = 1.0 / np.sqrt(w_view.shape[1])
            w_view[...] = rng.uniform(-bound, bound, size=w_view.shape)
            b_view[...] = rng.uniform(-bound, bound, size=b_view.shape)
        if identity_output:
            w_out, b_out = net._layers(params)[-1]
            w_out[...] = 0.0
            b_out[...] = 0.0
        net.params = params
        return net

    def _layers(self, params: np.ndarray) -> List[tuple]:
        """Views (W, b) per affine layer, in forward order."""
        d, o, h, nb = self.input_dim, self.output_dim, self.width, self.n_blocks
        layers = []
        off = 0

        def take(rows, cols):
            nonlocal off
            w = params[off : off + rows * cols].reshape(rows, cols)
            off += rows * cols
            b = params[off : off + rows]
            off += rows
            return w, b

        layers.append(take(h, d))
        for _ in range(nb):
            layers.append(take(h, h))
            layers.append(take(h, h))
        layers.append(take(o, h))
        return layers

    def _act(self, z: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            return np.maximum(z, 0.0)
        return np.tanh(z)

    def _act_grad(self, z: np.ndarray, u: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            return (z > 0.0).astype(float)
        return 1.0 - u * u

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.forward_cached(x)[0]

    def forward_cached(self, x: np.ndarray):
        """Batched forward pass; returns (output, cache) with x of shape (B, input_dim)."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise InvalidInputError(f"expected input of shape (B, {self.input_dim}), got {x.shape}")
        layers = self._layers(self.params)
        w_in, b_in = layers[0]
        h = x @ w_in.T + b_in
        blocks = []
        for k in range(self.n_blocks):
            w1, b1 = layers[1 + 2 * k]
            w2, b2 = layers[2 + 2 * k]
            z = h @ w1.T + b1
            u = self._act(z)
            blocks.append((h, z, u))
            h = h + u @ w2.T + b2
        w_out, b_out = layers[-1]
        out = h @ w_out.T + b_out
        if self.x_skip:
            out = out + x[:, : self.output_dim]
        return out, (x, blocks, h)

    def backward(self, cache, dout: np.ndarray):
        """Reverse-mode pass: returns (flat parameter gradient, input gradient)."""
        x, blocks, h_last = cache
        layers = self._layers(self.params)
        grad = np.zeros_like(self.params)
        gviews = self._layers(grad)

        w_out, _ = layers[-1]
        gw_out, gb_out = gviews[-1]
        gw_out[...] = dout.T @ h_last
        gb_out[...] = dout.sum(axis=0)
        dh = dout @ w_out

        for k in reversed(range(self.n_blocks)):
            h_in, z, u = blocks[k]
            w1, _ = layers[1 + 2 * k]
            w2, _ = layers[2 + 2 * k]
            gw1, gb1 = gviews[1 + 2 * k]
            gw2, gb2 = gviews[2 + 2 * k]
            gw2[...] = dh.T @ u
            gb2[...] = dh.sum(axis=0)
            dz = (dh @ w2) * self._act_grad(z, u)
            gw1[...] = dz.T @ h_in
            gb1[...] = dz.sum(axis=0)
            dh = dh + dz @ w1

        w_in, _ = layers[0]
        gw_in, gb_in = gviews[0]
        gw_in[...] = dh.T @ x
        gb_in[...] = dh.sum(axis=0)
        dx = dh @ w_in
        if self.x_skip:
            dx[:, : self.output_dim] += dout
        return grad, dx


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def fresh(cls, n_params: int, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        return cls(np.zeros(n_params), np.zeros(n_params), 0, beta1, beta2, epsilon)


def adam_step(params: np.ndarray, grad: np.ndarray, state: AdamState, lr: float):
    """One bias-corrected Adam update; returns (new params, new state)."""
    if params.shape != grad.shape or params.shape != state.first_moment.shape:
        raise InvalidInputError("params, grad, and moment vectors must share a shape")
    t = state.step_count + 1
    m = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad
    v = state.beta2 * state.second_moment + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_params = params - lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return new_params, replace(state, first_moment=m, second_moment=v, step_count=t)


# ---------------------------------------------------------------------------
# training data and configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of the offline training loop.

    ``avg_tail`` is the fraction of final outer iterations whose map
    parameters are averaged into the returned map (0 keeps the last
    iterate). Tail averaging damps the oscillation of the adversarial
    updates around their equilibrium.
    """

    window: int = 10
    burn_in: int = 0
    batch_size: int = 64
    lr_f: float = 1e-3
    lr_T: float = 5e-4
    k_inner: int = 10
    k_outer: int = 2000
    f_blocks: int = 1
    f_width: int = 64
    T_blocks: int = 2
    T_width: int = 48
    activation: str = "relu"
    avg_tail: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("window", "batch_size", "k_inner", "k_outer", "f_blocks", "f_width", "T_blocks", "T_width"):
            check_count(getattr(self, name), name)
        if self.burn_in < 0:
            raise InvalidInputError(f"burn_in must be >= 0, got {self.burn_in}")
        if not 0.0 <= self.avg_tail <= 1.0:
            raise InvalidInputError(f"avg_tail must lie in [0, 1], got {self.avg_tail}")
        check_positive(self.lr_f, "lr_f")
        check_positive(self.lr_T, "lr_T")


@dataclass(frozen=True)
class TrainingPairs:
    """Empirical source/target samples for the max-min problem.

    ``base`` holds permuted base states (independent coupling with the
    windows); ``terminal``/``windows`` keep their joint alignment.
    """

    base: np.ndarray  # (J, n), permuted
    terminal: np.ndarray  # (J, n)
    windows: np.ndarray  # (J, w*m)
    permutation: Optional[np.ndarray] = None  # the sigma used, None for batch views

    def __post_init__(self):
        J = self.base.shape[0]
        if self.terminal.shape[0] != J or self.windows.shape[0] != J:
            raise InvalidInputError("base, terminal, and windows must have equal lengths")
        if self.permutation is not None:
            if sorted(self.permutation.tolist()) != list(range(J)):
                raise InvalidInputError("permutation must be a bijection on {0..J-1}")

    def __len__(self) -> int:
        return self.base.shape[0]

    def subset(self, idx: np.ndarray) -> "TrainingPairs":
        return TrainingPairs(self.base[idx], self.terminal[idx], self.windows[idx], None)


def make_training_pairs(dataset: TrajectoryDataset, t0: int, w: int, seed: SeedLike) -> TrainingPairs:
    """Slice the dataset at (t0, w) and decouple base states from windows
    with a uniformly random permutation drawn from ``seed``."""
    base, terminal, windows = extract_training_slice(dataset, t0, w)
    rng = as_generator(seed)
    sigma = rng.permutation(len(base))
    return TrainingPairs(base=base[sigma], terminal=terminal, windows=windows, permutation=sigma)


# ---------------------------------------------------------------------------
# losses and gradients
# ---------------------------------------------------------------------------


def _stack_inputs(x, y_window, net: ResidualNetwork, x_dim: int | None = None):
    """Broadcast (x, y) into a 2-d concatenated batch; report if input was 1-d."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y_window, dtype=float)
    single = x.ndim == 1 and y.ndim == 1
    x2 = np.atleast_2d(x)
    y2 = np.atleast_2d(y)
    if x2.shape[0] != y2.shape[0]:
        if x2.shape[0] == 1:
            x2 = np.broadcast_to(x2, (y2.shape[0], x2.shape[1]))
        elif y2.shape[0] == 1:
            y2 = np.broadcast_to(y2, (x2.shape[0], y2.shape[1]))
        else:
            raise InvalidInputError(f"batch sizes disagree: {x2.shape[0]} vs {y2.shape[0]}")
    if x_dim is not None and x2.shape[1] != x_dim:
        raise InvalidInputError(f"expected state of dimension {x_dim}, got {x2.shape[1]}")
    if x2.shape[1] + y2.shape[1] != net.input_dim:
        raise InvalidInputError(
            f"state + window dims {x2.shape[1]} + {y2.shape[1]} do not match network input {net.input_dim}"
        )
    return np.concatenate([x2, y2], axis=1), single


def forward_f(net: ResidualNetwork, x, y_window):
    """Critic value f(x, y); scalar for 1-d inputs, (B,) for batches."""
    xin, single = _stack_inputs(x, y_window, net)
    out = net.forward(xin)[:, 0]
    return float(out[0]) if single else out


def forward_T(net: ResidualNetwork, x, y_window):
    """Transported state T(x, y); (n,) for 1-d inputs, (B, n) for batches."""
    xin, single = _stack_inputs(x, y_window, net, x_dim=net.output_dim)
    out = net.forward(xin)
    return out[0] if single else out


def loss_T(f_net: ResidualNetwork, T_net: ResidualNetwork, batch: TrainingPairs) -> float:
    """Batch mean of 1/2 ||x_base - T||^2 - f(T, y)."""
    if len(batch) == 0:
        raise InvalidInputError("batch must be nonempty")
    return _loss_T_value_grad(f_net, T_net, batch.base, batch.windows, need_grad=False)[0]


def loss_f(f_net: ResidualNetwork, T_net: ResidualNetwork, batch: TrainingPairs) -> float:
    """Batch mean of -f(x_term, y) + f(T, y), with T held fixed."""
    if len(batch) == 0:
        raise InvalidInputError("batch must be nonempty")
    return _loss_f_value_grad(f_net, T_net, batch.base, batch.terminal, batch.windows, need_grad=False)[0]


def _loss_T_value_grad(f_net, T_net, base, windows, need_grad=True):
    b = base.shape[0]
    t_out, t_cache = T_net.forward_cached(np.concatenate([base, windows], axis=1))
    f_val, f_cache = f_net.forward_cached(np.concatenate([t_out, windows], axis=1))
    resid = t_out - base
    loss = float(np.mean(0.5 * np.sum(resid * resid, axis=1) - f_val[:, 0]))
    if not need_grad:
        return loss, None
    d_tout = resid / b
    _, d_fin = f_net.backward(f_cache, np.full((b, 1), -1.0 / b))
    d_tout = d_tout + d_fin[:, : base.shape[1]]
    grad, _ = T_net.backward(t_cache, d_tout)
    return loss, grad


def _loss_f_value_grad(f_net, T_net, base, terminal, windows, need_grad=True):
    b = base.shape[0]
    t_out = T_net.forward(np.concatenate([base, windows], axis=1))
    v_data, c_data = f_net.forward_cached(np.concatenate([terminal, windows], axis=1))
    v_push, c_push = f_net.forward_cached(np.concatenate([t_out, windows], axis=1))
    loss = float(np.mean(-v_data[:, 0] + v_push[:, 0]))
    if not need_grad:
        return loss, None
    g_data, _ = f_net.backward(c_data, np.full((b, 1), -1.0 / b))
    g_push, _ = f_net.backward(c_push, np.full((b, 1), 1.0 / b))
    return loss, g_data + g_push


def gradient(loss, f_net: ResidualNetwork, T_net: ResidualNetwork, batch: TrainingPairs) -> np.ndarray:
    """Exact reverse-mode gradient of ``loss`` (one of loss_T / loss_f, or
    "T" / "f") with respect to the parameters of the network it trains."""
    if loss is loss_T or loss == "T":
        return _loss_T_value_grad(f_net, T_net, batch.base, batch.windows)[1]
    if loss is loss_f or loss == "f":
        return _loss_f_value_grad(f_net, T_net, batch.base, batch.terminal, batch.windows)[1]
    raise InvalidInputError("loss must be loss_T, loss_f, 'T', or 'f'")


def evaluate_objective(f_net: ResidualNetwork, T_net: ResidualNetwork, pairs: TrainingPairs) -> float:
    """Full-sample max-min objective: mean f over the joint samples plus the
    transport cost term over the decoupled samples. Decomposes exactly as
    loss_T(pairs) + mean f(terminal, windows)."""
    if len(pairs) == 0:
        raise InvalidInputError("pairs must be nonempty")
    data_term = float(np.mean(f_net.forward(np.concatenate([pairs.terminal, pairs.windows], axis=1))[:, 0]))
    return loss_T(f_net, T_net, pairs) + data_term


# ---------------------------------------------------------------------------
# training loop
# ---------------------------------------------------------------------------


@dataclass
class SolverState:
    """Warm-startable solver state: both networks plus their Adam moments."""

    f_net: ResidualNetwork
    T_net: ResidualNetwork
    adam_f: AdamState
    adam_T: AdamState


def init_solver_state(state_dim: int, window_dim: int, config: TrainConfig, seed: SeedLike) -> SolverState:
    """Fresh networks: fan-in uniform init, map output adapter zeroed so the
    map starts as the identity in x."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    f_ss, t_ss = root.spawn(2)
    f_net = ResidualNetwork.initialize(
        state_dim + window_dim, 1, config.f_width, config.f_blocks,
        as_generator(f_ss), config.activation,
    )
    T_net = ResidualNetwork.initialize(
        state_dim + window_dim, state_dim, config.T_width, config.T_blocks,
        as_generator(t_ss), config.activation, x_skip=True, identity_output=True,
    )
    return SolverState(
        f_net=f_net,
        T_net=T_net,
        adam_f=AdamState.fresh(f_net.params.size),
        adam_T=AdamState.fresh(T_net.params.size),
    )


def run_max_min(pairs: TrainingPairs, config: TrainConfig, state: SolverState, rng: np.random.Generator):
    """Alternating optimization: per outer iteration, draw one batch, take
    k_inner Adam steps on the map, then one Adam step on the critic.

    Mutates ``state`` in place and returns a (k_outer, 3) history array of
    (iteration, map loss, critic loss). Raises TrainingDivergedError when a
    loss goes non-finite.
    """
    n_pairs = len(pairs)
    if config.batch_size > n_pairs:
        raise InvalidInputError(f"batch_size {config.batch_size} exceeds the {n_pairs} available pairs")
    history = np.empty((config.k_outer, 3))
    tail_start = config.k_outer - int(round(config.avg_tail * config.k_outer))
    tail_sum = np.zeros_like(state.T_net.params)
    tail_count = 0
    for k in range(config.k_outer):
        idx = rng.integers(0, n_pairs, size=config.batch_size)
        base, terminal, windows = pairs.base[idx], pairs.terminal[idx], pairs.windows[idx]
        t_loss = np.nan
        for _ in range(config.k_inner):
            t_loss, g = _loss_T_value_grad(state.f_net, state.T_net, base, windows)
            state.T_net.params, state.adam_T = adam_step(state.T_net.params, g, state.adam_T, config.lr_T)
        f_loss, g = _loss_f_value_grad(state.f_net, state.T_net, base, terminal, windows)
        state.f_net.params, state.adam_f = adam_step(state.f_net.params, g, state.adam_f, config.lr_f)
        if k >= tail_start:
            tail_sum += state.T_net.params
            tail_count += 1
        history[k] = (k, t_loss, f_loss)
        if not (np.isfinite(t_loss) and np.isfinite(f_loss)):
            raise TrainingDivergedError(k)
    if tail_count > 0:
        state.T_net.params = tail_sum / tail_count
    return history


@dataclass
class TrainedTransportMap:
    """Offline product: the trained map, its critic (kept for diagnostics),
    the window geometry, and the pool of recorded base states it pushes."""

    T_net: ResidualNetwork
    f_net: ResidualNetwork
    window: int
    obs_dim: int
    base_pool: np.ndarray  # (J, n) recorded base states, unpermuted
    train_config: TrainConfig
    history: Optional[dict] = None  # training diagnostics, not persisted

    @property
    def state_dim(self) -> int:
        return self.T_net.output_dim

    def push(self, base_points: np.ndarray, window_flat: np.ndarray) -> np.ndarray:
        """Apply the map to base points under one flattened window."""
        base_points = np.atleast_2d(np.asarray(base_points, dtype=float))
        window_flat = np.asarray(window_flat, dtype=float).ravel()
        if window_flat.size != self.window * self.obs_dim:
            raise InvalidInputError(
                f"window has {window_flat.size} entries, expected {self.window * self.obs_dim}"
            )
        tiled = np.broadcast_to(window_flat, (base_points.shape[0], window_flat.size))
        return self.T_net.forward(np.concatenate([base_points, tiled], axis=1))


def train_from_pairs(
    pairs: TrainingPairs,
    config: TrainConfig,
    obs_dim: int,
    base_pool: np.ndarray,
    seed: SeedLike = None,
) -> TrainedTransportMap:
    """Run the full training schedule on prebuilt pairs (also used for
    surrogate tasks that are not sliced from a trajectory dataset)."""
    state_dim = pairs.base.shape[1]
    window_dim = pairs.windows.shape[1]
    if window_dim != config.window * obs_dim:
        raise InvalidInputError(
            f"windows have {window_dim} columns, expected window*obs_dim = {config.window * obs_dim}"
        )
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(config.seed if seed is None else seed)
    init_ss, batch_ss = root.spawn(2)
    state = init_solver_state(state_dim, window_dim, config, init_ss)
    history = run_max_min(pairs, config, state, as_generator(batch_ss))
    return TrainedTransportMap(
        T_net=state.T_net,
        f_net=state.f_net,
        window=config.window,
        obs_dim=obs_dim,
        base_pool=np.array(base_pool, dtype=float),
        train_config=config,
        history={
            "iteration": history[:, 0].astype(int),
            "loss_T": history[:, 1],
            "loss_f": history[:, 2],
            "n_T_updates": int(config.k_outer * config.k_inner),
            "n_f_updates": int(config.k_outer),
        },
    )


def train(dataset: TrajectoryDataset, config: TrainConfig) -> TrainedTransportMap:
    """Offline stage: slice the dataset at (burn_in, window), decouple base
    states from windows, and fit the map/critic pair. Deterministic given
    ``config.seed``."""
    if config.burn_in + config.window > dataset.horizon:
        raise InvalidInputError(
            f"burn_in + window = {config.burn_in + config.window} exceeds t_f = {dataset.horizon}"
        )
    if config.batch_size > dataset.n_trajectories:
        raise InvalidInputError("batch_size exceeds the number of trajectories")
    root = np.random.SeedSequence(config.seed)
    perm_ss, fit_ss = root.spawn(2)
    pairs = make_training_pairs(dataset, config.burn_in, config.window, perm_ss)
    base_pool = pairs.base[np.argsort(pairs.permutation)]  # undo sigma: recorded order
    return train_from_pairs(pairs, config, dataset.obs_dim, base_pool, seed=fit_ss)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def _net_to_dict(net: ResidualNetwork) -> dict:
    return {
        "input_dim": net.input_dim,
        "output_dim": net.output_dim,
        "width": net.width,
        "n_blocks": net.n_blocks,
        "activation": net.activation,
        "x_skip": net.x_skip,
        "params": net.params.tolist(),
    }


def _net_from_dict(d: dict) -> ResidualNetwork:
    return ResidualNetwork(
        input_dim=d["input_dim"],
        output_dim=d["output_dim"],
        width=d["width"],
        n_blocks=d["n_blocks"],
        activation=d["activation"],
        x_skip=d["x_skip"],
        params=np.asarray(d["params"], dtype=float),
    )


def save_map(tmap: TrainedTransportMap, path) -> Path:
    """Serialize a trained map to a single JSON file (exact float round-trip)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "format": MAP_FORMAT_TAG,
        "window": tmap.window,
        "state_dim": tmap.state_dim,
        "obs_dim": tmap.obs_dim,
        "T_net": _net_to_dict(tmap.T_net),
        "f_net": _net_to_dict(tmap.f_net),
        "base_pool": tmap.base_pool.tolist(),
        "train_config": asdict(tmap.train_config),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    return path


def load_map(path) -> TrainedTransportMap:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != MAP_FORMAT_TAG:
        raise InvalidInputError(f"unsupported map file format {doc.get('format')!r}")
    return TrainedTransportMap(
        T_net=_net_from_dict(doc["T_net"]),
        f_net=_net_from_dict(doc["f_net"]),
        window=doc["window"],
        obs_dim=doc["obs_dim"],
        base_pool=np.asarray(doc["base_pool"], dtype=float),
        train_config=TrainConfig(**doc["train_config"]),
    )
