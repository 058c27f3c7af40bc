import numpy as np
import pytest

from otddf.exceptions import DegenerateWeightsError, InvalidInputError, WindowNotReadyError
from otddf.filters import (
    KalmanState,
    LinearGaussianSpec,
    ObservationWindow,
    OTPFState,
    ParticleEnsemble,
    enkf_step,
    kalman_filter,
    kalman_step,
    linear_gaussian_spec,
    otddf_online_step,
    otpf_step,
    sir_step,
    systematic_resample,
)
from otddf.models import (
    LinearModelParams,
    StateSpaceModel,
    extract_training_slice,
    make_linear_model,
    simulate_trajectories,
)
from otddf.ot_core import ResidualNetwork, TrainConfig, TrainedTransportMap


def _identity_map(window=3, state_dim=2, obs_dim=1, pool_size=50, seed=0) -> TrainedTransportMap:
    rng = np.random.default_rng(seed)
    wm = window * obs_dim
    return TrainedTransportMap(
        T_net=ResidualNetwork(state_dim + wm, state_dim, 4, 1, x_skip=True),
        f_net=ResidualNetwork(state_dim + wm, 1, 4, 1),
        window=window,
        obs_dim=obs_dim,
        base_pool=rng.standard_normal((pool_size, state_dim)),
        train_config=TrainConfig(window=window),
    )


def _simulate_one(model, t_run, seed):
    ds = simulate_trajectories(model, 1, t_run, seed=seed)
    return ds.trajectories[0].states, ds.trajectories[0].observations


# ---------------------------------------------------------------------------
# ensemble and window plumbing
# ---------------------------------------------------------------------------


def test_ensemble_validates_weights():
    with pytest.raises(InvalidInputError):
        ParticleEnsemble(np.zeros((3, 2)), np.array([0.5, 0.5, 0.5]))
    with pytest.raises(InvalidInputError):
        ParticleEnsemble(np.zeros((3, 2)), np.array([-0.5, 1.0, 0.5]))


def test_ensemble_weighted_mean():
    ens = ParticleEnsemble(np.array([[0.0], [2.0]]), np.array([0.25, 0.75]))
    assert ens.mean()[0] == pytest.approx(1.5)


def test_window_flattening_matches_training_layout():
    model = make_linear_model()
    ds = simulate_trajectories(model, 1, 10, seed=3)
    _, _, slices = extract_training_slice(ds, t0=4, w=3)
    window = ObservationWindow(3, 1)
    for t in range(5, 8):  # observations Y_5..Y_7 live at rows 4..6
        window.push(ds.trajectories[0].observations[t - 1])
    assert np.array_equal(window.flatten(), slices[0])


def test_window_not_ready():
    window = ObservationWindow(4, 2)
    window.push(np.zeros(2))
    assert not window.is_full
    with pytest.raises(WindowNotReadyError):
        window.flatten()


def test_window_keeps_most_recent():
    window = ObservationWindow(2, 1)
    for v in (1.0, 2.0, 3.0):
        window.push([v])
    assert window.flatten().tolist() == [2.0, 3.0]


# ---------------------------------------------------------------------------
# transport-map online step
# ---------------------------------------------------------------------------


def test_otddf_step_identity_map_returns_base_draws():
    tmap = _identity_map()
    ens = otddf_online_step(tmap, np.zeros(3), 200, seed=1)
    assert ens.particles.shape == (200, 2)
    assert np.allclose(ens.weights, 1.0 / 200)
    pool_rows = {tuple(row) for row in tmap.base_pool}
    assert all(tuple(p) in pool_rows for p in ens.particles)


def test_otddf_step_deterministic():
    tmap = _identity_map()
    a = otddf_online_step(tmap, np.ones(3), 500, seed=42)
    b = otddf_online_step(tmap, np.ones(3), 500, seed=42)
    assert np.array_equal(a.particles, b.particles)


def test_otddf_step_stateless_across_call_order():
    tmap = _identity_map()
    windows = [np.full(3, v) for v in (0.0, 1.0, 2.0)]
    forward = [otddf_online_step(tmap, w, 100, seed=i).particles for i, w in enumerate(windows)]
    backward = [
        otddf_online_step(tmap, w, 100, seed=i).particles
        for i, w in reversed(list(enumerate(windows)))
    ]
    for a, b in zip(forward, reversed(backward)):
        assert np.array_equal(a, b)


def test_otddf_step_requires_full_window():
    tmap = _identity_map(window=4)
    window = ObservationWindow(4, 1)
    window.push([0.0])
    with pytest.raises(WindowNotReadyError):
        otddf_online_step(tmap, window, 10, seed=0)


# ---------------------------------------------------------------------------
# Kalman filter
# ---------------------------------------------------------------------------


def _scalar_spec(a=1.0, q=1.0, r=1.0) -> LinearGaussianSpec:
    return LinearGaussianSpec(
        transition_matrix=np.array([[a]]),
        process_cov=np.array([[q]]),
        obs_matrix=np.array([[1.0]]),
        obs_cov=np.array([[r]]),
    )


def test_kalman_hand_riccati_step():
    # a=q=r=P0=1: predicted variance 2, gain 2/3, updated variance 2/3
    state = kalman_step(_scalar_spec(), KalmanState(np.zeros(1), np.eye(1)), np.array([3.0]))
    assert state.covariance[0, 0] == pytest.approx(2.0 / 3.0, abs=1e-14)
    assert state.mean[0] == pytest.approx(2.0, abs=1e-14)  # gain 2/3 times innovation 3


def test_kalman_variance_contracts_without_process_noise():
    spec = _scalar_spec(q=0.0, r=1.0)
    state = KalmanState(np.zeros(1), np.eye(1))
    variances = []
    for y in np.zeros(30):
        state = kalman_step(spec, state, np.array([y]))
        variances.append(state.covariance[0, 0])
    assert all(b < a for a, b in zip(variances, variances[1:]))
    assert variances[-1] < 0.05


def test_kalman_spec_requires_linear_observations():
    with pytest.raises(InvalidInputError):
        linear_gaussian_spec(LinearModelParams(observation_kind="quadratic"))


def test_kalman_innovation_whiteness():
    params = LinearModelParams()
    model = make_linear_model(params)
    spec = linear_gaussian_spec(params)
    _, obs = _simulate_one(model, 2000, seed=11)
    states = kalman_filter(spec, obs, KalmanState(np.zeros(2), np.eye(2)))
    means = [np.zeros(2)] + [s.mean for s in states[:-1]]
    innovations = np.array(
        [obs[t][0] - (spec.obs_matrix @ spec.transition_matrix @ means[t])[0] for t in range(2000)]
    )
    centered = innovations - innovations.mean()
    rho1 = (centered[:-1] @ centered[1:]) / (centered @ centered)
    assert abs(rho1) < 0.1


def test_kalman_covariance_stays_symmetric_psd_over_random_systems():
    rng = np.random.default_rng(99)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        a = rng.standard_normal((n, n))
        a *= 0.95 / max(np.abs(np.linalg.eigvals(a)).max(), 1e-6)
        mq = rng.standard_normal((n, n))
        mr = rng.standard_normal((1, 1))
        spec = LinearGaussianSpec(a, mq @ mq.T + 0.1 * np.eye(n), rng.standard_normal((1, n)), mr @ mr.T + 0.1 * np.eye(1))
        state = KalmanState(np.zeros(n), np.eye(n))
        for y in rng.standard_normal(500):
            # the KalmanState constructor enforces symmetry and PSD
            state = kalman_step(spec, state, np.array([y]))


# ---------------------------------------------------------------------------
# ensemble Kalman filter
# ---------------------------------------------------------------------------


def _noise_free_obs_model() -> StateSpaceModel:
    base = make_linear_model()
    return StateSpaceModel(
        name="noise-free-obs",
        state_dim=2,
        obs_dim=1,
        transition=lambda x, noise: x,  # frozen dynamics for the zero-innovation check
        observation=lambda x, noise: x[..., :1],
        observation_mean=lambda x: x[..., :1],
        obs_noise_std=0.0,
        x0_sampler=base.x0_sampler,
    )


def test_enkf_zero_innovation_leaves_particles_unchanged():
    # all particles share the observed coordinate, the observation matches it,
    # and the perturbation draw is zero, so the update term vanishes
    model = _noise_free_obs_model()
    particles = np.column_stack([np.full(40, 1.5), np.linspace(-1, 1, 40)])
    out = enkf_step(ParticleEnsemble.uniform(particles), np.array([1.5]), model, seed=0)
    assert np.allclose(out.particles, particles, atol=1e-9)


def test_enkf_preserves_ensemble_size_and_weights():
    model = make_linear_model()
    ens = ParticleEnsemble.uniform(np.random.default_rng(0).standard_normal((64, 2)))
    out = enkf_step(ens, np.array([0.3]), model, seed=5)
    assert out.size == 64
    assert np.allclose(out.weights, 1.0 / 64)
    assert abs(out.weights.sum() - 1.0) <= 1e-12


def _tracking_error_vs_kf(step, n_particles, t_run=100, seed=21):
    params = LinearModelParams()
    model = make_linear_model(params)
    spec = linear_gaussian_spec(params)
    _, obs = _simulate_one(model, t_run, seed=seed)
    kf_states = kalman_filter(spec, obs, KalmanState(np.zeros(2), np.eye(2)))
    rng = np.random.default_rng(seed + 1)
    ens = ParticleEnsemble.uniform(rng.standard_normal((n_particles, 2)))
    devs, ses = [], []
    for t, y in enumerate(obs, start=1):
        ens = step(ens, y, model, rng)
        devs.append(np.linalg.norm(ens.mean() - kf_states[t - 1].mean))
        ses.append(np.linalg.norm(ens.particles.std(axis=0, ddof=1)) / np.sqrt(n_particles))
    return np.mean(devs), np.mean(ses)


def test_enkf_tracks_kalman_mean():
    dev, se = _tracking_error_vs_kf(enkf_step, 3000)
    assert dev <= 3 * se


def test_sir_tracks_kalman_mean():
    dev, se = _tracking_error_vs_kf(sir_step, 3000)
    assert dev <= 3 * se


# ---------------------------------------------------------------------------
# SIR particle filter
# ---------------------------------------------------------------------------


def test_systematic_resample_ratio():
    # two particles with weights 3:1; expected counts over many seeds are 3:1
    weights = np.array([0.75, 0.25])
    counts = np.zeros(2)
    n_draws = 2000
    for seed in range(n_draws):
        idx = systematic_resample(weights, np.random.default_rng(seed))
        counts += np.bincount(idx, minlength=2)
    fractions = counts / counts.sum()
    assert abs(fractions[0] - 0.75) < 0.05 * 0.75


def test_sir_identical_particles_resample_to_same_set():
    model = _noise_free_obs_model()
    # zero-noise observation model is degenerate; give it a likelihood scale
    model = StateSpaceModel(
        name=model.name, state_dim=2, obs_dim=1,
        transition=model.transition, observation=model.observation,
        observation_mean=model.observation_mean, obs_noise_std=0.5,
        x0_sampler=model.x0_sampler,
    )
    particles = np.tile(np.array([[1.0, -2.0]]), (25, 1))
    out = sir_step(ParticleEnsemble.uniform(particles), np.array([0.8]), model, seed=3)
    assert np.array_equal(out.particles, particles)
    assert np.allclose(out.weights, 1.0 / 25)


def test_sir_degenerate_weights_raise():
    model = _noise_free_obs_model()  # obs_noise_std == 0
    ens = ParticleEnsemble.uniform(np.zeros((10, 2)))
    with pytest.raises(DegenerateWeightsError):
        sir_step(ens, np.array([1.0]), model, seed=0)


# ---------------------------------------------------------------------------
# online transport filter
# ---------------------------------------------------------------------------


def test_otpf_step_contract():
    model = make_linear_model()
    cfg = TrainConfig(window=1, burn_in=0, batch_size=32, k_inner=2, k_outer=2, f_width=8, T_width=8)
    ens = ParticleEnsemble.uniform(np.random.default_rng(0).standard_normal((32, 2)))
    state = OTPFState()
    out = otpf_step(ens, np.array([0.1]), model, cfg, seed=4, state=state)
    assert out.size == 32
    assert np.allclose(out.weights, 1.0 / 32)
    assert state.solver is not None
    # warm start: a second step reuses the same networks
    nets_before = state.solver.T_net
    otpf_step(out, np.array([0.2]), model, cfg, seed=5, state=state)
    assert state.solver.T_net is nets_before


def test_otpf_requires_single_observation_window():
    model = make_linear_model()
    ens = ParticleEnsemble.uniform(np.zeros((8, 2)))
    with pytest.raises(InvalidInputError):
        otpf_step(ens, np.array([0.0]), model, TrainConfig(window=2), seed=0)


@pytest.mark.slow
def test_otpf_small_run_stays_within_twice_kalman_mse():
    params = LinearModelParams()
    model = make_linear_model(params)
    spec = linear_gaussian_spec(params)
    states, obs = _simulate_one(model, 60, seed=5)
    kf_states = kalman_filter(spec, obs, KalmanState(np.zeros(2), np.eye(2)))
    kf_mse = np.mean([np.sum((kf_states[t - 1].mean - states[t]) ** 2) for t in range(1, 61)])

    cfg = TrainConfig(window=1, burn_in=0, batch_size=64, lr_f=1e-3, lr_T=5e-4, k_inner=10, k_outer=20)
    rng = np.random.default_rng(3)
    ens = ParticleEnsemble.uniform(rng.standard_normal((400, 2)))
    state = OTPFState()
    mses = []
    for t, y in enumerate(obs, start=1):
        ens = otpf_step(ens, y, model, cfg, rng, state)
        mses.append(np.sum((ens.mean() - states[t]) ** 2))
    assert np.mean(mses) <= 2.0 * kf_mse
