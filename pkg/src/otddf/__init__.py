"""Data-driven nonlinear filtering with offline-trained conditional transport maps."""

from .exceptions import (
    DegenerateWeightsError,
    InvalidInputError,
    InvalidWindowError,
    NumericalOverflowError,
    TrainingDivergedError,
    WindowNotReadyError,
)
from .models import (
    LinearModelParams,
    Lorenz63Params,
    StateSpaceModel,
    Trajectory,
    TrajectoryDataset,
    extract_training_slice,
    linear_step,
    load_dataset,
    lorenz63_step,
    make_linear_model,
    make_lorenz63_model,
    observe,
    save_dataset,
    simulate_trajectories,
)
from .ot_core import (
    AdamState,
    ResidualNetwork,
    TrainConfig,
    TrainedTransportMap,
    TrainingPairs,
    adam_step,
    evaluate_objective,
    forward_T,
    forward_f,
    gradient,
    load_map,
    loss_T,
    loss_f,
    make_training_pairs,
    save_map,
    train,
)
from .filters import (
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
from .metrics import MetricSeries, median_heuristic_bandwidth, mmd, mse, time_average
from .estimator import OTDataDrivenFilter
from .harness import ExperimentConfig, load_config, run_bench, run_online, run_simulate, run_train

__version__ = "0.1.0"
