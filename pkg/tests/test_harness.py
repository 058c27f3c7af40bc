import json

import numpy as np
import pytest

from otddf.cli import main as cli_main
from otddf.exceptions import InvalidInputError
from otddf.harness import (
    DatasetConfig,
    ExperimentConfig,
    MetricsConfig,
    ModelConfig,
    OnlineConfig,
    TrainSpec,
    evaluate_results,
    load_config,
    read_results_csv,
    resolve_metrics_from,
    run_online,
    run_train,
    save_config,
    summarize_rows,
)
from otddf.models import load_dataset, simulate_trajectories
from otddf.ot_core import load_map


def _tiny_config(**overrides) -> ExperimentConfig:
    fields = dict(
        name="tiny",
        model=ModelConfig(kind="linear", params={}),
        dataset=DatasetConfig(n_trajectories=200, t_f=12, seed=4),
        train=TrainSpec(windows=(2, 4), k_outer=30, batch_size=32, f_width=8, T_width=8, seed=5),
        online=OnlineConfig(
            n_particles=100, t_run=16, replications=2, seed=6,
            methods=("kf", "enkf", "sir", "otddf"),
        ),
        metrics=MetricsConfig(kinds=("mse",)),
    )
    fields.update(overrides)
    return ExperimentConfig(**fields)


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny_run")
    config = _tiny_config()
    dataset = simulate_trajectories(config.model.build(), config.dataset.n_trajectories, config.dataset.t_f, seed=config.dataset.seed)
    maps = run_train(config, dataset, out_dir=out)
    rows, summary = run_online(config, maps, out_dir=out)
    return config, out, maps, rows, summary


def test_config_json_round_trip(tmp_path):
    config = _tiny_config()
    path = save_config(config, tmp_path / "config.json")
    assert load_config(path) == config


def test_config_round_trip_with_per_window_budgets(tmp_path):
    config = _tiny_config(
        train=TrainSpec(windows=(2, 4), k_outer=(10, 20), avg_tail=0.5, batch_size=16, seed=5),
    )
    path = save_config(config, tmp_path / "config.json")
    loaded = load_config(path)
    assert loaded == config
    assert loaded.train.k_outer_for(4) == 20


def test_metrics_from_auto_covers_all_windows():
    config = _tiny_config()
    # auto burn-in: t0 = t_f - w, so burn_in + w = t_f for every window
    assert resolve_metrics_from(config) == config.dataset.t_f


def test_train_outputs_and_loss_curves(tiny_run):
    config, out, maps, _, _ = tiny_run
    for w in config.train.windows:
        tmap = load_map(out / f"map_w{w}.json")
        assert tmap.window == w
        assert tmap.T_net.input_dim == 2 + w
        lines = (out / f"loss_w{w}.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + config.train.k_outer  # header + one row per outer iteration
        assert lines[0] == "outer_iter,loss_T,loss_f"


def test_results_csv_schema(tiny_run):
    config, out, _, _, _ = tiny_run
    header = (out / "results.csv").read_text().splitlines()[0]
    assert header == "t,method,rep,mean_0,mean_1,frac_pos0,mse"
    rows = read_results_csv(out / "results.csv")
    methods = {row["method"] for row in rows}
    assert methods == {"kf", "enkf", "sir", "otddf_w2", "otddf_w4"}
    # metric cells filled exactly from the warm-up time onward
    start = resolve_metrics_from(config)
    assert all((row["mse"] is not None) == (row["t"] >= start) for row in rows)


def test_summary_matches_recomputation_from_csv(tiny_run):
    _, out, _, _, summary = tiny_run
    recomputed = evaluate_results(out / "results.csv")
    assert recomputed["per_method"] == summary["per_method"]


def test_rows_sorted_and_deterministic(tiny_run):
    config, _, maps, rows, _ = tiny_run
    keys = [(r["rep"], r["method"], r["t"]) for r in rows]
    assert keys == sorted(keys)
    rows2, _ = run_online(config, maps)
    assert len(rows) == len(rows2)
    for a, b in zip(rows, rows2):
        assert a["method"] == b["method"] and a["t"] == b["t"] and a["rep"] == b["rep"]
        assert np.array_equal(a["mean"], b["mean"])


def test_parallel_matches_serial(tiny_run, monkeypatch):
    config, _, maps, rows, _ = tiny_run
    monkeypatch.setenv("OTDDF_THREADS", "1")
    serial_rows, _ = run_online(config, maps)
    for a, b in zip(rows, serial_rows):
        assert np.array_equal(a["mean"], b["mean"])
        assert a["mse"] == b["mse"]


def test_online_requires_maps_for_transport_method():
    config = _tiny_config()
    with pytest.raises(InvalidInputError):
        run_online(config, maps={})


def test_online_rejects_unknown_method():
    config = _tiny_config()
    with pytest.raises(InvalidInputError):
        run_online(config, maps={}, methods=("enkf", "bogus"))


def test_kalman_method_needs_linear_model():
    config = _tiny_config(
        model=ModelConfig(kind="linear", params={"observation_kind": "quadratic"}),
        online=OnlineConfig(n_particles=50, t_run=14, replications=1, seed=1, methods=("kf",)),
    )
    with pytest.raises(InvalidInputError):
        run_online(config, maps=None, methods=("kf",))


def test_summarize_rows_time_averages():
    rows = [
        {"t": 1, "method": "m", "rep": 0, "mean": np.zeros(1), "frac_pos0": None, "mse": 2.0, "mmd": None},
        {"t": 2, "method": "m", "rep": 0, "mean": np.zeros(1), "frac_pos0": None, "mse": 4.0, "mmd": None},
        {"t": 1, "method": "m", "rep": 1, "mean": np.zeros(1), "frac_pos0": None, "mse": 6.0, "mmd": None},
    ]
    summary = summarize_rows(rows, kinds=("mse",))
    stats = summary["per_method"]["m"]
    assert stats["mse_time_avg_per_rep"] == [3.0, 6.0]
    assert stats["mse_time_avg_mean"] == 4.5


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def cli_workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = _tiny_config(
        dataset=DatasetConfig(n_trajectories=150, t_f=14, seed=3),
        train=TrainSpec(windows=(2,), k_outer=20, batch_size=32, f_width=8, T_width=8, seed=5),
        online=OnlineConfig(n_particles=60, t_run=14, replications=2, seed=7, methods=("kf", "enkf", "otddf")),
    )
    config_path = save_config(config, root / "config.json")
    sim_dir, train_dir = root / "sim", root / "train"
    assert cli_main(["simulate", "--config", str(config_path), "--out", str(sim_dir)]) == 0
    assert cli_main([
        "train", "--config", str(config_path), "--dataset", str(sim_dir / "dataset.csv"), "--out", str(train_dir),
    ]) == 0
    return root, config, config_path


def test_cli_simulate_round_trip_and_byte_identical(cli_workspace, capsys):
    root, config, config_path = cli_workspace
    out_b = root / "sim_b"
    assert cli_main(["simulate", "--config", str(config_path), "--out", str(out_b)]) == 0
    capsys.readouterr()
    bytes_a = (root / "sim" / "dataset.csv").read_bytes()
    assert bytes_a == (out_b / "dataset.csv").read_bytes()
    loaded = load_dataset(root / "sim" / "dataset.csv")
    fresh = simulate_trajectories(config.model.build(), config.dataset.n_trajectories, config.dataset.t_f, seed=config.dataset.seed)
    assert np.array_equal(loaded.stacked_states(), fresh.stacked_states())
    assert (root / "sim" / "manifest.json").exists()


def test_cli_simulate_monte_carlo_sanity(tmp_path, capsys):
    out = tmp_path / "sim500"
    cfg500 = _tiny_config(dataset=DatasetConfig(n_trajectories=500, t_f=3, seed=11))
    path = save_config(cfg500, tmp_path / "cfg500.json")
    assert cli_main(["simulate", "--config", str(path), "--out", str(out)]) == 0
    capsys.readouterr()
    x0 = load_dataset(out / "dataset.csv").stacked_states()[:, 0, :]
    se = x0.std(axis=0, ddof=1) / np.sqrt(500)
    assert np.all(np.abs(x0.mean(axis=0)) <= 3 * se)


def test_cli_train_outputs(cli_workspace):
    root, config, _ = cli_workspace
    assert (root / "train" / "map_w2.json").exists()
    lines = (root / "train" / "loss_w2.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + config.train.k_outer


def test_cli_run_and_evaluate(cli_workspace, capsys):
    root, config, config_path = cli_workspace
    run_dir = root / "run"
    assert cli_main(["run", "--config", str(config_path), "--maps", str(root / "train"), "--out", str(run_dir)]) == 0
    out_text = capsys.readouterr().out
    assert "kf" in out_text
    summary = json.loads((run_dir / "summary.json").read_text())
    # the exact filter attains the smallest error on its own model
    per = summary["per_method"]
    assert per["kf"]["mse_time_avg_mean"] <= per["otddf_w2"]["mse_time_avg_mean"] * 1.5
    assert (run_dir / "results.csv").exists()

    eval_dir = root / "eval"
    assert cli_main(["evaluate", "--results", str(run_dir / "results.csv"), "--out", str(eval_dir)]) == 0
    capsys.readouterr()
    recomputed = json.loads((eval_dir / "summary_recomputed.json").read_text())
    assert recomputed["per_method"]["kf"] == per["kf"]


def test_cli_run_with_recorded_dataset(cli_workspace, tmp_path, capsys):
    root, config, config_path = cli_workspace
    run_dir = tmp_path / "run_ds"
    code = cli_main([
        "run", "--config", str(config_path),
        "--maps", str(root / "train"),
        "--dataset", str(root / "sim" / "dataset.csv"),
        "--out", str(run_dir), "--methods", "enkf", "--seed", "99",
    ])
    capsys.readouterr()
    assert code == 0
    rows = read_results_csv(run_dir / "results.csv")
    assert {row["method"] for row in rows} == {"enkf"}


def test_cli_windows_flag(cli_workspace, tmp_path, capsys):
    root, config, config_path = cli_workspace
    out = tmp_path / "train_w4"
    code = cli_main([
        "train", "--config", str(config_path),
        "--dataset", str(root / "sim" / "dataset.csv"),
        "--out", str(out), "--windows", "4",
    ])
    capsys.readouterr()
    assert code == 0
    assert (out / "map_w4.json").exists()
    assert not (out / "map_w2.json").exists()
