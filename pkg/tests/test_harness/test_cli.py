import json
import pandas as pd
import pytest
import yaml

from hedgebench.harness.cli import main
from hedgebench.market import GjrGarchParams, simulate_paths


@pytest.fixture
def config_file(test_output_path):
    config = {
        "seed": 21,
        "sizes": {"train": 256, "validation": 128, "n_test_sets": 2, "test_size": 128},
        "algorithms": ["mcpg", "bsdh"],
        "grid": {
            "learning_rates": [1e-3],
            "batch_sizes": [16],
            "hidden_layer_counts": [1],
            "hidden_sizes": [4, 8],
        },
        "budget": 10,
        "tuning_budget": 5,
        "validation_every": 5,
    }
    fname = test_output_path / "experiment.yaml"
    fname.write_text(yaml.safe_dump(config))
    return fname


def test_parser_errors():
    with pytest.raises(SystemExit):
        main([])
    with pytest.raises(SystemExit):
        main(["fly"])
    with pytest.raises(SystemExit):
        main(["simulate", "--scale", "huge"])


def test_simulate(config_file, test_output_path, capsys):
    out = test_output_path / "run"
    args = ["--config", str(config_file), "--out-dir", str(out)]
    main(["simulate", "--netcdf"] + args)
    printed = capsys.readouterr().out
    assert "annualized volatility" in printed
    assert "test_01" in printed
    data = out / "data"
    with open(data / "datasets.json") as f:
        assert json.load(f)["seed"] == 21
    assert (data / "train.hbps").exists()
    assert (data / "test_01.nc").exists()

    main(["simulate", "--seed", "4"] + args)
    with open(data / "datasets.json") as f:
        assert json.load(f)["seed"] == 4


def test_calibrate(test_output_path, capsys):
    returns = simulate_paths(GjrGarchParams(), 1, 240, seed=1).log_returns[0]
    fname = test_output_path / "returns.csv"
    pd.DataFrame({"return": returns}).to_csv(fname, index=False)
    main(["calibrate", str(fname), "--out-dir", str(test_output_path)])
    with open(test_output_path / "garch_params.json") as f:
        fitted = GjrGarchParams.from_dict(json.load(f))
    assert fitted.nu0 > 0
    assert "persistence" in capsys.readouterr().out


def test_workflow(config_file, test_output_path, capsys):
    out = test_output_path / "run"
    args = ["--config", str(config_file), "--out-dir", str(out)]

    main(["gridsearch", "--algo", "mcpg"] + args)
    assert (out / "gridsearch" / "gridsearch_mcpg.csv").exists()
    with open(out / "gridsearch" / "best_mcpg.json") as f:
        best = json.load(f)
    assert best["learning_rate"] == 1e-3
    assert best["hidden_size"] in (4, 8)

    main(["train"] + args)
    assert (out / "agents" / "mcpg.json").exists()
    assert not (out / "agents" / "bsdh.json").exists()
    with open(out / "agents" / "mcpg.trace.json") as f:
        trace = json.load(f)
    assert trace["updates_done"] <= 10
    with open(out / "agents" / "mcpg.json") as f:
        assert json.load(f)["agent_config"]["hidden_size"] == best["hidden_size"]

    capsys.readouterr()
    main(["evaluate"] + args)
    printed = capsys.readouterr().out
    assert "mcpg" in printed and "bsdh" in printed

    main(["compare", "--use-checkpoints"] + args)
    with open(out / "comparison.json") as f:
        report = json.load(f)
    rows = {r["algorithm"]: r for r in report["rows"]}
    assert set(rows) == {"mcpg", "bsdh"}
    assert len(rows["mcpg"]["rsqps"]) == 2
    assert "trace" not in rows["mcpg"]
    assert (out / "comparison.csv").exists()

    main(["plot", "--path-index", "3"] + args)
    table = pd.read_csv(out / "positions.csv")
    assert list(table.columns) == ["t", "S_t", "X_mcpg", "X_bsdh"]
    assert (out / "positions.svg").exists()


def test_compare_trains_without_checkpoints(config_file, test_output_path):
    out = test_output_path / "fresh"
    main(
        ["compare", "--config", str(config_file), "--out-dir", str(out)]
        + ["--algo", "mcpg", "bsdh"]
    )
    with open(out / "comparison.json") as f:
        rows = {r["algorithm"]: r for r in json.load(f)["rows"]}
    assert rows["mcpg"]["trace"]["updates_done"] <= 10
    assert rows["bsdh"]["error"] is None
