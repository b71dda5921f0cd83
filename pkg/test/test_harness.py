import json

import numpy as np
import pandas as pd
import pytest

from main import attach_signed_values, main
from src.config import ExperimentConfig, build_config, coerce_value, lab_environment
from src.exceptions import ConfigException, ConsistencyException
from src.output import read_table, write_table
from src.utils import parse_grid, parse_list
from src.worker import WORKERS, get_worker, run_experiment
from src.worker.blocks import summary_keys


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 else None)


def test_parse_grid():
    grid = parse_grid("-6:3:0.05")
    assert len(grid) == 181
    assert grid[0] == -6.0
    assert grid[-1] == 3.0
    assert list(parse_grid("0,0.5")) == [0.0, 0.5]
    with pytest.raises(ConfigException):
        parse_grid("1:0:0.1")
    with pytest.raises(ConfigException):
        parse_grid("a:b:c")


def test_parse_list():
    assert parse_list("0,0.7") == [0.0, 0.7]
    assert parse_list([1, 2]) == [1.0, 2.0]
    with pytest.raises(ConfigException):
        parse_list("1,x")


def test_coerce_value():
    integer = {"name": "N", "type": "integer", "typeOptions": {"minValue": 1}}
    assert coerce_value(integer, "12") == 12
    with pytest.raises(ConfigException):
        coerce_value(integer, "1.5")
    with pytest.raises(ConfigException):
        coerce_value(integer, "0")
    flag = {"name": "edge", "type": "boolean"}
    assert coerce_value(flag, "true") is True
    assert coerce_value(flag, "off") is False
    with pytest.raises(ConfigException):
        coerce_value(flag, "maybe")


def test_every_experiment_is_registered():
    assert set(WORKERS) == {
        "png-height", "png-layers", "rmt-edge", "rmt-dyson", "dist-eval", "dist-joint", "compare",
    }
    with pytest.raises(ConfigException):
        get_worker("tasep")


def test_experiment_config_validation():
    with pytest.raises(ConfigException):
        ExperimentConfig(experiment="dist-eval", format="xml")
    with pytest.raises(ConfigException):
        ExperimentConfig(experiment="dist-eval", workers=0)
    with pytest.raises(ConfigException):
        ExperimentConfig(experiment="dist-eval", seed=-1)


def test_config_file_values_are_overridden_by_cli(tmp_path):
    path = tmp_path / "lab.env"
    path.write_text("q=0.5\nN=8\nseed=3\n")
    block_def = WORKERS["png-height"].block_def
    config = build_config("png-height", block_def, {"N": "4"}, str(path))
    assert config.parameters["q"] == 0.5
    assert config.parameters["N"] == 4
    assert config.seed == 3


def test_dist_eval_default_grid(tmp_path, capsys):
    out = tmp_path / "f2.csv"
    code, summary = _run(["dist-eval", "--which", "F2", "--out", str(out)], capsys)
    assert code == 0
    assert summary["rows"] == 181
    assert summary["monotone"]
    table, meta = read_table(str(out))
    assert len(table) == 181
    assert np.all(np.diff(table["value"]) >= -1e-10)
    assert table["value"].iloc[0] < 1e-6
    assert meta["experiment"] == "dist-eval"
    assert meta["config"]["parameters"]["which"] == "F2"


def test_output_does_not_depend_on_worker_count(tmp_path, capsys):
    paths = []
    for workers in (1, 2):
        out = tmp_path / f"png-{workers}.csv"
        code, _ = _run([
            "png-height", "--q", "0.25", "--alpha", "0.8", "--N", "6", "--samples", "600",
            "--seed", "4", "--workers", str(workers), "--ks", "false", "--out", str(out),
        ], capsys)
        assert code == 0
        paths.append(out)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_png_then_compare(tmp_path, capsys):
    data = tmp_path / "png.csv"
    code, _ = _run([
        "png-height", "--q", "0.25", "--N", "4", "--samples", "300", "--ks", "false",
        "--out", str(data),
    ], capsys)
    assert code == 0
    table, meta = read_table(str(data))
    assert meta["reference"]["name"] == "GOE2"
    assert list(table["sample"]) == list(range(300))
    result = tmp_path / "cmp.json"
    code, summary = _run([
        "compare", "--input", str(data), "--format", "json", "--out", str(result),
    ], capsys)
    assert code == 0
    assert summary["metric"] == "ks"
    assert summary["against"] == "GOE2"
    assert 0.0 <= summary["value"] <= 1.0
    _, cmp_meta = read_table(str(result))
    assert cmp_meta["summary"]["n"] == 300


def test_two_sample_compare(tmp_path, capsys):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (first, second):
        code, _ = _run([
            "rmt-edge", "--ensemble", "gue", "--N", "10", "--samples", "200", "--seed", "1",
            "--ks", "false", "--out", str(path),
        ], capsys)
        assert code == 0
    code, summary = _run([
        "compare", "--input", str(first), "--against", "SAMPLES",
        "--reference-file", str(second), "--out", str(tmp_path / "cmp.csv"),
    ], capsys)
    assert code == 0
    assert summary["value"] == 0.0


def test_unknown_option_is_a_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["png-height", "--bogus", "1"])
    assert e.value.code == 2


def test_config_errors_exit_with_two(tmp_path, capsys):
    bad = tmp_path / "bad.env"
    bad.write_text("bogus=1\n")
    assert main(["dist-eval", "--config", str(bad), "--out", str(tmp_path / "x.csv")]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "ConfigException"
    code = main([
        "png-height", "--alpha", "1.0", "--omega", "0.5", "--out", str(tmp_path / "y.csv"),
    ])
    assert code == 2


def test_domain_errors_exit_with_two(tmp_path):
    code = main(["png-height", "--q", "0.25", "--alpha", "3.0", "--out", str(tmp_path / "z.csv")])
    assert code == 2


def test_json_round_trip(tmp_path):
    df = pd.DataFrame({"s": [0.1, 0.2], "value": [0.25, 0.5]})
    path = str(tmp_path / "t.json")
    write_table(df, {"experiment": "dist-eval"}, path, "json")
    table, meta = read_table(path)
    assert meta == {"experiment": "dist-eval"}
    assert list(table["value"]) == [0.25, 0.5]


def test_run_experiment_returns_output_path(tmp_path):
    config = ExperimentConfig(
        experiment="dist-eval",
        parameters={"which": "GAUSS", "s": [0.0, 1.0], "Lambda": 1.5, "N": 4},
        out=str(tmp_path / "g.csv"),
    )
    summary = run_experiment(config)
    assert summary["output"] == str(tmp_path / "g.csv")
    table, _ = read_table(summary["output"])
    assert table["value"].iloc[0] == pytest.approx(0.5)


def test_png_layers(tmp_path, capsys):
    out = tmp_path / "layers.csv"
    code, summary = _run([
        "png-layers", "--q", "0.25", "--N", "4", "--samples", "20", "--depth", "6",
        "--out", str(out),
    ], capsys)
    assert code == 0
    table, _ = read_table(str(out))
    assert len(table) == 120
    assert set(table["layer"]) == set(range(6))
    assert 1.0 <= summary["mean_occupied_layers"] <= 6.0


def test_dyson_chain_against_joint_law(tmp_path, capsys):
    chain, joint = tmp_path / "chain.csv", tmp_path / "joint.csv"
    code, _ = _run([
        "rmt-dyson", "--N", "2", "--times", "0,0.7", "--eps", "1,0", "--samples", "2000",
        "--out", str(chain),
    ], capsys)
    assert code == 0
    code, summary = _run([
        "dist-joint", "--finite-n", "--N", "2", "--times", "0,0.7", "--eps", "1,0",
        "--s", "-0.5:1.5:1", "--out", str(joint),
    ], capsys)
    assert code == 0
    assert summary["rows"] == 9
    code, summary = _run([
        "compare", "--input", str(chain), "--reference-file", str(joint),
        "--out", str(tmp_path / "cmp.csv"),
    ], capsys)
    assert code == 0
    assert summary["metric"] == "sup_difference"
    assert summary["column"] == "lambda1_0,lambda1_1"
    assert summary["value"] < 0.06


def test_dash_leading_values_are_kept():
    argv = ["dist-joint", "--finite-n", "--eps", "-1,0", "--s", "-1:1:1", "--seed", "2"]
    assert attach_signed_values(argv, {"--eps", "--s"}) == [
        "dist-joint", "--finite-n", "--eps=-1,0", "--s=-1:1:1", "--seed", "2",
    ]


def test_dist_eval_with_negative_grid(tmp_path, capsys):
    code, summary = _run([
        "dist-eval", "--which", "F2", "--s", "-6:3:0.05", "--out", str(tmp_path / "f2.csv"),
    ], capsys)
    assert code == 0
    assert summary["rows"] == 181


def test_dist_joint_with_negative_source(tmp_path, capsys):
    code, summary = _run([
        "dist-joint", "--finite-n", "--N", "2", "--times", "0,0.7", "--eps", "-1,0",
        "--s", "-1:1:1", "--out", str(tmp_path / "joint.csv"),
    ], capsys)
    assert code == 0
    assert summary["rows"] == 9


def test_bad_environment_exits_with_two(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("LAB_WORKERS", "0")
    code = main([
        "dist-eval", "--which", "GAUSS", "--Lambda", "1.5", "--s", "0,1",
        "--out", str(tmp_path / "g.csv"),
    ])
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "ConfigException"
    assert err["key"] == "LAB_WORKERS"


def test_environment_integers_are_checked(monkeypatch):
    monkeypatch.setenv("LAB_CHUNK_SIZE", "many")
    with pytest.raises(ConfigException):
        lab_environment()
    monkeypatch.setenv("LAB_CHUNK_SIZE", "64")
    monkeypatch.setenv("LAB_SEED", "9")
    env = lab_environment()
    assert env.chunk_size == 64
    assert env.seed == 9


@pytest.mark.parametrize("name", sorted(WORKERS))
def test_blocks_declare_their_outputs(name):
    block_def = WORKERS[name].block_def
    assert [o["name"] for o in block_def["output"]] == ["table", "summary", "reference"]
    assert summary_keys(block_def)


def test_declared_summary_keys_are_reported(tmp_path):
    config = ExperimentConfig(
        experiment="dist-eval",
        parameters={"which": "GAUSS", "s": [-1.0, 0.0, 1.0], "Lambda": 1.5, "N": 4},
        out=str(tmp_path / "g.csv"),
    )
    summary = run_experiment(config)
    assert set(summary_keys(WORKERS["dist-eval"].block_def)) <= set(summary)


def test_missing_summary_key_is_a_consistency_error(tmp_path, monkeypatch):
    worker = WORKERS["compare"]
    table = pd.DataFrame({"value": [0.0]})
    monkeypatch.setattr(
        worker, "handler", lambda task, context: {"table": table, "summary": {}, "reference": None}
    )
    config = ExperimentConfig(experiment="compare", out=str(tmp_path / "c.csv"))
    with pytest.raises(ConsistencyException):
        run_experiment(config)
