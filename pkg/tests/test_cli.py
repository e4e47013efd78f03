import json

import numpy as np
from click.testing import CliRunner

from gwqap.bench import instance_to_json
from gwqap.cli import main
from tests.test_cqap import make_instance


def test_gen_solve_oracle_round_trip(tmp_path):
    runner = CliRunner()
    inst_path = tmp_path / "inst.json"
    result = runner.invoke(
        main, ["gen", "--spec", "S1", "--seed", "11", "--out", str(inst_path)]
    )
    assert result.exit_code == 0, result.output
    doc = json.loads(inst_path.read_text())
    assert doc["schema"] == "cqap/1"
    assert len(doc["capacity"]) == 3

    report_path = tmp_path / "report.json"
    result = runner.invoke(
        main,
        [
            "solve", "--inst", str(inst_path), "--method", "gw-multi",
            "--trials", "5", "--seed", "11", "--out", str(report_path),
        ],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(report_path.read_text())
    assert report["reports"][0]["method"] == "GW_MultiInit"

    result = runner.invoke(main, ["oracle", "--inst", str(inst_path)])
    assert result.exit_code == 0, result.output
    assert "proven=True" in result.output


def test_gen_custom_requires_sizes(tmp_path):
    runner = CliRunner()
    result = runner.invoke(
        main, ["gen", "--spec", "custom", "--seed", "1", "--out", str(tmp_path / "x.json")]
    )
    assert result.exit_code == 2


def test_oracle_infeasible_exit_code(tmp_path):
    inst = make_instance([1], [3])
    path = tmp_path / "bad.json"
    path.write_text(instance_to_json(inst))
    runner = CliRunner()
    result = runner.invoke(main, ["oracle", "--inst", str(path)])
    assert result.exit_code == 4


def test_bench_csv(tmp_path):
    runner = CliRunner()
    out = tmp_path / "results.csv"
    result = runner.invoke(
        main,
        [
            "bench", "--specs", "S1", "--methods", "exact,gw", "--seed", "5",
            "--format", "csv", "--no-timing", "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    lines = out.read_text().strip().split("\n")
    assert lines[0].startswith("instance_id,method,")
    assert len(lines) == 3


def test_sweep_alpha(tmp_path):
    runner = CliRunner()
    inst_path = tmp_path / "inst.json"
    runner.invoke(main, ["gen", "--spec", "S1", "--seed", "3", "--out", str(inst_path)])
    out = tmp_path / "sweep.csv"
    result = runner.invoke(
        main,
        [
            "sweep", "--kind", "alpha", "--inst", str(inst_path),
            "--grid", "0.0,0.5", "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 3


def test_sweep_validation_exit_code(tmp_path):
    runner = CliRunner()
    inst_path = tmp_path / "inst.json"
    runner.invoke(main, ["gen", "--spec", "S1", "--seed", "3", "--out", str(inst_path)])
    result = runner.invoke(
        main,
        [
            "sweep", "--kind", "alpha", "--inst", str(inst_path),
            "--grid", "1.5", "--out", str(tmp_path / "s.csv"),
        ],
    )
    assert result.exit_code == 2
