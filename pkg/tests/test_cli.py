import csv
import json
from importlib import resources

import pytest

from uavaoi.cli import main
from uavaoi.scenario import make_scenario, to_json
from uavaoi.world import TaskSpec, WorldConfig


@pytest.fixture
def scenario_file(tmp_path):
    sc = make_scenario(world=WorldConfig(horizon_T=2500, num_tasks_N=2),
                       tasks=[TaskSpec(1, 15.0, 5.0), TaskSpec(2, -10.0, 12.0)])
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(to_json(sc)))
    return p


def test_solve_cycle_fields(scenario_file, capsys, tmp_path):
    assert main(["solve-cycle", "--scenario", str(scenario_file), "--task", "1", "--start", "0,0,35",
                 "--slot", "0", "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert list(out) == ["F", "Ts_f", "omega", "S", "Ts", "Tx_start", "lambda", "Tt", "success_prob", "g_avg",
                         "trajectory"]
    assert len(out["trajectory"]) == out["Ts"] + out["Tt"] + 1
    assert (tmp_path / "trajectory_task1.csv").exists()


def test_schedule_emits_json_and_trace(scenario_file, capsys, tmp_path):
    assert main(["schedule", "--scenario", str(scenario_file), "--policy", "random", "--seed", "3",
                 "--out", str(tmp_path)]) == 0
    sched = json.loads(capsys.readouterr().out)
    assert sched["policy"] == "random" and sched["actions"]
    with open(tmp_path / "trace_random.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["slot", "task_id", "aoi", "event"]
    assert {r[3] for r in rows[1:]} <= {"none", "sense_start", "sense_end", "tx_start", "update_done"}
    assert "update_done" in {r[3] for r in rows[1:]}


def test_simulate_and_channel_table(scenario_file, capsys):
    assert main(["simulate", "--scenario", str(scenario_file), "--policy", "greedy"]) == 0
    assert json.loads(capsys.readouterr().out)["policy"] == "greedy"
    assert main(["channel-table", "--scenario", str(scenario_file), "--step", "50", "--extent", "50"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "x,y,z,pl_db,pr_los,snr_db,rate_bps" and len(lines) > 1


def test_validation_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"kinematics": {"h_min_m": 200}}))
    assert main(["simulate", "--scenario", str(p)]) == 2
    p.write_text("")
    assert main(["simulate", "--scenario", str(p)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--scenario", str(p), "--policy", "best"])
    assert exc.value.code == 2


def test_infeasible_exit_code(scenario_file, tmp_path):
    raw = json.loads(scenario_file.read_text())
    raw["channel"]["snr_threshold"] = 1e15
    p = tmp_path / "inf.json"
    p.write_text(json.dumps(raw))
    assert main(["simulate", "--scenario", str(p)]) == 3


def test_experiment_needs_block(scenario_file):
    assert main(["experiment", "--scenario", str(scenario_file)]) == 2


def test_bundled_scenario_path_exists():
    assert resources.files("uavaoi").joinpath("scenarios/default.json").is_file()
