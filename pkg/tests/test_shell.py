import json
import re
from pathlib import Path

import numpy as np
import pytest

from faca.batch import RunConfig, aggregate, compare, parse_seeds, run_batch
from faca.cli import main
from faca.engine import ValidationError, run
from faca.logio import log_bytes, read_log, write_log
from faca.metrics import report
from faca.render import svg_text
from faca.scenarios import (ParseError, dump_scenario, load_scenario, make_circle_scenario,
                            scenario_from_dict, scenario_to_dict)


# scenario files

def test_scenario_file_errors(tmp_path):
    d = scenario_to_dict(make_circle_scenario(2))
    d["dt"] = 0
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    with pytest.raises(ValidationError) as e:
        load_scenario(p)
    assert e.value.field == "dt"
    p.write_text("{not json")
    with pytest.raises(ParseError):
        load_scenario(p)
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / "missing_file.json")
    d = scenario_to_dict(make_circle_scenario(2))
    d["fields"]["kappa_Q"] = 1.0
    with pytest.raises(ValidationError) as e:
        scenario_from_dict(d)
    assert e.value.field == "fields.kappa_Q"


def test_scenario_round_trip(tmp_path):
    sc = load_scenario("obstacle_n4.json", seed=9)
    dump_scenario(sc, tmp_path / "s.json")
    assert load_scenario(tmp_path / "s.json") == sc


# logs

def test_log_round_trip_is_byte_stable(tmp_path):
    log = run(load_scenario("circle_n4.json", seed=1))
    write_log(log, tmp_path / "a")
    write_log(read_log(tmp_path / "a"), tmp_path / "b")
    for name in ("log.json", "trajectory.csv", "transcripts.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    header = (tmp_path / "a" / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,id,x,y,vx,vy,heading,priority"
    assert json.loads((tmp_path / "a" / "log.json").read_text())["format_version"] == 1


def test_transcripts_are_one_message_per_line(tmp_path):
    from faca.chat import ReplayChatService
    from faca.negotiation import LlmNegotiator
    import mock_dialogue
    sc = load_scenario("head_on.json", seed=0)
    neg = LlmNegotiator(ReplayChatService(mock_dialogue.MESSAGES), latency=0.0)
    log = run(sc, negotiator=neg)
    write_log(log, tmp_path)
    lines = [json.loads(x) for x in (tmp_path / "transcripts.jsonl").read_text().splitlines()]
    assert any(x["type"] == "message" for x in lines)
    assert all(x["format_version"] == 1 for x in lines)
    again = read_log(tmp_path)
    assert [r.transcript for r in again.negotiations] == [r.transcript for r in log.negotiations]


# figures

def test_svg_structure():
    text = svg_text(run(load_scenario("circle_n4.json", seed=0)))
    assert text.count("<polyline") == 4
    assert text.count('class="start"') + text.count('class="goal"') == 8
    assert text.count("<circle") == 0
    assert svg_text(run(load_scenario("obstacle_n4.json", seed=0))).count("<circle") == 1
    assert svg_text(run(load_scenario("gap_n4.json", seed=0))).count('class="wall"') == 2


def test_svg_is_deterministic():
    log = run(load_scenario("circle_n4.json", seed=0))
    assert svg_text(log) == svg_text(log)


# batches

def test_parse_seeds():
    assert parse_seeds("3") == (0, 1, 2)
    assert parse_seeds("3-5") == (3, 4, 5)
    assert parse_seeds("1,4,9") == (1, 4, 9)
    with pytest.raises(ValueError):
        parse_seeds("0")
    with pytest.raises(ValueError):
        RunConfig("circle_n4.json", ())


def test_single_seed_aggregate_matches_report():
    agg, results = run_batch(RunConfig("circle_n4.json", (6,)))
    rep = report(run(load_scenario("circle_n4.json", seed=6)))
    assert agg["ttg_mean"] == {"mean": rep.ttg_mean, "std": 0.0, "n": 1}
    assert agg["mmd_robot"]["mean"] == rep.mmd_robot
    assert agg["fairness_rate"] == 1.0


def test_batch_writes_logs_and_is_repeatable(tmp_path):
    cfg = RunConfig("circle_n4.json", (0, 1, 2), out_dir=str(tmp_path / "a"))
    agg, _ = run_batch(cfg)
    assert sorted(p.name for p in (tmp_path / "a").iterdir()) == [
        "aggregate.json", "seed_0000", "seed_0001", "seed_0002"]
    agg2, _ = run_batch(RunConfig("circle_n4.json", (0, 1, 2), out_dir=str(tmp_path / "b"), jobs=2))
    assert agg == agg2
    assert (tmp_path / "a" / "aggregate.json").read_bytes().replace(b"/a", b"") == \
        (tmp_path / "b" / "aggregate.json").read_bytes().replace(b"/b", b"")


def test_batch_reports_errors():
    agg, results = run_batch(RunConfig("no_such_scenario.json", (0,)))
    assert agg["n_errors"] == 1 and "FileNotFoundError" in results[0]["error"]


def test_compare_table(tmp_path):
    cfg = RunConfig("gap_n4.json", (0, 1), out_dir=str(tmp_path))
    with pytest.raises(ValueError):
        compare(cfg, ["faca"])
    rows, errored = compare(cfg, ["faca", "classical_apf"])
    assert not errored and [r["planner"] for r in rows] == ["faca", "classical_apf"]
    assert rows[1]["ttg"] >= 3 * rows[0]["ttg"]
    assert (tmp_path / "comparison.tsv").read_text().splitlines()[0] == "planner\tnegotiator\tTTG\tMMD\tFR"
    # every cell comes back from the stored logs alone
    for r in rows:
        logs = [read_log(p) for p in sorted((tmp_path / r["planner"]).glob("seed_*"))]
        reps = [report(x) for x in logs]
        assert r["ttg"] == float(np.mean([x.ttg_mean for x in reps]))
        assert r["fr"] == float(np.mean([x.flow_rate for x in reps]))
    rows3, _ = compare(RunConfig("gap_n4.json", (0, 1)), ["faca", "classical_apf", "mpc"])
    assert rows3[:2] == rows and rows3[2]["planner"] == "mpc"


# command line

def test_cli_run_and_render(tmp_path, capsys):
    assert main(["run", "--scenario", "circle_n4.json", "--seeds", "3", "--out", str(tmp_path)]) == 0
    d = tmp_path / "seed_0003"
    assert (d / "trajectories.svg").exists()
    first = (d / "trajectories.svg").read_bytes()
    assert main(["render", str(d), "--out", str(tmp_path / "x.svg")]) == 0
    assert (tmp_path / "x.svg").read_bytes() == first
    out = capsys.readouterr().out
    assert '"ttg_mean"' in out


def test_cli_batch_and_exit_codes(tmp_path, capsys):
    assert main(["batch", "--scenario", "circle_n4.json", "--seeds", "2",
                 "--negotiator", "none", "--out", str(tmp_path)]) == 0
    agg = json.loads((tmp_path / "aggregate.json").read_text())
    assert agg["negotiator"] == "none" and agg["aggregate"]["n_runs"] == 2
    assert main(["batch", "--scenario", "nope.json", "--seeds", "1"]) == 1
    assert main(["compare", "--scenario", "gap_n4.json", "--seeds", "1", "--planner", "faca"]) == 2
    assert main(["batch", "--scenario", "head_on.json", "--negotiator", "llm", "--seeds", "1"]) == 1


def test_cli_compare(capsys):
    assert main(["compare", "--scenario", "head_on.json", "--seeds", "2",
                 "--planner", "faca", "--planner", "mpc"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("planner") and len(out) == 3
    assert re.match(r"faca\tscripted\t\d", out[1])
