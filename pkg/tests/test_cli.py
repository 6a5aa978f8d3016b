import csv
import io
import json

import pytest

from artifact import cli


def test_judge_rules():
    assert cli.judge("se:3", 10.2, 0.1, 10.0)
    assert not cli.judge("se:3", 10.4, 0.1, 10.0)
    assert not cli.judge("se:3", 10.2, 0.1, 10.0, tol_scale=0.01)
    assert cli.judge("se_slack:3,0.1", 0.52, 0.01, 0.45)
    assert not cli.judge("se_slack:3,0.1", 0.53, 0.01, 0.45)
    assert cli.judge("le_slack:0.1", 0.49, None, 0.45)
    assert not cli.judge("le_slack:0.1", 0.5, None, 0.45)
    assert cli.judge("positive", 0.1, None, 0.0)
    assert cli.judge("exact", 1.0, None, 1.0)
    assert cli.judge("abs:1e-12", 1e-13, None, 0.0)
    with pytest.raises(ValueError):
        cli.judge("nonsense", 1, 1, 1)


def test_count_roots_row(tmp_path):
    out = tmp_path / "roots.csv"
    cfg = cli.ExperimentConfig("count-roots", {"n": 1, "d": 100, "trials": 400}, 7, str(out))
    rows = cli.run(cfg)
    assert len(rows) == 1
    r = rows[0]
    assert r.theory == 10.0 and r.source == "kostlan" and r.source in cli.SOURCES
    assert r.passed is not None
    text = out.read_text()
    header = next(csv.reader(io.StringIO(text)))
    assert tuple(header) == cli.CSV_COLUMNS
    assert json.loads((tmp_path / "roots.json").read_text())[0]["theory"] == 10.0
    trials = (tmp_path / "roots.trials.csv").read_text().splitlines()
    assert len(trials) == 401 and trials[0].startswith("trial,")


def test_constants_rows():
    rows = cli.run(cli.ExperimentConfig("constants", {"n": 3, "k": 2, "samples": 20_000}, 1))
    names = {r.params["name"] for r in rows}
    assert {"vol_fs_rp_n", "v_rescaled", "mehta_closed", "identity_residual"} <= names
    assert all(r.passed is not False for r in rows)
    assert all(r.source in cli.SOURCES for r in rows)


def test_outputs_are_deterministic(tmp_path):
    texts = []
    for j in range(2):
        out = tmp_path / f"run{j}.csv"
        cli.run(cli.ExperimentConfig("crit-density", {"d": 4, "trials": 6}, 3, str(out)))
        texts.append((out.read_bytes(), (tmp_path / f"run{j}.trials.csv").read_bytes()))
    assert texts[0] == texts[1]


def test_json_output_has_wall_time(tmp_path):
    out = tmp_path / "c.json"
    cli.run(cli.ExperimentConfig("chern", {"n": 2, "k": 1, "d": 4}, 0, str(out), "json"))
    data = json.loads(out.read_text())
    assert data[0]["estimate"] == -4.0 and "wall_time" in data[0]


@pytest.mark.parametrize("params,field", [
    ({"n": 1, "d": 0}, "d"),
    ({"n": 1, "d": 5, "trials": -1}, "trials"),
    ({"n": 3, "k": 4, "d": 5}, "k"),
])
def test_usage_errors_name_the_field(params, field):
    with pytest.raises(cli.UsageError, match=f"^{field}:"):
        cli.run(cli.ExperimentConfig("count-roots", params, 1))


def test_missing_seed_is_a_usage_error():
    with pytest.raises(cli.UsageError, match="^seed:"):
        cli.ExperimentConfig("chern", {"n": 2, "k": 1}, None).validate()


def test_main_exit_codes(capsys, tmp_path):
    assert cli.main(["chern", "--n", "2", "--k", "1", "--d", "3", "--seed", "0"]) == 0
    assert cli.main(["count-roots", "--d", "4"]) == 2
    assert "seed" in capsys.readouterr().err
    assert cli.main(["nonexistent"]) == 2
    assert cli.main(["count-roots", "--n", "1", "--d", "25", "--trials", "-5", "--seed", "1"]) == 2


def test_main_failing_row_exits_one(capsys):
    # a wrong pair certificate request fails the 'true' rule
    code = cli.main(["certify-pair", "--builtin", "sphere", "--n", "2", "--k", "1",
                     "--delta", "1.5", "--eps", "1", "--seed", "0"])
    assert code == 1


def test_config_file_and_flag_override(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"seed": 4, "params": {"n": 1, "d": 9, "trials": 50}}))
    out = tmp_path / "o.csv"
    assert cli.main(["count-roots", "--config", str(conf), "--d", "16", "--out", str(out)]) in (0, 1)
    row = list(csv.DictReader(io.StringIO(out.read_text())))[0]
    assert json.loads(row["params"]) == {"d": 16, "n": 1, "trials": 50}
    assert float(row["theory"]) == 4.0


def test_discard_overflow_becomes_failed_row(monkeypatch):
    def boom(cfg):
        raise RuntimeError("9 of 10 trials degenerate")
    monkeypatch.setitem(cli.EXPERIMENTS, "stability", boom)
    rows = cli.run(cli.ExperimentConfig("stability", {}, 0))
    assert rows[0].passed is False and "degenerate" in rows[0].note


def test_every_source_tag_is_documented():
    rows = cli.acceptance_suite(0, only=["1"])["rows"]
    assert all(r.source in cli.SOURCES for r in rows)


def test_subseeds_are_stable_and_distinct():
    assert cli.subseed(0, 3, 1) == cli.subseed(0, 3, 1)
    assert len({cli.subseed(0, 3, d) for d in (25, 100, 400)}) == 3


def test_flat_config_keys_are_params(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"seed": 4, "n": 1, "d": 9, "trials": 20, "format": "csv"}))
    out = tmp_path / "o.csv"
    assert cli.main(["count-roots", "--config", str(conf), "--out", str(out)]) in (0, 1)
    row = list(csv.DictReader(io.StringIO(out.read_text())))[0]
    assert json.loads(row["params"]) == {"d": 9, "n": 1, "trials": 20}
