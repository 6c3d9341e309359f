import csv
import json
import math
import os

import pytest

from swarm_sync.canned import canned_scenario
from swarm_sync.cli import main


def read(path):
    with open(path) as fh:
        return fh.read()


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_run_writes_outputs(tmp_path, capsys):
    assert main(["run", "--scenario", "approach2", "--seed", "3", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "timeToSyncMs=" in out and "timeToSyncMs=none" not in out
    for name in ("scenario.json", "events.ndjson", "report.json", "snapshots.csv",
                 "dispersion.csv", "swarm_count.csv"):
        assert (tmp_path / name).exists(), name
    report = json.loads(read(tmp_path / "report.json"))
    assert report["complete"] is True and math.isfinite(report["timeToSyncMs"])
    first_event = json.loads(read(tmp_path / "events.ndjson").splitlines()[0])
    assert {"t", "kind", "nodeId", "phase", "address"} <= set(first_event)
    assert read(tmp_path / "snapshots.csv").splitlines()[0] == \
        "t_ms,node_id,in_sync,phase,node_number,faulty,x,y"


def test_run_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run", "--scenario", "passing", "--seed", "5", "--out", str(d)]) == 0
    for name in os.listdir(a):
        assert read(a / name) == read(b / name), name


def test_run_json_only(tmp_path):
    assert main(["run", "--scenario", "chain3", "--format", "json", "--out", str(tmp_path)]) == 0
    assert not (tmp_path / "snapshots.csv").exists()


def test_run_from_file(tmp_path):
    path = tmp_path / "sc.json"
    path.write_text(canned_scenario("departure").to_json())
    assert main(["run", "--scenario", str(path), "--out", str(tmp_path / "o")]) == 0


def test_out_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SWARM_SYNC_OUT", str(tmp_path / "env"))
    assert main(["run", "--scenario", "chain3", "--format", "json"]) == 0
    assert (tmp_path / "env" / "report.json").exists()


def test_set_loss_one_rejected(tmp_path, capsys):
    code = main(["run", "--scenario", "approach2", "--set", "radio.lossProbability=1.0",
                 "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err
    assert "lossProbability" in err and "code=1" in err
    assert not list(tmp_path.iterdir())


def test_file_loss_one_rejected(tmp_path, capsys):
    data = canned_scenario("approach2").to_dict()
    data["radio"]["lossProbability"] = 1.0
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    assert main(["run", "--scenario", str(path), "--out", str(tmp_path / "o")]) == 1
    assert "field=radio.lossProbability" in capsys.readouterr().err


def test_set_unknown_param(tmp_path, capsys):
    assert main(["run", "--scenario", "chain3", "--set", "bogus=1", "--out", str(tmp_path)]) == 1
    assert "field=bogus" in capsys.readouterr().err


def test_bad_format(tmp_path):
    assert main(["run", "--scenario", "chain3", "--format", "xml", "--out", str(tmp_path)]) == 1


def test_unreadable_scenario(tmp_path, capsys):
    assert main(["run", "--scenario", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path)]) == 2
    assert "code=2" in capsys.readouterr().err


class TestValidate:
    def test_ok(self, tmp_path, capsys):
        path = tmp_path / "s.json"
        path.write_text(canned_scenario("merge2x3").to_json())
        assert main(["validate", str(path)]) == 0
        assert "ok" in capsys.readouterr().out

    def test_latency_not_below_allowed(self, tmp_path, capsys):
        data = canned_scenario("merge2x3").to_dict()
        data["config"]["expectedLatency"] = data["config"]["allowedPhaseShift"]
        path = tmp_path / "s.json"
        path.write_text(json.dumps(data))
        assert main(["validate", str(path)]) == 1
        assert "field=config.expectedLatency" in capsys.readouterr().err

    def test_malformed_json_location(self, tmp_path, capsys):
        path = tmp_path / "s.json"
        path.write_text('{\n  "seed": 1,\n  oops\n}')
        assert main(["validate", str(path)]) == 2
        assert f"{path}:3:3" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["validate", str(tmp_path / "none.json")]) == 2


def _aggregate(path):
    return {r[next(iter(r))]: r for r in rows(path)}


def test_sweep_address_count(tmp_path, capsys):
    """Conflicting idle pair: redraw rounds are geometric with success (N-1)/N.

    Expected time is R*N/(N-1) plus at most one beacon interval and one latency
    to exchange phases after the conflict clears.
    """
    seeds = 60
    assert main(["sweep", "--scenario", "conflict2", "--param", "N", "--values", "2,4,8",
                 "--seeds", str(seeds), "--out", str(tmp_path)]) == 0
    agg = _aggregate(tmp_path / "sweep_aggregate.csv")
    runs = rows(tmp_path / "sweep_runs.csv")
    assert len(runs) == 3 * seeds
    means = []
    for n in (2, 4, 8):
        r = agg[str(n)]
        assert int(r["runs"]) == seeds and int(r["synced"]) >= seeds - 1
        q = 1 / n
        expected = 1000 * n / (n - 1)
        se = 1000 * math.sqrt(q) / (1 - q) / math.sqrt(seeds)
        mean = float(r["mean_time_to_sync_ms"])
        assert expected - 3 * se <= mean <= expected + 265 + 3 * se, (n, mean)
        means.append(mean)
    assert means[0] > means[1] > means[2]


def test_sweep_variant(tmp_path, capsys):
    assert main(["sweep", "--scenario", "approach2", "--param", "protocolVariant",
                 "--values", "main,fireAtZero", "--seeds", "20", "--out", str(tmp_path)]) == 0
    agg = _aggregate(tmp_path / "sweep_aggregate.csv")
    assert float(agg["fireAtZero"]["mean_time_to_sync_ms"]) > \
        float(agg["main"]["mean_time_to_sync_ms"])


def test_sweep_workers_match_serial(tmp_path):
    args = ["sweep", "--scenario", "chain3", "--param", "radio.latencyMean",
            "--values", "5,15", "--seeds", "4"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--workers", "2", "--out", str(tmp_path / "b")]) == 0
    assert read(tmp_path / "a" / "sweep_runs.csv") == read(tmp_path / "b" / "sweep_runs.csv")


def test_sweep_empty_values(tmp_path, capsys):
    assert main(["sweep", "--scenario", "conflict2", "--param", "N", "--values", "",
                 "--out", str(tmp_path)]) == 1
    assert "field=values" in capsys.readouterr().err


def test_sweep_invalid_value(tmp_path, capsys):
    assert main(["sweep", "--scenario", "conflict2", "--param", "N", "--values", "1",
                 "--out", str(tmp_path)]) == 1
    assert "addressCount" in capsys.readouterr().err


def test_help(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "sweep" in capsys.readouterr().out
