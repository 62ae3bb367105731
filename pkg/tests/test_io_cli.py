import io
import json

import numpy as np
import pytest

from catzero import cli
from catzero.io import (
    ParseError,
    build_manifest,
    dump_measure,
    load_measure,
    load_mm_space,
    loads_measure,
    measure_to_dict,
)
from catzero.montecarlo import TailReport
from catzero.spaces import Hyperboloid, TreePoint

TRIPOD = {
    "schema_version": 1,
    "space": {"kind": "tree", "vertices": ["o", "a", "b", "c"], "edges": [["o", "a", 1], ["o", "b", 1], ["o", "c", 1]]},
    "atoms": [{"point": {"edge": ["o", x], "offset": 1}, "weight": 1 / 3} for x in "abc"],
}


@pytest.fixture
def tripod_file(tmp_path):
    path = tmp_path / "tripod.json"
    path.write_text(json.dumps(TRIPOD, indent=2))
    return path


def run(argv):
    out = io.StringIO()
    code = cli.main(argv, out=out)
    return code, out.getvalue()


# -- measure files ------------------------------------------------------------------


def test_tree_measure_parses(tripod_file):
    nu = load_measure(tripod_file)
    assert nu.space.vertices == ("o", "a", "b", "c")
    assert nu.points == (TreePoint(0, 1.0), TreePoint(1, 1.0), TreePoint(2, 1.0))


def test_reversed_edge_offset():
    doc = json.loads(json.dumps(TRIPOD))
    doc["atoms"] = [{"point": {"edge": ["a", "o"], "offset": 0.25}, "weight": 1}]
    assert loads_measure(json.dumps(doc)).points == (TreePoint(0, 0.75),)


def test_hyperboloid_spatial_and_ambient_coordinates():
    doc = {
        "schema_version": 1,
        "space": {"kind": "hyperboloid", "dim": 2},
        "atoms": [{"point": [0.5, 0.0], "weight": 0.5}, {"point": [1.0, 0.0, 0.0], "weight": 0.5}],
    }
    nu = loads_measure(json.dumps(doc))
    H = Hyperboloid(2)
    assert H.distance(nu.points[0], H.lift([0.5, 0.0])) == 0.0
    assert nu.points[1][0] == 1.0


def test_measure_round_trip(tmp_path, tripod_file):
    nu = load_measure(tripod_file)
    dump_measure(nu, tmp_path / "copy.json")
    assert load_measure(tmp_path / "copy.json") == nu
    assert measure_to_dict(nu)["schema_version"] == 1


@pytest.mark.parametrize(
    "mutate, where",
    [
        (lambda d: d.pop("schema_version"), "schema_version"),
        (lambda d: d.update(schema_version=2), "schema_version"),
        (lambda d: d["space"].update(kind="sphere"), "space.kind"),
        (lambda d: d["space"]["edges"].append(["a", "b"]), "space.edges[3]"),
        (lambda d: d["space"]["edges"][0].__setitem__(2, -1), "space"),
        (lambda d: d["atoms"][1].pop("weight"), "atoms[1]"),
        (lambda d: d["atoms"][2]["point"].update(edge=["a", "b"]), "atoms[2].point"),
        (lambda d: d["atoms"][0]["point"].update(offset=3.0), "atoms[0].point"),
        (lambda d: d["atoms"][0].update(weight=0.9), "atoms"),
        (lambda d: d.update(atoms=[]), "atoms"),
    ],
)
def test_malformed_measures_name_the_field(mutate, where):
    doc = json.loads(json.dumps(TRIPOD))
    mutate(doc)
    with pytest.raises(ParseError) as info:
        loads_measure(json.dumps(doc))
    assert where in str(info.value)


def test_truncated_json_reports_position():
    with pytest.raises(ParseError) as info:
        loads_measure('{"schema_version": 1,\n "space": ')
    assert "line 2" in str(info.value)


def test_mm_space_file(tmp_path):
    path = tmp_path / "mm.json"
    path.write_text(json.dumps({"schema_version": 1, "dist": [[0, 1], [1, 0]], "weights": [0.5, 0.5]}))
    X = load_mm_space(path)
    assert X.n == 2 and X.diameter() == 1.0
    path.write_text(json.dumps({"schema_version": 1, "dist": [[0, 1], [2, 0]], "weights": [0.5, 0.5]}))
    with pytest.raises(ParseError):
        load_mm_space(path)


def test_manifest_deterministic_except_timestamp(tripod_file):
    a = build_manifest("simulate", {"n": 3}, 5, [tripod_file])
    b = build_manifest("simulate", {"n": 3}, 5, [tripod_file], timestamp="x")
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b
    assert len(a["inputs"][str(tripod_file)]) == 64


# -- grid syntax -----------------------------------------------------------------------


def test_parse_grid():
    assert cli.parse_grid("0:0.1:1.0") == [round(i / 10, 12) for i in range(11)]
    assert cli.parse_grid("0:0.1:0.96") == [round(i / 10, 12) for i in range(11)]
    assert cli.parse_grid("0:0.1:0.94") == [round(i / 10, 12) for i in range(10)]
    assert cli.parse_grid("0.5") == [0.5]
    for bad in ("a:b:c", "0:0:1", "1:0.1:0", "0:1"):
        with pytest.raises(Exception):
            cli.parse_grid(bad)


# -- bound ------------------------------------------------------------------------------


def test_bound_rtree():
    code, out = run(["bound", "--space", "rtree", "--n", "150", "--r", "1", "--diam", "1"])
    assert code == 0 and "1.55213" in out


def test_bound_hadamard_json():
    code, out = run(["bound", "--space", "hadamard", "--m", "1", "--n", "1", "--r", "0", "--diam", "1", "--json"])
    assert code == 0
    assert json.loads(out)["rows"][0]["bound"] == pytest.approx(7.4705, abs=1e-4)


def test_bound_ledoux_grid():
    code, out = run(["bound", "--space", "ledoux", "--n", "100", "--r-grid", "0:5:10", "--diam", "1", "--json"])
    rows = json.loads(out)["rows"]
    assert code == 0 and [r["r"] for r in rows] == [0, 5, 10]
    assert rows[2]["bound"] == pytest.approx(1.2131, abs=1e-4)


@pytest.mark.parametrize(
    "argv",
    [
        ["bound", "--space", "rtree", "--n", "150", "--r", "1"],
        ["bound", "--space", "rtree", "--n", "150", "--r", "1", "--diam", "1", "--m", "2"],
        ["bound", "--space", "hadamard", "--n", "150", "--r", "1", "--diam", "1"],
        ["bound", "--space", "rtree", "--n", "0", "--r", "1", "--diam", "1"],
        ["bound", "--space", "rtree", "--n", "5", "--r", "-1", "--diam", "1"],
        ["bound", "--space", "rtree", "--n", "5", "--r", "1", "--diam", "0"],
        ["verify", "--suite", "bogus"],
        [],
    ],
)
def test_usage_errors_exit_2(argv):
    assert run(argv)[0] == 2


# -- simulate ---------------------------------------------------------------------------


def test_simulate_writes_reports(tmp_path, tripod_file):
    out_dir = tmp_path / "out"
    argv = ["simulate", "--measure", str(tripod_file), "--n", "20", "--trials", "500",
            "--r-grid", "0:0.25:1", "--seed", "42", "--out", str(out_dir), "--workers", "1"]
    code, out = run(argv)
    assert code == 0
    csv_text = (out_dir / "tail_report.csv").read_text()
    assert out == csv_text and len(csv_text.splitlines()) == 6
    rep = TailReport.from_json((out_dir / "tail_report.json").read_text())
    assert rep.to_csv() == csv_text
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["seed"] == 42 and manifest["config"]["trials"] == 500
    assert manifest["config"]["space"]["kind"] == "tree"


def test_simulate_point_mass(tmp_path):
    doc = {"schema_version": 1, "space": {"kind": "euclidean", "dim": 2},
           "atoms": [{"point": [1.0, 2.0], "weight": 1.0}]}
    path = tmp_path / "pm.json"
    path.write_text(json.dumps(doc))
    code, out = run(["simulate", "--measure", str(path), "--n", "5", "--trials", "100",
                     "--r-grid", "0.1:0.1:0.5", "--out", str(tmp_path / "o"), "--workers", "1"])
    assert code == 0
    assert all(line.split(",")[2] == "0" for line in out.splitlines()[1:])


def test_simulate_bad_inputs_exit_2(tmp_path, tripod_file):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": 1, "space"')
    common = ["--n", "5", "--trials", "10", "--out", str(tmp_path / "o")]
    assert run(["simulate", "--measure", str(bad)] + common)[0] == 2
    assert run(["simulate", "--measure", str(tmp_path / "missing.json")] + common)[0] == 2
    assert run(["simulate", "--measure", str(tripod_file), "--n", "0", "--trials", "10"])[0] == 2


def test_simulate_violation_exit_1(tmp_path, tripod_file, monkeypatch, capsys):
    from catzero import montecarlo

    monkeypatch.setattr(montecarlo, "theory_bound", lambda *a: 0.0)
    code, _ = run(["simulate", "--measure", str(tripod_file), "--n", "5", "--trials", "50",
                   "--r-grid", "0:0.5:1", "--out", str(tmp_path / "o"), "--workers", "1"])
    assert code == 1
    assert "r = 0, 0.5" in capsys.readouterr().err


def test_seed_from_environment(tmp_path, tripod_file, monkeypatch):
    base = ["simulate", "--measure", str(tripod_file), "--n", "5", "--trials", "300", "--r-grid", "0.1",
            "--workers", "1"]
    monkeypatch.setenv("CATZERO_SEED", "77")
    run(base + ["--out", str(tmp_path / "a")])
    monkeypatch.delenv("CATZERO_SEED")
    run(base + ["--out", str(tmp_path / "b"), "--seed", "77"])
    assert (tmp_path / "a" / "tail_report.csv").read_text() == (tmp_path / "b" / "tail_report.csv").read_text()
    monkeypatch.setenv("CATZERO_SEED", "x")
    assert run(base + ["--out", str(tmp_path / "c")])[0] == 2


# -- verify -------------------------------------------------------------------------------


def test_verify_single_suite(monkeypatch):
    from catzero import verify

    monkeypatch.setitem(verify.RUNNERS, "cat0", lambda seed, **kw: verify.suite_cat0(seed, count=200))
    code, out = run(["verify", "--suite", "cat0", "--seed", "7"])
    assert code == 0
    assert out.splitlines()[0] == "cat0: 600/600 pass"


def test_verify_failure_exit_1(monkeypatch):
    from catzero import verify

    def broken(seed, **kw):
        res = verify.SuiteResult("cat0")
        res.record("tree", False, "forced")
        return res

    monkeypatch.setitem(verify.RUNNERS, "cat0", broken)
    assert run(["verify", "--suite", "cat0"])[0] == 1
