import math

import pytest

from privmst.analysis import topology_bound
from privmst.cli import (EXIT_DATA, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, RunRecord, main,
                         replays_identically)
from privmst.datagen import PlantedInstance
from privmst.io import read_edge_list, read_partition, read_table


@pytest.fixture
def moons(tmp_path):
    prefix = str(tmp_path / "moons")
    assert main(["generate", "--shape", "moons", "--n", "40", "--seed", "3", "--out", prefix]) == EXIT_OK
    return prefix


def test_generate_writes_files(tmp_path, moons):
    for ext in (".edges", ".partition", ".coords"):
        assert (tmp_path / ("moons" + ext)).exists()
    g = read_edge_list(moons + ".edges")
    assert g.node_count == 40 and g.weights.mu == 0.1


def test_generate_is_reproducible(tmp_path, moons):
    again = str(tmp_path / "again")
    main(["generate", "--shape", "moons", "--n", "40", "--seed", "3", "--out", again])
    for ext in (".edges", ".partition", ".coords"):
        assert open(moons + ext).read() == open(again + ext).read()


def test_generate_planted(tmp_path):
    prefix = str(tmp_path / "pp")
    assert main(["generate", "--shape", "planted", "--n", "12", "--k", "3", "--out", prefix]) == EXIT_OK
    assert read_partition(prefix + ".partition").K == 3
    assert not (tmp_path / "pp.coords").exists()


def test_generate_usage_and_infeasible(tmp_path, capsys):
    assert main(["generate", "--shape", "moons", "--out", str(tmp_path / "x")]) == EXIT_USAGE
    assert main(["generate", "--shape", "moons", "--n", "30", "--wmin", "0.3", "--wmax", "0.6",
                 "--out", str(tmp_path / "x")]) == EXIT_INFEASIBLE
    assert main(["generate", "--shape", "planted", "--n", "4", "--k", "2",
                 "--out", str(tmp_path / "x")]) == EXIT_INFEASIBLE
    assert main([]) == EXIT_USAGE


def test_cluster_dbmstclu_recovers_moons(tmp_path, moons, capsys):
    out = str(tmp_path / "run")
    code = main(["cluster", "--edges", moons + ".edges", "--planted", moons + ".partition",
                 "--mode", "dbmstclu", "--out", out])
    assert code == EXIT_OK
    line = capsys.readouterr().out
    assert "K=2" in line and "ARI=1.000000" in line
    assert read_partition(out + ".partition").K == 2
    rec = RunRecord.read(out + ".record.json")
    assert rec.outputs["K"] == 2 and rec.config["mode"] == "dbmstclu"


def test_cluster_ptclust_and_replay(tmp_path, moons, capsys):
    out = str(tmp_path / "pt")
    code = main(["cluster", "--edges", moons + ".edges", "--mode", "ptclust", "--epsilon", "2",
                 "--mu", "0.1", "--seed", "5", "--out", out])
    assert code == EXIT_OK
    rec = RunRecord.read(out + ".record.json")
    assert rec.seed == 5 and rec.outputs["ari"] is None
    assert replays_identically(rec)
    capsys.readouterr()
    assert main(["replay", out + ".record.json"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "identical"


def test_cluster_errors(tmp_path, moons):
    out = str(tmp_path / "bad")
    assert main(["cluster", "--edges", moons + ".edges", "--mode", "ptclust", "--out", out]) == EXIT_USAGE
    bad = tmp_path / "bad.edges"
    bad.write_text("# nodes: 3\n0 1 0.5\n1 2 1.5\n")
    assert main(["cluster", "--edges", str(bad), "--mode", "dbmstclu", "--out", out]) == EXIT_DATA
    assert main(["cluster", "--edges", str(tmp_path / "missing.edges"), "--mode", "dbmstclu",
                 "--out", out]) == EXIT_DATA


def _sweep(moons, out, eps="0.5,2,1"):
    return main(["sweep", "--edges", moons + ".edges", "--planted", moons + ".partition",
                 "--epsilons", eps, "--seeds", "3", "--mu", "0.1", "--seed", "11", "--out", out])


def test_sweep_table(tmp_path, moons):
    out = str(tmp_path / "sweep.tsv")
    assert _sweep(moons, out) == EXIT_OK
    meta, columns, rows = read_table(out)
    assert columns[:3] == ["epsilon", "seed", "K"]
    assert len(rows) == 9
    assert [float(r[0]) for r in rows] == sorted(float(r[0]) for r in rows)
    assert meta["master_seed"] == "11" and meta["mu"] == "0.1"
    assert all(r[0] for r in rows)


def test_sweep_usage_errors(tmp_path, moons):
    out = str(tmp_path / "s.tsv")
    assert _sweep(moons, out, eps=",") == EXIT_USAGE
    assert main(["sweep", "--edges", moons + ".edges", "--epsilons", "1", "--out", out]) == EXIT_USAGE


def test_sweep_threads_do_not_change_rows(tmp_path, moons, monkeypatch):
    one, two = str(tmp_path / "one.tsv"), str(tmp_path / "two.tsv")
    monkeypatch.setenv("PRIVMST_THREADS", "1")
    _sweep(moons, one)
    monkeypatch.setenv("PRIVMST_THREADS", "2")
    _sweep(moons, two)
    assert read_table(one)[2] == read_table(two)[2]


def test_bounds_table(tmp_path, moons):
    out = str(tmp_path / "bounds.tsv")
    assert main(["bounds", "--edges", moons + ".edges", "--planted", moons + ".partition",
                 "--epsilons", "1,10", "--out", out]) == EXIT_OK
    _, columns, rows = read_table(out)
    assert {r[0] for r in rows} == {"theorem_text", "proof_form"}
    assert all(r[columns.index("vacuous")] in ("true", "false") for r in rows)
    g = read_edge_list(moons + ".edges")
    planted = read_partition(moons + ".partition")
    a = planted.assignment
    inter = tuple(float(g.w[e]) for e, (u, v) in enumerate(g.edges) if a[u] != a[v])
    inst = PlantedInstance(g, planted, inter)
    for r in rows:
        expect = topology_bound(inst, float(r[1]), variant=r[0]).bound_value
        assert math.isclose(float(r[columns.index("bound")]), expect, rel_tol=0, abs_tol=0)
    assert main(["bounds", "--edges", moons + ".edges", "--epsilons", "1", "--out", out]) == EXIT_USAGE
