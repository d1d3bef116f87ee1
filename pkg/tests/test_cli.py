import json

import numpy as np
import pytest

from quartile_shift import cli
from quartile_shift.datasets import RADIATION_CONTROL, RADIATION_EXPOSED, radiation
from quartile_shift.report import analyze, dumps, fivenum, loads, read_table


def run(argv, capsys):
    rc = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return rc, out.out, out.err


@pytest.fixture
def data_files(tmp_path):
    x = tmp_path / "x.txt"
    y = tmp_path / "y.txt"
    x.write_text("\n".join(map(str, RADIATION_CONTROL)) + "\n")
    y.write_text("# exposed\n" + "\n".join(map(str, RADIATION_EXPOSED)) + "\n\n")
    return x, y


def test_analyze_text(capsys):
    rc, out, _ = run(["analyze", "--example", "radiation"], capsys)
    assert rc == 0
    assert "[hl] estimate 8.7" in out
    assert "[gmm] estimate 2.5" in out
    assert "95.0% (attained 95.64%): [0.1, 19.5]" in out
    assert "95.0%: [-2.7, 8.1] U [8.7, 19.5]" in out
    assert "at least 6 comparisons" in out
    assert "p = 0.0436" in out


def test_analyze_json_round_trip(tmp_path, capsys, data_files):
    x, y = data_files
    out = tmp_path / "report.json"
    rc, _, _ = run(["analyze", "--x", x, "--y", y, "--format", "json", "--out", out], capsys)
    assert rc == 0
    doc = loads(out.read_text())
    assert doc == loads(dumps(analyze(radiation())))
    hl = doc["methods"]["hl"]
    assert hl["estimate"] == 8.7
    s95 = hl["confidence_sets"][2]
    assert s95["intervals"] == [[0.1, 19.5]] and abs(s95["attained_level"] - 0.956) < 1e-3
    gmm = doc["methods"]["gmm"]
    assert gmm["estimate"] == 2.5 and gmm["confidence_sets"][2]["enclosing_interval"] == [-2.7, 19.5]
    assert doc["attributable"]["lower_bound"] == 6
    md = doc["metadata"]
    assert md["rank_mode"] == "exact" and len(md["input_sha256"]) == 64 and md["tie_rule"]


def test_infinite_endpoints_serialize(tmp_path, capsys):
    x = tmp_path / "x"
    y = tmp_path / "y"
    x.write_text("1\n2\n")
    y.write_text("3\n4\n")
    rc, out, _ = run(["analyze", "--x", x, "--y", y, "--format", "json", "--alpha", "0.01"], capsys)
    assert rc == 0
    assert '"-inf"' in out
    doc = loads(out)
    assert doc["methods"]["hl"]["confidence_sets"][0]["intervals"] == [[-np.inf, np.inf]]


def test_figure_files(tmp_path, capsys):
    pc, gc, bx = tmp_path / "p.tsv", tmp_path / "g.tsv", tmp_path / "b.tsv"
    rc, _, _ = run(["analyze", "--example", "radiation", "--pcurve", pc, "--gmm-curve", gc,
                    "--boxplot-data", bx, "--out", tmp_path / "r.txt"], capsys)
    assert rc == 0
    header, rows = read_table(pc)
    assert header == ["lower", "upper", "p_d2", "p_g2"]
    lo, hi, pd, pg = (np.array(c, dtype=float) for c in zip(*rows))
    assert lo[0] == -np.inf and hi[-1] == np.inf
    for alpha in (0.05, 0.10, 1 / 3):
        assert np.all(np.diff(np.flatnonzero(pd > alpha)) == 1)
    # the fit test accepts a disconnected set of shifts at some level
    assert any(np.any(np.diff(np.flatnonzero(pg > a)) > 1) for a in (0.05, 0.10, 1 / 3))
    header, rows = read_table(gc)
    assert min(r[2] for r in rows) == 0.0
    header, rows = read_table(bx)
    box = {r[0]: r[1:] for r in rows}
    assert box["x"] == list(fivenum(RADIATION_CONTROL))
    # GMM fails to align the boxes: each quartile of y - gmm is above that of x
    assert all(g > xq for g, xq in zip(box["y-gmm"][1:4], box["x"][1:4]))


def test_grouped_file(tmp_path, capsys):
    f = tmp_path / "d.csv"
    f.write_text("group,value\n" + "".join(f"control,{v}\n" for v in RADIATION_CONTROL)
                 + "".join(f"treated,{v}\n" for v in RADIATION_EXPOSED))
    rc, out, _ = run(["analyze", "--data", f], capsys)
    assert rc == 0 and "[hl] estimate 8.7" in out


def test_input_errors(tmp_path, capsys, data_files):
    x, _ = data_files
    empty = tmp_path / "empty.txt"
    empty.write_text("\n# nothing\n")
    rc, _, err = run(["analyze", "--x", x, "--y", empty], capsys)
    assert rc == 1 and "empty.txt" in err
    bad = tmp_path / "bad.txt"
    bad.write_text("1.0\n2.0\nabc\n")
    rc, _, err = run(["analyze", "--x", x, "--y", bad], capsys)
    assert rc == 1 and "bad.txt:3" in err
    rc, _, err = run(["analyze", "--x", x, "--y", tmp_path / "missing.txt"], capsys)
    assert rc == 1 and "missing.txt" in err
    rc, _, err = run(["analyze", "--example", "radiation", "--weights", "0,2,1,3"], capsys)
    assert rc == 1
    rc, _, err = run(["analyze"], capsys)
    assert rc == 1


def test_budget_refusal(capsys):
    rc, _, err = run(["dist", "--n", "300", "--m", "300", "--statistic", "g2"], capsys)
    assert rc == 2 and "asymptotic" in err


def test_invariant_exit_code(monkeypatch, capsys):
    def broken(*a, **k):
        doc = analyze(radiation())
        doc["methods"]["hl"]["confidence_sets"][0]["intervals"] = [[0.0, 2.0], [1.0, 3.0]]
        return doc

    monkeypatch.setattr(cli, "analyze", broken)
    rc, _, err = run(["analyze", "--example", "radiation"], capsys)
    assert rc == 3


def test_dist(capsys, tmp_path):
    rc, out, _ = run(["dist", "--n", 16, "--m", 7, "--statistic", "mw", "--tail", 82], capsys)
    assert rc == 0 and "= 0.0443" in out
    rc, out, _ = run(["dist", "--example", "radiation", "--statistic", "g2", "--at-delta", 8.69], capsys)
    assert rc == 0 and "exact p = 0.0212" in out
    rc, out, _ = run(["dist", "--n", 1, "--m", 3], capsys)
    lines = out.strip().splitlines()
    assert lines[0].split("\t") == ["a1", "a2", "a3", "a4", "prob"]
    assert [float(l.split("\t")[-1]) for l in lines[1:]] == [0.25] * 4
    f = tmp_path / "t.tsv"
    rc, _, _ = run(["dist", "--n", 16, "--m", 7, "--statistic", "d2", "--out", f], capsys)
    header, rows = read_table(f)
    assert abs(sum(r[1] for r in rows) - 1) < 1e-12


def test_weights(capsys):
    rc, out, _ = run(["weights", "--dist", "cauchy"], capsys)
    doc = json.loads(out)
    assert doc["models"]["cauchy"]["optimal_w"] == [0.0, 0.0, 1.0, 1.0]
    rc, out, _ = run(["weights", "--dist", "normal,cauchy"], capsys)
    eff = json.loads(out)["efficiency_vs_optimal"]
    assert eff["hl"]["normal"] >= 0.99
    assert eff["mert"]["min"] > eff["hl"]["min"] > eff["mood"]["min"]
    rc, _, _ = run(["weights", "--dist", "laplace"], capsys)
    assert rc == 1


def test_simulate_threads_bit_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    common = ["simulate", "--dist", "cauchy", "--n", 12, "--m", 12, "--reps", 30, "--seed", 1]
    assert run(common + ["--threads", 1, "--out", a], capsys)[0] == 0
    assert run(common + ["--threads", 3, "--out", b], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    doc = loads(a.read_text())
    assert doc["replications"] == 30 and "gmm:mood" in doc["ratios"]
    rc, _, _ = run(["simulate", "--reps", 0], capsys)
    assert rc == 1
