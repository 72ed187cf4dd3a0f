import io
import json
import subprocess
import sys

import numpy as np
import pytest

from reps.cli import EXIT_DATA, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, build_parser, main

from conftest import DATA, WORKED_D

IRIS = str(DATA / "iris.csv")
ECG_TRAIN = str(DATA / "ECG200_TRAIN.tsv")
ECG_TEST = str(DATA / "ECG200_TEST.tsv")


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def worked_file(tmp_path):
    path = tmp_path / "worked.csv"
    lines = [",".join([lab] + [repr(float(v)) for v in row]) for lab, row in zip("AABB", WORKED_D)]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


class TestSelect:
    def test_iris(self, tmp_path):
        out = tmp_path / "sol.json"
        code, stdout, _ = run(
            "select", "--input", IRIS, "--kind", "vectors", "--label-col", "4",
            "--beta", "2", "--C", "0.001", "--k", "22", "--seed", "1", "--out", str(out),
        )
        assert code == EXIT_OK
        sol = json.loads(out.read_text())
        assert len(sol["selected"]) == 22
        assert len(sol["w"]) == len(sol["alpha"]) == len(sol["scores"]) == 150
        assert all(w >= 0 for w in sol["w"])
        assert sol["config"]["beta"] == 2.0
        assert "22" in stdout

    def test_byte_identical(self, tmp_path):
        paths = []
        for name in ("a.json", "b.json"):
            p = tmp_path / name
            assert run("select", "--input", IRIS, "--fraction", "0.2", "--out", str(p))[0] == EXIT_OK
            paths.append(p)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_dump_ranks_and_indices(self, tmp_path, worked_file):
        ranks, idx = tmp_path / "r.csv", tmp_path / "i.txt"
        code, _, _ = run(
            "select", "--input", worked_file, "--kind", "distmatrix", "--k", "2",
            "--C", "1e6", "--out", str(tmp_path / "s.json"),
            "--dump-ranks", str(ranks), "--indices-out", str(idx),
        )
        assert code == EXIT_OK
        assert ranks.read_text().splitlines()[2] == "3,2,0,1"
        assert len(idx.read_text().split()) == 2

    def test_k_too_large(self, tmp_path, worked_file):
        code, _, err = run("select", "--input", worked_file, "--kind", "distmatrix", "--k", "5", "--out", str(tmp_path / "s.json"))
        assert code == EXIT_USAGE
        assert len(err.strip().splitlines()) == 1

    def test_strict_not_converged(self, tmp_path):
        code, _, err = run(
            "select", "--input", IRIS, "--k", "10", "--C", "1000", "--max-iterations", "1",
            "--strict", "--out", str(tmp_path / "s.json"),
        )
        assert code == EXIT_NOT_CONVERGED
        assert "NotConverged" in err

    def test_not_strict_still_writes(self, tmp_path):
        out = tmp_path / "s.json"
        code, _, _ = run("select", "--input", IRIS, "--k", "10", "--C", "1000", "--max-iterations", "1", "--out", str(out))
        assert code == EXIT_OK
        assert json.loads(out.read_text())["converged"] is False


class TestUsage:
    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["bogus"],
            ["select", "--input", IRIS, "--out", "x.json"],  # no size
            ["select", "--input", IRIS, "--k", "3", "--fraction", "0.1", "--out", "x.json"],
            ["select", "--input", IRIS, "--k", "3", "--out", "x.json", "--frobnicate"],
            ["select", "--input", IRIS, "--k", "3", "--out", "x.json", "--beta", "1"],
            ["select", "--input", IRIS, "--kind", "distmatrix", "--metric", "dtw", "--k", "3", "--out", "x.json"],
            ["select", "--input", IRIS, "--kind", "distmatrix", "--window", "3", "--k", "3", "--out", "x.json"],
            ["select", "--input", IRIS, "--metric", "dtw", "--k", "3", "--out", "x.json"],
            ["select", "--input", IRIS, "--fraction", "1.5", "--out", "x.json"],
            ["eval", "--input", IRIS, "--folds", "1"],
        ],
    )
    def test_usage_errors(self, argv, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, _, err = run(*argv)
        assert code == EXIT_USAGE
        assert len(err.strip().splitlines()) == 1
        assert not (tmp_path / "x.json").exists()

    def test_help_lists_every_flag(self):
        parser = build_parser()
        sub = parser._subparsers._group_actions[0].choices
        assert set(sub) == {"select", "eval", "cv", "sweep-beta", "pareto", "graph"}
        for name, p in sub.items():
            text = p.format_help()
            for action in p._actions:
                for opt in action.option_strings:
                    assert opt in text, (name, opt)

    def test_help_exits_zero(self):
        code, _, _ = run("--help")
        assert code == EXIT_OK

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "reps", "select", "--help"], capture_output=True, text=True)
        assert res.returncode == 0
        assert "--dump-ranks" in res.stdout


class TestDataErrors:
    def test_missing_file(self, tmp_path):
        code, _, err = run("select", "--input", str(tmp_path / "nope.csv"), "--k", "2", "--out", str(tmp_path / "s.json"))
        assert code == EXIT_DATA
        assert err.startswith("error: IoError")

    def test_parse_error(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("1,2,a\n1,x,b\n")
        code, _, err = run("select", "--input", str(p), "--k", "1", "--out", str(tmp_path / "s.json"))
        assert code == EXIT_DATA
        assert "ParseError" in err and "row 2" in err
        assert len(err.strip().splitlines()) == 1

    def test_asymmetric_matrix(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("a,0,1\nb,2,0\n")
        code, _, err = run("graph", "--input", str(p), "--kind", "distmatrix", "--out", str(tmp_path / "g.dot"))
        assert code == EXIT_DATA
        assert "AsymmetryError" in err


class TestEval:
    def test_ucr_split(self, tmp_path):
        report = tmp_path / "r.csv"
        code, stdout, _ = run(
            "eval", "--input", ECG_TRAIN, "--test", ECG_TEST, "--kind", "ucr", "--metric", "dtw",
            "--window", "5", "--beta", "2", "--C", "0.001", "--fraction", "0.88",
            "--report-csv", str(report),
        )
        assert code == EXIT_OK
        lines = report.read_text().splitlines()
        assert lines[0].split(",")[:4] == ["method", "dataset", "err", "slr"]
        rows = [l.split(",") for l in lines[1:]]
        assert [r[0] for r in rows] == ["NoPS", "REPS"]
        assert float(rows[0][2]) == pytest.approx(0.11)
        assert float(rows[1][3]) == 0.88
        assert "NoPS" in stdout and "REPS" in stdout

    def test_vectors_cv(self, tmp_path):
        report = tmp_path / "r.json"
        code, _, _ = run("eval", "--input", IRIS, "--fraction", "0.5", "--report-json", str(report))
        assert code == EXIT_OK
        data = json.loads(report.read_text())
        assert [d["method"] for d in data] == ["NoPS", "REPS"]
        assert data[1]["slr"] == 0.5

    def test_inner_cv_sizing(self, tmp_path):
        report = tmp_path / "r.json"
        code, _, _ = run(
            "eval", "--input", ECG_TRAIN, "--test", ECG_TEST, "--kind", "ucr",
            "--fractions", "0.5,1.0", "--report-json", str(report),
        )
        assert code == EXIT_OK
        assert json.loads(report.read_text())[1]["slr"] in (0.5, 1.0)


class TestOtherCommands:
    def test_cv(self, tmp_path, worked_file):
        out = tmp_path / "cv.json"
        code, _, _ = run("cv", "--input", worked_file, "--kind", "distmatrix", "--fractions", "0.5,1.0", "--folds", "2", "--out", str(out))
        assert code == EXIT_OK
        data = json.loads(out.read_text())
        assert data["fraction"] in (0.5, 1.0)
        assert len(data["selected"]) == data["k"]

    def test_sweep(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code, _, _ = run("sweep-beta", "--input", IRIS, "--out", str(out))
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "dataset,beta,err,slr,err_nops,lor,lor_status"
        assert len(lines) == 5
        for line in lines[1:]:
            cells = line.split(",")
            assert "nan" not in line.lower()
            assert (cells[6] == "ok") == (cells[5] != "")

    def test_pareto_appends_column(self, tmp_path):
        src = tmp_path / "results.csv"
        src.write_text("method,dataset,err,slr\na,d,0.1,0.5\nb,d,0.2,0.2\nc,d,0.3,0.1\ne,d,0.25,0.25\nf,x,0.5,0.5\n")
        out = tmp_path / "ranked.csv"
        code, _, _ = run("pareto", "--records", str(src), "--out", str(out))
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "method,dataset,err,slr,pareto_rank"
        assert [l.split(",")[-1] for l in lines[1:]] == ["1", "1", "1", "2", "1"]
        # the original cells are untouched
        assert [l.rsplit(",", 1)[0] for l in lines] == src.read_text().splitlines()

    def test_pareto_stdout(self, tmp_path):
        src = tmp_path / "results.csv"
        src.write_text("method,dataset,err,slr\na,d,0.1,0.1\nb,d,0.2,0.2\n")
        code, stdout, _ = run("pareto", "--records", str(src))
        assert code == EXIT_OK
        assert stdout.splitlines()[-1] == "b,d,0.2,0.2,2"

    def test_pareto_bad_record(self, tmp_path):
        src = tmp_path / "results.csv"
        src.write_text("method,dataset,err,slr\na,d,zero,0.1\n")
        code, _, err = run("pareto", "--records", str(src))
        assert code == EXIT_DATA
        assert "row 2" in err

    def test_graph(self, tmp_path, worked_file):
        out = tmp_path / "g.dot"
        code, _, _ = run("graph", "--input", worked_file, "--kind", "distmatrix", "--k", "2", "--C", "1e6", "--out", str(out))
        assert code == EXIT_OK
        text = out.read_text()
        assert text.count("->") == 4
        assert text.count("style=dashed") == 2
