import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import EXAMPLE1, EXAMPLE2, EXAMPLE3
from mibound.ci import CountsTable, mi_confidence_floor
from mibound.cli import EXIT_INPUT, EXIT_IO, EXIT_OK, EXIT_UNCERTIFIED, main
from mibound.dist import JointDist

EX1_JSON = json.dumps({"pxy": EXAMPLE1})


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def ex1_file(tmp_path):
    path = tmp_path / "ex1.json"
    path.write_text(EX1_JSON)
    return str(path)


def test_mi_example1(capsys, ex1_file):
    code, out, _ = run(capsys, "mi", ex1_file)
    assert code == EXIT_OK
    assert out.strip() == "0.2210"


def test_mi_inline_and_nats(capsys):
    code, out, _ = run(capsys, "mi", EX1_JSON, "--unit", "nats")
    assert code == EXIT_OK
    assert out.strip() == "0.1532"


def test_mi_product_is_zero(capsys):
    code, out, _ = run(capsys, "mi", json.dumps({"pxy": [[0.12, 0.28], [0.18, 0.42]]}))
    assert code == EXIT_OK
    assert out.strip() == "0.0000"


def test_mi_strict_rejects_example3(capsys):
    code, _, err = run(capsys, "mi", json.dumps({"pxy": EXAMPLE3}))
    assert code == EXIT_INPUT
    assert "MassMismatch" in err


def test_mi_renormalize_accepts_example3(capsys):
    code, out, _ = run(capsys, "mi", json.dumps({"pxy": EXAMPLE3}), "--policy", "renormalize")
    assert code == EXIT_OK
    assert out.strip() == "0.2150"


@pytest.mark.parametrize(
    "text",
    ['{"pxy": [[0.5, -0.1], [0.3, 0.3]]}', '{"pxy": [[1.0]]}', '{"p": 1}', "{not json"],
)
def test_mi_bad_input(capsys, text):
    code, _, err = run(capsys, "mi", text)
    assert code == EXIT_INPUT
    assert err.startswith("error:")


def test_mi_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "mi", str(tmp_path / "nope.json"))
    assert code == EXIT_INPUT


def test_mi_from_stdin(capsys, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO(EX1_JSON))
    code, out, _ = run(capsys, "mi", "-")
    assert code == EXIT_OK and out.strip() == "0.2210"


def test_bound_example1(capsys, ex1_file):
    code, out, _ = run(capsys, "bound", ex1_file, "--eps", "0.3")
    assert code == EXIT_OK
    lines = dict(line.split(None, 1) for line in out.strip().splitlines())
    assert lines["I(p)"] == "0.2210 bits"
    assert lines["bound"] == "0.0019 bits"


def test_bound_endpoints(capsys, ex1_file):
    _, out, _ = run(capsys, "bound", ex1_file, "--eps", "0")
    assert "bound      0.2210 bits" in out
    _, out, _ = run(capsys, "bound", ex1_file, "--eps", "2", "--points", "21")
    assert "bound      0.0000 bits" in out


def test_bound_json_argmin_round_trips(capsys, ex1_file):
    code, out, _ = run(capsys, "bound", ex1_file, "--eps", "0.3", "--points", "50", "--json")
    assert code == EXIT_OK
    d = json.loads(out)
    q = JointDist.from_json(json.dumps(d["argmin"]))
    assert abs(q.values - JointDist.from_json(EX1_JSON).values).sum() <= 0.3 + 1e-9
    assert d["certified"] is True


def test_bound_refine(capsys, ex1_file):
    code, out, err = run(capsys, "bound", ex1_file, "--eps", "0.3", "--points", "200", "--refine")
    assert code == EXIT_OK
    assert "refine" in out
    assert "warning" not in err


def test_bound_rejects_eps(capsys, ex1_file):
    with pytest.raises(SystemExit) as exc:
        main(["bound", ex1_file, "--eps", "2.5"])
    assert exc.value.code == 2


def test_bound_uncertified_exit(capsys):
    v = json.dumps({"pxy": EXAMPLE2})
    code, _, err = run(capsys, "bound", v, "--eps", "0.1", "--points", "5", "--max-iters", "1", "--gap-tol", "1e-14")
    assert code == EXIT_UNCERTIFIED
    assert "warning" in err


def test_sweep_csv_stdout(capsys, ex1_file):
    code, out, err = run(capsys, "sweep", ex1_file, "--eps", "0.3")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1000
    assert min(float(r["I_bits"]) for r in rows) == pytest.approx(0.0019, abs=5e-4)
    assert "1000 points" in err


def test_sweep_single_point(capsys, ex1_file):
    _, out, _ = run(capsys, "sweep", ex1_file, "--eps", "0.3", "--points", "1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1 and float(rows[0]["gamma"]) == 0.0


def test_sweep_example2_to_file(capsys, tmp_path):
    dest = tmp_path / "curve.csv"
    code, out, _ = run(capsys, "sweep", json.dumps({"pxy": EXAMPLE2}), "--eps", "0.1", "--out", str(dest))
    assert code == EXIT_OK
    rows = list(csv.DictReader(dest.open()))
    assert len(rows) == 1000
    assert min(float(r["I_bits"]) for r in rows) == pytest.approx(0.0524, abs=1e-3)
    assert "min I = 0.0524 bits" in out


def test_sweep_unwritable(capsys, ex1_file, tmp_path):
    code, _, err = run(capsys, "sweep", ex1_file, "--eps", "0.3", "--points", "3", "--out", str(tmp_path / "no" / "x.csv"))
    assert code == EXIT_IO
    assert "cannot write" in err


@pytest.fixture
def counts_file(tmp_path):
    def make(rows):
        path = tmp_path / "counts.txt"
        path.write_text("\n".join(" ".join(str(c) for c in row) for row in rows) + "\n")
        return str(path)

    return make


def test_ci_huge_counts(capsys, counts_file):
    path = counts_file([[17 * 10**9, 285 * 10**9], [424 * 10**9, 274 * 10**9]])
    code, out, _ = run(capsys, "ci", path, "--points", "51")
    assert code == EXIT_OK
    lines = dict(line.split(None, 1) for line in out.strip().splitlines())
    assert lines["I(p_hat)"] == "0.2210 bits"
    assert lines["floor"] in ("0.2209 bits", "0.2210 bits")


def test_ci_single_sample(capsys, counts_file):
    code, out, _ = run(capsys, "ci", counts_file([[1, 0], [0, 0]]), "--points", "11")
    assert code == EXIT_OK
    assert "eps        2.000000" in out
    assert "floor      0.0000 bits" in out


def test_ci_matches_library(capsys, counts_file):
    rows = [[17, 285], [424, 274]]
    code, out, _ = run(capsys, "ci", counts_file(rows), "--points", "100", "--json")
    assert code == EXIT_OK
    d = json.loads(out)
    rep = mi_confidence_floor(CountsTable(np.array(rows)), n_points=100)
    assert d["floor_nats"] == rep.floor.nats
    assert d["eps"] == rep.eps


@pytest.mark.parametrize("rows", [[[1, 2], [3]], [[1, 2], [3, -4]], [[0, 0], [0, 0]]])
def test_ci_malformed(capsys, counts_file, rows):
    code, _, err = run(capsys, "ci", counts_file(rows))
    assert code == EXIT_INPUT
    assert err.startswith("error:")


def test_ci_bad_delta(capsys, counts_file):
    code, _, _ = run(capsys, "ci", counts_file([[1, 2], [3, 4]]), "--delta", "1.5")
    assert code == EXIT_INPUT


def test_output_is_deterministic(capsys, ex1_file):
    outs = [run(capsys, "bound", ex1_file, "--eps", "0.3", "--points", "100", "--json")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_module_entry_point(ex1_file):
    res = subprocess.run([sys.executable, "-m", "mibound", "mi", ex1_file], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.strip() == "0.2210"
