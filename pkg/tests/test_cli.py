import json

import numpy as np
import pytest

from lpkdv import cli
from lpkdv.lattice import LatticeParams, grid_to_csv, read_grid_csv, residual_max
from lpkdv.soliton import SolitonMode, SolitonSpec, soliton_grid

P = LatticeParams(2.0, 1.0)


def run(args, capsys):
    code = cli.main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def test_soliton_to_file(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(SolitonSpec((SolitonMode(0.5, 1.0), SolitonMode(0.8, 2.0))).to_json())
    out = tmp_path / "g.csv"
    code, _, _ = run(["soliton", "--spec", spec, "--window=-5,-5,10,8", "--out", out], capsys)
    assert code == 0
    g, params = read_grid_csv(out)
    assert g.shape == (10, 8) and (g.n0, g.m0) == (-5, -5)
    assert (params.p, params.q) == (2.0, 1.0)
    assert residual_max(g, params) < 1e-12


def test_soliton_default_window(capsys):
    code, out, _ = run(["soliton"], capsys)
    assert code == 0
    assert out.startswith("#")


def test_evolve_fills_staircase(tmp_path, capsys):
    g = soliton_grid(SolitonSpec.single(0.5, 1.0), P, -6, -6, 12, 12)
    lines = grid_to_csv(g, P).splitlines()
    # keep the bottom row (m = m0) and the last column
    for j in range(2, len(lines)):
        cells = lines[j].split(",")
        lines[j] = ",".join(["nan"] * (len(cells) - 1) + cells[-1:])
    stair = tmp_path / "s.csv"
    stair.write_text("\n".join(lines) + "\n")
    code, out, _ = run(["evolve", stair], capsys)
    assert code == 0
    filled = tmp_path / "f.csv"
    filled.write_text(out)
    back, _ = read_grid_csv(filled)
    assert np.max(np.abs(back.values - g.values)) < 1e-12


def test_verify_single_suite(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(["verify", "lattice-core", "--out", out], capsys)
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["suite"] == "lattice-core" and rep["schema"] == "1"
    assert all(c["pass"] for c in rep["cases"])


def test_verify_reports_failures(capsys):
    code, out, err = run(["verify", "soliton", "--tol", "1e-300"], capsys)
    rep = json.loads(out)
    assert all(c["tolerance"] == 1e-300 for c in rep["cases"])
    assert not all(c["pass"] for c in rep["cases"])
    assert code == 1 and err.startswith("VERIFY_FAILED suite=soliton")


def test_verify_named_tolerance(capsys):
    code, out, _ = run(["verify", "lattice-core", "--tol", "soliton-residual=1e-300"], capsys)
    rep = json.loads(out)
    case = next(c for c in rep["cases"] if c["name"] == "soliton-residual")
    assert case["tolerance"] == 1e-300


def test_flow(tmp_path, capsys):
    g = soliton_grid(SolitonSpec.single(0.5, 1.0), P, -3, -3, 6, 6)
    (tmp_path / "g.csv").write_text(grid_to_csv(g, P))
    (tmp_path / "c.json").write_text('{"kind": "X1"}')
    code, out, _ = run(["flow", tmp_path / "c.json", tmp_path / "g.csv", "--eps", "0.5", "--steps", "2"], capsys)
    assert code == 0
    (tmp_path / "o.csv").write_text(out)
    back, _ = read_grid_csv(tmp_path / "o.csv")
    assert np.max(np.abs(back.values - g.values - 0.5)) < 1e-14
    code, _, err = run(["flow", tmp_path / "c.json", tmp_path / "g.csv", "--eps", "0.5"], capsys)
    assert code == 0
    (tmp_path / "x.json").write_text('{"kind": "Xn", "k": 0}')
    code, _, err = run(["flow", tmp_path / "x.json", tmp_path / "g.csv", "--eps", "0.5"], capsys)
    assert code == 1 and err.startswith("WINDOW_TOO_SMALL")


def test_painleve(tmp_path, capsys):
    rp = tmp_path / "rp.json"
    rp.write_text('{"w": 1, "c": 0.1, "p": 2, "q": 1}')
    code, out, _ = run(["painleve", rp, "--steps", "5"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# w=1.0 c=0.1") and lines[1] == "n,y,u" and len(lines) == 8
    code, _, err = run(["painleve", rp, "--state", "1,0,0,0,0"], capsys)
    assert code == 1 and err.startswith("SINGULAR_STEP")
    rp.write_text('{"w": 1, "c": 0.3, "p": 2, "q": 1}')
    code, _, err = run(["painleve", rp], capsys)
    assert code == 1 and err.startswith("INVALID_PARAMS")


def test_continuum_zero_profile(capsys):
    code, out, _ = run(["continuum", "--profile", "zero", "--half-width", "60", "--steps", "4"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["status"] == "ExactMatch" and rep["order"] is None
    assert rep["time_constant"] == 0.25


@pytest.mark.parametrize(
    "args, code, prefix",
    [
        (["soliton", "--window", "1,2"], 2, "PARSE_ERROR"),
        (["soliton", "--params", "2,2"], 1, "INVALID_PARAMS"),
        (["soliton", "--spec", "/nonexistent/spec.json"], 2, "PARSE_ERROR"),
        (["verify", "nope"], 2, ""),
        (["evolve", "/nonexistent.csv"], 2, "PARSE_ERROR"),
    ],
)
def test_exit_codes(args, code, prefix, capsys):
    got, _, err = run(args, capsys)
    assert got == code
    assert err.startswith(prefix) or prefix == ""


def test_bad_grid_file(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("not a grid\n")
    code, _, err = run(["evolve", bad], capsys)
    assert code == 2 and err.startswith("PARSE_ERROR")


def test_soliton_output_is_deterministic(capsys):
    a = run(["soliton", "--window=-4,-4,6,6"], capsys)[1]
    b = run(["soliton", "--window=-4,-4,6,6"], capsys)[1]
    assert a == b
