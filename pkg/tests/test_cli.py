import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from corrgen.cli import main
from corrgen.io import CORRIDOR_SCHEMA

jsonschema = pytest.importorskip("jsonschema")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 1, "exactly one JSON line on stdout"
    return code, json.loads(out[0])


@pytest.fixture(scope="module")
def cyl(tmp_path_factory):
    d = tmp_path_factory.mktemp("cyl")
    assert main(["synth", "--fixture", "cylinder", "--cloud", str(d / "cyl.csv"),
                 "--path", str(d / "straight.json")]) == 0
    return d


def test_synth_cylinder_count(cyl):
    lines = (cyl / "cyl.csv").read_text().splitlines()
    assert lines[0] == "x,y,z" and len(lines) == 3201


def test_synth_deterministic(tmp_path, capsys):
    for k in (1, 2):
        code, _ = run(capsys, "synth", "--kind", "mixed", "--seed", 5, "--cloud", tmp_path / f"c{k}.csv",
                      "--path", tmp_path / f"p{k}.json")
        assert code == 0
    assert (tmp_path / "c1.csv").read_bytes() == (tmp_path / "c2.csv").read_bytes()
    assert (tmp_path / "p1.json").read_bytes() == (tmp_path / "p2.json").read_bytes()


def test_synth_unknown_kind(tmp_path, capsys):
    code, out = run(capsys, "synth", "--kind", "blob", "--cloud", tmp_path / "c.csv", "--path", tmp_path / "p.json")
    assert code == 1 and "blob" in out["error"]


def test_generate_then_check(cyl, tmp_path, capsys):
    out = tmp_path / "c.json"
    code, rep = run(capsys, "generate", "--cloud", cyl / "cyl.csv", "--path", cyl / "straight.json",
                    "--degree", 6, "--wrapper-radius", 1.5, "--formulation", "lp", "--out", out,
                    "--mesh", tmp_path / "c.obj")
    assert code == 0
    assert rep["volume"] == pytest.approx(np.pi, rel=0.02)
    assert {"volume", "solve_ms", "constraints"} <= set(rep)
    jsonschema.validate(json.loads(out.read_text()), CORRIDOR_SCHEMA)
    assert (tmp_path / "c.obj").read_text().startswith("# corrgen")
    code, chk = run(capsys, "check", "--corridor", out, "--cloud", cyl / "cyl.csv")
    assert code == 0 and chk["violations"] == 0 and chk["min_value"] >= -1e-6


def test_check_injected_point(cyl, tmp_path, capsys):
    out = tmp_path / "c.json"
    run(capsys, "generate", "--cloud", cyl / "cyl.csv", "--path", cyl / "straight.json", "--degree", 3,
        "--wrapper-radius", 1.5, "--out", out)
    from corrgen.io import load_corridor
    c = load_corridor(out)
    center = c.recover_ellipse(0.5).center
    bad = tmp_path / "bad.csv"
    bad.write_text((cyl / "cyl.csv").read_text() + f"0.5,{center[0]:.9g},{center[1]:.9g}\n")
    code, chk = run(capsys, "check", "--corridor", out, "--cloud", bad)
    assert code == 3 and chk["violations"] == 1


def test_check_dimension_mismatch(cyl, tmp_path, capsys):
    out = tmp_path / "c.json"
    run(capsys, "generate", "--cloud", cyl / "cyl.csv", "--path", cyl / "straight.json", "--degree", 2,
        "--wrapper-radius", 1.5, "--out", out)
    planar = tmp_path / "p.csv"
    planar.write_text("x,y\n0.5,0.3\n")
    code, _ = run(capsys, "check", "--corridor", out, "--cloud", planar)
    assert code == 1


def test_missing_wrapper_flag(cyl, tmp_path, capsys):
    code, out = run(capsys, "generate", "--cloud", cyl / "cyl.csv", "--path", cyl / "straight.json",
                    "--degree", 3, "--out", tmp_path / "c.json")
    assert code == 1 and "--wrapper-radius" in out["error"]


def test_unreadable_cloud(cyl, tmp_path, capsys):
    code, _ = run(capsys, "generate", "--cloud", tmp_path / "missing.csv", "--path", cyl / "straight.json",
                  "--degree", 3, "--wrapper-radius", 1.5, "--out", tmp_path / "c.json")
    assert code == 1


def test_bad_flag_is_input_error(capsys):
    assert main(["generate", "--degree", "x"]) == 1


def test_eigen_bounds_without_wrapper(cyl, tmp_path, capsys):
    code, rep = run(capsys, "generate", "--cloud", cyl / "cyl.csv", "--path", cyl / "straight.json",
                    "--degree", 2, "--eigen-min", 0.5, "--eigen-max", 10, "--formulation", "cone",
                    "--out", tmp_path / "c.json")
    assert code == 0 and rep["formulation"] == "exact-cone"


def test_sweep_single_degree(cyl, tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, rep = run(capsys, "sweep", "--cloud", cyl / "cyl.csv", "--path", cyl / "straight.json",
                    "--wrapper-radius", 1.5, "--degrees", "5:5", "--out", out)
    assert code == 0 and rep["rows"] == 2
    rows = list(csv.DictReader(out.open()))
    assert [r["formulation"] for r in rows] == ["dd-lp", "exact-cone"]


@pytest.fixture(scope="module")
def mixed_sweep(tmp_path_factory):
    d = tmp_path_factory.mktemp("mixed")
    assert main(["synth", "--fixture", "mixed", "--cloud", str(d / "m.csv"), "--path", str(d / "m.json")]) == 0
    assert main(["sweep", "--cloud", str(d / "m.csv"), "--path", str(d / "m.json"), "--wrapper-radius", "2.5",
                 "--degrees", "3:25", "--formulations", "lp,cone", "--out", str(d / "s.csv")]) == 0
    return list(csv.DictReader((d / "s.csv").open()))


@pytest.mark.slow
def test_sweep_full_range_rows(mixed_sweep):
    assert len(mixed_sweep) == 46
    assert [int(r["degree"]) for r in mixed_sweep[::2]] == list(range(3, 26))


@pytest.mark.slow
@pytest.mark.parametrize("formulation", ["dd-lp", "exact-cone"])
def test_sweep_volume_trend_on_fixture(mixed_sweep, formulation):
    vol = [float(r["volume"]) for r in mixed_sweep if r["formulation"] == formulation]
    drops = [(k + 3, a, b) for k, (a, b) in enumerate(zip(vol, vol[1:])) if b < a * (1 - 1e-6)]
    assert not drops, f"volume decreases at degree -> degree+1: {drops}"


def test_channel_generate_check(tmp_path, capsys):
    run(capsys, "synth", "--fixture", "channel", "--cloud", tmp_path / "ch.csv", "--path", tmp_path / "ch.json")
    code, rep = run(capsys, "generate", "--cloud", tmp_path / "ch.csv", "--path", tmp_path / "ch.json",
                    "--dim", 2, "--degree", 4, "--out", tmp_path / "c.json")
    assert code == 0 and rep["area"] == pytest.approx(0.8, abs=1e-4)
    code, chk = run(capsys, "check", "--corridor", tmp_path / "c.json", "--cloud", tmp_path / "ch.csv")
    assert code == 0


def test_export(cyl, tmp_path, capsys):
    run(capsys, "generate", "--cloud", cyl / "cyl.csv", "--path", cyl / "straight.json", "--degree", 2,
        "--wrapper-radius", 1.5, "--out", tmp_path / "c.json")
    code, rep = run(capsys, "export", "--corridor", tmp_path / "c.json", "--stations", 5, "--ring", 6,
                    "--out", tmp_path / "m.obj")
    assert code == 0 and rep["vertices"] == 30 and rep["faces"] == 48


def test_module_entry_point(cyl):
    proc = subprocess.run([sys.executable, "-m", "corrgen", "check", "--corridor", str(cyl / "none.json"),
                           "--cloud", str(cyl / "cyl.csv")], capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["exit"] == 1
    assert "corrgen: ERROR" in proc.stderr
