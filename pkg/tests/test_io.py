import json

import numpy as np
import pytest

from corrgen import io
from corrgen.corridor import Corridor2D, Corridor3D, sample_boundary_mesh
from corrgen.chebyshev import ChebyshevPoly
from corrgen.errors import InputError, ParseError, ValidationError
from corrgen.optimize import SweepRow
from corrgen.path import build_path_from_waypoints

jsonschema = pytest.importorskip("jsonschema")


def test_csv_single_point(tmp_path):
    f = tmp_path / "c.csv"
    f.write_text("x,y,z\n1,2,3\n")
    np.testing.assert_array_equal(io.load_cloud(f), [[1, 2, 3]])


def test_csv_planar(tmp_path):
    f = tmp_path / "c.csv"
    f.write_text("x,y\n1,2\n3,4\n")
    pts, dim = io.read_cloud(f)
    assert dim == 2
    np.testing.assert_array_equal(pts, [[1, 2, 0], [3, 4, 0]])


def test_csv_parse_error_names_line(tmp_path):
    f = tmp_path / "c.csv"
    f.write_text("x,y,z\n1,2,abc\n")
    with pytest.raises(ParseError, match="line 2"):
        io.load_cloud(f)


@pytest.mark.parametrize("body,line", [("x,y,z\n1,2,3\n4,5\n", 3), ("a,b,c\n1,2,3\n", 1), ("", 1)])
def test_csv_structure_errors(tmp_path, body, line):
    f = tmp_path / "c.csv"
    f.write_text(body)
    with pytest.raises(ParseError) as err:
        io.load_cloud(f)
    assert err.value.line == line


@pytest.mark.parametrize("bad", ["nan", "inf", "-inf"])
def test_csv_non_finite(tmp_path, bad):
    f = tmp_path / "c.csv"
    f.write_text(f"x,y,z\n1,2,3\n0,{bad},1\n")
    with pytest.raises(ValidationError):
        io.load_cloud(f)


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        io.load_cloud(tmp_path / "nope.csv")


def test_csv_roundtrip_precision(tmp_path, rng):
    pts = rng.normal(size=(500, 3)) * 100
    f = tmp_path / "c.csv"
    io.save_cloud(f, pts)
    np.testing.assert_allclose(io.load_cloud(f), pts, rtol=1e-8)


def test_binary_roundtrip_bitwise(tmp_path, rng):
    pts = rng.normal(size=(1_000_000, 3)).astype(np.float32)
    f = tmp_path / "c.bin"
    io.save_cloud(f, pts)
    raw = f.read_bytes()
    assert raw[:8] == b"CRGNPCD1" and int.from_bytes(raw[8:16], "little") == len(pts)
    back = io.load_cloud(f)
    assert back.astype(np.float32).tobytes() == pts.tobytes()


def test_binary_truncated(tmp_path):
    f = tmp_path / "c.bin"
    io.save_cloud(f, np.ones((4, 3)))
    f.write_bytes(f.read_bytes()[:-4])
    with pytest.raises(ParseError):
        io.load_cloud(f)


def test_path_roundtrip(tmp_path):
    p = build_path_from_waypoints([(0, 0, 0), (1, 0, 0), (1, 1, 0)], 20)
    f = tmp_path / "p.json"
    io.save_path(f, p)
    q = io.load_path(f)
    x = np.linspace(0, 1, 41)
    np.testing.assert_allclose(q.positions_at(x), p.positions_at(x), atol=1e-12)
    io.save_path(f, waypoints=[(0, 0, 0), (2, 0, 0)])
    assert io.load_path(f).xi_range == (0.0, 1.0)


def test_bad_json_line(tmp_path):
    f = tmp_path / "p.json"
    f.write_text('{\n "waypoints": [\n oops\n}')
    with pytest.raises(ParseError, match="line 3"):
        io.load_path(f)


def test_corridor_roundtrip_and_schema(tmp_path):
    p = build_path_from_waypoints([(0, 0, 0), (1, 0, 0)], 10)
    c = Corridor3D.from_coeffs(np.array([[2, .1], [0, .05], [1.5, 0], [0.1, 0], [0, 0.2]]), (0, 1), p)
    f = tmp_path / "c.json"
    io.save_corridor(f, c)
    data = json.loads(f.read_text())
    jsonschema.validate(data, io.CORRIDOR_SCHEMA)
    back = io.load_corridor(f)
    assert back.path is not None
    for a, b in zip(c.polys, back.polys):
        np.testing.assert_array_equal(a.coeffs, b.coeffs)

    c2 = Corridor2D(ChebyshevPoly([0.4], (0, 1)), ChebyshevPoly([-0.4], (0, 1)))
    io.save_corridor(f, c2)
    jsonschema.validate(json.loads(f.read_text()), io.CORRIDOR_SCHEMA)
    assert io.load_corridor(f).dim == 2


def test_corridor_schema_rejects_missing_field():
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"dim": 3, "degree": 0, "xi_range": [0, 1], "basis": "chebyshev",
                             "e11": [1], "e12": [0], "e22": [1], "d1": [0]}, io.CORRIDOR_SCHEMA)


def test_obj_export(tmp_path):
    p = build_path_from_waypoints([(0, 0, 0), (1, 0, 0)], 10)
    mesh = sample_boundary_mesh(Corridor3D.constant(np.eye(2), path=p), 3, 8)
    f = tmp_path / "m.obj"
    io.save_mesh(f, mesh)
    lines = f.read_text().splitlines()
    assert sum(ln.startswith("v ") for ln in lines) == 24
    assert sum(ln.startswith("f ") for ln in lines) == 32
    faces = np.array([ln.split()[1:] for ln in lines if ln.startswith("f ")], int)
    assert faces.min() == 1 and faces.max() == 24


def test_sweep_csv(tmp_path):
    f = tmp_path / "s.csv"
    io.write_sweep_csv(f, [SweepRow(3, "dd-lp", 1.5, 2.0, 1.0, 10),
                           SweepRow(3, "exact-cone", float("nan"), 0, 0, 0, ok=False)])
    lines = f.read_text().splitlines()
    assert lines[0] == "degree,formulation,volume,solve_ms,assembly_ms,constraints"
    assert len(lines) == 3 and lines[2].split(",")[2] == "nan"
