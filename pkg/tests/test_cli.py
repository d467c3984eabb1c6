import csv
import json

import numpy as np
import pytest

from spinform import cli, suite


def run(argv, capsys):
    code = cli.main(argv + ["-q"])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


def _strip_time(text):
    data = json.loads(text)
    data.pop("wall_time")
    return data


def test_plane_verify_residuals_at_rounding_level(capsys):
    code, report = run(["verify", "--surface", "plane", "--grid", "8x8"], capsys)
    assert code == 0 and report["passed"]
    checks = report["runs"][0]["checks"]
    assert max(c["sup"] for c in checks) < 1e-10
    names = [c["name"] for c in checks]
    assert len(names) == len(set(names))


def test_clifford_torus_verify_passes(capsys):
    code, report = run(["verify", "--surface", "clifford_torus", "--grid", "64x64"], capsys)
    assert code == 0
    names = {c["name"] for c in report["runs"][0]["checks"]}
    assert {"relE", "length_constant", "minimal_eigenspinor", "reconstruction_agreement"} <= names


def test_horosphere_suite_includes_w_identity(capsys):
    code, report = run(["verify", "--surface", "horosphere"], capsys)
    assert code == 0
    run0 = report["runs"][0]
    assert run0["eta"] == [0.0, 0.5] and run0["grid"] == [64, 64]
    assert any(c["name"] == "W_identity" and c["passed"] for c in run0["checks"])


def test_mismatched_eta_is_an_identity_failure(capsys):
    code, report = run(["verify", "--surface", "clifford_torus", "--grid", "16x16", "--eta", "0"], capsys)
    assert code == 1
    failed = {c["name"] for c in report["runs"][0]["checks"] if not c["passed"]}
    assert "flatness" in failed


def test_hypersurface_verify(capsys):
    code, report = run(["verify", "--surface", "round_s3", "--grid", "12x12x12"], capsys)
    assert code == 0
    assert report["runs"][0]["space"] == "R4"


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--surface", "sphere", "--grid", "3x3"],
        ["verify", "--surface", "klein_bottle"],
        ["verify", "--surface", "sphere", "--grid", "16x16x16"],
        ["verify", "--surface", "round_s3", "--grid", "6x6x6"],
        ["verify", "--surface", "sphere", "--eta", "banana"],
        ["verify"],
        ["convergence", "--surface", "sphere", "--ladder", "16/32"],
    ],
)
def test_config_errors_exit_with_two(argv, capsys):
    assert cli.main(argv + ["-q"]) == 2
    assert capsys.readouterr().out == ""


def test_restrict_writes_field_and_report(tmp_path, capsys):
    out = tmp_path / "sphere.csv"
    assert cli.main(["restrict", "--surface", "sphere", "--grid", "24x24", "--out", str(out), "-q"]) == 0
    with open(out) as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["u", "v", "re_z1", "im_z1", "re_z2", "im_z2"]
    assert len(rows) == 1 + 24 * 24
    assert [float(x) for x in rows[1][2:]] == [1.0, 0.0, 0.0, 0.0]
    report = json.loads((tmp_path / "sphere.json").read_text())
    tensor = report["runs"][0]["tensor"]
    values = np.array([np.nan if x is None else x for x in tensor["values"]]).reshape(tensor["shape"])
    np.testing.assert_allclose(values[2:-2, 2:-2], np.broadcast_to(0.5 * np.eye(2), (20, 20, 2, 2)), atol=1e-6)


def test_restrict_catenoid_dirac_residual(tmp_path):
    assert cli.main(["restrict", "--surface", "catenoid", "--out", str(tmp_path / "cat.csv"), "-q"]) == 0
    report = json.loads((tmp_path / "cat.json").read_text())
    dirac = next(c for c in report["runs"][0]["checks"] if c["name"] == "dirac")
    assert dirac["sup"] < 1e-6


def test_restrict_hypersurface_has_three_parameter_columns(tmp_path):
    assert cli.main(["restrict", "--surface", "cylinder_s2xr", "--grid", "10x10x10", "--out", str(tmp_path / "c.csv"), "-q"]) == 0
    with open(tmp_path / "c.csv") as handle:
        header = next(csv.reader(handle))
    assert header == ["u", "v", "w", "re_z1", "im_z1", "re_z2", "im_z2"]


def test_reports_are_deterministic(tmp_path):
    paths = [tmp_path / f"r{k}.json" for k in range(2)]
    for p in paths:
        assert cli.main(["verify", "--surface", "geodesic_sphere_h3", "--out", str(p), "-q"]) == 0
    texts = [p.read_text() for p in paths]
    assert _strip_time(texts[0]) == _strip_time(texts[1])
    strip = lambda t: "\n".join(line for line in t.splitlines() if "wall_time" not in line)
    assert strip(texts[0]) == strip(texts[1])


def test_config_file_and_flag_precedence(tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text("# sphere of radius 2\nsurface = sphere\ngrid = 16x16\nradius = 2\ntol.dirac = 1e-3\n")
    code, report = run(["verify", "--config", str(config), "--grid", "20x20"], capsys)
    assert code == 0
    assert report["config"]["grid"] == [20, 20]
    assert report["config"]["params"] == {"radius": 2.0}
    dirac = next(c for c in report["runs"][0]["checks"] if c["name"] == "dirac")
    assert dirac["tol"] == 1e-3
    energy = next(c for c in report["runs"][0]["checks"] if c["name"] == "shape_oracle")
    assert energy["passed"]


def test_bad_config_lines(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("surface sphere\n")
    assert cli.main(["verify", "--config", str(config), "-q"]) == 2
    config.write_text("surface = sphere\ncolour = blue\n")
    assert cli.main(["verify", "--config", str(config), "-q"]) == 2


def test_several_surfaces_in_parallel(capsys):
    code, report = run(["verify", "--surface", "plane,cylinder", "--grid", "32x32", "--jobs", "2"], capsys)
    assert code == 0
    assert [r["surface"] for r in report["runs"]] == ["plane", "cylinder"]


def test_convergence_orders(capsys):
    code, report = run(["convergence", "--surface", "sphere"], capsys)
    assert code == 0
    studies = report["runs"][0]["studies"]
    for label in ("transport_path", "curvature_stencil"):
        assert studies[label]["fitted_order"] == pytest.approx(4.0, abs=0.5)


def test_plane_convergence_hits_the_floor(capsys):
    _, report = run(["convergence", "--surface", "plane"], capsys)
    assert report["runs"][0]["studies"]["curvature_stencil"]["fitted_order"] == "floor"


@pytest.mark.parametrize("text, value", [("auto", None), ("0", 0), ("0.5", 0.5), ("0.5j", 0.5j), ("i/2", 0.5j), ("1/2", 0.5)])
def test_eta_parsing(text, value):
    assert cli.parse_eta(text) == value


def test_fitted_orders():
    h = np.array([0.1, 0.05, 0.025])
    pairs, fitted = suite.fitted_orders(h, 3 * h**4)
    assert pairs == pytest.approx([4, 4]) and fitted == pytest.approx(4)
    pairs, fitted = suite.fitted_orders(h, [1e-15, 1e-16, 1e-15])
    assert pairs == ["floor", "floor"] and fitted == "floor"
