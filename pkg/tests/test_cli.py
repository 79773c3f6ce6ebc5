import json
import math

import pytest

from compactpack import fixtures
from compactpack.cli import main


def run(capsys, *argv, fmt="json"):
    code = main(["--format", fmt, *argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if fmt == "json" else out)


@pytest.mark.parametrize("rho, c, a, b, value", [
    ("0.41421356,1", 0, 1, 1, math.pi / 2),
    ("1", 0, 0, 0, math.pi / 3),
])
def test_angles_eval(capsys, rho, c, a, b, value):
    code, rep = run(capsys, "angles", "eval", "--c", str(c), "--a", str(a), "--b", str(b), "--rho", rho)
    assert code == 0 and rep["outcome"] == "info"
    assert rep["metrics"]["value"] == pytest.approx(value, abs=1e-8)


def test_angles_grad_fd(capsys):
    code, rep = run(capsys, "angles", "grad", "--c", "1", "--a", "0", "--b", "2", "--rho", "0.3,0.6,1", "--check-fd")
    assert code == 0 and rep["outcome"] == "pass"
    assert rep["metrics"]["max_relative_fd_error"] <= 1e-5


@pytest.mark.parametrize("argv", [
    ["angles", "eval", "--c", "0"],
    ["angles", "eval", "--c", "0", "--a", "0", "--b", "0", "--rho", "x"],
    ["angles", "eval", "--c", "3", "--a", "0", "--b", "0", "--rho", "1"],
    ["codes", "down", "figure4.codes"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        if main(argv) == 2:
            raise SystemExit(2)
    assert exc.value.code == 2


def test_codes_fundamental(capsys):
    code, rep = run(capsys, "codes", "check-fundamental", "figure4.codes")
    assert code == 0 and rep["outcome"] == "pass"


def test_codes_mutated_fails_with_certificate(capsys, tmp_path):
    lines = fixtures.fixture_path("figure4.codes").read_text().splitlines()
    text = "\n".join("0:000000" if line.startswith("0:") else line for line in lines)
    path = tmp_path / "mutated.codes"
    path.write_text(text)
    code, rep = run(capsys, "codes", "check-fundamental", str(path))
    assert code == 1 and rep["details"]["certificate"]["violating_set"] == [0]


def test_codes_parse_error(capsys, tmp_path):
    path = tmp_path / "bad.codes"
    path.write_text("0:1x11\n")
    code, rep = run(capsys, "codes", "check-fundamental", str(path))
    assert code == 2 and rep["outcome"] == "error"


def test_codes_down(capsys):
    code, out = run(capsys, "codes", "down", "--k", "2", "figure4.codes", fmt="text")
    assert code == 0 and "{0:11111}" in out


def test_packing_verify_square(capsys):
    code, rep = run(capsys, "packing", "verify", "two-size-1111")
    assert code == 0 and rep["outcome"] == "pass"


def test_packing_codes_square(capsys):
    code, rep = run(capsys, "packing", "codes", "two-size-1111")
    assert code == 0 and rep["details"]["codes"] == ["0:1111", "1:01010101"]


def test_packing_verify_moved_disc(capsys, tmp_path):
    p = fixtures.load_fixture("two-size-1111")
    path = tmp_path / "moved.json"
    path.write_text(p.moved(p.ids[1], [1e-3, 0.0]).dumps())
    code, rep = run(capsys, "packing", "verify", str(path))
    assert code == 1 and rep["outcome"] == "fail"
    assert any("sphere" in f for f in rep["details"]["failures"])


def test_packing_svg(capsys, tmp_path):
    out = tmp_path / "sq.svg"
    code, rep = run(capsys, "packing", "svg", "two-size-1111", "-o", str(out))
    assert code == 0 and out.read_text().startswith("<svg")
    assert rep["artifacts"]["svg"] == str(out)


def test_solve_corona(capsys):
    code, rep = run(capsys, "solve", "corona", "--word", "1111")
    assert code == 0 and rep["metrics"]["roots"] == pytest.approx([math.sqrt(2) - 1], abs=1e-12)


def test_solve_system(capsys):
    code, rep = run(capsys, "solve", "system", "--file", "figure4.codes", "--starts", "20")
    assert code == 0 and rep["details"]["max_coordinate_spread"] <= 1e-8


def test_solve_enumerate_csv(capsys, tmp_path):
    out = tmp_path / "cands.csv"
    code, rep = run(capsys, "solve", "enumerate", "--max-len", "6", "--csv", str(out))
    assert code == 0 and out.exists()
    # every fixture word has at most five letters
    assert rep["metrics"]["verified"] == 9


def test_sphere_octahedron_in_W(capsys):
    code, rep = run(capsys, "sphere", "check-w", "octahedron")
    assert code == 0 and rep["outcome"] == "pass"


def test_sphere_check_q(capsys, tmp_path):
    from compactpack.packing import canonical_triangulation

    p = fixtures.load_fixture("fcc-octahedral")
    path = tmp_path / "link.json"
    path.write_text(json.dumps(canonical_triangulation(p, p.ids[1]).to_json()))
    rho = f"{math.sqrt(2) - 1!r},1"
    code, rep = run(capsys, "sphere", "check-q", str(path), "--rho", rho)
    assert code == 0 and rep["outcome"] == "pass"
    # equal labels realize pi/3, but the octahedron's arcs are pi/2
    code, rep = run(capsys, "sphere", "check-q", "octahedron", "--rho", "1")
    assert code == 1


def test_splitmeridian_pipe(capsys, monkeypatch):
    import io

    code, doc = run(capsys, "sphere", "demo-splitmeridian", "--delta", "0.1")
    assert code == 0 and doc["metrics"]["in_W"] is False
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(doc)))
    code, rep = run(capsys, "sphere", "check-w", "-")
    assert code == 1 and rep["outcome"] == "fail"


def test_demo_darts(capsys):
    code, rep = run(capsys, "sphere", "demo-darts", "--k", "6", "--phi", "0.05")
    assert code == 0 and rep["metrics"]["grow"] > 0 and rep["metrics"]["shrink"] == 0


def test_harness_uniqueness(capsys):
    code, rep = run(capsys, "harness", "uniqueness", "--file", "square.codes")
    assert code == 0 and rep["details"]["realizer"] == pytest.approx([math.sqrt(2) - 1, 1.0], abs=1e-12)


def test_harness_bootstrap_empty(capsys):
    code, rep = run(capsys, "harness", "bootstrap", "--count", "0")
    assert code == 0 and rep["outcome"] == "info"


def test_harness_bootstrap_small(capsys):
    code, rep = run(capsys, "harness", "bootstrap", "--seed", "1", "--count", "300")
    assert code == 0 and rep["seed"] == 1 and rep["metrics"]["failures"] == 0


def test_reports_are_deterministic(capsys):
    _, a = run(capsys, "harness", "uniqueness", "--file", "square.codes", "--seed", "5")
    _, b = run(capsys, "harness", "uniqueness", "--file", "square.codes", "--seed", "5")
    a["metrics"].pop("elapsed_s"), b["metrics"].pop("elapsed_s")
    assert a == b and a["inputs_digest"]


def test_missing_file(capsys):
    code, rep = run(capsys, "packing", "verify", "does-not-exist")
    assert code == 2
