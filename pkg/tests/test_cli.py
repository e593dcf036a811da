import json
import subprocess
import sys

import pytest

from schottky_zeta import cli
from schottky_zeta.schottky import GroupSpec
from schottky_zeta.moebius import INF


def run(*argv):
    return cli.run(list(argv))


def write_spec(tmp_path, triples, name="spec.json", **kw):
    p = tmp_path / name
    p.write_text(json.dumps(GroupSpec.from_fixed_points(triples, **kw).to_dict()))
    return str(p)


def test_validate_corpus():
    report, code = run("validate", "--spec", "genus2_real")
    assert code == 0 and report.status == "ok"
    assert report.checks["circles_valid"]["pass"]
    assert report.results["delta_estimate"] < 1


def test_validate_genus1():
    report, code = run("validate", "--spec", "genus1")
    assert code == 0 and report.results["group"]["genus"] == 1


def test_validate_overlap_is_error(tmp_path):
    path = write_spec(tmp_path, [(0, INF, 0.5), (0.1, 0.2, 0.5)], strict=True)
    report, code = run("validate", "--spec", path)
    assert code == 2 and report.status == "error"
    assert report.results["error"]["type"] == "CirclesOverlap"


@pytest.mark.parametrize("content", ["{not json", json.dumps({"genus": 1})])
def test_bad_input(tmp_path, content):
    p = tmp_path / "bad.json"
    p.write_text(content)
    report, code = run("validate", "--spec", str(p))
    assert code == 2 and report.results["error"]["type"] == "SpecError"


def test_missing_file():
    _, code = run("validate", "--spec", "/nonexistent/x.json")
    assert code == 2


def test_products_real_group():
    report, code = run("products", "--spec", "genus2_real", "--k", "2,3")
    assert code == 0
    for name in ("mumford_ratio_k2", "mumford_ratio_k3", "modified_ruelle_k2", "modified_ruelle_k3"):
        assert report.checks[name]["pass"] and report.checks[name]["value"] < 1e-9
    assert "ruelle_s2" in report.results and "F3" in report.results


def test_products_complex_group_skips_ruelle():
    report, code = run("products", "--spec", "genus2_complex", "--max-word-len", "8")
    assert code == 0
    assert "modified_ruelle_k2" not in report.checks
    assert any("not real" in w for w in report.warnings)


def test_products_tiny_multipliers(tmp_path):
    path = write_spec(tmp_path, [(0, INF, 1e-15), (1, 2, 1e-15)])
    report, code = run("products", "--spec", path, "--max-word-len", "6")
    assert code == 0
    for key in ("F1", "F2", "ruelle_s2"):
        re, im = report.results[key]["value"]
        assert abs(re - 1) < 1e-12 and abs(im) < 1e-12


def test_products_genus1_surfaces_genus_too_small():
    report, code = run("products", "--spec", "genus1", "--k", "2")
    assert code == 2 and report.results["error"]["type"] == "GenusTooSmall"
    assert "F1" in report.results


def test_products_identity_failure_exit_code():
    # a tolerance nobody can meet turns the identities into failures
    report, code = run("products", "--spec", "genus2_real", "--tol", "1e-30", "--max-word-len", "6")
    assert code == 1 and report.status == "fail"


def test_products_bad_k():
    _, code = run("products", "--spec", "genus2_real", "--k", "1")
    assert code == 2


def test_pairing_corpus():
    report, code = run("pairing", "--spec", "genus2_real", "--max-word-len", "6")
    assert code == 0
    assert report.checks["normalization"]["value"] < 1e-6
    assert report.checks["duality"]["value"] < 1e-8
    re, im = report.to_dict()["results"]["periods"]["Omega_1"]
    assert abs(re - 1) < 1e-8 and abs(im) < 1e-8


def test_pairing_user_periods(tmp_path):
    d = GroupSpec.from_fixed_points([(0, INF, 0.04), (1, 2, 0.06)]).to_dict()
    d["periods"] = {"coeff_1": [[2, 0], [0, 1]], "coeff_k": [[1, 0, 0], [0, 3, 0], [0, 0, 1]]}
    p = tmp_path / "p.json"
    p.write_text(json.dumps(d))
    report, code = run("pairing", "--spec", str(p), "--max-word-len", "6")
    assert code == 0
    periods = report.to_dict()["results"]["periods"]
    assert abs(periods["Omega_1"][0] - 2) < 1e-8
    assert abs(periods["Omega_k"][0] - 3) < 1e-12


def test_pairing_genus1():
    report, code = run("pairing", "--spec", "genus1")
    assert code == 0 and "pairing" not in report.results


def test_pairing_scale_family(tmp_path):
    path = write_spec(tmp_path, [(0, 3, 1.0), (1 + 1.5j, 2.5 - 1j, 0.8)])
    report, code = run("pairing", "--spec", path, "--scale-family")
    assert code == 0
    assert abs(report.results["det_leading_order"]["exponent"] - 1) < 0.05


def test_tate_delta():
    report, code = run("tate", "--N", "10", "--which", "delta")
    assert code == 0
    assert report.results["delta"] == ["0", "1", "-24", "252", "-1472", "4830", "-6048",
                                       "-16744", "84480", "-113643", "-115920"]


def test_tate_disc_check():
    report, code = run("tate", "--N", "50", "--which", "disc-check,a6")
    assert code == 0 and report.results["disc-check"]["equal"]
    assert report.results["a6"][:3] == ["0", "-1", "-23"]


def test_tate_N1():
    report, code = run("tate", "--N", "1", "--which", "s1,s3,s5,a4,a6,delta")
    assert code == 0
    assert report.results["s1"] == ["0", "1"] and report.results["a4"] == ["0", "-5"]
    assert report.results["delta"] == ["0", "1"]


@pytest.mark.parametrize("args", [["--N", "0"], ["--which", "s7"]])
def test_tate_bad(args):
    _, code = run("tate", *args)
    assert code == 2


def test_report_roundtrip_byte_identical():
    report, _ = run("products", "--spec", "genus2_real", "--max-word-len", "6")
    text = report.to_json()
    assert cli.RunReport.from_json(text).to_json() == text


def test_sequential_runs_reproducible():
    a, _ = run("products", "--spec", "genus2_complex", "--max-word-len", "7", "--threads", "1")
    b, _ = run("products", "--spec", "genus2_complex", "--max-word-len", "7", "--threads", "1")
    a.timing = b.timing = {}
    assert a.to_json() == b.to_json()


def test_spec_echo():
    report, _ = run("products", "--spec", "genus2_real", "--max-word-len", "4")
    assert report.inputs["resolved"]["generators"][1]["beta"] == [2.0, 0.0]
    assert report.inputs["spec"]["schema"] == "schottky-zeta/1"


def test_threads_env(monkeypatch):
    monkeypatch.setenv("SCHOTTKY_ZETA_THREADS", "2")
    args = cli.build_parser().parse_args(["products", "--spec", "genus2_real"])
    assert cli._threads(args) == 2
    args = cli.build_parser().parse_args(["products", "--spec", "genus2_real", "--threads", "1"])
    assert cli._threads(args) == 1


def test_main_pretty_and_out(tmp_path, capsys):
    out = tmp_path / "r.txt"
    code = cli.main(["tate", "--N", "5", "--which", "disc-check", "--pretty", "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert "PASS" in text and "discriminant_equals_delta" in text
    assert capsys.readouterr().out == ""
    code = cli.main(["tate", "--N", "3"])
    assert json.loads(capsys.readouterr().out)["results"]["delta"] == ["0", "1", "-24", "252"]


def test_console_script_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "schottky_zeta.cli", "validate", "--spec", "genus1"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "ok"
