import json
import math
import subprocess
import sys
import xml.dom.minidom

import pytest

from ringharm.cli import CliError, dumps, main, parse_domain
from ringharm.domains import Annulus, Teichmuller


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if "--json" in argv else out)


def test_dumps_precision_and_specials():
    text = dumps({"x": 0.1, "y": math.inf, "z": math.nan, "w": [1, True, None, "s"]})
    obj = json.loads(text)
    assert obj == {"x": 0.1, "y": "inf", "z": None, "w": [1, True, None, "s"]}
    assert "0.10000000000000001" in text


def test_parse_domain_shorthand():
    assert parse_domain(["annulus", "r=1", "R=e"]) == Annulus(1.0, math.e)
    assert parse_domain(["teichmuller", "t=2"]) == Teichmuller(2.0)
    assert parse_domain(["annulus", "r=1", "R=exp(2)"]).R == pytest.approx(math.exp(2))


def test_parse_domain_json(tmp_path):
    path = tmp_path / "d.json"
    path.write_text('{"type": "grotzsch", "s": 3}')
    assert parse_domain([str(path)]).s == 3.0
    assert parse_domain(['{"type": "annulus", "r": 1, "R": 2}']) == Annulus(1, 2)


def test_parse_domain_errors():
    with pytest.raises(CliError) as info:
        parse_domain(["annulus", "r=2", "R=1"])
    assert info.value.code == "domains.schema"
    with pytest.raises(CliError) as info:
        parse_domain(["{not json"])
    assert info.value.code == "cli.malformed_json"


def test_modulus_closed(capsys):
    code, out = run(capsys, "modulus", "--domain", "teichmuller", "t=1", "--method", "closed", "--json")
    assert code == 0
    assert out["modulus"] == pytest.approx(math.pi, rel=1e-15)
    assert out["carleman_bound"] == "inf"


def test_modulus_grid(capsys):
    code, out = run(capsys, "modulus", "--domain", "annulus", "r=1", "R=e", "--method", "grid", "--json")
    assert code == 0 and out["method"] == "grid-solver"
    assert abs(out["modulus"] - 1) < 1e-2


def test_modulus_human_output(capsys):
    code, out = run(capsys, "modulus", "--domain", "annulus", "r=1", "R=2")
    assert code == 0 and "modulus" in out


def test_affine_modulus_with_trace(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, out = run(capsys, "affine-modulus", "--domain", "teichmuller", "t=1", "--trace", str(trace), "--json")
    assert code == 0 and out["status"] == "attained"
    assert out["affine_modulus"] == pytest.approx(math.pi)
    assert trace.read_text().startswith("rho,psi,modulus")


def test_gate_exit_codes(capsys):
    code, out = run(capsys, "gate", "--source", "annulus", "r=1", "R=3", "--target", "annulus", "r=1", "R=1.7",
                    "--json")
    assert code == 0 and out["status"] == "Exists" and out["reason"] == "TheoremA-iff"
    code, out = run(capsys, "gate", "--source", "annulus", "r=1", "R=3", "--target", "annulus", "r=1", "R=1.6",
                    "--json")
    assert code == 2 and out["status"] == "NotExists"


def test_gate_conjecture_flag(capsys):
    code, out = run(capsys, "gate", "--source", "annulus", "r=1", "R=exp(3.5)", "--target", "teichmuller", "s=1",
                    "--conjecture", "--json")
    assert out["status"] == "Unknown" and "conjectured" in out and len(out["gap"]) == 2


def test_construct_and_validate_roundtrip(capsys, tmp_path):
    mp, svg, rep = tmp_path / "map.json", tmp_path / "grid.svg", tmp_path / "report.json"
    code, out = run(capsys, "construct", "--source", "teichmuller", "s=1", "--target", "teichmuller", "s=2",
                    "--out", str(mp), "--grid-svg", str(svg), "--resolution", "60", "--samples", "100", "--json")
    assert code == 0
    assert out["stages"] == ["shear_analytic"]
    assert out["validation"]["passed"]
    xml.dom.minidom.parse(str(svg))
    code, out = run(capsys, "validate", "--map", str(mp), "--report", str(rep), "--samples", "100", "--json")
    assert code == 0 and out["passed"]
    assert json.loads(rep.read_text())["injectivity_violations"] == 0


def test_construct_power_shear(capsys):
    code, out = run(capsys, "construct", "--source", "teichmuller", "s=2", "--target", "teichmuller", "s=1.5",
                    "--samples", "100", "--json")
    assert code == 0 and out["stages"] == ["mobius_pre", "power_shear", "affine_post"]
    assert out["params"]["t"] == pytest.approx(1.5)


def test_construct_failure_code(capsys):
    code, out = run(capsys, "construct", "--source", "teichmuller", "s=1", "--target", "teichmuller", "s=20",
                    "--method", "power-shear", "--json")
    assert code == 1 and out["error"]["code"].endswith("ValueError")


def test_construct_bounded_complement(capsys):
    code, out = run(capsys, "construct", "--source", "annulus", "r=1", "R=2", "--target",
                    '{"type": "plane_minus_compact", "compact": [[-1,-1],[1,-1],[1,1],[-1,1]]}',
                    "--method", "affine", "--json")
    assert code == 1 and out["error"]["code"] == "construct.failed"


@pytest.mark.parametrize("obj,passed", [
    ({"type": "identity"}, True),
    ({"type": "rotation", "angle": 1.0}, True),
    ({"type": "disk_automorphism", "a": [0.5, 0.2]}, True),
    ({"type": "perturbation", "eps": 0.3, "n": 3}, True),
    ({"type": "perturbation", "eps": 0.5, "n": 3}, False),
    ({"type": "power", "k": 2}, False),
])
def test_weitsman_command(capsys, obj, passed):
    code, out = run(capsys, "weitsman", "--map", json.dumps(obj), "--harmonics", "64", "--json")
    assert code == 0 and out["passed"] is passed


def test_weitsman_samples_map(capsys):
    pts = [[math.cos(t), math.sin(t)] for t in (2 * math.pi * k / 64 for k in range(64))]
    code, out = run(capsys, "weitsman", "--map", json.dumps({"type": "samples", "points": pts}), "--json")
    assert code == 0 and out["passed"]
    assert out["sum01"] == pytest.approx(1.0, abs=1e-3)


def test_bad_domain_exit_code(capsys):
    code, out = run(capsys, "modulus", "--domain", "annulus", "r=3", "R=2", "--json")
    assert code == 1 and out["error"]["code"] == "domains.schema"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ringharm", "modulus", "--domain", "grotzsch", "s=3", "--json"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["modulus"] == pytest.approx(2.4557859974751309, rel=1e-13)
