import json
import subprocess
import sys
from dataclasses import replace

import jsonschema
import pytest

from odelie import cli
from odelie.catalog import catalog, get, resolve_expr, run_catalog, verify_entry
from odelie.integrals import FirstIntegral
from odelie.numeric import DEFAULT_SEED, ZeroTestConfig, default_seed
from odelie.parser import parse

REPORT_SCHEMA = {
    "type": "object",
    "required": ["claim", "verdict", "maxResidual", "samples", "seed", "details"],
    "properties": {
        "claim": {"type": "string"},
        "verdict": {"enum": ["PASS", "FAIL", "INCONCLUSIVE"]},
        "maxResidual": {"type": "number"},
        "samples": {"type": "integer"},
        "seed": {"type": "string"},
        "details": {"type": "object"},
    },
}


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# catalog


def test_catalog_counts():
    counts = {k: (len(e.symmetries), len(e.integrals), len(e.multipliers)) for k, e in catalog().items()}
    assert counts == {"E1": (5, 4, 4), "E2": (5, 4, 4), "E3": (3, 0, 0)}


def test_catalog_json_round_trips():
    for entry in catalog().values():
        d = json.loads(json.dumps(entry.to_json()))
        for label, text in d["symmetries"].items():
            assert parse(text) == entry.symmetry(label).Q
        for label, text in d["integrals"].items():
            assert parse(text) == entry.integral(label).phi


def test_empty_catalog(cfg):
    assert run_catalog([], cfg) == []


@pytest.mark.parametrize("name", ["E1", "E2"])
def test_linear_entries_verify(name, cfg):
    reports = verify_entry(get(name), cfg)
    assert reports and all(r.verdict == "PASS" for r in reports), [r.claim for r in reports if r.verdict != "PASS"]


def test_e3_entry_findings(cfg):
    by_claim = {r.claim: r.verdict for r in verify_entry(get("E3"), cfg)}
    assert by_claim["X33 is a symmetry of E3"] == "PASS"
    assert by_claim["E3 integral ansatz dimension 0"] == "PASS"
    assert by_claim["X31 is a symmetry of E3"] == "FAIL"
    assert by_claim["X32 is a symmetry of E3"] == "FAIL"


def test_perturbed_integral_fails(cfg):
    entry = get("E1")
    bad = FirstIntegral(parse("u[0]+u[1]+u[2]+1.001*u[3]"), "phi1")
    reports = verify_entry(replace(entry, integrals=[bad] + entry.integrals[1:]), cfg, discovery=False)
    by_claim = {r.claim: r.verdict for r in reports}
    assert by_claim["phi1 is a first integral of E1"] == "FAIL"
    assert by_claim["phi2 is a first integral of E1"] == "PASS"


def test_reports_match_schema(cfg):
    for r in run_catalog([get("E1")], cfg, discovery=False):
        jsonschema.validate(json.loads(json.dumps(r.to_json())), REPORT_SCHEMA)


def test_reports_are_reproducible():
    cfg = ZeroTestConfig(seed=99)
    a = [r.to_json() for r in run_catalog([get("E2")], cfg)]
    b = [r.to_json() for r in run_catalog([get("E2")], cfg)]
    for x, y in zip(a, b):
        x["details"].pop("elapsed", None)
        y["details"].pop("elapsed", None)
    assert a == b
    assert all(x["seed"] == "0x63" for x in a)


def test_seed_from_environment(monkeypatch):
    monkeypatch.delenv("ODELIE_SEED", raising=False)
    assert default_seed() == DEFAULT_SEED
    monkeypatch.setenv("ODELIE_SEED", "0x10")
    assert default_seed() == 16
    assert ZeroTestConfig().seed == 16


def test_resolve_expr_labels_and_strings():
    entry = get("E1")
    assert resolve_expr(entry, "phi2", "phi")[0] == entry.integral("phi2").phi
    e, label = resolve_expr(entry, "2*phi1-phi3", "phi")
    assert label == "2*phi1-phi3"
    assert "phi" not in str(e)
    assert resolve_expr(None, "u[0]", "q")[0] == parse("u[0]")


# command line


def test_cli_verify_symmetry(capsys):
    code, out, _ = run(capsys, "verify-symmetry", "--eq", "E1", "--q", "(-1)^n")
    assert code == 0 and out.startswith("PASS")
    code, out, _ = run(capsys, "verify-symmetry", "--eq", "E1", "--q", "n")
    assert code == 1 and out.startswith("FAIL")


def test_cli_multiplier(capsys):
    code, out, _ = run(capsys, "multiplier", "--eq", "E2", "--phi", "phi1")
    assert code == 0 and out.strip() == "(n+4)/3"
    code, out, _ = run(capsys, "multiplier", "--eq", "E1", "--phi", "u[0]")
    assert code == 1


def test_cli_orbit(capsys):
    code, out, _ = run(capsys, "orbit", "--eq", "E3", "--init", "0.5,0.5,0.5,0.5", "--steps", "3")
    assert code == 0
    assert "0.8" in out.strip().split(",")


def test_cli_orbit_refuses_e2_poles(capsys):
    code, _, err = run(capsys, "orbit", "--eq", "E2", "--init", "1,1,1,1", "--n0", "0")
    assert code == 2 and "n0" in err
    code, out, _ = run(capsys, "orbit", "--eq", "E2", "--init", "1,1,1,1", "--n0", "1", "--steps", "1")
    assert code == 0 and out.strip().split(",")[-1] == "0.2"


@pytest.mark.parametrize(
    "argv",
    [
        ["verify-symmetry", "--eq", "E9", "--q", "1"],
        ["verify-symmetry", "--eq", "E1", "--q", "u[0]+"],
        ["verify-symmetry", "--eq", "E1", "--q", "u[1]"],
        ["orbit", "--eq", "E1", "--init", "1,2"],
        ["orbit", "--eq", "E1", "--init", "a,b,c,d"],
        ["deteq", "--eq", "E3", "--q", "1", "--samples", "0"],
    ],
)
def test_cli_usage_errors(argv, capsys):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_cli_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        cli.main(["verify-symmetry"])
    assert info.value.code == 2


def test_cli_json_schema(capsys):
    code, out, _ = run(capsys, "verify-integral", "--eq", "E2", "--phi", "phi3", "--json")
    assert code == 0
    jsonschema.validate(json.loads(out), REPORT_SCHEMA)


def test_cli_seed_flag(capsys):
    _, out, _ = run(capsys, "verify-integral", "--eq", "E1", "--phi", "phi1", "--json", "--seed", "0x2a")
    assert json.loads(out)["seed"] == "0x2a"


def test_cli_equation_file(tmp_path, capsys):
    path = tmp_path / "fib.json"
    path.write_text(json.dumps({"name": "F", "order": 4, "omega": "u[0]+u[1]", "domain": {"nMin": 5, "nMax": 60}}))
    code, out, _ = run(capsys, "deteq", "--eq", str(path), "--q", "3*u[0]+sin(n)")
    assert code == 0 and out.startswith("PASS")
    code, _, err = run(capsys, "find-symmetries", "--eq", str(path))
    assert code == 2 and "--basis" in err


def test_cli_discovery(capsys):
    code, out, _ = run(capsys, "find-symmetries", "--eq", "E1")
    assert code == 0 and "dimension 5" in out
    code, out, _ = run(capsys, "find-integrals", "--eq", "E2", "--json")
    assert code == 0 and json.loads(out)["dimension"] == 4
    code, out, _ = run(capsys, "find-symmetries", "--eq", "E1", "--basis", "n;n^2")
    assert code == 0 and "dimension 0" in out


def test_cli_associate_and_classify(capsys):
    code, out, _ = run(capsys, "associate", "--eq", "E2")
    assert code == 0
    assert "16/3" in out and "-8/3" in out
    code, out, _ = run(capsys, "associate", "--eq", "E1", "--q", "X13", "--phi", "phi4")
    assert out.strip() == "2"
    code, out, _ = run(capsys, "classify", "--eq", "E1", "--phi", "phi1;2*phi1")
    assert code == 0 and out.startswith("rank 1")
    code, out, _ = run(capsys, "classify", "--eq", "E1", "--json")
    assert json.loads(out)["rank"] == 4


def test_cli_catalog(capsys):
    code, out, _ = run(capsys, "catalog", "--eq", "E1")
    assert code == 0 and out.strip().endswith("passed")
    code, out, _ = run(capsys, "catalog", "--dump")
    assert code == 0 and set(json.loads(out)) == {"E1", "E2", "E3"}
    code, out, _ = run(capsys, "catalog", "--eq", "E3", "--json")
    assert code == 1
    for rep in json.loads(out):
        jsonschema.validate(rep, REPORT_SCHEMA)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "odelie", "verify-symmetry", "--eq", "E1", "--q", "X15"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("PASS")
