import json
import math
from pathlib import Path

import pytest

from levy_passage.cli import cmd_moment, main, parse_grid
from levy_passage.errors import DomainError

MODELS = Path(__file__).resolve().parent.parent / "models"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_analyze_pareto_finite(capsys):
    code, rep = run_json(capsys, "analyze", "--model", MODELS / "cl_pareto.toml", "--kappa", 1)
    assert code == 0
    o = rep["outputs"]
    assert o["verdict"] == "Finite" and o["clause"] == "Thm 3.1(ii)"
    assert o["regime"] and "mean" in o
    assert rep["model_digest"]


def test_analyze_brownian_remark(capsys):
    code, rep = run_json(capsys, "analyze", "--model", MODELS / "brownian_p0.toml", "--kappa", 0.5)
    assert code == 0
    assert rep["outputs"]["verdict"] == "Infinite" and rep["outputs"]["clause"] == "Remark(i)"


def test_malformed_toml_exit_2(capsys, tmp_path):
    f = tmp_path / "bad.toml"
    f.write_text("[model]\nkind = \n")
    code, _, err = run(capsys, "analyze", "--model", f, "--kappa", 1)
    assert code == 2 and "malformed TOML" in err


def test_unknown_key_exit_2(capsys, tmp_path):
    f = tmp_path / "bad.toml"
    f.write_text('[model]\nkind = "brownian"\np = 0\nsgima2 = 1\n')
    code, _, err = run(capsys, "analyze", "--model", f, "--kappa", 1)
    assert code == 2 and "model.sgima2" in err


def test_moment_brownian_analytic(capsys):
    code, rep = run_json(capsys, "moment", "--model", MODELS / "brownian_p0.toml", "--kappa", 0.25)
    assert code == 0
    a = rep["outputs"]["analytic"]
    assert a["method"] == "quadrature"
    assert a["value"] == pytest.approx(1.7200799746490391, rel=1e-4)


def test_moment_kappa_zero_is_usage_error(capsys):
    code, _, _ = run(capsys, "moment", "--model", MODELS / "brownian_p0.toml", "--kappa", 0)
    assert code == 2


def test_moment_both_agrees():
    rep = cmd_moment(MODELS / "cl_exp.toml", 1.0, 1.0, "both", n_paths=100_000, seed=5, t_max=500.0)
    o = rep.outputs
    assert o["analytic"]["value"] == pytest.approx(1.5, rel=1e-6)
    assert o["monte_carlo"]["method"] == "monte-carlo"
    assert o["agreement_se"] < 3


def test_moment_infinite_serialises_as_inf(capsys):
    code, rep = run_json(capsys, "moment", "--model", MODELS / "brownian_p0.toml", "--kappa", 0.6)
    assert code == 0 and rep["outputs"]["analytic"]["value"] == "inf"


def test_lt_closed_form_row(capsys, tmp_path):
    out = tmp_path / "lt.csv"
    code, rep = run_json(capsys, "lt", "--model", MODELS / "brownian_p1.toml", "--x", 1, "--q", 1,
                         "--out", out)
    assert code == 0
    row = rep["outputs"]["rows"][0]
    assert row["method"] == "closed-form"
    assert row["value"] == pytest.approx(math.exp(-(math.sqrt(3) + 1)), rel=1e-10)
    lines = out.read_text().splitlines()
    assert lines[0].split(",")[:2] == ["q", "value"] and len(lines) == 2


def test_lt_grid(capsys):
    code, rep = run_json(capsys, "lt", "--model", MODELS / "cl_exp.toml", "--q", "0:2:5")
    assert code == 0
    vals = [r["value"] for r in rep["outputs"]["rows"]]
    assert len(vals) == 5 and vals == sorted(vals, reverse=True)
    assert vals[0] == pytest.approx(0.5 * math.exp(-0.5), rel=1e-8)


@pytest.mark.parametrize("name", ["brownian_p1.toml", "cl_exp.toml", "cl_pareto.toml", "stable.toml"])
def test_scale_negative_x(capsys, name):
    code, rep = run_json(capsys, "scale", "--model", MODELS / name, "--q", 0.5, "--x", "-1")
    assert code == 0
    assert rep["outputs"]["rows"][0]["W"] == 0.0
    assert rep["outputs"]["rows"][0]["Z"] == 1.0


def test_stable_carries_experimental_warning(capsys):
    code, rep = run_json(capsys, "scale", "--model", MODELS / "stable.toml", "--x", "1")
    assert code == 0 and any("experimental" in w for w in rep["warnings"])


def test_verify_conjugacy(capsys):
    code, rep = run_json(capsys, "verify", "conjugacy")
    assert code == 0
    assert rep["outputs"]["failed"] == 0 and rep["outputs"]["passed"] >= 5


def test_verify_unknown_suite(capsys):
    code, _, err = run(capsys, "verify", "nonsense")
    assert code == 2 and "unknown suite" in err


def test_simulate_csv_and_table(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, text, _ = run(capsys, "simulate", "--model", MODELS / "cl_exp.toml", "--n-paths", 2000,
                        "--seed", 3, "--t-max", 100, "--out", out)
    assert code == 0
    assert "monte-carlo" in text
    body = out.read_text()
    assert body.startswith("# ") and "tau,undershoot" in body


def test_simulate_stable_rejected(capsys):
    code, _, err = run(capsys, "simulate", "--model", MODELS / "stable.toml", "--n-paths", 10)
    assert code == 2


def test_out_without_csv_rejected(capsys, tmp_path):
    code, _, _ = run(capsys, "analyze", "--model", MODELS / "cl_exp.toml", "--kappa", 1,
                     "--out", tmp_path / "x.csv")
    assert code == 2
    assert not (tmp_path / "x.csv").exists()


def test_bad_arguments_exit_2(capsys):
    assert run(capsys, "moment", "--kappa", 1)[0] == 2
    assert run(capsys, "simulate", "--model", MODELS / "cl_exp.toml", "--n-paths", 0)[0] == 2


def test_parse_grid():
    assert parse_grid("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_grid("1,2.5") == [1.0, 2.5]
    assert parse_grid("4") == [4.0]
    for bad in ("a", "0:1:0", "0:1"):
        with pytest.raises(DomainError):
            parse_grid(bad)
