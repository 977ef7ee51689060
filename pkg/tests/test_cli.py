import json

import numpy as np
import pandas as pd
import pytest

from app.cli import COMMANDS, EXIT_FAIL, EXIT_OK, EXIT_USAGE, build_parser, main, parse_args, spiral_samples
from app.exceptions import ConfigError
from app.services.transforms import TetraAutParams, aut_tetrablock_closed_form

TRIVIAL = json.dumps({"kind": "trivial", "theta": 0.0})
DIAGONAL = json.dumps({
    "kind": "triangular",
    "U": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
    "V": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
    "c": [0, 0],
})


def _json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_member_inside_and_boundary(capsys):
    assert main(["member", "--domain", "tetrablock", "0", "0", "0"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["inside"] is True and out["margin"] == 1.0

    assert main(["member", "1", "0", "0"]) == EXIT_FAIL
    out = json.loads(capsys.readouterr().out)
    assert out["boundary"] is True


def test_member_complex_arguments(capsys):
    assert main(["member", "--domain", "g2", "0.3,0.1", "0.05"]) == EXIT_OK
    assert main(["member", "-0.5", "0", "0"]) == EXIT_OK


def test_member_usage_errors(capsys):
    assert main(["member", "abc", "0", "0"]) == EXIT_USAGE
    assert main(["member", "0", "0"]) == EXIT_USAGE
    assert main(["member", "--domain", "ellipsoid", "0", "0", "0"]) == EXIT_USAGE


def test_tolerance_overrides():
    _, overrides = parse_args(["member", "--tol.tol_eq=1e-6", "0", "0", "0"])
    assert overrides == {"tol_eq": 1e-6}
    with pytest.raises(ConfigError):
        parse_args(["member", "--tol.bogus=1", "0", "0", "0"])
    assert main(["member", "--tol.bogus=1", "0", "0", "0"]) == EXIT_USAGE
    assert main(["member", "--tol.tol_eq=-1", "0", "0", "0"]) == EXIT_USAGE


def test_rho_and_aut(capsys):
    assert main(["rho", "0.5", "0.5", "0.25"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["rho"] == pytest.approx(0.5)

    assert main(["aut", "0.1", "0.2", "0.02", "--a1", "0.3"]) == EXIT_OK
    moved = json.loads(capsys.readouterr().out)["point"]
    expected = aut_tetrablock_closed_form(TetraAutParams(a1=0.3), [0.1, 0.2, 0.02])
    assert np.allclose([complex(*p) for p in moved], expected, atol=1e-12)


def test_spiral_samples():
    lam = spiral_samples(16)
    assert lam[0] == 0
    assert np.all(np.abs(lam) < 0.95)


def test_geodesic_trivial_rows(capsys):
    assert main(["geodesic", "--spec", TRIVIAL, "--samples", "4"]) == EXIT_OK
    rows = _json_lines(capsys.readouterr().out)
    assert [r["k"] for r in rows] == [0, 1, 2, 3]
    for r in rows:
        assert r["f1_re"] == 0 and r["f2_im"] == 0
        assert r["f3_re"] == r["lam_re"] and r["f3_im"] == r["lam_im"]


def test_geodesic_csv_to_file(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    assert main(["geodesic", "--spec", TRIVIAL, "--samples", "8", "--format", "csv", "--out", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    lines = out.read_text().splitlines()
    assert lines[0].startswith("k,lam_re,lam_im")
    assert len(lines) == 9
    frame = pd.read_csv(out, float_precision="round_trip")
    lam = spiral_samples(8)
    assert np.array_equal(frame["lam_re"].to_numpy(), lam.real)
    assert np.array_equal(frame["lam_im"].to_numpy(), lam.imag)


def test_bad_spec_is_a_usage_error(capsys):
    assert main(["geodesic", "--spec", '{"kind": "nope"}']) == EXIT_USAGE
    bad_beta = json.dumps({"kind": "nontriangular", "a": [1, 0], "b": [0, 0], "c": [0, 0],
                           "d": [1, 0], "mu": [0.5, 0], "beta": 1.5})
    assert main(["geodesic", "--spec", bad_beta]) == EXIT_USAGE


def test_leftinv_on_diagonal_disc(capsys):
    assert main(["leftinv", "--spec", DIAGONAL, "--samples", "16"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["left_inverse"]["kind"] == "psi_family"
    assert out["residual"] <= 1e-10


def test_leftinv_spec_from_file(tmp_path, capsys):
    path = tmp_path / "spec.json"
    path.write_text(TRIVIAL)
    assert main(["leftinv", "--spec", f"@{path}"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["left_inverse"]["kind"] == "direct"


def test_lift_trivial_disc_through_origin(capsys):
    assert main(["lift", "--spec", TRIVIAL, "--n", "0", "--m", "1"]) == EXIT_OK
    certificate = json.loads(capsys.readouterr().out)
    assert certificate["orders"] == [0, 1]
    assert certificate["projection_residual"] <= 1e-12


def test_lift_trivial_disc_without_factoring_fails(capsys):
    assert main(["lift", "--spec", TRIVIAL]) == EXIT_FAIL
    assert "lift_through_T_origin" in capsys.readouterr().err


def test_verify_unknown_suite(capsys):
    assert main(["verify", "--suite", "speed"]) == EXIT_USAGE


def test_verify_is_reproducible(capsys):
    args = ["verify", "--suite", "equality", "--n", "3", "--seed", "7", "--no-progress"]
    assert main(args) == EXIT_OK
    first = capsys.readouterr().out
    assert main(args) == EXIT_OK
    assert capsys.readouterr().out == first
    assert len(_json_lines(first)) == 3


def test_seed_falls_back_to_environment(monkeypatch, capsys):
    args = ["verify", "--suite", "psh", "--n", "2", "--no-progress"]
    monkeypatch.setenv("TETRA_SEED", "9")
    assert main(args) == EXIT_OK
    from_env = capsys.readouterr().out
    assert main(args + ["--seed", "9"]) == EXIT_OK
    assert capsys.readouterr().out == from_env


def test_witness_command(capsys):
    assert main(["witness", "--seed", "7", "--budget", "200000"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["found"] is True
    assert main(["witness", "--seed", "7", "--budget", "5000", "--domain", "polydisc"]) == EXIT_FAIL


def test_sandwich_reports_bounds_without_verdict(capsys):
    assert main(["sandwich", "0", "0", "0", "0", "0", "0.5"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["lower"] == pytest.approx(np.arctanh(0.5), abs=1e-9)
    assert out["upper"] == pytest.approx(np.arctanh(np.sqrt(0.5)), abs=1e-12)
    assert out["lower"] <= out["upper"]
    assert out["z"] == [[0.0, 0.0], [0.0, 0.0], [0.5, 0.0]]
    assert set(out) == {"w", "z", "lower", "upper", "notes"}


def test_sandwich_outside_point_and_arity(capsys):
    assert main(["sandwich", "0", "0", "0", "0.9", "0.9", "0"]) == EXIT_FAIL
    assert "DomainError" in capsys.readouterr().err
    assert main(["sandwich", "0", "0", "0", "0", "0"]) == EXIT_USAGE


def test_every_command_is_registered_and_described():
    subparsers = next(a for a in build_parser()._actions if a.dest == "command")
    assert set(subparsers.choices) == set(COMMANDS)
    for name, handler in COMMANDS.items():
        assert handler.__doc__, name
