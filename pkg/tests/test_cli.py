import json

import pytest

from hyperscatter.cli import EXIT_CONFIG, EXIT_OK, EXIT_TASK, main
from hyperscatter.emit import read_csv


def run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def report(tmp_path):
    return json.loads((tmp_path / "report.json").read_text())


def test_validate(tmp_path):
    assert run(tmp_path, "validate") == EXIT_OK
    rep = report(tmp_path)
    assert rep["schema_version"] == 1 and rep["status"]["group"] == "ok"
    for f in rep["files"]:
        assert (tmp_path / f).exists()


def test_limit_set_columns(tmp_path):
    assert run(tmp_path, "limit-set", "--format", "csv") == EXIT_OK
    header, rows = read_csv(tmp_path / "limit_cover.csv")
    assert header == ["depth", "arc_start", "arc_end"]
    assert sum(r[0] == "1" for r in rows) == 4


def test_exponent(tmp_path):
    assert run(tmp_path, "exponent") == EXIT_OK
    m = report(tmp_path)["metrics"]["exponent"]
    assert m["critical_exponent"] < 0
    assert abs(m["dimension"] - m["bisection"]) < 1e-6


def test_poincare(tmp_path):
    assert run(tmp_path, "poincare", "--format", "csv") == EXIT_OK
    header, rows = read_csv(tmp_path / "poincare.csv")
    assert header == ["exponent", "N", "partial_sum"]
    # partial sums increase with N
    sums = [float(r[2]) for r in rows if r[0] == "1"]
    assert sums == sorted(sums)


def test_resonance_scan_columns(tmp_path, thin_config):
    assert run(tmp_path, "resonances", "--format", "csv") == EXIT_OK
    header, rows = read_csv(tmp_path / "resonances.csv")
    assert header == ["re_lambda", "im_lambda", "sigma_min", "log_abs_det", "cond"]
    assert len(rows) == thin_config.spectral.scan_steps[1]


def test_cohomology_flushes_partial_results(tmp_path):
    code = run(tmp_path, "cohomology", "--config", "cohomology-table", "--format", "csv")
    assert code == EXIT_TASK
    header, rows = read_csv(tmp_path / "cohomology.csv")
    assert header[:7] == ["g", "t", "k", "h0", "h1", "q", "t_minus_q"]
    by_key = {tuple(r[:3]): r for r in rows}
    assert by_key[("1", "2", "5")][4] == "10"
    assert by_key[("0", "3", "3")][-1] == "inconsistent"
    assert report(tmp_path)["status"]["cohomology"] == "partial"


def test_bad_rational_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text('cohomology:\n  presentations:\n    "0,2":\n      - ["1", "3/0", "0", "1"]\n')
    assert run(tmp_path, "cohomology", "--config", str(cfg)) == EXIT_CONFIG
    assert "cohomology.presentations.0,2[0][1]" in capsys.readouterr().err


def test_group_required(tmp_path):
    assert run(tmp_path, "limit-set", "--config", "cohomology-table") == EXIT_TASK


def test_seed_is_recorded(tmp_path):
    assert run(tmp_path, "validate", "--seed", "42") == EXIT_OK
    assert report(tmp_path)["settings"]["seed"] == 42


def test_unknown_subcommand():
    with pytest.raises(SystemExit):
        main(["nope"])
