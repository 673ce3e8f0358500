import csv
import json

import pytest

from tfwd import cli


def run(tmp_path, *args):
    return cli.main([*args, "--out", str(tmp_path)])


def geometry(tmp_path, **body):
    path = tmp_path / "geo.json"
    path.write_text(json.dumps(body))
    return str(path)


def test_verify_passes(tmp_path, capsys):
    assert run(tmp_path, "verify") == cli.EXIT_OK
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["n_checks"] >= 12 and report["n_failed"] == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == report["n_checks"] and all(line.startswith("PASS") for line in lines)


def test_verify_detects_injected_fault(tmp_path, capsys):
    assert run(tmp_path, "verify", "--inject-fault", "tf") == cli.EXIT_CHECK
    report = json.loads((tmp_path / "verify.json").read_text())
    failed = {c["name"] for c in report["checks"] if not c["passed"]}
    assert "tfls_lower_bound" in failed
    assert "FAIL  tfls_lower_bound" in capsys.readouterr().out


def test_sweep_single_Z_and_determinism(tmp_path):
    assert run(tmp_path, "sweep", "--Z-range", "20:20:10", "--kappa", "1") == cli.EXIT_OK
    first = (tmp_path / "sweep.csv").read_bytes()
    rows = list(csv.DictReader(first.decode().splitlines()))
    assert len(rows) == 1 and float(rows[0]["Z"]) == 20.0
    assert float(rows[0]["lower"]) <= float(rows[0]["upper"])
    manifest = (tmp_path / "manifest_sweep.json").read_bytes()
    assert run(tmp_path, "sweep", "--Z-range", "20:20:10", "--kappa", "1") == cli.EXIT_OK
    assert (tmp_path / "sweep.csv").read_bytes() == first
    assert (tmp_path / "manifest_sweep.json").read_bytes() == manifest


def test_manifest_contents(tmp_path):
    assert run(tmp_path, "specfun-table", "--nodes", "50") == cli.EXIT_OK
    m = json.loads((tmp_path / "manifest_specfun_table.json").read_text())
    assert m["outputs"] == ["specfun_table.csv"]
    assert {"numpy", "scipy", "python"} <= set(m["versions"])
    assert m["config"]["nodes"] == 50


def test_specfun_table(tmp_path):
    assert run(tmp_path, "specfun-table", "--nodes", "50") == cli.EXIT_OK
    rows = list(csv.reader((tmp_path / "specfun_table.csv").read_text().splitlines()))
    assert rows[0] == ["t", "f_sq", "F", "tf", "X"]
    assert len(rows) == 51


def test_tf_and_tfw_solve(tmp_path):
    assert run(tmp_path, "tf-solve", "--Z", "10") == cli.EXIT_OK
    tf = json.loads((tmp_path / "tf.json").read_text())
    assert (tmp_path / "tf_density.csv").read_text().startswith("r,rho")
    assert run(tmp_path, "tfw-solve", "--Z", "10") == cli.EXIT_OK
    tfw = json.loads((tmp_path / "tfw.json").read_text())
    assert json.dumps(tf) and json.dumps(tfw)


def test_energy_from_density_file(tmp_path):
    assert run(tmp_path, "tfw-solve", "--Z", "10") == cli.EXIT_OK
    dens = str(tmp_path / "tfw_density.csv")
    assert run(tmp_path, "energy", "--Z", "10", "--kappa", "0.5", "--density", dens) == cli.EXIT_OK
    body = json.loads((tmp_path / "energy.json").read_text())
    assert body["total"] == pytest.approx(body["W"] + body["TF"] - body["X"] + body["V_ne"] + body["D_ee"] + body["U_nn"])


def test_stability_empty_nuclei(tmp_path, capsys):
    geo = geometry(tmp_path, centers=[], charges=[])
    assert run(tmp_path, "stability", "--config", geo) == cli.EXIT_USAGE
    assert "no nuclei" in capsys.readouterr().err


def test_stability_hydrogen_feasible(tmp_path):
    geo = geometry(tmp_path, centers=[[0, 0, 0], [0, 0, 1.4]], charges=[1, 1], N=2)
    assert run(tmp_path, "stability", "--config", geo) == cli.EXIT_OK
    body = json.loads((tmp_path / "stability.json").read_text())
    assert body["feasible"] and body["violations"] == []
    for key in ("term_2", "term_3a", "term_4a", "term_5a", "repulsion", "linear_N"):
        assert key in body


def test_stability_above_z_max(tmp_path):
    geo = geometry(tmp_path, centers=[[0, 0, 0], [0, 0, 2.0]], charges=[500, 500])
    assert run(tmp_path, "stability", "--config", geo) == cli.EXIT_CHECK
    body = json.loads((tmp_path / "stability.json").read_text())
    assert not body["feasible"]
    assert len(body["violations"]) == 2 and "atom 0" in body["violations"][0]


@pytest.mark.parametrize(
    "args",
    [
        ["sweep", "--Z-range", "50:10:10"],
        ["sweep", "--Z-range", "abc"],
        ["tf-solve", "--Z", "10", "--kappa", "-1"],
        ["tf-solve"],
        ["stability"],
        ["energy", "--Z", "10", "--density", "/nonexistent/rho.csv"],
    ],
)
def test_usage_errors(tmp_path, args):
    assert run(tmp_path, *args) == cli.EXIT_USAGE


def test_unknown_command_exits_2(tmp_path):
    assert run(tmp_path, "bogus") == cli.EXIT_USAGE


def test_solver_failure(tmp_path, capsys):
    assert run(tmp_path, "tfw-solve", "--Z", "10", "--tol", "1e-30") == cli.EXIT_SOLVER
    assert "did not converge" in capsys.readouterr().err


def test_parse_z_range():
    assert cli.parse_z_range("20:100:20") == [20.0, 40.0, 60.0, 80.0, 100.0]
    assert cli.parse_z_range("1:3") == [1.0, 2.0, 3.0]
    for bad in ("1:2:3:4", "0:10:1", "5:1:1", "1:5:0"):
        with pytest.raises(cli.UsageError):
            cli.parse_z_range(bad)
