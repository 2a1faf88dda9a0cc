import csv
import io
import json

import pytest
from mvprolate import __version__
from mvprolate.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_verify_default_configuration(capsys):
    code, out = run(capsys, "verify", "--n", "4", "--p", "1", "--N", "10", "--alpha", "0.3")
    assert code == 0

    payload = json.loads(out)
    assert list(payload) == ["params", "checks", "tool_version"]
    assert payload["tool_version"] == __version__
    assert payload["params"]["N"] == 10
    assert all(c["pass"] for c in payload["checks"])
    assert all(c["residual"] <= 1e-9 for c in payload["checks"] if c["tolerance"] <= 1e-9)


def test_invalid_parameters_exit_2(capsys):
    code = main(["verify", "--p", "5", "--n", "4"])
    assert code == 2
    assert "0 < p < n" in capsys.readouterr().err


def test_invalid_alpha_exit_2():
    assert main(["spectrum", "--alpha", "1.5"]) == 2


def test_mutation_exit_1(capsys):
    code, out = run(capsys, "verify", "--mutate", "drop-e0")
    assert code == 1
    checks = {c["name"]: c for c in json.loads(out)["checks"]}
    assert not checks["commutator"]["pass"]
    assert checks["commutator"]["residual"] > 1e-4


def test_verify_csv_and_anomalies(capsys):
    code, out = run(capsys, "verify", "--N", "3", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["name", "residual", "tolerance", "pass"]
    assert all(r[3] == "true" for r in rows[1:])

    code, out = run(capsys, "verify", "--N", "3", "--report-anomalies")
    anomalies = json.loads(out)["anomalies"]
    assert set(anomalies) == {"norm_ratio", "h_prefactor"}


def test_spectrum_csv(capsys):
    code, out = run(capsys, "spectrum", "--N", "15", "--alpha", "0.3", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "index,b_eig,s_eig,cross_residual,cluster"
    assert len(lines) == 33
    # full-precision scientific notation
    assert "e" in lines[1].split(",")[1]


def test_spectrum_json_and_eigenfunctions(capsys, tmp_path):
    target = tmp_path / "modes.csv"
    code, out = run(capsys, "spectrum", "--N", "4", "--eigenfunctions", str(target))
    assert code == 0
    payload = json.loads(out)
    assert list(payload) == ["params", "spectrum", "tool_version"]
    assert len(payload["spectrum"]["modes"]) == 10

    lines = target.read_text().splitlines()
    assert lines[0] == "mode,x,f1,f2"
    assert len(lines) == 1 + 10 * 201


def test_kernel_check(capsys):
    code, out = run(capsys, "kernel-check", "--grid", "12")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 144
    assert all(float(r["residual"]) <= float(r["bound"]) for r in rows)


def test_reconstruct_noiseless(capsys):
    code, out = run(capsys, "reconstruct", "--noise", "0", "--modes", "all", "--alpha", "0.9")
    assert code == 0
    payload = json.loads(out)
    assert list(payload) == ["params", "reconstruction", "tool_version"]
    assert payload["reconstruction"]["relative_error"] <= 1e-8


def test_reconstruct_csv(capsys):
    code, out = run(capsys, "reconstruct", "--N", "4", "--noise", "0.01", "--modes", "4", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x", "truth_f1", "truth_f2", "recovered_f1", "recovered_f2"]
    assert len(rows) == 1 + 4 * 10


def test_deterministic_output(capsys):
    argv = ["reconstruct", "--N", "4", "--noise", "0.05", "--seed", "7"]
    _, first = run(capsys, *argv)
    _, second = run(capsys, *argv)
    assert first == second

    _, other = run(capsys, *argv[:-1], "8")
    assert other != first


def test_output_file(tmp_path, capsys):
    target = tmp_path / "spectrum.json"
    assert main(["spectrum", "--N", "3", "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text())["params"]["N"] == 3


def test_io_error_exit_3(tmp_path):
    target = tmp_path / "missing" / "out.json"
    assert main(["spectrum", "--N", "3", "--out", str(target)]) == 3


def test_bad_modes_rejected():
    with pytest.raises(SystemExit) as info:
        main(["reconstruct", "--modes", "some"])
    assert info.value.code == 2


def test_default_formats_per_command(capsys):
    """kernel-check defaults to CSV without changing the JSON default of the others."""
    code, out = run(capsys, "kernel-check", "--N", "2", "--grid", "2")
    assert out.startswith("x,y,residual,bound")

    code, out = run(capsys, "verify", "--N", "2", "--report-anomalies")
    assert code == 0
    assert "norm_ratio" in json.loads(out)["anomalies"]

    code, out = run(capsys, "kernel-check", "--N", "2", "--grid", "2", "--format", "json")
    assert len(json.loads(out)["checks"]) == 4


def test_anomalies_need_json(capsys):
    assert main(["verify", "--N", "2", "--format", "csv", "--report-anomalies"]) == 2
    assert "JSON" in capsys.readouterr().err


def test_reconstruct_cutoff_by_default(capsys):
    argv = ["reconstruct", "--N", "6", "--alpha", "0.3", "--noise", "0.1"]
    _, cutoff = run(capsys, *argv)
    _, every = run(capsys, *argv, "--modes", "all")
    assert json.loads(every)["reconstruction"]["modes_kept"] == 14
    report = json.loads(cutoff)["reconstruction"]
    assert report["modes_kept"] < 14
    assert report["smallest_kept_s"] >= 0.01
