import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from gogrow import cli, io
from gogrow.spectral import CharRoot

GOLDEN = Path(__file__).parent / "golden"


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    rows = list(csv.reader(text.splitlines()))
    return rows[0], np.array(rows[1:], dtype=float)


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, 1e-300, -2.5e17, np.pi):
        assert float(io.fmt(v)) == v


def test_roots_payload_schema():
    payload = io.roots_payload(2.0, "at_star", [CharRoot(complex(-1, 2), 1e-16, "at_star")])
    assert payload == {"rho": 2.0, "equilibrium": "at_star",
                       "roots": [{"re": -1.0, "im": 2.0, "residual": 1e-16}]}


def test_simulate_constant(capsys):
    code, out, _ = run(["simulate", "--rho", "1", "--phi", "const", "--value", "0.5", "--t-end", "10"], capsys)
    assert code == 0
    header, data = read_csv(out)
    assert header == ["t", "x", "theta", "w", "I"]
    assert np.all(data[:, 1] == 0.5)
    assert data[-1, 0] == 10.0


def test_simulate_figure_data(capsys):
    code, out, _ = run(["simulate", "--rho", "50", "--phi", "cos", "--a", "10", "--scale", "0.005",
                        "--t-end", "60"], capsys)
    assert code == 0
    _, data = read_csv(out)
    assert data.shape == (12001, 5)
    assert data[0, 1] == pytest.approx(0.01)
    assert 0 <= data[:, 1].min() and data[:, 1].max() < 0.1
    assert data[:, 2].max() <= 1 + 1e-9


def test_simulate_json(capsys):
    code, out, _ = run(["simulate", "--rho", "2", "--t-end", "1", "--N", "16", "--format", "json"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert list(payload) == ["t", "x", "theta", "w", "I"]
    assert len(payload["x"]) == 17


@pytest.mark.parametrize("argv", [
    ["simulate"],
    ["simulate", "--rho", "1", "--phi", "const"],
    ["simulate", "--rho", "1", "--phi", "sine"],
    ["simulate", "--rho", "-1"],
    ["simulate", "--rho", "1", "--N", "15"],
    ["simulate", "--rho", "1", "--value", "0.2"],
    ["nosuchcommand"],
    ["meanfield", "--m0", "5", "--K", "1"],
    ["heteroclinic", "--rho", "20", "--c", "0.5"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        sys.exit(cli.main(argv))
    assert exc.value.code == 2


def test_numerical_failure_exit_3(capsys):
    code, _, err = run(["simulate", "--rho", "400", "--N", "16", "--scale", "0.001", "--t-end", "30"], capsys)
    assert code == 3
    assert "numerical failure" in err


@pytest.mark.parametrize("name,argv", [
    ("simulate_rho50.csv", ["simulate", "--rho", "50", "--N", "60", "--t-end", "3"]),
    ("abm_ensemble.csv", ["abm", "--side", "10", "--runs", "3", "--seed", "1", "--t-end", "2", "--dt", "0.5"]),
    ("spectrum_rho20.json", ["spectrum", "--rho", "20", "--rect", "-1", "1", "0", "10"]),
])
def test_golden_outputs(name, argv, tmp_path):
    out = tmp_path / name
    assert cli.main(argv + ["--out", str(out)]) == 0
    assert out.read_bytes() == (GOLDEN / name).read_bytes()


def test_abm_seed_from_environment(monkeypatch, capsys):
    argv = ["abm", "--side", "10", "--t-end", "1", "--dt", "0.5"]
    monkeypatch.setenv("GOGROW_SEED", "123")
    a = run(argv, capsys)[1]
    b = run(argv, capsys)[1]
    monkeypatch.setenv("GOGROW_SEED", "124")
    c = run(argv, capsys)[1]
    assert a == b and a != c


def test_abm_config_file(tmp_path, capsys):
    cfg = tmp_path / "lattice.cfg"
    cfg.write_text("side = 8\nseeding = 1\n")
    code, out, _ = run(["abm", "--config", str(cfg), "--t-end", "1", "--dt", "0.5", "--seed", "0"], capsys)
    header, data = read_csv(out)
    assert code == 0 and header == ["t", "m_density", "p_density", "total_density"]
    assert np.all(data[:, 3] == 1.0)


def test_meanfield_and_chart(capsys):
    code, out, _ = run(["meanfield", "--t-end", "5", "--N", "20"], capsys)
    header, data = read_csv(out)
    assert code == 0 and header == ["t", "m", "p", "p_check", "total_density"]
    assert data[0, 1] == 0.05
    code, out, _ = run(["chart", "--j", "1", "--samples", "5"], capsys)
    header, data = read_csv(out)
    assert header == ["nu", "alpha", "beta"] and data.shape == (5, 3)


def test_heteroclinic_json(capsys):
    code, out, _ = run(["heteroclinic", "--rho", "20", "--c", "1e-5", "--t-end", "300"], capsys)
    res = json.loads(out)
    assert code == 0
    assert set(res) == {"rho", "c", "lambda0", "fitted_growth", "terminal_gap"}
    assert res["terminal_gap"] < 1e-6


def test_gallery_directory(tmp_path, capsys):
    code, _, _ = run(["gallery", "--rho", "100", "--out", str(tmp_path)], capsys)
    index = json.loads((tmp_path / "index.json").read_text())
    assert code == 0
    assert [s["file"] for s in index["series"]] == ["cos10.csv", "cos20.csv", "cos10t4.csv"]
    for s in index["series"]:
        assert (tmp_path / s["file"]).exists()
        assert s["dominant_period"] == pytest.approx(1.0, rel=0.1)


def test_accept_subset(capsys):
    code, out, _ = run(["accept", "--only", "1", "4"], capsys)
    assert code == 0
    assert out.count("[PASS]") == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gogrow", "simulate", "--rho", "1", "--phi", "const",
                          "--value", "0.5", "--t-end", "1", "--N", "16"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "t,x,theta,w,I"
