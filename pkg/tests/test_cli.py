import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qmacro import cli

FAST = {
    "squid-spectrum": ["n_points=256"],
    "squid-tunnel": ["n_points=256", "n_times=21"],
    "squid-wigner": ["n_points=256", "nx=32", "np=21", "n_snapshots=2"],
    "talbot-scan": ["n_angles=4"],
    "darwinism": ["n_fragments=4"],
}


def run_cli(tmp_path, *args):
    return subprocess.run([sys.executable, "-m", "qmacro", *args], capture_output=True, text=True, cwd=tmp_path)


def read_csv(path):
    lines = path.read_text().splitlines()
    header = json.loads(lines[0][2:])
    summary = {}
    for line in lines:
        if line.startswith("# summary "):
            k, v = line[len("# summary "):].split(" = ", 1)
            summary[k] = v
    rows = list(csv.DictReader(io.StringIO("\n".join(l for l in lines if not l.startswith("#")))))
    return header, summary, rows


def test_every_command_has_a_schema():
    assert set(cli.SCHEMAS) == set(cli.COMMANDS)


def test_squid_tunnel_closed_limit(tmp_path):
    out = tmp_path / "t.csv"
    assert cli.main(["squid-tunnel", "--set", "n_points=256", "--out", str(out)]) == 0
    header, summary, rows = read_csv(out)
    p = np.array([float(r["p_L"]) for r in rows])
    ref = np.array([float(r["p_L_closed_form"]) for r in rows])
    assert np.max(np.abs(p - ref)) < 1e-6
    assert header["config"]["parameters"]["gamma_ratio"] == 0.0
    assert header["tool_version"] == cli.__version__


def test_talbot_visibility_e_folding(tmp_path):
    out = tmp_path / "v.json"
    assert cli.main(["talbot-visibility", "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    ratio = np.array(doc["series"]["p_over_p0"])
    v = np.array(doc["series"]["V_over_V0"])
    k = int(np.argmin(np.abs(ratio - 1)))
    assert abs(ratio[k] - 1) < 1e-12
    assert abs(v[k] - math.exp(-1)) < 1e-12
    assert np.all(np.diff(v) < 0)


def test_macro_table(tmp_path):
    out = tmp_path / "m.csv"
    assert cli.main(["macro-table", "--out", str(out)]) == 0
    _, _, rows = read_csv(out)
    got = {r["name"]: (float(r["s_ext"]), float(r["s_ent"]), float(r["product"])) for r in rows}
    assert got["SQUID"] == (1e10, 1e9, 1e19)
    assert got["C70"] == (1e6, 1e3, 1e9)
    assert got["BEC"] == (1e7, 1e9, 1e16)


def test_config_file_and_override_precedence(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("N: 6\nkappa: 2.0\n")
    out = tmp_path / "b.csv"
    assert cli.main(["bec-cat", "--config", str(cfg), "--set", "N=8", "--out", str(out)]) == 0
    header, summary, _ = read_csv(out)
    assert header["config"]["parameters"]["N"] == 8
    assert header["config"]["parameters"]["kappa"] == 2.0
    assert summary["loss_post_support"] == "|7,0>"


def test_config_echo_reproduces_run(tmp_path):
    out = tmp_path / "a.csv"
    assert cli.main(["chain", "--set", "eps_P=0.5", "--set", "eps_R=0.2", "--set", "eps_N=1", "--out", str(out)]) == 0
    header, summary, _ = read_csv(out)
    assert float(summary["object_coherence"]) == pytest.approx(0.05, abs=1e-15)
    sets = [f"{k}={v}" for k, v in header["config"]["parameters"].items()]
    again = tmp_path / "b.csv"
    args = ["chain", "--out", str(again), "--seed", str(header["config"]["seed"])]
    for s in sets:
        args += ["--set", s]
    assert cli.main(args) == 0
    assert again.read_bytes() == out.read_bytes()


@pytest.mark.parametrize("command", sorted(cli.COMMANDS))
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_determinism(tmp_path, command, fmt):
    extra = []
    for s in FAST.get(command, []):
        extra += ["--set", s]
    outs = []
    for name in ("a", "b"):
        path = tmp_path / f"{name}.{fmt}"
        assert cli.main([command, "--format", fmt, "--seed", "3", "--out", str(path), *extra]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_csv_number_format(tmp_path):
    out = tmp_path / "t.csv"
    cli.main(["talbot-visibility", "--out", str(out)])
    _, _, rows = read_csv(out)
    assert rows[1]["V"].count("e") == 1 and len(rows[1]["V"].split("e")[0].replace(".", "").lstrip("-")) >= 13


def test_unknown_key_exit_2(tmp_path):
    r = run_cli(tmp_path, "squid-spectrum", "--set", "n_pointz=512")
    assert r.returncode == 2 and "n_pointz" in r.stderr


def test_numeric_failure_exit_3(tmp_path):
    r = run_cli(tmp_path, "squid-spectrum", "--set", "i_c=0.05")
    assert r.returncode == 3 and "double well" in r.stderr


def test_validate(tmp_path):
    good = tmp_path / "good.yaml"
    good.write_text("command: squid-spectrum\nC: 200\nn_points: 512\n")
    assert run_cli(tmp_path, "validate", str(good)).returncode == 0
    typo = tmp_path / "typo.yaml"
    typo.write_text("command: squid-spectrum\ncapacitance: 200\n")
    r = run_cli(tmp_path, "validate", str(typo))
    assert r.returncode == 2 and "capacitance" in r.stderr
    small = tmp_path / "small.yaml"
    small.write_text("command: squid-spectrum\nn_points: 10\n")
    r = run_cli(tmp_path, "validate", str(small))
    assert r.returncode == 2 and "n_points" in r.stderr and "256" in r.stderr
    broken = tmp_path / "broken.yaml"
    broken.write_text("command: [unclosed\n")
    assert run_cli(tmp_path, "validate", str(broken)).returncode == 2
    assert not list(tmp_path.glob("*.csv"))


def test_stdout_when_no_out(capsys):
    assert cli.main(["macro-table", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"]["command"] == "macro-table"


def test_atomic_write_leaves_no_temp_files(tmp_path):
    out = tmp_path / "sub" / "m.csv"
    cli.main(["macro-table", "--out", str(out)])
    assert [p.name for p in out.parent.iterdir()] == ["m.csv"]
