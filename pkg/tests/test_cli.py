from __future__ import annotations

import re
import subprocess
import sys

import numpy as np
import pytest

from tempfrac.cli import SCHEMAS, ConfigError, main, parse_config
from tempfrac.fitting import SignalModel, eval_model

BENCH = """\
[problem]
alpha = 0.8
rho = 0.5
k0 = 2
u0 = 1

[mesh]
N = 320

[scheme]
name = L1
"""


@pytest.fixture
def bench_ini(tmp_path):
    path = tmp_path / "bench.ini"
    path.write_text(BENCH)
    return path


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_bench_reproduces_reference_error(capsys, bench_ini, tmp_path):
    out_csv = tmp_path / "u.csv"
    code, out, _ = _run(capsys, "bench", bench_ini, "-o", out_csv)
    assert code == 0
    assert "error_max=4.1541E-04" in out
    lines = out_csv.read_text().splitlines()
    assert lines[0].startswith("# command=bench")
    data = np.loadtxt([l for l in lines if not l.startswith("#")][1:], delimiter=",")
    assert data.shape == (321, 4)


def test_set_overrides_file_value(capsys, bench_ini):
    code, out, _ = _run(capsys, "bench", bench_ini, "--set", "N=640")
    assert code == 0 and "N=640" in out
    code, out, _ = _run(capsys, "bench", bench_ini, "--set", "mesh.N=160")
    assert code == 0 and "N=160" in out


def test_missing_config_file(capsys, tmp_path):
    missing = tmp_path / "nope.ini"
    code, _, err = _run(capsys, "bench", missing)
    assert code != 0
    assert str(missing) in err


def test_invalid_alpha_is_reported(capsys, bench_ini):
    code, _, err = _run(capsys, "bench", bench_ini, "--set", "alpha=1.2")
    assert code == 2
    assert "alpha must lie in (0,1)" in err and "1.2" in err


def test_unknown_keys_reported_with_lines(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text(BENCH.replace("k0 = 2", "k0 = 2\nkappa = 3") + "\n[extra]\nx = 1\n")
    with pytest.raises(ConfigError) as info:
        parse_config("bench", str(path))
    text = str(info.value)
    assert f"{path}:5: unknown key 'kappa' in [problem]" in text
    assert re.search(r"bad\.ini:\d+: unknown section \[extra\]", text)


def test_missing_required_and_bad_values():
    with pytest.raises(ConfigError) as info:
        parse_config("bench", None, ["N=abc"])
    text = str(info.value)
    assert "missing required key problem.alpha" in text
    assert "mesh.N" in text
    with pytest.raises(ConfigError, match="ambiguous|unknown"):
        parse_config("study", None, ["name=L1", "nonsense=1"])


def test_keys_listing(capsys):
    code, out, _ = _run(capsys, "soe-check", "--keys")
    assert code == 0
    assert "problem.beta: float (required)" in out
    assert set(SCHEMAS) == {"bench", "bloch", "diffusion", "twolayer", "soe-check", "fit", "study"}


def test_soe_check(capsys):
    code, out, _ = _run(capsys, "soe-check", "--set", "beta=1.5", "--set", "eps=1e-6")
    assert code == 0
    n_exp = int(re.search(r"n_exp=(\d+)", out).group(1))
    rel = float(re.search(r"max_rel_error=(\S+)", out).group(1))
    assert 0 < n_exp <= 2000 and rel <= 1e-6


def test_outputs_are_byte_identical(capsys, bench_ini, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    _run(capsys, "bench", bench_ini, "-o", a)
    _run(capsys, "bench", bench_ini, "-o", b)
    assert a.read_bytes() == b.read_bytes()


def test_study_outputs_match_except_timing(capsys, tmp_path):
    def strip(path):
        text = path.read_text().splitlines()
        return [line.rsplit(",", 1)[0] for line in text if not line.startswith("# date=")]

    args = ["study", "--set", "problem=benchmark", "--set", "resolutions=40 80 160", "--set", "alpha=0.6"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    code, out, _ = _run(capsys, *args, "-o", a)
    assert code == 0 and "order=" in out
    _run(capsys, *args, "-o", b)
    assert strip(a) == strip(b)


def test_bloch_smoke(capsys):
    code, out, _ = _run(capsys, "bloch", "--set", "alpha=0.8", "--set", "rho=0.5", "--set", "N=200")
    assert code == 0 and "error_Mz=" in out


def test_diffusion_smoke(capsys):
    args = ["diffusion", "--set", "alpha=0.8", "--set", "rho=0.5", "--set", "N=100", "--set", "M=20"]
    code, out, _ = _run(capsys, *args)
    assert code == 0 and "error_final=" in out
    code, out, _ = _run(capsys, *args, "--set", "name=FastL1")
    assert code == 0 and "scheme=FastL1" in out
    code, _, err = _run(capsys, *args, "--set", "initial=box")
    assert code == 1 and "problem.initial" in err


def test_twolayer_smoke(capsys):
    args = ["twolayer"] + [
        f"--set={kv}"
        for kv in ("alpha1=0.9", "rho1=0.1", "D1=0.25", "alpha2=0.8", "rho2=0.5", "D2=0.5", "N=100", "M=40", "T=0.1")
    ]
    code, out, _ = _run(capsys, *args)
    assert code == 0
    assert float(re.search(r"max_deviation=(\S+)", out).group(1)) < 2e-2


def test_fit_smoke(capsys, tmp_path):
    t = np.linspace(0.0, 100.0, 41)
    y = eval_model(SignalModel("monoexp", (50.0, 20.0, 1.0)), t)
    data = tmp_path / "signal.csv"
    np.savetxt(data, np.column_stack([t, y]), delimiter=",", header="t,signal", comments="")
    code, out, _ = _run(capsys, "fit", "--set", f"data={data}", "--set", "model=monoexp")
    assert code == 0
    assert float(re.search(r"monoexp_mse=(\S+)", out).group(1)) < 1e-8


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tempfrac.cli", "soe-check", "--set", "beta=1.8"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("soe-check")


def test_thread_limit_environment(capsys, monkeypatch):
    monkeypatch.setenv("TEMPFRAC_THREADS", "1")
    code, out, _ = _run(capsys, "soe-check", "--set", "beta=1.5")
    assert code == 0 and out.startswith("soe-check")
    monkeypatch.setenv("TEMPFRAC_THREADS", "0")
    code, _, err = _run(capsys, "soe-check", "--set", "beta=1.5")
    assert code == 1 and "TEMPFRAC_THREADS" in err
