import numpy as np
import pytest

from mtbbm.cli import main


def run_cli(*argv):
    return main(list(argv))


def test_validate_builtin_and_file(tmp_path, capsys):
    assert run_cli("validate", "--model", "A") == 0
    out = capsys.readouterr().out
    assert "PASS" in out

    bad = tmp_path / "bad.txt"
    bad.write_text(
        "types = 2\nrate 1 = 1.0\nrate 2 = 1.0\n"
        "offspring 1:\n  0 2  1.0\noffspring 2:\n  0 2  1.0\n"
    )
    assert run_cli("validate", "--model", str(bad)) == 1
    assert "reducible" in capsys.readouterr().out


def test_missing_model_file_exit_code(capsys):
    code = run_cli("validate", "--model", "definitely/not/here.txt")
    assert code == 2
    assert "definitely/not/here.txt" in capsys.readouterr().err


def test_spectral_output(capsys):
    assert run_cli("spectral", "--model", "C") == 0
    out = capsys.readouterr().out
    assert "lambda_star" in out and "type,g,h,mu" in out


def test_simulate_deterministic_csv(tmp_path):
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for f in (f1, f2):
        assert run_cli("simulate", "--model", "B", "--t", "1.0", "--reps", "5",
                       "--seed", "99", "--out", str(f)) == 0
    assert f1.read_bytes() == f2.read_bytes()
    header = f1.read_text().splitlines()[0]
    assert header == "replicate,t,type,position"


def test_simulate_stats_mode(tmp_path):
    f = tmp_path / "stats.csv"
    assert run_cli("simulate", "--model", "A", "--t", "1.0", "--reps", "3",
                   "--seed", "1", "--stats", "--out", str(f)) == 0
    lines = f.read_text().splitlines()
    assert lines[0] == "replicate,t,n_particles,max,min,W,M"
    assert len(lines) == 4


def test_spine_check(tmp_path, capsys):
    f = tmp_path / "m2o.csv"
    assert run_cli("spine-check", "--model", "A", "--t", "1.0", "--reps", "5000",
                   "--H", "left-half", "--seed", "3", "--out", str(f)) == 0
    lines = f.read_text().splitlines()
    assert lines[0] == "side,estimate,se,n,seed"
    assert lines[1].startswith("branching,") and lines[2].startswith("spine,")
    assert run_cli("spine-check", "--model", "A", "--t", "1.0", "--H", "nope") == 2


def test_solve_fkpp_csv(tmp_path):
    f = tmp_path / "pde.csv"
    assert run_cli("solve-fkpp", "--model", "A", "--ic", "heaviside",
                   "--t-end", "1.0", "--out", str(f)) == 0
    lines = f.read_text().splitlines()
    assert lines[0] == "t,x,type,value"
    # 18 significant digits in scientific notation
    assert "e" in lines[1].split(",")[3]


def test_solve_fkpp_constant_and_typed(tmp_path):
    assert run_cli("solve-fkpp", "--model", "B", "--ic", "typed-heaviside:2",
                   "--t-end", "0.5", "--out", str(tmp_path / "t.csv")) == 0
    assert run_cli("solve-fkpp", "--model", "A", "--ic", "constant:0.3",
                   "--t-end", "0.5", "--out", str(tmp_path / "c.csv")) == 0


def test_estimate_martingale(tmp_path):
    f = tmp_path / "mart.csv"
    assert run_cli("estimate", "--what", "martingale", "--model", "A", "--t", "1.0",
                   "--reps", "2000", "--seed", "5", "--out", str(f)) == 0
    lines = f.read_text().splitlines()
    assert lines[0] == "what,t,estimate,se,n,seed"
    est = float(lines[1].split(",")[2])
    assert 0.8 < est < 1.2


def test_estimate_overshoot_insufficient_is_resource_error(capsys):
    code = run_cli("estimate", "--what", "overshoot", "--model", "A", "--t", "4.0",
                   "--z", "6.0", "--reps", "200", "--min-accepted", "100")
    assert code == 3
    assert "resource error" in capsys.readouterr().err


def test_run_config_and_check(tmp_path, capsys):
    cfg = tmp_path / "spec.cfg"
    cfg.write_text("experiment = spectral-oracle\nmodel = A\nseed = 1\n"
                   f"out = {tmp_path / 'runs'}\n")
    assert run_cli("run", "--config", str(cfg), "--check") == 0
    assert "[criterion 1]" in capsys.readouterr().out


def test_run_check_failure_exit_code(tmp_path):
    # the half-level ratio check is a documented red: --check must exit 1
    cfg = tmp_path / "front.cfg"
    cfg.write_text("experiment = front-speed\nmodel = A\nseed = 1\n"
                   f"out = {tmp_path / 'runs'}\nt_end = 30.0\n")
    assert run_cli("run", "--config", str(cfg), "--check") == 1
    assert run_cli("run", "--config", str(cfg)) == 0


def test_list_command(capsys):
    assert run_cli("list") == 0
    out = capsys.readouterr().out
    for name in ("mckean-agreement", "tail-envelope", "overshoot-exp", "dppp-crosscheck"):
        assert name in out


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--model", "A"])  # missing required --t
    assert exc.value.code == 2
