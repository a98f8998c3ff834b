import numpy as np
import pytest

from evoinverse.cli import ConfigError, main, parse_config
from evoinverse.io import read_series, write_series


def run(tmp_path, text, *extra, name="run.cfg"):
    cfg = tmp_path / name
    cfg.write_text(text)
    return main(["--config", str(cfg), *extra])


def test_parse_config_types_and_comments():
    cfg = parse_config("mode = invert  # comment\npreset = scalar_decay\nN = 50\nT=2.5\n\n")
    assert (cfg.mode, cfg.preset, cfg.N, cfg.T) == ("invert", "scalar_decay", 50, 2.5)


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigError, match="unknown key 'tolerance'"):
        parse_config("preset = scalar_decay\ntolerance = 1e-3\n")
    assert run(tmp_path, "preset = scalar_decay\ntolerance = 1\n") == 4


def test_invalid_N_names_field(tmp_path, capsys):
    assert run(tmp_path, "mode = forward\npreset = scalar_decay\nN = 1\n",
               "--out", str(tmp_path)) == 4
    assert "N:" in capsys.readouterr().err


def test_forward_scalar(tmp_path):
    out = tmp_path / "fwd"
    assert run(tmp_path, "mode = forward\npreset = scalar_decay\nN = 100\n", "--out", str(out)) == 0
    text = (out / "phi.csv").read_text()
    assert text.startswith("t,value\n") and "\r" not in text
    t, phi = read_series(out / "phi.csv")
    assert len(t) == 101
    assert np.allclose(phi, np.exp(-0.5 * t), rtol=1e-5)


def test_forward_parabolic_reports_positivity(tmp_path):
    out = tmp_path / "fwd"
    assert run(tmp_path, "mode = forward\npreset = heat_sine\nN = 32\nM = 16\n"
               "stepper = ImplicitEuler\n", "--out", str(out)) == 0
    summary = (out / "trajectory.txt").read_text()
    assert "discrete maximum principle: PASS" in summary
    assert "state nonnegative on all nodes: yes" in summary


def test_roundtrip_scalar_matches_gamma(tmp_path):
    out = tmp_path / "rt"
    assert run(tmp_path, "preset = scalar_decay\nN = 200\ndata_N = 800\n", "--out", str(out)) == 0
    t, g = read_series(out / "gamma.csv", column="gamma")
    assert len(t) == 201 and np.max(np.abs(g[1:-1] - 0.5)) < 1e-4
    for name in ("xi.csv", "hypotheses.txt", "residual.txt", "roundtrip.txt"):
        assert (out / name).exists()


def test_invert_external_phi(tmp_path):
    t = np.linspace(0, 1, 101)
    write_series(tmp_path / "phi.csv", t, np.exp(-0.5 * t))
    out = tmp_path / "inv"
    assert run(tmp_path, f"mode = invert\npreset = scalar_decay\nN = 100\n"
               f"phi_path = {tmp_path / 'phi.csv'}\n", "--out", str(out)) == 0
    _, g = read_series(out / "gamma.csv", column="gamma")
    assert np.max(np.abs(g[1:-1] - 0.5)) < 1e-4


def test_invert_phi_grid_mismatch(tmp_path):
    t = np.linspace(0, 1, 51)
    write_series(tmp_path / "phi.csv", t, np.exp(-0.5 * t))
    assert run(tmp_path, f"mode = invert\npreset = scalar_decay\nN = 100\n"
               f"phi_path = {tmp_path / 'phi.csv'}\n", "--out", str(tmp_path / "o")) == 4


def test_invert_zero_crossing_exits_2(tmp_path, capsys):
    t = np.linspace(0, 1, 101)
    write_series(tmp_path / "phi.csv", t, 1 - 2 * t)
    code = run(tmp_path, f"mode = invert\npreset = scalar_decay\nN = 100\n"
               f"phi_path = {tmp_path / 'phi.csv'}\n", "--out", str(tmp_path / "o"))
    assert code == 2
    assert "measurement not separated from zero" in capsys.readouterr().err


def test_invert_truncated_gamma_warns(tmp_path):
    t = np.linspace(0, 1, 101)
    write_series(tmp_path / "phi.csv", t, np.where(t < 0.5, 1.0, -1.0) * np.exp(-0.5 * t))
    out = tmp_path / "o"
    assert run(tmp_path, f"mode = invert\npreset = scalar_decay\nN = 100\n"
               f"phi_path = {tmp_path / 'phi.csv'}\n", "--out", str(out)) == 0
    tg, _ = read_series(out / "gamma.csv", column="gamma")
    assert len(tg) == 50
    assert "WARNING: positivity horizon at node 49" in (out / "hypotheses.txt").read_text()


def test_breakdown_exit_code(tmp_path, monkeypatch):
    from evoinverse import BreakdownError
    import evoinverse.cli as cli

    def boom(*a, **k):
        raise BreakdownError("singular system matrix at time node 3")
    monkeypatch.setattr(cli, "invert", boom)
    assert run(tmp_path, "mode = invert\npreset = scalar_decay\nN = 10\n",
               "--out", str(tmp_path / "o")) == 3


def test_convergence_scalar(tmp_path):
    out = tmp_path / "conv"
    assert run(tmp_path, "mode = convergence\npreset = scalar_decay\nN = 50\n",
               "--out", str(out)) == 0
    rows = (out / "convergence.csv").read_text().splitlines()
    assert rows[0] == "N,h,error,order" and len(rows) == 4
    orders = [float(r.split(",")[3]) for r in rows[2:]]
    assert min(orders) >= 1.9


def test_convergence_parabolic(tmp_path):
    out = tmp_path / "conv"
    assert run(tmp_path, "mode = convergence\npreset = heat_sine\nN = 32\nM = 32\n",
               "--out", str(out)) == 0
    rows = (out / "convergence.csv").read_text().splitlines()
    assert min(float(r.split(",")[3]) for r in rows[2:]) >= 1.5


def test_convergence_needs_two_levels(tmp_path, capsys):
    assert run(tmp_path, "mode = convergence\npreset = scalar_decay\nlevels = 1\n",
               "--out", str(tmp_path / "o")) == 4
    assert "needs >= 2 levels" in capsys.readouterr().err


def test_mode_override(tmp_path):
    out = tmp_path / "o"
    assert run(tmp_path, "mode = roundtrip\npreset = scalar_source\nN = 20\n",
               "--mode", "forward", "--out", str(out)) == 0
    assert (out / "phi.csv").exists() and not (out / "gamma.csv").exists()


def test_precision_setting(tmp_path):
    out = tmp_path / "o"
    assert run(tmp_path, "mode = forward\npreset = scalar_decay\nN = 10\nprecision = 6\n",
               "--out", str(out)) == 0
    line = (out / "phi.csv").read_text().splitlines()[2]
    # one Crank-Nicolson step of u' = -u/2: 0.975 / 1.025 = 0.951219...
    assert line == "0.1,0.95122"
