import math

import pytest

from weakthermo import ConfigError
from weakthermo.cli import (
    EXIT_CONFIG,
    EXIT_DEGENERATE,
    EXIT_OK,
    SWEEP_COLUMNS,
    RunConfig,
    config_echo,
    main,
    parse_config,
    read_config_file,
    read_sweep_csv,
    resolve_config,
    run_experiment,
    run_qfi_sweep,
)


def test_defaults_match_reference_setup():
    cfg = resolve_config("qfi-sweep")
    assert (cfg.omega_z, cfg.omega_r) == (4.8e6, 3e9)
    assert cfg.g0 == 1e-8
    assert cfg.theta == math.pi / 4 and cfg.phi == 0.0
    assert cfg.beta_grid()[0] == 1e-12 and cfg.beta_grid()[-1] == 3.3e-11
    assert cfg.fock_dim == 32
    assert resolve_config("experiment").g0 == 0.05


def test_theta_out_of_range_is_config_error(capsys):
    with pytest.raises(ConfigError):
        parse_config(["weak-value", "--theta", "4"])
    assert main(["weak-value", "--theta", "4"]) == EXIT_CONFIG
    assert "theta" in capsys.readouterr().err


def test_unknown_command_exits_with_config_code(capsys):
    assert main(["bogus"]) == EXIT_CONFIG


def test_flag_overrides_file(tmp_path):
    cfg_file = tmp_path / "run.ini"
    cfg_file.write_text("theta = 1.0\nphi = 0.5\nomega-z = 1e6\n")
    cfg = parse_config(["weak-value", "--config", str(cfg_file), "--theta", "2.0"])
    assert cfg.theta == 2.0
    assert cfg.phi == 0.5
    assert cfg.omega_z == 1e6


@pytest.mark.parametrize("text", ["thetta = 1\n", "[other]\ntheta = 1\n", "theta = abc\n"])
def test_bad_config_file_rejected(tmp_path, text):
    cfg_file = tmp_path / "bad.ini"
    cfg_file.write_text(text)
    with pytest.raises(ConfigError):
        read_config_file(cfg_file)
    assert main(["weak-value", "--config", str(cfg_file)]) == EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert main(["weak-value", "--config", str(tmp_path / "nope.ini")]) == EXIT_CONFIG


def test_theta_grid_includes_degenerate_pole(tmp_path):
    out = tmp_path / "sweep.csv"
    cfg = resolve_config(
        "qfi-sweep",
        overrides=dict(theta_min=0.0, theta_max=math.pi / 2, theta_steps=3, beta_steps=1, out=str(out)),
    )
    records = run_qfi_sweep(cfg)
    assert [r.theta for r in records] == [0.0, math.pi / 4, math.pi / 2]
    pole = records[0]
    assert pole.qfi == 0.0 and pole.status == "insensitive" and pole.beta_hat is None
    assert all(r.status == "ok" and r.qfi > 0 for r in records[1:])
    assert read_sweep_csv(out) == records


def test_sweep_csv_schema(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["qfi-sweep", "--beta-steps", "3", "--out", str(out)]) == EXIT_OK
    lines = out.read_bytes().split(b"\n")
    assert lines[0].decode() == ",".join(SWEEP_COLUMNS)
    assert b"\r" not in out.read_bytes()
    assert len([x for x in lines if x]) == 4


def test_beta_zero_row_has_infinite_temperature(tmp_path):
    out = tmp_path / "s.csv"
    main(["qfi-sweep", "--beta-min", "0", "--beta-max", "1e-11", "--beta-steps", "2", "--out", str(out)])
    rec = read_sweep_csv(out)
    assert rec[0].beta == 0.0 and rec[0].temperature == math.inf
    assert "inf" in out.read_text().splitlines()[1].split(",")


def test_sweep_is_byte_identical_across_reruns_and_workers(tmp_path):
    args = ["qfi-sweep", "--theta-steps", "3", "--phi-steps", "4", "--beta-steps", "5"]
    paths = []
    for i, workers in enumerate(("1", "1", "3")):
        p = tmp_path / f"run{i}.csv"
        assert main(args + ["--workers", workers, "--out", str(p)]) == EXIT_OK
        paths.append(p)
    ref = paths[0].read_bytes()
    assert all(p.read_bytes() == ref for p in paths[1:])


def test_config_echo_reproduces_run(tmp_path):
    first = tmp_path / "a.csv"
    main(["qfi-sweep", "--theta", "1.1", "--phi", "0.3", "--g0", "0.01", "--beta-steps", "4", "--out", str(first)])
    echo = tmp_path / "a.csv.config.txt"
    assert echo.exists()
    second = tmp_path / "b.csv"
    main(["qfi-sweep", "--config", str(echo), "--out", str(second)])
    assert first.read_bytes() == second.read_bytes()
    assert echo.read_text() == (tmp_path / "b.csv.config.txt").read_text()


def test_config_echo_lists_resolved_values():
    text = config_echo(resolve_config("experiment"))
    assert "g0 = 0.05" in text
    assert "out" not in text.split("[thermo]")[1]


def test_all_degenerate_sweep_exit_code(tmp_path):
    assert main(["qfi-sweep", "--theta", "0", "--beta-steps", "2", "--out", str(tmp_path / "d.csv")]) == EXIT_DEGENERATE
    assert main(["invert-beta", "--theta", "0"]) == EXIT_DEGENERATE


def test_single_point_commands(capsys):
    assert main(["weak-value"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "S_w_exact_re:" in out and "S_w_first_order_re:" in out
    assert main(["invert-beta", "--beta", "1e-11"]) == EXIT_OK
    line = [x for x in capsys.readouterr().out.splitlines() if x.startswith("beta_hat:")][0]
    assert float(line.split()[1]) == pytest.approx(1e-11, rel=0.01)
    assert main(["pointer", "--fock-dim", "16"]) == EXIT_OK
    assert "infidelity:" in capsys.readouterr().out


def test_invert_beta_from_supplied_weak_value(capsys):
    assert main(["invert-beta", "--sw-re", "0.3", "--sw-im", "0"]) == EXIT_OK
    assert "S_w_input_re: 0.3" in capsys.readouterr().out
    assert main(["invert-beta", "--sw-re", "0.3"]) == EXIT_CONFIG


def _experiment(**kw):
    base = dict(n_samples=2000, replicates=40, seed=4)
    base.update(kw)
    return run_experiment(resolve_config("experiment", overrides=base))


def test_experiment_variance_not_below_bound():
    _, s = _experiment(n_samples=10_000, replicates=100)
    assert s["replicates_failed"] == 0
    assert s["variance"] >= s["crb"] - 3 * s["variance_stderr"]


def test_experiment_fixed_seed_reproducible(tmp_path):
    for name in ("a", "b"):
        _experiment(out=str(tmp_path / f"{name}.csv"))
    a, b = (tmp_path / "a.csv.summary.txt").read_bytes(), (tmp_path / "b.csv.summary.txt").read_bytes()
    assert a == b
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_experiment_parallel_matches_serial(tmp_path):
    _experiment(out=str(tmp_path / "s.csv"))
    _experiment(out=str(tmp_path / "p.csv"), workers=3)
    assert (tmp_path / "s.csv").read_bytes() == (tmp_path / "p.csv").read_bytes()


def test_experiment_bound_scales_with_coupling():
    _, weak = _experiment(g0=0.02, replicates=2)
    _, strong = _experiment(g0=0.04, replicates=2)
    assert weak["crb"] / strong["crb"] == pytest.approx(4.0, rel=0.02)


def test_experiment_cli(tmp_path, capsys):
    out = tmp_path / "e.csv"
    assert main(["experiment", "--n-samples", "1000", "--replicates", "5", "--out", str(out)]) == EXIT_OK
    assert "variance_over_crb:" in capsys.readouterr().out
    assert out.read_text().splitlines()[0] == "replicate,beta_hat,S_w_re,S_w_im,z_mean,p_mean,status"
    assert main(["experiment", "--n-samples", "10"]) == EXIT_CONFIG


def test_runconfig_grids():
    cfg = RunConfig(phi_steps=4, theta_steps=3, beta_steps=3, log_beta=True, beta_min=1e-12, beta_max=1e-10)
    assert list(cfg.phi_grid()) == [0.0, math.pi / 2, math.pi, 3 * math.pi / 2]
    assert cfg.theta_grid()[-1] == math.pi
    assert cfg.beta_grid()[1] == pytest.approx(1e-11)
