import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jscs import appos, cli, sensing
from jscs.config import (
    ConfigError,
    ScenarioConfig,
    SweepSpec,
    db_to_linear,
    linear_to_db,
    load,
    parse,
    serialize,
)
from jscs.montecarlo import SimConfigError
from jscs.optimizer import minimize


def read_csv(text):
    lines = text.splitlines()
    rows = [line.split(",") for line in lines[1:]]
    return lines[0], np.array([[float(r[0]), float(r[1]), float(r[2])] for r in rows]), [r[3] for r in rows]


@given(st.floats(-60, 60))
def test_db_round_trip(db):
    assert linear_to_db(db_to_linear(db)) == pytest.approx(db, rel=1e-12, abs=1e-12)


@given(st.floats(1e-6, 1e6))
def test_linear_round_trip(x):
    assert db_to_linear(linear_to_db(x)) == pytest.approx(x, rel=1e-12)


def test_defaults_match_reported_setup():
    c = ScenarioConfig()
    senv, aenv = c.senv, c.aenv
    assert senv.p_h1 == pytest.approx(0.3) and senv.p_e == 0.1 and senv.e_sample == 1e-4
    assert senv.gamma == pytest.approx(10**-1.5, rel=1e-12)
    assert aenv.sigma_W_sq == pytest.approx(0.1, rel=1e-12)
    assert (aenv.sigma_S_sq, aenv.symbol_rate, aenv.distortion, aenv.k_nodes, aenv.bandwidth) == (1, 1e6, 0.1, 10, 5e6)


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=200)
@given(
    pu=finite, src=finite, p_h1=finite, n0=finite, k=st.integers(1, 1000),
    lo=finite, hi=finite, pts=st.integers(2, 10_000),
)
def test_parse_serialize_round_trip(pu, src, p_h1, n0, k, lo, hi, pts):
    c = ScenarioConfig(pu_snr_db=pu, source_snr_db=src, p_h1=p_h1, n0=n0, k_nodes=k,
                       sweep=SweepSpec(lo, hi, pts))
    assert parse(serialize(c)) == c


def test_partial_file_uses_defaults(tmp_path):
    path = tmp_path / "s.ini"
    path.write_text("[sensing]\npu_snr_db = -20\n")
    c = load(path)
    assert c == replace(ScenarioConfig(), pu_snr_db=-20.0)


@pytest.mark.parametrize("text,needle", [
    ("[sensing]\nfoo = 1\n", "foo"),
    ("[radio]\nx = 1\n", "radio"),
    ("[sweep]\nstep = 3\n", "step"),
    ("[source]\nk_nodes = ten\n", "k_nodes"),
    ("no header\n", "section header"),
])
def test_parse_errors(text, needle):
    with pytest.raises(ConfigError, match=needle):
        parse(text)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load(tmp_path / "absent.ini")


def test_env_errors_become_config_errors():
    with pytest.raises(ConfigError, match="sensing"):
        ScenarioConfig(p_h1=1.5).senv
    with pytest.raises(ConfigError, match="source"):
        ScenarioConfig(distortion=-1.0).aenv


def test_sweep_csv_format_and_library_agreement():
    c = ScenarioConfig()
    tables = cli.cmd_sweep(c, "total")
    assert list(tables) == [(-15.0, 10.0)]
    text = tables[(-15.0, 10.0)]
    header, data, regime = read_csv(text)
    assert header == "p_t,p_total_w,n_samples,regime"
    assert len(data) == 512 and text.endswith("\n") and "\r" not in text
    grid = c.sweep.grid()
    expected = sensing.p_amos(grid, c.senv) + appos.p_appos(grid, c.aenv, c.senv)
    assert np.all(data[:, 1] == np.array([float(cli.fmt(v)) for v in expected]))
    assert set(regime) <= {"Sensing", "NoSensing"}


def test_sweep_is_byte_stable():
    c = ScenarioConfig()
    assert cli.cmd_sweep(c, "amos", [-20, -10]) == cli.cmd_sweep(c, "amos", [-20, -10])


def test_sweep_shapes():
    c = ScenarioConfig()
    _, amos, _ = read_csv(cli.cmd_sweep(c, "amos")[(-15.0, 10.0)])
    assert np.all(np.diff(amos[:, 1]) >= 0)
    _, ap, _ = read_csv(cli.cmd_sweep(c, "appos")[(-15.0, 10.0)])
    assert np.all(np.diff(ap[:, 1]) < 0)
    _, tot, _ = read_csv(cli.cmd_sweep(c, "total")[(-15.0, 10.0)])
    d = np.diff(tot[:, 1])
    assert np.sum((d[:-1] < 0) & (d[1:] > 0)) == 1


def test_sweep_combinations_order():
    tables = cli.cmd_sweep(ScenarioConfig(), "appos", [-20, -10], [5, 15])
    assert list(tables) == [(-20, 5), (-20, 15), (-10, 5), (-10, 15)]


def test_sweep_rejects_range_outside_domain():
    c = replace(ScenarioConfig(), sweep=SweepSpec(0.1, 0.75, 10))
    with pytest.raises(ConfigError):
        cli.cmd_sweep(c, "total")


def test_sweep_filename():
    assert cli.sweep_filename("total", -15.0, 10.0) == "total_pu-15dB_src+10dB.csv"


def test_optimize_default_row():
    (row,) = cli.cmd_optimize(ScenarioConfig())
    pt = row.optimum.point
    assert pt.p_t == pytest.approx(0.42, abs=0.03)
    assert pt.p_total_w == pytest.approx(4.8, rel=0.05)
    text = cli.optimize_table([row])
    for key in ("p_t*", "P_total*", "P_AmOS*", "P_AppOS*", "AmOS share", "N*", "certified convex", "iterations"):
        assert key in text
    csv = cli.optimize_csv([row]).splitlines()
    assert csv[0].split(",") == list(cli.OPT_COLUMNS)
    assert csv[1].split(",")[8] == "true"


def test_optimize_free_sensing_zero_share():
    (row,) = cli.cmd_optimize(replace(ScenarioConfig(), e_sample=0.0))
    assert row.optimum.point.amos_share == 0


def test_optimize_pu_snr_sweep_decreasing_power():
    rows = cli.cmd_optimize(ScenarioConfig(), [-20, -15, -10])
    totals = [r.optimum.point.p_total_w for r in rows]
    assert [r.pu_snr_db for r in rows] == [-20, -15, -10]
    assert totals[0] > totals[1] > totals[2]


def test_simulate_rejects_zero_samples():
    with pytest.raises(SimConfigError, match="at least one sample"):
        cli.cmd_simulate(ScenarioConfig(), 10_000, 1, n_samples=0)


def test_simulate_defaults_to_ceil_of_optimal_n():
    c = ScenarioConfig()
    sim, _ = cli.cmd_simulate(c, 10_000, 1, n_samples=None)
    assert sim.n_samples == math.ceil(minimize(c.senv, c.aenv).point.n_samples)


def test_simulate_deterministic_and_seed_consistent():
    c = ScenarioConfig()
    sim_a, rep_a = cli.cmd_simulate(c, 10_000, 42, n_samples=400)
    _, rep_a2 = cli.cmd_simulate(c, 10_000, 42, n_samples=400)
    assert cli.simulate_report(sim_a, rep_a) == cli.simulate_report(sim_a, rep_a2)
    _, rep_b = cli.cmd_simulate(c, 10_000, 7, n_samples=400)
    for key in ("emp_p_d", "emp_p_fa", "emp_p_t"):
        a, b = getattr(rep_a.stats, key), getattr(rep_b.stats, key)
        assert a.lo <= b.value <= a.hi or b.lo <= a.value <= b.hi


def test_validate_defaults_all_pass():
    results = cli.cmd_validate(ScenarioConfig())
    assert len(results) == 8
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_validate_catches_broken_derivative():
    def broken(p, aenv, senv):
        return appos.p_appos_deriv(p, aenv, senv) * (1 + 1e-3)

    results = {r.name: r for r in cli.cmd_validate(ScenarioConfig(), appos_deriv=broken)}
    assert not results["AppOS derivative vs finite differences"].passed


def test_main_exit_codes(tmp_path, capsys):
    assert cli.main(["optimize"]) == 0
    assert "P_total*" in capsys.readouterr().out

    bad = tmp_path / "bad.ini"
    bad.write_text("[sensing]\nbogus = 1\n")
    assert cli.main(["optimize", "--config", str(bad)]) == 2

    infeasible = tmp_path / "inf.ini"
    infeasible.write_text("[source]\ndistortion = 0.001\n")
    assert cli.main(["optimize", "--config", str(infeasible)]) == 3
    assert cli.main(["validate", "--config", str(infeasible)]) == 3
    assert "must exceed 0.0099" in capsys.readouterr().err

    assert cli.main(["simulate", "--slots", "10000", "--n-samples", "0"]) == 2


def test_main_validation_failure_exit_code(tmp_path):
    # N = 4 leaves the CLT regime so the detection z-score drifts far past 4
    assert cli.main(["simulate", "--slots", "20000", "--n-samples", "4", "--seed", "3"]) == 4


def test_main_sweep_writes_files(tmp_path, capsys):
    out = tmp_path / "figs"
    assert cli.main(["sweep", "--target", "amos", "--pu-snr-db", "-20", "-15", "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["amos_pu-15dB_src+10dB.csv", "amos_pu-20dB_src+10dB.csv"]
    single = tmp_path / "one.csv"
    assert cli.main(["sweep", "--out", str(single)]) == 0
    assert single.read_bytes() == cli.cmd_sweep(ScenarioConfig(), "total")[(-15.0, 10.0)].encode()


def test_main_comma_lists(capsys):
    assert cli.main(["optimize", "--pu-snr-db=-20,-15,-10"]) == 0
    assert capsys.readouterr().out.count("PU SNR") == 3


def test_main_calibrate(capsys):
    assert cli.main(["calibrate"]) == 0
    out = capsys.readouterr().out
    assert "slot length" in out and "noise PSD" in out
