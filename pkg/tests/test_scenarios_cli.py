import json
import math

import numpy as np
import pytest

from sswm.cli import main
from sswm.errors import ConfigError
from sswm.params import SystemParams, effective_splittings
from sswm.scenarios import (Scenario, builtin_scenario_names, load_scenario,
                            parse_config, run_scenario, run_sweep,
                            serialize_config)

pytestmark = pytest.mark.filterwarnings("ignore:grid spacing", "ignore:extent")


def test_builtin_names():
    names = builtin_scenario_names()
    assert names == ["fig2", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f"]


@pytest.mark.parametrize("name", ["fig2", "fig3a", "fig3b", "fig3c", "fig3d",
                                  "fig3e", "fig3f"])
def test_round_trip_identity(name):
    sc = load_scenario(name)
    sc2 = parse_config(serialize_config(sc), source="round-trip")
    assert sc2.name == sc.name
    assert sc2.params == sc.params
    assert sc2.oracle == sc.oracle
    assert sc2.outputs == sc.outputs
    assert sc2.meta == sc.meta


def test_preset_physics():
    fig2 = load_scenario("fig2")
    assert fig2.params.omega_c1 == 40.0
    fig3d = load_scenario("fig3d")
    assert fig3d.params.optical_depth == 111.0
    assert not fig3d.oracle.force_phi_unity


def test_missing_required_key():
    text = "name = broken\nparams.omega_c2 = 8gamma31\n" \
           "params.optical_depth = 37\nparams.length_L = 0.0015\n"
    with pytest.raises(ConfigError, match="params.omega_c1"):
        parse_config(text)


def test_unknown_key_names_line():
    sc = load_scenario("fig3a")
    text = serialize_config(sc) + "params.bogus = 3\n"
    with pytest.raises(ConfigError, match="bogus"):
        parse_config(text)


def test_si_and_gamma31_units_agree():
    sc = load_scenario("fig3a")
    g = sc.params.gamma31_si
    si_text = serialize_config(sc).replace(
        "params.omega_c1 = 8.0gamma31", f"params.omega_c1 = {8.0 * g!r}")
    sc_si = parse_config(si_text)
    assert sc_si.params.omega_c1 == pytest.approx(8.0, rel=1e-12)


def test_complex_rabi_round_trip():
    sc = load_scenario("fig3a")
    sc2 = parse_config(serialize_config(sc).replace(
        "params.omega_c1 = 8.0gamma31", "params.omega_c1 = (8.0+0.5j)gamma31"))
    assert sc2.params.omega_c1 == 8.0 + 0.5j
    sc3 = parse_config(serialize_config(sc2))
    assert sc3.params.omega_c1 == sc2.params.omega_c1


def small(sc: Scenario, n_points: int = 512, **okw) -> Scenario:
    from dataclasses import replace

    return replace(sc, oracle=replace(sc.oracle, n_points=n_points, **okw))


def test_run_scenario_fig2(tmp_path):
    sc = small(load_scenario("fig2"))
    paths = run_scenario(sc, tmp_path)
    assert all(p.exists() for p in paths)
    text = (tmp_path / "fig2_chi5_grid.csv").read_text()
    assert text.startswith("# scenario: fig2")
    assert "delta2_gamma31,delta3_gamma31,abs_value" in text


def test_run_scenario_deterministic(tmp_path):
    sc = small(load_scenario("fig3c"))
    out1 = run_scenario(sc, tmp_path / "a")[0].read_bytes()
    out2 = run_scenario(sc, tmp_path / "b")[0].read_bytes()
    assert out1 == out2


def test_run_scenario_json(tmp_path):
    sc = small(load_scenario("fig3c"))
    path = run_scenario(sc, tmp_path, fmt="json")[0]
    payload = json.loads(path.read_text())
    assert len(payload["t_s"]) == len(payload["value"]) == 512


def test_sweep_summary_coupling(tmp_path):
    # period column follows the closed-form splitting for each coupling value
    sc = small(load_scenario("fig3b"), n_points=1024)
    summary = run_sweep(sc, "omega_c1", [2.0, 4.0, 8.0], tmp_path)
    rows = [r for r in summary.read_text().splitlines() if r and not r.startswith("#")]
    header = rows[0].split(",")
    icol = header.index("tau12_period_ns")
    for row, oc in zip(rows[1:], (2.0, 4.0, 8.0)):
        period = float(row.split(",")[icol])
        o1 = effective_splittings(SystemParams(omega_c1=oc)).omega_e1
        expected = 2 * math.pi / (o1 * SystemParams().gamma31_si) * 1e9
        assert period == pytest.approx(expected, rel=0.03)


def test_sweep_od_width_column(tmp_path):
    # the tau13 width column follows the group-delay rectangle lengths
    sc = small(load_scenario("fig3f"), n_points=1024, ideal_rect=True)
    summary = run_sweep(sc, "optical_depth", [37.0, 74.0, 111.0], tmp_path)
    rows = [r for r in summary.read_text().splitlines() if r and not r.startswith("#")]
    icol = rows[0].split(",").index("tau13_width_ns")
    for row, target in zip(rows[1:], (245.0, 490.0, 735.0)):
        width = float(row.split(",")[icol])
        assert width == pytest.approx(target, rel=0.10)


def test_sweep_rejects_bad_input(tmp_path):
    sc = load_scenario("fig3f")
    with pytest.raises(ConfigError):
        run_sweep(sc, "length_L", [1.0], tmp_path)
    from sswm.errors import ValidationError

    with pytest.raises(ValidationError):
        run_sweep(sc, "optical_depth", [], tmp_path)


# ---------------------------------------------------------------------------
# CLI surface


def test_cli_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out.split()
    assert "fig2" in out and "fig3f" in out


def test_cli_acceptance_list(capsys):
    assert main(["acceptance", "--criteria", "list"]) == 0
    out = capsys.readouterr().out
    assert "C1:" in out and "C12:" in out


def test_cli_simulate_and_exit_codes(tmp_path, capsys):
    rc = main(["simulate", "--scenario", "fig3c", "--out", str(tmp_path),
               "--grid-n", "512"])
    assert rc == 0
    assert (tmp_path / "fig3c_trace_tau13_numeric.csv").exists()


def test_cli_config_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("name = x\nparams.omega_c2 = 8gamma31\n")
    rc = main(["simulate", "--scenario", str(bad), "--out", str(tmp_path)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "omega_c1" in err


def test_cli_unknown_scenario_exit_2(tmp_path):
    assert main(["simulate", "--scenario", "nope", "--out", str(tmp_path)]) == 2


def test_cli_sweep_empty_values_exit_3(tmp_path):
    rc = main(["sweep", "--scenario", "fig3f", "--param", "optical_depth",
               "--values", "", "--out", str(tmp_path)])
    assert rc == 3


def test_cli_overrides(tmp_path):
    rc = main(["simulate", "--scenario", "fig3c", "--out", str(tmp_path),
               "--grid-n", "512", "--extent", "40gamma31", "--force-phi-unity"])
    assert rc == 0


def test_cli_env_out_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SSWM_OUT_DIR", str(tmp_path / "env_out"))
    rc = main(["simulate", "--scenario", "fig3c", "--grid-n", "512"])
    assert rc == 0
    assert (tmp_path / "env_out" / "fig3c_trace_tau13_numeric.csv").exists()
