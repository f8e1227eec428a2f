import csv
import json
import os

import pytest

from semigf.cli import EXIT_DOMAIN, EXIT_GATE, EXIT_OK, EXIT_USAGE, main
from semigf.config import (
    FIGURE_IDS,
    GridSpec,
    RunSpec,
    SpecError,
    TauSpec,
    figure_preset,
    load_spec,
    spec_from_dict,
)
from semigf.runner import COLUMNS, Row, rows_to_csv, run_sweep

FAST = ["--trials", "20000", "--grid", "100:120:10"]


def _read(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_grid_spec():
    assert GridSpec(90, 130, 10).values() == [90, 100, 110, 120, 130]
    assert GridSpec.parse("90:100:5").values() == [90, 95, 100]
    with pytest.raises(SpecError):
        GridSpec.parse("90:100")
    with pytest.raises(SpecError):
        GridSpec(100, 90, 5).values()
    with pytest.raises(SpecError):
        GridSpec(90, 100, 0).values()


def test_spec_defaults_and_paths():
    spec = spec_from_dict(None)
    assert spec == RunSpec()
    with pytest.raises(SpecError, match=r"^geometry\.R1"):
        spec_from_dict({"geometry": {"R1": -1.0}})
    with pytest.raises(SpecError, match=r"^radio\.bogus"):
        spec_from_dict({"radio": {"bogus": 1}})
    with pytest.raises(SpecError, match=r"^methods\[1\]"):
        spec_from_dict({"methods": ["exact", "magic"]})
    with pytest.raises(SpecError, match=r"^mc\.trials"):
        spec_from_dict({"mc": {"trials": 10}})
    with pytest.raises(SpecError, match=r"^scenario"):
        spec_from_dict({"scenario": "III"})
    with pytest.raises(SpecError, match=r"^radio\.P_GB"):
        spec_from_dict({"radio": {"P_GB": "ten"}})


def test_tau_spec():
    spec = spec_from_dict({"tau": {"value": 1e-6}})
    radio = spec.radio_at(100)
    assert spec.protocol_at("openloop", radio).tau == 1e-6
    s10 = spec_from_dict({"tau": {"multiplier": 10}})
    s1 = spec_from_dict({})
    assert s10.protocol_at("openloop", radio).tau == pytest.approx(10 * s1.protocol_at("openloop", radio).tau)
    assert TauSpec().multiplier == 1.0


def test_load_spec_yaml(tmp_path):
    p = tmp_path / "run.yaml"
    p.write_text("scenario: II\ngeometry:\n  alpha: 3.5\ngrid:\n  start: 100\n  stop: 110\n  step: 5\n")
    spec = load_spec(str(p))
    assert spec.scenario.value == "II" and spec.geometry.alpha == 3.5
    assert spec.grid.values() == [100, 105, 110]
    bad = tmp_path / "bad.yaml"
    bad.write_text("- a\n- b\n")
    with pytest.raises(SpecError):
        load_spec(str(bad))
    with pytest.raises(SpecError):
        load_spec(str(tmp_path / "missing.yaml"))


def test_csv_schema_and_formatting():
    rows = [Row(90.0, "GB", "dynamic", "exact", 1.25e-3, None, "a"),
            Row(90.0, "GB", "dynamic", "mc", 1.0e-3, 3.1e-5, "")]
    text = rows_to_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(COLUMNS)
    assert lines[1] == "90,GB,dynamic,exact,1.2500000000e-03,,a,"
    assert lines[2].split(",")[5] == "3.1000000000e-05"


def test_sweep_rows_cover_grid():
    spec = spec_from_dict({"grid": {"start": 100, "stop": 110, "step": 10}, "methods": ["exact", "asym"],
                           "mc": {"trials": 1000}})
    rows = run_sweep(spec)
    assert len(rows) == 2 * 2 * 2 * 2
    assert [r.rho_db for r in rows[:8]] == [100] * 8


def test_analytic_command(tmp_path):
    out = tmp_path / "o"
    assert main(["analytic", "--out", str(out), "--grid", "100:110:10", "--method", "exact",
                 "--method", "closed"]) == EXIT_OK
    rows = _read(out / "analytic.csv")
    assert {r["method"] for r in rows} == {"exact", "closed"}
    m = json.loads((out / "analytic_manifest.json").read_text())
    assert m["inputs"]["scenario"] == "I" and "numpy" in m["versions"] and m["seeds"] == [0]


def test_simulate_is_deterministic_across_threads(tmp_path, monkeypatch):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--out", str(a), "--seed", "9", "--threads", "1"] + FAST) == EXIT_OK
    monkeypatch.setenv("SEMIGF_THREADS", "4")
    assert main(["simulate", "--out", str(b), "--seed", "9"] + FAST) == EXIT_OK
    assert (a / "simulate.csv").read_bytes() == (b / "simulate.csv").read_bytes()
    rows = _read(a / "simulate.csv")
    assert all(r["method"] == "mc" and r["std_err"] for r in rows)


def test_sweep_all_methods(tmp_path):
    assert main(["sweep", "--out", str(tmp_path), "--method", "all"] + FAST) == EXIT_OK
    methods = {r["method"] for r in _read(tmp_path / "sweep.csv")}
    assert methods == {"exact", "closed", "asym", "mc"}


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "--grid", "130:90:5"],
        ["sweep", "--grid", "x"],
        ["sweep", "--bogus"],
        ["analytic", "--method", "mc"],
        ["simulate", "--trials", "10"],
        ["sweep", "--threads", "0"],
        ["figure", "fig9"],
        [],
    ],
)
def test_usage_errors(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)] if argv else argv) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_bad_config_reports_field_path(tmp_path, capsys):
    p = tmp_path / "c.yaml"
    p.write_text("radio:\n  lambda_GB: -1\n")
    assert main(["sweep", "--config", str(p), "--out", str(tmp_path)]) == EXIT_USAGE
    assert "radio.lambda_GB" in capsys.readouterr().err


def test_domain_errors_surface_per_row(tmp_path, monkeypatch):
    import semigf.runner as runner

    def boom(q):
        if q.method.value == "closed":
            raise ArithmeticError("forced")
        return real(q)

    real = runner.outage
    monkeypatch.setattr(runner, "outage", boom)
    argv = ["analytic", "--out", str(tmp_path), "--grid", "100:100:1", "--method", "exact", "--method", "closed"]
    assert main(argv) == EXIT_DOMAIN
    rows = _read(tmp_path / "analytic.csv")
    bad = [r for r in rows if r["error"]]
    assert bad and all(r["method"] == "closed" and r["op_value"] == "" for r in bad)
    assert any(r["method"] == "exact" and r["op_value"] for r in rows)


def test_report_passes_and_corruption_trips(tmp_path):
    args = ["report", "--trials", "100000", "--grid", "110:130:10"]
    assert main(args + ["--out", str(tmp_path / "ok")]) == EXIT_OK
    summary = json.loads((tmp_path / "ok" / "report_summary.json").read_text())
    assert summary["passed"] and len(summary["curves"]) == 4
    assert main(args + ["--out", str(tmp_path / "bad"), "--corrupt-alpha", "0.1"]) == EXIT_GATE


def test_figure_presets_encode_parameters():
    assert FIGURE_IDS == ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")
    f2 = figure_preset("fig2")
    assert [s.geometry.alpha for _, s in f2.families] == [2.2, 2.8, 3.5]
    f3 = figure_preset("fig3")
    assert [s.tau.multiplier for _, s in f3.families] == [0.1, 1.0, 10.0]
    assert all(s.protocols == ("openloop",) for _, s in f3.families)
    f4 = figure_preset("fig4")
    assert f4.families[0][1].scenario.value == "II" and f4.swept_label == "rho_GF [dB]"
    for fid in FIGURE_IDS:
        for _, s in figure_preset(fid).families:
            assert s.grid.values()[0] == 90 and s.grid.values()[-1] == 130
            assert s.radio.sigma2 == -90.0
    with pytest.raises(SpecError):
        figure_preset("fig7")


def test_figure_command_writes_tables_and_manifest(tmp_path):
    assert main(["figure", "fig1", "--out", str(tmp_path), "--trials", "20000"]) == EXIT_OK
    rows = _read(tmp_path / "fig1_protocols.csv")
    curves = {(r["user"], r["protocol"]) for r in rows}
    assert len(curves) == 4 and {r["method"] for r in rows} == {"exact", "mc"}
    m = json.loads((tmp_path / "fig1_manifest.json").read_text())
    assert m["figure"] == "fig1" and m["outputs"] == ["fig1_protocols.csv"]
    assert os.path.basename(m["families"][0]["file"]) == "fig1_protocols.csv"
