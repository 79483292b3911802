import csv
import io
import json
import subprocess
import sys

import pytest

from evanescent_source.cli import COLUMNS, PRESETS, UsageError, format_number, parse_axis, run

GOLDEN_HEADERS = {
    "density": "v0,x,t,norm,density_N,density_S,density_0,psi_int,density_approx",
    "flux": "v0,x,t,J",
    "ratio": "v0,x,t,R",
    "times": "v0,x,t_c,bl_time,t_max_saddle,scenario,n_crossings,t_p,density_at_tp,t_dit1",
    "dit-map": "v0,x,t_min1,amplitude",
    "oracle-check": "index,v0,x,t,exact_re,exact_im,quad_re,quad_im,rel_err",
}


def _run(argv, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = run(list(argv) + ["--out", str(out)])
    return code, out


def _table(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.reader(lines))


def _meta(path):
    return dict(ln[2:].split("=", 1) for ln in path.read_text().splitlines() if ln.startswith("# "))


def test_golden_headers_are_stable():
    assert {k: ",".join(v) for k, v in COLUMNS.items()} == GOLDEN_HEADERS


@pytest.mark.parametrize(
    "argv,table",
    [
        (["density", "--v0", "0.05", "--x", "1.5", "--t", "1:10:3"], "density"),
        (["flux", "--v0", "0.25", "--x", "0", "--t", "0.5,1"], "flux"),
        (["times", "--v0", "0.1", "--x", "0.1,4"], "times"),
        (["dit-map", "--v0", "0.05", "--x", "1,2"], "dit-map"),
        (["oracle-check", "--n-points", "3", "--seed", "4"], "oracle-check"),
        (["figure", "ratio", "--t", "1:2:2"], "ratio"),
    ],
)
def test_every_command_writes_its_header(argv, table, tmp_path):
    code, out = _run(argv, tmp_path)
    assert code == 0
    rows = _table(out)
    assert ",".join(rows[0]) == GOLDEN_HEADERS[table]
    assert len(rows) > 1
    meta = _meta(out)
    assert meta["command"] == table and meta["tool"] == "evanescent-source" and "version" in meta


def test_density_values_and_sorting(tmp_path):
    code, out = _run(["density", "--v0", "0.1,0.05", "--x", "2,1.5", "--t", "3,1"], tmp_path)
    assert code == 0
    rows = _table(out)[1:]
    keys = [tuple(float(v) for v in r[:3]) for r in rows]
    assert keys == sorted(keys) and len(keys) == 8
    v0, x, t, norm, dens = (float(v) for v in rows[0][:5])
    from evanescent_source.model import make_params, psi_exact

    assert dens == abs(complex(psi_exact(make_params(v0), x, t))) ** 2 / norm


def test_output_is_byte_identical_and_round_trips(tmp_path):
    argv = ["times", "--v0", "0.1,0.25", "--x", "0.05:1:4:log"]
    _, a = _run(argv, tmp_path, "a.csv")
    _, b = _run(argv, tmp_path, "b.csv")
    assert a.read_bytes() == b.read_bytes()
    _, c = _run(argv + ["--workers", "2"], tmp_path, "c.csv")
    assert a.read_bytes() == c.read_bytes()
    for row in _table(a)[1:]:
        for cell in row:
            if cell not in ("", "DoubleCrossing", "SingleCrossing", "NoCrossing"):
                assert format_number(float(cell)) == cell or cell.isdigit()


def test_json_output(tmp_path):
    code, out = _run(["times", "--v0", "0.1", "--x", "4", "--format", "json"], tmp_path, "o.json")
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["metadata"]["command"] == "times"
    (rec,) = doc["records"]
    assert list(rec) == list(COLUMNS["times"])
    assert rec["scenario"] == "NoCrossing" and rec["t_p"] is None


def test_config_file_and_flag_priority(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nv0 = 0.3\nx = 1\nt = 1,2\nformat = json\n")
    code, out = _run(["flux", "--config", str(cfg), "--v0", "0.4"], tmp_path, "o.json")
    assert code == 0
    doc = json.loads(out.read_text())
    assert {r["v0"] for r in doc["records"]} == {0.4}
    assert [r["t"] for r in doc["records"]] == [1.0, 2.0]


def test_grid_flag(tmp_path):
    code, out = _run(["figure", "ratio", "--grid", "v0=0.1", "--grid", "x=1", "--grid", "t=1:100:3:log"], tmp_path)
    assert code == 0
    assert [r[2] for r in _table(out)[1:]] == ["1.0", "10.0", "100.0"]


def test_presets_cover_the_figures():
    assert {"flux-origin", "ratio", "tp", "tp-density", "dit-map", "dit-trace"} <= set(PRESETS)
    assert PRESETS["flux-origin"].v0 == "0.001,0.25,0.5,0.999"
    assert PRESETS["ratio"].x == "0.1,1,2.5,4"


def test_flux_origin_preset(tmp_path):
    code, out = _run(["figure", "--preset", "flux-origin", "--t", "0.5:20:5"], tmp_path)
    assert code == 0
    rows = _table(out)[1:]
    assert sorted({r[0] for r in rows}) == ["0.001", "0.25", "0.5", "0.999"] and len(rows) == 20


def test_preset_on_matching_command(tmp_path):
    code, out = _run(["density", "--preset", "dit-trace", "--t", "1,2"], tmp_path)
    assert code == 0
    rows = _table(out)[1:]
    assert [r[:3] for r in rows] == [["0.05", "1.5", "1.0"], ["0.05", "1.5", "2.0"]]
    assert _meta(out)["preset"] == "dit-trace"


def test_preset_on_other_command_is_usage_error(tmp_path, capsys):
    code, _ = _run(["flux", "--preset", "dit-trace"], tmp_path)
    assert code == 2
    assert "UsageError" in capsys.readouterr().err


@pytest.mark.parametrize(
    "text,expected",
    [("0.5", [0.5]), ("1,2", [1.0, 2.0]), ("0:1:3", [0.0, 0.5, 1.0]), ("1:100:3:log", [1.0, 10.0, 100.0])],
)
def test_parse_axis(text, expected):
    assert parse_axis(text) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["", "1:2", "1:2:1", "0:1:3:log", "1:2:3:cubic", "a", "nan"])
def test_parse_axis_rejects(text):
    with pytest.raises(UsageError):
        parse_axis(text)


def _cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "evanescent_source", *argv], capture_output=True, text=True, check=False
    )


def test_usage_error_exit_code():
    proc = _cli("density", "--v0", "abc", "--x", "1", "--t", "1")
    assert proc.returncode == 2
    assert json.loads(proc.stderr.strip().splitlines()[-1])["error"] == "UsageError"


def test_unknown_command_exit_code():
    proc = _cli("bogus")
    assert proc.returncode == 2


def test_domain_error_identifies_cell():
    proc = _cli("flux", "--v0", "1.5", "--x", "1", "--t", "1")
    assert proc.returncode == 2
    rec = json.loads(proc.stderr)
    assert rec["error"] == "DomainError" and rec["cell"] == {"v0": 1.5, "x": 1.0, "t": 1.0}


def test_numerical_error_exit_code():
    proc = _cli("density", "--v0", "1e-9", "--x", "1", "--t", "1")
    assert proc.returncode == 3
    rec = json.loads(proc.stderr)
    assert rec["error"] == "ConvergenceError" and rec["cell"]["v0"] == 1e-9


def test_stdout_default():
    proc = _cli("flux", "--v0", "0.5", "--x", "0", "--t", "1")
    assert proc.returncode == 0
    lines = [ln for ln in proc.stdout.splitlines() if not ln.startswith("#")]
    assert lines[0] == GOLDEN_HEADERS["flux"] and len(lines) == 2


def test_format_number():
    assert format_number(0.1) == "0.1"
    assert format_number(None) == ""
    assert format_number(float("inf")) == "inf"
    assert format_number(3) == "3"
    value = 1 / 3
    assert float(format_number(value)) == value
