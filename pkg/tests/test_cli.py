import csv
import io
import json
import subprocess
import sys

import pytest

from contactspec import __version__
from contactspec.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.reader(io.StringIO("\n".join(lines))))


def test_channel_csv(capsys):
    code, out, _ = run(capsys, "channel", "--mass", "1", "--l", "0", "--stat", "boson", "--mult", "2", "--s", "0:1:0.1")
    assert code == 0
    assert out.startswith(f"# contactspec {__version__}")
    rows = csv_table(out)
    assert rows[0] == ["s", "Lambda"]
    assert len(rows) == 12
    assert float(rows[1][1]) == pytest.approx(-1.4184, abs=1e-4)
    assert rows[4][0] == "0.3"


def test_channel_single_point(capsys):
    code, out, _ = run(capsys, "channel", "--mass", "2", "--l", "1", "--stat", "fermion", "--s", "0.5")
    assert code == 0
    assert len(csv_table(out)) == 2


def test_channel_parity_mismatch_is_usage_error(capsys):
    code, _, err = run(capsys, "channel", "--mass", "1", "--l", "0", "--stat", "fermion", "--s", "0")
    assert code == 2 and "error" in err


def test_thresholds_json(capsys):
    code, out, _ = run(capsys, "thresholds", "--l", "1", "--stat", "fermion")
    assert code == 0
    env = json.loads(out)
    assert set(env) == {"version", "inputs", "results", "diagnostics", "wall_time"}
    assert 1 / env["results"]["m_star"] == pytest.approx(13.607, abs=1e-3)
    assert 1 / env["results"]["m_star_star"] == pytest.approx(8.62, abs=1e-2)
    assert env["wall_time"] is None


def test_efimov_fermion_has_no_channel(capsys):
    code, out, _ = run(capsys, "efimov", "--mass", "1", "--l", "1", "--stat", "fermion")
    assert code == 0
    env = json.loads(out)
    assert env["results"]["s0"] is None
    assert "no Efimov channel" in json.dumps(env)


def test_efimov_boson_tower(capsys):
    code, out, _ = run(capsys, "efimov", "--mass", "1", "--l", "0", "--stat", "boson", "--mult", "2", "--tower", "r0=1", "R=1e5")
    assert code == 0
    res = json.loads(out)["results"]
    assert res["s0"] == pytest.approx(1.0062378, abs=1e-6)
    assert res["ratio"] == pytest.approx(515.03, rel=1e-4)


def test_efimov_bad_tower_key(capsys):
    code, _, _ = run(capsys, "efimov", "--mass", "1", "--l", "0", "--stat", "boson", "--mult", "2", "--tower", "x=1")
    assert code == 2


def test_fourbody_small_scan(capsys):
    code, out, _ = run(capsys, "fourbody", "--samples", "20000", "--widths", "1:1,1:2", "--skews", "0")
    assert code == 0
    res = json.loads(out)["results"]
    assert res["passed"] and res["minimum"] > 0
    assert len(res["table"]["rows"]) == 3


def test_epsilon_probe(capsys):
    code, out, _ = run(capsys, "epsilon", "--pot", "square_well:depth=1,range=1", "--probe", "a,l1")
    assert code == 0
    rows = csv_table(out)
    assert float(rows[1][rows[0].index("a")]) == pytest.approx(-0.55741, abs=1e-5)
    l1 = {r[rows[0].index("l1")] for r in rows[1:]}
    assert len(l1) == 1


def test_epsilon_bad_potential(capsys):
    assert run(capsys, "epsilon", "--pot", "square_well:depth=-1")[0] == 2
    assert run(capsys, "epsilon", "--pot", "triangle:depth=1")[0] == 2


def test_nls_unstable_step(capsys):
    code, _, err = run(capsys, "nls", "--dt", "0.1", "--steps", "1")
    assert code == 2 and "stability" in err


def test_nls_norm_columns(capsys):
    code, out, _ = run(capsys, "nls", "--dt", "1e-4", "--steps", "20", "--every", "10")
    rows = csv_table(out)
    assert code == 0 and len(rows) == 4
    norms = {round(float(r[1]), 10) for r in rows[1:]}
    assert len(norms) == 1


def test_threads_do_not_change_output(capsys, tmp_path):
    args = ["fourbody", "--samples", "70000", "--widths", "0.5:2", "--skews", "0.4"]
    outs = []
    for t in ("1", "4"):
        path = tmp_path / f"out{t}.json"
        assert main([*args, "--threads", t, "-o", str(path)]) == 0
        outs.append(path.read_bytes())
    capsys.readouterr()
    a, b = (json.loads(o) for o in outs)
    a["inputs"].pop("threads", None), b["inputs"].pop("threads", None)
    assert a == b


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[common]\nformat = json\n[thresholds]\nl = 1\nstat = fermion\n")
    code, out, _ = run(capsys, "thresholds", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["inputs"]["l"] == 1


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[thresholds]\nlevel = 1\n")
    code, _, err = run(capsys, "thresholds", "--config", str(cfg))
    assert code == 2 and "level" in err


def test_config_unknown_section(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[plots]\nl = 1\n")
    assert run(capsys, "thresholds", "--config", str(cfg))[0] == 2


def test_timing_records_wall_time(capsys):
    code, out, _ = run(capsys, "thresholds", "--l", "1", "--stat", "fermion", "--timing")
    assert code == 0 and json.loads(out)["wall_time"] > 0


def test_missing_subcommand(capsys):
    assert run(capsys)[0] == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "contactspec", "channel", "--mass", "1", "--l", "0", "--stat", "boson", "--s", "0"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[-1].startswith("0.0,")
