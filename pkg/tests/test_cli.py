import json
import math
import shutil
import subprocess

import pytest

from psalink import config, records
from psalink.cli import main
from psalink.continuous import state_amplitude_restoration
from psalink.shannon import capacity_homodyne

# g(100 e^-5) in bits, from mpmath at 30 digits
G_PURE_LOSS = 1.6276409160147898


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def link_cfg(tmp_path, alpha=0.05, length=100.0, nbar=100.0, amps=""):
    return write(tmp_path, f"[link]\nalpha_per_km = {alpha}\nlength_km = {length}\nnbar = {nbar}\n{amps}")


def run_json(capsys, *argv):
    assert main(list(argv) + ["--format", "json", "--no-metadata"]) == 0
    return json.loads(capsys.readouterr().out)


def test_capacity_pure_loss(tmp_path, capsys):
    rec = run_json(capsys, "capacity", "--config", link_cfg(tmp_path, amps="[amplifiers]\ncount = 0\n"))["record"]
    assert rec["c_gh_optimal"] == pytest.approx(G_PURE_LOSS, rel=1e-8)
    assert rec["c_homodyne"] == pytest.approx(capacity_homodyne(400 * math.exp(-5)), rel=1e-14)
    assert rec["tau"] == pytest.approx(math.exp(-5), rel=1e-14)


def test_capacity_identity_link(tmp_path, capsys):
    cfg = link_cfg(tmp_path, alpha=0.0, nbar=1.0,
                   amps="[amplifiers]\npositions_km = [50.0]\ngains = [1.0]\n")
    rec = run_json(capsys, "capacity", "--config", cfg)["record"]
    assert rec["c_gh_optimal"] == pytest.approx(2.0, rel=1e-9)  # g(1) = 2 bits
    assert rec["regime"] == "explicit"


def test_many_amplifiers_approach_continuous(tmp_path, capsys):
    cfg = link_cfg(tmp_path, amps='[amplifiers]\ncount = 1000\nregime = "amplitude"\n')
    rec = run_json(capsys, "capacity", "--config", cfg)["record"]
    s = state_amplitude_restoration(0.05, 100, 100)
    assert rec["c_homodyne"] == pytest.approx(capacity_homodyne(s.s_q / s.n_q), rel=0.01)


def test_continuous_count(tmp_path, capsys):
    cfg = link_cfg(tmp_path, amps='[amplifiers]\ncount = "continuous"\nregime = "power"\n')
    rec = run_json(capsys, "capacity", "--config", cfg)["record"]
    assert rec["R"] == "continuous"
    assert rec["c_homodyne"] > 0


SWEEP = """[link]
alpha_per_km = 0.05
nbar = 10.0
[sweep]
length_start_km = 10
length_stop_km = {stop}
length_step_km = 10
counts = [0, 2, "continuous"]
regimes = ["amplitude", "power"]
"""


def test_sweep_csv_round_trip(tmp_path, capsys):
    cfg = write(tmp_path, SWEEP.format(stop=60))
    out = tmp_path / "a.csv"
    assert main(["sweep", "--config", cfg, "--format", "csv", "--output", str(out), "--no-timestamp"]) == 0
    text = out.read_text()
    rows = records.read_csv(text)
    # count 0 appears once, others once per regime; lengths 10..50
    assert len(rows) == 5 * (1 + 2 + 2)
    # 17 significant digits survive the round trip exactly
    direct = [records.evaluate(pt) for pt in config.sweep_config(config.load(cfg)).points()]
    for row, rec in zip(rows, direct):
        for col in ("L", "c_homodyne", "c_dual", "c_gh_optimal", "tau", "omega"):
            want = getattr(rec, col)
            assert row[col] == want or (math.isnan(want) and math.isnan(row[col]))
    assert not any("generated" in ln for ln in text.splitlines() if ln.startswith("#"))


def test_sweep_output_is_reproducible(tmp_path):
    cfg = write(tmp_path, SWEEP.format(stop=40))
    outs = []
    for name, threads in (("x.csv", "1"), ("y.csv", "3")):
        path = tmp_path / name
        assert main(["sweep", "--config", cfg, "--format", "csv", "--output", str(path),
                     "--no-timestamp", "--threads", threads]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_empty_length_range_gives_header_only(tmp_path, capsys):
    cfg = write(tmp_path, SWEEP.format(stop=10))
    assert main(["sweep", "--config", cfg, "--format", "csv", "--no-metadata"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == [",".join(records.columns(False))]


def test_timings_column(tmp_path, capsys):
    cfg = write(tmp_path, SWEEP.format(stop=30))
    assert main(["sweep", "--config", cfg, "--format", "csv", "--no-metadata", "--timings"]) == 0
    rows = records.read_csv(capsys.readouterr().out)
    assert all(r["t_eval_s"] >= 0 for r in rows)


def test_bad_config_exits_2(tmp_path, capsys):
    cfg = link_cfg(tmp_path, alpha=-1.0, amps="[amplifiers]\ncount = 1\n")
    assert main(["capacity", "--config", cfg]) == 2
    assert "alpha_per_km" in capsys.readouterr().err
    assert main(["capacity", "--config", str(tmp_path / "missing.toml")]) == 2


def test_bad_thread_env_exits_2(tmp_path, monkeypatch):
    monkeypatch.setenv("PSALINK_THREADS", "zero")
    assert main(["sweep", "--config", write(tmp_path, SWEEP.format(stop=30))]) == 2


def test_infeasible_plan_exits_3(tmp_path, capsys):
    cfg = link_cfg(tmp_path, nbar=1.0,
                   amps='[amplifiers]\nregime = "power"\npositions_km = [50.0]\ngains = [1000.0]\n')
    assert main(["capacity", "--config", cfg]) == 3
    assert "infeasible" in capsys.readouterr().err


def test_validate_passes_and_fails(tmp_path, capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 4
    cfg = write(tmp_path, "[validate]\node_rel_tol = 1e-30\n")
    assert main(["validate", "--config", cfg]) == 4
    assert "FAIL" in capsys.readouterr().out


def test_optimize_outputs(tmp_path, capsys):
    cfg = link_cfg(tmp_path, nbar=10.0, amps='[amplifiers]\ncount = 2\nregime = "power"\n')
    doc = run_json(capsys, "optimize", "--config", cfg)
    assert len(doc["amp_gains"]) == 2 and doc["converged"]
    assert doc["feasibility_margin"] >= -1e-8
    assert main(["optimize", "--config", cfg, "--format", "csv", "--no-metadata"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert "index,position_km,gain" in lines and len([ln for ln in lines if not ln.startswith("#")]) == 3


def test_metadata_lines(tmp_path, capsys):
    cfg = link_cfg(tmp_path, amps="[amplifiers]\ncount = 1\n")
    assert main(["capacity", "--config", cfg, "--format", "csv"]) == 0
    meta = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("#")]
    keys = {ln[2:].split(" ", 1)[0] for ln in meta}
    assert {"psalink", "numpy", "kernel_backend", "config_sha256", "generated"} <= keys


@pytest.mark.skipif(shutil.which("psalink") is None, reason="console script not installed")
def test_console_script(tmp_path):
    cfg = link_cfg(tmp_path, amps="[amplifiers]\ncount = 0\n")
    res = subprocess.run(["psalink", "capacity", "--config", cfg], capture_output=True, text=True)
    assert res.returncode == 0 and "c_homodyne" in res.stdout
