import json

import numpy as np
import pytest

from hsvt import cli, io
from hsvt.compiler import PhaseSchedule


def run(argv):
    return cli.main(argv)


# -- exit codes --------------------------------------------------------------

def test_unknown_config_key_exits_2(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"kind": "sine", "bogus": 1}))
    assert run(["synthesize", "--config", str(cfg), "--k", "1"]) == 2


def test_invalid_config_json_exits_2(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert run(["synthesize", "--config", str(cfg)]) == 2


def test_bad_matrix_file_exits_3(tmp_path):
    bad = tmp_path / "m.json"
    bad.write_text(json.dumps({"rows": 2, "cols": 2, "entries": [[1, 0]]}))
    sch = tmp_path / "s.txt"
    sch.write_text(PhaseSchedule(steps=()).to_text())
    assert run(["simulate", "--matrix", str(bad), "--schedule", str(sch)]) == 3


def test_history_unit_sigma_exits_4(tmp_path):
    m = tmp_path / "m.json"
    io.write_matrix(m, np.eye(2))
    v = tmp_path / "v.json"
    io.write_state(v, np.array([1.0, 0.0]))
    assert run(["history", "--matrix", str(m), "--state", str(v),
                "--n", "2"]) == 4


def test_unknown_sweep_mode_exits_2():
    assert run(["sweep", "--mode", "degree", "--ks", ""]) == 0


# -- synthesize --------------------------------------------------------------

def test_synthesize_sine_single_step(tmp_path):
    out = tmp_path / "sched.txt"
    rep = tmp_path / "rep.json"
    code = run(["synthesize", "--kind", "sine", "--sigma-lo", "0.3",
                "--sigma-hi", "0.8", "--k", "1", "--metric", "corner",
                "--schedule-out", str(out), "--report-out", str(rep)])
    assert code == 0
    sch = PhaseSchedule.from_text(out.read_text())
    assert sch.degree == 1
    assert sch.steps[0].phi == pytest.approx(np.pi)
    assert sch.steps[0].t == pytest.approx(1.0, abs=1e-6)
    report = io.read_report(rep)
    assert report["k"] == 1
    assert report["synthesis"]["converged"]


def test_synthesize_then_simulate_pipeline(tmp_path):
    sched = tmp_path / "sched.txt"
    m = tmp_path / "m.json"
    rep = tmp_path / "rep.json"
    io.write_matrix(m, np.diag([0.5, 0.6]))
    code = run(["synthesize", "--kind", "identity", "--sigma-lo", "0.4",
                "--sigma-hi", "0.8", "--eps", "1e-2", "--variable-t",
                "--seed", "0", "--schedule-out", str(sched),
                "--report-out", str(tmp_path / "syn.json")])
    assert code == 0
    code = run(["simulate", "--matrix", str(m), "--schedule", str(sched),
                "--kind", "identity", "--sigma-lo", "0.4",
                "--sigma-hi", "0.8", "--eps", "1e-2",
                "--report-out", str(rep)])
    assert code == 0
    record = io.read_report(rep)["verification"]
    assert record["passed"]
    assert all(s["in_domain"] for s in record["per_subspace"])


def test_schedule_file_reproducible(tmp_path):
    outs = []
    for name in ("a.txt", "b.txt"):
        out = tmp_path / name
        code = run(["synthesize", "--kind", "identity", "--sigma-lo", "0.35",
                    "--sigma-hi", "0.8", "--k", "8", "--seed", "3",
                    "--eps", "0.05", "--variable-t",
                    "--schedule-out", str(out),
                    "--report-out", str(tmp_path / (name + ".json"))])
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


# -- sweep -------------------------------------------------------------------

def test_empty_degree_sweep_header_only(tmp_path):
    out = tmp_path / "t.csv"
    assert run(["sweep", "--mode", "degree", "--ks", "",
                "--csv-out", str(out)]) == 0
    assert out.read_text() == "k,max_residual,total_time,steps\n"


def test_noise_sweep_csv(tmp_path):
    m = tmp_path / "m.json"
    io.write_matrix(m, np.diag([0.5]))
    sched = tmp_path / "s.txt"
    steps = PhaseSchedule.from_text(
        "# hsvt-schedule v1 k=2 convention=c\n0.3,1\n-0.3,1\n")
    sched.write_text(steps.to_text())
    out = tmp_path / "n.csv"
    code = run(["sweep", "--mode", "noise", "--matrix", str(m),
                "--schedule", str(sched), "--etas", "0,1e-3",
                "--trials", "5", "--csv-out", str(out)])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "eta,mean_distance,total_time,steps"
    assert len(lines) == 3
    assert float(lines[1].split(",")[1]) == 0.0
    assert float(lines[2].split(",")[1]) > 0.0


# -- apply / ode -------------------------------------------------------------

def test_apply_writes_state_and_report(tmp_path):
    m = tmp_path / "m.json"
    io.write_matrix(m, np.diag([0.5, 0.8]))
    v = tmp_path / "v.json"
    psi = np.array([1.0, 1.0]) / np.sqrt(2)
    io.write_state(v, psi)
    rep = tmp_path / "rep.json"
    out = tmp_path / "out.json"
    code = run(["apply", "--matrix", str(m), "--state", str(v),
                "--state-out", str(out), "--report-out", str(rep)])
    assert code == 0
    report = io.read_report(rep)
    assert report["success_prob"] == pytest.approx(0.5 * (0.25 + 0.64))
    got = io.read_state(out)
    want = np.array([0.5, 0.8]) / np.linalg.norm([0.5, 0.8])
    assert np.linalg.norm(np.abs(got) - want) < 1e-10


def test_ode_report_scalar(tmp_path):
    b = tmp_path / "b.json"
    io.write_matrix(b, [[-1.0]])
    v = tmp_path / "v.json"
    io.write_state(v, [1.0])
    rep = tmp_path / "rep.json"
    code = run(["ode", "--generator", str(b), "--state", str(v),
                "--dt", "0.01", "--steps", "100", "--report-out", str(rep)])
    assert code == 0
    report = io.read_report(rep)
    assert report["final_norm"] == pytest.approx(0.99 ** 100, abs=1e-12)
    assert report["total_norm_sq"] == pytest.approx(1.0, abs=1e-12)


def test_report_excluding_timing_reproducible(tmp_path):
    reps = []
    for name in ("r1.json", "r2.json"):
        rep = tmp_path / name
        assert run(["synthesize", "--kind", "sine", "--sigma-lo", "0.3",
                    "--sigma-hi", "0.8", "--k", "1", "--metric", "corner",
                    "--seed", "5", "--report-out", str(rep)]) == 0
        d = io.read_report(rep)
        d.pop("timing")
        d["config"].pop("report_out")
        reps.append(json.dumps(d, sort_keys=True))
    assert reps[0] == reps[1]
