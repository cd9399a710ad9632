import json
import math

import numpy as np
import pytest

from crchains import io
from crchains.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_OK,
    cmd_bifurcation_scan,
    cmd_classify,
    cmd_delta_theta,
    cmd_phase_portrait,
    cmd_trace_chain,
    k_values,
    main,
)
from crchains.reduced_dynamics import SQRT3

K_HOM = 0.87890625


def _run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def _finite(records):
    for rec in records:
        for v in rec.values():
            if isinstance(v, float):
                assert math.isfinite(v)


def test_bifurcation_scan_brackets_sqrt3(tmp_path):
    code, out = _run(tmp_path, "bifurcation-scan", "--a-range", "1.5", "2.0", "--step", "1e-3")
    assert code == EXIT_OK
    meta, cols, recs = io.read_table(out)
    root = float(meta["bifurcations"])
    assert abs(root - SQRT3) < 1e-6
    kinds = [r["origin_kind"] for r in recs]
    i = kinds.index("saddle")
    assert recs[i - 1]["a"] <= SQRT3 <= recs[i]["a"] and recs[i]["a"] - recs[i - 1]["a"] <= 1e-3 + 1e-12
    _finite(recs)


def test_bifurcation_scan_other_intervals():
    meta, _, _ = cmd_bifurcation_scan(0.5, 0.7)
    assert len(meta["bifurcations"]) == 1 and abs(meta["bifurcations"][0] - 1 / SQRT3) < 1e-6
    meta, _, rows = cmd_bifurcation_scan(1.0, 1.5)
    assert meta["bifurcations"] == []
    assert {r[4] for r in rows} == {"minimum"}


def test_phase_portrait_topologies():
    Ks = [27 / 32 + 1e-3, 0.86, K_HOM, K_HOM + 0.1]
    _, cols, rows = cmd_phase_portrait(2.0, Ks, samples=50)
    tags = {}
    for r in rows:
        tags.setdefault(r[0], set()).add((r[1], r[2]))
    assert {t for t, _ in tags[0.86]} == {"two-curves"} and len(tags[0.86]) == 2
    assert {t for t, _ in tags[K_HOM]} == {"figure-eight"}
    assert {t for t, _ in tags[K_HOM + 0.1]} == {"one-curve"} and len(tags[K_HOM + 0.1]) == 1
    _, _, rows = cmd_phase_portrait(1.0, [0.7, 1.0, 3.0], samples=20)
    assert {r[1] for r in rows} == {"one-curve"}
    _, _, rows = cmd_phase_portrait(1.0, [0.1], samples=20)
    assert rows == [[0.1, "empty", None, None, None, None]]


def test_delta_theta_sweep():
    Ks = np.linspace(0.846, 0.878, 5).tolist()
    meta, cols, rows = cmd_delta_theta(2.0, Ks)
    assert cols == list(io.SWEEP_COLUMNS)
    dt = [r[5] for r in rows]
    assert max(dt) - min(dt) > 0.1
    assert all(b > a for a, b in zip(dt, dt[1:]))
    assert all(r[7] < 1e-4 for r in rows)
    # a homoclinic level in the sweep is tagged, not an error
    _, _, rows = cmd_delta_theta(2.0, [K_HOM])
    assert rows[0][8] == "homoclinic" and rows[0][2] is None


def test_parallel_sweep_is_deterministic(tmp_path):
    args = ["delta-theta", "--a", "2", "--K-range", "0.85", "0.87", "--n", "4"]
    _, serial = _run(tmp_path, *args, "--jobs", "1", name="a.csv")
    _, parallel = _run(tmp_path, *args, "--jobs", "2", name="b.csv")
    _, again = _run(tmp_path, *args, "--jobs", "2", name="c.csv")
    assert serial.read_bytes() == parallel.read_bytes() == again.read_bytes()


def test_trace_chain_default_schema(tmp_path):
    code, out = _run(tmp_path, "trace-chain", "--a", "2", "--K", "0.86", "--n", "50")
    assert code == EXIT_OK
    meta, cols, recs = io.read_table(out)
    assert tuple(cols) == io.TRAJECTORY_COLUMNS
    assert len(recs) == 50
    _finite(recs)
    assert "git_revision" in meta and "tol" in meta


def test_trace_chain_closed_form_at_a1():
    meta, cols, rows = cmd_trace_chain(1.0, M0=(1.0, 0.0), n=100, closed_form=True)
    assert cols[-1] == "deviation"
    assert meta["max_deviation"] < 1e-6
    with pytest.raises(Exception):
        cmd_trace_chain(2.0, M0=(1.0, 0.0), closed_form=True)


def test_trace_chain_p_zero_has_constant_hopf_projection():
    meta, cols, rows = cmd_trace_chain(2.0, p_zero=True, n=40)
    hp = np.array([r[-3:] for r in rows])
    assert np.max(np.abs(hp - hp[0])) < 1e-12
    assert meta["max_deviation"] < 1e-8


def test_classify_command(tmp_path):
    code, out = _run(tmp_path, "classify", "--a", "2", "--K", str(K_HOM), "0.86", "--format", "json", name="c.json")
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    kinds = {r["K"]: r["class"] for r in doc["records"]}
    assert kinds[K_HOM] == "homoclinic"
    assert kinds[0.86] in ("periodic", "quasi-periodic")
    meta, _, rows = cmd_classify(2.0, [0.86], resonant=2)
    assert len(meta["resonant_levels"]) == 2
    assert sum(r[8] == "periodic" for r in rows) >= 2
    _, _, rows = cmd_classify(1.3, [0.0], p_zero=True)
    assert rows[0][8] == "reeb-orbit"


def test_exit_codes(tmp_path, capsys):
    assert main(["classify", "--a", "2", "--K", "0.1"]) == EXIT_CONFIG
    assert main(["delta-theta", "--a", "-1", "--K", "1"]) == EXIT_CONFIG
    assert main(["delta-theta", "--a", "2", "--K-range", "0.9", "0.8", "--n", "3"]) == EXIT_CONFIG
    assert main(["trace-chain", "--a", "2", "--K", "0.86", "--tol", "0"]) == EXIT_CONFIG
    assert main(["trace-chain", "--a", "2", "--K", "0.86", "--out", str(tmp_path / "no" / "such" / "dir.csv")]) == EXIT_IO
    assert main(["trace-chain", "--a", "2", "--K", "0.8789", "--t-end", "1"]) == EXIT_OK
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_numerical_failure_exit_code(monkeypatch):
    import crchains.cli as cli
    from crchains.exceptions import StiffnessError

    def boom(*a, **k):
        raise StiffnessError("step size underflow")

    monkeypatch.setattr(cli, "reconstruct_chain", boom)
    assert main(["trace-chain", "--a", "2", "--K", "0.86"]) == EXIT_NUMERICAL


def test_k_values():
    assert k_values([0.3, 0.1]) == [0.1, 0.3]
    assert k_values(K_range=(0.0, 1.0), n=3) == [0.0, 0.5, 1.0]
    with pytest.raises(Exception):
        k_values()


def test_render_formats_and_nan_handling():
    text = io.render(["x", "y"], [[1.0, float("nan")], [2, None]], {"a": 1.5}, "csv")
    assert "nan" not in text.lower()
    assert text.splitlines()[:2] == ["# a = 1.5", "x,y"]
    doc = json.loads(io.render(["x"], [[float("inf")]], {}, "json"))
    assert doc["records"] == [{"x": None}]
    with pytest.raises(Exception):
        io.render(["x"], [], {}, "xml")
