import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from cohere import qmat
from cohere.cli import DEFAULT_SEED, dispatch
from cohere.qmat import PAULI_Z, dagger


@pytest.fixture
def files(tmp_path):
    def write(name, m):
        path = tmp_path / name
        qmat.save_matrix(path, np.asarray(m, dtype=complex))
        return str(path)

    out = {
        "mixed_qubit": write("mixed_qubit.json", np.diag([0.75, 0.25])),
        "mm3": write("maximally_mixed_3.json", np.eye(3) / 3),
        "ket0": write("ket0.json", np.diag([1, 0])),
        "ket1": write("ket1.json", np.diag([0, 1])),
        "half": write("half.json", np.eye(2) / 2),
        "mm4": write("mm4.json", np.eye(4) / 4),
        "z": write("z.json", PAULI_Z),
        "zi": write("zi.json", np.kron(PAULI_Z, np.eye(2))),
        "zi_dag": write("zi_dag.json", dagger(np.kron(PAULI_Z, np.eye(2)))),
        "not_psd": write("not_psd.json", np.diag([1.5, -0.5])),
        "bad_trace": write("bad_trace.json", np.diag([0.5, 0.4])),
    }
    bad = tmp_path / "garbage.json"
    bad.write_text("{not json")
    out["garbage"] = str(bad)
    short = tmp_path / "short.json"
    short.write_text(json.dumps({"dim": 2, "entries": [[1, 0]]}))
    out["short"] = str(short)
    return out


def run_ok(argv):
    code, out, err = dispatch(argv)
    assert code == 0, err
    return out


def test_measure_mixed_qubit(files):
    doc = json.loads(run_ok(["measure", "--state", files["mixed_qubit"]]))
    assert doc["schema"] == 1
    assert doc["c2"] == pytest.approx(0.125, abs=1e-12)
    assert doc["purity"] == pytest.approx(0.625, abs=1e-12)
    assert "c1" not in doc


def test_measure_maximally_mixed_is_zero(files):
    doc = json.loads(run_ok(["measure", "--state", files["mm3"]]))
    for key in ("c2", "c_re", "c_skew", "c_trace"):
        assert doc[key] == pytest.approx(0, abs=1e-12)


def test_measure_with_c1_and_csv(files):
    doc = json.loads(run_ok(["measure", "--state", files["mixed_qubit"], "--with-c1",
                             "--restarts", "2"]))
    assert doc["c1"] == pytest.approx(0.5, abs=1e-6)
    rows = list(csv.DictReader(io.StringIO(run_ok(["measure", "--state", files["mixed_qubit"],
                                                   "--output", "csv"]))))
    assert rows[0]["schema"] == "1" and rows[0]["c2"] == "0.125"


def test_measure_log_base(files):
    doc = json.loads(run_ok(["measure", "--state", files["ket0"], "--log-base", str(np.e)]))
    assert doc["c_re"] == pytest.approx(np.log(2), abs=1e-12)


@pytest.mark.parametrize("key,invariant", [("not_psd", "positive-semidefinite"),
                                           ("bad_trace", "unit-trace")])
def test_invalid_state_exit_1_names_invariant(files, key, invariant):
    code, out, err = dispatch(["measure", "--state", files[key]])
    assert code == 1 and out == ""
    assert invariant in err


@pytest.mark.parametrize("key", ["garbage", "short"])
def test_malformed_file_exit_1(files, key):
    code, _, err = dispatch(["measure", "--state", files[key]])
    assert code == 1 and err


def test_missing_file_exit_1(tmp_path):
    code, _, _ = dispatch(["measure", "--state", str(tmp_path / "nope.json")])
    assert code == 1


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["measure"], ["swap-test", "--copies", "x"],
                                  ["measure", "--state", "a", "--output", "xml"],
                                  ["verify", "--seed", "-1"], ["verify", "--seed", str(2**64)]])
def test_usage_errors_exit_2(argv):
    code, out, _ = dispatch(argv)
    assert code == 2 and out == ""


def test_help_exits_0():
    code, _, _ = dispatch(["--help"])
    assert code == 0


def test_optimize(files):
    doc = json.loads(run_ok(["optimize", "--state", files["mixed_qubit"], "--objective", "l2",
                             "--restarts", "2", "--seed", "3"]))
    assert doc["value"] == pytest.approx(0.125, abs=1e-9)
    u = qmat.matrix_from_doc(doc["unitary"])
    qmat.as_unitary(u, tol=1e-9)


def test_swap_test(files):
    doc = json.loads(run_ok(["swap-test", "--state", files["mixed_qubit"], "--copies", "2"]))
    assert doc["probability"] == pytest.approx((1 + 0.625) / 2, abs=1e-12)
    assert doc["moment"] == pytest.approx(0.625, abs=1e-12)


def test_swap_test_shots_reproducible(files):
    argv = ["swap-test", "--state", files["mixed_qubit"], "--copies", "2", "--shots", "1000",
            "--seed", "11"]
    a, b = run_ok(argv), run_ok(argv)
    assert a == b
    doc = json.loads(a)
    assert doc["seed"] == 11 and 0 <= doc["plus_count"] <= 1000


def test_swap_test_rejects_large_joint(files):
    code, _, _ = dispatch(["swap-test", "--state", files["mm3"], "--copies", "7"])
    assert code == 1


def test_probe_general(files):
    doc = json.loads(run_ok(["probe", "--system", files["half"], "--unitary", files["z"]]))
    assert doc["cost"] == pytest.approx(0.5, abs=1e-12)
    assert doc["terms"][0]["normalized_trace_abs"] == pytest.approx(0, abs=1e-12)
    final = doc["terms"][0]["final_probe"]
    assert final["c2"] == pytest.approx(0, abs=1e-12) and final["c_trace"] == pytest.approx(0, abs=1e-12)


def test_probe_dqc1_pair(files):
    doc = json.loads(run_ok(["probe", "--dqc1", "2", "--unitary", files["zi"], files["zi_dag"]]))
    assert doc["mode"] == "dqc1"
    assert doc["cost"] == pytest.approx(1.0, abs=1e-12)


def test_probe_qom(files):
    doc = json.loads(run_ok(["probe", "--qom", files["ket0"], files["ket1"]]))
    assert doc["overlap"] == pytest.approx(0, abs=1e-12)
    assert doc["delta_c"] == pytest.approx(0.5, abs=1e-12)
    doc = json.loads(run_ok(["probe", "--qom", files["half"], files["half"]]))
    assert (doc["overlap"], doc["delta_c"]) == pytest.approx((0.5, 0.375), abs=1e-12)


def test_probe_bad_bloch_and_dims(files):
    code, _, _ = dispatch(["probe", "--bloch", "1,1,1", "--system", files["half"],
                           "--unitary", files["z"]])
    assert code == 1
    code, _, _ = dispatch(["probe", "--system", files["mm3"], "--unitary", files["z"]])
    assert code == 1


def test_verify_monotonicity_deterministic():
    argv = ["verify", "--suite", "monotonicity", "--samples", "100", "--seed", "7", "--jobs", "1"]
    a, b = run_ok(argv), run_ok(argv)
    assert a == b
    assert a.strip() == "suite=monotonicity seed=7 samples=100 passed=100 failed=0"


def test_verify_independent_of_jobs():
    base = ["verify", "--suite", "closed-form", "--samples", "40", "--seed", "5"]
    assert run_ok(base + ["--jobs", "1"]) == run_ok(base + ["--jobs", "4"])


def test_sweep_qom_anchor_rows():
    rows = list(csv.DictReader(io.StringIO(run_ok(["sweep", "--preset", "qom-overlap"]))))
    assert len(rows) == 11
    first = {k: float(v) for k, v in rows[0].items()}
    last = {k: float(v) for k, v in rows[-1].items()}
    assert first["overlap"] == 0 and first["delta_c"] == pytest.approx(0.5, abs=1e-12)
    assert last["overlap"] == 1 and last["delta_c"] == pytest.approx(0, abs=1e-12)
    for r in rows:
        t = float(r["overlap"])
        assert float(r["delta_c"]) == pytest.approx(0.5 * (1 - t * t), abs=1e-11)
        assert float(r["delta_c_circuit"]) == pytest.approx(float(r["delta_c"]), abs=1e-10)


def test_sweep_purity_c2_column():
    rows = list(csv.DictReader(io.StringIO(run_ok(["sweep", "--preset", "purity", "--points", "21"]))))
    for r in rows:
        assert float(r["c2"]) == pytest.approx(float(r["purity"]) - 0.5, abs=1e-11)


def test_sweep_json_and_bad_grid():
    doc = json.loads(run_ok(["sweep", "--preset", "dqc1-phase", "--output", "json", "--points", "3"]))
    assert doc["schema"] == 1 and len(doc["rows"]) == 3
    assert doc["rows"][1][2] == pytest.approx(0.25, abs=1e-12)
    code, _, _ = dispatch(["sweep", "--preset", "purity", "--points", "1"])
    assert code == 1


def test_csv_uses_12_significant_digits():
    out = run_ok(["sweep", "--preset", "qom-overlap", "--points", "4"])
    val = list(csv.DictReader(io.StringIO(out)))[1]["overlap"]
    assert val == f"{1 / 3:.12g}"


def test_byte_identical_outputs(files):
    argv = ["optimize", "--state", files["mixed_qubit"], "--restarts", "3", "--max-iters", "50"]
    assert run_ok(argv) == run_ok(argv)
    assert run_ok(argv) == run_ok(argv + ["--seed", str(DEFAULT_SEED)])


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "cohere", "measure", "--state", files["mixed_qubit"]],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["c2"] == pytest.approx(0.125)
    proc = subprocess.run([sys.executable, "-m", "cohere", "measure", "--state", files["not_psd"]],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 1 and "positive-semidefinite" in proc.stderr
