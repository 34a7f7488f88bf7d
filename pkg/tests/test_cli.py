import json
import subprocess
import sys

import numpy as np
import pytest

from qipflow import io as qio
from qipflow.channels import OhmicSpectralDensity
from qipflow.cli import main
from qipflow.states import DensityMatrix, werner
from qipflow.witnesses import n_q_dephasing_analytic

SMALL = ["--grid-points", "401"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    meta, cols, rows = qio.parse_csv(text)
    return meta, {c: rows[:, k] for k, c in enumerate(cols)}


class TestEvolve:
    def test_dephasing(self, capsys):
        code, out, _ = run(capsys, "evolve", "--channel", "dephasing", "--S", "3", "--alpha", "0.1", *SMALL)
        assert code == 0
        meta, t = table(out)
        assert meta["time_unit"] == "1/omega_c"
        assert list(t) == ["t", "gamma", "Gamma"]
        assert t["Gamma"][0] == 1.0
        assert t["t"][-1] == 50.0

    def test_damping(self, capsys):
        code, out, _ = run(capsys, "evolve", "--channel", "damping", "--lambda-over-gamma0", "0.1",
                           "--delta", "0.01")
        assert code == 0
        meta, t = table(out)
        assert meta["time_unit"] == "1/gamma0"
        assert np.any(np.diff(t["absJ"]) > 0)
        np.testing.assert_allclose(t["absJ"], np.hypot(t["ReJ"], t["ImJ"]), rtol=1e-10)

    def test_missing_channel(self, capsys):
        code, _, err = run(capsys, "evolve", "--S", "3")
        assert code == 2
        assert "--channel" in err

    def test_natural_units(self, capsys):
        _, a, _ = run(capsys, "evolve", "--channel", "dephasing", "--omega-c", "2", *SMALL)
        _, b, _ = run(capsys, "evolve", "--channel", "dephasing", "--omega-c", "1", *SMALL)
        np.testing.assert_allclose(table(a)[1]["Gamma"], table(b)[1]["Gamma"], rtol=1e-9)

    def test_volterra_method(self, capsys):
        args = ["evolve", "--channel", "damping", "--lambda-over-gamma0", "0.5", "--t-max", "10",
                "--grid-points", "201"]
        _, closed, _ = run(capsys, *args)
        _, volt, _ = run(capsys, *args, "--method", "volterra")
        assert np.max(np.abs(table(closed)[1]["absJ"] - table(volt)[1]["absJ"])) < 1e-4


class TestQipFlow:
    @pytest.mark.parametrize("ratio", ["10", "0.5", "0.1"])
    def test_werner_damping_q_equals_absj(self, capsys, ratio):
        code, out, _ = run(capsys, "qip-flow", "--channel", "damping", "--lambda-over-gamma0", ratio,
                           "--state", "werner", "--r", "1")
        assert code == 0
        _, t = table(out)
        np.testing.assert_allclose(t["Q"], t["absJ"], atol=1e-8)

    def test_compare_columns(self, capsys):
        code, out, _ = run(capsys, "qip-flow", "--channel", "damping", "--lambda-over-gamma0", "0.01",
                           "--delta", "0.001", "--state", "werner", "--r", "0.45", "--compare")
        assert code == 0
        _, t = table(out)
        assert list(t) == ["t", "Q", "absJ", "C", "I", "absJ_half"]
        assert np.min(t["C"]) < 1e-10

    def test_empty_grid(self, capsys):
        code, _, err = run(capsys, "qip-flow", "--channel", "dephasing", "--t-max", "0")
        assert code == 2
        assert "too short" in err

    def test_state_file(self, capsys, tmp_path):
        path = tmp_path / "w.json"
        path.write_text(qio.dump_density(DensityMatrix(werner(1.0))))
        a = run(capsys, "qip-flow", "--channel", "damping", "--state-file", str(path))[1]
        b = run(capsys, "qip-flow", "--channel", "damping", "--state", "werner", "--r", "1")[1]
        np.testing.assert_array_equal(table(a)[1]["Q"], table(b)[1]["Q"])

    def test_invalid_state_file(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dims": [2, 2], "re": [1] + [0] * 15, "im": [0] * 16}).replace("1", "2", 1))
        code, _, _ = run(capsys, "qip-flow", "--channel", "damping", "--state-file", str(path))
        assert code == 2


class TestMeasure:
    def test_divisible(self, capsys):
        code, out, _ = run(capsys, "measure", "--measure", "qip", "--channel", "dephasing", "--S", "1.5")
        assert code == 0
        doc = json.loads(out)
        assert doc["value"] == 0.0 and doc["intervals"] == []

    def test_matches_analytic(self, capsys):
        code, out, _ = run(capsys, "measure", "--measure", "qip", "--channel", "dephasing", "--S", "3",
                           "--convention", "sqrt")
        doc = json.loads(out)
        oracle = n_q_dephasing_analytic(OhmicSpectralDensity(0.5, 1.0, 3.0), 50.0)
        assert abs(doc["value"] - oracle) < 1e-4
        assert doc["convention"] == "sqrt"
        assert doc["grid"]["points"] == 4001

    def test_rhp(self, capsys):
        doc = json.loads(run(capsys, "measure", "--measure", "rhp", "--channel", "dephasing", "--S", "3")[1])
        assert doc["value"] > 0
        assert "step" in doc

    def test_blp_and_mutual(self, capsys):
        for m in ("blp", "mutual"):
            code, out, _ = run(capsys, "measure", "--measure", m, "--channel", "damping",
                               "--lambda-over-gamma0", "0.1")
            assert code == 0 and json.loads(out)["value"] > 0

    def test_pair_file(self, capsys, tmp_path):
        plus = DensityMatrix(np.full((2, 2), 0.5), (2,)).to_dict()
        minus = DensityMatrix(np.array([[0.5, -0.5], [-0.5, 0.5]]), (2,)).to_dict()
        path = tmp_path / "pair.json"
        path.write_text(json.dumps({"states": [plus, minus]}))
        a = json.loads(run(capsys, "measure", "--measure", "blp", "--channel", "dephasing",
                           "--pair-file", str(path), *SMALL)[1])
        b = json.loads(run(capsys, "measure", "--measure", "blp", "--channel", "dephasing", *SMALL)[1])
        assert a["value"] == b["value"]

    def test_family(self, capsys):
        doc = json.loads(run(capsys, "measure", "--measure", "qip", "--channel", "damping",
                             "--lambda-over-gamma0", "0.1", "--family", "werner_grid")[1])
        assert doc["initial_state"] == "werner(r=1)"
        assert doc["lower_bound"] is True

    def test_trajectory_csv(self, capsys, tmp_path):
        path = tmp_path / "q.csv"
        run(capsys, "measure", "--measure", "qip", "--channel", "dephasing", "--trajectory-csv", str(path),
            *SMALL)
        _, t = table(path.read_text())
        assert list(t) == ["t", "value", "derivative"]

    def test_missing_measure(self, capsys):
        code, _, err = run(capsys, "measure", "--channel", "dephasing")
        assert code == 2 and "--measure" in err


class TestSweep:
    def test_dephasing(self, capsys):
        code, out, _ = run(capsys, "sweep", "--channel", "dephasing", "--S-values",
                           "1,1.5,2,2.5,3,3.5,4,4.5,5,5.5,6", "--jobs", "2")
        assert code == 0
        _, t = table(out)
        low = t["S"] <= 2
        for col in ("N_Q", "N_BLP", "N_I", "N_RHP"):
            assert np.all(t[col][low] <= 1e-8)
        q = t["N_Q"][~low]
        k = int(np.argmax(q))
        assert 0 < k < q.size - 1
        assert np.all(np.diff(q[k:]) < 0)

    def test_damping(self, capsys):
        code, out, _ = run(capsys, "sweep", "--channel", "damping")
        assert code == 0
        _, t = table(out)
        np.testing.assert_array_equal(t["lambda_over_gamma0"], [10, 1, 0.5, 0.1])
        nq = t["N_Q"]
        assert nq[0] <= 1e-8 and np.all(nq[1:] > 1e-6)

    def test_parallel_matches_serial(self, capsys):
        args = ["sweep", "--channel", "dephasing", "--S-values", "2.5,3.5", *SMALL]
        assert run(capsys, *args)[1] == run(capsys, *args, "--jobs", "2")[1]


class TestPlotScript:
    def test_three_csv_script(self, capsys, tmp_path):
        paths = []
        for ratio in ("10", "0.5", "0.1"):
            p = tmp_path / f"flow_{ratio}.csv"
            run(capsys, "qip-flow", "--channel", "damping", "--lambda-over-gamma0", ratio,
                "--state", "werner", "--r", "1", "--out", str(p), "--grid-points", "61")
            paths.append(str(p))
        code, out, _ = run(capsys, "plot-script", "--figure", "2", *sum((["--csv", p] for p in paths), []))
        assert code == 0
        assert all(p in out for p in paths)
        assert out.count("using 1:2") == 3

    def test_four_column_script(self, capsys, tmp_path):
        p = tmp_path / "compare.csv"
        run(capsys, "qip-flow", "--channel", "damping", "--lambda-over-gamma0", "0.01", "--delta", "0.001",
            "--state", "werner", "--r", "0.45", "--compare", "--out", str(p), "--grid-points", "61")
        out = run(capsys, "plot-script", "--figure", "3", "--csv", str(p))[1]
        assert out.count(" with lines ") == 4

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "plot-script", "--figure", "2", "--csv", str(tmp_path / "nope.csv"))
        assert code == 2 and "not found" in err


class TestConfig:
    def test_precedence(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# dephasing run\nchannel = dephasing\nS = 1\ngrid_points = 101\n")
        _, from_file, _ = run(capsys, "evolve", "--config", str(cfg))
        _, override, _ = run(capsys, "evolve", "--config", str(cfg), "--S", "3")
        _, direct, _ = run(capsys, "evolve", "--channel", "dephasing", "--S", "3", "--grid-points", "101")
        assert override == direct
        assert from_file != override
        assert table(from_file)[0]["S"] == "1.0"

    def test_bad_value(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("channel = dephasing\nalpha = lots\n")
        code, _, _ = run(capsys, "evolve", "--config", str(cfg))
        assert code == 2

    def test_missing_config(self, capsys, tmp_path):
        code, _, _ = run(capsys, "evolve", "--config", str(tmp_path / "none.cfg"))
        assert code == 2

    def test_nonpositive_parameter(self, capsys):
        code, _, _ = run(capsys, "evolve", "--channel", "dephasing", "--alpha", "-1")
        assert code == 2

    def test_numerical_failure_exit(self, capsys):
        code, _, err = run(capsys, "evolve", "--channel", "damping", "--method", "volterra",
                           "--lambda-over-gamma0", "0.1", "--grid-points", "7")
        assert code == 3
        assert "numerical failure" in err


class TestRoundTrip:
    def test_csv(self, capsys):
        out = run(capsys, "qip-flow", "--channel", "damping", "--compare", "--grid-points", "301")[1]
        meta, cols, rows = qio.parse_csv(out)
        assert qio.format_csv(cols, rows, meta) == out

    def test_density_json(self, rng):
        from qipflow.states import random_density
        dm = DensityMatrix(random_density(rng))
        assert np.array_equal(qio.load_density(qio.dump_density(dm)).matrix, dm.matrix)

    def test_csv_format(self):
        text = qio.format_csv(["a"], [[-0.0], [1 / 3]])
        assert text.splitlines()[1:] == ["0.00000000000e+00", "3.33333333333e-01"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qipflow", "evolve", "--channel", "dephasing",
                           "--grid-points", "11"], capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[-1].startswith("5.00000000000e+01,")
