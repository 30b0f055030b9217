import json

import numpy as np
import pytest

import levyspde.errors
from levyspde.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestKernelCommands:
    def test_ml_eval_exponential(self, capsys):
        code, out, _ = run(capsys, "ml-eval", "1.0", "2.0")
        assert code == 0
        val = float(out.split()[-1])
        assert abs(val - np.exp(-2.0)) <= 1e-10

    def test_cq_weights_by_hand(self, capsys):
        code, out, _ = run(capsys, "cq-weights", "1.5", "0.1", "4")
        assert code == 0
        lines = out.strip().splitlines()
        w = [float(l.split()[1]) for l in lines]
        assert w[0] == pytest.approx(0.1**0.5, rel=1e-12)
        assert w[1] / w[0] == pytest.approx(0.5, rel=1e-12)

    def test_seventeen_digit_output(self, capsys):
        _, out, _ = run(capsys, "ml-eval", "1.5", "0.7")
        token = out.split()[-1].lstrip("-").split("e")[0].replace(".", "").lstrip("0")
        assert len(token) >= 17


class TestSamplePath:
    def test_bitwise_stable(self, capsys):
        a = run(capsys, "sample-path", "--seed", "7", "--modes", "3", "--intensity", "2.0")
        b = run(capsys, "sample-path", "--seed", "7", "--modes", "3", "--intensity", "2.0")
        assert a == b and a[0] == 0
        c = run(capsys, "sample-path", "--seed", "8", "--modes", "3", "--intensity", "2.0")
        assert c[1] != a[1]


class TestCheckCondition:
    def test_identity_line(self, capsys):
        code, out, _ = run(
            capsys, "check-condition", "--equation", "heat", "--beta", "1.0", "--decay", "0.55", "--modes", "256"
        )
        assert code == 0
        assert "asymmetric_equals_hs_squared True" in out
        assert "converges True" in out

    def test_boundary_divergence(self, capsys):
        code, out, _ = run(
            capsys, "check-condition", "--equation", "heat", "--beta", "1.5", "--decay", "0.5", "--modes", "64"
        )
        assert code == 0
        assert "converges False" in out

    def test_tail_bound_controls_doubling(self, capsys):
        def grab(modes):
            _, out, _ = run(
                capsys,
                "check-condition",
                "--equation",
                "heat",
                "--beta",
                "1.0",
                "--decay",
                "0.55",
                "--modes",
                str(modes),
            )
            vals = dict(line.split(maxsplit=1) for line in out.strip().splitlines())
            return float(vals["hs_partial_sum"]), float(vals["hs_tail_bound"])

        p1, t1 = grab(512)
        p2, _ = grab(1024)
        assert 0.0 < p2 - p1 <= t1


class TestStudyCommand:
    def test_unknown_equation_exit_1(self, capsys, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"schema_version": 1, "equation": "advection", "axis": "temporal", "beta": 1.0, "ladder": [0.5, 0.25, 0.125, 0.0625]}))
        code, _, err = run(capsys, "study", "--config", str(cfg))
        assert code == 1
        assert "advection" in err

    def test_unknown_keys_rejected(self, capsys, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"schema_version": 1, "equation": "heat", "axis": "temporal", "beta": 1.0, "ladder": [0.5, 0.25, 0.125, 0.0625], "betta": 2}))
        code, _, err = run(capsys, "study", "--config", str(cfg))
        assert code == 1
        assert "betta" in err

    def test_schema_version_required(self, capsys, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"equation": "heat", "axis": "temporal", "beta": 1.0, "ladder": [0.5, 0.25, 0.125, 0.0625]}))
        code, _, err = run(capsys, "study", "--config", str(cfg))
        assert code == 1

    def test_malformed_json_no_traceback(self, capsys, tmp_path):
        cfg = tmp_path / "broken.json"
        cfg.write_text("{not json")
        code, _, err = run(capsys, "study", "--config", str(cfg))
        assert code == 1
        assert "Traceback" not in err

    def test_divergent_covariance_exit_1_with_exponent(self, capsys, tmp_path):
        cfg = tmp_path / "rough.json"
        cfg.write_text(
            json.dumps(
                {
                    "schema_version": 1,
                    "equation": "heat",
                    "axis": "temporal",
                    "beta": 1.0,
                    "modes": 32,
                    "ladder": [0.25, 0.125, 0.0625, 0.03125],
                    "covariance": {"decay": 0.2},
                }
            )
        )
        code, _, err = run(capsys, "study", "--config", str(cfg))
        assert code == 1
        assert "exponent" in err

    def test_unknown_preset(self, capsys):
        code, _, err = run(capsys, "study", "--preset", "nope")
        assert code == 1

    def test_mc_preset_runs_and_writes(self, capsys, tmp_path):
        code, out, _ = run(capsys, "study", "--preset", "wave-temporal-mc", "--output", str(tmp_path))
        assert code == 0
        assert (tmp_path / "wave-temporal-mc.csv").exists()
        assert "weak slope" in out

    def test_config_file_study(self, capsys, tmp_path):
        cfg = tmp_path / "tiny.json"
        cfg.write_text(
            json.dumps(
                {
                    "schema_version": 1,
                    "name": "tiny-heat",
                    "equation": "heat",
                    "axis": "temporal",
                    "beta": 1.0,
                    "modes": 64,
                    "ladder": [2**-4, 2**-5, 2**-6, 2**-7, 2**-8],
                }
            )
        )
        code, out, _ = run(capsys, "study", "--config", str(cfg), "--output", str(tmp_path))
        assert (tmp_path / "tiny-heat.csv").exists()
        assert code in (0, 2)  # rate gate may trip; config handling must not

    def test_byte_identical_csv_across_runs_and_threads(self, capsys, tmp_path):
        paths = []
        for i, threads in enumerate(("1", "8", "1")):
            out = tmp_path / f"run{i}.csv"
            code, _, _ = run(
                capsys, "study", "--preset", "wave-temporal-mc", "--output", str(out), "--threads", threads
            )
            assert code == 0
            paths.append(out.read_bytes())
        assert paths[0] == paths[1] == paths[2]


class TestVerifyRepresentation:
    def test_default_sweep_passes(self, capsys):
        code, out, _ = run(capsys, "verify-representation")
        assert code == 0
        assert "pass" in out

    def test_tampered_sign_exits_2(self, capsys, monkeypatch):
        monkeypatch.setattr(levyspde.errors, "_CROSS_TERM_SIGN", -1.0)
        code, out, _ = run(capsys, "verify-representation")
        assert code == 2
        assert "FAIL" in out
