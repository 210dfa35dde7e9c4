"""CLI grammar, exit codes, artifact determinism."""

import json
import math
import subprocess
import sys

import pytest

from neuronlab.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBumpCli:
    def test_solve_exp(self, capsys):
        # both the call sugar and the prefix form are accepted
        for rho in ("exp(x)", "(exp x)"):
            code, out, _ = run_cli(["bump", "solve", "--rho", rho], capsys)
            assert code == 0
            payload = json.loads(out)
            assert payload["lambda"] == pytest.approx(math.exp(-2.0), rel=1e-10)
            assert payload["L"] == pytest.approx(2.0, rel=1e-10)

    def test_solve_named_base(self, capsys):
        code, out, _ = run_cli(["bump", "solve", "--rho", "exp_square"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["L"] == pytest.approx((1 + math.sqrt(3)) / 2, rel=1e-10)

    def test_verify_example_b(self, capsys):
        code, out, _ = run_cli([
            "bump", "verify", "--rho", "exp_square", "--n", "12",
            "--plateau", "-1", "1", "--guard", "-1.5", "1.5", "--eps", "0.05",
        ], capsys)
        assert code == 0
        assert json.loads(out)["ok"] is True

    def test_no_tangency_is_domain_error(self, capsys):
        code, _, err = run_cli(["bump", "solve", "--rho", "1.0"], capsys)
        assert code == 1
        assert "error" in json.loads(err)


class TestUsageErrors:
    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_missing_required(self):
        with pytest.raises(SystemExit) as exc:
            main(["bump", "solve"])
        assert exc.value.code == 2


class TestSpecErrors:
    def test_malformed_json_reports_position(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"kind": "network", ')
        code, _, err = run_cli(["net", "eval", "--spec", str(bad), "--x", "1.0"], capsys)
        assert code == 1
        msg = json.loads(err)["error"]
        assert "line" in msg and "column" in msg

    def test_missing_spec_file(self, capsys):
        code, _, err = run_cli(["indep", "test", "--spec", "/nonexistent.json"], capsys)
        assert code == 1


class TestIndepCli:
    def test_expression_family(self, tmp_path, capsys):
        spec = tmp_path / "family.json"
        spec.write_text(json.dumps({
            "kind": "family",
            "interval": [-2.0, 2.0],
            "functions": ["(tanh x)", "(tanh (mul 2 x))"],
        }))
        code, out, _ = run_cli(["indep", "test", "--spec", str(spec)], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["independent"] is True
        assert payload["min_singular_value"] > 1e-8

    def test_neuron_reference_family(self, tmp_path, capsys):
        spec = tmp_path / "family.json"
        spec.write_text(json.dumps({
            "kind": "family",
            "functions": [{
                "network": {"kind": "network", "d": 1, "widths": [2, 1], "bias": False,
                            "sigma": "tanh", "theta": [1.0, 1.0, 0.8, -0.8]},
                "layer": 1,
            }],
        }))
        code, out, _ = run_cli(["indep", "test", "--spec", str(spec)], capsys)
        assert code == 0
        payload = json.loads(out)
        # tanh(0.8 x) and tanh(-0.8 x) are collinear
        assert payload["independent"] is False


class TestArtifacts:
    def test_tanh_approx_csv_deterministic(self, tmp_path, capsys):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            code, _, _ = run_cli(["blend", "tanh-approx", "--alpha", "2.0",
                                  "--grid", "101", "--out", str(out)], capsys)
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()
        header = out1.read_text().splitlines()
        assert header[0].startswith("# schema:")
        assert header[1] == "x,sigma_tilde,tanh"

    def test_json_stdout_deterministic(self, capsys):
        outs = []
        for _ in range(2):
            code, out, _ = run_cli(["bump", "solve", "--rho", "exp(x)", "--seed", "7"], capsys)
            assert code == 0
            outs.append(out)
        assert outs[0] == outs[1]

    def test_growth_classify(self, capsys):
        code, out, _ = run_cli(["growth", "classify", "--f", "(exp (pow x 2))",
                                "--tmax", "26"], capsys)
        assert code == 0
        assert json.loads(out)["class"] == "hyper-exponential"

    def test_zero_predict(self, tmp_path, capsys):
        spec = tmp_path / "pred.json"
        spec.write_text(json.dumps({"kind": "two-layer", "variant": "biasA",
                                    "w": [1.0, 1.0], "b": [0.0, 1.0]}))
        code, out, _ = run_cli(["zero", "predict", "--spec", str(spec)], capsys)
        assert code == 0
        assert json.loads(out)["independent"] is True

    def test_zero_check_and_enumerate(self, tmp_path, capsys):
        net = tmp_path / "net.json"
        net.write_text(json.dumps({
            "kind": "network", "d": 1, "widths": [2, 1], "bias": True, "sigma": "tanh",
            "theta": [1.0, -1.0, 0.0, 1.0, 1.0, 0.0, 0.0],
        }))
        code, out, _ = run_cli(["zero", "check", "--spec", str(net)], capsys)
        assert code == 0
        assert json.loads(out)["in_zero_set"] is True
        enum = tmp_path / "enum.json"
        enum.write_text(json.dumps({"d": 1, "widths": [2, 1], "bias": False}))
        code, out, _ = run_cli(["zero", "enumerate", "--spec", str(enum)], capsys)
        assert code == 0
        assert json.loads(out)["count"] == 5

    def test_curves_blowup_value(self, tmp_path, capsys):
        out = tmp_path / "blowup.csv"
        code, stdout, _ = run_cli(["curves", "blowup", "--params", "1,0", "--k", "0",
                                   "--grid", "11", "--out", str(out)], capsys)
        assert code == 0
        lines = out.read_text().splitlines()
        first = lines[2].split(",")
        assert float(first[3]) == pytest.approx(1.0 / (1.0 - math.exp(-1.0)), abs=1e-9)

    def test_fourier_transform_csv(self, tmp_path, capsys):
        out = tmp_path / "ft.csv"
        code, stdout, _ = run_cli(["fourier", "transform", "--f", "gaussian",
                                   "--xi", "0,1,2", "--out", str(out)], capsys)
        assert code == 0
        payload = json.loads(stdout)
        assert payload["values"][0][0] == pytest.approx(math.sqrt(math.pi), rel=1e-10)

    def test_net_embed(self, tmp_path, capsys):
        spec = tmp_path / "emb.json"
        spec.write_text(json.dumps({
            "kind": "embedding",
            "small": {"d": 1, "widths": [1, 1], "bias": False},
            "big": {"d": 1, "widths": [2, 1], "bias": False},
            "assignment": [[0, 0]],
            "split": [[0.5, 0.5]],
            "theta": [2.0, 1.5],
        }))
        code, out, _ = run_cli(["net", "embed", "--spec", str(spec)], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["rank"] == 2
        assert payload["theta_big"] == [1.0, 1.0, 1.5, 1.5]

    def test_curves_profile(self, tmp_path, capsys):
        spec = tmp_path / "prof.json"
        spec.write_text(json.dumps({
            "kind": "profile",
            "first_layer": [[1.0, 0.0], [0.5, 0.3]],
            "W2": [[1.0, 0.4], [0.7, -0.2]],
            "b2": [0.0, 0.1],
            "target": 0,
            "sign": 1,
            "tmax": 40.0,
        }))
        out = tmp_path / "prof.csv"
        code, stdout, _ = run_cli(["curves", "profile", "--spec", str(spec),
                                   "--grid", "17", "--out", str(out)], capsys)
        assert code == 0
        assert json.loads(stdout)["flags"] == []
        assert len(out.read_text().splitlines()) == 19  # schema + header + rows

    def test_fourier_xi_range(self, capsys):
        code, out, _ = run_cli(["fourier", "transform", "--f", "gaussian",
                                "--xi-range", "0", "4", "5"], capsys)
        assert code == 0
        assert len(json.loads(out)["values"]) == 5

    def test_growth_order_cli(self, capsys):
        code, out, _ = run_cli(["growth", "order",
                                "--fs", "(exp (mul 2 x));x;(exp x)",
                                "--tmax", "100"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["ordered"] is True and payload["order"] == [0, 2, 1]
        code, out, _ = run_cli(["growth", "order", "--fs", "(exp x);(mul 2 (exp x))",
                                "--tmax", "100"], capsys)
        assert code == 0
        assert json.loads(out)["ordered"] is False

    def test_module_entrypoint(self):
        proc = subprocess.run([sys.executable, "-m", "neuronlab", "bump", "solve",
                               "--rho", "(exp x)"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["L"] == pytest.approx(2.0)
