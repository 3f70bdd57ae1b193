import json
import subprocess
import sys

import numpy as np
import pytest

from scnls.config import parse_config
from scnls.errors import ConfigError


class TestParseConfig:
    def test_minimal_fills_defaults(self):
        cfg = parse_config('{"physics": {"sigma": 2, "epsilon": 0.125}}')
        assert cfg.n == (512,)
        assert cfg.length == (16.0,)
        assert cfg.final_time == 0.25
        assert cfg.dt0 == 0.01
        assert cfg.observation_count == 20
        assert cfg.sigma == 2 and cfg.epsilon == 0.125

    def test_sigma_zero_names_key(self):
        with pytest.raises(ConfigError) as err:
            parse_config('{"physics": {"sigma": 0}}')
        assert "physics.sigma" in str(err.value)

    def test_epsilon_above_one_rejected(self):
        with pytest.raises(ConfigError) as err:
            parse_config('{"physics": {"epsilon": 1.5}}')
        assert "physics.epsilon" in str(err.value)

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError):
            parse_config('{"grids": {}}')

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError) as err:
            parse_config('{"grid": {"dx": 0.1}}')
        assert "grid.dx" in str(err.value)

    def test_bad_grid_rejected(self):
        with pytest.raises(ConfigError):
            parse_config('{"grid": {"N": 100}}')
        with pytest.raises(ConfigError):
            parse_config('{"grid": {"dim": 3}}')

    def test_epsilon_list_must_decrease(self):
        with pytest.raises(ConfigError):
            parse_config('{"physics": {"epsilon_list": [0.1, 0.2]}}')

    def test_bad_preset_rejected(self):
        with pytest.raises(ConfigError) as err:
            parse_config('{"initial": {"a0_preset": "vortex"}}')
        assert "a0_preset" in str(err.value)

    def test_malformed_json(self):
        with pytest.raises(ConfigError):
            parse_config("{not json")

    def test_round_trip_identity(self):
        text = json.dumps({
            "grid": {"dim": 1, "N": 64, "L": 8.0},
            "physics": {"sigma": 3, "epsilon": 0.25,
                        "epsilon_list": [0.5, 0.25]},
            "time": {"T": 0.1, "dt0": 0.005, "observation_count": 5},
            "initial": {"a0_preset": "gaussian",
                        "a0_params": {"width": 1.5},
                        "a1_preset": "zero", "phi0_preset": "neg_cos",
                        "phi0_params": {"amplitude": 0.2}},
            "output": {"directory": "out", "formats": ["json"]},
        })
        cfg = parse_config(text)
        again = parse_config(cfg.serialize())
        assert again == cfg
        assert again.content_hash() == cfg.content_hash()

    def test_2d_axis_lists(self):
        cfg = parse_config('{"grid": {"dim": 2, "N": [32, 64], "L": [4.0, 8.0]}}')
        assert cfg.n == (32, 64)
        assert cfg.length == (4.0, 8.0)
        g = cfg.make_grid()
        assert g.dim == 2


def run_cli(args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "scnls", *args],
        capture_output=True, text=True, cwd=cwd,
    )


@pytest.fixture()
def tiny_config(tmp_path):
    doc = {
        "grid": {"N": 128, "L": 16.0},
        "physics": {"sigma": 2, "epsilon": 0.25,
                    "epsilon_list": [0.5, 0.25, 0.125]},
        "time": {"T": 0.04, "dt0": 0.01, "observation_count": 5},
        "initial": {"a0_preset": "gaussian",
                    "a0_params": {"width": 1.5, "amplitude_re": 1.0,
                                  "amplitude_im": 0.2},
                    "a1_preset": "gaussian", "a1_params": {"width": 1.8}},
        "output": {"directory": str(tmp_path / "out"),
                   "formats": ["csv", "json", "snapshots"]},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path, tmp_path / "out"


class TestCliCommands:
    def test_simulate(self, tiny_config, tmp_path):
        path, out = tiny_config
        proc = run_cli(["simulate", str(path)], tmp_path)
        assert proc.returncode == 0, proc.stderr
        assert (out / "invariants.csv").exists()
        assert (out / "wavefunction.snap").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["mass_drift_rel"] < 1e-12
        assert summary["self_check_ok"] is True
        assert "config_hash" in summary and "content_hash" in summary

    def test_limit_and_report_artifacts(self, tiny_config, tmp_path):
        path, out = tiny_config
        proc = run_cli(["limit", str(path)], tmp_path)
        assert proc.returncode == 0, proc.stderr
        summary = json.loads((out / "summary.json").read_text())
        assert summary["grad_phi_minus_v_l2_max"] < 1e-6
        assert summary["power_consistency_banded_max"] < 1e-8
        assert summary["status"] == "completed"

    def test_corrector(self, tiny_config, tmp_path):
        path, out = tiny_config
        proc = run_cli(["corrector", str(path)], tmp_path)
        assert proc.returncode == 0, proc.stderr
        summary = json.loads((out / "summary.json").read_text())
        assert summary["corrected_modulus_gap_max"] < 1e-13

    def test_conserve(self, tiny_config, tmp_path):
        path, out = tiny_config
        proc = run_cli(["conserve", str(path)], tmp_path)
        assert proc.returncode == 0, proc.stderr
        summary = json.loads((out / "summary.json").read_text())
        assert summary["max_nls_mass_drift"] < 1e-12
        assert summary["max_euler_mass_drift"] < 1e-8

    def test_sweep_and_report(self, tiny_config, tmp_path):
        path, out = tiny_config
        proc = run_cli(["sweep", str(path)], tmp_path)
        assert proc.returncode == 0, proc.stderr
        assert (out / "sweep.csv").exists()
        doc = json.loads((out / "report.json").read_text())
        assert len(doc["rows"]) == 3
        rep = run_cli(["report", str(out)], tmp_path)
        assert rep.returncode == 0
        assert "fit two_term_l2" in rep.stdout

    def test_config_error_exit_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"physics": {"sigma": 0}}')
        proc = run_cli(["simulate", str(bad)], tmp_path)
        assert proc.returncode == 2
        record = json.loads(proc.stderr.strip().splitlines()[-1])
        assert record["error"]["kind"] == "config"
        assert record["error"]["key"] == "physics.sigma"

    def test_missing_file_exit_2(self, tmp_path):
        proc = run_cli(["simulate", str(tmp_path / "nope.json")], tmp_path)
        assert proc.returncode == 2

    def test_guard_failure_exit_3(self, tmp_path):
        # a deliberately huge base step trips the dt-halving guard
        doc = {
            "grid": {"N": 64, "L": 16.0},
            "physics": {"sigma": 2, "epsilon": 1.0},
            "time": {"T": 1.0, "dt0": 0.25, "observation_count": 3},
            "initial": {"a0_preset": "gaussian",
                        "a0_params": {"width": 1.0, "amplitude_re": 2.5}},
            "output": {"directory": str(tmp_path / "out3")},
        }
        path = tmp_path / "guard.json"
        path.write_text(json.dumps(doc))
        proc = run_cli(["simulate", str(path)], tmp_path)
        assert proc.returncode == 3, proc.stderr
        record = json.loads(proc.stderr.strip().splitlines()[-1])
        assert record["error"]["kind"] == "numerical_guard"

    def test_conserve_plane_wave_drifts(self, tmp_path):
        # exact plane-wave pair: both systems hold their invariants to roundoff
        doc = {
            "grid": {"N": 64, "L": 6.283185307179586},
            "physics": {"sigma": 2, "epsilon": 0.25},
            "time": {"T": 0.05, "dt0": 0.01, "observation_count": 4},
            "initial": {"a0_preset": "constant", "a0_params": {"value": 0.9},
                        "phi0_preset": "linear",
                        "phi0_params": {"wavenumber": 1.0}},
            "output": {"directory": str(tmp_path / "outpw")},
        }
        path = tmp_path / "pw.json"
        path.write_text(json.dumps(doc))
        proc = run_cli(["conserve", str(path)], tmp_path)
        assert proc.returncode == 0, proc.stderr
        summary = json.loads((tmp_path / "outpw" / "summary.json").read_text())
        assert summary["max_nls_mass_drift"] < 1e-12
        assert summary["max_nls_momentum_drift"] < 1e-12
        assert summary["max_euler_mass_drift"] < 1e-12
        assert summary["max_euler_momentum_drift"] < 1e-12

    def test_internal_error_exit_4(self, tmp_path):
        # output directory nested under a regular file cannot be created
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        doc = {"physics": {"sigma": 2, "epsilon": 0.25},
               "grid": {"N": 64}, "time": {"T": 0.02, "observation_count": 3},
               "output": {"directory": str(blocker / "out")}}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc))
        proc = run_cli(["simulate", str(path)], tmp_path)
        assert proc.returncode == 4
        record = json.loads(proc.stderr.strip().splitlines()[-1])
        assert record["error"]["kind"] == "internal"

    def test_blowup_command(self, tmp_path):
        doc = {
            "grid": {"N": 256, "L": 20.0},
            "physics": {"sigma": 1},
            "blowup": {"max_time": 12.0, "amplitudes": [0.6, 1.2],
                       "radius": 3.0},
            "output": {"directory": str(tmp_path / "outb")},
        }
        path = tmp_path / "blowup.json"
        path.write_text(json.dumps(doc))
        proc = run_cli(["blowup", str(path)], tmp_path)
        assert proc.returncode == 0, proc.stderr
        doc_out = json.loads((tmp_path / "outb" / "blowup.json").read_text())
        assert doc_out["breakdown_flag"] is True
        assert doc_out["monotone_in_amplitude"] is True
        assert all(np.isfinite(r["t_estimate"]) for r in doc_out["rows"])

    def test_focusing_command(self, tmp_path):
        doc = {
            "grid": {"N": 128, "L": 16.0},
            "physics": {"sigma": 1},
            "focusing": {"wavenumbers": [2, 4, 8], "window": 0.4},
            "output": {"directory": str(tmp_path / "outf")},
        }
        path = tmp_path / "focusing.json"
        path.write_text(json.dumps(doc))
        proc = run_cli(["focusing-demo", str(path)], tmp_path)
        assert proc.returncode == 0, proc.stderr
        doc_out = json.loads((tmp_path / "outf" / "focusing.json").read_text())
        assert doc_out["rates_increase_with_wavenumber"] is True
        for row in doc_out["rows"]:
            assert 0.8 <= row["max_growth_defocusing"] <= 1.2

    def test_effective_config_written(self, tiny_config, tmp_path):
        path, out = tiny_config
        run_cli(["simulate", str(path)], tmp_path)
        echoed = json.loads((out / "effective_config.json").read_text())
        assert echoed["physics"]["sigma"] == 2
        assert echoed["grid"]["N"] == [128]
