import json

import numpy as np
import pytest

from thermoacoustic.cli import main
from thermoacoustic.config import (
    ParseError,
    UnknownKey,
    ValidationError,
    initial_fields,
    load_config,
    make_grid,
)
from thermoacoustic.energy import TIMESERIES_COLUMNS


def minimal_doc(**overrides):
    doc = {
        "grid": {"L": 1.0, "N": 16},
        "params": {
            "rho_a": 1.0, "C_a": 1.0, "rho_b": 1.0, "C_b": 1.0, "W": 1.0,
            "kappa_a": 1.0, "b": 1.0, "rho": 1.0, "beta_acous": 1.0,
            "theta_a": 0.0, "tau": 0.05,
        },
        "speed_model": {"coeffs": [1.0], "h_floor": 1.0},
        "initial_data": {"preset": "zero"},
        "time": {"T": 0.01, "dt": 1e-3},
    }
    doc.update(overrides)
    return doc


class TestLoadConfig:
    def test_minimal_zero_preset(self):
        config = load_config(json.dumps(minimal_doc()))
        assert config.grid.N == 16
        assert config.initial_data.preset == "zero"
        assert config.picard.tol == 1e-10  # defaults applied
        assert config.seed == 0
        grid = make_grid(config)
        p0, p1, theta0, q0 = initial_fields(config, grid)
        assert np.all(p0.values == 0.0)
        assert np.all(q0.values == 0.0)

    def test_missing_required_parameter(self):
        doc = minimal_doc()
        del doc["params"]["b"]
        with pytest.raises(ValidationError) as err:
            load_config(json.dumps(doc))
        assert err.value.key == "params.b"
        assert err.value.reason == "required"

    def test_negative_dt(self):
        doc = minimal_doc()
        doc["time"]["dt"] = -0.1
        with pytest.raises(ValidationError) as err:
            load_config(json.dumps(doc))
        assert err.value.key == "time.dt"
        assert "positive" in err.value.reason

    def test_unknown_top_level_key(self):
        doc = minimal_doc()
        doc["grdi"] = {"L": 1.0}
        with pytest.raises(UnknownKey) as err:
            load_config(json.dumps(doc))
        assert err.value.path == "grdi"

    def test_unknown_nested_key(self):
        doc = minimal_doc()
        doc["time"]["dt_max"] = 0.1
        with pytest.raises(UnknownKey) as err:
            load_config(json.dumps(doc))
        assert err.value.path == "time.dt_max"

    def test_malformed_json(self):
        with pytest.raises(ParseError):
            load_config("{not json")

    def test_wrong_type(self):
        doc = minimal_doc()
        doc["grid"]["N"] = "many"
        with pytest.raises(ValidationError) as err:
            load_config(json.dumps(doc))
        assert err.value.key == "grid.N"

    def test_invalid_preset(self):
        doc = minimal_doc()
        doc["initial_data"]["preset"] = "sawtooth"
        with pytest.raises(ValidationError):
            load_config(json.dumps(doc))

    def test_raw_preset_requires_arrays(self):
        doc = minimal_doc()
        doc["initial_data"] = {"preset": "raw"}
        with pytest.raises(ValidationError) as err:
            load_config(json.dumps(doc))
        assert "raw" in str(err.value)

    def test_raw_preset_length_checked(self):
        doc = minimal_doc()
        n = doc["grid"]["N"]
        doc["initial_data"] = {
            "preset": "raw",
            "p0": [0.0] * n, "p1": [0.0] * n, "theta0": [0.0] * n,
            "q0": [0.0] * n,  # needs N + 1 entries
        }
        with pytest.raises(ValidationError) as err:
            load_config(json.dumps(doc))
        assert err.value.key == "initial_data.q0"

    def test_sweep_must_decrease_strictly(self):
        doc = minimal_doc(sweep={"tau_list": [0.1, 0.1]})
        with pytest.raises(ValidationError):
            load_config(json.dumps(doc))

    def test_invalid_physics_rejected(self):
        doc = minimal_doc()
        doc["params"]["b"] = 0.0
        with pytest.raises(ValidationError) as err:
            load_config(json.dumps(doc))
        assert "b must be strictly positive" in str(err.value)

    def test_sine_preset_prepares_fourier_flux(self):
        doc = minimal_doc()
        doc["initial_data"] = {
            "preset": "sine", "amplitude_p": 0.1, "amplitude_theta": 0.5,
        }
        config = load_config(json.dumps(doc))
        grid = make_grid(config)
        _, _, theta0, q0 = initial_fields(config, grid)
        grad = np.diff(theta0.values, prepend=0.0, append=0.0) / grid.dx
        assert np.array_equal(q0.values, -config.params.kappa_a * grad)


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def sine_doc(amplitude_p=0.05, T=0.02, tau=0.05, **extra_time):
    doc = minimal_doc()
    doc["grid"] = {"L": 1.0, "N": 32}
    doc["params"]["tau"] = tau
    doc["initial_data"] = {
        "preset": "sine", "amplitude_p": amplitude_p, "amplitude_theta": 0.5,
    }
    doc["time"] = {"T": T, "dt": 1e-3, **extra_time}
    doc["picard"] = {"tol": 1e-10, "max_iter": 25, "gamma_bar": 0.5}
    return doc


class TestCli:
    def test_simulate_zero_preset_zero_columns(self, tmp_path, capsys):
        cfg = write_config(tmp_path, minimal_doc())
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
        lines = (tmp_path / "timeseries.csv").read_text().splitlines()
        assert lines[0] == ",".join(TIMESERIES_COLUMNS)
        for line in lines[1:]:
            values = dict(zip(TIMESERIES_COLUMNS, line.split(",")))
            for name, text in values.items():
                if name in ("t", "alpha_min", "picard_iters"):
                    continue
                assert float(text) == 0.0

    def test_byte_determinism(self, tmp_path):
        cfg = write_config(tmp_path, sine_doc())
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", cfg, "--out", str(out1), "--quiet"]) == 0
        assert main(["simulate", "--config", cfg, "--out", str(out2), "--quiet"]) == 0
        assert (out1 / "timeseries.csv").read_bytes() == (out2 / "timeseries.csv").read_bytes()

    def test_float_formatting_round_trips(self, tmp_path):
        cfg = write_config(tmp_path, sine_doc())
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
        lines = (tmp_path / "timeseries.csv").read_text().splitlines()
        e0_col = TIMESERIES_COLUMNS.index("E0")
        texts = [line.split(",")[e0_col] for line in lines[1:]]
        values = [float(t) for t in texts]
        assert any(v != 0.0 for v in values)
        for t, v in zip(texts, values):
            assert format(v + 0.0, ".17g") == t  # 17 significant digits round-trip

    def test_snapshot_schema(self, tmp_path):
        doc = sine_doc(T=0.01, snapshot_times=[0.0, 0.01])
        cfg = write_config(tmp_path, doc)
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
        for name in ("snapshot_0.csv", "snapshot_1.csv"):
            lines = (tmp_path / name).read_text().splitlines()
            assert lines[0] == "x,p,p_t,theta,q_at_left_face"
            assert len(lines) == 1 + 32

    def test_config_error_exit_code(self, tmp_path):
        doc = minimal_doc()
        del doc["params"]["b"]
        cfg = write_config(tmp_path, doc)
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_missing_file_exit_code(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path)]) == 2

    def test_degenerate_exit_code_and_report(self, tmp_path, capsys):
        cfg = write_config(tmp_path, sine_doc(amplitude_p=0.75))
        code = main(["simulate", "--config", cfg, "--out", str(tmp_path)])
        assert code == 3
        err = capsys.readouterr().err
        assert "step" in err and "node" in err

    def test_picard_divergence_exit_code(self, tmp_path, capsys):
        doc = sine_doc()
        doc["picard"] = {"tol": 1e-15, "max_iter": 1, "gamma_bar": 0.5}
        cfg = write_config(tmp_path, doc)
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 4

    def test_modes_subcommand(self, tmp_path):
        doc = sine_doc(T=0.05, tau=0.1)
        cfg = write_config(tmp_path, doc)
        assert main(["modes", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
        lines = (tmp_path / "modes.csv").read_text().splitlines()
        assert lines[0] == "t,numeric,oracle,abs_err"
        worst = max(float(line.split(",")[3]) for line in lines[1:])
        assert worst < 1e-3

    def test_limit_sweep_with_override(self, tmp_path):
        cfg = write_config(tmp_path, sine_doc(T=0.02))
        code = main(["limit-sweep", "--config", cfg, "--out", str(tmp_path),
                     "--tau", "0.1,0.05", "--quiet"])
        assert code == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert lines[0] == "tau,e_theta,e_p,e_pt"
        assert len(lines) == 3
        assert (tmp_path / "tau_0.1" / "timeseries.csv").exists()
        assert (tmp_path / "tau_0.05" / "timeseries.csv").exists()
        assert (tmp_path / "tau_0" / "timeseries.csv").exists()  # reference run

    def test_sweep_without_taus_is_config_error(self, tmp_path):
        cfg = write_config(tmp_path, sine_doc(T=0.02))
        assert main(["limit-sweep", "--config", cfg, "--out", str(tmp_path)]) == 2


class TestShippedConfigs:
    def test_canonical_config_matches_library_pin(self):
        from pathlib import Path

        from thermoacoustic.config import load_config_file
        from thermoacoustic.verification import canonical_config

        path = Path(__file__).resolve().parents[1] / "configs" / "canonical.json"
        assert load_config_file(path) == canonical_config()

    def test_all_shipped_configs_parse(self):
        from pathlib import Path

        from thermoacoustic.config import load_config_file

        config_dir = Path(__file__).resolve().parents[1] / "configs"
        names = sorted(p.name for p in config_dir.glob("*.json"))
        assert names == ["canonical.json", "lensing.json", "modes.json"]
        for p in config_dir.glob("*.json"):
            load_config_file(p)


class TestVerifySubcommand:
    def test_verify_writes_report_and_flags_known_red_checks(self, tmp_path):
        # The three deliberately red checks are intrinsic to the pinned
        # configurations (see the README known-limitations section), so the
        # verify subcommand honestly exits 5 on the shipped canonical config.
        from pathlib import Path

        path = Path(__file__).resolve().parents[1] / "configs" / "canonical.json"
        code = main(["verify", "--config", str(path), "--out", str(tmp_path),
                     "--quiet"])
        assert code == 5
        lines = (tmp_path / "verify.csv").read_text().splitlines()
        assert lines[0] == "check,passed,measured,threshold,detail"
        failed = {row.split(",")[0] for row in lines[1:] if row.split(",")[1] == "0"}
        assert failed == {
            "mode_amplitude_error",
            "acoustic_spatial_order",
            "sweep_p_ratio",
        }
