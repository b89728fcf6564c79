import json

import pytest

from bandzeros.cli import ConfigError, load_config, main


def write_cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


SYM = {
    "schema_version": 1,
    "endpoints": [-1.0, -0.5, 0.5, 1.0],
    "R_roots": [-1.0, -0.5, 0.5, 1.0],
    "weight": {"kind": "constant"},
}

GAP = {
    "schema_version": 1,
    "endpoints": [0.0, 1.0, 2.0, 3.5],
    "R_roots": [],
    "weight": {"kind": "bernstein_szego", "roots": [[1.4, 0.0, 1, 1]]},
}


class TestConfig:
    def test_loads_weight_spec(self, tmp_path):
        spec = load_config(write_cfg(tmp_path, GAP))
        assert spec.system.l == 2
        assert spec.is_bernstein_szego
        assert spec.weight.degree == 1

    def test_missing_field_named(self, tmp_path):
        with pytest.raises(ConfigError, match="schema_version"):
            load_config(write_cfg(tmp_path, {"endpoints": [0, 1]}))

    def test_bad_endpoints_named(self, tmp_path):
        cfg = dict(SYM, endpoints=[1.0, 0.0])
        with pytest.raises(ConfigError, match="endpoints"):
            load_config(write_cfg(tmp_path, cfg))

    def test_unknown_weight_kind(self, tmp_path):
        cfg = dict(SYM, weight={"kind": "mystery"})
        with pytest.raises(ConfigError, match="weight.kind"):
            load_config(write_cfg(tmp_path, cfg))

    def test_weight_root_in_E_rejected(self, tmp_path):
        cfg = dict(GAP, weight={"kind": "bernstein_szego",
                                "roots": [[0.5, 0.0, 1, 1]]})
        with pytest.raises(ConfigError, match="weight"):
            load_config(write_cfg(tmp_path, cfg))


class TestCommands:
    def test_malformed_config_exit_1(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, {"schema_version": 1, "endpoints": [1, 0]})
        code = main(["--config", cfg, "--command", "measures",
                     "--out", str(tmp_path)])
        assert code == 1
        assert "endpoints" in capsys.readouterr().err

    def test_geometry_and_measures(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, SYM)
        assert main(["--config", cfg, "--command", "geometry",
                     "--out", str(tmp_path)]) == 0
        assert json.loads((tmp_path / "geometry.json").read_text())["passed"]
        assert main(["--config", cfg, "--command", "measures",
                     "--out", str(tmp_path)]) == 0
        rec = json.loads((tmp_path / "measures.json").read_text())
        assert abs(rec["omega"][0] - 0.5) < 1e-8
        assert "omega" in capsys.readouterr().out

    def test_periods_report(self, tmp_path):
        cfg = write_cfg(tmp_path, GAP)
        assert main(["--config", cfg, "--command", "periods",
                     "--out", str(tmp_path)]) == 0
        rec = json.loads((tmp_path / "periods.json").read_text())
        assert float(rec["B"][0][0]) < 0

    def test_ortho_outputs(self, tmp_path):
        cfg = write_cfg(tmp_path, GAP)
        assert main(["--config", cfg, "--command", "ortho",
                     "--out", str(tmp_path),
                     "--n-min", "5", "--n-max", "8"]) == 0
        lines = (tmp_path / "ortho.csv").read_text().strip().split("\n")
        assert lines[0] == "n,j,count"
        assert len(lines) == 1 + 4 * 2

    def test_predict_csv_and_determinism(self, tmp_path):
        cfg = write_cfg(tmp_path, SYM)
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        for out in (out1, out2):
            assert main(["--config", cfg, "--command", "predict",
                         "--out", str(out),
                         "--n-min", "20", "--n-max", "26"]) == 0
        assert (out1 / "predict.csv").read_bytes() == \
            (out2 / "predict.csv").read_bytes()
        assert (out1 / "predict.json").read_bytes() == \
            (out2 / "predict.json").read_bytes()
        lines = (out1 / "predict.csv").read_text().strip().split("\n")
        header = lines[0].split(",")
        assert header == ["n", "j", "actual", "predicted", "defect",
                          "occupancy_actual", "occupancy_predicted",
                          "interior_flag"]
        defects = [int(row.split(",")[4]) for row in lines[1:]]
        assert max(defects) <= 1

    def test_verify_pass_and_validation_failure(self, tmp_path):
        good = write_cfg(tmp_path, GAP, "good.json")
        assert main(["--config", good, "--command", "verify",
                     "--out", str(tmp_path),
                     "--n-min", "10", "--n-max", "12"]) == 0
        rec = json.loads((tmp_path / "verify.json").read_text())
        assert rec["summary"]["passed"]
        # this R/(rho h) flips sign between the bands: not Pell-admissible
        bad = write_cfg(tmp_path, dict(GAP, R_roots=[1.0]), "bad.json")
        assert main(["--config", bad, "--command", "verify",
                     "--out", str(tmp_path),
                     "--n-min", "10", "--n-max", "10"]) == 2

    def test_experiment_histogram(self, tmp_path):
        cfg = write_cfg(tmp_path, SYM)
        assert main(["--config", cfg, "--command", "experiment",
                     "--out", str(tmp_path), "--n-max", "30"]) == 0
        rec = json.loads((tmp_path / "experiment.json").read_text())
        assert rec["distinct_points"] == [1]
        lines = (tmp_path / "experiment.csv").read_text().strip().split("\n")
        assert lines[0] == "gap,x,visits"

    def test_plot_flag_renders_files(self, tmp_path):
        cfg = write_cfg(tmp_path, SYM)
        assert main(["--config", cfg, "--command", "predict",
                     "--out", str(tmp_path),
                     "--n-min", "20", "--n-max", "22", "--plot"]) == 0
        assert (tmp_path / "predict.png").stat().st_size > 0
