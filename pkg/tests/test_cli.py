import json
import subprocess
import sys

import numpy as np
import pytest

from phaseless.cli import (ConfigError, lattice_report, main, parse_complex, parse_frame,
                           read_samples_csv)
from phaseless.hermite_bargmann import HermiteSignal
from phaseless.reconstruction import up_to_phase_error


def write_config(tmp_path, name="cfg.json", **cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestParsing:
    @pytest.mark.parametrize("value, expected", [
        (1, 1), (2.5, 2.5), ("1+2i", 1 + 2j), ("-i", -1j), ([0, -1], -1j), ("3j", 3j)])
    def test_complex(self, value, expected):
        assert parse_complex(value) == expected

    @pytest.mark.parametrize("value", ["abc", [1, 2, 3], None, True])
    def test_bad_complex(self, value):
        with pytest.raises(ConfigError):
            parse_complex(value)

    def test_presets(self):
        np.testing.assert_array_equal(parse_frame("fig1-frame").vectors,
                                      [(1, 0), (1, 1), (-1, 1), (1j, 1)])
        np.testing.assert_array_equal(parse_frame("cor15(1, 2i, -1)").vectors,
                                      [(1, 0), (1, 1), (2j, 1), (-1, 1)])
        with pytest.raises(ConfigError):
            parse_frame("fig9")


class TestCheckFrame:
    def test_fig1(self, tmp_path, capsys):
        code, out, _ = run(["check-frame", "--config",
                            write_config(tmp_path, frame="fig1-frame")], capsys)
        report = json.loads(out)
        assert code == 0 and report["does_phase_retrieval"] is True
        assert report["betas"] == [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]
        assert "ambiguity_pair" not in report

    def test_collinear_preset(self, tmp_path, capsys):
        code, out, _ = run(["check-frame", "--config",
                            write_config(tmp_path, frame="cor15(1,2,3)")], capsys)
        report = json.loads(out)
        assert code == 0 and report["does_phase_retrieval"] is False
        pair = report["ambiguity_pair"]
        np.testing.assert_allclose(pair["magnitudes_z"], pair["magnitudes_w"], atol=1e-12)

    def test_explicit_frame(self, tmp_path, capsys):
        cfg = write_config(tmp_path, frame=[[1, 0], [1, 1], ["-1", 1], ["i", [1, 0]]])
        code, out, _ = run(["check-frame", "--config", cfg], capsys)
        assert code == 0 and json.loads(out)["does_phase_retrieval"] is True

    def test_malformed_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{frame: fig1")
        code, _, err = run(["check-frame", "--config", str(path)], capsys)
        assert code == 2 and "malformed JSON" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run(["check-frame", "--config", str(tmp_path / "nope.json")], capsys)
        assert code == 2

    def test_short_frame(self, tmp_path, capsys):
        code, _, _ = run(["check-frame", "--config",
                          write_config(tmp_path, frame=[[1, 0], [0, 1], [1, 1]])], capsys)
        assert code == 2


class TestSample:
    def test_h0_half_lattice(self, tmp_path, capsys):
        cfg = write_config(tmp_path, lattice={"shift": [0, 0], "generator": [[0.5, 0], [0, 0.5]]},
                           window_radius=2, degree_bound=0, signal={"coeffs": [1]})
        out = tmp_path / "s.csv"
        code, _, err = run(["sample", "--config", cfg, "--out", str(out)], capsys)
        assert code == 0 and err == ""
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == "x,omega,m_0,m_1,m_2,m_3"
        assert len(lines) - 1 == 49
        samples, meta = read_samples_csv(out.read_text())
        assert meta["density"] == 4 and "warning" not in meta
        # h0 with the Gaussian window at (1, 0) has modulus exp(-pi/2)
        row = np.flatnonzero((samples.points.points == (1, 0)).all(axis=1))[0]
        assert samples.magnitudes[row, 0] == pytest.approx(np.exp(-np.pi / 2), rel=1e-15)

    def test_zero_signal(self, tmp_path, capsys):
        cfg = write_config(tmp_path, lattice="half-integer", window_radius=2, degree_bound=0,
                           signal={"coeffs": [0]})
        code, out, _ = run(["sample", "--config", cfg], capsys)
        samples, _ = read_samples_csv(out)
        assert code == 0 and not samples.magnitudes.any()

    def test_density_warning(self, tmp_path, capsys):
        cfg = write_config(tmp_path, lattice={"generator": [[0.5, 0], [0, 1]]},
                           window_radius=3, degree_bound=2, signal={"coeffs": [1, 1]})
        code, out, err = run(["sample", "--config", cfg], capsys)
        _, meta = read_samples_csv(out)
        assert code == 0 and "warning" in meta and "warning" in err

    def test_sizing_abort(self, tmp_path, capsys):
        cfg = write_config(tmp_path, lattice="half-integer", window_radius=1, degree_bound=8,
                           signal={"random": {"degree": 8, "seed": 1}})
        code, _, err = run(["sample", "--config", cfg], capsys)
        assert code == 3 and "sizing" in err

    def test_no_signal(self, tmp_path, capsys):
        code, _, _ = run(["sample", "--config", write_config(tmp_path, lattice="half-integer")],
                         capsys)
        assert code == 2

    def test_deterministic(self, tmp_path, capsys):
        cfg = write_config(tmp_path, window_radius=3, degree_bound=6,
                           signal={"random": {"degree": 6, "seed": 3}})
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(["sample", "--config", cfg, "--out", str(a), "--seed", "9"], capsys)
        run(["sample", "--config", cfg, "--out", str(b), "--seed", "9"], capsys)
        assert a.read_bytes() == b.read_bytes()


class TestReconstruct:
    def sample_file(self, tmp_path, capsys, **cfg):
        path = write_config(tmp_path, **cfg)
        out = tmp_path / "s.csv"
        assert run(["sample", "--config", path, "--out", str(out)], capsys)[0] == 0
        return path, out

    def test_round_trip(self, tmp_path, capsys):
        cfg, csv_path = self.sample_file(tmp_path, capsys, window_radius=3, degree_bound=8,
                                         signal={"random": {"degree": 8, "seed": 5}})
        code, out, _ = run(["reconstruct", "--input", str(csv_path), "--config", cfg], capsys)
        report = json.loads(out)
        assert code == 0 and report["status"] == "unique"
        assert report["reference_error"] <= 1e-8
        rec = HermiteSignal([complex(*c) for c in report["recovered"]])
        ref = HermiteSignal.random(8, np.random.default_rng(5))
        assert up_to_phase_error(ref, rec) <= 1e-8

    def test_from_config_only(self, tmp_path, capsys):
        cfg = write_config(tmp_path, window_radius=3, degree_bound=4,
                           signal={"coeffs": [1, "i"]})
        code, out, _ = run(["reconstruct", "--config", cfg], capsys)
        assert code == 0 and json.loads(out)["reference_error"] <= 1e-8

    def test_truncated_csv(self, tmp_path, capsys):
        _, csv_path = self.sample_file(tmp_path, capsys, window_radius=3, degree_bound=8,
                                       signal={"random": {"degree": 8, "seed": 5}})
        lines = csv_path.read_text().splitlines()
        csv_path.write_text("\n".join(lines[:20]) + "\n")
        code, _, err = run(["reconstruct", "--input", str(csv_path)], capsys)
        assert code == 3 and "sizing" in err

    def test_schema_mismatch(self, tmp_path, capsys):
        _, csv_path = self.sample_file(tmp_path, capsys, window_radius=3, degree_bound=2,
                                       signal={"coeffs": [1]})
        text = csv_path.read_text().replace("m_3", "m_x")
        csv_path.write_text(text)
        code, _, _ = run(["reconstruct", "--input", str(csv_path)], capsys)
        assert code == 2

    def test_real_mode_fig2_gamma(self, tmp_path, capsys):
        cfg, csv_path = self.sample_file(tmp_path, capsys, lattice="fig2-gamma", mode="real",
                                         window_radius=3, degree_bound=6,
                                         signal={"random": {"degree": 6, "seed": 2,
                                                            "real": True}})
        code, out, _ = run(["reconstruct", "--input", str(csv_path), "--config", cfg], capsys)
        report = json.loads(out)
        assert code == 0 and report["status"] == "unique" and report["reference_error"] <= 1e-8
        assert all(c[1] == 0 for c in report["recovered"])

    def test_real_mode_complex_signal(self, tmp_path, capsys):
        cfg = write_config(tmp_path, lattice="fig2-gamma", mode="real", window_radius=3,
                           degree_bound=2, signal={"coeffs": [1, "i"]})
        code, _, err = run(["reconstruct", "--config", cfg], capsys)
        assert code == 5 and "real" in err

    def test_status_exit_mapping(self, tmp_path, capsys):
        from phaseless.cli import STATUS_EXIT
        assert STATUS_EXIT["ambiguous"] == 4 and STATUS_EXIT["infeasible"] == 5

    def test_collinear_frame(self, tmp_path, capsys):
        cfg = write_config(tmp_path, frame="cor15(1,2,3)", window_radius=3, degree_bound=2,
                           signal={"coeffs": [1]})
        code, _, _ = run(["reconstruct", "--config", cfg], capsys)
        assert code == 2


class TestLatticeInfo:
    def test_half_lattice(self, tmp_path, capsys):
        cfg = write_config(tmp_path, lattice={"shift": [0, 0], "generator": [[0.5, 0], [0, 0.5]]})
        code, out, _ = run(["lattice-info", "--config", cfg], capsys)
        report = json.loads(out)
        assert code == 0 and report["density"] == 4
        assert report["perelomov_uniqueness"] == {"pi": True, "2pi": True, "4pi": True}
        assert report["decomposition"] is None

    def test_fig2_lattice(self):
        from phaseless.cli import LATTICE_PRESETS
        report = lattice_report(LATTICE_PRESETS["fig2-lattice"])
        assert report["density"] == 4
        assert report["decomposition"]["gamma_2"]["equal"]

    def test_unit_decomposition(self, tmp_path, capsys):
        cfg = write_config(tmp_path, lattice={"shift": [0, 0.5], "generator": [[1, 0], [0, 1]]})
        code, out, _ = run(["lattice-info", "--config", cfg, "--radius", "10"], capsys)
        d = json.loads(out)["decomposition"]
        assert code == 0 and d["alpha"] == 1 and d["beta"] == 1
        for g in ("gamma_1", "gamma_2"):
            assert d[g]["equal"] and d[g]["density"] == 0.5 and d[g]["radius"] == 10

    def test_integer_lattice_perelomov(self, tmp_path, capsys):
        cfg = write_config(tmp_path, lattice={"generator": [[1, 0], [0, 1]]})
        report = json.loads(run(["lattice-info", "--config", cfg], capsys)[1])
        assert report["perelomov_uniqueness"] == {"pi": True, "2pi": False, "4pi": False}

    def test_bad_lattice(self, tmp_path, capsys):
        cfg = write_config(tmp_path, lattice={"generator": [[1, 1], [1, 1]]})
        assert run(["lattice-info", "--config", cfg], capsys)[0] == 2


class TestDemo:
    def test_demo(self, tmp_path, capsys):
        code, out, _ = run(["demo", "--out", str(tmp_path / "demo")], capsys)
        summary = json.loads(out)
        assert code == 0
        assert summary["fig1_frame"]["does_phase_retrieval"] is True
        assert summary["collinear_frame"]["does_phase_retrieval"] is False
        for mode in ("complex", "real"):
            assert summary[f"reconstruct_{mode}"]["reference_error"] <= 1e-8
        assert (tmp_path / "demo" / "demo.json").exists()
        assert (tmp_path / "demo" / "samples_real.csv").exists()

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "phaseless", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and "check-frame" in proc.stdout
