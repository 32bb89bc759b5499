"""Command-line interface: exit codes, CSV artifacts, and determinism."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from fracosc.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


def _read_csv(path: Path) -> dict[str, list[str]]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    header, data = rows[0], rows[1:]
    return {h: [r[i] for r in data] for i, h in enumerate(header)}


def _floats(col: list[str]) -> np.ndarray:
    return np.array([float(v) for v in col])


class TestImpulseCommand:
    def test_naive_blow_up_exits_numeric(self, tmp_path, capsys):
        code = main(
            [
                "impulse",
                "--omega-n", "10", "--zeta", "0.05", "--beta", "0.7",
                "--t-end", "5", "--n", "501",
                "--method", "series", "--naive",
                "--out", str(tmp_path),
            ]
        )
        assert code == EXIT_NUMERIC
        err = capsys.readouterr().err
        assert "t = 3." in err
        # failed runs leave no completion marker
        assert not (tmp_path / "run_manifest.json").exists()

    def test_all_methods_writes_artifacts(self, tmp_path):
        code = main(
            [
                "impulse",
                "--omega-n", "1", "--zeta", "0.05", "--beta", "1",
                "--t-end", "10", "--n", "201",
                "--method", "all", "--out", str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        for name in (
            "impulse_series.csv",
            "impulse_approx.csv",
            "impulse_fdm.csv",
            "impulse_residual.csv",
            "run_manifest.json",
        ):
            assert (tmp_path / name).exists()
        manifest = json.loads((tmp_path / "run_manifest.json").read_text())
        assert all(Path(p).exists() for p in manifest["outputs"])
        ser = _floats(_read_csv(tmp_path / "impulse_series.csv")["x"])
        app = _floats(_read_csv(tmp_path / "impulse_approx.csv")["x"])
        # classical damping: both methods reduce to the same closed form
        assert np.max(np.abs(ser - app)) < 1e-8

    def test_residual_column_small_for_case_iv_parameters(self, tmp_path):
        code = main(
            [
                "impulse",
                "--omega-n", "5", "--zeta", "0.05", "--beta", "0.5",
                "--t-end", "8", "--n", "1601",
                "--method", "all", "--out", str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        res = _read_csv(tmp_path / "impulse_residual.csv")["residual"]
        ser = _floats(_read_csv(tmp_path / "impulse_series.csv")["x"])
        res_vals = np.array([float(v) for v in res if v != ""])
        assert np.max(np.abs(res_vals)) < 0.1 * np.max(np.abs(ser))

    def test_bad_parameter_exits_usage(self, tmp_path, capsys):
        code = main(
            [
                "impulse",
                "--omega-n", "1", "--zeta", "2", "--beta", "0.5",
                "--t-end", "5", "--n", "51", "--out", str(tmp_path),
            ]
        )
        assert code == EXIT_USAGE
        assert "zeta" in capsys.readouterr().err

    def test_byte_identical_reruns(self, tmp_path):
        args = [
            "impulse",
            "--omega-n", "5", "--zeta", "0.05", "--beta", "0.5",
            "--t-end", "4", "--n", "401", "--method", "all",
        ]
        d1, d2 = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(d1)]) == EXIT_OK
        assert main(args + ["--out", str(d2)]) == EXIT_OK
        for name in ("impulse_series.csv", "impulse_approx.csv", "impulse_fdm.csv"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


class TestFrfCommand:
    def test_beta1_columns_identical(self, tmp_path):
        code = main(
            [
                "frf",
                "--omega-n", "1", "--zeta", "0.05", "--beta", "1",
                "--n", "121", "--out", str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        table = _read_csv(tmp_path / "frf.csv")
        gap = np.max(
            np.abs(_floats(table["mag_exact"]) - _floats(table["mag_approx"]))
        )
        assert gap < 1e-10

    def test_static_gap_visible_at_fractional_order(self, tmp_path):
        code = main(
            [
                "frf",
                "--omega-n", "1.4142135623730951", "--zeta", "0.1214",
                "--beta", "0.56", "--n", "61", "--out", str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        table = _read_csv(tmp_path / "frf.csv")
        assert float(table["mag_exact"][0]) != float(table["mag_approx"][0])

    def test_resonance_peaks_align(self, tmp_path):
        code = main(
            [
                "frf",
                "--omega-n", "1", "--zeta", "0.01", "--beta", "0.1",
                "--g-max", "2", "--n", "2001", "--out", str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        table = _read_csv(tmp_path / "frf.csv")
        g = _floats(table["g"])
        g_exact = g[np.argmax(_floats(table["mag_exact"]))]
        g_approx = g[np.argmax(_floats(table["mag_approx"]))]
        assert abs(g_exact - g_approx) / g_exact < 0.02


class TestFitCommand:
    def test_omega_d_point_estimates(self, tmp_path):
        code = main(
            [
                "fit", "--target", "omega-d", "--samples", "300",
                "--seed", "1", "--out", str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        row = _read_csv(tmp_path / "fit_omega-d.csv")
        assert 2.14 <= float(row["a0"][0]) <= 2.34
        assert 0.53 <= float(row["a1"][0]) <= 0.73
        scatter = _read_csv(tmp_path / "scatter.csv")
        assert len(scatter["beta"]) == 300

    def test_small_sample_run_still_succeeds(self, tmp_path):
        code = main(
            [
                "fit", "--target", "omega-d", "--samples", "50",
                "--seed", "1", "--out", str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        row = _read_csv(tmp_path / "fit_omega-d.csv")
        assert float(row["a0_hi"][0]) > float(row["a0_lo"][0])

    def test_jobs_do_not_change_outputs(self, tmp_path):
        base = ["fit", "--target", "omega-d", "--samples", "90", "--seed", "7"]
        d1, d2 = tmp_path / "j1", tmp_path / "j3"
        assert main(base + ["--jobs", "1", "--out", str(d1)]) == EXIT_OK
        assert main(base + ["--jobs", "3", "--out", str(d2)]) == EXIT_OK
        assert (d1 / "scatter.csv").read_bytes() == (d2 / "scatter.csv").read_bytes()

    def test_seed_env_var_changes_default(self, tmp_path, monkeypatch):
        d1, d2 = tmp_path / "env", tmp_path / "flag"
        monkeypatch.setenv("FRACOSC_SEED", "99")
        assert main(
            ["fit", "--target", "omega-d", "--samples", "60", "--out", str(d1)]
        ) == EXIT_OK
        monkeypatch.delenv("FRACOSC_SEED")
        assert main(
            ["fit", "--target", "omega-d", "--samples", "60", "--seed", "99",
             "--out", str(d2)]
        ) == EXIT_OK
        assert (d1 / "scatter.csv").read_bytes() == (d2 / "scatter.csv").read_bytes()
        manifest = json.loads((d1 / "run_manifest.json").read_text())
        assert manifest["seed"] == 99


class TestRespondCommand:
    def test_case_one_report(self, tmp_path, capsys):
        code = main(["respond", "--case", "1", "--out", str(tmp_path)])
        assert code == EXIT_OK
        table = _read_csv(tmp_path / "report.csv")
        ser = _floats(table["series"])
        res = np.array([float(v) for v in table["residual"] if v != ""])
        assert np.max(np.abs(res)) < 0.1 * np.max(np.abs(ser))
        assert (tmp_path / "run_manifest.json").exists()

    def test_yuan_case_masks_past_blow_up(self, tmp_path, capsys):
        code = main(["respond", "--case", "yuan", "--out", str(tmp_path)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "valid until" in out
        table = _read_csv(tmp_path / "report.csv")
        valid = np.array(table["valid"]) == "1"
        assert valid[0] and not valid[-1]
        # residual cells are blank where the series is invalid
        blanks = np.array(table["residual"]) == ""
        np.testing.assert_array_equal(blanks, ~valid)
        # approx and fdm keep going to the end of the horizon
        assert table["approx"][-1] != ""
        assert table["fdm"][-1] != ""

    def test_scenario_file_roundtrip(self, tmp_path):
        cfg = tmp_path / "scenario.cfg"
        cfg.write_text(
            "omega_n = 2\nzeta = 0.2\nbeta = 1\nt_end = 25\nn = 5001\n"
            "excitation.kind = constant\nexcitation.amplitude = 3\n",
            encoding="utf-8",
        )
        out = tmp_path / "out"
        code = main(["respond", "--scenario", str(cfg), "--out", str(out)])
        assert code == EXIT_OK
        table = _read_csv(out / "report.csv")
        assert float(table["approx"][-1]) == pytest.approx(0.75, rel=1e-3)

    def test_missing_scenario_exits_usage(self, tmp_path, capsys):
        code = main(
            ["respond", "--scenario", str(tmp_path / "missing.cfg"),
             "--out", str(tmp_path)]
        )
        assert code == EXIT_USAGE
        assert "not found" in capsys.readouterr().err


class TestPlumbing:
    def test_unknown_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["oscillate"])
        assert exc.value.code == EXIT_USAGE

    def test_floats_round_trip_through_csv(self, tmp_path):
        assert main(
            [
                "impulse",
                "--omega-n", "1", "--zeta", "0.05", "--beta", "0.5",
                "--t-end", "1", "--n", "11", "--method", "approx",
                "--out", str(tmp_path),
            ]
        ) == EXIT_OK
        from fracosc.approx import impulse_approx_grid
        from fracosc.core import OscillatorParams, linspace_grid

        grid = linspace_grid(1.0, 11)
        exact = impulse_approx_grid(
            OscillatorParams(1.0, 0.05, 0.5), grid.times()
        )
        got = _floats(_read_csv(tmp_path / "impulse_approx.csv")["x"])
        np.testing.assert_array_equal(got, exact)

    def test_lf_line_endings(self, tmp_path):
        assert main(
            [
                "impulse",
                "--omega-n", "1", "--zeta", "0.05", "--beta", "0.5",
                "--t-end", "1", "--n", "11", "--method", "approx",
                "--out", str(tmp_path),
            ]
        ) == EXIT_OK
        raw = (tmp_path / "impulse_approx.csv").read_bytes()
        assert b"\r" not in raw
