import json
import math

import numpy as np
import pytest
import xarray

from spiralscan import threads
from spiralscan.cli import main
from spiralscan.fileformats import read_order, read_pgm, read_report

_SMALL_FOOTPRINT = ["--seeds", "1", "--channels", "2", "--state-dim", "2"]


class TestGenerate:
    def test_binary(self, tmp_path) -> None:
        path = tmp_path / "order.fssc"
        assert main(["generate", "--strategy", "fermat", "--height", "8", "--width", "8", "--out", str(path)]) == 0
        assert path.stat().st_size == 14 + 4 * 64
        assert read_order(path)[0] == 27

    def test_csv(self, tmp_path) -> None:
        path = tmp_path / "order.csv"
        assert main(["generate", "--strategy", "raster", "--height", "2", "--width", "3", "--out", str(path)]) == 0
        assert path.read_text() == "k,row,col\n0,0,0\n1,0,1\n2,0,2\n3,1,0\n4,1,1\n5,1,2\n"

    def test_seed_is_echoed(self, tmp_path, capsys) -> None:
        path = tmp_path / "order.fssc"
        assert main(["generate", "--strategy", "rect", "--height", "3", "--width", "3", "--out", str(path),
                     "--seed", "42"]) == 0
        summary = capsys.readouterr().out
        assert "seed=42" in summary
        assert "strategy=rect" in summary
        assert list(read_order(path)) == [4, 1, 2, 5, 8, 7, 6, 3, 0]

    def test_fermat_parameters(self, tmp_path) -> None:
        path = tmp_path / "order.fssc"
        arguments = ["generate", "--strategy", "fermat", "--height", "6", "--width", "7", "--out", str(path),
                     "--lambda-c", "0.3", "--mode", "exhaustive", "--phi-g-deg", "137.5"]
        assert main(arguments) == 0
        assert sorted(read_order(path)) == list(range(42))

    def test_invalid_flags(self, tmp_path) -> None:
        out = str(tmp_path / "order.fssc")
        cases = [
            ["generate", "--strategy", "fermat", "--height", "4", "--width", "4", "--out", out, "--lambda-c", "1.5"],
            ["generate", "--strategy", "fermat", "--height", "4", "--width", "4", "--out", out, "--alpha", "0"],
            ["generate", "--strategy", "hilbert", "--height", "4", "--width", "4", "--out", out],
            ["generate", "--strategy", "raster", "--height", "0", "--width", "4", "--out", out],
            ["generate", "--strategy", "raster", "--height", "4", "--out", out],
            ["compare", "--height", "4", "--width", "4", "--out", out, "--seeds", "0"],
            ["compare", "--height", "4", "--width", "4", "--out", out, "--fd-step", "-1"],
            ["footprint", "--strategy", "raster", "--height", "4", "--width", "4", "--out", out, "--method", "jax"],
            [],
        ]
        for arguments in cases:
            with pytest.raises(SystemExit) as info:
                main(arguments)
            assert info.value.code == 2, arguments


class TestMetrics:
    def test_raster(self, tmp_path) -> None:
        order_path, report_path = tmp_path / "order.csv", tmp_path / "report.json"
        main(["generate", "--strategy", "raster", "--height", "4", "--width", "4", "--out", str(order_path)])
        assert main(["metrics", str(order_path), "--out", str(report_path)]) == 0
        report = read_report(report_path)
        mean = (12 + 3 * math.sqrt(10)) / 15
        assert report["strategy"] == "file"
        assert report["metrics"]["step_mean"] == pytest.approx(mean)
        assert report["metrics"]["step_max"] == pytest.approx(math.sqrt(10))
        assert report["metrics"]["step_variance"] == pytest.approx(2.8 - mean ** 2)
        assert report["timings_ms"] == {}

    def test_timings(self, tmp_path) -> None:
        order_path, report_path = tmp_path / "order.fssc", tmp_path / "report.json"
        main(["generate", "--strategy", "rect", "--height", "5", "--width", "5", "--out", str(order_path)])
        assert main(["metrics", str(order_path), "--out", str(report_path), "--timings", "--engine", "qhull"]) == 0
        assert "metrics" in read_report(report_path)["timings_ms"]

    def test_corrupt_order(self, tmp_path, capsys) -> None:
        order_path = tmp_path / "order.fssc"
        order_path.write_bytes(b"FSSC\x01\x00garbage")
        assert main(["metrics", str(order_path), "--out", str(tmp_path / "report.json")]) == 1
        assert "spiralscan: error:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys) -> None:
        assert main(["metrics", str(tmp_path / "missing.fssc"), "--out", str(tmp_path / "report.json")]) == 1
        assert "spiralscan: error:" in capsys.readouterr().err


class TestCompare:
    def test_compare(self, tmp_path, capsys) -> None:
        report_path, heatmaps = tmp_path / "report.json", tmp_path / "maps"
        arguments = ["compare", "--height", "6", "--width", "6", "--out", str(report_path),
                     "--heatmaps", str(heatmaps), *_SMALL_FOOTPRINT]
        assert main(arguments) == 0
        report = read_report(report_path)
        assert list(report["strategies"]) == ["fermat", "fermat_spiral", "raster", "rect"]
        for label in ("raster", "rect", "fermat"):
            pixels = read_pgm(heatmaps / f"{label}.pgm")
            assert pixels.shape == (6, 6)
            assert pixels.max() == 255
        output = capsys.readouterr().out
        assert "fermat_spiral" in output
        assert "footprint_sigma" in output

    def test_strategy_file_and_netcdf(self, tmp_path) -> None:
        config = tmp_path / "strategies.yaml"
        config.write_text("a: raster\nb: fermat,lambda_c=1.0\n")
        report_path, netcdf_path = tmp_path / "report.json", tmp_path / "results.nc"
        arguments = ["compare", "--height", "5", "--width", "4", "--out", str(report_path), "--config", str(config),
                     "--netcdf", str(netcdf_path), "--timings", *_SMALL_FOOTPRINT]
        assert main(arguments) == 0
        report = read_report(report_path)
        assert set(report["strategies"]) == {"a", "b", "b_spiral"}
        assert "a.footprint" in report["timings_ms"]
        with xarray.open_dataset(netcdf_path, engine="h5netcdf") as loaded:
            assert list(loaded["strategy"].values) == ["a", "b"]

    def test_lambda_is_applied(self, tmp_path) -> None:
        report_path = tmp_path / "report.json"
        arguments = ["compare", "--height", "5", "--width", "5", "--out", str(report_path), "--lambda-c", "0.2",
                     *_SMALL_FOOTPRINT]
        assert main(arguments) == 0
        assert json.loads(report_path.read_text())["strategies"]["fermat"]["config"]["lambda_c"] == 0.2

    def test_invalid_strategy_set(self, tmp_path, capsys) -> None:
        arguments = ["compare", "--height", "4", "--width", "4", "--out", str(tmp_path / "report.json"),
                     "--strategies", "raster hilbert", *_SMALL_FOOTPRINT]
        assert main(arguments) == 1
        assert "spiralscan: error:" in capsys.readouterr().err


class TestFootprint:
    def test_strategy(self, tmp_path, capsys) -> None:
        report_path, heatmap = tmp_path / "report.json", tmp_path / "raster.pgm"
        arguments = ["footprint", "--strategy", "raster", "--height", "5", "--width", "5", "--out", str(report_path),
                     "--heatmap", str(heatmap), *_SMALL_FOOTPRINT]
        assert main(arguments) == 0
        report = read_report(report_path)
        assert report["footprint"]["probe"] == [2, 2]
        assert report["metrics"] is None
        assert read_pgm(heatmap).shape == (5, 5)
        assert "sigma=" in capsys.readouterr().out

    def test_order_file(self, tmp_path) -> None:
        order_path, report_path = tmp_path / "order.fssc", tmp_path / "report.json"
        main(["generate", "--strategy", "rect", "--height", "4", "--width", "6", "--out", str(order_path)])
        arguments = ["footprint", "--order", str(order_path), "--out", str(report_path), "--probe", "corner",
                     "--non-selective", "--method", "analytic", *_SMALL_FOOTPRINT]
        assert main(arguments) == 0
        report = read_report(report_path)
        assert report["strategy"] == "file"
        assert report["footprint"]["probe"] == [0, 0]
        assert report["footprint"]["method"] == "analytic"

    def test_ring_probe(self, tmp_path) -> None:
        report_path = tmp_path / "report.json"
        arguments = ["footprint", "--strategy", "fermat", "--height", "8", "--width", "12", "--out", str(report_path),
                     "--probe", "ring", *_SMALL_FOOTPRINT]
        assert main(arguments) == 0
        footprint_record = read_report(report_path)["footprint"]
        assert footprint_record["probe"] == [3, 5]
        assert footprint_record["probe_radius"] == 2

    def test_missing_arguments(self, tmp_path, capsys) -> None:
        assert main(["footprint", "--out", str(tmp_path / "report.json")]) == 1
        assert "spiralscan: error:" in capsys.readouterr().err

    def test_probe_outside_grid(self, tmp_path, capsys) -> None:
        arguments = ["footprint", "--strategy", "rect", "--height", "3", "--width", "3", "--out",
                     str(tmp_path / "report.json"), "--probe", "5,5", *_SMALL_FOOTPRINT]
        assert main(arguments) == 1
        assert "outside" in capsys.readouterr().err

    def test_threads_option(self, tmp_path, mocker) -> None:
        mocker.patch.object(threads, "thread_count", 0)
        arguments = ["--threads", "2", "footprint", "--strategy", "raster", "--height", "3", "--width", "3",
                     "--out", str(tmp_path / "report.json"), *_SMALL_FOOTPRINT]
        assert main(arguments) == 0
        assert threads.thread_count == 2
        assert np.isfinite(read_report(tmp_path / "report.json")["footprint"]["sigma"])
