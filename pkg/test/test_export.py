import importlib
import logging

import h5py
import hdf5plugin
import numpy as np
import xarray

from spiralscan import export
from spiralscan.comparison import run_comparison
from spiralscan.export import results_to_dataset, dataset_encoding, write_netcdf
from spiralscan.footprint import FootprintConfig
from spiralscan.grid import GridDims


class TestExport:
    def test_dataset(self) -> None:
        dims = GridDims(4, 5)
        comparison = run_comparison(dims, "raster fermat", with_metrics=False)
        dataset = results_to_dataset(comparison)
        assert list(dataset["strategy"].values) == ["raster", "fermat"]
        assert dataset["order"].shape == (2, 20)
        np.testing.assert_array_equal(dataset["order"].sel(strategy="raster").values, np.arange(20))
        assert np.all(np.isnan(dataset["footprint"].values))
        assert np.all(np.isnan(dataset["spiral_x"].sel(strategy="raster").values))
        assert not np.any(np.isnan(dataset["spiral_y"].sel(strategy="fermat").values))
        assert "footprint_protocol" not in dataset.attrs

    def test_footprint_attributes(self) -> None:
        cfg = FootprintConfig(n_seeds=1, channels=2, state_dim=2)
        dataset = results_to_dataset(run_comparison(GridDims(4, 4), "rect", footprint_config=cfg, with_metrics=False))
        assert float(dataset["footprint"].sel(strategy="rect").max()) == 1.0
        assert "footprint_rect_sigma" in dataset.attrs
        assert "n_seeds=1" in dataset.attrs["footprint_protocol"]

    def test_encoding(self) -> None:
        dataset = results_to_dataset(run_comparison(GridDims(3, 3), "raster", with_metrics=False))
        encoding = dataset_encoding(dataset)
        assert set(encoding) == {"order", "footprint", "spiral_x", "spiral_y"}
        assert encoding["footprint"]["chunksizes"] == (1, 3, 3)
        assert encoding["order"]["compression"] == hdf5plugin.BLOSC_ID

    def test_netcdf_round_trip(self, tmp_path) -> None:
        path = tmp_path / "results.nc"
        cfg = FootprintConfig(n_seeds=1, channels=2, state_dim=2)
        dataset = results_to_dataset(run_comparison(GridDims(5, 6), "raster fermat", footprint_config=cfg,
                                                    with_metrics=False))
        write_netcdf(dataset, path)
        with xarray.open_dataset(path, engine="h5netcdf") as loaded:
            np.testing.assert_array_equal(loaded["order"].values, dataset["order"].values)
            np.testing.assert_array_equal(loaded["footprint"].values, dataset["footprint"].values)
            np.testing.assert_array_equal(loaded["spiral_x"].values, dataset["spiral_x"].values)
            assert loaded.attrs["tool_version"] == dataset.attrs["tool_version"]
        with h5py.File(path, "r") as stream:
            plist = stream["footprint"].id.get_create_plist()
            filters = [plist.get_filter(index)[0] for index in range(plist.get_nfilters())]
            assert hdf5plugin.BLOSC_ID in filters

    def test_hdf5plugin_loggers_set_on_write(self, tmp_path) -> None:
        plugin_logger = logging.getLogger("hdf5plugin")
        previous = plugin_logger.level
        try:
            plugin_logger.setLevel(logging.DEBUG)
            importlib.reload(export)
            assert plugin_logger.level == logging.DEBUG
            dataset = results_to_dataset(run_comparison(GridDims(2, 2), "raster", with_metrics=False))
            export.write_netcdf(dataset, tmp_path / "results.nc")
            assert plugin_logger.level == logging.WARNING
        finally:
            plugin_logger.setLevel(previous)
