"""
Export of comparison results as a self-describing xarray Dataset in a netCDF4/HDF5 file.

Every data variable is written with the lossless HDF5 Blosc filter from hdf5plugin,
chunked to the whole variable.
"""
import logging
from pathlib import Path
from typing import Dict, Union

import hdf5plugin
import numpy as np
import xarray

from . import rules
from .comparison import Comparison
from .fileformats import tool_version

logger = logging.getLogger(__name__)


def _quiet_hdf5plugin_loggers() -> None:
    """
    Set every hdf5plugin logger to WARNING.
    """
    for name in list(logging.root.manager.loggerDict):
        if "hdf5plugin" in name:
            logging.getLogger(name).setLevel(logging.WARNING)


def results_to_dataset(comparison: Comparison) -> xarray.Dataset:
    """
    Convert a comparison to a Dataset.

    Variables:
    - order(strategy, step): linear index visited at each step.
    - footprint(strategy, row, col): normalised footprint, NaN when not computed.
    - spiral_x, spiral_y(strategy, step): spiral samples, NaN for strategies without spiral.
    """
    dims = comparison.dims
    labels = list(comparison.results)
    n_cells = dims.n_cells

    order = np.stack([comparison.results[label].order.order for label in labels])
    footprint = np.full((len(labels), dims.height, dims.width), np.nan)
    spiral_x = np.full((len(labels), n_cells), np.nan)
    spiral_y = np.full((len(labels), n_cells), np.nan)
    attrs = {"tool_version": tool_version()}

    for index, label in enumerate(labels):
        result = comparison.results[label]
        attrs[f"strategy_{label}"] = result.strategy.description()
        if result.footprint is not None:
            footprint[index] = result.footprint.values
            attrs[f"footprint_{label}_mu"] = result.footprint.mu
            attrs[f"footprint_{label}_sigma"] = result.footprint.sigma
        if result.spiral is not None:
            spiral_x[index] = result.spiral.x
            spiral_y[index] = result.spiral.y

    cfg = comparison.footprint_config
    if cfg is not None:
        attrs["footprint_protocol"] = (f"probe={cfg.probe} aggregation={cfg.aggregation} target={cfg.target} "
                                       f"method={cfg.method} selective={cfg.selective} channels={cfg.channels} "
                                       f"state_dim={cfg.state_dim} n_seeds={cfg.n_seeds} seed={cfg.seed}")

    return xarray.Dataset(
        data_vars={
            "order": (("strategy", "step"), order),
            "footprint": (("strategy", "row", "col"), footprint),
            "spiral_x": (("strategy", "step"), spiral_x),
            "spiral_y": (("strategy", "step"), spiral_y),
        },
        coords={
            "strategy": labels,
            "step": np.arange(n_cells),
            "row": np.arange(dims.height),
            "col": np.arange(dims.width),
        },
        attrs=attrs,
    )


def dataset_encoding(dataset: xarray.Dataset) -> Dict[str, dict]:
    encoding = {}
    for variable in dataset.data_vars:
        encoding[str(variable)] = {
            **hdf5plugin.Blosc(cname=rules.EXPORT_BACKEND, clevel=rules.EXPORT_COMPRESSION_LEVEL),
            "chunksizes": dataset[variable].shape,
        }
    return encoding


def write_netcdf(dataset: xarray.Dataset, path: Union[str, Path]) -> None:
    _quiet_hdf5plugin_loggers()
    dataset.to_netcdf(path, engine="h5netcdf", encoding=dataset_encoding(dataset))
    logger.info("Wrote %s with %s", path, ", ".join(str(variable) for variable in dataset.data_vars))
