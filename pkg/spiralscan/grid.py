"""
This module provides the grid types and the serialisation algebra.

Cells are linearised row-major: index = row * width + col. Cell centers sit on
integer coordinates, x along the columns and y along the rows.

Types:
- GridDims: height and width of a grid.
- ScanOrder: a validated permutation of the grid cells.
- FeatureMap: multi-channel grid data, channel-major (C, H, W).
- SerialSequence: position-major serialised data (N, C).

Functions:
- apply_scan(feature_map, order): serialise a map along an order.
- invert_scan(sequence, order): place a sequence back on the grid.
- flip_sequence(sequence): reverse the positions of a sequence.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import InvalidGridError, InvalidScanOrder, DimensionMismatch

# Largest number of cells addressable by the u32 indices of the scan order files.
MAX_CELLS = 2 ** 32 - 1


def _read_only(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class GridDims:
    height: int
    width: int

    def __post_init__(self):
        for name in ("height", "width"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidGridError(f"Grid {name} must be an integer, got {value!r}")
            if value < 1:
                raise InvalidGridError(f"Grid {name} must be >= 1, got {value}")
            object.__setattr__(self, name, int(value))
        if self.height * self.width > MAX_CELLS:
            raise InvalidGridError(f"Grid {self.height}x{self.width} has more than {MAX_CELLS} cells")

    @property
    def n_cells(self) -> int:
        return self.height * self.width

    @property
    def diagonal(self) -> float:
        return float(np.sqrt(float(self.height) ** 2 + float(self.width) ** 2))

    def linear_index(self, row: int, col: int) -> int:
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise InvalidGridError(f"Cell ({row}, {col}) is outside a {self.height}x{self.width} grid")
        return row * self.width + col

    def row_col(self, cell: int) -> Tuple[int, int]:
        if not 0 <= cell < self.n_cells:
            raise InvalidGridError(f"Cell {cell} is outside a grid of {self.n_cells} cells")
        return divmod(int(cell), self.width)

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Coordinates of all cell centers in linear order.

        Returns:
            tuple: (x, y) float arrays, x = col and y = row.
        """
        cells = np.arange(self.n_cells)
        return (cells % self.width).astype(np.float64), (cells // self.width).astype(np.float64)

    def center_cell(self) -> int:
        return self.linear_index((self.height - 1) // 2, (self.width - 1) // 2)

    def __str__(self):
        return f"{self.height}x{self.width}"


class ScanOrder:
    """
    A serialisation trajectory: order[t] is the linear index of the cell visited at step t.
    """

    def __init__(self, dims: GridDims, order):
        self.dims = dims
        array = np.asarray(order)
        if array.ndim != 1:
            raise InvalidScanOrder(f"Scan order must be one-dimensional, got shape {array.shape}")
        if array.size and not np.issubdtype(array.dtype, np.integer):
            raise InvalidScanOrder(f"Scan order must hold integers, got dtype {array.dtype}")
        self.order = _read_only(array.astype(np.int64, copy=True))
        check_permutation(self.order, dims)

    def __len__(self):
        return len(self.order)

    def __iter__(self):
        return iter(self.order.tolist())

    def __getitem__(self, item):
        return self.order[item]

    def __eq__(self, other):
        if not isinstance(other, ScanOrder):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.order, other.order)

    def __repr__(self):
        return f"{self.__class__.__name__}(dims={self.dims}, n_cells={len(self)})"

    def positions(self) -> np.ndarray:
        """
        Inverse permutation: the step at which each cell is visited.
        """
        positions = np.empty_like(self.order)
        positions[self.order] = np.arange(len(self.order))
        return positions

    def reversed(self) -> "ScanOrder":
        return ScanOrder(self.dims, self.order[::-1])

    def rows_cols(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.order // self.dims.width, self.order % self.dims.width


def check_permutation(order: np.ndarray, dims: GridDims) -> None:
    """
    Raise InvalidScanOrder naming the first violated invariant.
    """
    n_cells = dims.n_cells
    if len(order) != n_cells:
        raise InvalidScanOrder(f"Scan order has {len(order)} entries but a {dims} grid has {n_cells} cells")
    out_of_range = np.flatnonzero((order < 0) | (order >= n_cells))
    if out_of_range.size:
        position = int(out_of_range[0])
        raise InvalidScanOrder(f"Index {int(order[position])} at position {position} is out of range [0, {n_cells})")
    counts = np.bincount(order, minlength=n_cells)
    if np.any(counts != 1):
        seen = np.zeros(n_cells, dtype=bool)
        # Walk once to report the position of the first repetition.
        for position, cell in enumerate(order.tolist()):
            if seen[cell]:
                raise InvalidScanOrder(f"Duplicate index {cell} at position {position}")
            seen[cell] = True


def _finite_float_array(data, shape: tuple, what: str) -> np.ndarray:
    array = np.array(data, dtype=np.float64, order="C")
    if array.shape != shape:
        raise InvalidGridError(f"{what} data must have shape {shape}, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidGridError(f"{what} data contains non-finite values")
    return _read_only(array)


class FeatureMap:
    """
    Multi-channel grid data of shape (channels, height, width).
    """

    def __init__(self, dims: GridDims, data):
        array = np.asarray(data)
        if array.ndim == 2:
            array = array[np.newaxis]
        if array.ndim != 3 or array.shape[0] < 1:
            raise InvalidGridError(f"Feature map data must be (C, H, W), got shape {array.shape}")
        self.dims = dims
        self.data = _finite_float_array(array, (array.shape[0], dims.height, dims.width), "Feature map")

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @classmethod
    def random(cls, dims: GridDims, channels: int, rng: np.random.Generator) -> "FeatureMap":
        return cls(dims, rng.standard_normal((channels, dims.height, dims.width)))

    def __eq__(self, other):
        if not isinstance(other, FeatureMap):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"{self.__class__.__name__}(dims={self.dims}, channels={self.channels})"


class SerialSequence:
    """
    Serialised data of shape (length, channels).
    """

    def __init__(self, data):
        array = np.asarray(data)
        if array.ndim == 1:
            array = array[:, np.newaxis]
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:
            raise InvalidGridError(f"Sequence data must be (N, C) with N, C >= 1, got shape {array.shape}")
        self.data = _finite_float_array(array, array.shape, "Sequence")

    @property
    def length(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    def __len__(self):
        return self.length

    def __eq__(self, other):
        if not isinstance(other, SerialSequence):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"{self.__class__.__name__}(length={self.length}, channels={self.channels})"


def apply_scan(feature_map: FeatureMap, order: ScanOrder) -> SerialSequence:
    """
    Serialise a feature map: position t holds the channel vector of cell order[t].
    """
    if feature_map.dims != order.dims:
        raise DimensionMismatch(f"Feature map is {feature_map.dims} but the scan order is {order.dims}")
    flat = feature_map.data.reshape(feature_map.channels, -1)
    return SerialSequence(flat[:, order.order].T)


def invert_scan(sequence: SerialSequence, order: ScanOrder) -> FeatureMap:
    """
    Place a sequence back on the grid: cell order[t] receives position t.
    """
    dims = order.dims
    if sequence.length != dims.n_cells:
        raise DimensionMismatch(f"Sequence has {sequence.length} positions but the {dims} grid has {dims.n_cells} cells")
    flat = np.empty((dims.n_cells, sequence.channels), dtype=np.float64)
    flat[order.order] = sequence.data
    return FeatureMap(dims, flat.T.reshape(sequence.channels, dims.height, dims.width))


def flip_sequence(sequence: SerialSequence) -> SerialSequence:
    return SerialSequence(sequence.data[::-1])
