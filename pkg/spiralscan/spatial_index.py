"""
Dynamic spatial index over the unassigned cells of a grid.

The lattice is cut into square buckets. Each bucket keeps the number of cells
still alive, and a query point gets, for every bucket, the exact distance to the
closest cell center the bucket can hold. That distance is computed with the same
floating point operations as the distance to a cell center, so it is a true
lower bound for every alive cell of the bucket, rounding included.
"""
import logging
from typing import Tuple

import numpy as np

from .errors import InvalidGridError
from .grid import GridDims

logger = logging.getLogger(__name__)


def point_distances(xs: np.ndarray, ys: np.ndarray, px: float, py: float) -> np.ndarray:
    """
    Euclidean distances from (px, py) to the points (xs, ys).

    Every distance of the package goes through this expression, which keeps the
    exhaustive and the accelerated matchers bit-identical.
    """
    dx = xs - px
    dy = ys - py
    return np.sqrt(dx * dx + dy * dy)


def default_bucket_size(dims: GridDims) -> int:
    return max(2, int(round(dims.n_cells ** 0.25)))


class UnassignedIndex:
    """
    Bucket grid over the cells of a grid, supporting deletion and nearest queries.
    """

    def __init__(self, dims: GridDims, bucket_size: int = None):
        self.dims = dims
        self.bucket_size = default_bucket_size(dims) if bucket_size is None else int(bucket_size)
        if self.bucket_size < 1:
            raise InvalidGridError(f"Bucket size must be >= 1, got {self.bucket_size}")
        size = self.bucket_size
        n_cells = dims.n_cells
        self.bucket_rows = -(-dims.height // size)
        self.bucket_cols = -(-dims.width // size)
        n_buckets = self.bucket_rows * self.bucket_cols

        bucket_row = np.arange(n_buckets) // self.bucket_cols
        bucket_col = np.arange(n_buckets) % self.bucket_cols
        # Extreme cell-center coordinates each bucket can hold, clipped to the grid.
        self._x_low = (bucket_col * size).astype(np.float64)
        self._x_high = np.minimum(bucket_col * size + size - 1, dims.width - 1).astype(np.float64)
        self._y_low = (bucket_row * size).astype(np.float64)
        self._y_high = np.minimum(bucket_row * size + size - 1, dims.height - 1).astype(np.float64)

        # Member table padded with the sentinel n_cells, which is never alive.
        self.members = np.full((n_buckets, size * size), n_cells, dtype=np.int64)
        cells = np.arange(n_cells)
        rows, cols = cells // dims.width, cells % dims.width
        cell_bucket = (rows // size) * self.bucket_cols + cols // size
        slot = (rows % size) * size + cols % size
        self.members[cell_bucket, slot] = cells
        self.cell_bucket = cell_bucket

        self.alive = np.ones(n_cells + 1, dtype=bool)
        self.alive[n_cells] = False
        self.counts = np.bincount(cell_bucket, minlength=n_buckets).astype(np.int64)
        self._size = n_cells

        self.xs, self.ys = dims.cell_centers()

    @property
    def n_buckets(self) -> int:
        return len(self.counts)

    def __len__(self):
        return self._size

    def __contains__(self, cell) -> bool:
        return 0 <= cell < self.dims.n_cells and bool(self.alive[cell])

    def remove(self, cell: int) -> None:
        if cell not in self:
            raise KeyError(f"Cell {cell} is not in the index")
        self.alive[cell] = False
        self.counts[self.cell_bucket[cell]] -= 1
        self._size -= 1

    def bucket_distances(self, px: float, py: float) -> np.ndarray:
        """
        For every bucket, a lower bound of the distance from (px, py) to its cells.
        """
        dx = np.maximum(np.maximum(self._x_low - px, px - self._x_high), 0.0)
        dy = np.maximum(np.maximum(self._y_low - py, py - self._y_high), 0.0)
        return np.sqrt(dx * dx + dy * dy)

    def alive_cells(self, buckets: np.ndarray) -> np.ndarray:
        """
        Alive cells of the given buckets, in ascending linear index.
        """
        candidates = self.members[buckets].ravel()
        return np.sort(candidates[self.alive[candidates]])

    def nearest(self, px: float, py: float, m: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        The m alive cells closest to (px, py), ties broken by smaller linear index.

        Returns:
            tuple: (cells, distances), sorted by distance then index. Fewer than m
            cells are returned only when fewer are alive.
        """
        if m < 1:
            raise ValueError(f"m must be >= 1, got {m}")
        if self._size == 0:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
        bounds = self.bucket_distances(px, py)
        bounds[self.counts == 0] = np.inf
        ranking = np.argsort(bounds, kind="stable")
        cumulative = np.cumsum(self.counts[ranking])
        # Enough buckets to hold m cells, then every bucket that may hold a cell as close as the m-th.
        first = min(int(np.searchsorted(cumulative, m)) + 1, len(ranking))
        cells = self.alive_cells(ranking[:first])
        distances = point_distances(self.xs[cells], self.ys[cells], px, py)
        if len(cells) >= m:
            kth = np.partition(distances, m - 1)[m - 1]
            last = int(np.searchsorted(bounds[ranking], kth, side="right"))
            if last > first:
                cells = self.alive_cells(ranking[:last])
                distances = point_distances(self.xs[cells], self.ys[cells], px, py)
        selection = np.lexsort((cells, distances))[:m]
        return cells[selection], distances[selection]
