"""
Reference serialisations: raster scan and rectangular (concentric-ring) spiral.
"""
import numpy as np

from .grid import GridDims, ScanOrder


def raster_scan(dims: GridDims) -> ScanOrder:
    return ScanOrder(dims, np.arange(dims.n_cells, dtype=np.int64))


def _ring(center_row: int, center_col: int, m: int):
    """
    Cells of the square ring at Chebyshev distance m, clockwise.

    The ring starts one cell right of its top-left corner and ends on that corner,
    so the next ring starts directly above the end of this one.
    """
    top, bottom = center_row - m, center_row + m
    left, right = center_col - m, center_col + m
    span = np.arange(2 * m)
    rows = np.concatenate((
        np.full(2 * m, top),            # top edge, left to right
        top + 1 + span,                 # right edge, downwards
        np.full(2 * m, bottom),         # bottom edge, right to left
        bottom - 1 - span,              # left edge, upwards
    ))
    cols = np.concatenate((
        left + 1 + span,
        np.full(2 * m, right),
        right - 1 - span,
        np.full(2 * m, left),
    ))
    return rows, cols


def rect_spiral_scan(dims: GridDims) -> ScanOrder:
    """
    Concentric square rings around the center cell, visited from the inside out.

    The center cell is (floor((H-1)/2), floor((W-1)/2)); ring cells outside the grid
    are skipped, which keeps non-square and degenerate grids a valid permutation.
    """
    center_row, center_col = (dims.height - 1) // 2, (dims.width - 1) // 2
    n_rings = max(center_row, dims.height - 1 - center_row, center_col, dims.width - 1 - center_col)
    pieces = [np.array([center_row * dims.width + center_col], dtype=np.int64)]
    for m in range(1, n_rings + 1):
        rows, cols = _ring(center_row, center_col, m)
        inside = (rows >= 0) & (rows < dims.height) & (cols >= 0) & (cols < dims.width)
        pieces.append((rows[inside] * dims.width + cols[inside]).astype(np.int64))
    return ScanOrder(dims, np.concatenate(pieces))
