import numpy as np

from spiralscan.baselines import raster_scan, rect_spiral_scan
from spiralscan.grid import GridDims
from spiralscan.isotropy import path_step_stats


class TestRaster:
    def test_raster(self) -> None:
        assert list(raster_scan(GridDims(2, 3))) == [0, 1, 2, 3, 4, 5]

    def test_raster_single_row(self) -> None:
        mean, maximum, variance = path_step_stats(raster_scan(GridDims(1, 9)))
        assert (mean, maximum, variance) == (1.0, 1.0, 0.0)


class TestRectSpiral:
    def test_three_by_three(self) -> None:
        assert list(rect_spiral_scan(GridDims(3, 3))) == [4, 1, 2, 5, 8, 7, 6, 3, 0]

    def test_single_cell(self) -> None:
        assert list(rect_spiral_scan(GridDims(1, 1))) == [0]

    def test_starts_at_center(self) -> None:
        for dims in (GridDims(5, 5), GridDims(4, 6), GridDims(7, 2)):
            assert rect_spiral_scan(dims)[0] == dims.center_cell()

    def test_square_odd_grid_is_continuous(self) -> None:
        # Complete rings: every step moves to an 8-neighbour.
        rows, cols = rect_spiral_scan(GridDims(7, 7)).rows_cols()
        steps = np.maximum(np.abs(np.diff(rows)), np.abs(np.diff(cols)))
        assert np.all(steps == 1)

    def test_valid_permutations(self) -> None:
        # ScanOrder validates the permutation on construction.
        for height in range(1, 12):
            for width in range(1, 12):
                order = rect_spiral_scan(GridDims(height, width))
                assert len(order) == height * width

    def test_rings_are_visited_from_the_inside_out(self) -> None:
        shapes = [(height, width) for height in range(1, 65, 7) for width in range(2, 65, 9)]
        shapes += [(64, 63), (63, 64), (1, 64), (64, 1), (17, 64), (64, 30)]
        for height, width in shapes:
            dims = GridDims(height, width)
            center_row, center_col = dims.row_col(dims.center_cell())
            rows, cols = rect_spiral_scan(dims).rows_cols()
            rings = np.maximum(np.abs(rows - center_row), np.abs(cols - center_col))
            assert rings[0] == 0
            assert np.all(np.diff(rings) >= 0), dims

    def test_degenerate_rows_and_columns(self) -> None:
        assert sorted(rect_spiral_scan(GridDims(1, 6))) == list(range(6))
        assert sorted(rect_spiral_scan(GridDims(6, 1))) == list(range(6))
