import numpy as np
import pytest

from spiralscan.errors import InvalidGridError, InvalidScanOrder, DimensionMismatch
from spiralscan.grid import GridDims, ScanOrder, FeatureMap, SerialSequence, apply_scan, invert_scan, flip_sequence


class TestGridDims:
    def test_dims(self) -> None:
        dims = GridDims(3, 4)
        assert dims.n_cells == 12
        assert dims.diagonal == pytest.approx(5.0)
        assert str(dims) == "3x4"

    def test_invalid_dims(self) -> None:
        cases = [(0, 3), (3, 0), (-1, 2), (2.5, 2), (True, 2), ("3", 3)]
        for height, width in cases:
            with pytest.raises(InvalidGridError):
                GridDims(height, width)

    def test_numpy_integers_are_accepted(self) -> None:
        dims = GridDims(np.int64(2), np.int32(5))
        assert dims == GridDims(2, 5)
        assert isinstance(dims.height, int)

    def test_linear_index(self) -> None:
        dims = GridDims(3, 4)
        assert dims.linear_index(2, 1) == 9
        assert dims.row_col(9) == (2, 1)
        with pytest.raises(InvalidGridError):
            dims.linear_index(3, 0)
        with pytest.raises(InvalidGridError):
            dims.row_col(12)

    def test_cell_centers(self) -> None:
        xs, ys = GridDims(2, 3).cell_centers()
        np.testing.assert_array_equal(xs, [0, 1, 2, 0, 1, 2])
        np.testing.assert_array_equal(ys, [0, 0, 0, 1, 1, 1])

    def test_center_cell(self) -> None:
        assert GridDims(3, 3).center_cell() == 4
        assert GridDims(4, 4).center_cell() == 5
        assert GridDims(1, 1).center_cell() == 0


class TestScanOrder:
    def test_valid_permutation(self) -> None:
        order = ScanOrder(GridDims(2, 2), [3, 0, 1, 2])
        assert len(order) == 4
        assert list(order) == [3, 0, 1, 2]
        np.testing.assert_array_equal(order.positions(), [1, 2, 3, 0])

    def test_order_is_read_only(self) -> None:
        order = ScanOrder(GridDims(1, 3), [0, 1, 2])
        with pytest.raises(ValueError):
            order.order[0] = 2

    def test_duplicate_index(self) -> None:
        with pytest.raises(InvalidScanOrder, match="Duplicate index 0 at position 1"):
            ScanOrder(GridDims(2, 2), [0, 0, 2, 3])

    def test_out_of_range(self) -> None:
        with pytest.raises(InvalidScanOrder, match="out of range"):
            ScanOrder(GridDims(2, 2), [0, 1, 2, 4])
        with pytest.raises(InvalidScanOrder, match="out of range"):
            ScanOrder(GridDims(2, 2), [0, 1, 2, -1])

    def test_wrong_length(self) -> None:
        with pytest.raises(InvalidScanOrder):
            ScanOrder(GridDims(2, 2), [0, 1, 2])

    def test_non_integer(self) -> None:
        with pytest.raises(InvalidScanOrder):
            ScanOrder(GridDims(1, 2), [0.0, 1.0])
        with pytest.raises(InvalidScanOrder):
            ScanOrder(GridDims(1, 2), [[0, 1]])

    def test_reversed(self) -> None:
        order = ScanOrder(GridDims(2, 2), [3, 0, 1, 2])
        assert list(order.reversed()) == [2, 1, 0, 3]
        assert order.reversed().reversed() == order

    def test_rows_cols(self) -> None:
        rows, cols = ScanOrder(GridDims(2, 3), [5, 0, 4, 1, 3, 2]).rows_cols()
        np.testing.assert_array_equal(rows, [1, 0, 1, 0, 1, 0])
        np.testing.assert_array_equal(cols, [2, 0, 1, 1, 0, 2])


class TestSerialisation:
    def test_apply_scan(self) -> None:
        dims = GridDims(2, 2)
        feature_map = FeatureMap(dims, [[1.0, 2.0], [3.0, 4.0]])
        sequence = apply_scan(feature_map, ScanOrder(dims, [3, 0, 1, 2]))
        np.testing.assert_array_equal(sequence.data, [[4.0], [1.0], [2.0], [3.0]])

    def test_invert_scan_is_inverse(self) -> None:
        rng = np.random.default_rng(7)
        dims = GridDims(5, 7)
        feature_map = FeatureMap.random(dims, 3, rng)
        order = ScanOrder(dims, rng.permutation(dims.n_cells))
        assert invert_scan(apply_scan(feature_map, order), order) == feature_map

    def test_channel_major_layout(self) -> None:
        dims = GridDims(1, 2)
        data = np.array([[[1.0, 2.0]], [[10.0, 20.0]]])
        sequence = apply_scan(FeatureMap(dims, data), ScanOrder(dims, [1, 0]))
        np.testing.assert_array_equal(sequence.data, [[2.0, 20.0], [1.0, 10.0]])

    def test_dimension_mismatch(self) -> None:
        feature_map = FeatureMap(GridDims(2, 2), np.zeros((1, 2, 2)))
        with pytest.raises(DimensionMismatch):
            apply_scan(feature_map, ScanOrder(GridDims(1, 4), [0, 1, 2, 3]))
        with pytest.raises(DimensionMismatch):
            invert_scan(SerialSequence(np.zeros(3)), ScanOrder(GridDims(2, 2), [0, 1, 2, 3]))

    def test_non_finite_data(self) -> None:
        with pytest.raises(InvalidGridError):
            FeatureMap(GridDims(1, 2), [[np.nan, 1.0]])
        with pytest.raises(InvalidGridError):
            SerialSequence([1.0, np.inf])

    def test_wrong_shape(self) -> None:
        with pytest.raises(InvalidGridError):
            FeatureMap(GridDims(2, 2), np.zeros((1, 2, 3)))
        with pytest.raises(InvalidGridError):
            SerialSequence(np.zeros((0, 2)))

    def test_flip_sequence(self) -> None:
        sequence = SerialSequence([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        flipped = flip_sequence(sequence)
        np.testing.assert_array_equal(flipped.data, [[5.0, 6.0], [3.0, 4.0], [1.0, 2.0]])
        assert flip_sequence(flipped) == sequence
