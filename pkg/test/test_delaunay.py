import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from spiralscan.delaunay import delaunay_edges, orient, incircle, morton_order
from spiralscan.errors import GeometryError
from spiralscan.fermat import SpiralParams, gen_spiral_points
from spiralscan.grid import GridDims
from spiralscan.isotropy import PointSet


class TestPredicates:
    def test_orient(self) -> None:
        assert orient(0.0, 0.0, 1.0, 0.0, 0.0, 1.0) > 0
        assert orient(0.0, 0.0, 0.0, 1.0, 1.0, 0.0) < 0
        assert orient(0.0, 0.0, 1.0, 1.0, 2.0, 2.0) == 0

    def test_orient_exact_fallback(self) -> None:
        # Nearly collinear, decided by the exact fallback.
        assert orient(0.0, 0.0, 1.0, 1.0 + 2.0 ** -52, 2.0, 2.0) < 0
        assert orient(0.5, 0.5, 12.0, 12.0, 24.0, 24.0) == 0

    def test_incircle(self) -> None:
        assert incircle(0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.5, 0.5) > 0
        assert incircle(0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 2.0, 2.0) < 0
        # Co-circular corners of a square.
        assert incircle(0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0) == 0
        assert incircle(3.0, 7.0, 4.0, 7.0, 4.0, 8.0, 3.0, 8.0) == 0

    def test_morton_order(self) -> None:
        points = np.array([[1.0, 1.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        assert list(morton_order(points)) == [1, 2, 3, 0]


class TestDelaunayEdges:
    def test_triangle(self) -> None:
        edges = delaunay_edges([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_array_equal(edges, [[0, 1], [0, 2], [1, 2]])

    def test_square(self) -> None:
        edges = delaunay_edges([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        assert len(edges) == 5
        sides = {(0, 1), (1, 2), (2, 3), (0, 3)}
        assert sides <= {tuple(edge) for edge in edges.tolist()}

    def test_lattice_edge_counts(self) -> None:
        # Every square of an m x m lattice gets exactly one diagonal.
        m = 6
        xs, ys = GridDims(m, m).cell_centers()
        points = np.column_stack((xs, ys))
        edges = delaunay_edges(points)
        delta = points[edges[:, 1]] - points[edges[:, 0]]
        lengths = np.hypot(delta[:, 0], delta[:, 1])
        assert len(edges) == 2 * m * (m - 1) + (m - 1) ** 2
        assert np.sum(np.isclose(lengths, 1.0)) == 2 * m * (m - 1)
        assert np.sum(np.isclose(lengths, math.sqrt(2))) == (m - 1) ** 2

    def test_matches_qhull_on_random_points(self) -> None:
        rng = np.random.default_rng(2)
        points = rng.uniform(0, 100, size=(400, 2))
        np.testing.assert_array_equal(delaunay_edges(points, engine="bowyer-watson"),
                                      delaunay_edges(points, engine="qhull"))

    def test_spiral_points_edge_count(self) -> None:
        # A triangulation of n points with h hull vertices has 3n - 3 - h edges.
        spiral = gen_spiral_points(SpiralParams.for_grid(GridDims(20, 20)))
        points = np.column_stack((spiral.x, spiral.y))
        hull = ConvexHull(points)
        edges = delaunay_edges(points)
        assert len(edges) == 3 * len(points) - 3 - len(hull.vertices)

    def test_edges_are_sorted_pairs(self) -> None:
        rng = np.random.default_rng(9)
        edges = delaunay_edges(rng.uniform(size=(50, 2)))
        assert np.all(edges[:, 0] < edges[:, 1])
        assert len(np.unique(edges, axis=0)) == len(edges)

    def test_empty_circumcircles(self) -> None:
        rng = np.random.default_rng(4)
        points = rng.uniform(0, 10, size=(60, 2))
        edges = {tuple(edge) for edge in delaunay_edges(points).tolist()}
        # Each triangle of the triangulation has no point strictly inside its circumcircle.
        cycles = [(i, j, k) for (i, j) in edges for k in range(len(points))
                  if k > j and (i, k) in edges and (j, k) in edges]
        faces = 0
        for i, j, k in cycles:
            a, b, c = points[i], points[j], points[k]
            if orient(*a, *b, *c) < 0:
                b, c = c, b
            others = [q for q in range(len(points)) if q not in (i, j, k)]
            if any(_inside_triangle(a, b, c, points[q]) for q in others):
                continue
            faces += 1
            assert not any(incircle(*a, *b, *c, *points[q]) > 0 for q in others)
        assert faces > 0

    def test_duplicates_are_skipped(self) -> None:
        points = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]
        edges = delaunay_edges(points)
        assert {tuple(edge) for edge in edges.tolist()} == {(0, 1), (0, 2), (1, 2)}

    def test_degenerate_inputs(self) -> None:
        cases = [
            [[0.0, 0.0], [1.0, 1.0]],
            [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [5.0, 5.0]],
            [[2.0, 3.0], [2.0, 3.0], [2.0, 3.0]],
            [[0.0, 0.0], [1.0, np.nan], [0.0, 1.0]],
            [[0.0, 0.0, 0.0]],
        ]
        for points in cases:
            with pytest.raises(GeometryError):
                delaunay_edges(points)
        with pytest.raises(GeometryError):
            delaunay_edges([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], engine="delaunator")

    def test_point_set_normalisation(self) -> None:
        ps = PointSet([[10.0, 10.0], [14.0, 10.0], [10.0, 12.0]])
        assert ps.scale == 4.0
        np.testing.assert_array_equal(ps.points, [[0.0, 0.0], [1.0, 0.0], [0.0, 0.5]])


def _inside_triangle(a, b, c, d) -> bool:
    return orient(*a, *b, *d) > 0 and orient(*b, *c, *d) > 0 and orient(*c, *a, *d) > 0
