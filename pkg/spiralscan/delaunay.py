"""
Delaunay triangulation of planar point sets.

Two engines are available:

- "bowyer-watson": incremental insertion inside a super-triangle, points sorted
  along a Morton curve and located by a visibility walk. Orientation and in-circle
  tests use a floating point filter and fall back to exact integer arithmetic,
  so the result is a true Delaunay triangulation of the given floats. A point on
  the circumcircle of a triangle is treated as outside, which breaks co-circular
  ties by insertion order.
- "qhull": scipy.spatial.Delaunay, used for cross-checking.

Both return the unique edges between input points as sorted (i, j) pairs, i < j.
"""
import logging

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .errors import GeometryError

logger = logging.getLogger(__name__)

ENGINES = ["bowyer-watson", "qhull"]

# Relative error bounds of the floating point filters.
_ORIENT_ERRBOUND = 1e-15
_INCIRCLE_ERRBOUND = 1e-14

# Distance of the super-triangle vertices, in units of the point set extent.
_SUPER_TRIANGLE_SCALE = 1e5

_MORTON_BITS = 16


def _as_integers(*values):
    """
    Scale dyadic floats to integers sharing one power-of-two denominator.
    """
    ratios = [value.as_integer_ratio() for value in values]
    denominator = max(d for _, d in ratios)
    return [n * (denominator // d) for n, d in ratios]


def _orient_exact(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = _as_integers(ax, ay, bx, by, cx, cy)
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (det > 0) - (det < 0)


def orient(ax, ay, bx, by, cx, cy) -> float:
    """
    Positive if a, b, c turn counterclockwise, negative if clockwise, zero if collinear.
    """
    left = (ax - cx) * (by - cy)
    right = (ay - cy) * (bx - cx)
    det = left - right
    if abs(det) > _ORIENT_ERRBOUND * (abs(left) + abs(right)):
        return det
    return float(_orient_exact(ax, ay, bx, by, cx, cy))


def _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    ax, ay, bx, by, cx, cy, dx, dy = _as_integers(ax, ay, bx, by, cx, cy, dx, dy)
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    det = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
           + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
           + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
    return (det > 0) - (det < 0)


def incircle(ax, ay, bx, by, cx, cy, dx, dy) -> float:
    """
    Positive if d lies strictly inside the circumcircle of the counterclockwise triangle a, b, c.
    """
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady)
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * alift
                 + (abs(cdxady) + abs(adxcdy)) * blift
                 + (abs(adxbdy) + abs(bdxady)) * clift)
    if abs(det) > _INCIRCLE_ERRBOUND * permanent:
        return det
    return float(_incircle_exact(ax, ay, bx, by, cx, cy, dx, dy))


def _spread_bits(values: np.ndarray) -> np.ndarray:
    values = values.astype(np.uint64) & np.uint64(0xFFFF)
    values = (values | (values << np.uint64(8))) & np.uint64(0x00FF00FF)
    values = (values | (values << np.uint64(4))) & np.uint64(0x0F0F0F0F)
    values = (values | (values << np.uint64(2))) & np.uint64(0x33333333)
    values = (values | (values << np.uint64(1))) & np.uint64(0x55555555)
    return values


def morton_order(points: np.ndarray) -> np.ndarray:
    """
    Indices of the points sorted along a Z-order curve over their bounding box.
    """
    low = points.min(axis=0)
    extent = float((points.max(axis=0) - low).max())
    if extent == 0:
        return np.arange(len(points))
    cells = np.floor((points - low) / extent * (2 ** _MORTON_BITS - 1)).astype(np.int64)
    codes = _spread_bits(cells[:, 0]) | (_spread_bits(cells[:, 1]) << np.uint64(1))
    return np.argsort(codes, kind="stable")


def check_not_collinear(points: np.ndarray) -> None:
    """
    Raise GeometryError unless the points span a triangle.
    """
    if len(points) < 3:
        raise GeometryError(f"A triangulation needs at least 3 points, got {len(points)}")
    first = points[0]
    distinct = np.flatnonzero(np.any(points != first, axis=1))
    if distinct.size == 0:
        raise GeometryError("All points coincide")
    second = points[distinct[0]]
    ax, ay, bx, by = float(first[0]), float(first[1]), float(second[0]), float(second[1])
    for x, y in points.tolist():
        if orient(ax, ay, bx, by, x, y) != 0:
            return
    raise GeometryError("All points are collinear")


def delaunay_edges(points, engine: str = "bowyer-watson") -> np.ndarray:
    """
    Unique edges of the Delaunay triangulation of a planar point set.

    Args:
        points: (N, 2) array of finite coordinates, at least 3 non-collinear points.
        engine (str): "bowyer-watson" or "qhull".

    Returns:
        np.ndarray: (E, 2) int64 array of index pairs (i < j) in lexicographic order.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 2:
        raise GeometryError(f"Points must have shape (N, 2), got {points.shape}")
    if not np.all(np.isfinite(points)):
        raise GeometryError("Points must be finite")
    if engine not in ENGINES:
        raise GeometryError(f"Unknown triangulation engine {engine!r}, expected one of {ENGINES}")
    check_not_collinear(points)

    if engine == "qhull":
        edges = _qhull_edges(points)
    else:
        edges = _bowyer_watson_edges(points)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    return edges[order]


def _qhull_edges(points: np.ndarray) -> np.ndarray:
    try:
        simplices = Delaunay(points).simplices
    except QhullError as err:
        raise GeometryError(f"Qhull could not triangulate the points: {err}") from err
    edges = np.concatenate((simplices[:, [0, 1]], simplices[:, [1, 2]], simplices[:, [0, 2]]))
    edges.sort(axis=1)
    return np.unique(edges, axis=0).astype(np.int64)


def _bowyer_watson_edges(points: np.ndarray) -> np.ndarray:
    n_points = len(points)
    low, high = points.min(axis=0), points.max(axis=0)
    extent = max(float((high - low).max()), 1.0)
    mid_x, mid_y = (float(low[0]) + float(high[0])) / 2, (float(low[1]) + float(high[1])) / 2
    far = _SUPER_TRIANGLE_SCALE * extent

    xs = points[:, 0].tolist() + [mid_x - 3 * far, mid_x + 3 * far, mid_x]
    ys = points[:, 1].tolist() + [mid_y - 3 * far, mid_y - 3 * far, mid_y + 3 * far]

    # Triangle t has counterclockwise vertices tv[t] and tn[t][i] is the neighbour across
    # the edge opposite tv[t][i], -1 outside the super-triangle.
    tv = [[n_points, n_points + 1, n_points + 2]]
    tn = [[-1, -1, -1]]
    alive = [True]
    last = 0
    duplicates = 0

    for p in morton_order(points).tolist():
        px, py = xs[p], ys[p]

        # Visibility walk to a triangle containing p.
        t = last
        while True:
            a, b, c = tv[t]
            if orient(xs[b], ys[b], xs[c], ys[c], px, py) < 0:
                t = tn[t][0]
            elif orient(xs[c], ys[c], xs[a], ys[a], px, py) < 0:
                t = tn[t][1]
            elif orient(xs[a], ys[a], xs[b], ys[b], px, py) < 0:
                t = tn[t][2]
            else:
                break
        if any(xs[v] == px and ys[v] == py for v in tv[t]):
            duplicates += 1
            continue

        # Cavity: triangles connected to t whose circumcircle strictly contains p.
        cavity = [t]
        in_cavity = {t}
        rejected = set()
        stack = [t]
        while stack:
            s = stack.pop()
            for neighbour in tn[s]:
                if neighbour == -1 or neighbour in in_cavity or neighbour in rejected:
                    continue
                a, b, c = tv[neighbour]
                if incircle(xs[a], ys[a], xs[b], ys[b], xs[c], ys[c], px, py) > 0:
                    in_cavity.add(neighbour)
                    cavity.append(neighbour)
                    stack.append(neighbour)
                else:
                    rejected.add(neighbour)

        # Fan the cavity boundary around p.
        starting_at = {}
        ending_at = {}
        created = []
        for s in cavity:
            alive[s] = False
            vertices = tv[s]
            for i in range(3):
                outer = tn[s][i]
                if outer in in_cavity:
                    continue
                u, v = vertices[(i + 1) % 3], vertices[(i + 2) % 3]
                new = len(tv)
                tv.append([u, v, p])
                tn.append([-1, -1, outer])
                alive.append(True)
                if outer != -1:
                    outer_neighbours = tn[outer]
                    outer_neighbours[outer_neighbours.index(s)] = new
                starting_at[u] = new
                ending_at[v] = new
                created.append(new)
        for new in created:
            u, v, _ = tv[new]
            tn[new][0] = starting_at[v]
            tn[new][1] = ending_at[u]
        last = created[-1]

    if duplicates:
        logger.debug("Skipped %d duplicate points", duplicates)

    edges = []
    for t, vertices in enumerate(tv):
        if not alive[t]:
            continue
        for i in range(3):
            u, v = vertices[i], vertices[(i + 1) % 3]
            # Each edge between input points is seen once in each direction.
            if u < v < n_points:
                edges.append((u, v))
    logger.debug("Triangulated %d points: %d edges", n_points, len(edges))
    return np.array(edges, dtype=np.int64).reshape(-1, 2)
