"""
Continuity-constrained assignment of spiral samples to grid cells.

For k = 0 .. N-1 the unassigned cell u minimising

    (1 - lambda_c) * d(u, p_k) / eta_f + lambda_c * d(u, pi_{k-1}) / eta_c

becomes pi_k. Ties go to the smaller linear index, and the continuity term is 0
at k = 0. Two interchangeable modes are provided: an exhaustive scan over every
unassigned cell (the reference) and an accelerated mode that returns exactly the
same order. The accelerated mode searches rings of cells around the step and only
ranks the buckets of an UnassignedIndex when the rings cannot certify a winner.
"""
import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import definitions, rules
from .errors import InvalidMatchConfig, DimensionMismatch, InvalidGridError
from .fermat import SpiralPoint, SpiralPoints
from .grid import GridDims, ScanOrder
from .spatial_index import UnassignedIndex, point_distances

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchConfig:
    """
    Parameters of the continuity-constrained matching.

    eta_f and eta_c left as None resolve to the grid diagonal.
    """
    lambda_c: float = rules.DEFAULT_LAMBDA_C
    eta_f: Optional[float] = None
    eta_c: Optional[float] = None
    candidate_count: int = rules.DEFAULT_CANDIDATE_COUNT
    mode: str = rules.DEFAULT_MATCH_MODE

    def __post_init__(self):
        self.check_validity()

    def check_validity(self) -> bool:
        if not (isinstance(self.lambda_c, (int, float)) and math.isfinite(self.lambda_c)
                and 0.0 <= self.lambda_c <= 1.0):
            raise InvalidMatchConfig(f"lambda_c must be within [0, 1], got {self.lambda_c!r}")
        for name in ("eta_f", "eta_c"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise InvalidMatchConfig(f"{name} must be a positive finite number, got {value!r}")
        if isinstance(self.candidate_count, bool) or not isinstance(self.candidate_count, (int, np.integer)) \
                or self.candidate_count < 1:
            raise InvalidMatchConfig(f"candidate_count must be a positive integer, got {self.candidate_count!r}")
        if self.mode not in definitions.match_modes:
            raise InvalidMatchConfig(f"Invalid matching mode {self.mode!r}, expected one of {definitions.match_modes}")
        return True

    def resolve(self, dims: GridDims) -> "MatchConfig":
        diagonal = dims.diagonal
        return replace(self,
                       eta_f=diagonal if self.eta_f is None else float(self.eta_f),
                       eta_c=diagonal if self.eta_c is None else float(self.eta_c))

    def weights(self, dims: GridDims):
        resolved = self.resolve(dims)
        return (1.0 - resolved.lambda_c) / resolved.eta_f, resolved.lambda_c / resolved.eta_c


def _scores(xs, ys, px, py, prev_xy, w_f, w_c):
    fermat_term = point_distances(xs, ys, px, py)
    if prev_xy is None:
        continuity_term = np.zeros_like(fermat_term)
    else:
        continuity_term = point_distances(xs, ys, prev_xy[0], prev_xy[1])
    return w_f * fermat_term + w_c * continuity_term


def match_score(cell: int, k: int, prev: Optional[int], spiral: SpiralPoint, cfg: MatchConfig,
                dims: GridDims) -> float:
    """
    Score of assigning `cell` at step k after `prev` (None at k = 0).
    """
    if not 0 <= cell < dims.n_cells:
        raise InvalidGridError(f"Cell {cell} is outside a grid of {dims.n_cells} cells")
    if prev is not None and not 0 <= prev < dims.n_cells:
        raise InvalidGridError(f"Previous cell {prev} is outside a grid of {dims.n_cells} cells")
    if k == 0 and prev is not None:
        raise InvalidMatchConfig("Step 0 has no predecessor")
    w_f, w_c = cfg.weights(dims)
    xs = np.array([cell % dims.width], dtype=np.float64)
    ys = np.array([cell // dims.width], dtype=np.float64)
    prev_xy = None if prev is None else (float(prev % dims.width), float(prev // dims.width))
    return float(_scores(xs, ys, spiral.x, spiral.y, prev_xy, w_f, w_c)[0])


def match_grid(spiral: SpiralPoints, dims: GridDims, cfg: MatchConfig = MatchConfig()) -> ScanOrder:
    """
    Greedy continuity-constrained matching of the spiral samples to the grid cells.

    Args:
        spiral (SpiralPoints): One sample per cell, in step order.
        dims (GridDims): Grid dimensions.
        cfg (MatchConfig): Matching parameters, including the mode.

    Returns:
        ScanOrder: The serialisation trajectory pi_0 .. pi_{N-1}.
    """
    if len(spiral) != dims.n_cells:
        raise DimensionMismatch(f"Spiral has {len(spiral)} points but the {dims} grid has {dims.n_cells} cells")
    w_f, w_c = cfg.weights(dims)
    start = time.perf_counter()
    if cfg.mode == "exhaustive":
        order = _match_exhaustive(spiral, dims, w_f, w_c)
    else:
        order = _match_accelerated(spiral, dims, w_f, w_c, cfg.candidate_count)
    logger.info("Matched %d cells (%s, lambda_c=%s) in %.1f ms",
                dims.n_cells, cfg.mode, cfg.lambda_c, 1e3 * (time.perf_counter() - start))
    return ScanOrder(dims, order)


def _match_exhaustive(spiral: SpiralPoints, dims: GridDims, w_f: float, w_c: float) -> np.ndarray:
    xs, ys = dims.cell_centers()
    assigned = np.zeros(dims.n_cells, dtype=bool)
    order = np.empty(dims.n_cells, dtype=np.int64)
    prev_xy = None
    for k in range(dims.n_cells):
        scores = _scores(xs, ys, spiral.x[k], spiral.y[k], prev_xy, w_f, w_c)
        scores[assigned] = np.inf
        # argmin returns the first minimum, which is the smallest linear index.
        cell = int(np.argmin(scores))
        order[k] = cell
        assigned[cell] = True
        prev_xy = (xs[cell], ys[cell])
    return order


def _ring_cells(row: int, col: int, radius: int, dims: GridDims):
    """
    Cells at Chebyshev distance `radius` from (row, col), clipped to the grid.
    """
    if radius == 0:
        yield row, col
        return
    top, bottom, left, right = row - radius, row + radius, col - radius, col + radius
    for c in range(max(left, 0), min(right, dims.width - 1) + 1):
        if top >= 0:
            yield top, c
        if bottom < dims.height:
            yield bottom, c
    for r in range(max(top + 1, 0), min(bottom - 1, dims.height - 1) + 1):
        if left >= 0:
            yield r, left
        if right < dims.width:
            yield r, right


def _outside_distance(row: int, col: int, radius: int, cx: float, cy: float, dims: GridDims) -> Optional[float]:
    """
    Lower bound of the distance from (cx, cy) to every cell outside the block of
    Chebyshev radius `radius` around (row, col). None when the block covers the grid.
    """
    gaps = []
    if col - radius - 1 >= 0:
        gaps.append(cx - (col - radius - 1))
    if col + radius + 1 < dims.width:
        gaps.append((col + radius + 1) - cx)
    if row - radius - 1 >= 0:
        gaps.append(cy - (row - radius - 1))
    if row + radius + 1 < dims.height:
        gaps.append((row + radius + 1) - cy)
    if not gaps:
        return None
    return max(0.0, min(gaps))


def _ring_step(free: bytearray, dims: GridDims, px: float, py: float, prev_xy, w_f: float, w_c: float,
               ring_limit: int) -> Optional[int]:
    """
    Best cell from rings expanding around the more heavily weighted of p_k and pi_{k-1}.

    For a cell at distance d from the ring center and a distance D between both points,
    score >= a * d + b * max(0, D - d) with a >= b, which grows with d. The search stops
    once that bound, taken at the block border, exceeds the best score found. Returns
    None when `ring_limit` rings do not certify a cell.
    """
    if prev_xy is not None and w_c >= w_f:
        cx, cy, near, far, other = prev_xy[0], prev_xy[1], w_c, w_f, (px, py)
    else:
        cx, cy, near, far, other = px, py, w_f, w_c, prev_xy
    distance = 0.0 if other is None else math.sqrt((cx - other[0]) ** 2 + (cy - other[1]) ** 2)
    if other is None:
        far = 0.0
    row = min(max(int(round(cy)), 0), dims.height - 1)
    col = min(max(int(round(cx)), 0), dims.width - 1)

    best, best_cell = math.inf, None
    for radius in range(ring_limit + 1):
        for r, c in _ring_cells(row, col, radius, dims):
            cell = r * dims.width + c
            if not free[cell]:
                continue
            # Same operations as _scores, so both matchers agree bit for bit.
            dx, dy = c - px, r - py
            score = w_f * math.sqrt(dx * dx + dy * dy)
            if prev_xy is None:
                score = score + w_c * 0.0
            else:
                dx, dy = c - prev_xy[0], r - prev_xy[1]
                score = score + w_c * math.sqrt(dx * dx + dy * dy)
            if score < best or (score == best and cell < best_cell):
                best, best_cell = score, cell
        gap = _outside_distance(row, col, radius, cx, cy, dims)
        if gap is None:
            return best_cell
        bound = near * gap + far * max(0.0, distance - gap)
        if best_cell is not None and bound * (1.0 - rules.MATCH_BOUND_SLACK) > best:
            return best_cell
    return None


def _bucket_step(index: UnassignedIndex, px: float, py: float, prev_xy, w_f: float, w_c: float,
                 candidate_count: int) -> int:
    """
    Best-first search over every bucket of the index, ranked by their score lower bounds.
    """
    xs, ys = index.xs, index.ys
    # Per-bucket lower bound of the score, each term bounded separately.
    bounds = w_f * index.bucket_distances(px, py)
    if prev_xy is not None:
        bounds = bounds + w_c * index.bucket_distances(prev_xy[0], prev_xy[1])
    bounds[index.counts == 0] = np.inf
    ranking = np.argsort(bounds, kind="stable")
    sorted_bounds = bounds[ranking]

    # Seed with the best buckets until they hold candidate_count cells.
    cumulative = np.cumsum(index.counts[ranking])
    seeded = min(int(np.searchsorted(cumulative, candidate_count)) + 1, len(ranking))
    cells = index.alive_cells(ranking[:seeded])
    scores = _scores(xs[cells], ys[cells], px, py, prev_xy, w_f, w_c)
    best = scores.min()

    # Every bucket whose bound does not exceed the best score may hold a better or tied cell.
    certified = int(np.searchsorted(sorted_bounds, best, side="right"))
    if certified > seeded:
        extra = index.alive_cells(ranking[seeded:certified])
        extra_scores = _scores(xs[extra], ys[extra], px, py, prev_xy, w_f, w_c)
        cells = np.concatenate((cells, extra))
        scores = np.concatenate((scores, extra_scores))
        best = scores.min()
    return int(cells[scores == best].min())


def _match_accelerated(spiral: SpiralPoints, dims: GridDims, w_f: float, w_c: float,
                       candidate_count: int) -> np.ndarray:
    index = UnassignedIndex(dims)
    free = bytearray(b"\x01") * dims.n_cells
    order = np.empty(dims.n_cells, dtype=np.int64)
    prev_xy = None
    fallbacks = 0
    for k in range(dims.n_cells):
        px, py = float(spiral.x[k]), float(spiral.y[k])
        cell = _ring_step(free, dims, px, py, prev_xy, w_f, w_c, rules.MATCH_RING_LIMIT)
        if cell is None:
            fallbacks += 1
            cell = _bucket_step(index, px, py, prev_xy, w_f, w_c, candidate_count)
        order[k] = cell
        free[cell] = 0
        index.remove(cell)
        prev_xy = (float(cell % dims.width), float(cell // dims.width))
    logger.debug("Accelerated matching searched all buckets at %d of %d steps", fallbacks, dims.n_cells)
    return order
