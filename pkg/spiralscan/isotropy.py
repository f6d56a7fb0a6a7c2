"""
Spatial uniformity and path continuity of scan trajectories.

Spacing metrics are computed on a PointSet, normalised to the unit square by the
larger extent of its bounding box. Step statistics are computed on a ScanOrder, in
cell units. All variances are population variances.
"""
import logging
from dataclasses import dataclass, asdict
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from . import rules, threads
from .delaunay import delaunay_edges
from .errors import GeometryError
from .fermat import SpiralPoints
from .grid import GridDims, ScanOrder
from .matching import MatchConfig
from .strategies import FermatStrategy, RasterStrategy, RectSpiralStrategy, Strategy
from .strategy_set import StrategySet

logger = logging.getLogger(__name__)


class PointSet:
    """
    Planar points with their unit-square normalisation.

    `raw` keeps the input coordinates; `points` holds (raw - bbox_min) / scale where
    scale is the larger side of the bounding box.
    """

    def __init__(self, points, kind: str = "points"):
        raw = np.array(points, dtype=np.float64)
        if raw.ndim != 2 or raw.shape[1] != 2:
            raise GeometryError(f"Points must have shape (N, 2), got {raw.shape}")
        if not np.all(np.isfinite(raw)):
            raise GeometryError("Points must be finite")
        self.kind = kind
        self.raw = raw
        if len(raw):
            low = raw.min(axis=0)
            extent = float((raw.max(axis=0) - low).max())
        else:
            low, extent = np.zeros(2), 0.0
        self.scale = extent if extent > 0 else 1.0
        self.points = (raw - low) / self.scale
        for array in (self.raw, self.points):
            array.flags.writeable = False

    def __len__(self):
        return len(self.raw)

    @classmethod
    def from_cells(cls, dims: GridDims) -> "PointSet":
        xs, ys = dims.cell_centers()
        return cls(np.column_stack((xs, ys)), kind="cells")

    @classmethod
    def from_spiral(cls, spiral: SpiralPoints) -> "PointSet":
        return cls(np.column_stack((spiral.x, spiral.y)), kind="spiral")

    def __repr__(self):
        return f"{self.__class__.__name__}(kind={self.kind!r}, n_points={len(self)})"


@dataclass(frozen=True)
class IsotropyReport:
    nn_variance: float
    nn_mean: float
    delaunay_edge_variance: Optional[float]
    delaunay_interior_variance: Optional[float]
    step_mean: float
    step_max: float
    step_variance: float
    point_set: str = "cells"

    def to_dict(self) -> dict:
        return asdict(self)


def nn_spacing_variance(ps: PointSet) -> Tuple[float, float]:
    """
    Variance and mean of the distance from each point to its nearest other point.
    """
    if len(ps) < 2:
        raise GeometryError(f"Nearest-neighbour spacing needs at least 2 points, got {len(ps)}")
    tree = cKDTree(ps.points)
    distances, _ = tree.query(ps.points, k=2, workers=threads.effective_thread_count())
    spacing = distances[:, 1]
    return float(np.var(spacing)), float(np.mean(spacing))


def delaunay_edge_lengths(ps: PointSet, engine: str = "bowyer-watson") -> Tuple[np.ndarray, np.ndarray]:
    """
    Unique Delaunay edges and their lengths in normalised units.

    The triangulation runs on the raw coordinates, so lattice inputs keep their exact
    co-circularity, and the edge lengths are scaled afterwards.
    """
    edges = delaunay_edges(ps.raw, engine=engine)
    start, end = ps.raw[edges[:, 0]], ps.raw[edges[:, 1]]
    delta = end - start
    lengths = np.sqrt(delta[:, 0] * delta[:, 0] + delta[:, 1] * delta[:, 1]) / ps.scale
    return edges, lengths


def interior_points(ps: PointSet, fraction: float = rules.DELAUNAY_INTERIOR_FRACTION) -> np.ndarray:
    """
    Mask of the points within fraction * 1/2 of the bounding box center, in normalised units.
    """
    if not 0 < fraction <= 1:
        raise GeometryError(f"Interior fraction must be within (0, 1], got {fraction!r}")
    if len(ps) == 0:
        return np.zeros(0, dtype=bool)
    center = (ps.points.min(axis=0) + ps.points.max(axis=0)) / 2
    offset = ps.points - center
    return np.sqrt(offset[:, 0] * offset[:, 0] + offset[:, 1] * offset[:, 1]) <= fraction * 0.5


def _interior_lengths(ps: PointSet, edges: np.ndarray, lengths: np.ndarray, fraction: float) -> np.ndarray:
    inside = interior_points(ps, fraction)
    return lengths[inside[edges[:, 0]] & inside[edges[:, 1]]]


def delaunay_edge_variance(ps: PointSet, engine: str = "bowyer-watson", interior: Optional[float] = None) -> float:
    """
    Variance of the unique Delaunay edge lengths, in normalised units.

    Args:
        ps (PointSet): Points, at least 3 and not collinear.
        engine (str): Triangulation engine.
        interior (float): If given, only edges with both endpoints in the central disk of
            radius interior / 2 count. Hull triangles of round point sets are long and thin,
            the disk keeps them out.
    """
    edges, lengths = delaunay_edge_lengths(ps, engine=engine)
    if interior is not None:
        lengths = _interior_lengths(ps, edges, lengths, interior)
        if len(lengths) == 0:
            raise GeometryError(f"No Delaunay edge of {ps!r} lies in the central disk")
    return float(np.var(lengths))


def path_step_stats(order: ScanOrder) -> Tuple[float, float, float]:
    """
    Mean, maximum and variance of the Euclidean steps between consecutive cells.
    """
    if len(order) < 2:
        raise GeometryError("Step statistics need at least 2 cells")
    rows, cols = order.rows_cols()
    dy = np.diff(rows).astype(np.float64)
    dx = np.diff(cols).astype(np.float64)
    steps = np.sqrt(dx * dx + dy * dy)
    return float(steps.mean()), float(steps.max()), float(np.var(steps))


def spacing_metrics(ps: PointSet, engine: str = "bowyer-watson"
                    ) -> Tuple[float, float, Optional[float], Optional[float]]:
    """
    NN variance, NN mean, Delaunay edge variance and interior Delaunay edge variance.

    The Delaunay entries are None when no triangulation exists (fewer than 3 points or
    collinear points), the interior one also when no edge lies in the central disk.
    """
    nn_variance, nn_mean = nn_spacing_variance(ps)
    try:
        edges, lengths = delaunay_edge_lengths(ps, engine=engine)
    except GeometryError as err:
        logger.info("Delaunay metric unavailable for %r: %s", ps, err)
        return nn_variance, nn_mean, None, None
    interior = _interior_lengths(ps, edges, lengths, rules.DELAUNAY_INTERIOR_FRACTION)
    interior_variance = float(np.var(interior)) if len(interior) else None
    return nn_variance, nn_mean, float(np.var(lengths)), interior_variance


def isotropy_report(order: ScanOrder, ps: PointSet, engine: str = "bowyer-watson") -> IsotropyReport:
    step_stats = path_step_stats(order)
    return IsotropyReport(*spacing_metrics(ps, engine=engine), *step_stats, point_set=ps.kind)


def default_strategies(cfg: Optional[MatchConfig] = None) -> Dict[str, Strategy]:
    return {
        "raster": RasterStrategy(),
        "rect": RectSpiralStrategy(),
        "fermat": FermatStrategy() if cfg is None else FermatStrategy.from_match_config(cfg),
    }


def compare_strategies(dims: GridDims, cfg: Optional[MatchConfig] = None, strategies=None,
                       engine: str = "bowyer-watson") -> Dict[str, IsotropyReport]:
    """
    Isotropy reports of several strategies on one grid.

    Every order visits the same cell centers, so the cell spacing metrics are computed
    once and shared. Each fermat strategy gets a second entry, labelled
    "<label>_spiral", measured on its continuous spiral samples.

    Args:
        dims (GridDims): Grid dimensions.
        cfg (MatchConfig): Matching parameters of the default fermat strategy.
        strategies: A StrategySet, or anything StrategySet accepts; defaults to raster, rect and fermat.
        engine (str): Triangulation engine.

    Returns:
        dict: label -> IsotropyReport, in the order of the strategies.
    """
    if strategies is None:
        strategies = default_strategies(cfg)
    elif not isinstance(strategies, StrategySet):
        strategies = StrategySet(strategies)

    cells = PointSet.from_cells(dims)
    cell_metrics = spacing_metrics(cells, engine=engine) if len(cells) >= 2 else None

    reports = {}
    for label, strategy in strategies.items():
        order = strategy.scan_order(dims)
        if cell_metrics is None:
            raise GeometryError(f"Grid {dims} has a single cell, isotropy metrics are undefined")
        step_stats = path_step_stats(order)
        reports[label] = IsotropyReport(*cell_metrics, *step_stats, point_set=cells.kind)
        if isinstance(strategy, FermatStrategy):
            spiral = PointSet.from_spiral(strategy.spiral(dims))
            reports[f"{label}_spiral"] = IsotropyReport(*spacing_metrics(spiral, engine=engine), *step_stats,
                                                        point_set=spiral.kind)
        logger.info("Isotropy of %s on %s: step mean %.4f", label, dims, step_stats[0])
    return reports
