"""
Side-by-side evaluation of several scan strategies on one grid: scan orders,
isotropy reports and footprints, plus the reports written by the command line.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Optional

from .fermat import SpiralPoints
from .fileformats import tool_version
from .footprint import FootprintConfig, FootprintMap, footprint
from .grid import GridDims, ScanOrder
from .isotropy import IsotropyReport, PointSet, path_step_stats, spacing_metrics
from .strategies import FermatStrategy, Strategy
from .strategy_set import StrategySet

logger = logging.getLogger(__name__)

# Strategy name reported for orders read from files
ORDER_FILE_STRATEGY = "file"


@dataclass
class StrategyResult:
    label: str
    strategy: Strategy
    order: ScanOrder
    metrics: Optional[IsotropyReport] = None
    spiral_metrics: Optional[IsotropyReport] = None
    footprint: Optional[FootprintMap] = None
    spiral: Optional[SpiralPoints] = None


@dataclass
class Comparison:
    dims: GridDims
    results: Dict[str, StrategyResult]
    footprint_config: Optional[FootprintConfig] = None
    timings_ms: Dict[str, float] = field(default_factory=dict)


def _elapsed_ms(start: float) -> float:
    return 1e3 * (time.perf_counter() - start)


def run_comparison(dims: GridDims, strategies=None, footprint_config: Optional[FootprintConfig] = None,
                   with_metrics: bool = True, engine: str = "bowyer-watson") -> Comparison:
    """
    Generate the order of every strategy and measure it.

    Args:
        dims (GridDims): Grid dimensions.
        strategies: A StrategySet or anything it accepts; None is "raster rect fermat".
        footprint_config (FootprintConfig): Footprint protocol; None skips the footprints.
        with_metrics (bool): Compute the isotropy reports.
        engine (str): Triangulation engine of the Delaunay metric.
    """
    if not isinstance(strategies, StrategySet):
        strategies = StrategySet(strategies)
    timings = {}

    cell_metrics = None
    if with_metrics:
        start = time.perf_counter()
        cell_metrics = spacing_metrics(PointSet.from_cells(dims), engine=engine)
        timings["cell_metrics"] = _elapsed_ms(start)

    results = {}
    for label, strategy in strategies.items():
        start = time.perf_counter()
        order = strategy.scan_order(dims)
        timings[f"{label}.order"] = _elapsed_ms(start)
        result = StrategyResult(label, strategy, order)
        if isinstance(strategy, FermatStrategy):
            result.spiral = strategy.spiral(dims)

        if with_metrics:
            start = time.perf_counter()
            step_stats = path_step_stats(order)
            result.metrics = IsotropyReport(*cell_metrics, *step_stats, point_set="cells")
            if result.spiral is not None:
                spiral_set = PointSet.from_spiral(result.spiral)
                result.spiral_metrics = IsotropyReport(*spacing_metrics(spiral_set, engine=engine), *step_stats,
                                                       point_set=spiral_set.kind)
            timings[f"{label}.metrics"] = _elapsed_ms(start)

        if footprint_config is not None:
            start = time.perf_counter()
            result.footprint = footprint(order, footprint_config)
            timings[f"{label}.footprint"] = _elapsed_ms(start)
        results[label] = result
    return Comparison(dims, results, footprint_config, timings)


def footprint_record(fmap: Optional[FootprintMap]) -> Optional[dict]:
    if fmap is None:
        return None
    record = {
        "mu": fmap.mu,
        "sigma": fmap.sigma,
        "probe": list(fmap.probe),
        "probe_radius": fmap.probe_radius,
        "n_seeds": fmap.n_seeds,
        "is_zero": fmap.is_zero,
    }
    if fmap.config is not None:
        record.update(aggregation=fmap.config.aggregation, target=fmap.config.target, method=fmap.config.method,
                      selective=fmap.config.selective)
    return record


def entry_record(strategy: Optional[Strategy], dims: GridDims, metrics: Optional[IsotropyReport],
                 fmap: Optional[FootprintMap], seed: Optional[int]) -> dict:
    """
    One report entry. Without a strategy the order came from a file and only the seed is echoed.
    """
    config = {} if strategy is None else dict(strategy.config_record(dims))
    config["seed"] = seed
    return {
        "strategy": ORDER_FILE_STRATEGY if strategy is None else strategy.to_string(),
        "description": "Scan order read from a file" if strategy is None else strategy.description(),
        "config": config,
        "metrics": None if metrics is None else metrics.to_dict(),
        "footprint": footprint_record(fmap),
    }


def comparison_report(comparison: Comparison, timings: bool = False) -> dict:
    """
    Report of a comparison; spiral-point metrics of fermat strategies appear under "<label>_spiral".
    """
    seed = None if comparison.footprint_config is None else comparison.footprint_config.seed
    entries = {}
    for label, result in comparison.results.items():
        entries[label] = entry_record(result.strategy, comparison.dims, result.metrics, result.footprint, seed)
        if result.spiral_metrics is not None:
            entries[f"{label}_spiral"] = entry_record(result.strategy, comparison.dims, result.spiral_metrics,
                                                      None, seed)
    return {
        "tool_version": tool_version(),
        "dims": {"height": comparison.dims.height, "width": comparison.dims.width},
        "strategies": entries,
        "timings_ms": dict(comparison.timings_ms) if timings else {},
    }


def single_report(strategy: Optional[Strategy], dims: GridDims, metrics: Optional[IsotropyReport],
                  fmap: Optional[FootprintMap] = None, seed: Optional[int] = None,
                  timings_ms: Optional[Dict[str, float]] = None) -> dict:
    return {
        "tool_version": tool_version(),
        "dims": {"height": dims.height, "width": dims.width},
        **entry_record(strategy, dims, metrics, fmap, seed),
        "timings_ms": {} if timings_ms is None else dict(timings_ms),
    }
