"""
Command line interface.

    spiralscan generate --strategy fermat --height 256 --width 256 --out order.fssc
    spiralscan metrics order.fssc --out report.json
    spiralscan compare --height 64 --width 64 --seeds 5 --out report.json --heatmaps maps/
    spiralscan footprint --strategy raster --height 64 --width 64 --out report.json --heatmap raster.pgm

Invalid flags exit with status 2, failures while running with status 1.
"""
import argparse
import logging
import math
import sys
import time
from pathlib import Path
from typing import List, Optional

from . import definitions, rules, threads
from .comparison import run_comparison, comparison_report, single_report
from .delaunay import ENGINES
from .errors import SpiralScanError
from .export import results_to_dataset, write_netcdf
from .fileformats import read_order, write_order, write_report, write_pgm
from .footprint import FootprintConfig, footprint
from .grid import GridDims
from .isotropy import PointSet, isotropy_report
from .strategies import FermatStrategy, get_scan_strategy
from .strategy_set import StrategySet

logger = logging.getLogger(__name__)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def _fermat_parameter(name: str):
    """
    Argument type checking a fermat parameter against its range in definitions.
    """
    def parse(text: str):
        value = _finite_float(text)
        if not definitions.in_range(name, value):
            entry = definitions.fermat_parameters[name]
            low, high = entry["range"]
            left = "(" if "low" in entry["open"] else "["
            right = ")" if "high" in entry["open"] else "]"
            raise argparse.ArgumentTypeError(f"{name} must be within {left}{low}, {high}{right}, got {value}")
        return value
    parse.__name__ = name
    return parse


def _positive_float(text: str) -> float:
    value = _finite_float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return value


def _lambda_c(text: str) -> float:
    value = _finite_float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"lambda_c must be within [0, 1], got {value}")
    return value


def _dims(args) -> GridDims:
    return GridDims(args.height, args.width)


def _add_grid_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--height", type=_positive_int, required=True, help="Grid height")
    parser.add_argument("--width", type=_positive_int, required=True, help="Grid width")


def _add_fermat_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("fermat strategy")
    group.add_argument("--lambda-c", type=_lambda_c, default=rules.DEFAULT_LAMBDA_C,
                       help="Trade-off between spiral proximity (0) and path continuity (1)")
    group.add_argument("--eta-f", type=_fermat_parameter("eta_f"), default=None,
                       help="Normaliser of the spiral distance, default the grid diagonal")
    group.add_argument("--eta-c", type=_fermat_parameter("eta_c"), default=None,
                       help="Normaliser of the continuity distance, default the grid diagonal")
    group.add_argument("--alpha", type=_fermat_parameter("alpha"), default=None,
                       help="Spiral scale, default half the diagonal over sqrt(N - 1)")
    group.add_argument("--phi-g-deg", type=_fermat_parameter("phi_g_deg"), default=None,
                       help="Angular step in degrees, default the golden angle")
    group.add_argument("--candidate-count", type=_positive_int, default=rules.DEFAULT_CANDIDATE_COUNT,
                       help="Initial candidate pool of the accelerated matcher")
    group.add_argument("--mode", choices=definitions.match_modes, default=rules.DEFAULT_MATCH_MODE,
                       help="Matching mode")


def _add_footprint_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("footprint")
    group.add_argument("--seeds", type=_positive_int, default=rules.DEFAULT_FOOTPRINT_SEEDS,
                       help="Number of random parameter and input draws")
    group.add_argument("--seed", type=_non_negative_int, default=0, help="First seed")
    group.add_argument("--probe", default=rules.DEFAULT_PROBE, help="center, corner, ring or row,col")
    group.add_argument("--aggregation", choices=definitions.footprint_aggregations,
                       default=rules.DEFAULT_AGGREGATION)
    group.add_argument("--target", choices=definitions.footprint_targets, default=rules.DEFAULT_TARGET)
    group.add_argument("--method", choices=definitions.footprint_methods, default=rules.DEFAULT_METHOD)
    group.add_argument("--non-selective", action="store_true", help="Use input-independent step sizes")
    group.add_argument("--channels", type=_positive_int, default=rules.DEFAULT_CHANNELS)
    group.add_argument("--state-dim", type=_positive_int, default=rules.DEFAULT_STATE_DIM)
    group.add_argument("--fd-step", type=_positive_float, default=rules.DEFAULT_FD_STEP,
                       help="Central difference step")


def _fermat_strategy(args) -> FermatStrategy:
    return FermatStrategy(lambda_c=args.lambda_c, eta_f=args.eta_f, eta_c=args.eta_c, alpha=args.alpha,
                          phi_g_deg=args.phi_g_deg, candidate_count=args.candidate_count, mode=args.mode)


def _strategy(args):
    if args.strategy == "fermat":
        return _fermat_strategy(args)
    return get_scan_strategy(strategy=args.strategy)


def _footprint_config(args) -> FootprintConfig:
    return FootprintConfig(n_seeds=args.seeds, probe=args.probe, aggregation=args.aggregation, target=args.target,
                           method=args.method, selective=not args.non_selective, channels=args.channels,
                           state_dim=args.state_dim, fd_step=args.fd_step, seed=args.seed)


def cmd_generate(args) -> int:
    dims = _dims(args)
    strategy = _strategy(args)
    start = time.perf_counter()
    order = strategy.scan_order(dims)
    elapsed = 1e3 * (time.perf_counter() - start)
    write_order(order, args.out, args.format)
    print(f"strategy={strategy.to_string()} n_cells={dims.n_cells} seed={args.seed} elapsed_ms={elapsed:.1f} "
          f"out={args.out}")
    return 0


def cmd_metrics(args) -> int:
    start = time.perf_counter()
    order = read_order(args.order, args.format)
    report = isotropy_report(order, PointSet.from_cells(order.dims), engine=args.engine)
    timings = {"metrics": 1e3 * (time.perf_counter() - start)} if args.timings else None
    write_report(single_report(None, order.dims, report, timings_ms=timings), args.out)
    print(f"n_cells={len(order)} step_mean={report.step_mean:.6g} nn_variance={report.nn_variance:.6g} "
          f"out={args.out}")
    return 0


def _default_strategy_set(args) -> StrategySet:
    return StrategySet({"raster": "raster", "rect": "rect", "fermat": _fermat_strategy(args).to_string()})


def cmd_compare(args) -> int:
    dims = _dims(args)
    strategies = StrategySet(args.strategies) if args.strategies is not None else _default_strategy_set(args)
    comparison = run_comparison(dims, strategies, _footprint_config(args), engine=args.engine)
    write_report(comparison_report(comparison, timings=args.timings), args.out)

    if args.heatmaps is not None:
        directory = Path(args.heatmaps)
        directory.mkdir(parents=True, exist_ok=True)
        for label, result in comparison.results.items():
            write_pgm(result.footprint.values, directory / f"{label}.pgm")
    if args.netcdf is not None:
        write_netcdf(results_to_dataset(comparison), args.netcdf)

    print(f"{'strategy':<16} {'nn_variance':>14} {'delaunay_inner':>14} {'footprint_mu':>14} {'footprint_sigma':>16}")
    for label, result in comparison.results.items():
        print(f"{label:<16} {result.metrics.nn_variance:>14.6g} {_optional(result.metrics.delaunay_interior_variance)} "
              f"{result.footprint.mu:>14.6f} {result.footprint.sigma:>16.6f}")
        if result.spiral_metrics is not None:
            spiral = result.spiral_metrics
            print(f"{label + '_spiral':<16} {spiral.nn_variance:>14.6g} {_optional(spiral.delaunay_interior_variance)} "
                  f"{'-':>14} {'-':>16}")
    return 0


def _optional(value: Optional[float]) -> str:
    return f"{'-':>14}" if value is None else f"{value:>14.6g}"


def cmd_footprint(args) -> int:
    if args.order is not None:
        order = read_order(args.order, args.format)
        strategy = None
    else:
        if args.strategy is None or args.height is None or args.width is None:
            raise SpiralScanError("footprint needs either --order or --strategy with --height and --width")
        strategy = _strategy(args)
        order = strategy.scan_order(GridDims(args.height, args.width))
    cfg = _footprint_config(args)
    start = time.perf_counter()
    fmap = footprint(order, cfg)
    timings = {"footprint": 1e3 * (time.perf_counter() - start)} if args.timings else None
    write_report(single_report(strategy, order.dims, None, fmap, cfg.seed, timings), args.out)
    if args.heatmap is not None:
        write_pgm(fmap.values, args.heatmap)
    print(f"mu={fmap.mu:.6f} sigma={fmap.sigma:.6f} probe={fmap.probe[0]},{fmap.probe[1]} out={args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spiralscan",
                                     description="Scan orders for 2D grids and their isotropy and footprints")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    parser.add_argument("--threads", type=_non_negative_int, default=None,
                        help=f"Cap on internal parallelism, 0 for auto (default from {rules.THREADS_ENVIRONMENT_VARIABLE})")
    subparsers = parser.add_subparsers(dest="command", required=True)

    generate = subparsers.add_parser("generate", help="Write the scan order of one strategy")
    generate.add_argument("--strategy", choices=definitions.strategies, required=True)
    _add_grid_arguments(generate)
    _add_fermat_arguments(generate)
    generate.add_argument("--seed", type=_non_negative_int, default=0,
                          help="Recorded in the summary; orders do not depend on it")
    generate.add_argument("--out", required=True, help="Output file")
    generate.add_argument("--format", choices=definitions.order_formats, default=None,
                          help="bin or csv, default from the file extension")
    generate.set_defaults(handler=cmd_generate)

    metrics = subparsers.add_parser("metrics", help="Isotropy report of a stored scan order")
    metrics.add_argument("order", help="Scan order file")
    metrics.add_argument("--format", choices=definitions.order_formats, default=None)
    metrics.add_argument("--out", required=True, help="Output JSON report")
    metrics.add_argument("--engine", choices=ENGINES, default="bowyer-watson")
    metrics.add_argument("--timings", action="store_true", help="Include timings in the report")
    metrics.set_defaults(handler=cmd_metrics)

    compare = subparsers.add_parser("compare", help="Compare strategies: isotropy, footprints, heatmaps")
    _add_grid_arguments(compare)
    _add_fermat_arguments(compare)
    _add_footprint_arguments(compare)
    compare.add_argument("--strategies", "--config", dest="strategies", default=None,
                         help="Strategy set string or YAML file, default 'raster rect fermat'")
    compare.add_argument("--out", required=True, help="Output JSON report")
    compare.add_argument("--heatmaps", default=None, help="Directory receiving one PGM heatmap per strategy")
    compare.add_argument("--netcdf", default=None, help="Also write the results to this netCDF file")
    compare.add_argument("--engine", choices=ENGINES, default="bowyer-watson")
    compare.add_argument("--timings", action="store_true", help="Include timings in the report")
    compare.set_defaults(handler=cmd_compare)

    footprint_parser = subparsers.add_parser("footprint", help="Footprint of one strategy or stored order")
    footprint_parser.add_argument("--strategy", choices=definitions.strategies, default=None)
    footprint_parser.add_argument("--order", default=None, help="Scan order file instead of a strategy")
    footprint_parser.add_argument("--format", choices=definitions.order_formats, default=None)
    footprint_parser.add_argument("--height", type=_positive_int, default=None)
    footprint_parser.add_argument("--width", type=_positive_int, default=None)
    _add_fermat_arguments(footprint_parser)
    _add_footprint_arguments(footprint_parser)
    footprint_parser.add_argument("--out", required=True, help="Output JSON report")
    footprint_parser.add_argument("--heatmap", default=None, help="Output PGM heatmap")
    footprint_parser.add_argument("--timings", action="store_true", help="Include timings in the report")
    footprint_parser.set_defaults(handler=cmd_footprint)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    if args.threads is not None:
        threads.change_thread_count(args.threads)
    try:
        return args.handler(args)
    except (SpiralScanError, OSError) as err:
        print(f"spiralscan: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
