"""
Application Programming Interface

Access point to have access to all utilities defined in spiralscan
"""

# pylint: disable= unused-import
from .definitions import strategies, fermat_parameters, match_modes, footprint_aggregations, footprint_targets, \
    footprint_methods, order_formats
from .grid import GridDims, ScanOrder, FeatureMap, SerialSequence, apply_scan, invert_scan, flip_sequence
from .fermat import SpiralParams, SpiralPoint, SpiralPoints, gen_spiral_points, default_alpha
from .matching import MatchConfig, match_grid, match_score
from .baselines import raster_scan, rect_spiral_scan
from .strategies import Strategy, RasterStrategy, RectSpiralStrategy, FermatStrategy, ScanStrategy, \
    get_scan_strategy, is_valid_scan_specification
from .strategy_set import StrategySet, is_a_valid_strategy_set
from .delaunay import delaunay_edges
from .isotropy import PointSet, IsotropyReport, nn_spacing_variance, delaunay_edge_variance, interior_points, \
    path_step_stats, isotropy_report, compare_strategies
from .ssm import SsmParams, BlockParams, ssm_forward, ssm_jacobian, mixer_forward, bfs_block_forward
from .footprint import FootprintConfig, FootprintMap, footprint, block_jacobian
from .comparison import run_comparison, comparison_report
from .fileformats import read_order, write_order, read_report, write_report, read_pgm, write_pgm
from .export import results_to_dataset, write_netcdf
