"""
Different rules to format the scan specification string, file format constants and some default values.
"""
import math

# Separator between two entries of a strategy set
STRATEGY_SEPARATOR = " "

# Separator between the label and the scan specification
STRATEGY_LABEL_SEPARATOR = ":"

# Separator between the strategy name and its parameters
SCAN_SPECIFICATION_SEPARATOR = ","

# Separator between a parameter name and its value
PARAMETER_VALUE_SEPARATOR = "="

# Default strategy set
DEFAULT_STRATEGY_SET = "raster rect fermat"

# Matching defaults
DEFAULT_LAMBDA_C = 0.7
DEFAULT_CANDIDATE_COUNT = 32
DEFAULT_MATCH_MODE = "accelerated"

# Rings of cells searched around a step before the accelerated matcher falls back
# to ranking every bucket, and the relative slack applied to its lower bounds
MATCH_RING_LIMIT = 5
MATCH_BOUND_SLACK = 1e-9

# Golden angle in radians, 2*pi*(1 - 1/phi) == pi*(3 - sqrt(5))
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))

# Footprint defaults
DEFAULT_CHANNELS = 4
DEFAULT_STATE_DIM = 8
DEFAULT_FOOTPRINT_SEEDS = 5
DEFAULT_FD_STEP = 1e-4
DEFAULT_PROBE = "center"
# The "ring" probe set holds every cell whose rounded distance from the center cell
# equals this fraction of the shorter grid side
PROBE_RING_FRACTION = 0.25
DEFAULT_AGGREGATION = "sum_abs"
DEFAULT_TARGET = "block"
DEFAULT_METHOD = "fd"

# Interior Delaunay statistics keep the edges whose endpoints lie within this
# fraction of the half extent around the bounding box center
DELAUNAY_INTERIOR_FRACTION = 0.9

# Decay rates of the random SSMs are drawn log-uniformly from this interval
DECAY_RATE_RANGE = (1e-2, 1e-1)

# Floor of the selective step size, so every decay exp(delta * a) stays strictly below 1
MIN_STEP_SIZE = 1e-4

# Scan order binary file
SCAN_ORDER_MAGIC = b"FSSC"
SCAN_ORDER_VERSION = 1
SCAN_ORDER_CSV_HEADER = "k,row,col"

# Significant digits of floats written to JSON reports
REPORT_FLOAT_DIGITS = 17

# Lossless defaults for the netCDF export
EXPORT_BACKEND = "lz4"
EXPORT_COMPRESSION_LEVEL = 5

# Environment variable capping internal parallelism
THREADS_ENVIRONMENT_VARIABLE = "SPIRALSCAN_THREADS"
