"""
This module provides the strategies, the tunable parameters and their valid ranges.
"""
import math

# Implemented scan strategies.
strategies = ["raster", "rect", "fermat"]

# Parameters of the fermat strategy, with their type and range.
# Ranges are closed unless "open" names the open ends.
fermat_parameters = {
    "lambda_c": {"range": [0.0, 1.0], "type": float, "open": ()},
    "eta_f": {"range": [0.0, float("inf")], "type": float, "open": ("low", "high")},
    "eta_c": {"range": [0.0, float("inf")], "type": float, "open": ("low", "high")},
    "alpha": {"range": [0.0, float("inf")], "type": float, "open": ("low", "high")},
    "phi_g_deg": {"range": [0.0, 360.0], "type": float, "open": ("low", "high")},
    "candidate_count": {"range": [1, math.inf], "type": int, "open": ("high",)},
    "mode": {"choices": ["exhaustive", "accelerated"], "type": str},
}

# Matching modes
match_modes = ["exhaustive", "accelerated"]

# Probe keywords accepted besides an explicit "row,col"
probe_keywords = ["center", "corner", "ring"]

# Footprint options
footprint_aggregations = ["sum_abs", "l2"]
footprint_targets = ["block", "mixer"]
footprint_methods = ["fd", "analytic"]

# Scan order file formats
order_formats = ["bin", "csv"]


def in_range(name: str, value) -> bool:
    """
    Check a fermat parameter value against its declared range or choices.
    """
    entry = fermat_parameters[name]
    if "choices" in entry:
        return value in entry["choices"]
    low, high = entry["range"]
    if isinstance(value, float) and not math.isfinite(value):
        return False
    low_ok = value > low if "low" in entry["open"] else value >= low
    high_ok = value < high if "high" in entry["open"] else value <= high
    return low_ok and high_ok
