"""
Golden-angle Fermat spiral samples.

Sample k sits at radius r_k = alpha * sqrt(k) and angle theta_k = k * phi_g around
the spiral center. Angles are stored unwrapped.
"""
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Tuple

import numpy as np

from .errors import InvalidMatchConfig
from .grid import GridDims
from .rules import GOLDEN_ANGLE


class SpiralPoint(NamedTuple):
    k: int
    r: float
    theta: float
    x: float
    y: float


def default_alpha(dims: GridDims) -> float:
    """
    Scale placing the outermost sample on half the grid diagonal.

    Args:
        dims (GridDims): Grid dimensions.

    Returns:
        float: alpha = (sqrt(H^2 + W^2) / 2) / sqrt(N - 1), or 1 for a single cell.
    """
    n_cells = dims.n_cells
    if n_cells == 1:
        return 1.0
    return (dims.diagonal / 2.0) / math.sqrt(n_cells - 1)


def default_center(dims: GridDims) -> Tuple[float, float]:
    """
    Geometric center of the cell centers as (x, y); half-integral for even dimensions.
    """
    return (dims.width - 1) / 2.0, (dims.height - 1) / 2.0


@dataclass(frozen=True)
class SpiralParams:
    alpha: float
    n_points: int
    center: Tuple[float, float] = (0.0, 0.0)
    phi_g: float = GOLDEN_ANGLE

    def __post_init__(self):
        self.check_validity()

    def check_validity(self) -> bool:
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidMatchConfig(f"Spiral alpha must be a positive finite number, got {self.alpha!r}")
        if not (math.isfinite(self.phi_g) and 0 < self.phi_g < 2 * math.pi):
            raise InvalidMatchConfig(f"Spiral angle step must be within (0, 2*pi), got {self.phi_g!r}")
        if isinstance(self.n_points, bool) or not isinstance(self.n_points, (int, np.integer)) or self.n_points < 1:
            raise InvalidMatchConfig(f"Number of spiral points must be a positive integer, got {self.n_points!r}")
        if len(self.center) != 2 or not all(math.isfinite(c) for c in self.center):
            raise InvalidMatchConfig(f"Spiral center must be two finite coordinates, got {self.center!r}")
        return True

    @classmethod
    def for_grid(cls, dims: GridDims, alpha: Optional[float] = None, phi_g: Optional[float] = None) -> "SpiralParams":
        return cls(alpha=default_alpha(dims) if alpha is None else float(alpha),
                   n_points=dims.n_cells,
                   center=default_center(dims),
                   phi_g=GOLDEN_ANGLE if phi_g is None else float(phi_g))


class SpiralPoints:
    """
    Column storage of a whole spiral; indexing returns SpiralPoint tuples.
    """

    def __init__(self, params: SpiralParams, k: np.ndarray, r: np.ndarray, theta: np.ndarray,
                 x: np.ndarray, y: np.ndarray):
        self.params = params
        self.k = k
        self.r = r
        self.theta = theta
        self.x = x
        self.y = y
        for array in (k, r, theta, x, y):
            array.flags.writeable = False

    def __len__(self):
        return len(self.k)

    def __getitem__(self, index: int) -> SpiralPoint:
        return SpiralPoint(int(self.k[index]), float(self.r[index]), float(self.theta[index]),
                           float(self.x[index]), float(self.y[index]))

    def __iter__(self) -> Iterator[SpiralPoint]:
        for index in range(len(self)):
            yield self[index]

    def __repr__(self):
        return f"{self.__class__.__name__}(n_points={len(self)}, alpha={self.params.alpha})"


def gen_spiral_points(params: SpiralParams) -> SpiralPoints:
    """
    Generate the N samples of the golden-angle Fermat spiral.
    """
    k = np.arange(params.n_points, dtype=np.int64)
    kf = k.astype(np.float64)
    r = params.alpha * np.sqrt(kf)
    theta = kf * params.phi_g
    cx, cy = params.center
    x = cx + r * np.cos(theta)
    y = cy + r * np.sin(theta)
    return SpiralPoints(params, k, r, theta, x, y)
