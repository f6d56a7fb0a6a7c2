"""
Operator footprints: how strongly one output position of a block depends on each input cell.

For a probe cell o the sensitivity of cell q is an aggregate over channels of the
Jacobian dF_out[:, o] / dx[:, q], computed either by central finite differences
("fd") or, for non-selective SSMs, analytically ("analytic"). Maps are averaged
over random parameter and input draws and normalised to a maximum of 1.

The finite-difference engine perturbs one input at a time. A perturbation at
serial position s only changes the SSM step at s; later steps depend on the state
linearly through inputs that are unchanged, so the state difference is carried
to the probe position by the product of the following decays. This gives the
difference quotient of the full forward pass for every (position, channel) pair
from a single base scan per direction, shared by every probe cell.

The "ring" probe set holds every cell whose rounded distance from the center cell
equals a fixed fraction of the shorter grid side. Its map is the mean of the
per-cell maps, so an order that visits the ring within a short stretch of its
sequence concentrates the footprint.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
import xarray
from scipy.special import expit

from . import definitions, rules, threads
from .errors import DimensionMismatch, FootprintError
from .grid import FeatureMap, GridDims, ScanOrder, SerialSequence, apply_scan
from .ssm import BlockParams, SsmParams, linear_scan, ssm_jacobian

logger = logging.getLogger(__name__)

Probe = Union[str, Tuple[int, int]]


@dataclass(frozen=True)
class FootprintConfig:
    n_seeds: int = rules.DEFAULT_FOOTPRINT_SEEDS
    probe: Probe = rules.DEFAULT_PROBE
    aggregation: str = rules.DEFAULT_AGGREGATION
    target: str = rules.DEFAULT_TARGET
    method: str = rules.DEFAULT_METHOD
    selective: bool = True
    channels: int = rules.DEFAULT_CHANNELS
    state_dim: int = rules.DEFAULT_STATE_DIM
    fd_step: float = rules.DEFAULT_FD_STEP
    seed: int = 0

    def __post_init__(self):
        self.check_validity()

    def check_validity(self) -> bool:
        for name in ("n_seeds", "channels", "state_dim"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise FootprintError(f"{name} must be a positive integer, got {value!r}")
        if self.aggregation not in definitions.footprint_aggregations:
            raise FootprintError(f"Invalid aggregation {self.aggregation!r}, "
                                 f"expected one of {definitions.footprint_aggregations}")
        if self.target not in definitions.footprint_targets:
            raise FootprintError(f"Invalid target {self.target!r}, expected one of {definitions.footprint_targets}")
        if self.method not in definitions.footprint_methods:
            raise FootprintError(f"Invalid method {self.method!r}, expected one of {definitions.footprint_methods}")
        if self.method == "analytic" and self.selective:
            raise FootprintError("The analytic method requires a non-selective SSM")
        if not (math.isfinite(self.fd_step) and self.fd_step > 0):
            raise FootprintError(f"fd_step must be a positive finite number, got {self.fd_step!r}")
        return True


def parse_probe(probe: Probe, dims: GridDims) -> Tuple[int, int]:
    """
    Resolve "center", "corner", "row,col" or a (row, col) pair to a cell of the grid.
    "ring" resolves to the center cell its probe set is drawn around.
    """
    if isinstance(probe, str):
        if probe in ("center", "ring"):
            return (dims.height - 1) // 2, (dims.width - 1) // 2
        if probe == "corner":
            return 0, 0
        parts = probe.split(",")
        if len(parts) != 2:
            raise FootprintError(f"Invalid probe {probe!r}, expected one of {definitions.probe_keywords} or 'row,col'")
        try:
            probe = (int(parts[0]), int(parts[1]))
        except ValueError:
            raise FootprintError(f"Invalid probe {probe!r}") from None
    try:
        row, col = probe
    except (TypeError, ValueError):
        raise FootprintError(f"Invalid probe {probe!r}") from None
    if not (0 <= row < dims.height and 0 <= col < dims.width):
        raise FootprintError(f"Probe ({row}, {col}) is outside the {dims} grid")
    return int(row), int(col)


def probe_radius(probe: Probe, dims: GridDims) -> int:
    """
    Radius of the "ring" probe set, 0 for a single probe cell.
    """
    if isinstance(probe, str) and probe == "ring":
        return max(1, int(round(rules.PROBE_RING_FRACTION * min(dims.height, dims.width))))
    return 0


def probe_cells(probe: Probe, dims: GridDims) -> List[Tuple[int, int]]:
    """
    Output cells whose maps are averaged into the footprint, in row-major order.
    """
    row, col = parse_probe(probe, dims)
    radius = probe_radius(probe, dims)
    if radius == 0:
        return [(row, col)]
    rows, cols = np.indices((dims.height, dims.width))
    on_ring = np.rint(np.hypot(rows - row, cols - col)) == radius
    cells = [(int(r), int(c)) for r, c in zip(rows[on_ring], cols[on_ring])]
    if not cells:
        logger.warning("No cell of the %s grid lies at distance %d from %s, probing the center", dims, radius,
                       (row, col))
        return [(row, col)]
    return cells


@dataclass(frozen=True, eq=False)
class FootprintMap:
    dims: GridDims
    values: np.ndarray
    mu: float
    sigma: float
    probe: Tuple[int, int]
    n_seeds: int
    is_zero: bool = False
    config: Optional[FootprintConfig] = field(default=None)
    probe_radius: int = 0

    @classmethod
    def from_sensitivity(cls, dims: GridDims, sensitivity: np.ndarray, probe: Tuple[int, int], n_seeds: int,
                         config: Optional[FootprintConfig] = None, probe_radius: int = 0) -> "FootprintMap":
        """
        Normalise a raw sensitivity map to a maximum of 1. An all-zero map is flagged and kept as is.
        """
        values = np.array(sensitivity, dtype=np.float64)
        peak = float(values.max())
        is_zero = peak == 0.0
        if is_zero:
            logger.warning("Footprint at probe %s is identically zero, not normalised", probe)
        else:
            values = values / peak
        values.flags.writeable = False
        return cls(dims, values, float(values.mean()), float(values.std()), probe, n_seeds, is_zero, config,
                   probe_radius)

    def to_dataarray(self, name: str = "footprint") -> xarray.DataArray:
        attrs = {
            "mu": self.mu,
            "sigma": self.sigma,
            "probe_row": self.probe[0],
            "probe_col": self.probe[1],
            "probe_radius": self.probe_radius,
            "n_seeds": self.n_seeds,
            "is_zero": int(self.is_zero),
        }
        if self.config is not None:
            attrs.update(aggregation=self.config.aggregation, target=self.config.target,
                         method=self.config.method, selective=int(self.config.selective))
        return xarray.DataArray(np.array(self.values), dims=("row", "col"), name=name, attrs=attrs)


def _gate_jacobian(feature_map: FeatureMap, bp: BlockParams, probe: Tuple[int, int], method: str,
                   step: float) -> np.ndarray:
    """
    d sigmoid(conv3x3(F_in))[:, probe] / dx for every cell, (N, C_out, C_in).
    """
    dims = feature_map.dims
    row, col = probe
    kernel = bp.gate_kernel
    jacobian = np.zeros((dims.n_cells, bp.channels, bp.channels))
    neighbours = [(dy, dx) for dy in range(3) for dx in range(3)
                  if 0 <= row + dy - 1 < dims.height and 0 <= col + dx - 1 < dims.width]
    pre_activation = bp.gate_bias.copy()
    for dy, dx in neighbours:
        pre_activation += feature_map.data[:, row + dy - 1, col + dx - 1] @ kernel[dy, dx]
    for dy, dx in neighbours:
        cell = dims.linear_index(row + dy - 1, col + dx - 1)
        for channel in range(bp.channels):
            weights = kernel[dy, dx, channel]
            if method == "analytic":
                gate = expit(pre_activation)
                jacobian[cell, :, channel] = gate * (1.0 - gate) * weights
            else:
                jacobian[cell, :, channel] = (expit(pre_activation + step * weights)
                                              - expit(pre_activation - step * weights)) / (2.0 * step)
    return jacobian


def _propagation(decay: np.ndarray, t_probe: int) -> np.ndarray:
    """
    prod_{u=s+1..t_probe} decay_u for s = 0 .. t_probe.
    """
    carried = np.ones((t_probe + 1, decay.shape[1]))
    if t_probe > 0:
        carried[:t_probe] = np.cumprod(decay[t_probe:0:-1], axis=0)[::-1]
    return carried


class _ScanLinearisation:
    """
    Quantities of one scan direction shared by every probe position.

    For "fd" these are the decays and, per input channel, the central difference of
    the state update at every position. For "analytic" the sequence is kept for
    ssm_jacobian.
    """

    def __init__(self, p: SsmParams, x: np.ndarray, method: str, step: float):
        self.p = p
        self.x = x
        self.method = method
        self.step = step
        if method == "analytic":
            return
        decay, inputs = p.discretize(x)
        states = linear_scan(decay, inputs)
        previous = np.vstack((np.zeros((1, p.state_dim)), states[:-1]))
        self.decay = decay
        self.differences = np.empty((p.channels,) + decay.shape)
        for channel in range(p.channels):
            bump = np.zeros(p.channels)
            bump[channel] = step
            decay_plus, inputs_plus = p.discretize(x + bump)
            decay_minus, inputs_minus = p.discretize(x - bump)
            self.differences[channel] = (decay_plus - decay_minus) * previous + (inputs_plus - inputs_minus)

    def jacobian(self, t_probe: int) -> np.ndarray:
        """
        dy_{t_probe} / dx_s for s = 0 .. t_probe, (t_probe + 1, C_out, C_in).
        """
        p = self.p
        if self.method == "analytic":
            return ssm_jacobian(SerialSequence(self.x), p, t_probe)[:t_probe + 1]
        carried = _propagation(self.decay[:t_probe + 1], t_probe)
        jacobian = np.empty((t_probe + 1, p.channels, p.channels))
        for channel in range(p.channels):
            jacobian[:, :, channel] = (carried * self.differences[channel, :t_probe + 1]) @ p.c_proj.T \
                / (2.0 * self.step)
        return jacobian


class BlockLinearisation:
    """
    Linearisation of one block at one input, evaluated at any number of probe cells.

    Args:
        feature_map (FeatureMap): Input at which the Jacobians are taken.
        order (ScanOrder): Serialisation of the block.
        bp (BlockParams): Block parameters.
        method (str): "fd" or "analytic".
        fd_step (float): Central difference step.
    """

    def __init__(self, feature_map: FeatureMap, order: ScanOrder, bp: BlockParams,
                 method: str = rules.DEFAULT_METHOD, fd_step: float = rules.DEFAULT_FD_STEP):
        if feature_map.dims != order.dims:
            raise DimensionMismatch(f"Feature map is {feature_map.dims} but the scan order is {order.dims}")
        if feature_map.channels != bp.channels:
            raise DimensionMismatch(f"Feature map has {feature_map.channels} channels "
                                    f"but the block expects {bp.channels}")
        if method == "analytic" and bp.selective:
            raise FootprintError("The analytic method requires a non-selective SSM")
        self.feature_map = feature_map
        self.order = order
        self.bp = bp
        self.method = method
        self.fd_step = fd_step
        x = apply_scan(feature_map, order).data
        self._positions = order.positions()
        self._forward = _ScanLinearisation(bp.ssm_fwd, x, method, fd_step)
        self._backward = _ScanLinearisation(bp.ssm_bwd, x[::-1], method, fd_step)

    def mixer(self, probe: Tuple[int, int]) -> np.ndarray:
        """
        dF_m[:, probe] / dx for every cell, (N, C_out, C_in).
        """
        dims = self.order.dims
        n_cells = dims.n_cells
        bp = self.bp
        t_probe = int(self._positions[dims.linear_index(*probe)])

        jacobian_fwd = np.zeros((n_cells, bp.channels, bp.channels))
        jacobian_fwd[self.order.order[:t_probe + 1]] = self._forward.jacobian(t_probe)
        jacobian_bwd = np.zeros((n_cells, bp.channels, bp.channels))
        # Flipped position s' is serial position n_cells - 1 - s'.
        jacobian_bwd[self.order.order[::-1][:n_cells - t_probe]] = self._backward.jacobian(n_cells - 1 - t_probe)

        channels = bp.channels
        w_a, w_b = bp.fuse_weights[:, :channels], bp.fuse_weights[:, channels:]
        return np.einsum("oc,nci->noi", w_a, jacobian_fwd) + np.einsum("oc,nci->noi", w_b, jacobian_bwd)

    def block(self, probe: Tuple[int, int], target: str = rules.DEFAULT_TARGET) -> np.ndarray:
        """
        Jacobian of the block output (target "block") or of F_m (target "mixer") at the probe.
        """
        jacobian = self.mixer(probe)
        if target == "block":
            jacobian += _gate_jacobian(self.feature_map, self.bp, probe, self.method, self.fd_step)
            jacobian[self.order.dims.linear_index(*probe)] += np.eye(self.bp.channels)
        return jacobian


def mixer_jacobian(feature_map: FeatureMap, order: ScanOrder, bp: BlockParams, probe: Tuple[int, int],
                   method: str = rules.DEFAULT_METHOD, fd_step: float = rules.DEFAULT_FD_STEP) -> np.ndarray:
    """
    dF_m[:, probe] / dx for every cell, (N, C_out, C_in).
    """
    return BlockLinearisation(feature_map, order, bp, method, fd_step).mixer(probe)


def block_jacobian(feature_map: FeatureMap, order: ScanOrder, bp: BlockParams, probe: Tuple[int, int],
                   target: str = rules.DEFAULT_TARGET, method: str = rules.DEFAULT_METHOD,
                   fd_step: float = rules.DEFAULT_FD_STEP) -> np.ndarray:
    """
    Jacobian of the block output at the probe cell with respect to every input cell.

    Args:
        feature_map (FeatureMap): Input at which the Jacobian is taken.
        order (ScanOrder): Serialisation of the block.
        bp (BlockParams): Block parameters.
        probe (tuple): (row, col) of the output cell.
        target (str): "block" for F_out, "mixer" for F_m only.
        method (str): "fd" or "analytic".
        fd_step (float): Central difference step.

    Returns:
        np.ndarray: (N, C_out, C_in), indexed by linear cell index.
    """
    return BlockLinearisation(feature_map, order, bp, method, fd_step).block(probe, target)


def aggregate(jacobian: np.ndarray, aggregation: str = rules.DEFAULT_AGGREGATION) -> np.ndarray:
    if aggregation == "l2":
        return np.sqrt(np.sum(jacobian * jacobian, axis=(1, 2)))
    return np.sum(np.abs(jacobian), axis=(1, 2))


def seed_sensitivity(order: ScanOrder, cfg: FootprintConfig, seed_index: int,
                     block_params: Optional[BlockParams] = None) -> np.ndarray:
    """
    Raw (H, W) sensitivity for one draw of parameters and input, averaged over the probe cells.
    """
    dims = order.dims
    seed = cfg.seed + seed_index
    bp = block_params if block_params is not None else BlockParams.random(cfg.channels, cfg.state_dim, seed,
                                                                         cfg.selective)
    rng = np.random.default_rng([seed, 1])
    feature_map = FeatureMap.random(dims, bp.channels, rng)
    linearisation = BlockLinearisation(feature_map, order, bp, cfg.method, cfg.fd_step)
    cells = probe_cells(cfg.probe, dims)
    sensitivity = np.zeros(dims.n_cells)
    for cell in cells:
        sensitivity += aggregate(linearisation.block(cell, cfg.target), cfg.aggregation)
    return (sensitivity / len(cells)).reshape(dims.height, dims.width)


def footprint(order: ScanOrder, cfg: Optional[FootprintConfig] = None,
              block_params: Optional[BlockParams] = None) -> FootprintMap:
    """
    Seed-averaged, max-normalised sensitivity map of a block serialised along `order`.

    Without block_params, each seed draws its own parameters; with block_params, the
    given block is used for every seed and only the input varies.
    """
    cfg = FootprintConfig() if cfg is None else cfg
    dims = order.dims
    probe = parse_probe(cfg.probe, dims)
    radius = probe_radius(cfg.probe, dims)
    if block_params is not None and block_params.channels != cfg.channels:
        raise DimensionMismatch(f"Block has {block_params.channels} channels but the footprint expects {cfg.channels}")

    start = time.perf_counter()
    workers = min(cfg.n_seeds, threads.effective_thread_count())
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            maps = list(executor.map(lambda index: seed_sensitivity(order, cfg, index, block_params),
                                     range(cfg.n_seeds)))
    else:
        maps = [seed_sensitivity(order, cfg, index, block_params) for index in range(cfg.n_seeds)]

    total = np.zeros((dims.height, dims.width))
    for sensitivity in maps:
        total = total + sensitivity
    result = FootprintMap.from_sensitivity(dims, total / cfg.n_seeds, probe, cfg.n_seeds, cfg, radius)
    logger.info("Footprint on %s at probe %s (radius %d) over %d seeds in %.1f ms: mu=%.4f sigma=%.4f",
                dims, probe, radius, cfg.n_seeds, 1e3 * (time.perf_counter() - start), result.mu, result.sigma)
    return result
