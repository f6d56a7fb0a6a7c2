"""
A minimal bidirectional state-space block over a serialised feature map.

One SSM has a shared state h of size S and runs

    h_t = A_t * h_{t-1} + B_t x_t        (h_{-1} = 0)
    y_t = C h_t

with A_t = exp(delta_t * a_diag), B_t = delta_t * b_proj and
delta_t = max(softplus(delta_proj . x_t), MIN_STEP_SIZE) for a selective SSM, 1
otherwise.

The block serialises a map along a scan order, runs an independent SSM in each
direction, places both outputs back on the grid and combines them:

    F_m   = W_a O_fwd + W_b O_bwd + b_f
    F_out = F_in + sigmoid(conv3x3(F_in) + b_g) + F_m
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from .errors import DimensionMismatch, FootprintError, InvalidGridError
from .grid import FeatureMap, ScanOrder, SerialSequence, apply_scan, invert_scan, flip_sequence
from .rules import DECAY_RATE_RANGE, MIN_STEP_SIZE

logger = logging.getLogger(__name__)


def softplus(z):
    return np.logaddexp(0.0, z)


def _read_only(array) -> np.ndarray:
    array = np.array(array, dtype=np.float64)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class SsmParams:
    channels: int
    state_dim: int
    a_diag: np.ndarray
    b_proj: np.ndarray
    c_proj: np.ndarray
    delta_proj: np.ndarray
    selective: bool = True
    seed: Optional[int] = None

    def __post_init__(self):
        for name in ("a_diag", "b_proj", "c_proj", "delta_proj"):
            object.__setattr__(self, name, _read_only(getattr(self, name)))
        if self.channels < 1 or self.state_dim < 1:
            raise InvalidGridError(f"channels and state_dim must be >= 1, got {self.channels}, {self.state_dim}")
        expected = {
            "a_diag": (self.state_dim,),
            "b_proj": (self.state_dim, self.channels),
            "c_proj": (self.channels, self.state_dim),
            "delta_proj": (self.channels,),
        }
        for name, shape in expected.items():
            value = getattr(self, name)
            if value.shape != shape:
                raise DimensionMismatch(f"{name} must have shape {shape}, got {value.shape}")
            if not np.all(np.isfinite(value)):
                raise InvalidGridError(f"{name} contains non-finite values")
        if not np.all(self.a_diag < 0):
            raise InvalidGridError("Every entry of a_diag must be negative")

    @classmethod
    def random(cls, channels: int, state_dim: int, selective: bool, rng: np.random.Generator,
               seed: Optional[int] = None) -> "SsmParams":
        """
        Decay rates log-uniform in DECAY_RATE_RANGE, Gaussian projections scaled by 1/sqrt(fan_in).
        """
        low, high = np.log(DECAY_RATE_RANGE[0]), np.log(DECAY_RATE_RANGE[1])
        a_diag = -np.exp(rng.uniform(low, high, state_dim))
        b_proj = rng.standard_normal((state_dim, channels)) / np.sqrt(channels)
        c_proj = rng.standard_normal((channels, state_dim)) / np.sqrt(state_dim)
        delta_proj = rng.standard_normal(channels) / np.sqrt(channels)
        return cls(channels, state_dim, a_diag, b_proj, c_proj, delta_proj, selective, seed)

    def step_sizes(self, x: np.ndarray) -> np.ndarray:
        """
        delta_t for every position of an (N, C) input.
        """
        if self.selective:
            return np.maximum(softplus(x @ self.delta_proj), MIN_STEP_SIZE)
        return np.ones(x.shape[0])

    def discretize(self, x: np.ndarray):
        """
        Per-position decay A_t (N, S) and input term B_t x_t (N, S).
        """
        delta = self.step_sizes(x)
        decay = np.exp(delta[:, np.newaxis] * self.a_diag)
        inputs = delta[:, np.newaxis] * (x @ self.b_proj.T)
        return decay, inputs


def linear_scan(decay: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    """
    States of h_t = decay_t * h_{t-1} + inputs_t along the first axis, h_{-1} = 0.
    """
    states = np.empty_like(inputs)
    state = np.zeros_like(inputs[0])
    for t in range(len(inputs)):
        state = decay[t] * state + inputs[t]
        states[t] = state
    return states


def ssm_states(seq: SerialSequence, p: SsmParams) -> np.ndarray:
    if seq.channels != p.channels:
        raise DimensionMismatch(f"Sequence has {seq.channels} channels but the SSM expects {p.channels}")
    decay, inputs = p.discretize(seq.data)
    return linear_scan(decay, inputs)


def ssm_forward(seq: SerialSequence, p: SsmParams) -> SerialSequence:
    return SerialSequence(ssm_states(seq, p) @ p.c_proj.T)


def ssm_jacobian(seq: SerialSequence, p: SsmParams, t: int) -> np.ndarray:
    """
    Analytic dy_t / dx_s of a non-selective SSM for every position s.

    Returns:
        np.ndarray: (N, C_out, C_in); zero for s > t, C diag(A^(t-s)) B for s <= t.
    """
    if p.selective:
        raise FootprintError("The analytic Jacobian is only available for non-selective SSMs")
    if seq.channels != p.channels:
        raise DimensionMismatch(f"Sequence has {seq.channels} channels but the SSM expects {p.channels}")
    n = seq.length
    if not 0 <= t < n:
        raise FootprintError(f"Position {t} is outside a sequence of length {n}")
    jacobian = np.zeros((n, p.channels, p.channels))
    lags = (t - np.arange(t + 1)).astype(np.float64)
    powers = np.exp(lags[:, np.newaxis] * p.a_diag)
    jacobian[:t + 1] = np.einsum("os,ds,si->doi", p.c_proj, powers, p.b_proj)
    return jacobian


@dataclass(frozen=True, eq=False)
class BlockParams:
    ssm_fwd: SsmParams
    ssm_bwd: SsmParams
    fuse_weights: np.ndarray
    fuse_bias: np.ndarray
    gate_kernel: np.ndarray
    gate_bias: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        for name in ("fuse_weights", "fuse_bias", "gate_kernel", "gate_bias"):
            object.__setattr__(self, name, _read_only(getattr(self, name)))
        channels = self.ssm_fwd.channels
        if self.ssm_bwd.channels != channels:
            raise DimensionMismatch("Forward and backward SSMs disagree on channels")
        expected = {
            "fuse_weights": (channels, 2 * channels),
            "fuse_bias": (channels,),
            "gate_kernel": (3, 3, channels, channels),
            "gate_bias": (channels,),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DimensionMismatch(f"{name} must have shape {shape}, got {getattr(self, name).shape}")

    @property
    def channels(self) -> int:
        return self.ssm_fwd.channels

    @property
    def selective(self) -> bool:
        return self.ssm_fwd.selective or self.ssm_bwd.selective

    @classmethod
    def random(cls, channels: int, state_dim: int, seed: int, selective: bool = True) -> "BlockParams":
        rng = np.random.default_rng(seed)
        ssm_fwd = SsmParams.random(channels, state_dim, selective, rng, seed)
        ssm_bwd = SsmParams.random(channels, state_dim, selective, rng, seed)
        fuse_weights = rng.standard_normal((channels, 2 * channels)) / np.sqrt(2 * channels)
        gate_kernel = rng.standard_normal((3, 3, channels, channels)) / np.sqrt(9 * channels)
        return cls(ssm_fwd, ssm_bwd, fuse_weights, np.zeros(channels), gate_kernel, np.zeros(channels), seed)

    @classmethod
    def zeros(cls, channels: int, state_dim: int, selective: bool = False) -> "BlockParams":
        def zero_ssm():
            return SsmParams(channels, state_dim, -np.ones(state_dim), np.zeros((state_dim, channels)),
                             np.zeros((channels, state_dim)), np.zeros(channels), selective)
        return cls(zero_ssm(), zero_ssm(), np.zeros((channels, 2 * channels)), np.zeros(channels),
                   np.zeros((3, 3, channels, channels)), np.zeros(channels))

    def swapped(self) -> "BlockParams":
        """
        The block with both SSMs exchanged and the fusion blocks permuted accordingly.
        """
        channels = self.channels
        fuse_weights = np.concatenate((self.fuse_weights[:, channels:], self.fuse_weights[:, :channels]), axis=1)
        return BlockParams(self.ssm_bwd, self.ssm_fwd, fuse_weights, self.fuse_bias, self.gate_kernel,
                           self.gate_bias, self.seed)


def conv3x3(data: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """
    Zero-padded 3x3 cross-correlation of a (C_in, H, W) array with a (3, 3, C_in, C_out) kernel.
    """
    _, height, width = data.shape
    padded = np.pad(data, ((0, 0), (1, 1), (1, 1)))
    out = np.zeros((kernel.shape[3], height, width))
    for dy in range(3):
        for dx in range(3):
            window = padded[:, dy:dy + height, dx:dx + width]
            out += np.tensordot(kernel[dy, dx], window, axes=(0, 0))
    return out + bias[:, np.newaxis, np.newaxis]


def directional_outputs(feature_map: FeatureMap, order: ScanOrder, bp: BlockParams):
    """
    Forward and backward SSM outputs placed back on the grid, each (C, H, W).
    """
    if feature_map.dims != order.dims:
        raise DimensionMismatch(f"Feature map is {feature_map.dims} but the scan order is {order.dims}")
    if feature_map.channels != bp.channels:
        raise DimensionMismatch(f"Feature map has {feature_map.channels} channels but the block expects {bp.channels}")
    seq = apply_scan(feature_map, order)
    out_fwd = ssm_forward(seq, bp.ssm_fwd)
    out_bwd = flip_sequence(ssm_forward(flip_sequence(seq), bp.ssm_bwd))
    return invert_scan(out_fwd, order).data, invert_scan(out_bwd, order).data


def fuse(o_fwd: np.ndarray, o_bwd: np.ndarray, bp: BlockParams) -> np.ndarray:
    channels = bp.channels
    w_a, w_b = bp.fuse_weights[:, :channels], bp.fuse_weights[:, channels:]
    fused = np.tensordot(w_a, o_fwd, axes=(1, 0)) + np.tensordot(w_b, o_bwd, axes=(1, 0))
    return fused + bp.fuse_bias[:, np.newaxis, np.newaxis]


def mixer_forward(feature_map: FeatureMap, order: ScanOrder, bp: BlockParams) -> FeatureMap:
    """
    F_m alone: the fused bidirectional SSM outputs.
    """
    o_fwd, o_bwd = directional_outputs(feature_map, order, bp)
    return FeatureMap(feature_map.dims, fuse(o_fwd, o_bwd, bp))


def bfs_block_forward(feature_map: FeatureMap, order: ScanOrder, bp: BlockParams) -> FeatureMap:
    """
    F_out = F_in + sigmoid(conv3x3(F_in)) + F_m.

    Args:
        feature_map (FeatureMap): Input F_in, (C, H, W).
        order (ScanOrder): Serialisation used by both SSMs.
        bp (BlockParams): Block parameters.

    Returns:
        FeatureMap: F_out, same shape as the input.
    """
    f_m = mixer_forward(feature_map, order, bp).data
    gate = expit(conv3x3(feature_map.data, bp.gate_kernel, bp.gate_bias))
    return FeatureMap(feature_map.dims, feature_map.data + (gate + f_m))
