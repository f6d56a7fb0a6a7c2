"""
This module provides the scan strategies and the parser of the Scan Specification Format.

A scan specification names a strategy and, for the fermat strategy, its parameters:

    raster
    rect
    fermat
    fermat,lambda_c=0.5,mode=exhaustive

"""
import logging
import math
from typing import Mapping, Optional, Union

import numpy as np

from . import definitions, rules
from .baselines import raster_scan, rect_spiral_scan
from .errors import InvalidScanSpecification, InvalidMatchConfig
from .fermat import SpiralParams, SpiralPoints, gen_spiral_points
from .grid import GridDims, ScanOrder
from .matching import MatchConfig, match_grid
from .rules import SCAN_SPECIFICATION_SEPARATOR, PARAMETER_VALUE_SEPARATOR

logger = logging.getLogger(__name__)


class _Mapping(Mapping):
    """
    Subclass to implement dunder methods that are mandatory for Mapping to avoid repeating the code everywhere.
    """

    def __init__(self) -> None:
        super().__init__()
        self._kwargs = {}

    def __getitem__(self, item):
        return self._kwargs[item]

    def __iter__(self):
        return iter(self._kwargs)

    def __len__(self):
        return len(self._kwargs)


class Strategy(_Mapping):
    """
    Base class of the scan strategies. The mapping holds the strategy parameters.
    """
    name = ""

    def check_validity(self) -> bool:
        """
        Checks the validity of the strategy parameters.

        Returns:
        - bool: True if the strategy is valid.

        """
        return True

    def to_string(self) -> str:
        """
        Returns the strategy as a scan specification string.
        """
        return self.name

    def description(self) -> str:
        raise NotImplementedError

    def scan_order(self, dims: GridDims) -> ScanOrder:
        """
        Returns the serialisation trajectory of this strategy on a grid.
        """
        raise NotImplementedError

    def config_record(self, dims: GridDims) -> dict:
        """
        Returns the parameters actually used on a grid, for reports.
        """
        return {}

    def __eq__(self, other):
        if not isinstance(other, Strategy):
            return NotImplemented
        return type(self) is type(other) and self.to_string() == other.to_string()

    __hash__ = None

    def __repr__(self):
        return f"{self.__class__.__name__}({self.to_string()})"


class RasterStrategy(Strategy):
    name = "raster"

    def description(self) -> str:
        return "Raster scan: row-major, left to right and top to bottom"

    def scan_order(self, dims: GridDims) -> ScanOrder:
        return raster_scan(dims)


class RectSpiralStrategy(Strategy):
    name = "rect"

    def description(self) -> str:
        return "Rectangular spiral: concentric square rings from the center cell outwards, clockwise"

    def scan_order(self, dims: GridDims) -> ScanOrder:
        return rect_spiral_scan(dims)


class FermatStrategy(Strategy):
    """
    Golden-angle Fermat spiral matched to the grid with the continuity constraint.
    """
    name = "fermat"

    def __init__(self,
                 lambda_c: float = rules.DEFAULT_LAMBDA_C,
                 eta_f: Optional[float] = None,
                 eta_c: Optional[float] = None,
                 alpha: Optional[float] = None,
                 phi_g_deg: Optional[float] = None,
                 candidate_count: int = rules.DEFAULT_CANDIDATE_COUNT,
                 mode: str = rules.DEFAULT_MATCH_MODE,
                 ):
        super().__init__()
        parameters = {
            "lambda_c": lambda_c,
            "eta_f": eta_f,
            "eta_c": eta_c,
            "alpha": alpha,
            "phi_g_deg": phi_g_deg,
            "candidate_count": candidate_count,
            "mode": mode,
        }
        self._kwargs = {key: value for key, value in parameters.items() if value is not None}
        self.check_validity()

    @classmethod
    def from_match_config(cls, cfg: MatchConfig, alpha: Optional[float] = None,
                          phi_g_deg: Optional[float] = None) -> "FermatStrategy":
        return cls(lambda_c=cfg.lambda_c, eta_f=cfg.eta_f, eta_c=cfg.eta_c, alpha=alpha, phi_g_deg=phi_g_deg,
                   candidate_count=cfg.candidate_count, mode=cfg.mode)

    def check_validity(self) -> bool:
        """
        Checks every parameter against its type and range.

        Raises:
        - InvalidScanSpecification: If a parameter is unknown, mistyped or out of range.

        Returns:
        - bool: True if all the parameters are valid.

        """
        for key, value in self._kwargs.items():
            if key not in definitions.fermat_parameters:
                raise InvalidScanSpecification(f"Invalid parameter {key!r} for strategy 'fermat'")
            expected_type = definitions.fermat_parameters[key]["type"]
            if expected_type is float and isinstance(value, (int, np.integer)) and not isinstance(value, bool):
                value = float(value)
                self._kwargs[key] = value
            if expected_type is float and isinstance(value, np.floating):
                value = float(value)
                self._kwargs[key] = value
            if isinstance(value, bool) or not isinstance(value, expected_type):
                raise InvalidScanSpecification(f"Invalid type for parameter {key!r}: {value!r}")
            if not definitions.in_range(key, value):
                raise InvalidScanSpecification(f"Parameter {key!r} out of range: {value!r}")
        return True

    def to_string(self) -> str:
        parts = [self.name]
        for key in definitions.fermat_parameters:
            if key in self._kwargs:
                parts.append(f"{key}{PARAMETER_VALUE_SEPARATOR}{self._kwargs[key]!r}"
                             if not isinstance(self._kwargs[key], str)
                             else f"{key}{PARAMETER_VALUE_SEPARATOR}{self._kwargs[key]}")
        return SCAN_SPECIFICATION_SEPARATOR.join(parts)

    def description(self) -> str:
        return f"Fermat spiral with continuity-constrained matching: {self.to_string()} " \
               f"(lambda_c={self['lambda_c']}, mode={self['mode']!r})"

    @property
    def match_config(self) -> MatchConfig:
        try:
            return MatchConfig(lambda_c=self["lambda_c"],
                               eta_f=self._kwargs.get("eta_f"),
                               eta_c=self._kwargs.get("eta_c"),
                               candidate_count=self["candidate_count"],
                               mode=self["mode"])
        except InvalidMatchConfig as err:
            raise InvalidScanSpecification(str(err)) from err

    def spiral_params(self, dims: GridDims) -> SpiralParams:
        phi_g_deg = self._kwargs.get("phi_g_deg")
        return SpiralParams.for_grid(dims,
                                     alpha=self._kwargs.get("alpha"),
                                     phi_g=None if phi_g_deg is None else math.radians(phi_g_deg))

    def spiral(self, dims: GridDims) -> SpiralPoints:
        return gen_spiral_points(self.spiral_params(dims))

    def scan_order(self, dims: GridDims) -> ScanOrder:
        return match_grid(self.spiral(dims), dims, self.match_config)

    def config_record(self, dims: GridDims) -> dict:
        config = self.match_config.resolve(dims)
        params = self.spiral_params(dims)
        return {
            "lambda_c": config.lambda_c,
            "eta_f": config.eta_f,
            "eta_c": config.eta_c,
            "alpha": params.alpha,
            "phi_g_radians": params.phi_g,
            "candidate_count": config.candidate_count,
            "mode": config.mode,
        }


strategy_classes = {
    "raster": RasterStrategy,
    "rect": RectSpiralStrategy,
    "fermat": FermatStrategy,
}


class ScanStrategy(_Mapping):
    """
    Factory class to get the proper strategy depending on the arguments provided.

    To get a strategy from a specification:

    >>> ScanStrategy("fermat,lambda_c=0.5")

    or

    >>> ScanStrategy(specification="rect")

    To get a strategy specifying things separately:

    >>> ScanStrategy(strategy="fermat", lambda_c=0.5, mode="exhaustive")

    """

    def __new__(cls,
                specification: str = None,
                strategy: str = None,
                **parameters,
                ) -> Strategy:
        return get_scan_strategy(specification=specification, strategy=strategy, **parameters)


def _cast_parameter(key: str, text: str, specification: str):
    expected_type = definitions.fermat_parameters[key]["type"]
    try:
        if expected_type is int:
            return int(text)
        return expected_type(text)
    except ValueError:
        raise InvalidScanSpecification(
            f"Could not cast {text!r} to type {expected_type.__name__!r} in {specification!r}") from None


def parse_scan_specification(specification: str) -> Strategy:
    """
    Parse a string following the scan specification format and return a Strategy object.

    Parameters
    ----------
    specification: str

    Returns
    -------
    Strategy
    """
    if not isinstance(specification, str) or not specification:
        raise InvalidScanSpecification(f"Invalid specification {specification!r}")

    parts = specification.split(SCAN_SPECIFICATION_SEPARATOR)
    name, parameter_parts = parts[0], parts[1:]
    if name not in strategy_classes:
        raise InvalidScanSpecification(f"Invalid strategy {name!r} in {specification!r}")

    if name != "fermat":
        if parameter_parts:
            raise InvalidScanSpecification(f"Strategy {name!r} takes no parameters: {specification!r}")
        return strategy_classes[name]()

    parameters = {}
    for part in parameter_parts:
        if part.count(PARAMETER_VALUE_SEPARATOR) != 1:
            raise InvalidScanSpecification(f"Invalid parameter {part!r} in {specification!r}")
        key, text = part.split(PARAMETER_VALUE_SEPARATOR)
        if key not in definitions.fermat_parameters:
            raise InvalidScanSpecification(f"Invalid parameter {key!r} in {specification!r}")
        if key in parameters:
            raise InvalidScanSpecification(f"Parameter {key!r} has multiple definitions in {specification!r}")
        parameters[key] = _cast_parameter(key, text, specification)
    return FermatStrategy(**parameters)


def get_scan_strategy(specification: str = None, strategy: str = None, **parameters) -> Strategy:
    """
        Wildcard entry point for all ways of specifying a strategy:
        - Using a string specification
        - Using the strategy name and keyword parameters
        - Without arguments, the fermat strategy with its defaults
    """
    if specification is None and strategy is None:
        if parameters:
            return FermatStrategy(**parameters)
        return FermatStrategy()

    if specification is not None and (strategy is not None or parameters):
        raise InvalidScanSpecification("Only one of the options can be used to create a strategy")
    if specification is not None:
        return parse_scan_specification(specification)
    if strategy not in strategy_classes:
        raise InvalidScanSpecification(f"Invalid strategy {strategy!r}")
    if strategy != "fermat" and parameters:
        raise InvalidScanSpecification(f"Strategy {strategy!r} takes no parameters")
    try:
        return strategy_classes[strategy](**parameters)
    except TypeError as err:
        raise InvalidScanSpecification(str(err)) from err


def is_valid_scan_specification(specification: Union[str, None]) -> bool:
    try:
        _ = parse_scan_specification(specification)
        return True
    except InvalidScanSpecification:
        return False
