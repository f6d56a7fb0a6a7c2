"""
This module provides utility functions and a class for handling sets of labelled scan strategies.

Functions:
- strategy_dictionary_to_string(strategy_dictionary): Converts a dictionary with
  labelled entries to a single-line strategy set string.
- parse_strategy_set(spec): Parses a strategy set and returns a dictionary of strategies.
- is_a_valid_strategy_set(specification): Checks if a strategy set specification is valid.

Class:
- StrategySet: Read-only mapping between labels and scan strategies.

"""

import os
from pathlib import Path
from typing import Dict, Union

import yaml

from . import rules
from .errors import InvalidScanSpecification
from .rules import STRATEGY_SEPARATOR, STRATEGY_LABEL_SEPARATOR
from .strategies import _Mapping, parse_scan_specification, Strategy


def strategy_dictionary_to_string(strategy_dictionary: Dict[str, str]) -> str:
    """
    Convert a dictionary containing multiple entries to a single line specification
    """
    return STRATEGY_SEPARATOR.join(
        [f"{key}{STRATEGY_LABEL_SEPARATOR}{value}" for key, value in strategy_dictionary.items()])


def parse_strategy_set(spec: Union[str, None]) -> Dict[str, Strategy]:
    """
    Parses a strategy set and returns a dictionary of labelled strategies.

    Args:
        spec (Union[str, None]): The strategy set as a string or None for the default set.

    Returns:
        Dict[str, Strategy]: A dictionary mapping labels to their strategies, in order of appearance.

    Raises:
        InvalidScanSpecification: If a label has multiple definitions or an entry is invalid.

    """
    if spec is None:
        spec = rules.DEFAULT_STRATEGY_SET
    if not isinstance(spec, str) or not spec.strip():
        raise InvalidScanSpecification(f"Invalid strategy set {spec!r}")

    result = {}
    for part in spec.split(STRATEGY_SEPARATOR):
        if not part:
            continue
        # An entry without label is labelled by its strategy name.
        if STRATEGY_LABEL_SEPARATOR in part:
            if part.count(STRATEGY_LABEL_SEPARATOR) != 1:
                raise InvalidScanSpecification(f"Invalid entry {part!r}")
            label, scan_spec = part.split(STRATEGY_LABEL_SEPARATOR)
            if not label:
                raise InvalidScanSpecification(f"Empty label in {part!r}")
        else:
            scan_spec = part
            label = part.split(rules.SCAN_SPECIFICATION_SEPARATOR)[0]

        if label in result:
            raise InvalidScanSpecification(f"Label {label!r} has multiple definitions.")
        result[label] = parse_scan_specification(scan_spec)
    return result


class StrategySet(_Mapping):
    """
    Mapping between labels and the scan strategies compared by one run.
    """

    def __init__(self, strategies: Union[str, Dict[str, str], Path, None] = None):
        super().__init__()
        self.specification = self.get_a_single_strategy_string(strategies)
        self._kwargs = parse_strategy_set(self.specification)

    @staticmethod
    def get_a_single_strategy_string(strategies: Union[str, Dict[str, str], Path, None]) -> Union[str, None]:
        """
        Converts the strategies parameter into a single strategy set string.

        Args:
            strategies (Union[str, Dict[str, str], Path, None]): A strategy set string, a dictionary,
            a YAML file path or None.

        Returns:
            Union[str, None]: The single strategy set string, or None for the default set.

        Raises:
            InvalidScanSpecification: If the argument is not a valid type or the file cannot be read.

        """
        if isinstance(strategies, str) and os.path.exists(strategies):
            strategies = Path(strategies)

        if isinstance(strategies, dict):
            return strategy_dictionary_to_string(strategies)
        if isinstance(strategies, Path):
            try:
                with strategies.open("r", encoding="utf-8") as stream:
                    dict_of_strings = yaml.safe_load(stream)
            except (OSError, yaml.YAMLError) as err:
                raise InvalidScanSpecification(f"Could not read strategy file {str(strategies)!r}: {err}") from err
            if not isinstance(dict_of_strings, dict):
                raise InvalidScanSpecification(f"Strategy file {str(strategies)!r} must map labels to specifications")
            return strategy_dictionary_to_string({str(k): str(v) for k, v in dict_of_strings.items()})
        if isinstance(strategies, str):
            return strategies
        if strategies is None:
            return None

        raise InvalidScanSpecification(
            f"The argument 'strategies' should be a string, a dictionary or a Path. It is {type(strategies)!r}")

    def to_string(self) -> str:
        return strategy_dictionary_to_string({label: strategy.to_string() for label, strategy in self.items()})

    def descriptions(self) -> Dict[str, str]:
        return {label: strategy.description() for label, strategy in self.items()}


def is_a_valid_strategy_set(specification) -> bool:
    """
    Checks if a strategy set specification is valid.
    """
    try:
        _ = StrategySet(specification)
        return True
    except InvalidScanSpecification:
        return False
